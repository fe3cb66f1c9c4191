#ifndef RODPLAST_ALGEBRA_HPP
#define RODPLAST_ALGEBRA_HPP

#include <Eigen/Dense>
#include <array>

#include "rodplast/errors.hpp"

namespace rodplast {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

/// Coefficients of a skew matrix in the orthonormal basis K_1, K_2, K_3
/// (Frobenius-orthonormal). K_1 generates twist about e1, K_2/K_3 bending.
struct SkewCoeffs {
    double k1 = 0.0, k2 = 0.0, k3 = 0.0;

    SkewCoeffs() = default;
    SkewCoeffs(double a, double b, double c) : k1(a), k2(b), k3(c) {}
    explicit SkewCoeffs(const Vec3& v) : k1(v[0]), k2(v[1]), k3(v[2]) {}

    Vec3 vec() const { return Vec3(k1, k2, k3); }
    double norm() const { return vec().norm(); }

    SkewCoeffs operator+(const SkewCoeffs& o) const { return SkewCoeffs(vec() + o.vec()); }
    SkewCoeffs operator-(const SkewCoeffs& o) const { return SkewCoeffs(vec() - o.vec()); }
    SkewCoeffs operator*(double s) const { return SkewCoeffs(s * vec()); }
};

/// The fixed orthonormal basis of skew 3x3 matrices:
///   K_1 = (0 | -e3 | e2)/sqrt(2),  K_2 = (-e2 | e1 | 0)/sqrt(2),
///   K_3 = (-e3 | 0 | e1)/sqrt(2).
const std::array<Mat3, 3>& skew_basis();

Mat3 skew_from_coeffs(const SkewCoeffs& k);
SkewCoeffs coeffs_from_skew(const Mat3& a); // throws InvalidInput on non-skew input

/// Trace-free symmetric 3x3 matrices through five coefficients in a fixed
/// Frobenius-orthonormal basis (two diagonal directions, three off-diagonal).
struct DevSym3 {
    Eigen::Matrix<double, 5, 1> c = Eigen::Matrix<double, 5, 1>::Zero();

    DevSym3() = default;
    explicit DevSym3(const Eigen::Matrix<double, 5, 1>& v) : c(v) {}

    static const std::array<Mat3, 5>& basis();
    static DevSym3 from_matrix(const Mat3& m); // projects onto dev-sym part
    Mat3 matrix() const;
    double norm() const { return c.norm(); }
};

struct PolarFactors {
    Mat3 rotation; // R in SO(3)
    Mat3 stretch;  // U symmetric positive-definite, F = R U
};

/// Polar decomposition of F with det F > 0, via the eigendecomposition of
/// F^T F. Throws DegenerateDeformation when det F <= 0.
PolarFactors polar_decompose(const Mat3& f);

Mat3 sym(const Mat3& a);
DevSym3 dev_sym(const Mat3& a);

/// exp(scale * xi) for trace-free symmetric xi; result is symmetric
/// positive-definite with unit determinant.
Mat3 matrix_exp_dev(const DevSym3& xi, double scale);

/// Symmetric matrix logarithm (eigendecomposition); input must be SPD.
Mat3 sym_log(const Mat3& u);

// Axial-vector helpers: hat(a) x = a cross x.
Mat3 hat(const Vec3& a);
Vec3 axial(const Mat3& skew);

// Conversion between axial vectors and K-basis coefficients of the same
// skew matrix: skew_from_coeffs(k) == hat(axial_from_coeffs(k)).
Vec3 axial_from_coeffs(const SkewCoeffs& k);
SkewCoeffs coeffs_from_axial(const Vec3& a);

Mat3 so3_exp(const Mat3& skew);
Mat3 so3_exp_axial(const Vec3& a);

/// Rotation logarithm; requires the rotation angle < pi - 1e-6 and throws
/// LogBranchCut otherwise.
Mat3 so3_log(const Mat3& r);
Vec3 so3_log_axial(const Mat3& r);

/// Inverse of the left Jacobian of the SO(3) exponential at rotation vector q:
///   log(exp(hat(d)) exp(hat(q))) = q + so3_left_jacobian_inv(q) d + O(|d|^2).
/// The right-perturbation analogue uses the transpose.
Mat3 so3_left_jacobian_inv(const Vec3& q);

} // namespace rodplast

#endif
