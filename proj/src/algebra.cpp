#include "rodplast/algebra.hpp"

#include <cmath>

namespace rodplast {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

std::array<Mat3, 3> make_skew_basis() {
    std::array<Mat3, 3> basis;
    Mat3 k1 = Mat3::Zero(), k2 = Mat3::Zero(), k3 = Mat3::Zero();
    // K_1 = (0 | -e3 | e2)/sqrt(2)
    k1(2, 1) = -1.0 / kSqrt2;
    k1(1, 2) = 1.0 / kSqrt2;
    // K_2 = (-e2 | e1 | 0)/sqrt(2)
    k2(1, 0) = -1.0 / kSqrt2;
    k2(0, 1) = 1.0 / kSqrt2;
    // K_3 = (-e3 | 0 | e1)/sqrt(2)
    k3(2, 0) = -1.0 / kSqrt2;
    k3(0, 2) = 1.0 / kSqrt2;
    basis[0] = k1;
    basis[1] = k2;
    basis[2] = k3;
    return basis;
}

std::array<Mat3, 5> make_devsym_basis() {
    std::array<Mat3, 5> basis;
    basis[0] = Vec3(1, -1, 0).asDiagonal();
    basis[0] /= kSqrt2;
    basis[1] = Vec3(1, 1, -2).asDiagonal();
    basis[1] /= std::sqrt(6.0);
    auto off = [](int i, int j) {
        Mat3 m = Mat3::Zero();
        m(i, j) = m(j, i) = 1.0 / kSqrt2;
        return m;
    };
    basis[2] = off(0, 1);
    basis[3] = off(0, 2);
    basis[4] = off(1, 2);
    return basis;
}

} // namespace

const std::array<Mat3, 3>& skew_basis() {
    static const std::array<Mat3, 3> basis = make_skew_basis();
    return basis;
}

Mat3 skew_from_coeffs(const SkewCoeffs& k) {
    const auto& basis = skew_basis();
    return k.k1 * basis[0] + k.k2 * basis[1] + k.k3 * basis[2];
}

SkewCoeffs coeffs_from_skew(const Mat3& a) {
    const double scale = a.norm();
    if ((a + a.transpose()).norm() > 1e-12 * std::max(scale, 1.0))
        throw InvalidInput("coeffs_from_skew: input is not skew-symmetric");
    const auto& basis = skew_basis();
    return SkewCoeffs(a.cwiseProduct(basis[0]).sum(), a.cwiseProduct(basis[1]).sum(),
                      a.cwiseProduct(basis[2]).sum());
}

const std::array<Mat3, 5>& DevSym3::basis() {
    static const std::array<Mat3, 5> b = make_devsym_basis();
    return b;
}

DevSym3 DevSym3::from_matrix(const Mat3& m) {
    const Mat3 d = sym(m) - (m.trace() / 3.0) * Mat3::Identity();
    DevSym3 out;
    for (int i = 0; i < 5; ++i) out.c[i] = d.cwiseProduct(basis()[i]).sum();
    return out;
}

Mat3 DevSym3::matrix() const {
    Mat3 m = Mat3::Zero();
    for (int i = 0; i < 5; ++i) m += c[i] * basis()[i];
    return m;
}

PolarFactors polar_decompose(const Mat3& f) {
    if (f.determinant() <= 0.0)
        throw DegenerateDeformation("polar_decompose: det F <= 0");
    Eigen::SelfAdjointEigenSolver<Mat3> eig(f.transpose() * f);
    const Vec3 lam = eig.eigenvalues();
    const Mat3 v = eig.eigenvectors();
    const Vec3 s = lam.cwiseMax(0.0).cwiseSqrt();
    Mat3 r = f * (v * s.cwiseInverse().asDiagonal() * v.transpose());
    // Newton-Schulz orthogonality polish; the eigen route alone drifts to
    // ~1e-12 for poorly conditioned stretches.
    for (int it = 0; it < 2; ++it) r = 0.5 * r * (3.0 * Mat3::Identity() - r.transpose() * r);
    PolarFactors out;
    out.rotation = r;
    out.stretch = sym(r.transpose() * f);
    return out;
}

Mat3 sym(const Mat3& a) { return 0.5 * (a + a.transpose()); }

DevSym3 dev_sym(const Mat3& a) { return DevSym3::from_matrix(a); }

Mat3 matrix_exp_dev(const DevSym3& xi, double scale) {
    Eigen::SelfAdjointEigenSolver<Mat3> eig(scale * xi.matrix());
    const Mat3 v = eig.eigenvectors();
    const Vec3 e = eig.eigenvalues().array().exp();
    return v * e.asDiagonal() * v.transpose();
}

Mat3 sym_log(const Mat3& u) {
    Eigen::SelfAdjointEigenSolver<Mat3> eig(sym(u));
    const Vec3 lam = eig.eigenvalues();
    if (lam.minCoeff() <= 0.0)
        throw InvalidInput("sym_log: matrix is not positive-definite");
    const Mat3 v = eig.eigenvectors();
    const Vec3 l = lam.array().log();
    return v * l.asDiagonal() * v.transpose();
}

Mat3 hat(const Vec3& a) {
    Mat3 m;
    m << 0, -a[2], a[1], a[2], 0, -a[0], -a[1], a[0], 0;
    return m;
}

Vec3 axial(const Mat3& skew) { return Vec3(skew(2, 1), skew(0, 2), skew(1, 0)); }

Vec3 axial_from_coeffs(const SkewCoeffs& k) { return axial(skew_from_coeffs(k)); }

SkewCoeffs coeffs_from_axial(const Vec3& a) {
    return SkewCoeffs(-kSqrt2 * a[0], -kSqrt2 * a[2], kSqrt2 * a[1]);
}

Mat3 so3_exp_axial(const Vec3& a) {
    const double theta = a.norm();
    const Mat3 ax = hat(a);
    double c1, c2; // sin(t)/t and (1-cos t)/t^2
    if (theta < 1e-4) {
        const double t2 = theta * theta;
        c1 = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
        c2 = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
    } else {
        c1 = std::sin(theta) / theta;
        c2 = (1.0 - std::cos(theta)) / (theta * theta);
    }
    return Mat3::Identity() + c1 * ax + c2 * ax * ax;
}

Mat3 so3_exp(const Mat3& skew) { return so3_exp_axial(axial(skew)); }

Vec3 so3_log_axial(const Mat3& r) {
    const double tr = r.trace();
    const double ct = std::clamp(0.5 * (tr - 1.0), -1.0, 1.0);
    const double theta = std::acos(ct);
    if (theta >= M_PI - 1e-6)
        throw LogBranchCut("so3_log: rotation angle at or beyond pi - 1e-6");
    const Mat3 anti = 0.5 * (r - r.transpose());
    double scale; // theta / sin(theta)
    if (theta < 1e-4) {
        const double t2 = theta * theta;
        scale = 1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0;
    } else {
        scale = theta / std::sin(theta);
    }
    return scale * axial(anti);
}

Mat3 so3_log(const Mat3& r) { return hat(so3_log_axial(r)); }

Mat3 so3_left_jacobian_inv(const Vec3& q) {
    const double theta = q.norm();
    const Mat3 ax = hat(q);
    double c2; // coefficient of ax^2
    if (theta < 1e-4) {
        const double t2 = theta * theta;
        c2 = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
    } else {
        c2 = 1.0 / (theta * theta) -
             (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
    }
    return Mat3::Identity() - 0.5 * ax + c2 * ax * ax;
}

} // namespace rodplast
