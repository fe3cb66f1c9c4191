#ifndef RODPLAST_GAMMA_HPP
#define RODPLAST_GAMMA_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "rodplast/rod_model.hpp"

namespace rodplast {

/// Concrete 3D material law used by the scaled-energy harness:
///   W_el(F)  = (mu/4) |F^T F - I|^2 for det F > 0,
///   W_pl(F)  = rho |F - I|^2 on K_pl = { exp(xi) : xi dev-sym, |xi| <= r },
///   R_pl     = delta |.| on deviatoric increments,
/// strain-gradient densities |.|^p with scalings h^{-alpha_C p}, h^{alpha_R p}.
struct MaterialLaw3D {
    double mu = 1.0;
    double rho = 1.0;
    double delta = 1.0;
    double r = 0.5;
    double p = 4.0;
    double alpha_C = 0.4;
    double alpha_R = 0.3;

    void validate() const; // throws InvalidInput on violated constraints

    double w_el(const Mat3& f) const;   // +infinity encoded by the caller's det check
    double q_el(const Mat3& g) const { return mu * sym(g).squaredNorm(); }
    bool in_kpl(const Mat3& f) const;
    double w_pl(const Mat3& f) const;   // infinity outside K_pl
};

/// Tensor-product quadrature grid over Omega = (0, length) x disc:
/// uniform x1 nodes (with endpoints), Gauss-Legendre radii, uniform angles.
/// Polynomial integrands in xbar are integrated exactly.
struct GammaGrid {
    int n1 = 0, n2 = 0, n3 = 0;
    double length = 1.0;
    double radius = 0.0;
    std::vector<double> x1, w1;     // nodes and trapezoid weights
    std::vector<double> rr, wr_jac; // radii and GL weight * r
    std::vector<double> th;
    double wth = 0.0;

    static GammaGrid disc(int n1, int n2, int n3, double length = 1.0);

    int size() const { return n1 * n2 * n3; }
    int index(int i1, int i2, int i3) const { return (i1 * n2 + i2) * n3 + i3; }
    Vec2 xbar(int i2, int i3) const {
        return Vec2(rr[i2] * std::cos(th[i3]), rr[i2] * std::sin(th[i3]));
    }
    double weight(int i1, int i2, int /*i3*/) const { return w1[i1] * wr_jac[i2] * wth; }
    double measure() const; // total quadrature measure of Omega
};

/// Analytic limit rod configuration (v, R) with its bending-torsion strain.
struct RodPath {
    std::function<Vec3(double)> v;
    std::function<Mat3(double)> rot;
    std::function<Mat3(double)> curvature; // K_R = R^T dR/dx1, skew

    static RodPath straight();
    /// Planar arc with K_R = kappa * sqrt(2) K_2 (angle alpha = -kappa x1).
    static RodPath constant_curvature(double kappa);
};

/// Sampled scaled deformation: y^h, its scaled gradient, and the plastic
/// field on the quadrature grid.
struct ScaledField3D {
    double h = 0.0;
    const GammaGrid* grid = nullptr;
    std::vector<Vec3> y;
    std::vector<Mat3> grad_h;
    std::vector<Mat3> z;
};

using VolumeField = std::function<Mat3(double, const Vec2&)>; // (x1, xbar)

/// Cosserat ansatz y = v + h R xbar with the closed-form scaled gradient
/// grad_h y = R (I + h (K_R xbar | 0)). Verifies the metric identity at every
/// sample and admissibility det > 0 (DegenerateDeformation otherwise).
ScaledField3D build_cosserat(const RodPath& path, const GammaGrid& grid, double h,
                             const VolumeField& z = nullptr);

struct RecoveryPlasticField {
    double h = 0.0;
    const GammaGrid* grid = nullptr;
    std::vector<Mat3> zh;       // recovered plastic strain
    std::vector<Mat3> ztilde;   // increment driving the exponential path
    std::vector<char> in_kpl;   // membership mask U^h
    double outside_fraction() const;
};

/// Multiplicative plastic recovery: on the membership set U^h,
/// zh = (exp(h ztilde)(I + h z) - I)/h, elsewhere zh = z.
RecoveryPlasticField recovery_plastic(const VolumeField& z, const VolumeField& ztilde,
                                      double h, const MaterialLaw3D& law, const GammaGrid& grid);

struct Energy3DTerms {
    double w_el = 0.0;
    double h_c = 0.0;
    double h_r = 0.0;
    double w_pl = 0.0; // +infinity when some plastic factor leaves K_pl
    bool hardening_finite = true;
    double total() const { return w_el + h_c + h_r + w_pl; }
};

/// Term-wise scaled energies. Strain-gradient terms use finite differences
/// of the polar factors on the grid; `scaled_gradients` switches the normal
/// derivatives to the h^-1-scaled variant.
Energy3DTerms energy_3d(const ScaledField3D& field, const MaterialLaw3D& law,
                        bool scaled_gradients = false);

/// Derivative fields used by the strain-gradient terms (exposed for the
/// equivalence check |grad sqrt(C)| vs |grad C|/2).
struct StrainGradientFields {
    std::vector<double> grad_sqrt_c; // pointwise Frobenius norms
    std::vector<double> grad_c;
    std::vector<double> grad_r;
    std::vector<double> sqrt_c_dist; // |sqrt(C) - I| pointwise
};
StrainGradientFields strain_gradient_fields(const ScaledField3D& field);

/// Exact dissipation of the exponential path behind a recovery pair:
/// delta * int_{U^h} |ztilde|.
double dissipation_3d(const RecoveryPlasticField& recovery, double h, double delta);

struct ConvergenceRow {
    double h = 0.0;
    double w_el = 0.0, h_c = 0.0, h_r = 0.0, w_pl = 0.0;
    double dissipation = 0.0;
    double gap = 0.0; // |w_el term - corrector-free limit on the same grid|
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    double limit_w_el = 0.0;      // quadrature of Q_el(sym(K_R xbar|0) - sym z)
    double limit_dissipation = 0.0;
    double slope_gap = 0.0;       // fitted log-log slopes
    double slope_h_c = 0.0;
    double slope_h_r = 0.0;
};

ConvergenceReport convergence_study(const RodPath& path, const VolumeField& z,
                                    const VolumeField& ztilde, const std::vector<double>& h_list,
                                    const MaterialLaw3D& law, const GammaGrid& grid,
                                    bool scaled_gradients = false);

/// Least-squares slope of log|y| against log x (zero rows are skipped).
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace rodplast

#endif
