#ifndef RODPLAST_ROD_MODEL_HPP
#define RODPLAST_ROD_MODEL_HPP

#include <functional>
#include <string>
#include <vector>

#include "rodplast/cross_section.hpp"

namespace rodplast {

/// Uniform grid on (0, length) with `nodes` grid points (nodes-1 intervals).
struct RodGrid {
    double length = 1.0;
    int nodes = 2;

    double dx() const { return length / (nodes - 1); }
    double x(int i) const { return length * i / (nodes - 1); }
    int intervals() const { return nodes - 1; }
    // Trapezoid weight of node i.
    double node_weight(int i) const { return (i == 0 || i == nodes - 1) ? 0.5 * dx() : dx(); }
};

/// Plastic strain, piecewise constant per (interval x section quadrature
/// point), stored as 5 dev-sym coefficients per sample.
struct PlasticField {
    int samples_per_slice = 0;
    std::vector<Eigen::VectorXd> slices; // each of size 5 * samples_per_slice

    static PlasticField zero(int intervals, int samples_per_slice);
    double max_norm() const;
    double sq_norm() const; // plain coefficient l2, no weights
};

Mat3 plastic_sample(const Eigen::VectorXd& slice, int q);
void set_plastic_sample(Eigen::VectorXd& slice, int q, const DevSym3& v);
SectionStrainField slice_to_field(const Eigen::VectorXd& slice);

/// State q = (v, R, z): nodal frames and positions plus the plastic field.
/// Positions are derived data, integrated from the frames by the midpoint
/// rule, so the compatibility constraint d1 v = R e1 holds by construction.
struct RodState {
    RodGrid grid;
    std::vector<Mat3> frames;    // per node
    std::vector<Vec3> positions; // per node
    PlasticField plastic;        // per interval

    static RodState straight(const RodGrid& grid, int samples_per_slice,
                             const Vec3& v0 = Vec3::Zero(), const Mat3& r0 = Mat3::Identity());

    void recompute_positions(const Vec3& v0);
    /// Checks frame orthogonality and the discrete compatibility relation.
    void validate() const;

    std::string to_json_string() const; // schema "rod-v1"
    static RodState from_json_string(const std::string& text);
};

/// Effective line load l^eff(t, x1) with its time derivative.
struct LoadProfile {
    std::function<Vec3(double, double)> value; // (t, x1) -> force density
    std::function<Vec3(double, double)> rate;  // d/dt of the above

    static LoadProfile zero();
    /// l(t, x1) = beta(t) f(x1) * direction.
    static LoadProfile scaled_profile(std::function<double(double)> beta,
                                      std::function<double(double)> beta_rate,
                                      std::function<double(double)> f, const Vec3& direction);
};

struct PlasticLaw {
    double rho = 1.0;   // hardening modulus, Q_pl(G) = rho |G|^2
    double delta = 1.0; // dissipation strength
};

struct EnergyBreakdown {
    double bending_torsion = 0.0;
    double residual = 0.0;
    double hardening = 0.0;
    double load = 0.0; // int l^eff . v
    double total = 0.0;
};

/// Discrete bending-torsion strain at interval midpoints,
/// K_{j+1/2} = log(R_j^T R_{j+1}) / dx in the skew basis.
std::vector<SkewCoeffs> curvature_field(const RodState& state);

/// Limiting energy: bending/torsion of the curvature relative to the
/// effective plastic curvature, the residual stored energy, quadratic
/// hardening, minus the load potential.
EnergyBreakdown energy_e0(double t, const RodState& state, const CrossSectionModel& model,
                          const PlasticLaw& law, const LoadProfile& load);

/// Same energy with a read-only general (symmetric, possibly trace-carrying)
/// plastic field per slice; the evolving representation stays deviatoric.
EnergyBreakdown energy_e0_general(double t, const RodState& state,
                                  const std::vector<SectionStrainField>& plastic,
                                  const CrossSectionModel& model, const PlasticLaw& law,
                                  const LoadProfile& load);

/// Rate-independent dissipation between two plastic fields:
/// delta * int |zhat - z|. Fields in dev-sym coefficients are always finite.
double dissipation_d0(const PlasticField& z, const PlasticField& zhat, double delta,
                      const CrossSectionModel& model, const RodGrid& grid);

/// General-matrix variant: returns +infinity when any increment fails to be
/// deviatoric-symmetric.
double dissipation_d0_general(const std::vector<std::vector<Mat3>>& z,
                              const std::vector<std::vector<Mat3>>& zhat, double delta,
                              const CrossSectionModel& model, const RodGrid& grid);

} // namespace rodplast

#endif
