#ifndef RODPLAST_PLANAR_HPP
#define RODPLAST_PLANAR_HPP

#include "rodplast/eris_solver.hpp"

namespace rodplast {

/// Monotone loading schedule beta(t) with beta(0) = 0.
struct BetaSchedule {
    std::function<double(double)> value;
    std::function<double(double)> rate;

    static BetaSchedule linear(double slope = 1.0);
};

/// One-sided horizontally clamped planar rod on omega = (0, 1) with load
/// l(t, x1) = -beta(t) f(x1) e2 and the isotropic zero-Poisson material.
struct PlanarConfig {
    double mu = 4.0 * M_PI;
    double rho = 1.0;
    double delta = 1.0;
    BetaSchedule beta = BetaSchedule::linear();
    std::function<double(double)> f = [](double) { return 1.0; };
    RodGrid grid{1.0, 257};

    /// Trapezoid tail F_i = integral of f over [x_i, 1] on the grid; the
    /// discrete load source of the lifted energy.
    std::vector<double> f_tail() const;
    double f_tail_at(double x) const; // linear interpolation
    double f_tail_max() const;
    LoadProfile load_profile() const;
};

/// Nodal rotation angle with the clamp alpha(0) = 0.
struct AngleField {
    std::vector<double> alpha;

    double max_abs_diff(const AngleField& o) const;
};

/// Planar rod state from an angle field: frames rotate about e3, positions
/// integrate the frames by the midpoint rule.
RodState rod_from_angle(const AngleField& angle, const RodGrid& grid, int samples_per_slice = 0);

/// Discrete derivative per interval.
std::vector<double> angle_derivative(const AngleField& angle, const RodGrid& grid);

struct AngleSolveOptions {
    double fp_tol = 1e-13; // sup-norm of the fixed-point update
    int max_iter = 100000;
    bool convexified = true; // clamped sine derivative outside [-pi/2, 0]
};

/// Fixed point of the discrete integral-equation map for the elastic angle
/// at loading beta(t); the fixed point is the exact critical point of the
/// discrete energy. Warm start enables continuation in t.
AngleField solve_elastic_angle(const PlanarConfig& config, double t,
                               const AngleField* warm = nullptr,
                               const AngleSolveOptions& opts = {});

/// Same map with a plastic curvature source and model-consistent bending
/// coefficients (used inside the reduced incremental scheme).
AngleField solve_angle_with_source(const PlanarConfig& config, const CrossSectionModel& model,
                                   double t, const std::vector<SkewCoeffs>& kappa,
                                   const AngleField* warm, const AngleSolveOptions& opts);

/// Sup-norm residual of the discrete Euler-Lagrange equation
/// -(mu/2pi) alpha'' + beta F cos(alpha) = 0 at interior nodes.
double elastic_ode_residual(const PlanarConfig& config, double t, const AngleField& angle);

struct RegimeCheck {
    bool member = true;
    double margin = 0.0; // delta sqrt(3)/(mu sqrt(8)) - ||alpha'||_inf / sqrt(pi)
};

/// Two-sided dual-norm membership test for the elastic regime.
RegimeCheck elastic_regime_check(const PlanarConfig& config, const AngleField& angle);

/// Bracket for the first plastic time from the closed-form bounds; infinite
/// endpoints are returned as +infinity sentinels.
std::pair<double, double> t_star_bounds(const PlanarConfig& config);

struct ReducedTrajectory {
    Trajectory lifted; // states, energy records (same layout as the 3D solver)
    std::vector<AngleField> angles;
};

/// Alternating minimization of the reduced functional in (alpha | z); the
/// z-block reuses the per-slice proximal solver, the alpha-block the
/// integral-equation fixed point.
ReducedTrajectory reduced_incremental_solve(const PlanarConfig& config,
                                            const CrossSectionModel& model,
                                            const std::vector<double>& times,
                                            const SolveOptions& opts = {},
                                            bool convexified = true);

/// First time with nonzero plastic strain, refined by one extra incremental
/// step at the midpoint of the bracketing interval. Returns the final time
/// when the trajectory stays elastic.
double t_star_estimate(const PlanarConfig& config, const CrossSectionModel& model,
                       const ReducedTrajectory& traj, const SolveOptions& opts = {},
                       bool convexified = true);

} // namespace rodplast

#endif
