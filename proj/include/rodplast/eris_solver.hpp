#ifndef RODPLAST_ERIS_SOLVER_HPP
#define RODPLAST_ERIS_SOLVER_HPP

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <random>

#include "rodplast/rod_model.hpp"

namespace rodplast {

/// Smooth part of one slice's incremental problem: an affine-quadratic
/// functional of the 5m plastic coefficients (m quadrature samples).
class SliceQuadratic {
  public:
    virtual ~SliceQuadratic() = default;
    virtual int samples() const = 0;
    int dim() const { return 5 * samples(); }
    /// Per-sample quadrature weights entering the dissipation term.
    virtual const Eigen::VectorXd& weights() const = 0;
    virtual double value(const Eigen::VectorXd& u) const = 0;
    virtual Eigen::VectorXd gradient(const Eigen::VectorXd& u) const = 0;
};

/// Slice energy density built from the cross-section model:
///   q_eff(K - k_eff(u)) + ||z_res(u)||_Q^2 + rho * int |u|^2.
class ModelSliceQuadratic : public SliceQuadratic {
  public:
    ModelSliceQuadratic(const CrossSectionModel& model, double rho, const SkewCoeffs& k);
    void set_curvature(const SkewCoeffs& k) { k_ = k.vec(); }

    int samples() const override { return m_; }
    const Eigen::VectorXd& weights() const override { return weights_; }
    double value(const Eigen::VectorXd& u) const override;
    Eigen::VectorXd gradient(const Eigen::VectorXd& u) const override;

  private:
    void project(const Eigen::VectorXd& u, SectionStrainField& field) const;

    const CrossSectionModel* model_;
    double rho_;
    Vec3 k_;
    int m_;
    Eigen::VectorXd weights_;
    // (C_el Psi_j)_q : E_c contracted with the dev-sym basis, 3 x 5 per sample.
    std::vector<Eigen::Matrix<double, 3, 5>> cpsi_basis_;
};

struct ProxOptions {
    double fp_tol = 1e-13;  // fixed-point displacement tolerance (relative)
    int max_iter = 4000;
    double lipschitz = 0.0; // 0 = estimate by power iteration
    int power_iters = 30;
};

/// Estimated largest eigenvalue of the quadratic's linear operator.
double slice_lipschitz(const SliceQuadratic& q, int power_iters = 30);

double slice_objective(const SliceQuadratic& q, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& z_old, double delta);

/// Minimizes value(u) + delta * sum_q w_q |u_q - z_old_q| by an accelerated
/// proximal-gradient iteration with per-sample shrinkage; returns a point
/// that is a fixed point of the proximal-gradient map to fp_tol.
Eigen::VectorXd plastic_prox(const SliceQuadratic& q, const Eigen::VectorXd& z_old, double delta,
                             const ProxOptions& opts = {},
                             const Eigen::VectorXd* warm_start = nullptr);

struct ElasticOptions {
    double grad_tol = 1e-8; // scaled by (1 + |E|)
    int max_iter = 5000;
    double armijo_c = 1e-4;
    int max_backtracks = 60;
};

struct ElasticReport {
    double energy = 0.0; // full energy at exit
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Line search could not make progress; carries the best iterate found.
struct StagnationError : SolverFailure {
    StagnationError(const std::string& what, RodState best_state)
        : SolverFailure(what), best(std::move(best_state)) {}
    RodState best;
};

/// Minimizes E0(t, ., z) over the free frames (node 0 clamped) by Riemannian
/// gradient descent with Barzilai-Borwein steps and Armijo backtracking.
/// Energy never increases from the warm start.
ElasticReport elastic_step(double t, RodState& state, const CrossSectionModel& model,
                           const PlasticLaw& law, const LoadProfile& load,
                           const ElasticOptions& opts = {});

struct SolveOptions {
    double sweep_tol = 1e-10;
    int max_sweeps = 200;
    ElasticOptions elastic;
    ProxOptions prox;
    std::uint64_t seed = 0;
    int stability_competitors = 0;     // 0 disables per-node certification
    double stability_amplitude = 1e-3;
};

struct IncrementalProblem {
    std::vector<double> times; // strictly increasing, times[0] = start
    RodState initial;
    const CrossSectionModel* model = nullptr;
    PlasticLaw law;
    LoadProfile load;
    double kappa = 0.0; // admissible slack per unit time (recorded only)
    SolveOptions opts;
};

struct StepRecord {
    double t = 0.0;
    EnergyBreakdown energy;
    double diss_increment = 0.0;
    double cumulative_diss = 0.0;
    double stayput_bound = 0.0; // E(t_i, q_{i-1}); objective must not exceed it
    double objective = 0.0;     // E(t_i, q_i) + D(z_{i-1}, z_i)
    int sweeps = 0;
    double stability_margin = std::numeric_limits<double>::quiet_NaN();
    double balance_residual = std::numeric_limits<double>::quiet_NaN();
};

struct Trajectory {
    std::vector<RodState> states;
    std::vector<StepRecord> records;
    bool stagnated = false;
    std::string message;
};

/// Time-incremental scheme: at each node minimizes
/// E0(t_i, q) + D0(z_{i-1}, z) by alternating frame and plastic blocks.
Trajectory incremental_solve(const IncrementalProblem& problem);

/// Sampled global-stability margin at one state:
/// min over competitors of E(t, q_hat) + D(z, z_hat) - E(t, q).
double stability_check(double t, const RodState& state, const CrossSectionModel& model,
                       const PlasticLaw& law, const LoadProfile& load, int n_competitors,
                       double amplitude, std::mt19937_64& rng,
                       const ElasticOptions& elastic_opts = {}, bool include_prox_candidate = true,
                       double rho_hint = -1.0);

/// Residual of the global energy balance at every trajectory node.
std::vector<double> energy_balance_check(const Trajectory& trajectory, const LoadProfile& load);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_certification_csv(std::ostream& os, const Trajectory& traj);

/// Prints a floating-point value with 17 significant digits.
std::string format_double(double v);

} // namespace rodplast

#endif
