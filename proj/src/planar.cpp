#include "rodplast/planar.hpp"

#include <cmath>

namespace rodplast {

namespace {

// Derivative of the convexified sine: cos on [-pi/2, 0], clamped outside.
double sin_tilde_prime(double a, bool convexified) {
    if (!convexified) return std::cos(a);
    if (a <= -M_PI_2) return 0.0;
    if (a >= 0.0) return 1.0;
    return std::cos(a);
}

Mat3 planar_rotation(double a) {
    Mat3 r = Mat3::Identity();
    r(0, 0) = std::cos(a);
    r(0, 1) = -std::sin(a);
    r(1, 0) = std::sin(a);
    r(1, 1) = std::cos(a);
    return r;
}

// Compensated cumulative sum; keeps second differences clean on fine grids.
std::vector<double> cumsum(const std::vector<double>& inc) {
    std::vector<double> out(inc.size() + 1, 0.0);
    double sum = 0.0, comp = 0.0;
    for (size_t i = 0; i < inc.size(); ++i) {
        const double y = inc[i] - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        out[i + 1] = sum;
    }
    return out;
}

} // namespace

BetaSchedule BetaSchedule::linear(double slope) {
    BetaSchedule b;
    b.value = [slope](double t) { return slope * t; };
    b.rate = [slope](double) { return slope; };
    return b;
}

std::vector<double> PlanarConfig::f_tail() const {
    const int n = grid.nodes;
    std::vector<double> tail(n, 0.0);
    // F_i = sum_{m>i} w_m f_m + w_i f_i / 2: the composite trapezoid of
    // int_{x_i}^1 f for interior i.
    double acc = 0.0;
    for (int i = n - 1; i >= 0; --i) {
        const double wf = grid.node_weight(i) * f(grid.x(i));
        tail[i] = acc + 0.5 * wf;
        acc += wf;
    }
    return tail;
}

double PlanarConfig::f_tail_at(double x) const {
    const auto tail = f_tail();
    const double s = x / grid.dx();
    const int i = std::clamp(static_cast<int>(std::floor(s)), 0, grid.nodes - 2);
    const double w = s - i;
    return (1.0 - w) * tail[i] + w * tail[i + 1];
}

double PlanarConfig::f_tail_max() const {
    const auto tail = f_tail();
    double m = 0.0;
    for (double v : tail) m = std::max(m, std::abs(v));
    return m;
}

LoadProfile PlanarConfig::load_profile() const {
    return LoadProfile::scaled_profile(beta.value, beta.rate, f, -Vec3::UnitY());
}

double AngleField::max_abs_diff(const AngleField& o) const {
    double m = 0.0;
    for (size_t i = 0; i < alpha.size(); ++i) m = std::max(m, std::abs(alpha[i] - o.alpha[i]));
    return m;
}

RodState rod_from_angle(const AngleField& angle, const RodGrid& grid, int samples_per_slice) {
    if (static_cast<int>(angle.alpha.size()) != grid.nodes)
        throw InvalidInput("rod_from_angle: angle node count mismatch");
    RodState s;
    s.grid = grid;
    s.frames.resize(grid.nodes);
    for (int i = 0; i < grid.nodes; ++i) s.frames[i] = planar_rotation(angle.alpha[i]);
    s.plastic = PlasticField::zero(grid.intervals(), samples_per_slice);
    s.recompute_positions(Vec3::Zero());
    return s;
}

std::vector<double> angle_derivative(const AngleField& angle, const RodGrid& grid) {
    std::vector<double> d(grid.intervals());
    for (int j = 0; j < grid.intervals(); ++j)
        d[j] = (angle.alpha[j + 1] - angle.alpha[j]) / grid.dx();
    return d;
}

namespace {

// One application of the discrete integral-equation map. kappa may be empty
// (purely elastic). The gram matrix c couples the bending components.
AngleField angle_fixed_point_map(const PlanarConfig& config, const Mat3& gram, double beta_t,
                                 const std::vector<double>& f_tail,
                                 const std::vector<SkewCoeffs>& kappa, const AngleField& cur,
                                 bool convexified) {
    const int n = config.grid.nodes;
    const double dx = config.grid.dx();
    const double c22 = gram(1, 1);

    // y_j = (beta dx / sqrt(2)) * sum_{m>j} F_m stilde'(alpha_m)
    std::vector<double> inc(n - 1);
    double tail = 0.0;
    for (int j = n - 2; j >= 0; --j) {
        tail += f_tail[j + 1] * sin_tilde_prime(cur.alpha[j + 1], convexified);
        const double y = (beta_t * dx / std::sqrt(2.0)) * tail;
        double k2 = y / (2.0 * c22);
        if (!kappa.empty()) {
            const Vec3 kv = kappa[j].vec();
            k2 += kv[1] + (gram(1, 0) * kv[0] + gram(1, 2) * kv[2]) / c22;
        }
        inc[j] = -dx * k2 / std::sqrt(2.0);
    }
    AngleField next;
    next.alpha = cumsum(inc);
    return next;
}

AngleField solve_angle_core(const PlanarConfig& config, const Mat3& gram, double t,
                            const std::vector<SkewCoeffs>& kappa, const AngleField* warm,
                            const AngleSolveOptions& opts) {
    const int n = config.grid.nodes;
    const double beta_t = config.beta.value(t);
    const auto f_tail = config.f_tail();

    AngleField cur;
    if (warm != nullptr && static_cast<int>(warm->alpha.size()) == n)
        cur = *warm;
    else
        cur.alpha.assign(n, 0.0);

    for (int it = 0; it < opts.max_iter; ++it) {
        AngleField next =
            angle_fixed_point_map(config, gram, beta_t, f_tail, kappa, cur, opts.convexified);
        // Damp updates that overshoot the admissible angle box.
        for (int half = 0; half < 60; ++half) {
            double lo = 0.0, hi = 0.0;
            for (double a : next.alpha) {
                lo = std::min(lo, a);
                hi = std::max(hi, a);
            }
            if (lo >= -M_PI_2 - 1e-9 && hi <= 1e-9) break;
            for (int i = 0; i < n; ++i) next.alpha[i] = 0.5 * (next.alpha[i] + cur.alpha[i]);
        }
        const double update = next.max_abs_diff(cur);
        cur = std::move(next);
        if (update <= opts.fp_tol) return cur;
    }
    throw SolverFailure("solve_elastic_angle: fixed point did not converge");
}

} // namespace

AngleField solve_elastic_angle(const PlanarConfig& config, double t, const AngleField* warm,
                               const AngleSolveOptions& opts) {
    if (config.beta.value(t) < 0.0)
        throw InvalidInput("solve_elastic_angle: beta(t) must be non-negative");
    const Mat3 gram = (config.mu / (8.0 * M_PI)) * Mat3::Identity();
    return solve_angle_core(config, gram, t, {}, warm, opts);
}

AngleField solve_angle_with_source(const PlanarConfig& config, const CrossSectionModel& model,
                                   double t, const std::vector<SkewCoeffs>& kappa,
                                   const AngleField* warm, const AngleSolveOptions& opts) {
    return solve_angle_core(config, model.gram(), t, kappa, warm, opts);
}

double elastic_ode_residual(const PlanarConfig& config, double t, const AngleField& angle) {
    const int n = config.grid.nodes;
    const double dx = config.grid.dx();
    const double beta_t = config.beta.value(t);
    const auto f_tail = config.f_tail();
    double worst = std::abs(angle.alpha[0]); // clamp residual
    for (int i = 1; i < n - 1; ++i) {
        const double second =
            ((angle.alpha[i + 1] - angle.alpha[i]) - (angle.alpha[i] - angle.alpha[i - 1])) /
            (dx * dx);
        const double r = -(config.mu / (2.0 * M_PI)) * second +
                         beta_t * f_tail[i] * std::cos(angle.alpha[i]);
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

RegimeCheck elastic_regime_check(const PlanarConfig& config, const AngleField& angle) {
    const auto d = angle_derivative(angle, config.grid);
    double dmax = 0.0;
    for (double v : d) dmax = std::max(dmax, std::abs(v));
    RegimeCheck out;
    const double threshold = config.delta * std::sqrt(3.0) / (config.mu * std::sqrt(8.0));
    out.margin = threshold - dmax / std::sqrt(M_PI); // sup over the disc attained at the rim
    out.member = out.margin >= 0.0;
    return out;
}

namespace {

// Smallest t with beta(t) >= threshold (to 1e-10); +infinity when beta stays
// below the threshold.
double beta_crossing(const BetaSchedule& beta, double threshold) {
    if (threshold <= 0.0) return 0.0;
    double hi = 1.0;
    while (beta.value(hi) < threshold) {
        hi *= 2.0;
        if (hi > 1e18) return std::numeric_limits<double>::infinity();
    }
    double lo = 0.0;
    while (hi - lo > 1e-10 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        if (beta.value(mid) >= threshold)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

std::pair<double, double> t_star_bounds(const PlanarConfig& config) {
    const double f_sup = config.f_tail_max();
    const double beta_low = config.delta * std::sqrt(3.0) / (f_sup * std::sqrt(32.0 * M_PI));
    const double f_half = config.f_tail_at(0.5);
    const double beta_up = 9.0 * config.mu / (8.0 * (M_PI - 3.0) * f_half) *
                           std::max(M_PI * M_PI, 3.0 * M_PI * config.delta * config.delta /
                                                     (16.0 * config.mu * config.mu));
    return {beta_crossing(config.beta, beta_low), beta_crossing(config.beta, beta_up)};
}

// ---------------------------------------------------------------------------

namespace {

struct ReducedStepResult {
    AngleField angle;
    PlasticField plastic;
    RodState lifted;
    EnergyBreakdown energy;
    double diss_increment = 0.0;
    double stayput = 0.0;
    int sweeps = 0;
};

ReducedStepResult reduced_step(const PlanarConfig& config, const CrossSectionModel& model,
                               double t, const AngleField& angle0, const PlasticField& z_prev,
                               const SolveOptions& opts, bool convexified, double prox_lipschitz) {
    const PlasticLaw law{config.rho, config.delta};
    const LoadProfile load = config.load_profile();
    AngleSolveOptions angle_opts;
    angle_opts.convexified = convexified;

    ReducedStepResult out;
    out.angle = angle0;
    out.plastic = z_prev;
    out.lifted = rod_from_angle(out.angle, config.grid, z_prev.samples_per_slice);
    out.lifted.plastic = out.plastic;
    out.stayput = energy_e0(t, out.lifted, model, law, load).total;

    double best_obj = out.stayput;
    AngleField best_angle = out.angle;
    PlasticField best_plastic = out.plastic;

    ProxOptions prox_opts = opts.prox;
    prox_opts.lipschitz = prox_lipschitz;

    ModelSliceQuadratic quad(model, config.rho, SkewCoeffs());
    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        out.sweeps = sweep + 1;
        // alpha block: effective plastic curvature enters as a source.
        std::vector<SkewCoeffs> kappa(config.grid.intervals());
        for (int j = 0; j < config.grid.intervals(); ++j) {
            const auto& slice = out.plastic.slices[j];
            kappa[j] = (slice.size() == 0 || slice.isZero(0.0))
                           ? SkewCoeffs()
                           : model.k_eff(slice_to_field(slice));
        }
        out.angle = solve_angle_with_source(config, model, t, kappa, &out.angle, angle_opts);

        // z block: per-slice proximal solve against the previous time step.
        const auto deriv = angle_derivative(out.angle, config.grid);
        for (int j = 0; j < config.grid.intervals(); ++j) {
            quad.set_curvature(SkewCoeffs(0.0, -std::sqrt(2.0) * deriv[j], 0.0));
            const Eigen::VectorXd warm = out.plastic.slices[j];
            const Eigen::VectorXd u =
                plastic_prox(quad, z_prev.slices[j], config.delta, prox_opts, &warm);
            const double before = slice_objective(quad, warm, z_prev.slices[j], config.delta);
            const double after = slice_objective(quad, u, z_prev.slices[j], config.delta);
            if (after <= before) out.plastic.slices[j] = u;
        }

        out.lifted = rod_from_angle(out.angle, config.grid, out.plastic.samples_per_slice);
        out.lifted.plastic = out.plastic;
        const double obj =
            energy_e0(t, out.lifted, model, law, load).total +
            dissipation_d0(z_prev, out.plastic, config.delta, model, config.grid);
        const double decrease = best_obj - obj;
        if (obj < best_obj) {
            best_obj = obj;
            best_angle = out.angle;
            best_plastic = out.plastic;
        }
        if (decrease < opts.sweep_tol * (1.0 + std::abs(obj))) break;
    }

    out.angle = best_angle;
    out.plastic = best_plastic;
    out.lifted = rod_from_angle(out.angle, config.grid, out.plastic.samples_per_slice);
    out.lifted.plastic = out.plastic;
    out.energy = energy_e0(t, out.lifted, model, law, load);
    out.diss_increment = dissipation_d0(z_prev, out.plastic, config.delta, model, config.grid);
    return out;
}

} // namespace

ReducedTrajectory reduced_incremental_solve(const PlanarConfig& config,
                                            const CrossSectionModel& model,
                                            const std::vector<double>& times,
                                            const SolveOptions& opts, bool convexified) {
    if (times.empty()) throw InvalidInput("reduced_incremental_solve: empty partition");
    const PlasticLaw law{config.rho, config.delta};
    const LoadProfile load = config.load_profile();
    const int m = model.mesh().num_quad();

    ModelSliceQuadratic probe(model, config.rho, SkewCoeffs());
    const double lipschitz =
        opts.prox.lipschitz > 0.0 ? opts.prox.lipschitz : 1.02 * slice_lipschitz(probe);

    ReducedTrajectory traj;
    AngleField angle;
    angle.alpha.assign(config.grid.nodes, 0.0);
    PlasticField z = PlasticField::zero(config.grid.intervals(), m);

    {
        RodState lifted = rod_from_angle(angle, config.grid, m);
        StepRecord rec;
        rec.t = times[0];
        rec.energy = energy_e0(rec.t, lifted, model, law, load);
        rec.objective = rec.energy.total;
        rec.stayput_bound = rec.energy.total;
        traj.lifted.states.push_back(std::move(lifted));
        traj.lifted.records.push_back(rec);
        traj.angles.push_back(angle);
    }

    for (size_t i = 1; i < times.size(); ++i) {
        auto step = reduced_step(config, model, times[i], angle, z, opts, convexified, lipschitz);
        angle = step.angle;
        z = step.plastic;

        StepRecord rec;
        rec.t = times[i];
        rec.energy = step.energy;
        rec.diss_increment = step.diss_increment;
        rec.cumulative_diss = traj.lifted.records.back().cumulative_diss + step.diss_increment;
        rec.stayput_bound = step.stayput;
        rec.objective = step.energy.total + step.diss_increment;
        rec.sweeps = step.sweeps;
        traj.lifted.states.push_back(step.lifted);
        traj.lifted.records.push_back(rec);
        traj.angles.push_back(angle);
    }

    const auto balance = energy_balance_check(traj.lifted, load);
    for (size_t i = 0; i < balance.size(); ++i) traj.lifted.records[i].balance_residual = balance[i];
    return traj;
}

double t_star_estimate(const PlanarConfig& config, const CrossSectionModel& model,
                       const ReducedTrajectory& traj, const SolveOptions& opts, bool convexified) {
    const double tol = 1e-10;
    const auto& records = traj.lifted.records;
    size_t onset = records.size();
    for (size_t i = 0; i < records.size(); ++i) {
        if (traj.lifted.states[i].plastic.max_norm() > tol) {
            onset = i;
            break;
        }
    }
    if (onset == records.size()) return records.back().t; // stayed elastic
    if (onset == 0) return records.front().t;

    // One extra bisection level between the bracketing nodes.
    const double t_lo = records[onset - 1].t;
    const double t_hi = records[onset].t;
    const double t_mid = 0.5 * (t_lo + t_hi);
    ModelSliceQuadratic probe(model, config.rho, SkewCoeffs());
    const double lipschitz = 1.02 * slice_lipschitz(probe);
    const auto mid = reduced_step(config, model, t_mid, traj.angles[onset - 1],
                                  traj.lifted.states[onset - 1].plastic, opts, convexified,
                                  lipschitz);
    if (mid.plastic.max_norm() > tol) return 0.5 * (t_lo + t_mid);
    return 0.5 * (t_mid + t_hi);
}

} // namespace rodplast
