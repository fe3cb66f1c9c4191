#include "rodplast/eris_solver.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace rodplast {

// ---------------------------------------------------------------------------
// Slice quadratic

ModelSliceQuadratic::ModelSliceQuadratic(const CrossSectionModel& model, double rho,
                                         const SkewCoeffs& k)
    : model_(&model), rho_(rho), k_(k.vec()), m_(model.mesh().num_quad()) {
    if (rho <= 0.0) throw InvalidInput("slice quadratic requires a coercive hardening, rho > 0");
    weights_.resize(m_);
    cpsi_basis_.resize(m_);
    const auto& basis = DevSym3::basis();
    for (int q = 0; q < m_; ++q) {
        weights_[q] = model.mesh().quad_weight(q);
        for (int j = 0; j < 3; ++j) {
            const Mat3 cp = model.tensor().apply(model.psi(j, q));
            for (int c = 0; c < 5; ++c) cpsi_basis_[q](j, c) = cp.cwiseProduct(basis[c]).sum();
        }
    }
}

void ModelSliceQuadratic::project(const Eigen::VectorXd& u, SectionStrainField& field) const {
    field.samples.resize(m_);
    for (int q = 0; q < m_; ++q) field.samples[q] = plastic_sample(u, q);
}

double ModelSliceQuadratic::value(const Eigen::VectorXd& u) const {
    if (u.size() != dim()) throw InvalidInput("slice vector size mismatch");
    double hard = 0.0;
    for (int q = 0; q < m_; ++q) hard += weights_[q] * u.segment<5>(5 * q).squaredNorm();
    if (u.isZero(0.0)) {
        const Vec3 d = k_;
        return d.dot(model_->gram() * d) + rho_ * hard;
    }
    SectionStrainField z;
    project(u, z);
    const Vec3 d = k_ - model_->k_eff(z).vec();
    return d.dot(model_->gram() * d) + model_->q_norm_sq(model_->z_res(z)) + rho_ * hard;
}

Eigen::VectorXd ModelSliceQuadratic::gradient(const Eigen::VectorXd& u) const {
    if (u.size() != dim()) throw InvalidInput("slice vector size mismatch");
    Eigen::VectorXd g(dim());
    const auto& basis = DevSym3::basis();
    if (u.isZero(0.0)) {
        const Vec3 d = k_;
        for (int q = 0; q < m_; ++q)
            g.segment<5>(5 * q) = -2.0 * weights_[q] * (cpsi_basis_[q].transpose() * d);
        return g;
    }
    SectionStrainField z;
    project(u, z);
    const Vec3 d = k_ - model_->k_eff(z).vec();
    const SectionStrainField res = model_->z_res(z);
    for (int q = 0; q < m_; ++q) {
        const Mat3 cres = model_->tensor().apply(res.samples[q]);
        Eigen::Matrix<double, 5, 1> rvec;
        for (int c = 0; c < 5; ++c) rvec[c] = cres.cwiseProduct(basis[c]).sum();
        g.segment<5>(5 * q) = weights_[q] * (-2.0 * (cpsi_basis_[q].transpose() * d) + 2.0 * rvec +
                                             2.0 * rho_ * u.segment<5>(5 * q));
    }
    return g;
}

double slice_lipschitz(const SliceQuadratic& q, int power_iters) {
    const int n = q.dim();
    const Eigen::VectorXd g0 = q.gradient(Eigen::VectorXd::Zero(n));
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
    for (int i = 0; i < n; ++i) v[i] += 0.01 * std::sin(0.7 * i); // deterministic seed vector
    v.normalize();
    double lam = 1.0;
    for (int it = 0; it < power_iters; ++it) {
        Eigen::VectorXd av = q.gradient(v) - g0;
        lam = av.norm();
        if (lam <= 0.0) return 1.0;
        v = av / lam;
    }
    return lam;
}

double slice_objective(const SliceQuadratic& q, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& z_old, double delta) {
    double diss = 0.0;
    const auto& w = q.weights();
    for (int s = 0; s < q.samples(); ++s)
        diss += w[s] * (u.segment<5>(5 * s) - z_old.segment<5>(5 * s)).norm();
    return q.value(u) + delta * diss;
}

namespace {

// Per-sample shrinkage toward the prox center.
void group_shrink(const Eigen::VectorXd& v, const Eigen::VectorXd& center,
                  const Eigen::VectorXd& w, double tau_delta, Eigen::VectorXd& out) {
    const int m = static_cast<int>(w.size());
    out.resize(v.size());
    for (int s = 0; s < m; ++s) {
        const Eigen::Matrix<double, 5, 1> d = v.segment<5>(5 * s) - center.segment<5>(5 * s);
        const double nd = d.norm();
        const double thr = tau_delta * w[s];
        if (nd <= thr)
            out.segment<5>(5 * s) = center.segment<5>(5 * s);
        else
            out.segment<5>(5 * s) = center.segment<5>(5 * s) + (1.0 - thr / nd) * d;
    }
}

} // namespace

Eigen::VectorXd plastic_prox(const SliceQuadratic& q, const Eigen::VectorXd& z_old, double delta,
                             const ProxOptions& opts, const Eigen::VectorXd* warm_start) {
    if (z_old.size() != q.dim()) throw InvalidInput("plastic_prox: z_old size mismatch");
    if (delta < 0.0) throw InvalidInput("plastic_prox: delta must be non-negative");
    const double lips = opts.lipschitz > 0.0 ? opts.lipschitz
                                             : 1.02 * slice_lipschitz(q, opts.power_iters);
    const double tau = 1.0 / lips;

    Eigen::VectorXd x = warm_start ? *warm_start : z_old;
    Eigen::VectorXd y = x, x_new, trial;
    double theta = 1.0;
    const double scale = 1.0 + z_old.norm();

    auto pg_step = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
        trial = v - tau * q.gradient(v);
        group_shrink(trial, z_old, q.weights(), tau * delta, out);
    };

    // Accelerated proximal gradient with gradient-based restart (no objective
    // comparisons, which stall at float resolution near the minimum).
    for (int it = 0; it < opts.max_iter; ++it) {
        pg_step(y, x_new);
        if ((y - x_new).dot(x_new - x) > 0.0) {
            y = x;
            theta = 1.0;
            pg_step(y, x_new);
        }
        const double move = (x_new - x).norm();
        const double theta_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
        y = x_new + ((theta - 1.0) / theta_new) * (x_new - x);
        theta = theta_new;
        x = x_new;
        if (move <= opts.fp_tol * scale) break;
    }

    // Verify stationarity of the plain proximal-gradient map.
    for (int it = 0; it < 50; ++it) {
        pg_step(x, x_new);
        const double move = (x_new - x).norm();
        x = x_new;
        if (move <= opts.fp_tol * scale) break;
    }
    return x;
}

// ---------------------------------------------------------------------------
// Elastic block

namespace {

struct ElasticWork {
    const CrossSectionModel* model;
    const LoadProfile* load;
    double t;
    std::vector<SkewCoeffs> kappa; // effective plastic curvature per interval
    std::vector<Vec3> p_suffix;    // load resultants per node
    double const_energy;           // residual + hardening (frame independent)

    double energy(const RodState& s) const {
        double bend = 0.0;
        const double dx = s.grid.dx();
        const auto curv = curvature_field(s);
        for (size_t j = 0; j < curv.size(); ++j) bend += dx * model->q_eff(curv[j] - kappa[j]);
        double loadv = 0.0;
        for (int i = 0; i < s.grid.nodes; ++i)
            loadv += s.grid.node_weight(i) * load->value(t, s.grid.x(i)).dot(s.positions[i]);
        return bend + const_energy - loadv;
    }

    // Tangent-space gradient, axial coordinates per node (node 0 clamped).
    void gradient(const RodState& s, std::vector<Vec3>& g) const {
        const int n = s.grid.nodes;
        const double dx = s.grid.dx();
        g.assign(n, Vec3::Zero());
        const Mat3 acoef_t = [] {
            Mat3 a = Mat3::Zero();
            a(0, 0) = -std::sqrt(2.0);
            a(1, 2) = -std::sqrt(2.0);
            a(2, 1) = std::sqrt(2.0);
            return a.transpose().eval(); // coeffs(axial a) = A a
        }();
        std::vector<Vec3> qvec(n - 1), u(n - 1);
        for (int i = 0; i < n - 1; ++i) {
            qvec[i] = so3_log_axial(s.frames[i].transpose() * s.frames[i + 1]);
            const SkewCoeffs ki = coeffs_from_axial(qvec[i]) * (1.0 / dx);
            const Vec3 y = 2.0 * (model->gram() * (ki - kappa[i]).vec());
            u[i] = acoef_t * y;
        }
        for (int j = 1; j < n; ++j) {
            Vec3 acc = Vec3::Zero();
            acc += so3_left_jacobian_inv(qvec[j - 1]) * u[j - 1];
            if (j < n - 1) acc -= so3_left_jacobian_inv(qvec[j]).transpose() * u[j];
            acc -= Vec3::UnitX().cross(Vec3(s.frames[j].transpose() * p_suffix[j]));
            g[j] = acc;
        }
    }
};

double flat_dot(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += a[i].dot(b[i]);
    return acc;
}

} // namespace

ElasticReport elastic_step(double t, RodState& state, const CrossSectionModel& model,
                           const PlasticLaw& law, const LoadProfile& load,
                           const ElasticOptions& opts) {
    ElasticWork work;
    work.model = &model;
    work.load = &load;
    work.t = t;
    const int n = state.grid.nodes;
    const double dx = state.grid.dx();

    work.kappa.assign(state.grid.intervals(), SkewCoeffs());
    work.const_energy = 0.0;
    const int m = model.mesh().num_quad();
    for (int j = 0; j < state.grid.intervals(); ++j) {
        const auto& slice = state.plastic.slices[j];
        if (slice.size() == 0 || slice.isZero(0.0)) continue;
        const SectionStrainField z = slice_to_field(slice);
        work.kappa[j] = model.k_eff(z);
        work.const_energy += dx * model.q_norm_sq(model.z_res(z));
        double hard = 0.0;
        for (int q = 0; q < m; ++q)
            hard += model.mesh().quad_weight(q) * slice.segment<5>(5 * q).squaredNorm();
        work.const_energy += dx * law.rho * hard;
    }

    // Load resultants: P_j = dx * (sum_{m>j} w_m l_m + w_j l_j / 2).
    work.p_suffix.assign(n, Vec3::Zero());
    {
        Vec3 tail = Vec3::Zero();
        for (int i = n - 1; i >= 0; --i) {
            const Vec3 li = load.value(t, state.grid.x(i));
            work.p_suffix[i] = dx * (tail + 0.5 * state.grid.node_weight(i) * li);
            tail += state.grid.node_weight(i) * li;
        }
    }

    double energy = work.energy(state);
    std::vector<Vec3> grad, grad_prev, step_prev;
    work.gradient(state, grad);
    double gnorm = std::sqrt(flat_dot(grad, grad));

    ElasticReport report;
    const double c_gram = model.gram().norm();
    double eta0 = dx / (8.0 * c_gram); // rough inverse curvature of the bending term
    double eta = eta0;

    auto retract = [&](const RodState& base, const std::vector<Vec3>& dir, double step,
                       RodState& out) {
        out = base;
        for (int j = 1; j < n; ++j)
            out.frames[j] = base.frames[j] * so3_exp_axial(step * dir[j]);
        out.recompute_positions(base.positions[0]);
    };

    RodState trial = state;
    for (int it = 0; it < opts.max_iter; ++it) {
        if (gnorm <= opts.grad_tol * (1.0 + std::abs(energy))) {
            report.converged = true;
            break;
        }
        std::vector<Vec3> dir(n);
        for (int j = 0; j < n; ++j) dir[j] = -grad[j];

        // Barzilai-Borwein step from the previous move, Armijo safeguarded.
        if (it > 0) {
            std::vector<Vec3> yv(n);
            for (int j = 0; j < n; ++j) yv[j] = grad[j] - grad_prev[j];
            const double sy = flat_dot(step_prev, yv);
            const double ss = flat_dot(step_prev, step_prev);
            if (sy > 1e-300)
                eta = std::clamp(ss / sy, 1e-10 * eta0, 1e4 * eta0);
            else
                eta = eta0;
        }

        bool accepted = false;
        for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
            retract(state, dir, eta, trial);
            const double trial_energy = work.energy(trial);
            if (trial_energy <= energy - opts.armijo_c * eta * gnorm * gnorm) {
                grad_prev = grad;
                step_prev.assign(n, Vec3::Zero());
                for (int j = 0; j < n; ++j) step_prev[j] = eta * dir[j];
                state = std::move(trial);
                trial = state;
                energy = trial_energy;
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if (!accepted) {
            throw StagnationError("elastic_step: line search failed " +
                                      std::to_string(opts.max_backtracks + 1) +
                                      " times consecutively",
                                  state);
        }
        work.gradient(state, grad);
        gnorm = std::sqrt(flat_dot(grad, grad));
        report.iterations = it + 1;
    }
    if (gnorm <= opts.grad_tol * (1.0 + std::abs(energy))) report.converged = true;
    report.energy = energy;
    report.grad_norm = gnorm;
    return report;
}

// ---------------------------------------------------------------------------
// Incremental scheme

Trajectory incremental_solve(const IncrementalProblem& problem) {
    if (problem.model == nullptr) throw InvalidInput("incremental_solve: missing model");
    if (problem.times.size() < 1) throw InvalidInput("incremental_solve: empty partition");
    for (size_t i = 1; i < problem.times.size(); ++i)
        if (problem.times[i] <= problem.times[i - 1])
            throw InvalidInput("incremental_solve: partition must be strictly increasing");
    problem.initial.validate();

    const CrossSectionModel& model = *problem.model;
    const SolveOptions& opts = problem.opts;
    std::mt19937_64 rng(opts.seed);

    Trajectory traj;
    traj.states.push_back(problem.initial);
    {
        StepRecord rec;
        rec.t = problem.times[0];
        rec.energy = energy_e0(rec.t, problem.initial, model, problem.law, problem.load);
        rec.objective = rec.energy.total;
        rec.stayput_bound = rec.energy.total;
        traj.records.push_back(rec);
    }

    ProxOptions prox_opts = opts.prox;
    if (prox_opts.lipschitz <= 0.0) {
        ModelSliceQuadratic probe(model, problem.law.rho, SkewCoeffs());
        prox_opts.lipschitz = 1.02 * slice_lipschitz(probe, prox_opts.power_iters);
    }

    for (size_t i = 1; i < problem.times.size(); ++i) {
        const double t = problem.times[i];
        RodState q = traj.states.back();
        const PlasticField z_prev = q.plastic;

        const double stayput = energy_e0(t, q, model, problem.law, problem.load).total;
        RodState best = q;
        double best_obj = stayput;
        int sweeps = 0;
        try {
            for (; sweeps < opts.max_sweeps; ++sweeps) {
                elastic_step(t, q, model, problem.law, problem.load, opts.elastic);
                const auto curv = curvature_field(q);
                ModelSliceQuadratic quad(model, problem.law.rho, SkewCoeffs());
                for (int j = 0; j < q.grid.intervals(); ++j) {
                    quad.set_curvature(curv[j]);
                    const Eigen::VectorXd warm = q.plastic.slices[j];
                    const Eigen::VectorXd u = plastic_prox(quad, z_prev.slices[j],
                                                           problem.law.delta, prox_opts, &warm);
                    const double before =
                        slice_objective(quad, warm, z_prev.slices[j], problem.law.delta);
                    const double after =
                        slice_objective(quad, u, z_prev.slices[j], problem.law.delta);
                    if (after <= before) q.plastic.slices[j] = u;
                }
                const double obj =
                    energy_e0(t, q, model, problem.law, problem.load).total +
                    dissipation_d0(z_prev, q.plastic, problem.law.delta, model, q.grid);
                const double decrease = best_obj - obj;
                if (obj < best_obj) {
                    best = q;
                    best_obj = obj;
                }
                if (decrease < opts.sweep_tol * (1.0 + std::abs(obj))) {
                    ++sweeps;
                    break;
                }
            }
        } catch (const StagnationError& err) {
            traj.stagnated = true;
            traj.message = err.what();
        }

        StepRecord rec;
        rec.t = t;
        rec.energy = energy_e0(t, best, model, problem.law, problem.load);
        rec.diss_increment =
            dissipation_d0(z_prev, best.plastic, problem.law.delta, model, best.grid);
        rec.cumulative_diss = traj.records.back().cumulative_diss + rec.diss_increment;
        rec.stayput_bound = stayput;
        rec.objective = rec.energy.total + rec.diss_increment;
        rec.sweeps = sweeps;
        if (opts.stability_competitors > 0)
            rec.stability_margin =
                stability_check(t, best, model, problem.law, problem.load,
                                opts.stability_competitors, opts.stability_amplitude, rng,
                                opts.elastic, true, problem.law.rho);
        traj.states.push_back(std::move(best));
        traj.records.push_back(rec);
        if (traj.stagnated) break;
    }

    const auto balance = energy_balance_check(traj, problem.load);
    for (size_t i = 0; i < balance.size(); ++i) traj.records[i].balance_residual = balance[i];
    return traj;
}

double stability_check(double t, const RodState& state, const CrossSectionModel& model,
                       const PlasticLaw& law, const LoadProfile& load, int n_competitors,
                       double amplitude, std::mt19937_64& rng, const ElasticOptions& elastic_opts,
                       bool include_prox_candidate, double rho_hint) {
    const double e0 = energy_e0(t, state, model, law, load).total;
    double margin = std::numeric_limits<double>::infinity();
    std::normal_distribution<double> gauss(0.0, 1.0);

    auto eval_competitor = [&](const PlasticField& zhat) {
        RodState comp = state;
        comp.plastic = zhat;
        bool same = true;
        for (size_t j = 0; j < zhat.slices.size() && same; ++j)
            same = (zhat.slices[j] - state.plastic.slices[j]).lpNorm<Eigen::Infinity>() == 0.0;
        if (!same) {
            try {
                elastic_step(t, comp, model, law, load, elastic_opts);
            } catch (const StagnationError& err) {
                comp = err.best;
            }
        }
        const double e = energy_e0(t, comp, model, law, load).total;
        const double d = dissipation_d0(state.plastic, zhat, law.delta, model, state.grid);
        margin = std::min(margin, e + d - e0);
    };

    for (int c = 0; c < n_competitors; ++c) {
        PlasticField zhat = state.plastic;
        for (auto& slice : zhat.slices) {
            Eigen::VectorXd noise(slice.size());
            for (int k = 0; k < noise.size(); ++k) noise[k] = gauss(rng);
            const double nn = noise.norm();
            if (nn > 0.0) slice += (amplitude / nn) * std::sqrt(double(slice.size() / 5)) * noise;
        }
        eval_competitor(zhat);
    }

    if (include_prox_candidate && amplitude != 0.0) {
        const double rho = rho_hint > 0.0 ? rho_hint : law.rho;
        const auto curv = curvature_field(state);
        ModelSliceQuadratic quad(model, rho, SkewCoeffs());
        PlasticField zhat = state.plastic;
        bool moved = false;
        for (int j = 0; j < state.grid.intervals(); ++j) {
            quad.set_curvature(curv[j]);
            const Eigen::VectorXd u = plastic_prox(quad, state.plastic.slices[j], law.delta);
            if ((u - state.plastic.slices[j]).lpNorm<Eigen::Infinity>() > 1e-12) {
                zhat.slices[j] = u;
                moved = true;
            }
        }
        if (moved) eval_competitor(zhat);
    }
    return n_competitors > 0 || include_prox_candidate ? (std::isfinite(margin) ? margin : 0.0)
                                                       : 0.0;
}

std::vector<double> energy_balance_check(const Trajectory& trajectory, const LoadProfile& load) {
    const size_t n = trajectory.records.size();
    std::vector<double> residual(n, 0.0);
    if (n == 0) return residual;

    auto power = [&](size_t i) {
        const RodState& s = trajectory.states[i];
        const double t = trajectory.records[i].t;
        double p = 0.0;
        for (int m = 0; m < s.grid.nodes; ++m)
            p -= s.grid.node_weight(m) * load.rate(t, s.grid.x(m)).dot(s.positions[m]);
        return p;
    };

    const double e_start = trajectory.records[0].energy.total;
    double work = 0.0;
    double p_prev = power(0);
    residual[0] = 0.0;
    for (size_t i = 1; i < n; ++i) {
        const double p_cur = power(i);
        const double dt = trajectory.records[i].t - trajectory.records[i - 1].t;
        work += 0.5 * dt * (p_prev + p_cur);
        p_prev = p_cur;
        residual[i] = trajectory.records[i].energy.total + trajectory.records[i].cumulative_diss -
                      e_start - work;
    }
    return residual;
}

// ---------------------------------------------------------------------------
// Serialization helpers

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,total,bending_torsion,residual,hardening,load,diss_increment,tip_x,tip_y,tip_z\n";
    for (size_t i = 0; i < traj.records.size(); ++i) {
        const auto& r = traj.records[i];
        const Vec3 tip = traj.states[i].positions.back();
        os << format_double(r.t) << ',' << format_double(r.energy.total) << ','
           << format_double(r.energy.bending_torsion) << ',' << format_double(r.energy.residual)
           << ',' << format_double(r.energy.hardening) << ',' << format_double(r.energy.load)
           << ',' << format_double(r.diss_increment) << ',' << format_double(tip[0]) << ','
           << format_double(tip[1]) << ',' << format_double(tip[2]) << '\n';
    }
}

void write_certification_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,stability_margin,balance_residual\n";
    for (const auto& r : traj.records)
        os << format_double(r.t) << ',' << format_double(r.stability_margin) << ','
           << format_double(r.balance_residual) << '\n';
}

} // namespace rodplast
