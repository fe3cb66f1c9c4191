#include <doctest.h>

#include <random>

#include "rodplast/eris_solver.hpp"

using namespace rodplast;

namespace {

std::mt19937_64 rng(91523);

double urand(double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(rng);
}

// Quadratic acting on selected coefficients through a coupling matrix; the
// remaining coordinates carry a unit quadratic to keep the problem coercive.
class ToyQuadratic : public SliceQuadratic {
  public:
    ToyQuadratic(int samples, Eigen::MatrixXd coupling, Eigen::VectorXd target,
                 std::vector<int> active)
        : m_(samples), coupling_(std::move(coupling)), target_(std::move(target)),
          active_(std::move(active)) {
        weights_ = Eigen::VectorXd::Ones(m_);
    }

    int samples() const override { return m_; }
    const Eigen::VectorXd& weights() const override { return weights_; }

    double value(const Eigen::VectorXd& u) const override {
        const Eigen::VectorXd v = gather(u) - target_;
        const double rest = u.squaredNorm() - gather(u).squaredNorm();
        return v.dot(coupling_ * v) + rest;
    }
    Eigen::VectorXd gradient(const Eigen::VectorXd& u) const override {
        Eigen::VectorXd g = 2.0 * u;
        const Eigen::VectorXd v = 2.0 * (coupling_ * (gather(u) - target_));
        for (size_t i = 0; i < active_.size(); ++i) g[active_[i]] = v[i];
        return g;
    }

  private:
    Eigen::VectorXd gather(const Eigen::VectorXd& u) const {
        Eigen::VectorXd v(active_.size());
        for (size_t i = 0; i < active_.size(); ++i) v[i] = u[active_[i]];
        return v;
    }
    int m_;
    Eigen::MatrixXd coupling_;
    Eigen::VectorXd target_;
    std::vector<int> active_;
    Eigen::VectorXd weights_;
};

LoadProfile planar_load(double rate = 1.0) {
    return LoadProfile::scaled_profile([rate](double t) { return rate * t; },
                                       [rate](double) { return rate; },
                                       [](double) { return 1.0; }, -Vec3::UnitY());
}

} // namespace

TEST_SUITE_BEGIN("eris_solver");

TEST_CASE("plastic_prox reproduces the scalar soft-threshold oracle") {
    // One sample, a (u0 - g)^2 on the first coefficient: the minimizer of
    // a (z - g)^2 + delta |z| is sign(g) max(0, |g| - delta/(2a)).
    for (int it = 0; it < 30; ++it) {
        const double a = urand(0.4, 3.0);
        const double g = urand(-2.0, 2.0);
        const double delta = urand(0.0, 2.0);
        Eigen::MatrixXd coupling(1, 1);
        coupling << a;
        Eigen::VectorXd target(1);
        target << g;
        ToyQuadratic q(1, coupling, target, {0});
        const Eigen::VectorXd z0 = Eigen::VectorXd::Zero(5);
        const Eigen::VectorXd u = plastic_prox(q, z0, delta);
        const double expected =
            (std::abs(g) > delta / (2 * a)) ? (g > 0 ? 1 : -1) * (std::abs(g) - delta / (2 * a))
                                            : 0.0;
        CHECK(u[0] == doctest::Approx(expected).epsilon(1e-9));
        for (int i = 1; i < 5; ++i) CHECK(std::abs(u[i]) < 1e-12);
    }
}

TEST_CASE("plastic_prox with delta = 0 returns the quadratic minimizer") {
    Eigen::MatrixXd coupling(2, 2);
    coupling << 2.0, 0.4, 0.4, 1.1;
    Eigen::VectorXd target(2);
    target << 0.7, -0.9;
    ToyQuadratic q(2, coupling, target, {0, 5});
    const Eigen::VectorXd z0 = Eigen::VectorXd::Zero(10);
    const Eigen::VectorXd u = plastic_prox(q, z0, 0.0);
    CHECK(u[0] == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(u[5] == doctest::Approx(-0.9).epsilon(1e-9));
}

TEST_CASE("plastic_prox agrees with a dense grid search on a 2-sample reduced problem") {
    Eigen::MatrixXd coupling(2, 2);
    coupling << 1.7, -0.5, -0.5, 0.9; // SPD
    Eigen::VectorXd target(2);
    target << 1.13, -0.41;
    const double delta = 0.8;
    ToyQuadratic q(2, coupling, target, {0, 5});
    const Eigen::VectorXd z0 = Eigen::VectorXd::Zero(10);
    const Eigen::VectorXd u = plastic_prox(q, z0, delta);
    const double obj = slice_objective(q, u, z0, delta);

    auto eval = [&](double v0, double v1) {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(10);
        w[0] = v0;
        w[5] = v1;
        return slice_objective(q, w, z0, delta);
    };
    // [-2, 2]^2 scan at resolution 0.01, then two local refinements.
    double best = 1e300, b0 = 0, b1 = 0;
    for (int i = -200; i <= 200; ++i)
        for (int j = -200; j <= 200; ++j) {
            const double v = eval(0.01 * i, 0.01 * j);
            if (v < best) {
                best = v;
                b0 = 0.01 * i;
                b1 = 0.01 * j;
            }
        }
    CHECK(obj <= best + 1e-8);
    double res = 0.01;
    for (int level = 0; level < 2; ++level) {
        const double c0 = b0, c1 = b1, fine = res / 100.0;
        for (int i = -100; i <= 100; ++i)
            for (int j = -100; j <= 100; ++j) {
                const double v = eval(c0 + fine * i, c1 + fine * j);
                if (v < best) {
                    best = v;
                    b0 = c0 + fine * i;
                    b1 = c1 + fine * j;
                }
            }
        res = fine;
    }
    CHECK(obj == doctest::Approx(best).epsilon(1e-8));
}

TEST_CASE("plastic_prox is a fixed point of itself") {
    const auto model = CrossSectionModel::analytic_disc(4.0 * M_PI, 1);
    ModelSliceQuadratic quad(model, 1.0, SkewCoeffs(0.1, 1.9, -0.4));
    Eigen::VectorXd z0 = Eigen::VectorXd::Zero(quad.dim());
    for (int i = 0; i < z0.size(); ++i) z0[i] = 0.02 * urand(-1, 1);
    const Eigen::VectorXd u1 = plastic_prox(quad, z0, 0.3);
    const Eigen::VectorXd u2 = plastic_prox(quad, z0, 0.3, {}, &u1);
    CHECK((u2 - u1).norm() < 1e-12);
}

TEST_CASE("model slice gradient matches finite differences") {
    const auto model = CrossSectionModel::analytic_disc(2.0, 0);
    ModelSliceQuadratic quad(model, 0.7, SkewCoeffs(0.3, -1.1, 0.2));
    Eigen::VectorXd u(quad.dim());
    for (int i = 0; i < u.size(); ++i) u[i] = 0.1 * urand(-1, 1);
    const Eigen::VectorXd g = quad.gradient(u);
    const double eps = 1e-6;
    for (int i = 0; i < std::min<int>(20, static_cast<int>(u.size())); ++i) {
        Eigen::VectorXd up = u, dn = u;
        up[i] += eps;
        dn[i] -= eps;
        const double fd = (quad.value(up) - quad.value(dn)) / (2 * eps);
        CHECK(g[i] == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("elastic step: zero load relaxes to the straight rod") {
    const auto model = CrossSectionModel::analytic_disc(4.0 * M_PI, 1);
    const RodGrid grid{1.0, 9};
    RodState s = RodState::straight(grid, model.mesh().num_quad());
    for (int i = 1; i < grid.nodes; ++i)
        s.frames[i] =
            s.frames[i] * so3_exp_axial(0.25 * Vec3(urand(-1, 1), urand(-1, 1), urand(-1, 1)));
    s.recompute_positions(Vec3::Zero());
    const auto report = elastic_step(0.0, s, model, PlasticLaw{1.0, 1.0}, LoadProfile::zero());
    CHECK(report.converged);
    CHECK(report.energy < 1e-14);
    for (const auto& k : curvature_field(s)) CHECK(k.norm() < 1e-5);
}

TEST_CASE("elastic step relaxes frames onto the plastic curvature") {
    const double mu = 4.0 * M_PI, kappa = 0.5;
    const auto model =
        CrossSectionModel::solve_correctors(generate_disc_mesh(2), ElasticTensor::isotropic(mu, 0.0));
    const auto& mesh = model.mesh();
    const RodGrid grid{1.0, 9};
    RodState s = RodState::straight(grid, mesh.num_quad());
    // dev(x2 e1 x e1) scaled so that k_eff = sqrt(2) kappa K_2.
    for (auto& slice : s.plastic.slices)
        for (int q = 0; q < mesh.num_quad(); ++q) {
            Mat3 m = Mat3::Zero();
            m(0, 0) = 1.5 * kappa * mesh.quad_point(q).x();
            set_plastic_sample(slice, q, dev_sym(m));
        }
    const auto report = elastic_step(0.0, s, model, PlasticLaw{1.0, 1.0}, LoadProfile::zero());
    CHECK(report.converged);
    for (const auto& k : curvature_field(s)) {
        CHECK(k.k2 == doctest::Approx(std::sqrt(2.0) * kappa).epsilon(1e-4));
        CHECK(std::abs(k.k1) < 1e-5);
        CHECK(std::abs(k.k3) < 1e-5);
    }
}

TEST_CASE("incremental solve: zero load keeps the trajectory constant") {
    const auto model = CrossSectionModel::analytic_disc(4.0 * M_PI, 1);
    IncrementalProblem problem;
    problem.times = {0.0, 0.5, 1.0};
    problem.model = &model;
    problem.law = PlasticLaw{1.0, 1.0};
    problem.load = LoadProfile::zero();
    problem.initial = RodState::straight(RodGrid{1.0, 9}, model.mesh().num_quad());
    const Trajectory traj = incremental_solve(problem);
    REQUIRE(traj.records.size() == 3);
    for (const auto& rec : traj.records) {
        CHECK(rec.energy.total == 0.0);
        CHECK(rec.diss_increment == 0.0);
        CHECK(rec.balance_residual == doctest::Approx(0.0).epsilon(1e-12));
    }
    for (const auto& st : traj.states) CHECK(st.plastic.max_norm() == 0.0);
}

TEST_CASE("very large dissipation freezes the plastic strain (elastic evolution)") {
    const auto model = CrossSectionModel::analytic_disc(4.0 * M_PI, 1);
    IncrementalProblem problem;
    problem.times = {0.0, 0.2, 0.4, 0.6};
    problem.model = &model;
    problem.law = PlasticLaw{1.0, 1e8};
    problem.load = planar_load();
    problem.initial = RodState::straight(RodGrid{1.0, 9}, model.mesh().num_quad());
    const Trajectory traj = incremental_solve(problem);
    CHECK(traj.states.back().plastic.max_norm() == 0.0);
    CHECK(traj.records.back().cumulative_diss == 0.0);

    // Pure elastic minimization with frozen z reproduces the same frames.
    RodState manual = problem.initial;
    for (size_t i = 1; i < problem.times.size(); ++i)
        elastic_step(problem.times[i], manual, model, problem.law, problem.load);
    for (int n = 0; n < manual.grid.nodes; ++n)
        CHECK((manual.frames[n] - traj.states.back().frames[n]).norm() < 1e-10);
}

TEST_CASE("incremental solve past the elastic regime: certificates hold") {
    const double mu = 4.0 * M_PI, delta = 1.0;
    const auto model =
        CrossSectionModel::solve_correctors(generate_disc_mesh(1), ElasticTensor::isotropic(mu, 0.0));
    IncrementalProblem problem;
    for (int i = 0; i <= 6; ++i) problem.times.push_back(0.1 * i);
    problem.model = &model;
    problem.law = PlasticLaw{1.0, delta};
    problem.load = planar_load();
    problem.initial = RodState::straight(RodGrid{1.0, 9}, model.mesh().num_quad());
    problem.opts.stability_competitors = 4;
    problem.opts.stability_amplitude = 1e-3;
    problem.opts.seed = 7;
    const Trajectory traj = incremental_solve(problem);
    REQUIRE(!traj.stagnated);

    // Plastic strain must have developed by t = 0.6 (past the onset).
    CHECK(traj.states.back().plastic.max_norm() > 1e-8);

    double prev_cum = 0.0;
    for (size_t i = 1; i < traj.records.size(); ++i) {
        const auto& rec = traj.records[i];
        CHECK(rec.objective <= rec.stayput_bound); // stay-put minimality, exact
        CHECK(rec.diss_increment >= 0.0);
        CHECK(rec.cumulative_diss >= prev_cum);
        prev_cum = rec.cumulative_diss;
    }
}

TEST_CASE("stability margins") {
    const double mu = 4.0 * M_PI;
    const auto model =
        CrossSectionModel::solve_correctors(generate_disc_mesh(1), ElasticTensor::isotropic(mu, 0.0));
    const PlasticLaw law{1.0, 1.0};
    const LoadProfile load = planar_load();
    std::mt19937_64 local_rng(11);

    SUBCASE("amplitude zero gives exactly zero margin") {
        RodState s = RodState::straight(RodGrid{1.0, 7}, model.mesh().num_quad());
        const double margin =
            stability_check(0.1, s, model, law, load, 4, 0.0, local_rng, {}, false);
        CHECK(margin == 0.0);
    }

    SUBCASE("converged elastic state is stable under small perturbations") {
        RodState s = RodState::straight(RodGrid{1.0, 7}, model.mesh().num_quad());
        const double t = 0.15; // inside the elastic regime
        elastic_step(t, s, model, law, load);
        const double margin = stability_check(t, s, model, law, load, 6, 1e-4, local_rng);
        CHECK(margin >= -1e-8);
    }

    SUBCASE("state driven past the yield threshold is detected as unstable") {
        RodState s = RodState::straight(RodGrid{1.0, 7}, model.mesh().num_quad());
        const double t = 1.2; // far beyond the onset
        elastic_step(t, s, model, law, load);
        const double margin = stability_check(t, s, model, law, load, 4, 1e-3, local_rng);
        CHECK(margin < 0.0);
    }
}

TEST_CASE("energy balance: constant load makes the power term vanish") {
    const auto model = CrossSectionModel::analytic_disc(4.0 * M_PI, 1);
    IncrementalProblem problem;
    problem.times = {0.0, 0.3, 0.6};
    problem.model = &model;
    problem.law = PlasticLaw{1.0, 10.0};
    problem.load =
        LoadProfile::scaled_profile([](double) { return 0.4; }, [](double) { return 0.0; },
                                    [](double) { return 1.0; }, -Vec3::UnitY());
    problem.initial = RodState::straight(RodGrid{1.0, 9}, model.mesh().num_quad());
    const Trajectory traj = incremental_solve(problem);
    const double e0 = traj.records[0].energy.total;
    for (const auto& rec : traj.records)
        CHECK(rec.balance_residual ==
              doctest::Approx(rec.energy.total + rec.cumulative_diss - e0).epsilon(1e-14));
}

TEST_SUITE_END();
