#include "rodplast/runner.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rodplast/gamma.hpp"
#include "rodplast/planar.hpp"

namespace rodplast {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

namespace {

class ArtifactSink {
  public:
    explicit ArtifactSink(const std::string& dir) : dir_(dir) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw Error("cannot create output directory: " + dir);
    }

    void write(const std::string& name, const std::string& content) {
        const fs::path final_path = dir_ / name;
        const fs::path tmp_path = dir_ / (name + ".tmp");
        {
            std::ofstream out(tmp_path, std::ios::binary);
            if (!out) throw Error("cannot write artifact: " + final_path.string());
            out << content;
            if (!out.good()) throw Error("write failed: " + final_path.string());
        }
        std::error_code ec;
        fs::rename(tmp_path, final_path, ec);
        if (ec) throw Error("atomic rename failed: " + final_path.string());
        char hex[32];
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(content)));
        entries_.push_back({name, hex});
    }

    void finish(const RunConfig& cfg) {
        json manifest;
        manifest["schema"] = "manifest-v1";
        manifest["config"] = json::parse(cfg.resolved_json());
        manifest["artifacts"] = json::array();
        for (const auto& [name, hash] : entries_)
            manifest["artifacts"].push_back({{"file", name}, {"fnv1a64", hash}});
        write("manifest.json", manifest.dump(2));
    }

  private:
    fs::path dir_;
    std::vector<std::pair<std::string, std::string>> entries_;
};

std::function<double(double)> make_f(const LoadSpec& l) {
    if (l.f_kind == "constant") {
        const double v = l.f0;
        return [v](double) { return v; };
    }
    const double a = l.f0, b = l.f1;
    return [a, b](double x) { return a + b * x; };
}

BetaSchedule make_beta(const LoadSpec& l) {
    if (l.beta_kind == "zero") {
        BetaSchedule b;
        b.value = [](double) { return 0.0; };
        b.rate = [](double) { return 0.0; };
        return b;
    }
    return BetaSchedule::linear(l.beta_rate);
}

LoadProfile make_load(const LoadSpec& l) {
    const BetaSchedule beta = make_beta(l);
    const Vec3 dir(l.direction[0], l.direction[1], l.direction[2]);
    return LoadProfile::scaled_profile(beta.value, beta.rate, make_f(l), dir);
}

SectionMesh make_section(const SectionSpec& s, int refinement) {
    if (s.kind == "disc") return generate_disc_mesh(refinement);
    return generate_rect_mesh(s.width, s.height, s.nx << refinement, s.ny << refinement);
}

std::vector<double> make_partition(const TimeSpec& t) {
    std::vector<double> times{0.0};
    const int n = std::max(1, static_cast<int>(std::llround(t.t_end / t.dt)));
    for (int i = 1; i <= n; ++i) times.push_back(t.t_end * i / n);
    return times;
}

// ---------------------------------------------------------------------------

int run_effective(const RunConfig& cfg, ArtifactSink& sink) {
    std::ostringstream csv;
    csv << "refinement,C11,C22,C33,area_defect\n";
    const ElasticTensor tensor = ElasticTensor::isotropic(cfg.material.mu, cfg.material.lambda);
    std::string model_json;
    Mat3 gram;
    double rot_residual = 0.0;
    for (int r = 0; r <= cfg.section.refinement; ++r) {
        const auto model = CrossSectionModel::solve_correctors(make_section(cfg.section, r), tensor);
        csv << r << ',' << format_double(model.gram()(0, 0)) << ','
            << format_double(model.gram()(1, 1)) << ',' << format_double(model.gram()(2, 2)) << ','
            << format_double(1.0 - model.mesh().area()) << '\n';
        if (r == cfg.section.refinement) {
            model_json = model.to_json_string();
            gram = model.gram();
            rot_residual = model.rotation_constraint_residual();
        }
    }
    sink.write("convergence.csv", csv.str());
    sink.write("model.json", model_json);

    json coeff;
    coeff["schema"] = "coefficients-v1";
    coeff["refinement"] = cfg.section.refinement;
    json g = json::array();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) g.push_back(gram(i, j));
    coeff["gram"] = g;
    coeff["rotation_constraint_residual"] = rot_residual;
    if (cfg.section.kind == "disc" && cfg.material.lambda == 0.0) {
        const double closed = cfg.material.mu / (8.0 * M_PI);
        coeff["closed_form_diagonal"] = closed;
        coeff["relative_error"] =
            (gram - closed * Mat3::Identity()).norm() / (closed * Mat3::Identity()).norm();
    }
    sink.write("coefficients.json", coeff.dump(2));
    return kExitOk;
}

int run_solve(const RunConfig& cfg, ArtifactSink& sink) {
    const ElasticTensor tensor = ElasticTensor::isotropic(cfg.material.mu, cfg.material.lambda);
    const auto model =
        CrossSectionModel::solve_correctors(make_section(cfg.section, cfg.section.refinement), tensor);

    IncrementalProblem problem;
    problem.times = make_partition(cfg.time);
    problem.model = &model;
    problem.law = PlasticLaw{cfg.material.rho, cfg.material.delta};
    problem.load = make_load(cfg.load);
    problem.initial =
        RodState::straight(RodGrid{cfg.rod.length, cfg.rod.nodes}, model.mesh().num_quad());
    problem.opts.sweep_tol = cfg.solver.tol;
    problem.opts.max_sweeps = cfg.solver.max_sweeps;
    problem.opts.elastic.grad_tol = cfg.solver.elastic_tol;
    problem.opts.seed = cfg.solver.seed;
    problem.opts.stability_competitors = cfg.solver.stability_competitors;
    problem.opts.stability_amplitude = cfg.solver.stability_amplitude;

    const Trajectory traj = incremental_solve(problem);

    std::ostringstream tcsv, ccsv;
    write_trajectory_csv(tcsv, traj);
    write_certification_csv(ccsv, traj);
    sink.write("trajectory.csv", tcsv.str());
    sink.write("certification.csv", ccsv.str());
    sink.write("final_state.json", traj.states.back().to_json_string());
    if (traj.stagnated) {
        json diag;
        diag["status"] = "stagnated";
        diag["message"] = traj.message;
        diag["completed_steps"] = traj.records.size() - 1;
        sink.write("diagnostics.json", diag.dump(2));
        return kExitSolver;
    }
    return kExitOk;
}

int run_planar(const RunConfig& cfg, ArtifactSink& sink) {
    PlanarConfig pc;
    pc.mu = cfg.material.mu;
    pc.rho = cfg.material.rho;
    pc.delta = cfg.material.delta;
    pc.beta = make_beta(cfg.load);
    pc.f = make_f(cfg.load);
    pc.grid = RodGrid{1.0, cfg.planar.nodes};

    const CrossSectionModel model =
        cfg.planar.model == "analytic"
            ? CrossSectionModel::analytic_disc(pc.mu, cfg.planar.section_refinement)
            : CrossSectionModel::solve_correctors(generate_disc_mesh(cfg.planar.section_refinement),
                                                  ElasticTensor::isotropic(pc.mu, 0.0));

    SolveOptions opts;
    opts.sweep_tol = cfg.solver.tol;
    opts.max_sweeps = cfg.solver.max_sweeps;
    opts.elastic.grad_tol = cfg.solver.elastic_tol;
    const auto times = make_partition(cfg.time);

    const ReducedTrajectory traj = reduced_incremental_solve(pc, model, times, opts, true);

    double convexified_gap = 0.0;
    if (cfg.planar.compare_convexified) {
        const ReducedTrajectory orig = reduced_incremental_solve(pc, model, times, opts, false);
        for (size_t i = 0; i < traj.angles.size(); ++i)
            convexified_gap = std::max(convexified_gap, traj.angles[i].max_abs_diff(orig.angles[i]));
    }

    std::ostringstream tcsv;
    write_trajectory_csv(tcsv, traj.lifted);
    sink.write("trajectory.csv", tcsv.str());

    std::ostringstream ccsv;
    write_certification_csv(ccsv, traj.lifted);
    sink.write("certification.csv", ccsv.str());

    for (size_t s = 0; s < cfg.planar.snapshots.size(); ++s) {
        const double target = cfg.planar.snapshots[s];
        size_t best = 0;
        for (size_t i = 0; i < traj.lifted.records.size(); ++i)
            if (std::abs(traj.lifted.records[i].t - target) <
                std::abs(traj.lifted.records[best].t - target))
                best = i;
        std::ostringstream dcsv;
        dcsv << "x1,v1,v2\n";
        const RodState& state = traj.lifted.states[best];
        for (int i = 0; i < state.grid.nodes; ++i)
            dcsv << format_double(state.grid.x(i)) << ',' << format_double(state.positions[i][0])
                 << ',' << format_double(state.positions[i][1]) << '\n';
        sink.write("deflection_" + std::to_string(s) + ".csv", dcsv.str());
    }

    const auto bounds = t_star_bounds(pc);
    const double t_star = t_star_estimate(pc, model, traj, opts);
    json bj;
    bj["schema"] = "bounds-v1";
    bj["t_star_estimate"] = t_star;
    bj["t_star_lower"] = bounds.first;
    bj["t_star_upper"] = bounds.second;
    bj["plastic_onset_detected"] =
        traj.lifted.states.back().plastic.max_norm() > 1e-10;
    bj["convexified_max_gap"] = convexified_gap;
    sink.write("bounds.json", bj.dump(2));
    return kExitOk;
}

int run_gamma(const RunConfig& cfg, ArtifactSink& sink) {
    MaterialLaw3D law;
    law.mu = cfg.material.mu;
    law.rho = cfg.material.rho;
    law.delta = cfg.material.delta;
    law.r = cfg.material.r;
    law.p = cfg.material.p;
    law.alpha_C = cfg.material.alpha_C;
    law.alpha_R = cfg.material.alpha_R;
    law.validate();

    const GammaGrid grid = GammaGrid::disc(cfg.gamma.n1, cfg.gamma.n2, cfg.gamma.n3);
    const RodPath path = RodPath::constant_curvature(cfg.gamma.curvature);

    VolumeField z = nullptr;
    if (cfg.gamma.plastic_kind == "bend_x2") {
        const double scale = cfg.gamma.plastic_scale;
        z = [scale](double, const Vec2& xb) {
            Mat3 m = Mat3::Zero();
            m(0, 0) = scale * xb.x();
            return m;
        };
    }
    Eigen::Matrix<double, 5, 1> zc;
    for (int i = 0; i < 5; ++i) zc[i] = cfg.gamma.ztilde_coeffs[i];
    VolumeField ztilde = nullptr;
    if (zc.norm() > 0.0) {
        const Mat3 m = DevSym3{zc}.matrix();
        ztilde = [m](double, const Vec2&) { return m; };
    }

    const ConvergenceReport report = convergence_study(path, z, ztilde, cfg.gamma.h_list, law,
                                                       grid, cfg.gamma.scaled_strain_gradients);

    std::ostringstream csv;
    csv << "h,W_el_term,HC_term,HR_term,W_pl_term,D_term,gap\n";
    for (const auto& row : report.rows)
        csv << format_double(row.h) << ',' << format_double(row.w_el) << ','
            << format_double(row.h_c) << ',' << format_double(row.h_r) << ','
            << format_double(row.w_pl) << ',' << format_double(row.dissipation) << ','
            << format_double(row.gap) << '\n';
    sink.write("report.csv", csv.str());

    json slopes;
    slopes["schema"] = "slopes-v1";
    slopes["limit_w_el"] = report.limit_w_el;
    slopes["limit_dissipation"] = report.limit_dissipation;
    slopes["slope_gap"] = report.slope_gap;
    slopes["slope_HC"] = report.slope_h_c;
    slopes["slope_HR"] = report.slope_h_r;
    slopes["expected_HC"] = (1.0 - law.alpha_C) * law.p;
    slopes["expected_HR"] = law.alpha_R * law.p;
    sink.write("slopes.json", slopes.dump(2));
    return kExitOk;
}

} // namespace

int run(const RunConfig& cfg) {
    try {
        ArtifactSink sink(cfg.out_dir);
        int code = kExitOk;
        if (cfg.subcommand == "effective")
            code = run_effective(cfg, sink);
        else if (cfg.subcommand == "solve")
            code = run_solve(cfg, sink);
        else if (cfg.subcommand == "planar")
            code = run_planar(cfg, sink);
        else if (cfg.subcommand == "gamma")
            code = run_gamma(cfg, sink);
        else
            throw ConfigError("unknown subcommand: " + cfg.subcommand, {});
        sink.finish(cfg);
        return code;
    } catch (const ConfigError&) {
        throw; // caller maps to exit code 2
    } catch (const SolverFailure& e) {
        try {
            ArtifactSink sink(cfg.out_dir);
            json diag;
            diag["status"] = "solver_failure";
            diag["message"] = e.what();
            sink.write("diagnostics.json", diag.dump(2));
        } catch (...) {
        }
        return kExitSolver;
    }
}

} // namespace rodplast
