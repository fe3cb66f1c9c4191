#include <CLI11.hpp>

#include <iostream>

#include "rodplast/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Elastoplastic bending-torsion rod laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 1;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON configuration file")->required();
        sub->add_option("--out", out_dir, "Output directory (overrides config)");
        sub->add_option("--seed", seed, "Random seed for competitor sampling")
            ->each([&](const std::string&) { seed_set = true; });
        sub->add_option("--threads", threads, "Worker hint (runs are single-threaded)")
            ->check(CLI::PositiveNumber);
    };

    add_common(app.add_subcommand("effective", "Cross-section coefficients and convergence"));
    add_common(app.add_subcommand("solve", "Time-incremental rod evolution"));
    add_common(app.add_subcommand("planar", "Clamped planar rod scenario"));
    add_common(app.add_subcommand("gamma", "Scaled 3D energies on ansatz fields"));

    CLI11_PARSE(app, argc, argv);

    const std::string subcommand = app.get_subcommands().front()->get_name();
    try {
        rodplast::RunConfig cfg = rodplast::parse_config(config_path, subcommand);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (seed_set) cfg.solver.seed = seed;
        return rodplast::run(cfg);
    } catch (const rodplast::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return rodplast::kExitConfig;
    } catch (const rodplast::SolverFailure& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return rodplast::kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return rodplast::kExitIo;
    }
}
