#ifndef RODPLAST_CONFIG_HPP
#define RODPLAST_CONFIG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rodplast/errors.hpp"

namespace rodplast {

struct ConfigError : Error {
    ConfigError(const std::string& what, std::vector<std::string> violation_list)
        : Error(what), violations(std::move(violation_list)) {}
    std::vector<std::string> violations;
};

struct SectionSpec {
    std::string kind = "disc"; // disc | rect
    int refinement = 4;
    double width = 1.0, height = 1.0;
    int nx = 16, ny = 16;
};

struct MaterialSpec {
    double mu = 4.0 * M_PI;
    double lambda = 0.0;
    double rho = 1.0;
    double delta = 1.0;
    double r = 0.5;
    double p = 4.0;
    double alpha_C = 0.4;
    double alpha_R = 0.3;
};

struct LoadSpec {
    std::string beta_kind = "linear"; // linear | zero
    double beta_rate = 1.0;
    std::string f_kind = "constant"; // constant | affine (f = f0 + f1 x)
    double f0 = 1.0, f1 = 0.0;
    std::array<double, 3> direction = {0.0, -1.0, 0.0};
};

struct TimeSpec {
    double t_end = 1.0;
    double dt = 0.1;
};

struct SolverSpec {
    double tol = 1e-10;
    int max_sweeps = 200;
    double elastic_tol = 1e-8;
    std::uint64_t seed = 0;
    int stability_competitors = 8;
    double stability_amplitude = 1e-3;
};

struct RodSpec {
    double length = 1.0;
    int nodes = 33;
};

struct GammaSpec {
    double curvature = 0.5;
    std::string plastic_kind = "zero"; // zero | bend_x2
    double plastic_scale = 0.0;
    std::vector<double> ztilde_coeffs = {0.0, 0.0, 0.0, 0.0, 0.0};
    std::vector<double> h_list = {0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625};
    int n1 = 64, n2 = 16, n3 = 16;
    bool scaled_strain_gradients = false;
};

struct PlanarSpec {
    int nodes = 257;
    int section_refinement = 2;
    std::string model = "analytic"; // analytic | fem
    std::vector<double> snapshots;
    bool compare_convexified = true;
};

struct RunConfig {
    std::string subcommand;
    SectionSpec section;
    MaterialSpec material;
    LoadSpec load;
    TimeSpec time;
    SolverSpec solver;
    RodSpec rod;
    GammaSpec gamma;
    PlanarSpec planar;
    std::string out_dir = "out";

    std::string resolved_json() const; // fully-resolved document for the manifest
};

/// Parses and validates a config file; throws ConfigError listing every
/// violated constraint, or an Error for I/O and syntax problems.
RunConfig parse_config(const std::string& path, const std::string& subcommand);
RunConfig parse_config_text(const std::string& text, const std::string& subcommand);

} // namespace rodplast

#endif
