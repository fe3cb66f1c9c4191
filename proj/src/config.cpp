#include "rodplast/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace rodplast {

using json = nlohmann::json;

namespace {

void parse_section(const json& j, SectionSpec& s, std::vector<std::string>& bad) {
    s.kind = j.value("kind", s.kind);
    s.refinement = j.value("refinement", s.refinement);
    s.width = j.value("width", s.width);
    s.height = j.value("height", s.height);
    s.nx = j.value("nx", s.nx);
    s.ny = j.value("ny", s.ny);
    if (s.kind != "disc" && s.kind != "rect")
        bad.push_back("section.kind: expected \"disc\" or \"rect\", got \"" + s.kind + "\"");
    if (s.refinement < 0) bad.push_back("section.refinement: must be >= 0");
    if (s.kind == "rect" && (s.width <= 0 || s.height <= 0))
        bad.push_back("section.width/height: must be positive");
    if (s.kind == "rect" && (s.nx < 1 || s.ny < 1))
        bad.push_back("section.nx/ny: must be >= 1");
}

void parse_material(const json& j, MaterialSpec& m, std::vector<std::string>& bad) {
    m.mu = j.value("mu", m.mu);
    m.lambda = j.value("lambda", m.lambda);
    m.rho = j.value("rho", m.rho);
    m.delta = j.value("delta", m.delta);
    m.r = j.value("r", m.r);
    m.p = j.value("p", m.p);
    m.alpha_C = j.value("alpha_C", m.alpha_C);
    m.alpha_R = j.value("alpha_R", m.alpha_R);
    if (m.mu <= 0) bad.push_back("material.mu: must be positive");
    if (m.lambda < 0) bad.push_back("material.lambda: must be non-negative");
    if (m.rho <= 0) bad.push_back("material.rho: must be positive");
    if (m.delta < 0) bad.push_back("material.delta: must be non-negative");
    if (m.r <= 0) bad.push_back("material.r: must be positive");
    if (m.p <= 3) bad.push_back("material.p: strain-gradient exponent requires p > 3");
    if (!(m.alpha_C > 0 && m.alpha_C < 1))
        bad.push_back("material.alpha_C: must lie in (0, 1)");
    if (!(m.alpha_R > 0 && m.alpha_R < 1))
        bad.push_back("material.alpha_R: must lie in (0, 1)");
    if (!(m.alpha_R < 2.0 / 3.0 * (1.0 - m.alpha_C))) {
        std::ostringstream os;
        os << "material scaling constraint violated: alpha_R < (2/3)(1 - alpha_C) required"
           << " (alpha_R = " << m.alpha_R << ", bound = " << 2.0 / 3.0 * (1.0 - m.alpha_C) << ")";
        bad.push_back(os.str());
    }
}

void parse_load(const json& j, LoadSpec& l, std::vector<std::string>& bad) {
    l.beta_kind = j.value("beta_kind", l.beta_kind);
    l.beta_rate = j.value("beta_rate", l.beta_rate);
    l.f_kind = j.value("f_kind", l.f_kind);
    l.f0 = j.value("f0", l.f0);
    l.f1 = j.value("f1", l.f1);
    if (j.contains("direction")) {
        const auto d = j.at("direction").get<std::vector<double>>();
        if (d.size() != 3)
            bad.push_back("load.direction: expected 3 components");
        else
            l.direction = {d[0], d[1], d[2]};
    }
    if (l.beta_kind != "linear" && l.beta_kind != "zero")
        bad.push_back("load.beta_kind: expected \"linear\" or \"zero\"");
    if (l.f_kind != "constant" && l.f_kind != "affine")
        bad.push_back("load.f_kind: expected \"constant\" or \"affine\"");
}

void parse_time(const json& j, TimeSpec& t, std::vector<std::string>& bad) {
    t.t_end = j.value("t_end", t.t_end);
    t.dt = j.value("dt", t.dt);
    if (t.t_end <= 0) bad.push_back("time.t_end: must be positive");
    if (t.dt <= 0 || t.dt > t.t_end) bad.push_back("time.dt: must satisfy 0 < dt <= t_end");
}

void parse_solver(const json& j, SolverSpec& s, std::vector<std::string>& bad) {
    s.tol = j.value("tol", s.tol);
    s.max_sweeps = j.value("max_sweeps", s.max_sweeps);
    s.elastic_tol = j.value("elastic_tol", s.elastic_tol);
    s.seed = j.value("seed", s.seed);
    s.stability_competitors = j.value("stability_competitors", s.stability_competitors);
    s.stability_amplitude = j.value("stability_amplitude", s.stability_amplitude);
    if (s.tol <= 0) bad.push_back("solver.tol: must be positive");
    if (s.max_sweeps < 1) bad.push_back("solver.max_sweeps: must be >= 1");
    if (s.elastic_tol <= 0) bad.push_back("solver.elastic_tol: must be positive");
    if (s.stability_competitors < 0)
        bad.push_back("solver.stability_competitors: must be >= 0");
    if (s.stability_amplitude < 0)
        bad.push_back("solver.stability_amplitude: must be >= 0");
}

void parse_rod(const json& j, RodSpec& r, std::vector<std::string>& bad) {
    r.length = j.value("length", r.length);
    r.nodes = j.value("nodes", r.nodes);
    if (r.length <= 0) bad.push_back("rod.length: must be positive");
    if (r.nodes < 2) bad.push_back("rod.nodes: must be >= 2");
}

void parse_gamma(const json& j, GammaSpec& g, std::vector<std::string>& bad) {
    g.curvature = j.value("curvature", g.curvature);
    g.plastic_kind = j.value("plastic_kind", g.plastic_kind);
    g.plastic_scale = j.value("plastic_scale", g.plastic_scale);
    if (j.contains("ztilde_coeffs")) g.ztilde_coeffs = j.at("ztilde_coeffs").get<std::vector<double>>();
    if (j.contains("h_list")) g.h_list = j.at("h_list").get<std::vector<double>>();
    g.n1 = j.value("n1", g.n1);
    g.n2 = j.value("n2", g.n2);
    g.n3 = j.value("n3", g.n3);
    g.scaled_strain_gradients = j.value("scaled_strain_gradients", g.scaled_strain_gradients);
    if (g.plastic_kind != "zero" && g.plastic_kind != "bend_x2")
        bad.push_back("gamma.plastic_kind: expected \"zero\" or \"bend_x2\"");
    if (g.ztilde_coeffs.size() != 5) bad.push_back("gamma.ztilde_coeffs: expected 5 coefficients");
    if (g.h_list.empty()) bad.push_back("gamma.h_list: must not be empty");
    for (double h : g.h_list)
        if (h <= 0) bad.push_back("gamma.h_list: thickness values must be positive");
    for (size_t i = 1; i < g.h_list.size(); ++i)
        if (g.h_list[i] >= g.h_list[i - 1]) {
            bad.push_back("gamma.h_list: must be strictly decreasing");
            break;
        }
    if (g.n1 < 3 || g.n2 < 2 || g.n3 < 4) bad.push_back("gamma.n1/n2/n3: grid too small");
}

void parse_planar(const json& j, PlanarSpec& p, std::vector<std::string>& bad) {
    p.nodes = j.value("nodes", p.nodes);
    p.section_refinement = j.value("section_refinement", p.section_refinement);
    p.model = j.value("model", p.model);
    if (j.contains("snapshots")) p.snapshots = j.at("snapshots").get<std::vector<double>>();
    p.compare_convexified = j.value("compare_convexified", p.compare_convexified);
    if (p.nodes < 3) bad.push_back("planar.nodes: must be >= 3");
    if (p.section_refinement < 0) bad.push_back("planar.section_refinement: must be >= 0");
    if (p.model != "analytic" && p.model != "fem")
        bad.push_back("planar.model: expected \"analytic\" or \"fem\"");
}

} // namespace

RunConfig parse_config_text(const std::string& text, const std::string& subcommand) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what(), {e.what()});
    }
    RunConfig cfg;
    cfg.subcommand = subcommand;
    std::vector<std::string> bad;
    if (j.contains("section")) parse_section(j["section"], cfg.section, bad);
    if (j.contains("material")) parse_material(j["material"], cfg.material, bad);
    if (j.contains("load")) parse_load(j["load"], cfg.load, bad);
    if (j.contains("time")) parse_time(j["time"], cfg.time, bad);
    if (j.contains("solver")) parse_solver(j["solver"], cfg.solver, bad);
    if (j.contains("rod")) parse_rod(j["rod"], cfg.rod, bad);
    if (j.contains("gamma")) parse_gamma(j["gamma"], cfg.gamma, bad);
    if (j.contains("planar")) parse_planar(j["planar"], cfg.planar, bad);
    if (j.contains("output")) cfg.out_dir = j["output"].value("directory", cfg.out_dir);

    if (!bad.empty()) {
        std::ostringstream os;
        os << "config: " << bad.size() << " constraint violation(s):";
        for (const auto& b : bad) os << "\n  - " << b;
        throw ConfigError(os.str(), bad);
    }
    return cfg;
}

RunConfig parse_config(const std::string& path, const std::string& subcommand) {
    std::ifstream in(path);
    if (!in) throw Error("config: cannot open file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), subcommand);
}

std::string RunConfig::resolved_json() const {
    json j;
    j["subcommand"] = subcommand;
    j["section"] = {{"kind", section.kind}, {"refinement", section.refinement},
                    {"width", section.width}, {"height", section.height},
                    {"nx", section.nx},      {"ny", section.ny}};
    j["material"] = {{"mu", material.mu},       {"lambda", material.lambda},
                     {"rho", material.rho},     {"delta", material.delta},
                     {"r", material.r},         {"p", material.p},
                     {"alpha_C", material.alpha_C}, {"alpha_R", material.alpha_R}};
    j["load"] = {{"beta_kind", load.beta_kind},
                 {"beta_rate", load.beta_rate},
                 {"f_kind", load.f_kind},
                 {"f0", load.f0},
                 {"f1", load.f1},
                 {"direction", load.direction}};
    j["time"] = {{"t_end", time.t_end}, {"dt", time.dt}};
    j["solver"] = {{"tol", solver.tol},
                   {"max_sweeps", solver.max_sweeps},
                   {"elastic_tol", solver.elastic_tol},
                   {"seed", solver.seed},
                   {"stability_competitors", solver.stability_competitors},
                   {"stability_amplitude", solver.stability_amplitude}};
    j["rod"] = {{"length", rod.length}, {"nodes", rod.nodes}};
    j["gamma"] = {{"curvature", gamma.curvature},
                  {"plastic_kind", gamma.plastic_kind},
                  {"plastic_scale", gamma.plastic_scale},
                  {"ztilde_coeffs", gamma.ztilde_coeffs},
                  {"h_list", gamma.h_list},
                  {"n1", gamma.n1},
                  {"n2", gamma.n2},
                  {"n3", gamma.n3},
                  {"scaled_strain_gradients", gamma.scaled_strain_gradients}};
    j["planar"] = {{"nodes", planar.nodes},
                   {"section_refinement", planar.section_refinement},
                   {"model", planar.model},
                   {"snapshots", planar.snapshots},
                   {"compare_convexified", planar.compare_convexified}};
    j["output"] = {{"directory", out_dir}};
    return j.dump(2);
}

} // namespace rodplast
