#include "rodplast/rod_model.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace rodplast {

using json = nlohmann::json;

PlasticField PlasticField::zero(int intervals, int samples_per_slice) {
    PlasticField f;
    f.samples_per_slice = samples_per_slice;
    f.slices.assign(intervals, Eigen::VectorXd::Zero(5 * samples_per_slice));
    return f;
}

double PlasticField::max_norm() const {
    double m = 0.0;
    for (const auto& s : slices)
        if (s.size() > 0) m = std::max(m, s.cwiseAbs().maxCoeff());
    return m;
}

double PlasticField::sq_norm() const {
    double m = 0.0;
    for (const auto& s : slices) m += s.squaredNorm();
    return m;
}

Mat3 plastic_sample(const Eigen::VectorXd& slice, int q) {
    DevSym3 v;
    v.c = slice.segment<5>(5 * q);
    return v.matrix();
}

void set_plastic_sample(Eigen::VectorXd& slice, int q, const DevSym3& v) {
    slice.segment<5>(5 * q) = v.c;
}

SectionStrainField slice_to_field(const Eigen::VectorXd& slice) {
    const int m = static_cast<int>(slice.size() / 5);
    SectionStrainField f(m);
    for (int q = 0; q < m; ++q) f.samples[q] = plastic_sample(slice, q);
    return f;
}

RodState RodState::straight(const RodGrid& grid, int samples_per_slice, const Vec3& v0,
                            const Mat3& r0) {
    RodState s;
    s.grid = grid;
    s.frames.assign(grid.nodes, r0);
    s.plastic = PlasticField::zero(grid.intervals(), samples_per_slice);
    s.recompute_positions(v0);
    return s;
}

void RodState::recompute_positions(const Vec3& v0) {
    positions.assign(grid.nodes, v0);
    const double half = 0.5 * grid.dx();
    for (int j = 0; j + 1 < grid.nodes; ++j)
        positions[j + 1] = positions[j] + half * (frames[j] + frames[j + 1]) * Vec3::UnitX();
}

void RodState::validate() const {
    if (static_cast<int>(frames.size()) != grid.nodes ||
        static_cast<int>(positions.size()) != grid.nodes)
        throw InvalidInput("RodState: node count mismatch");
    if (static_cast<int>(plastic.slices.size()) != grid.intervals())
        throw InvalidInput("RodState: slice count mismatch");
    for (const auto& r : frames) {
        if ((r.transpose() * r - Mat3::Identity()).norm() > 1e-10 ||
            std::abs(r.determinant() - 1.0) > 1e-10)
            throw InvalidInput("RodState: frame is not a rotation");
    }
    const double half = 0.5 * grid.dx();
    for (int j = 0; j + 1 < grid.nodes; ++j) {
        const Vec3 step = half * (frames[j] + frames[j + 1]) * Vec3::UnitX();
        if ((positions[j + 1] - positions[j] - step).norm() > 1e-12 * std::max(1.0, grid.dx()))
            throw InvalidInput("RodState: positions violate the midpoint rule");
    }
}

LoadProfile LoadProfile::zero() {
    LoadProfile l;
    l.value = [](double, double) { return Vec3::Zero().eval(); };
    l.rate = [](double, double) { return Vec3::Zero().eval(); };
    return l;
}

LoadProfile LoadProfile::scaled_profile(std::function<double(double)> beta,
                                        std::function<double(double)> beta_rate,
                                        std::function<double(double)> f, const Vec3& direction) {
    LoadProfile l;
    l.value = [beta, f, direction](double t, double x) { return (beta(t) * f(x) * direction).eval(); };
    if (beta_rate) {
        l.rate = [beta_rate, f, direction](double t, double x) {
            return (beta_rate(t) * f(x) * direction).eval();
        };
    } else {
        l.rate = [beta, f, direction](double t, double x) {
            const double h = 1e-6 * std::max(1.0, std::abs(t));
            return (((beta(t + h) - beta(t - h)) / (2 * h)) * f(x) * direction).eval();
        };
    }
    return l;
}

std::vector<SkewCoeffs> curvature_field(const RodState& state) {
    std::vector<SkewCoeffs> k(state.grid.intervals());
    const double inv_dx = 1.0 / state.grid.dx();
    for (int j = 0; j < state.grid.intervals(); ++j) {
        const Vec3 q = so3_log_axial(state.frames[j].transpose() * state.frames[j + 1]);
        k[j] = coeffs_from_axial(q) * inv_dx;
    }
    return k;
}

EnergyBreakdown energy_e0(double t, const RodState& state, const CrossSectionModel& model,
                          const PlasticLaw& law, const LoadProfile& load) {
    const int m = model.mesh().num_quad();
    if (state.plastic.samples_per_slice != m && state.plastic.max_norm() != 0.0)
        throw InvalidInput("energy_e0: plastic samples not aligned with the model quadrature");
    if (static_cast<int>(state.plastic.slices.size()) != state.grid.intervals())
        throw InvalidInput("energy_e0: slice count mismatch");

    EnergyBreakdown out;
    const double dx = state.grid.dx();
    const auto curv = curvature_field(state);
    for (int j = 0; j < state.grid.intervals(); ++j) {
        const auto& slice = state.plastic.slices[j];
        if (slice.size() == 0 || slice.isZero(0.0)) {
            out.bending_torsion += dx * model.q_eff(curv[j]);
            continue;
        }
        const SectionStrainField z = slice_to_field(slice);
        out.bending_torsion += dx * model.q_eff(curv[j] - model.k_eff(z));
        out.residual += dx * model.q_norm_sq(model.z_res(z));
        double hard = 0.0;
        for (int q = 0; q < m; ++q)
            hard += model.mesh().quad_weight(q) * slice.segment<5>(5 * q).squaredNorm();
        out.hardening += dx * law.rho * hard;
    }
    for (int i = 0; i < state.grid.nodes; ++i)
        out.load += state.grid.node_weight(i) * load.value(t, state.grid.x(i)).dot(state.positions[i]);
    out.total = out.bending_torsion + out.residual + out.hardening - out.load;
    return out;
}

EnergyBreakdown energy_e0_general(double t, const RodState& state,
                                  const std::vector<SectionStrainField>& plastic,
                                  const CrossSectionModel& model, const PlasticLaw& law,
                                  const LoadProfile& load) {
    if (static_cast<int>(plastic.size()) != state.grid.intervals())
        throw InvalidInput("energy_e0_general: slice count mismatch");
    EnergyBreakdown out;
    const double dx = state.grid.dx();
    const int m = model.mesh().num_quad();
    const auto curv = curvature_field(state);
    for (int j = 0; j < state.grid.intervals(); ++j) {
        const SectionStrainField& z = plastic[j];
        out.bending_torsion += dx * model.q_eff(curv[j] - model.k_eff(z));
        out.residual += dx * model.q_norm_sq(model.z_res(z));
        double hard = 0.0;
        for (int q = 0; q < m; ++q)
            hard += model.mesh().quad_weight(q) * z.samples[q].squaredNorm();
        out.hardening += dx * law.rho * hard;
    }
    for (int i = 0; i < state.grid.nodes; ++i)
        out.load += state.grid.node_weight(i) * load.value(t, state.grid.x(i)).dot(state.positions[i]);
    out.total = out.bending_torsion + out.residual + out.hardening - out.load;
    return out;
}

double dissipation_d0(const PlasticField& z, const PlasticField& zhat, double delta,
                      const CrossSectionModel& model, const RodGrid& grid) {
    if (z.slices.size() != zhat.slices.size())
        throw InvalidInput("dissipation_d0: slice count mismatch");
    const int m = model.mesh().num_quad();
    double acc = 0.0;
    const double dx = grid.dx();
    for (size_t j = 0; j < z.slices.size(); ++j) {
        if (z.slices[j].size() != zhat.slices[j].size())
            throw InvalidInput("dissipation_d0: slice size mismatch");
        for (int q = 0; q < m; ++q)
            acc += dx * model.mesh().quad_weight(q) *
                   (zhat.slices[j].segment<5>(5 * q) - z.slices[j].segment<5>(5 * q)).norm();
    }
    return delta * acc;
}

double dissipation_d0_general(const std::vector<std::vector<Mat3>>& z,
                              const std::vector<std::vector<Mat3>>& zhat, double delta,
                              const CrossSectionModel& model, const RodGrid& grid) {
    if (z.size() != zhat.size()) throw InvalidInput("dissipation_d0: slice count mismatch");
    const double dx = grid.dx();
    double acc = 0.0;
    for (size_t j = 0; j < z.size(); ++j) {
        if (z[j].size() != zhat[j].size())
            throw InvalidInput("dissipation_d0: sample count mismatch");
        for (size_t q = 0; q < z[j].size(); ++q) {
            const Mat3 inc = zhat[j][q] - z[j][q];
            const double scale = std::max(1.0, inc.norm());
            if ((inc - inc.transpose()).norm() > 1e-12 * scale ||
                std::abs(inc.trace()) > 1e-12 * scale)
                return std::numeric_limits<double>::infinity();
            acc += dx * model.mesh().quad_weight(static_cast<int>(q)) * inc.norm();
        }
    }
    return delta * acc;
}

// ---------------------------------------------------------------------------

std::string RodState::to_json_string() const {
    json j;
    j["schema"] = "rod-v1";
    j["grid"] = {{"length", grid.length}, {"nodes", grid.nodes}};
    json fr = json::array();
    for (const auto& r : frames) {
        json row = json::array();
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) row.push_back(r(a, b));
        fr.push_back(row);
    }
    j["frames"] = fr;
    json pos = json::array();
    for (const auto& v : positions) pos.push_back({v[0], v[1], v[2]});
    j["positions"] = pos;
    j["plastic"] = {{"samples_per_slice", plastic.samples_per_slice}, {"slices", json::array()}};
    for (const auto& s : plastic.slices)
        j["plastic"]["slices"].push_back(std::vector<double>(s.data(), s.data() + s.size()));
    return j.dump(2);
}

RodState RodState::from_json_string(const std::string& text) {
    const json j = json::parse(text);
    if (j.value("schema", "") != std::string("rod-v1"))
        throw InvalidInput("rod document: unknown schema");
    RodState s;
    s.grid.length = j.at("grid").at("length").get<double>();
    s.grid.nodes = j.at("grid").at("nodes").get<int>();
    for (const auto& row : j.at("frames")) {
        Mat3 r;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) r(a, b) = row[3 * a + b].get<double>();
        s.frames.push_back(r);
    }
    for (const auto& p : j.at("positions"))
        s.positions.push_back(Vec3(p[0].get<double>(), p[1].get<double>(), p[2].get<double>()));
    s.plastic.samples_per_slice = j.at("plastic").at("samples_per_slice").get<int>();
    for (const auto& sl : j.at("plastic").at("slices")) {
        const auto v = sl.get<std::vector<double>>();
        s.plastic.slices.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()));
    }
    s.validate();
    return s;
}

} // namespace rodplast
