#include "rodplast/cross_section.hpp"

#include <Eigen/Sparse>
#include <cmath>

#include <nlohmann/json.hpp>

namespace rodplast {

using SparseMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using json = nlohmann::json;

ElasticTensor ElasticTensor::isotropic(double mu, double lambda) {
    if (mu <= 0.0 || lambda < 0.0)
        throw InvalidInput("ElasticTensor::isotropic: require mu > 0, lambda >= 0");
    ElasticTensor t;
    Vec6 tr;
    tr << 1, 1, 1, 0, 0, 0;
    t.mandel = mu * Mat6::Identity() + 0.5 * lambda * tr * tr.transpose();
    return t;
}

Vec6 ElasticTensor::to_mandel(const Mat3& g) {
    const Mat3 s = sym(g);
    const double r = std::sqrt(2.0);
    Vec6 v;
    v << s(0, 0), s(1, 1), s(2, 2), r * s(1, 2), r * s(0, 2), r * s(0, 1);
    return v;
}

Mat3 ElasticTensor::from_mandel(const Vec6& v) {
    const double r = 1.0 / std::sqrt(2.0);
    Mat3 s;
    s << v[0], r * v[5], r * v[4], r * v[5], v[1], r * v[3], r * v[4], r * v[3], v[2];
    return s;
}

Mat3 ElasticTensor::apply(const Mat3& g) const { return from_mandel(mandel * to_mandel(g)); }

double ElasticTensor::quad(const Mat3& g) const {
    const Vec6 v = to_mandel(g);
    return v.dot(mandel * v);
}

double ElasticTensor::inner(const Mat3& a, const Mat3& b) const {
    return to_mandel(a).dot(mandel * to_mandel(b));
}

double ElasticTensor::coercivity_lower() const {
    return Eigen::SelfAdjointEigenSolver<Mat6>(mandel).eigenvalues().minCoeff();
}

double ElasticTensor::coercivity_upper() const {
    return Eigen::SelfAdjointEigenSolver<Mat6>(mandel).eigenvalues().maxCoeff();
}

SectionStrainField SectionStrainField::from_function(const SectionMesh& mesh,
                                                     const std::function<Mat3(const Vec2&)>& f) {
    SectionStrainField out(mesh.num_quad());
    for (int q = 0; q < mesh.num_quad(); ++q) out.samples[q] = sym(f(mesh.quad_point(q)));
    return out;
}

// ---------------------------------------------------------------------------

struct CrossSectionModel::System {
    SparseMat matrix;   // saddle system: [A C^T; C 0]
    Eigen::SparseLU<SparseMat> lu;
    int n_phi = 0;      // 3 * vertices
    int n_unknowns = 0; // n_phi + 1 (axial stretch)
    int dim = 0;        // n_unknowns + 4 multipliers

    // Strain of a local basis function on a triangle: vertex slot v (0..2),
    // component c (0..2) -> sym(0 | grad hat_v e_c); slot v == 3 encodes the
    // axial dof sym(e1 | 0).
    static Mat3 local_strain(const SectionMesh& mesh, int tri, int v, int c) {
        Mat3 m = Mat3::Zero();
        if (v == 3) {
            m(0, 0) = 1.0;
            return m;
        }
        const Vec2 g = mesh.hat_grads[tri][v];
        m(c, 1) = g.x();
        m(c, 2) = g.y();
        return sym(m);
    }

    void assemble(const SectionMesh& mesh, const ElasticTensor& tensor) {
        n_phi = 3 * mesh.num_vertices();
        n_unknowns = n_phi + 1;
        dim = n_unknowns + 4;
        std::vector<Triplet> trip;
        trip.reserve(static_cast<size_t>(mesh.num_triangles()) * 120);

        for (int t = 0; t < mesh.num_triangles(); ++t) {
            const double area = mesh.tri_area[t];
            std::array<int, 10> dof;
            std::array<Mat3, 10> strain;
            std::array<Mat3, 10> cstrain;
            int nloc = 0;
            for (int v = 0; v < 3; ++v)
                for (int c = 0; c < 3; ++c) {
                    dof[nloc] = 3 * mesh.triangles[t][v] + c;
                    strain[nloc] = local_strain(mesh, t, v, c);
                    cstrain[nloc] = tensor.apply(strain[nloc]);
                    ++nloc;
                }
            dof[nloc] = n_phi; // axial dof
            strain[nloc] = local_strain(mesh, t, 3, 0);
            cstrain[nloc] = tensor.apply(strain[nloc]);
            ++nloc;

            for (int i = 0; i < nloc; ++i)
                for (int j = 0; j < nloc; ++j) {
                    const double val = area * strain[i].cwiseProduct(cstrain[j]).sum();
                    if (val != 0.0) trip.emplace_back(dof[i], dof[j], val);
                }

            // Constraint rows: mean of phi (3 rows) and in-plane rotation (1).
            for (int v = 0; v < 3; ++v) {
                const int vert = mesh.triangles[t][v];
                for (int c = 0; c < 3; ++c) {
                    const double val = area / 3.0; // exact integral of a P1 hat
                    trip.emplace_back(n_unknowns + c, 3 * vert + c, val);
                    trip.emplace_back(3 * vert + c, n_unknowns + c, val);
                }
                const Vec2 g = mesh.hat_grads[t][v];
                // int (d3 phi . e2 - d2 phi . e3)
                trip.emplace_back(n_unknowns + 3, 3 * vert + 1, area * g.y());
                trip.emplace_back(3 * vert + 1, n_unknowns + 3, area * g.y());
                trip.emplace_back(n_unknowns + 3, 3 * vert + 2, -area * g.x());
                trip.emplace_back(3 * vert + 2, n_unknowns + 3, -area * g.x());
            }
        }

        matrix.resize(dim, dim);
        matrix.setFromTriplets(trip.begin(), trip.end());
        matrix.makeCompressed();
        lu.compute(matrix);
        if (lu.info() != Eigen::Success)
            throw SolverFailure("cross-section system: factorization failed (mesh disconnected?)");
    }

    // Minimizes int (sym B(a, phi) + data) : C (sym B(a, phi) + data).
    Eigen::VectorXd solve(const SectionMesh& mesh, const ElasticTensor& tensor,
                          const std::vector<Mat3>& data) const {
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
        for (int t = 0; t < mesh.num_triangles(); ++t) {
            Mat3 s = Mat3::Zero();
            const double w = mesh.tri_area[t] / 3.0;
            for (int k = 0; k < 3; ++k) s += w * tensor.apply(data[3 * t + k]);
            for (int v = 0; v < 3; ++v)
                for (int c = 0; c < 3; ++c) {
                    const Mat3 e = local_strain(mesh, t, v, c);
                    rhs[3 * mesh.triangles[t][v] + c] -= e.cwiseProduct(s).sum();
                }
            const Mat3 ea = local_strain(mesh, t, 3, 0);
            rhs[n_phi] -= ea.cwiseProduct(s).sum();
        }
        Eigen::VectorXd sol = lu.solve(rhs);
        if (lu.info() != Eigen::Success) throw SolverFailure("cross-section system: solve failed");
        return sol;
    }
};

CrossSectionModel::CrossSectionModel() = default;
CrossSectionModel::CrossSectionModel(CrossSectionModel&&) noexcept = default;
CrossSectionModel& CrossSectionModel::operator=(CrossSectionModel&&) noexcept = default;
CrossSectionModel::~CrossSectionModel() = default;

void CrossSectionModel::build_system() {
    if (!mesh_.is_connected()) throw SolverFailure("cross-section mesh is not connected");
    system_ = std::make_unique<System>();
    system_->assemble(mesh_, tensor_);
    psi_.assign(mesh_.num_quad(), {Mat3::Zero(), Mat3::Zero(), Mat3::Zero()});
    cpsi_.assign(mesh_.num_quad(), {Mat3::Zero(), Mat3::Zero(), Mat3::Zero()});
}

namespace {

Mat3 frame_strain(const Mat3& k_mat, const Vec2& p) {
    // sym(K xbar | 0) with xbar = (0, x2, x3).
    Mat3 m = Mat3::Zero();
    m.col(0) = k_mat * Vec3(0.0, p.x(), p.y());
    return sym(m);
}

// chi = sym(a e1 | grad phi), constant per triangle for P1 phi.
std::vector<Mat3> sample_chi(const SectionMesh& mesh, double a, const Eigen::VectorXd& phi) {
    std::vector<Mat3> chi(mesh.num_quad());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        Mat3 m = Mat3::Zero();
        m(0, 0) = a;
        for (int v = 0; v < 3; ++v) {
            const Vec2 g = mesh.hat_grads[t][v];
            const Vec3 pv = phi.segment<3>(3 * mesh.triangles[t][v]);
            m.col(1) += g.x() * pv;
            m.col(2) += g.y() * pv;
        }
        const Mat3 s = sym(m);
        chi[3 * t] = chi[3 * t + 1] = chi[3 * t + 2] = s;
    }
    return chi;
}

} // namespace

void CrossSectionModel::solve_corrector_block() {
    const auto& kb = skew_basis();
    mean_constraint_residual_ = 0.0;
    rotation_constraint_residual_ = 0.0;
    for (int i = 0; i < 3; ++i) {
        std::vector<Mat3> data(mesh_.num_quad());
        for (int q = 0; q < mesh_.num_quad(); ++q)
            data[q] = frame_strain(kb[i], mesh_.quad_point(q));
        const Eigen::VectorXd sol = system_->solve(mesh_, tensor_, data);
        a_[i] = sol[system_->n_phi];
        phi_[i] = sol.head(system_->n_phi);
        const auto chi = sample_chi(mesh_, a_[i], phi_[i]);
        for (int q = 0; q < mesh_.num_quad(); ++q) {
            psi_[q][i] = data[q] + chi[q];
            cpsi_[q][i] = tensor_.apply(psi_[q][i]);
        }

        // Constraint residuals, reported as solved (quadrature of the P1 field).
        Vec3 mean = Vec3::Zero();
        double rot = 0.0;
        for (int t = 0; t < mesh_.num_triangles(); ++t) {
            const double area = mesh_.tri_area[t];
            for (int v = 0; v < 3; ++v) {
                const int vert = mesh_.triangles[t][v];
                mean += (area / 3.0) * Vec3(phi_[i].segment<3>(3 * vert));
                const Vec2 g = mesh_.hat_grads[t][v];
                rot += area * (g.y() * phi_[i][3 * vert + 1] - g.x() * phi_[i][3 * vert + 2]);
            }
        }
        mean_constraint_residual_ = std::max(mean_constraint_residual_, mean.norm());
        rotation_constraint_residual_ = std::max(rotation_constraint_residual_, std::abs(rot));
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (int q = 0; q < mesh_.num_quad(); ++q)
                acc += mesh_.quad_weight(q) * psi_[q][i].cwiseProduct(cpsi_[q][j]).sum();
            gram_(i, j) = acc;
        }
    gram_ = 0.5 * (gram_ + gram_.transpose().eval());
    gram_inv_ = gram_.inverse();
}

CrossSectionModel CrossSectionModel::solve_correctors(SectionMesh mesh,
                                                      const ElasticTensor& tensor) {
    CrossSectionModel model;
    model.mesh_ = std::move(mesh);
    model.tensor_ = tensor;
    model.build_system();
    model.solve_corrector_block();
    return model;
}

CrossSectionModel CrossSectionModel::analytic_disc(double mu, int refinement) {
    CrossSectionModel model;
    model.mesh_ = generate_disc_mesh(refinement);
    model.tensor_ = ElasticTensor::isotropic(mu, 0.0);
    model.build_system();
    const auto& kb = skew_basis();
    for (int i = 0; i < 3; ++i) {
        model.a_[i] = 0.0;
        model.phi_[i] = Eigen::VectorXd::Zero(3 * model.mesh_.num_vertices());
        for (int q = 0; q < model.mesh_.num_quad(); ++q) {
            model.psi_[q][i] = frame_strain(kb[i], model.mesh_.quad_point(q));
            model.cpsi_[q][i] = model.tensor_.apply(model.psi_[q][i]);
        }
    }
    model.gram_ = (mu / (8.0 * M_PI)) * Mat3::Identity();
    model.gram_inv_ = (8.0 * M_PI / mu) * Mat3::Identity();
    return model;
}

void CrossSectionModel::check_field(const SectionStrainField& z) const {
    if (z.size() != mesh_.num_quad())
        throw InvalidInput("strain field sample count does not match the model quadrature");
}

double CrossSectionModel::q_eff(const SkewCoeffs& k) const {
    const Vec3 v = k.vec();
    return v.dot(gram_ * v);
}

Vec3 CrossSectionModel::psi_inner(const SectionStrainField& z) const {
    check_field(z);
    Vec3 g = Vec3::Zero();
    for (int q = 0; q < mesh_.num_quad(); ++q) {
        const double w = mesh_.quad_weight(q);
        for (int j = 0; j < 3; ++j) g[j] += w * z.samples[q].cwiseProduct(cpsi_[q][j]).sum();
    }
    return g;
}

SkewCoeffs CrossSectionModel::k_eff(const SectionStrainField& z) const {
    return SkewCoeffs(Vec3(gram_inv_ * psi_inner(z)));
}

AuxCorrector CrossSectionModel::solve_aux(const SectionStrainField& z) const {
    check_field(z);
    std::vector<Mat3> data(z.samples.size());
    for (size_t q = 0; q < z.samples.size(); ++q) data[q] = sym(z.samples[q]);
    const Eigen::VectorXd sol = system_->solve(mesh_, tensor_, data);
    AuxCorrector out;
    out.a = sol[system_->n_phi];
    out.phi = sol.head(system_->n_phi);
    out.chi = sample_chi(mesh_, out.a, out.phi);
    return out;
}

SectionStrainField CrossSectionModel::z_res(const SectionStrainField& z) const {
    check_field(z);
    const AuxCorrector aux = solve_aux(z);
    const Vec3 coef = gram_inv_ * psi_inner(z);
    SectionStrainField out(mesh_.num_quad());
    for (int q = 0; q < mesh_.num_quad(); ++q) {
        Mat3 m = sym(z.samples[q]) + aux.chi[q];
        for (int i = 0; i < 3; ++i) m -= coef[i] * psi_[q][i];
        out.samples[q] = m;
    }
    return out;
}

double CrossSectionModel::q_norm_sq(const SectionStrainField& z) const {
    check_field(z);
    double acc = 0.0;
    for (int q = 0; q < mesh_.num_quad(); ++q)
        acc += mesh_.quad_weight(q) * tensor_.quad(z.samples[q]);
    return acc;
}

double CrossSectionModel::relaxed_energy_density(const SkewCoeffs& k,
                                                 const SectionStrainField& z) const {
    const SkewCoeffs diff = k - k_eff(z);
    return q_eff(diff) + q_norm_sq(z_res(z));
}

double CrossSectionModel::relaxed_energy_density_direct(const SkewCoeffs& k,
                                                        const SectionStrainField& z) const {
    check_field(z);
    const Mat3 k_mat = skew_from_coeffs(k);
    std::vector<Mat3> data(mesh_.num_quad());
    for (int q = 0; q < mesh_.num_quad(); ++q)
        data[q] = frame_strain(k_mat, mesh_.quad_point(q)) - sym(z.samples[q]);
    const Eigen::VectorXd sol = system_->solve(mesh_, tensor_, data);
    const auto chi = sample_chi(mesh_, sol[system_->n_phi], sol.head(system_->n_phi));
    double acc = 0.0;
    for (int q = 0; q < mesh_.num_quad(); ++q)
        acc += mesh_.quad_weight(q) * tensor_.quad(data[q] + chi[q]);
    return acc;
}

// ---------------------------------------------------------------------------
// JSON round-trip ("xsec-v1")

std::string CrossSectionModel::to_json_string() const {
    json j;
    j["schema"] = "xsec-v1";
    json verts = json::array();
    for (const auto& v : mesh_.vertices) verts.push_back({v.x(), v.y()});
    json tris = json::array();
    for (const auto& t : mesh_.triangles) tris.push_back({t[0], t[1], t[2]});
    j["mesh"] = {{"vertices", verts},
                 {"triangles", tris},
                 {"on_boundary", std::vector<int>(mesh_.on_boundary.begin(), mesh_.on_boundary.end())}};
    std::vector<double> mandel(tensor_.mandel.data(), tensor_.mandel.data() + 36);
    j["tensor_mandel"] = mandel;
    json gram = json::array(), gram_inv = json::array();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            gram.push_back(gram_(r, c));
            gram_inv.push_back(gram_inv_(r, c));
        }
    j["gram"] = gram;
    j["gram_inverse"] = gram_inv;
    json correctors = json::array();
    for (int i = 0; i < 3; ++i) {
        correctors.push_back(
            {{"a", a_[i]}, {"phi", std::vector<double>(phi_[i].data(), phi_[i].data() + phi_[i].size())}});
    }
    j["correctors"] = correctors;
    j["diagnostics"] = {{"mean_constraint_residual", mean_constraint_residual_},
                        {"rotation_constraint_residual", rotation_constraint_residual_}};
    return j.dump(2);
}

CrossSectionModel CrossSectionModel::from_json_string(const std::string& text) {
    const json j = json::parse(text);
    if (j.value("schema", "") != std::string("xsec-v1"))
        throw InvalidInput("cross-section document: unknown schema");
    CrossSectionModel model;
    for (const auto& v : j.at("mesh").at("vertices"))
        model.mesh_.vertices.push_back(Vec2(v[0].get<double>(), v[1].get<double>()));
    for (const auto& t : j.at("mesh").at("triangles"))
        model.mesh_.triangles.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<int>()});
    for (const auto& b : j.at("mesh").at("on_boundary"))
        model.mesh_.on_boundary.push_back(static_cast<char>(b.get<int>()));
    model.mesh_.finalize();
    const auto mandel = j.at("tensor_mandel").get<std::vector<double>>();
    if (mandel.size() != 36) throw InvalidInput("cross-section document: bad tensor");
    std::copy(mandel.begin(), mandel.end(), model.tensor_.mandel.data());
    model.build_system();
    const auto& kb = skew_basis();
    const auto& correctors = j.at("correctors");
    for (int i = 0; i < 3; ++i) {
        model.a_[i] = correctors[i].at("a").get<double>();
        const auto phi = correctors[i].at("phi").get<std::vector<double>>();
        model.phi_[i] = Eigen::Map<const Eigen::VectorXd>(phi.data(), phi.size());
        const auto chi = sample_chi(model.mesh_, model.a_[i], model.phi_[i]);
        for (int q = 0; q < model.mesh_.num_quad(); ++q) {
            model.psi_[q][i] = frame_strain(kb[i], model.mesh_.quad_point(q)) + chi[q];
            model.cpsi_[q][i] = model.tensor_.apply(model.psi_[q][i]);
        }
    }
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            model.gram_(r, c) = j.at("gram")[3 * r + c].get<double>();
            model.gram_inv_(r, c) = j.at("gram_inverse")[3 * r + c].get<double>();
        }
    return model;
}

} // namespace rodplast
