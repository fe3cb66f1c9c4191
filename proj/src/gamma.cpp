#include "rodplast/gamma.hpp"

#include <cmath>

#include "rodplast/section.hpp"

namespace rodplast {

void MaterialLaw3D::validate() const {
    if (mu <= 0.0 || rho <= 0.0 || delta < 0.0 || r <= 0.0)
        throw InvalidInput("material law: require mu, rho, r > 0 and delta >= 0");
    if (p <= 3.0) throw InvalidInput("material law: strain-gradient exponent requires p > 3");
    if (!(alpha_C > 0.0 && alpha_C < 1.0 && alpha_R > 0.0 && alpha_R < 1.0))
        throw InvalidInput("material law: alpha_C, alpha_R must lie in (0, 1)");
    if (!(alpha_R < 2.0 / 3.0 * (1.0 - alpha_C)))
        throw InvalidInput("material law: alpha_R < (2/3)(1 - alpha_C) violated");
}

double MaterialLaw3D::w_el(const Mat3& f) const {
    return 0.25 * mu * (f.transpose() * f - Mat3::Identity()).squaredNorm();
}

bool MaterialLaw3D::in_kpl(const Mat3& f) const {
    const double scale = 1.0 + f.norm();
    if ((f - f.transpose()).norm() > 1e-8 * scale) return false;
    Eigen::SelfAdjointEigenSolver<Mat3> eig(sym(f));
    if (eig.eigenvalues().minCoeff() <= 0.0) return false;
    const Vec3 logs = eig.eigenvalues().array().log();
    const double trace = logs.sum();
    const Mat3 xi = eig.eigenvectors() * logs.asDiagonal() * eig.eigenvectors().transpose();
    if (std::abs(trace) > 1e-10 * (1.0 + xi.norm())) return false; // SL(3) membership
    const Mat3 dev = xi - (trace / 3.0) * Mat3::Identity();
    return dev.norm() <= r;
}

double MaterialLaw3D::w_pl(const Mat3& f) const {
    if (!in_kpl(f)) return std::numeric_limits<double>::infinity();
    return rho * (f - Mat3::Identity()).squaredNorm();
}

// ---------------------------------------------------------------------------
// Quadrature grid

namespace {

// Gauss-Legendre nodes/weights on (0, 1) by Newton iteration.
void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5)); // initial guess on (-1,1)
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * pp * pp);
    }
}

} // namespace

GammaGrid GammaGrid::disc(int n1, int n2, int n3, double length) {
    if (n1 < 3 || n2 < 2 || n3 < 4) throw InvalidInput("gamma grid: sizes too small");
    GammaGrid g;
    g.n1 = n1;
    g.n2 = n2;
    g.n3 = n3;
    g.length = length;
    g.radius = disc_radius();
    g.x1.resize(n1);
    g.w1.resize(n1);
    const double dx = length / (n1 - 1);
    for (int i = 0; i < n1; ++i) {
        g.x1[i] = i * dx;
        g.w1[i] = (i == 0 || i == n1 - 1) ? 0.5 * dx : dx;
    }
    std::vector<double> nodes, weights;
    gauss_legendre_unit(n2, nodes, weights);
    g.rr.resize(n2);
    g.wr_jac.resize(n2);
    for (int i = 0; i < n2; ++i) {
        g.rr[i] = g.radius * nodes[i];
        g.wr_jac[i] = g.radius * weights[i] * g.rr[i];
    }
    g.th.resize(n3);
    for (int i = 0; i < n3; ++i) g.th[i] = 2.0 * M_PI * i / n3;
    g.wth = 2.0 * M_PI / n3;
    return g;
}

double GammaGrid::measure() const {
    double a = 0.0;
    for (int i2 = 0; i2 < n2; ++i2) a += wr_jac[i2];
    a *= wth;
    double l = 0.0;
    for (double w : w1) l += w;
    return a * l;
}

// ---------------------------------------------------------------------------
// Rod paths

RodPath RodPath::straight() {
    RodPath p;
    p.v = [](double x) { return Vec3(x, 0, 0); };
    p.rot = [](double) { return Mat3::Identity().eval(); };
    p.curvature = [](double) { return Mat3::Zero().eval(); };
    return p;
}

RodPath RodPath::constant_curvature(double kappa) {
    RodPath p;
    const Mat3 k_mat = kappa * std::sqrt(2.0) * skew_basis()[1];
    p.curvature = [k_mat](double) { return k_mat; };
    p.rot = [k_mat](double x) { return so3_exp(x * k_mat); };
    if (std::abs(kappa) < 1e-14) return straight();
    p.v = [kappa](double x) {
        // alpha(x) = -kappa x; v = (int cos, int sin, 0)
        return Vec3(std::sin(kappa * x) / kappa, (std::cos(kappa * x) - 1.0) / kappa, 0.0);
    };
    return p;
}

// ---------------------------------------------------------------------------

ScaledField3D build_cosserat(const RodPath& path, const GammaGrid& grid, double h,
                             const VolumeField& z) {
    ScaledField3D f;
    f.h = h;
    f.grid = &grid;
    f.y.resize(grid.size());
    f.grad_h.resize(grid.size());
    f.z.assign(grid.size(), Mat3::Zero());
    double worst_identity = 0.0;
    for (int i1 = 0; i1 < grid.n1; ++i1) {
        const double x1 = grid.x1[i1];
        const Vec3 v = path.v(x1);
        const Mat3 rot = path.rot(x1);
        const Mat3 k_mat = path.curvature(x1);
        for (int i2 = 0; i2 < grid.n2; ++i2)
            for (int i3 = 0; i3 < grid.n3; ++i3) {
                const int id = grid.index(i1, i2, i3);
                const Vec2 xb = grid.xbar(i2, i3);
                const Vec3 xb3(0.0, xb.x(), xb.y());
                f.y[id] = v + h * rot * xb3;
                Mat3 n = Mat3::Zero();
                n.col(0) = k_mat * xb3;
                const Mat3 g = rot * (Mat3::Identity() + h * n);
                if (g.determinant() <= 0.0)
                    throw DegenerateDeformation(
                        "build_cosserat: thickness too large for the curvature");
                f.grad_h[id] = g;
                // Metric identity of the ansatz.
                const Mat3 closed = Mat3::Identity() + 2.0 * h * sym(n) +
                                    h * h * n.transpose() * n;
                worst_identity =
                    std::max(worst_identity, (g.transpose() * g - closed).norm());
                if (z) f.z[id] = z(x1, xb);
            }
    }
    if (worst_identity > 1e-12)
        throw InvalidInput("build_cosserat: metric identity violated beyond roundoff");
    return f;
}

double RecoveryPlasticField::outside_fraction() const {
    if (grid == nullptr || in_kpl.empty()) return 0.0;
    double inside = 0.0, total = 0.0;
    for (int i1 = 0; i1 < grid->n1; ++i1)
        for (int i2 = 0; i2 < grid->n2; ++i2)
            for (int i3 = 0; i3 < grid->n3; ++i3) {
                const double w = grid->weight(i1, i2, i3);
                total += w;
                if (in_kpl[grid->index(i1, i2, i3)]) inside += w;
            }
    return 1.0 - inside / total;
}

RecoveryPlasticField recovery_plastic(const VolumeField& z, const VolumeField& ztilde, double h,
                                      const MaterialLaw3D& law, const GammaGrid& grid) {
    RecoveryPlasticField out;
    out.h = h;
    out.grid = &grid;
    out.zh.resize(grid.size());
    out.ztilde.resize(grid.size());
    out.in_kpl.assign(grid.size(), 0);
    for (int i1 = 0; i1 < grid.n1; ++i1)
        for (int i2 = 0; i2 < grid.n2; ++i2)
            for (int i3 = 0; i3 < grid.n3; ++i3) {
                const int id = grid.index(i1, i2, i3);
                const Vec2 xb = grid.xbar(i2, i3);
                const Mat3 zs = z ? z(grid.x1[i1], xb) : Mat3::Zero();
                const Mat3 zt = ztilde ? ztilde(grid.x1[i1], xb) : Mat3::Zero();
                out.ztilde[id] = zt;
                const Mat3 factor = matrix_exp_dev(DevSym3::from_matrix(zt), h) *
                                    (Mat3::Identity() + h * zs);
                if (law.in_kpl(factor)) {
                    out.in_kpl[id] = 1;
                    out.zh[id] = (factor - Mat3::Identity()) / h;
                } else {
                    out.zh[id] = zs;
                }
            }
    return out;
}

// ---------------------------------------------------------------------------
// Finite differences on the grid

namespace {

// Lagrange differentiation weights for three abscissae, derivative at x.
std::array<double, 3> diff3(double x, double a, double b, double c) {
    return {(2 * x - b - c) / ((a - b) * (a - c)), (2 * x - a - c) / ((b - a) * (b - c)),
            (2 * x - a - b) / ((c - a) * (c - b))};
}

struct SampleDerivatives {
    // For each sample, derivative of the field in the x1, x2, x3 directions.
    std::vector<Mat3> d1, d2, d3;
};

SampleDerivatives physical_derivatives(const GammaGrid& g, const std::vector<Mat3>& f) {
    SampleDerivatives out;
    out.d1.resize(g.size());
    out.d2.resize(g.size());
    out.d3.resize(g.size());
    const double dx1 = g.x1[1] - g.x1[0];
    for (int i1 = 0; i1 < g.n1; ++i1)
        for (int i2 = 0; i2 < g.n2; ++i2)
            for (int i3 = 0; i3 < g.n3; ++i3) {
                const int id = g.index(i1, i2, i3);
                // x1: uniform, central with one-sided second-order ends.
                Mat3 d1;
                if (i1 == 0)
                    d1 = (-3.0 * f[g.index(0, i2, i3)] + 4.0 * f[g.index(1, i2, i3)] -
                          f[g.index(2, i2, i3)]) /
                         (2.0 * dx1);
                else if (i1 == g.n1 - 1)
                    d1 = (3.0 * f[g.index(i1, i2, i3)] - 4.0 * f[g.index(i1 - 1, i2, i3)] +
                          f[g.index(i1 - 2, i2, i3)]) /
                         (2.0 * dx1);
                else
                    d1 = (f[g.index(i1 + 1, i2, i3)] - f[g.index(i1 - 1, i2, i3)]) / (2.0 * dx1);

                // radial: three-point stencil on the nonuniform nodes.
                int r0 = std::clamp(i2 - 1, 0, g.n2 - 3);
                const auto wr = diff3(g.rr[i2], g.rr[r0], g.rr[r0 + 1], g.rr[r0 + 2]);
                Mat3 dr = Mat3::Zero();
                for (int k = 0; k < 3; ++k) dr += wr[k] * f[g.index(i1, r0 + k, i3)];

                // angular: periodic central.
                const int ip = (i3 + 1) % g.n3, im = (i3 + g.n3 - 1) % g.n3;
                const Mat3 dth =
                    (f[g.index(i1, i2, ip)] - f[g.index(i1, i2, im)]) / (2.0 * g.wth);

                const double ct = std::cos(g.th[i3]), st = std::sin(g.th[i3]);
                const double inv_r = 1.0 / g.rr[i2];
                out.d1[id] = d1;
                out.d2[id] = ct * dr - st * inv_r * dth;
                out.d3[id] = st * dr + ct * inv_r * dth;
            }
    return out;
}

} // namespace

StrainGradientFields strain_gradient_fields(const ScaledField3D& field) {
    const GammaGrid& g = *field.grid;
    std::vector<Mat3> sqrt_c(g.size()), rot(g.size()), c_full(g.size());
    for (int id = 0; id < g.size(); ++id) {
        const auto polar = polar_decompose(field.grad_h[id]);
        sqrt_c[id] = polar.stretch;
        rot[id] = polar.rotation;
        c_full[id] = field.grad_h[id].transpose() * field.grad_h[id];
    }
    const auto dsq = physical_derivatives(g, sqrt_c);
    const auto dc = physical_derivatives(g, c_full);
    const auto dr = physical_derivatives(g, rot);
    StrainGradientFields out;
    out.grad_sqrt_c.resize(g.size());
    out.grad_c.resize(g.size());
    out.grad_r.resize(g.size());
    out.sqrt_c_dist.resize(g.size());
    for (int id = 0; id < g.size(); ++id) {
        out.grad_sqrt_c[id] = std::sqrt(dsq.d1[id].squaredNorm() + dsq.d2[id].squaredNorm() +
                                        dsq.d3[id].squaredNorm());
        out.grad_c[id] = std::sqrt(dc.d1[id].squaredNorm() + dc.d2[id].squaredNorm() +
                                   dc.d3[id].squaredNorm());
        out.grad_r[id] = std::sqrt(dr.d1[id].squaredNorm() + dr.d2[id].squaredNorm() +
                                   dr.d3[id].squaredNorm());
        out.sqrt_c_dist[id] = (sqrt_c[id] - Mat3::Identity()).norm();
    }
    return out;
}

Energy3DTerms energy_3d(const ScaledField3D& field, const MaterialLaw3D& law,
                        bool scaled_gradients) {
    law.validate();
    const GammaGrid& g = *field.grid;
    const double h = field.h;

    std::vector<Mat3> sqrt_c(g.size()), rot(g.size());
    Energy3DTerms out;
    for (int id = 0; id < g.size(); ++id) {
        if (field.grad_h[id].determinant() <= 0.0)
            throw DegenerateDeformation("energy_3d: det grad_h y <= 0 at a sample");
        const auto polar = polar_decompose(field.grad_h[id]);
        sqrt_c[id] = polar.stretch;
        rot[id] = polar.rotation;
    }
    const auto dsq = physical_derivatives(g, sqrt_c);
    const auto drot = physical_derivatives(g, rot);

    double w_el = 0.0, h_c = 0.0, h_r = 0.0, w_pl = 0.0;
    bool finite = true;
    const double half_p = 0.5 * law.p;
    for (int i1 = 0; i1 < g.n1; ++i1)
        for (int i2 = 0; i2 < g.n2; ++i2)
            for (int i3 = 0; i3 < g.n3; ++i3) {
                const int id = g.index(i1, i2, i3);
                const double w = g.weight(i1, i2, i3);
                const Mat3 f_pl = Mat3::Identity() + h * field.z[id];
                if (f_pl.determinant() <= 0.0)
                    throw DegenerateDeformation("energy_3d: plastic factor not invertible");
                w_el += w * law.w_el(field.grad_h[id] * f_pl.inverse());

                const double nscale = scaled_gradients ? 1.0 / h : 1.0;
                const double gc = dsq.d1[id].squaredNorm() +
                                  nscale * nscale * (dsq.d2[id].squaredNorm() +
                                                     dsq.d3[id].squaredNorm());
                const double gr = drot.d1[id].squaredNorm() +
                                  nscale * nscale * (drot.d2[id].squaredNorm() +
                                                     drot.d3[id].squaredNorm());
                h_c += w * std::pow(gc, half_p);
                h_r += w * std::pow(gr, half_p);

                if (finite) {
                    const double val = law.w_pl(f_pl);
                    if (std::isinf(val))
                        finite = false;
                    else
                        w_pl += w * val;
                }
            }

    out.w_el = w_el / (h * h);
    out.h_c = h_c * std::pow(h, -law.alpha_C * law.p);
    out.h_r = h_r * std::pow(h, law.alpha_R * law.p);
    out.hardening_finite = finite;
    out.w_pl = finite ? w_pl / (h * h) : std::numeric_limits<double>::infinity();
    return out;
}

double dissipation_3d(const RecoveryPlasticField& recovery, double h, double delta) {
    if (recovery.grid == nullptr || recovery.h != h)
        throw InvalidInput("dissipation_3d: pair was not generated from a common path");
    const GammaGrid& g = *recovery.grid;
    double acc = 0.0;
    for (int i1 = 0; i1 < g.n1; ++i1)
        for (int i2 = 0; i2 < g.n2; ++i2)
            for (int i3 = 0; i3 < g.n3; ++i3) {
                const int id = g.index(i1, i2, i3);
                if (recovery.in_kpl[id]) acc += g.weight(i1, i2, i3) * recovery.ztilde[id].norm();
            }
    return delta * acc;
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        if (y[i] <= 0.0 || x[i] <= 0.0) continue;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) return 0.0;
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergenceReport convergence_study(const RodPath& path, const VolumeField& z,
                                    const VolumeField& ztilde, const std::vector<double>& h_list,
                                    const MaterialLaw3D& law, const GammaGrid& grid,
                                    bool scaled_gradients) {
    law.validate();
    ConvergenceReport report;

    // Corrector-free limit of the h^-2 W_el term on the same quadrature.
    double limit = 0.0, limit_diss = 0.0;
    for (int i1 = 0; i1 < grid.n1; ++i1)
        for (int i2 = 0; i2 < grid.n2; ++i2)
            for (int i3 = 0; i3 < grid.n3; ++i3) {
                const double w = grid.weight(i1, i2, i3);
                const Vec2 xb = grid.xbar(i2, i3);
                const Vec3 xb3(0.0, xb.x(), xb.y());
                Mat3 n = Mat3::Zero();
                n.col(0) = path.curvature(grid.x1[i1]) * xb3;
                const Mat3 zs = z ? z(grid.x1[i1], xb) : Mat3::Zero();
                limit += w * law.q_el(sym(n) - sym(zs));
                if (ztilde) limit_diss += w * law.delta * ztilde(grid.x1[i1], xb).norm();
            }
    report.limit_w_el = limit;
    report.limit_dissipation = limit_diss;

    for (double h : h_list) {
        ConvergenceRow row;
        row.h = h;
        const ScaledField3D field = build_cosserat(path, grid, h, z);
        const Energy3DTerms terms = energy_3d(field, law, scaled_gradients);
        row.w_el = terms.w_el;
        row.h_c = terms.h_c;
        row.h_r = terms.h_r;
        row.w_pl = terms.w_pl;
        row.gap = std::abs(terms.w_el - limit);
        if (ztilde) {
            const auto rec = recovery_plastic(z, ztilde, h, law, grid);
            row.dissipation = dissipation_3d(rec, h, law.delta);
        }
        report.rows.push_back(row);
    }

    std::vector<double> hs, gaps, hcs, hrs;
    for (const auto& row : report.rows) {
        hs.push_back(row.h);
        gaps.push_back(row.gap);
        hcs.push_back(row.h_c);
        hrs.push_back(row.h_r);
    }
    report.slope_gap = fit_loglog_slope(hs, gaps);
    report.slope_h_c = fit_loglog_slope(hs, hcs);
    report.slope_h_r = fit_loglog_slope(hs, hrs);
    return report;
}

} // namespace rodplast
