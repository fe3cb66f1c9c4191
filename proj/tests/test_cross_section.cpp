#include <doctest.h>

#include <cmath>
#include <random>

#include "rodplast/cross_section.hpp"

using namespace rodplast;

namespace {

std::mt19937_64 rng(7151);

double urand(double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(rng);
}

SectionStrainField random_field(const SectionMesh& mesh, double scale = 1.0) {
    SectionStrainField z(mesh.num_quad());
    for (auto& m : z.samples) {
        Mat3 g;
        for (int i = 0; i < 9; ++i) g.data()[i] = urand(-scale, scale);
        m = sym(g);
    }
    return z;
}

} // namespace

TEST_SUITE_BEGIN("cross_section");

TEST_CASE("disc mesh: area defect and symmetry moments") {
    // Inscribed n-gon area defect ~ 2 pi^2 / (3 n^2), n = 16 * 2^r.
    const SectionMesh coarse = generate_disc_mesh(0);
    CHECK(coarse.area() == doctest::Approx(1.0).epsilon(0.05));
    CHECK(coarse.is_connected());

    const SectionMesh fine = generate_disc_mesh(4);
    CHECK(fine.area() == doctest::Approx(1.0).epsilon(1e-3));
    const double predicted = 2.0 * M_PI * M_PI / (3.0 * 256.0 * 256.0);
    CHECK(std::abs(1.0 - fine.area()) == doctest::Approx(predicted).epsilon(0.05));

    for (int r : {0, 2, 4}) {
        const SectionMesh m = generate_disc_mesh(r);
        CHECK(std::abs(m.moment_x2()) < 1e-12);
        CHECK(std::abs(m.moment_x3()) < 1e-12);
        CHECK(std::abs(m.moment_x2x3()) < 1e-12);
    }
}

TEST_CASE("disc mesh second moment approaches 1/(4 pi)") {
    const SectionMesh m = generate_disc_mesh(4);
    CHECK(m.moment_x2x2() == doctest::Approx(1.0 / (4.0 * M_PI)).epsilon(5e-4));
    CHECK(m.moment_x3x3() == doctest::Approx(1.0 / (4.0 * M_PI)).epsilon(5e-4));
}

TEST_CASE("rect mesh: counts, exact area and moments") {
    const SectionMesh m = generate_rect_mesh(1.0, 1.0, 2, 2);
    CHECK(m.num_triangles() == 8);
    CHECK(m.area() == doctest::Approx(1.0).epsilon(1e-15));

    const SectionMesh f = generate_rect_mesh(1.0, 1.0, 64, 64);
    CHECK(f.moment_x2x2() == doctest::Approx(1.0 / 12.0).epsilon(1e-10));
    CHECK(std::abs(f.moment_x2x3()) < 1e-14);
    CHECK(std::abs(f.moment_x2()) < 1e-13);

    CHECK_THROWS_AS(generate_rect_mesh(-1.0, 1.0, 2, 2), InvalidInput);

    // Non-square sections are rescaled to unit area.
    const SectionMesh r = generate_rect_mesh(2.0, 0.5, 8, 4);
    CHECK(r.area() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("elastic tensor acts through the symmetric part and is coercive") {
    const ElasticTensor t = ElasticTensor::isotropic(2.0, 0.7);
    for (int it = 0; it < 50; ++it) {
        Mat3 g;
        for (int i = 0; i < 9; ++i) g.data()[i] = urand(-1, 1);
        CHECK((t.apply(g) - t.apply(sym(g))).norm() < 1e-14);
        const double q = t.quad(g);
        const double s2 = sym(g).squaredNorm();
        CHECK(q >= t.coercivity_lower() * s2 - 1e-12);
        CHECK(q <= t.coercivity_upper() * s2 + 1e-12);
    }
    // Zero-Poisson: Q(G) = mu |sym G|^2.
    const ElasticTensor zp = ElasticTensor::isotropic(3.0, 0.0);
    Mat3 g;
    for (int i = 0; i < 9; ++i) g.data()[i] = urand(-1, 1);
    CHECK(zp.quad(g) == doctest::Approx(3.0 * sym(g).squaredNorm()).epsilon(1e-13));
}

TEST_CASE("disc correctors vanish for the zero-Poisson law; gram is mu/(8 pi) I") {
    const double mu = 2.5;
    const auto model =
        CrossSectionModel::solve_correctors(generate_disc_mesh(4), ElasticTensor::isotropic(mu, 0.0));
    const Mat3 target = (mu / (8.0 * M_PI)) * Mat3::Identity();
    CHECK((model.gram() - target).norm() / target.norm() < 0.01);
    // Bending correctors vanish identically on any centered polygon.
    CHECK(std::abs(model.corrector_a(1)) < 1e-10);
    CHECK(std::abs(model.corrector_a(2)) < 1e-10);
    CHECK(model.corrector_phi(1).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(model.corrector_phi(2).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(model.mean_constraint_residual() < 1e-10);
    CHECK(model.rotation_constraint_residual() < 1e-10);
}

TEST_CASE("q_eff on the disc: zero, paper value, random closed form") {
    const double mu = 4.0 * M_PI;
    const auto model =
        CrossSectionModel::solve_correctors(generate_disc_mesh(4), ElasticTensor::isotropic(mu, 0.0));
    CHECK(model.q_eff(SkewCoeffs(0, 0, 0)) == 0.0);
    CHECK(model.q_eff(SkewCoeffs(0, std::sqrt(2.0), 0)) ==
          doctest::Approx(mu / (4.0 * M_PI)).epsilon(0.01));
    for (int it = 0; it < 20; ++it) {
        const SkewCoeffs k(urand(-2, 2), urand(-2, 2), urand(-2, 2));
        CHECK(model.q_eff(k) ==
              doctest::Approx(mu / (8.0 * M_PI) * k.vec().squaredNorm()).epsilon(0.01));
    }
}

TEST_CASE("k_eff moments on the disc") {
    const double mu = 1.7;
    const auto model =
        CrossSectionModel::solve_correctors(generate_disc_mesh(4), ElasticTensor::isotropic(mu, 0.0));
    const auto& mesh = model.mesh();

    SUBCASE("zero field") {
        CHECK(model.k_eff(SectionStrainField(mesh.num_quad())).norm() == 0.0);
    }
    SUBCASE("z11 = x2 gives sqrt(2) K_2") {
        const auto z = SectionStrainField::from_function(mesh, [](const Vec2& p) {
            Mat3 m = Mat3::Zero();
            m(0, 0) = p.x();
            return m;
        });
        const SkewCoeffs k = model.k_eff(z);
        CHECK(k.k2 == doctest::Approx(std::sqrt(2.0)).epsilon(5e-3));
        CHECK(std::abs(k.k1) < 1e-8);
        CHECK(std::abs(k.k3) < 1e-8);
    }
    SUBCASE("constant fields are annihilated by the centering") {
        const auto z = SectionStrainField::from_function(mesh, [](const Vec2&) {
            Mat3 m;
            m << 1.0, 0.4, -0.3, 0.4, -2.0, 0.9, -0.3, 0.9, 0.7;
            return m;
        });
        CHECK(model.k_eff(z).norm() < 1e-10);
    }
    SUBCASE("linearity") {
        const auto z1 = random_field(mesh);
        const auto z2 = random_field(mesh);
        const double a = 1.7, b = -0.6;
        SectionStrainField mix(mesh.num_quad());
        for (int q = 0; q < mesh.num_quad(); ++q)
            mix.samples[q] = a * z1.samples[q] + b * z2.samples[q];
        const Vec3 lhs = model.k_eff(mix).vec();
        const Vec3 rhs = a * model.k_eff(z1).vec() + b * model.k_eff(z2).vec();
        CHECK((lhs - rhs).norm() <= 1e-12 * std::max(1.0, rhs.norm()));
    }
}

TEST_CASE("z_res: annihilation, orthogonality, idempotence") {
    const double mu = 2.0;
    const auto model =
        CrossSectionModel::solve_correctors(generate_disc_mesh(3), ElasticTensor::isotropic(mu, 0.0));
    const auto& mesh = model.mesh();

    SUBCASE("z11 = x2 lies in the bending space") {
        const auto z = SectionStrainField::from_function(mesh, [](const Vec2& p) {
            Mat3 m = Mat3::Zero();
            m(0, 0) = p.x();
            return m;
        });
        CHECK(std::sqrt(model.q_norm_sq(model.z_res(z))) < 1e-8);
    }
    SUBCASE("constant axial strain is absorbed by the stretch corrector") {
        const auto z = SectionStrainField::from_function(mesh, [](const Vec2&) {
            Mat3 m = Mat3::Zero();
            m(0, 0) = 0.8;
            return m;
        });
        const auto aux = model.solve_aux(z);
        CHECK(aux.a == doctest::Approx(-0.8).epsilon(1e-8));
        CHECK(std::sqrt(model.q_norm_sq(model.z_res(z))) < 1e-8);
    }
    SUBCASE("quadratic profile has a nonzero residual orthogonal to the psi") {
        const auto z = SectionStrainField::from_function(mesh, [](const Vec2& p) {
            Mat3 m = Mat3::Zero();
            m(0, 0) = p.x() * p.x();
            return m;
        });
        const auto res = model.z_res(z);
        CHECK(std::sqrt(model.q_norm_sq(res)) > 1e-3);
        const Vec3 inner = model.psi_inner(res);
        CHECK(inner.norm() < 1e-10);
        // Orthogonal to the relaxation space: the aux corrector of the
        // residual vanishes.
        const auto aux = model.solve_aux(res);
        CHECK(std::abs(aux.a) < 1e-9);
        double chimax = 0.0;
        for (const auto& c : aux.chi) chimax = std::max(chimax, c.norm());
        CHECK(chimax < 1e-7);
        // Idempotence.
        const auto res2 = model.z_res(res);
        double diff = 0.0;
        for (int q = 0; q < mesh.num_quad(); ++q)
            diff = std::max(diff, (res2.samples[q] - res.samples[q]).norm());
        CHECK(diff < 1e-8);
    }
}

TEST_CASE("orthogonal decomposition of the Q-norm") {
    const auto model =
        CrossSectionModel::solve_correctors(generate_disc_mesh(3), ElasticTensor::isotropic(1.3, 0.4));
    const auto& mesh = model.mesh();
    for (int it = 0; it < 5; ++it) {
        const auto z = random_field(mesh);
        const Vec3 coef = model.gram_inverse() * model.psi_inner(z);
        SectionStrainField macro(mesh.num_quad());
        for (int q = 0; q < mesh.num_quad(); ++q)
            for (int i = 0; i < 3; ++i) macro.samples[q] += coef[i] * model.psi(i, q);
        const auto aux = model.solve_aux(z);
        SectionStrainField rel(mesh.num_quad());
        for (int q = 0; q < mesh.num_quad(); ++q) rel.samples[q] = -aux.chi[q];
        const auto res = model.z_res(z);
        const double total = model.q_norm_sq(z);
        const double parts = model.q_norm_sq(macro) + model.q_norm_sq(rel) + model.q_norm_sq(res);
        CHECK(total == doctest::Approx(parts).epsilon(1e-8));
    }
}

TEST_CASE("relaxed energy density: trivial, accommodated, elastic") {
    const double mu = 4.0 * M_PI;
    const auto model =
        CrossSectionModel::solve_correctors(generate_disc_mesh(4), ElasticTensor::isotropic(mu, 0.0));
    const auto& mesh = model.mesh();
    const SectionStrainField zero(mesh.num_quad());
    CHECK(model.relaxed_energy_density(SkewCoeffs(0, 0, 0), zero) == doctest::Approx(0.0));

    const SkewCoeffs bend(0, std::sqrt(2.0), 0);
    CHECK(model.relaxed_energy_density(bend, zero) == doctest::Approx(mu / (4 * M_PI)).epsilon(0.01));

    const auto z = SectionStrainField::from_function(mesh, [](const Vec2& p) {
        Mat3 m = Mat3::Zero();
        m(0, 0) = p.x();
        return m;
    });
    CHECK(model.relaxed_energy_density(bend, z) < 1e-8);
}

TEST_CASE("two routes to the relaxed energy agree") {
    const auto model =
        CrossSectionModel::solve_correctors(generate_disc_mesh(3), ElasticTensor::isotropic(2.2, 0.5));
    const auto& mesh = model.mesh();
    for (int it = 0; it < 5; ++it) {
        const auto z = random_field(mesh, 0.7);
        const SkewCoeffs k(urand(-1, 1), urand(-1, 1), urand(-1, 1));
        const double via_eff = model.relaxed_energy_density(k, z);
        const double direct = model.relaxed_energy_density_direct(k, z);
        CHECK(via_eff == doctest::Approx(direct).epsilon(1e-9));
    }
}

TEST_CASE("non-degeneracy from gram eigenvalues") {
    const auto model =
        CrossSectionModel::solve_correctors(generate_disc_mesh(2), ElasticTensor::isotropic(1.0, 0.3));
    Eigen::SelfAdjointEigenSolver<Mat3> eig(model.gram());
    const double c = eig.eigenvalues().minCoeff();
    const double cc = eig.eigenvalues().maxCoeff();
    CHECK(c > 0.0);
    for (int it = 0; it < 100; ++it) {
        const SkewCoeffs k(urand(-3, 3), urand(-3, 3), urand(-3, 3));
        const double q = model.q_eff(k);
        const double n2 = k.vec().squaredNorm();
        CHECK(q >= c * n2 - 1e-12);
        CHECK(q <= cc * n2 + 1e-12);
    }
}

TEST_CASE("square section: torsion warping lowers the twist stiffness") {
    const double mu = 1.0;
    const auto coarse = CrossSectionModel::solve_correctors(generate_rect_mesh(1, 1, 16, 16),
                                                            ElasticTensor::isotropic(mu, 0.0));
    const auto fine = CrossSectionModel::solve_correctors(generate_rect_mesh(1, 1, 64, 64),
                                                          ElasticTensor::isotropic(mu, 0.0));
    // Warping is nonzero on the square.
    CHECK(coarse.corrector_phi(0).cwiseAbs().maxCoeff() > 1e-3);
    const double polar = fine.mesh().moment_x2x2() + fine.mesh().moment_x3x3();
    CHECK(fine.gram()(0, 0) < mu * polar / 2.0);
    // No-corrector value is mu * polar / 4; warping strictly improves it.
    CHECK(fine.gram()(0, 0) < mu * polar / 4.0 - 1e-4);
    // Two refinements apart agree to FEM accuracy.
    CHECK(coarse.gram()(0, 0) == doctest::Approx(fine.gram()(0, 0)).epsilon(2e-3));
}

TEST_CASE("Galerkin monotonicity on nested rectangle meshes") {
    const ElasticTensor t = ElasticTensor::isotropic(1.0, 0.5);
    double prev[3] = {1e300, 1e300, 1e300};
    for (int n : {4, 8, 16}) {
        const auto model = CrossSectionModel::solve_correctors(generate_rect_mesh(1, 1, n, n), t);
        for (int i = 0; i < 3; ++i) {
            // Corrector minimum energy equals the gram diagonal.
            CHECK(model.gram()(i, i) <= prev[i] + 1e-12);
            prev[i] = model.gram()(i, i);
        }
    }
}

TEST_CASE("quadrature mismatch raises InvalidInput") {
    const auto model =
        CrossSectionModel::solve_correctors(generate_disc_mesh(1), ElasticTensor::isotropic(1.0, 0.0));
    SectionStrainField wrong(3);
    CHECK_THROWS_AS(model.k_eff(wrong), InvalidInput);
}

TEST_CASE("json round trip preserves the model") {
    const auto model =
        CrossSectionModel::solve_correctors(generate_rect_mesh(1, 2, 6, 10), ElasticTensor::isotropic(1.1, 0.2));
    const std::string text = model.to_json_string();
    const auto back = CrossSectionModel::from_json_string(text);
    CHECK((back.gram() - model.gram()).norm() < 1e-14);
    const auto z = random_field(model.mesh(), 0.5);
    CHECK(back.k_eff(z).vec().isApprox(model.k_eff(z).vec(), 1e-12));
    CHECK(back.relaxed_energy_density(SkewCoeffs(0.3, -0.2, 0.8), z) ==
          doctest::Approx(model.relaxed_energy_density(SkewCoeffs(0.3, -0.2, 0.8), z)).epsilon(1e-12));
}

TEST_CASE("analytic disc model matches the solved model") {
    const double mu = 4.0 * M_PI;
    const auto analytic = CrossSectionModel::analytic_disc(mu, 3);
    const auto solved =
        CrossSectionModel::solve_correctors(generate_disc_mesh(3), ElasticTensor::isotropic(mu, 0.0));
    CHECK((analytic.gram() - (mu / (8 * M_PI)) * Mat3::Identity()).norm() < 1e-15);
    CHECK((analytic.gram() - solved.gram()).norm() / analytic.gram().norm() < 0.01);
    const auto z = random_field(analytic.mesh(), 0.5);
    CHECK(analytic.relaxed_energy_density(SkewCoeffs(0.5, 0.1, -0.7), z) ==
          doctest::Approx(solved.relaxed_energy_density(SkewCoeffs(0.5, 0.1, -0.7), z)).epsilon(0.02));
}

TEST_SUITE_END();
