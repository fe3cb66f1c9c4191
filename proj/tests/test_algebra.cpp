#include <doctest.h>

#include <Eigen/SVD>
#include <random>

#include "rodplast/algebra.hpp"

using namespace rodplast;

namespace {

std::mt19937_64 rng(20240817);

double urand(double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(rng);
}

Mat3 random_matrix(double scale = 1.0) {
    Mat3 m;
    for (int i = 0; i < 9; ++i) m.data()[i] = urand(-scale, scale);
    return m;
}

Mat3 random_rotation(double max_angle = 3.0) {
    Vec3 axis = Vec3(urand(-1, 1), urand(-1, 1), urand(-1, 1)).normalized();
    return so3_exp_axial(urand(0.0, max_angle) * axis);
}

// Independent oracle: polar factors from the SVD, R = U diag(1,1,det) V^T.
PolarFactors svd_polar_oracle(const Mat3& f) {
    Eigen::JacobiSVD<Mat3> svd(f, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 u = svd.matrixU(), v = svd.matrixV();
    Vec3 s = svd.singularValues();
    Mat3 d = Mat3::Identity();
    d(2, 2) = (u * v.transpose()).determinant();
    PolarFactors out;
    out.rotation = u * d * v.transpose();
    out.stretch = v * d * s.asDiagonal() * v.transpose();
    return out;
}

Mat3 rotation_z(double angle) {
    Mat3 r = Mat3::Identity();
    r(0, 0) = std::cos(angle);
    r(0, 1) = -std::sin(angle);
    r(1, 0) = std::sin(angle);
    r(1, 1) = std::cos(angle);
    return r;
}

} // namespace

TEST_SUITE_BEGIN("algebra");

TEST_CASE("skew basis entries and orthonormality") {
    const auto& kb = skew_basis();
    const double s = 1.0 / std::sqrt(2.0);
    Mat3 k1 = skew_from_coeffs(SkewCoeffs(1, 0, 0));
    CHECK(k1(2, 1) == doctest::Approx(-s).epsilon(1e-15));
    CHECK(k1(1, 2) == doctest::Approx(s).epsilon(1e-15));
    CHECK((k1 - kb[0]).norm() == 0.0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(kb[i].cwiseProduct(kb[j]).sum() == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-15));
    CHECK(skew_from_coeffs(SkewCoeffs(0, 0, 0)).norm() == 0.0);
}

TEST_CASE("skew coefficients roundtrip and norms") {
    for (int it = 0; it < 200; ++it) {
        SkewCoeffs k(urand(-5, 5), urand(-5, 5), urand(-5, 5));
        const Mat3 a = skew_from_coeffs(k);
        CHECK((a + a.transpose()).norm() <= 1e-14 * std::max(1.0, a.norm()));
        CHECK(a.norm() == doctest::Approx(k.norm()).epsilon(1e-14));
        const SkewCoeffs back = coeffs_from_skew(a);
        CHECK((back.vec() - k.vec()).norm() <= 1e-13 * std::max(1.0, k.norm()));
    }
    CHECK_THROWS_AS(coeffs_from_skew(Mat3::Identity()), InvalidInput);
}

TEST_CASE("axial and coefficient conversions agree") {
    for (int it = 0; it < 50; ++it) {
        const Vec3 a(urand(-2, 2), urand(-2, 2), urand(-2, 2));
        CHECK((skew_from_coeffs(coeffs_from_axial(a)) - hat(a)).norm() < 1e-14);
        const SkewCoeffs k(urand(-2, 2), urand(-2, 2), urand(-2, 2));
        CHECK((axial_from_coeffs(k) - axial(skew_from_coeffs(k))).norm() < 1e-14);
    }
}

TEST_CASE("polar decomposition: identity and diagonal cases") {
    auto id = polar_decompose(Mat3::Identity());
    CHECK((id.rotation - Mat3::Identity()).norm() < 1e-14);
    CHECK((id.stretch - Mat3::Identity()).norm() < 1e-14);

    const Mat3 d = Vec3(2, 1, 1).asDiagonal();
    auto pd = polar_decompose(d);
    CHECK((pd.rotation - Mat3::Identity()).norm() < 1e-13);
    CHECK((pd.stretch - d).norm() < 1e-13);
}

TEST_CASE("polar decomposition recovers rotation times stretch") {
    const Mat3 u = Vec3(1.2, 1.0, 0.9).asDiagonal();
    const Mat3 f = rotation_z(0.3) * u;
    auto p = polar_decompose(f);
    CHECK((p.rotation - rotation_z(0.3)).norm() < 1e-12);
    CHECK((p.stretch - u).norm() < 1e-12);
}

TEST_CASE("polar decomposition against SVD oracle, reconstruction, minimality") {
    for (int it = 0; it < 1000; ++it) {
        Mat3 f = random_matrix(1.0);
        double det = f.determinant();
        if (std::abs(det) < 1e-3) continue;
        if (det < 0) f.col(0) *= -1.0;
        // scale into det in (0.5, 2)
        f *= std::cbrt(urand(0.5, 2.0) / f.determinant());
        auto p = polar_decompose(f);
        auto oracle = svd_polar_oracle(f);
        CHECK((p.rotation - oracle.rotation).norm() < 1e-9 * std::max(1.0, f.norm()));
        CHECK((f - p.rotation * p.stretch).norm() <= 1e-10 * f.norm());
        CHECK((p.rotation.transpose() * p.rotation - Mat3::Identity()).norm() < 1e-12);
        CHECK(p.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-10));
        // U = sqrt(F^T F)
        CHECK((p.stretch * p.stretch - f.transpose() * f).norm() < 1e-10 * f.squaredNorm());
    }
    CHECK_THROWS_AS(polar_decompose(Mat3::Zero()), DegenerateDeformation);
}

TEST_CASE("polar rotation is the closest rotation") {
    for (int it = 0; it < 20; ++it) {
        Mat3 f = random_matrix(1.0);
        if (f.determinant() < 1e-2) continue;
        auto p = polar_decompose(f);
        const double best = (f - p.rotation).norm();
        for (int j = 0; j < 100; ++j) {
            CHECK(best <= (f - random_rotation()).norm() + 1e-12);
        }
    }
}

TEST_CASE("so3 exponential basics") {
    CHECK((so3_exp(Mat3::Zero()) - Mat3::Identity()).norm() == 0.0);
    // exp(theta sqrt(2) K_2) rotates in the (e1, e2) plane fixing e3.
    for (double theta : {0.1, 0.7, 2.0}) {
        const Mat3 r = so3_exp(theta * std::sqrt(2.0) * skew_basis()[1]);
        CHECK((r * Vec3::UnitZ() - Vec3::UnitZ()).norm() < 1e-14);
        CHECK((r - rotation_z(-theta)).norm() < 1e-13); // K_2 has axis -e3/sqrt(2)
    }
}

TEST_CASE("so3 exp output is orthogonal with unit determinant") {
    for (int it = 0; it < 500; ++it) {
        const Mat3 r = so3_exp_axial(urand(0, 3.1) * Vec3(urand(-1, 1), urand(-1, 1), urand(-1, 1)).normalized());
        CHECK((r.transpose() * r - Mat3::Identity()).norm() <= 1e-12);
        CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("log-exp roundtrip for 1000 random skews with angle < 3") {
    double max_err = 0.0;
    for (int it = 0; it < 1000; ++it) {
        const Vec3 a = urand(0.0, 3.0) * Vec3(urand(-1, 1), urand(-1, 1), urand(-1, 1)).normalized();
        const Vec3 back = so3_log_axial(so3_exp_axial(a));
        max_err = std::max(max_err, (back - a).norm());
    }
    CHECK(max_err < 1e-10);
}

TEST_CASE("so3 log branch cut") {
    const Mat3 r = so3_exp_axial((M_PI - 1e-8) * Vec3::UnitX());
    CHECK_THROWS_AS(so3_log(r), LogBranchCut);
}

TEST_CASE("sym and dev_sym") {
    CHECK(dev_sym(Mat3::Identity()).norm() == doctest::Approx(0.0));
    const Mat3 skew = skew_from_coeffs(SkewCoeffs(1, 2, 3));
    CHECK(sym(skew).norm() == doctest::Approx(0.0));
    const Mat3 d = dev_sym(Mat3(Vec3(3, 0, 0).asDiagonal())).matrix();
    CHECK((d - Mat3(Vec3(2, -1, -1).asDiagonal())).norm() < 1e-14);
}

TEST_CASE("dev-sym basis is orthonormal and trace-free") {
    const auto& b = DevSym3::basis();
    for (int i = 0; i < 5; ++i) {
        CHECK(std::abs(b[i].trace()) < 1e-15);
        CHECK((b[i] - b[i].transpose()).norm() == 0.0);
        for (int j = 0; j < 5; ++j)
            CHECK(b[i].cwiseProduct(b[j]).sum() == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-15));
    }
    for (int it = 0; it < 100; ++it) {
        Eigen::Matrix<double, 5, 1> c;
        for (int i = 0; i < 5; ++i) c[i] = urand(-2, 2);
        const DevSym3 z{c};
        const Mat3 m = z.matrix();
        CHECK(std::abs(m.trace()) < 1e-14);
        CHECK((m - m.transpose()).norm() < 1e-15);
        CHECK((DevSym3::from_matrix(m).c - c).norm() < 1e-14);
        CHECK(m.norm() == doctest::Approx(z.norm()).epsilon(1e-14));
    }
}

TEST_CASE("matrix_exp_dev: identity, diagonal, series remainder, determinant") {
    CHECK((matrix_exp_dev(DevSym3{}, 1.0) - Mat3::Identity()).norm() == 0.0);

    // xi = diag(a, -a, 0) -> exp(h xi) = diag(e^{ha}, e^{-ha}, 1)
    const double a = 0.7, h = 0.31;
    const DevSym3 xi = dev_sym(Mat3(Vec3(a, -a, 0).asDiagonal()));
    const Mat3 e = matrix_exp_dev(xi, h);
    CHECK(e(0, 0) == doctest::Approx(std::exp(h * a)).epsilon(1e-14));
    CHECK(e(1, 1) == doctest::Approx(std::exp(-h * a)).epsilon(1e-14));
    CHECK(e(2, 2) == doctest::Approx(1.0).epsilon(1e-14));

    for (int it = 0; it < 200; ++it) {
        Eigen::Matrix<double, 5, 1> c;
        for (int i = 0; i < 5; ++i) c[i] = urand(-1, 1);
        const DevSym3 z{c};
        const double hh = 1e-3;
        const Mat3 ez = matrix_exp_dev(z, hh);
        const Mat3 m = hh * z.matrix();
        CHECK((ez - Mat3::Identity() - m).norm() <= 2.0 * m.squaredNorm());
        CHECK(ez.determinant() == doctest::Approx(1.0).epsilon(1e-10));
        Eigen::SelfAdjointEigenSolver<Mat3> eig(ez);
        CHECK(eig.eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("left jacobian inverse matches finite differences of the log") {
    for (int it = 0; it < 50; ++it) {
        const Vec3 q = urand(0.05, 2.5) * Vec3(urand(-1, 1), urand(-1, 1), urand(-1, 1)).normalized();
        const Mat3 jl = so3_left_jacobian_inv(q);
        const double eps = 1e-7;
        for (int c = 0; c < 3; ++c) {
            const Vec3 d = eps * Vec3::Unit(c);
            const Vec3 plus = so3_log_axial(so3_exp_axial(d) * so3_exp_axial(q));
            const Vec3 minus = so3_log_axial(so3_exp_axial(-d) * so3_exp_axial(q));
            const Vec3 fd = (plus - minus) / (2.0 * eps);
            CHECK((fd - jl.col(c)).norm() < 1e-6);
        }
    }
}

TEST_SUITE_END();
