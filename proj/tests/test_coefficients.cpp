// Coefficient matrix K, its square root and ellipticity bounds, and the
// vorticity profile admissibility machinery.
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <vector>

#include "helfb/coefficients.hpp"
#include "helfb/vorticity.hpp"

using namespace helfb;

namespace {

// Independent 2x2 symmetric eigenvalue oracle.
void sym_eigenvalues(const CoeffMatrix& m, double& lo, double& hi) {
    const double tr = m.k11 + m.k22;
    const double disc = std::sqrt(std::max(0.0, 0.25 * (m.k11 - m.k22) * (m.k11 - m.k22) +
                                                    m.k12 * m.k12));
    lo = 0.5 * tr - disc;
    hi = 0.5 * tr + disc;
}

}  // namespace

TEST_CASE("coefficient matrix examples") {
    SUBCASE("origin gives the identity") {
        for (double kappa : {0.5, 1.0, 3.0}) {
            const CoeffMatrix K = coeff_matrix({0, 0}, Pitch(kappa));
            CHECK(K.k11 == doctest::Approx(1.0));
            CHECK(K.k12 == doctest::Approx(0.0));
            CHECK(K.k22 == doctest::Approx(1.0));
        }
    }
    SUBCASE("kappa = 1 at (1, 0)") {
        const CoeffMatrix K = coeff_matrix({1, 0}, Pitch(1.0));
        CHECK(K.k11 == doctest::Approx(0.5));
        CHECK(K.k12 == doctest::Approx(0.0));
        CHECK(K.k22 == doctest::Approx(1.0));
    }
    SUBCASE("determinant identity at (1, 1)") {
        const CoeffMatrix K = coeff_matrix({1, 1}, Pitch(1.0));
        CHECK(K.det() == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    }
}

TEST_CASE("spectral structure over random samples") {
    std::mt19937 rng(101);
    std::uniform_real_distribution<double> coord(-3.0, 3.0);
    std::uniform_real_distribution<double> pitch_draw(0.3, 4.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const Vec2 X{coord(rng), coord(rng)};
        const double kappa = pitch_draw(rng);
        const Pitch pitch(kappa);
        const CoeffMatrix K = coeff_matrix(X, pitch);

        const double mu = kappa * kappa / (kappa * kappa + X.norm2());
        double lo, hi;
        sym_eigenvalues(K, lo, hi);
        CHECK(std::abs(hi - 1.0) <= 1e-10);
        CHECK(std::abs(lo - mu) <= 1e-10);

        // The radial direction is an eigenvector with eigenvalue mu.
        const Vec2 KX = K.apply(X);
        CHECK(std::abs(KX.x - mu * X.x) <= 1e-12);
        CHECK(std::abs(KX.y - mu * X.y) <= 1e-12);

        // Closed-form inverse.
        const CoeffMatrix prod = K.mul(coeff_matrix_inverse(X, pitch));
        CHECK(std::abs(prod.k11 - 1.0) <= 1e-12);
        CHECK(std::abs(prod.k12) <= 1e-12);
        CHECK(std::abs(prod.k22 - 1.0) <= 1e-12);
    }
}

TEST_CASE("coefficient square root") {
    SUBCASE("identity at the origin") {
        const CoeffSqrt s = coeff_sqrt({0, 0}, Pitch(2.0));
        CHECK(s.sqrt.k11 == 1.0);
        CHECK(s.sqrt.k12 == 0.0);
        CHECK(s.sqrt.k22 == 1.0);
    }
    SUBCASE("kappa = 1 at (1, 0): diag(1/sqrt(2), 1)") {
        const CoeffSqrt s = coeff_sqrt({1, 0}, Pitch(1.0));
        CHECK(s.sqrt.k11 == doctest::Approx(1.0 / std::sqrt(2.0)));
        CHECK(s.sqrt.k12 == doctest::Approx(0.0));
        CHECK(s.sqrt.k22 == doctest::Approx(1.0));
    }
    SUBCASE("defining identity and inverse at random points") {
        std::mt19937 rng(33);
        std::uniform_real_distribution<double> coord(-2.0, 2.0);
        for (int trial = 0; trial < 300; ++trial) {
            const Vec2 X{coord(rng), coord(rng)};
            const Pitch pitch(1.3);
            const CoeffMatrix K = coeff_matrix(X, pitch);
            const CoeffSqrt s = coeff_sqrt(X, pitch);
            const CoeffMatrix sq = s.sqrt.mul(s.sqrt);
            CHECK(std::abs(sq.k11 - K.k11) <= 1e-12);
            CHECK(std::abs(sq.k12 - K.k12) <= 1e-12);
            CHECK(std::abs(sq.k22 - K.k22) <= 1e-12);
            const CoeffMatrix id = s.sqrt.mul(s.inv_sqrt);
            CHECK(std::abs(id.k11 - 1.0) <= 1e-12);
            CHECK(std::abs(id.k12) <= 1e-12);
            CHECK(std::abs(id.k22 - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("ellipticity bounds") {
    const EllipticityBounds b1 = ellipticity_bounds(1.0, Pitch(1.0));
    CHECK(b1.lambda_min == doctest::Approx(0.5));
    CHECK(b1.lambda_max == 1.0);
    const EllipticityBounds b2 = ellipticity_bounds(0.0, Pitch(3.0));
    CHECK(b2.lambda_min == doctest::Approx(1.0));
    const EllipticityBounds b3 = ellipticity_bounds(1.0, Pitch(2.0));
    CHECK(b3.lambda_min == doctest::Approx(0.8));
}

TEST_CASE("coefficients are Lipschitz on bounded balls") {
    // Frobenius distance against an FD bound on |DK|; gives a measurable L.
    const Pitch pitch(1.0);
    std::mt19937 rng(55);
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    double measured = 0.0;
    for (int trial = 0; trial < 2000; ++trial) {
        const Vec2 X{coord(rng), coord(rng)};
        const Vec2 Y{coord(rng), coord(rng)};
        const double d = (X - Y).norm();
        if (d < 1e-8) continue;
        const CoeffMatrix A = coeff_matrix(X, pitch);
        const CoeffMatrix B = coeff_matrix(Y, pitch);
        const double frob = std::sqrt((A.k11 - B.k11) * (A.k11 - B.k11) +
                                      2 * (A.k12 - B.k12) * (A.k12 - B.k12) +
                                      (A.k22 - B.k22) * (A.k22 - B.k22));
        measured = std::max(measured, frob / d);
    }
    CHECK(measured > 0.0);
    CHECK(measured <= 2.0);  // comfortable bound for kappa = 1 on B_2
}

TEST_CASE("sigmoid profile evaluation") {
    const VorticityProfile p = VorticityProfile::sigmoid();
    SUBCASE("values at zero") {
        const ProfileSample v = p.eval(0.0);
        CHECK(v.f == doctest::Approx(0.0));
        CHECK(v.fprime == doctest::Approx(-1.0));
        CHECK(v.F == doctest::Approx(0.0));
    }
    SUBCASE("limit for very negative s, no overflow") {
        CHECK(p.f(-200.0) == doctest::Approx(0.5));
        CHECK(std::isfinite(p.primitive(-200.0)));
        CHECK(p.f(200.0) == doctest::Approx(-0.5));
        CHECK(std::isfinite(p.primitive(200.0)));
    }
    SUBCASE("F' = f and f' <= 0 by finite differences") {
        const double d = 1e-6;
        for (double s = -2.0; s <= 2.0; s += 0.05) {
            const double fd_F = (p.primitive(s + d) - p.primitive(s - d)) / (2 * d);
            CHECK(std::abs(fd_F - p.f(s)) <= 1e-6);
            const double fd_f = (p.f(s + d) - p.f(s - d)) / (2 * d);
            CHECK(std::abs(fd_f - p.fprime(s)) <= 1e-6);
            CHECK(p.fprime(s) <= 0.0);
        }
    }
}

TEST_CASE("zero profile") {
    const VorticityProfile p = VorticityProfile::zero();
    for (double s : {-3.0, 0.0, 2.5}) {
        const ProfileSample v = p.eval(s);
        CHECK(v.f == 0.0);
        CHECK(v.fprime == 0.0);
        CHECK(v.F == 0.0);
    }
}

TEST_CASE("profile validation") {
    std::vector<double> mesh;
    for (double s = -4.0; s <= 4.0; s += 0.01) mesh.push_back(s);

    SUBCASE("sigmoid with F0 = 1 passes") {
        CHECK(validate_profile(VorticityProfile::sigmoid(1.0), mesh).ok);
    }
    SUBCASE("negative constant fails at s <= 0") {
        const auto p = VorticityProfile::tabulated({-5.0, 5.0}, {-1.0, -1.0}, 1.0);
        const auto v = validate_profile(p, mesh);
        CHECK_FALSE(v.ok);
        CHECK(v.s_violation <= 0.0);
    }
    SUBCASE("increasing profile fails the slope condition") {
        const auto p = VorticityProfile::tabulated({-5.0, 5.0}, {0.0, 1.0}, 1.0);
        const auto v = validate_profile(p, mesh);
        CHECK_FALSE(v.ok);
        CHECK(v.what == "f'(s) > 0");
    }
}

TEST_CASE("tabulated profile from CSV keeps monotonicity and the exact primitive") {
    // Samples of the sigmoid; PCHIP preserves f' <= 0 between them.
    const char* path = "profile_tab_test.csv";
    {
        std::ofstream out(path);
        out << "s,f\n";
        for (double s = -3.0; s <= 3.0 + 1e-12; s += 0.25) {
            out << s << "," << (1.0 / (1.0 + std::exp(4 * s)) - 0.5) << "\n";
        }
    }
    const VorticityProfile p = VorticityProfile::tabulated_from_csv(path, 1.0);
    std::remove(path);

    CHECK(p.primitive(0.0) == doctest::Approx(0.0));
    const double d = 1e-6;
    for (double s = -2.9; s <= 2.9; s += 0.037) {
        const double fd_F = (p.primitive(s + d) - p.primitive(s - d)) / (2 * d);
        CHECK(std::abs(fd_F - p.f(s)) <= 1e-6);
        CHECK(p.fprime(s) <= 1e-12);
    }
    std::vector<double> mesh;
    for (double s = -3.0; s <= 3.0; s += 0.017) mesh.push_back(s);
    CHECK(validate_profile(p, mesh).ok);
}
