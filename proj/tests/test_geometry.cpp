// Screw-group geometry: transformation examples, group law, isometry,
// tangency, helicity verification, and helical extension.
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "helfb/exact_solutions.hpp"
#include "helfb/geometry.hpp"
#include "helfb/grid.hpp"

using namespace helfb;

namespace {

std::vector<Point3> random_points(std::size_t n, unsigned seed, double box = 2.0) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uni(-box, box);
    std::vector<Point3> pts(n);
    for (auto& p : pts) p = {uni(rng), uni(rng), uni(rng)};
    return pts;
}

}  // namespace

TEST_CASE("screw transformation examples") {
    const Pitch unit(1.0);
    SUBCASE("rho = 0 is the identity") {
        const Point3 p{0.3, -1.2, 7.0};
        const Point3 q = screw_transform(p, {0.0, unit});
        CHECK((q - p).norm() <= 1e-15);
    }
    SUBCASE("quarter turn of (1,0,0)") {
        const Point3 q = screw_transform({1, 0, 0}, {std::numbers::pi / 2, unit});
        CHECK(q.x == doctest::Approx(0.0).epsilon(1e-15).scale(1));
        CHECK(q.y == doctest::Approx(-1.0));
        CHECK(q.z == doctest::Approx(std::numbers::pi / 2));
    }
    SUBCASE("axis points translate only") {
        for (double rho : {-2.0, 0.7, 4.0}) {
            const Point3 q = screw_transform({0, 0, 0}, {rho, unit});
            CHECK(q.x == 0.0);
            CHECK(q.y == 0.0);
            CHECK(q.z == doctest::Approx(rho));
        }
    }
    SUBCASE("pitch must be nonzero") {
        CHECK_THROWS_AS(Pitch(0.0), std::invalid_argument);
    }
}

TEST_CASE("group law, isometry, tangency over random samples") {
    const Pitch pitch(0.7);
    const auto pts = random_points(100, 31);
    std::mt19937 rng(47);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    for (const Point3& p : pts) {
        const double r1 = angle(rng), r2 = angle(rng);
        const Point3 two_step = screw_transform(screw_transform(p, {r2, pitch}), {r1, pitch});
        const Point3 one_step = screw_transform(p, {r1 + r2, pitch});
        CHECK((two_step - one_step).norm() <= 1e-12);

        const Point3 q = pts[(&p - pts.data() + 1) % pts.size()];
        const double before = (p - q).norm();
        const double after =
            (screw_transform(p, {r1, pitch}) - screw_transform(q, {r1, pitch})).norm();
        CHECK(std::abs(before - after) <= 1e-12);

        // xi is itself a helical vector field: xi(S_rho p) = R_rho xi(p).
        const Vec3 lhs = xi_field(screw_transform(p, {r1, pitch}), pitch);
        const Vec3 rhs = rotate_z(xi_field(p, pitch), r1);
        CHECK((lhs - rhs).norm() <= 1e-12);
    }
}

TEST_CASE("xi field examples") {
    CHECK((xi_field({0, 0, 0}, Pitch(2.0)) - Vec3{0, 0, 2}).norm() == 0.0);
    CHECK((xi_field({1, 2, 3}, Pitch(2.0)) - Vec3{2, -1, 2}).norm() == 0.0);
    CHECK(xi_field({3, 4, 0}, Pitch(1.0)).norm2() == doctest::Approx(26.0));
}

TEST_CASE("helicity verification for scalar fields") {
    const Pitch pitch(1.0);
    const auto probes = random_points(50, 7, 1.5);

    SUBCASE("radial functions are helical") {
        ScalarSampler3 f = [](const Point3& p) { return p.x * p.x + p.y * p.y; };
        const auto rep = verify_helical_function(f, probes, pitch, 1e-4);
        CHECK(rep.evaluated == probes.size());
        CHECK(rep.max_residual <= 1e-10);  // central differences exact on quadratics
    }
    SUBCASE("f = x has residual |y|") {
        const std::vector<Point3> single{{0, 1, 0}};
        ScalarSampler3 f = [](const Point3& p) { return p.x; };
        const auto rep = verify_helical_function(f, single, pitch, 1e-4);
        CHECK(rep.max_residual == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("helical screw harmonic, FD residual O(step^2)") {
        ScalarSampler3 f = [](const Point3& p) {
            return p.x * std::cos(p.z) - p.y * std::sin(p.z);
        };
        const double s1 = 1e-2, s2 = 5e-3;
        const double r1 = verify_helical_function(f, probes, pitch, s1).max_residual;
        const double r2 = verify_helical_function(f, probes, pitch, s2).max_residual;
        CHECK(r1 <= 1e-3);
        CHECK(r2 <= 0.30 * r1);  // second order: factor ~4 per halving
    }
    SUBCASE("exact gradients give residuals at rounding level") {
        ScalarGradient3 grad = [](const Point3& p) { return Vec3{2 * p.x, 2 * p.y, 0.0}; };
        const auto rep = verify_helical_function(grad, probes, pitch);
        CHECK(rep.max_residual <= 1e-10);
    }
    SUBCASE("undefined probes are counted as skipped") {
        ScalarSampler3 f = [](const Point3& p) -> std::optional<double> {
            if (p.x > 0.0) return std::nullopt;
            return p.y;
        };
        const std::vector<Point3> two{{-1, 0, 0}, {1, 0, 0}};
        const auto rep = verify_helical_function(f, two, pitch, 1e-4);
        CHECK(rep.skipped == 1);
        CHECK(rep.evaluated == 1);
    }
}

TEST_CASE("helicity verification for vector fields") {
    const Pitch pitch(1.0);
    const auto probes = random_points(40, 11, 1.5);

    SUBCASE("constant vertical field is helical") {
        VectorSampler3 v = [](const Point3&) { return Vec3{0, 0, 1}; };
        const auto rep = verify_helical_vector_field(v, probes, pitch, 1e-4);
        CHECK(rep.max_residual() <= 1e-12);
    }
    SUBCASE("xi itself satisfies the identities") {
        VectorSampler3 v = [&](const Point3& p) { return xi_field(p, pitch); };
        const auto rep = verify_helical_vector_field(v, probes, pitch, 1e-4);
        CHECK(rep.max_residual() <= 1e-10);  // linear components, FD exact
    }
    SUBCASE("constant horizontal field fails the second identity") {
        VectorSampler3 v = [](const Point3&) { return Vec3{1, 0, 0}; };
        const auto rep = verify_helical_vector_field(v, probes, pitch, 1e-4);
        CHECK(rep.comp1.max_residual <= 1e-12);
        CHECK(rep.comp2.max_residual == doctest::Approx(1.0));
        CHECK(rep.comp3.max_residual <= 1e-12);
    }
}

TEST_CASE("helical extension of cross-section data") {
    const Pitch pitch(1.0);

    SUBCASE("identity at z = 0 and invariance of the vertical constant") {
        auto cross = [](const Vec2& q) -> std::optional<Vec3> {
            return Vec3{q.x, q.y * q.y, 1.0};
        };
        const auto v = helical_extend_field(cross, {0.3, 0.4, 0.0}, pitch);
        REQUIRE(v.has_value());
        CHECK((*v - Vec3{0.3, 0.16, 1.0}).norm() <= 1e-15);

        auto vertical = [](const Vec2&) -> std::optional<Vec3> { return Vec3{0, 0, 1}; };
        const auto w = helical_extend_field(vertical, {0.7, -2.0, 5.0}, pitch);
        REQUIRE(w.has_value());
        CHECK((*w - Vec3{0, 0, 1}).norm() <= 1e-15);
    }
    SUBCASE("the extension of xi restricted to z = 0 is xi") {
        auto cross = [&](const Vec2& q) -> std::optional<Vec3> {
            return xi_field({q.x, q.y, 0.0}, pitch);
        };
        for (const Point3& p : random_points(60, 13)) {
            const auto v = helical_extend_field(cross, p, pitch);
            REQUIRE(v.has_value());
            CHECK((*v - xi_field(p, pitch)).norm() <= 1e-12);
        }
    }
    SUBCASE("out-of-domain pullback reports no value") {
        auto cross = [](const Vec2& q) -> std::optional<Vec3> {
            if (q.norm() > 1.0) return std::nullopt;
            return Vec3{1, 0, 0};
        };
        CHECK_FALSE(helical_extend_field(cross, {2.0, 0.0, 0.0}, pitch).has_value());
    }
    SUBCASE("extension consistency on a grid-backed cross-section field") {
        // Bilinear samples of a smooth planar field; the extension evaluated
        // at S_rho(x, y, 0) must equal R_rho times the value at (x, y, 0) to
        // interpolation accuracy.
        auto grid = std::make_shared<const CrossSectionGrid>(
            build_grid(RectDomain{{-2, -2}, {2, 2}}, 1.0 / 64, {}));
        StreamField fx(grid), fy(grid), fz(grid);
        fx.sample([](const Vec2& q) { return std::sin(q.x) * std::cos(q.y); });
        fy.sample([](const Vec2& q) { return q.x * q.y; });
        fz.sample([](const Vec2& q) { return std::cos(q.x + q.y); });
        auto cross = [&](const Vec2& q) -> std::optional<Vec3> {
            auto a = fx.value(q);
            auto b = fy.value(q);
            auto c = fz.value(q);
            if (!a || !b || !c) return std::nullopt;
            return Vec3{*a, *b, *c};
        };
        std::mt19937 rng(17);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        double worst = 0.0;
        for (int k = 0; k < 50; ++k) {
            const Vec2 q{uni(rng), uni(rng)};
            const double rho = uni(rng);
            const Point3 p = screw_transform({q.x, q.y, 0.0}, {rho, pitch});
            const auto lhs = helical_extend_field(cross, p, pitch);
            const auto base = cross(q);
            REQUIRE(lhs.has_value());
            const Vec3 rhs = rotate_z(*base, rho);
            worst = std::max(worst, (*lhs - rhs).norm());
        }
        CHECK(worst <= 5e-4);  // bilinear interpolation error at h = 1/64
    }
}
