#include <cmath>

#include "doctest.h"
#include "kinreg/geometry.hpp"
#include "kinreg/numeric.hpp"

using namespace kinreg;

namespace {

Point random_point(UniformStream& rng, double xr, double vr, double tlo, double thi) {
    return Point(rng.next(-xr, xr), rng.next(-vr, vr), rng.next(tlo, thi));
}

}  // namespace

TEST_CASE("membership examples") {
    const Point origin(0.0, 0.0, 0.0);
    CHECK(cylinder_contains(CylinderSpec(origin, 1.0), Point(0.5, 0.5, -0.5)));
    CHECK_FALSE(cylinder_contains(CylinderSpec(origin, 0.9), Point(0.8, 0.5, -0.5)));
    CHECK(cylinder_contains(CylinderSpec(origin, 1.0, CylinderKind::Sheared), Point(-0.5, 0.6, -0.8)));
}

TEST_CASE("boundary convention: strict in space, closed at t0, open at t0 - R^2") {
    const CylinderSpec q(Point(0.0, 0.0, 0.0), 1.0);
    CHECK(cylinder_contains(q, Point(0.0, 0.0, 0.0)));
    CHECK_FALSE(cylinder_contains(q, Point(0.0, 0.0, -1.0)));
    CHECK_FALSE(cylinder_contains(q, Point(1.0, 0.0, -0.5)));
    CHECK_FALSE(cylinder_contains(q, Point(0.0, -1.0, -0.5)));
    CHECK_FALSE(cylinder_contains(q, Point(0.0, 0.0, 1e-12)));
}

TEST_CASE("slanted cylinder follows the center velocity") {
    const CylinderSpec q(Point(0.0, 2.0, 0.0), 1.0, CylinderKind::Slanted);
    // x - x0 - (t - t0) v0 = -1.0 + 0.5 * 2 = 0
    CHECK(cylinder_contains(q, Point(-1.0, 2.0, -0.5)));
    CHECK_FALSE(cylinder_contains(CylinderSpec(Point(0.0, 2.0, 0.0), 1.0), Point(-1.0, 2.0, -0.5)));
}

TEST_CASE("volume") {
    const Point o(0.0, 0.0, 0.0);
    CHECK(cylinder_volume(CylinderSpec(o, 1.0), 1) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(cylinder_volume(CylinderSpec(o, 2.0), 1) == doctest::Approx(256.0).epsilon(1e-15));
    for (int d = 1; d <= 3; ++d) {
        for (double r : {0.25, 0.5, 3.0}) {
            const double ratio = cylinder_volume(CylinderSpec(o, r), d) / cylinder_volume(CylinderSpec(o, 1.0), d);
            CHECK(ratio == doctest::Approx(std::pow(r, 4 * d + 2)).epsilon(1e-14));
        }
        CHECK(cylinder_volume(CylinderSpec(o, 1.3, CylinderKind::Sheared), d) ==
              cylinder_volume(CylinderSpec(o, 1.3), d));
    }
    // 2-D ball: pi r^2; 3-D: 4/3 pi r^3
    CHECK(unit_ball_volume(2) == doctest::Approx(M_PI));
    CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * M_PI / 3.0));
}

TEST_CASE("inclusion chain between straight and sheared cylinders") {
    UniformStream rng(11);
    const Point z0(0.3, -0.2, 1.0);
    for (double r : {0.25, 0.5, 1.0, 2.0}) {
        const CylinderSpec inner(z0, std::pow(2.0, -1.0 / 3.0) * r);
        const CylinderSpec sheared(z0, r, CylinderKind::Sheared);
        const CylinderSpec outer(z0, std::pow(2.0, 1.0 / 3.0) * r);
        const Extents e = outer.extents();
        int violations = 0;
        for (int k = 0; k < 100000; ++k) {
            Point z = random_point(rng, e.x_radius, e.v_radius, -e.duration, 0.0);
            z.x[0] += z0.x[0];
            z.v[0] += z0.v[0];
            z.t += z0.t;
            if (cylinder_contains(inner, z) && !cylinder_contains(sheared, z)) ++violations;
            if (cylinder_contains(sheared, z) && !cylinder_contains(outer, z)) ++violations;
        }
        CHECK(violations == 0);
    }
}

TEST_CASE("nesting for all kinds") {
    UniformStream rng(5);
    const Point z0(0.0, 0.5, 0.0);
    for (CylinderKind kind : {CylinderKind::Straight, CylinderKind::Slanted, CylinderKind::Sheared}) {
        const CylinderSpec small(z0, 0.7, kind), big(z0, 1.0, kind);
        int violations = 0;
        for (int k = 0; k < 20000; ++k) {
            Point z = random_point(rng, 3.0, 2.0, -1.5, 0.5);
            z.v[0] += 0.5;
            if (cylinder_contains(small, z) && !cylinder_contains(big, z)) ++violations;
        }
        CHECK(violations == 0);
    }
}

TEST_CASE("sheared membership is constant along free transport") {
    // z0 + Q is a plain translation, so characteristics are taken relative to the center
    // velocity: (x + h (v - v0), v, t + h). For v0 = 0 these are the free characteristics.
    UniformStream rng(3);
    for (double v0 : {0.0, 0.2}) {
        const CylinderSpec q(Point(0.1, v0, 0.0), 1.0, CylinderKind::Sheared);
        int mismatches = 0;
        for (int k = 0; k < 10000; ++k) {
            const Point z(rng.next(-2.0, 2.0), rng.next(-1.0, 1.0) + v0, rng.next(-0.9, -0.1));
            const double h = rng.next(-0.05, 0.05);
            const Point moved(z.x[0] + h * (z.v[0] - v0), z.v[0], z.t + h);
            if (cylinder_contains(q, z) != cylinder_contains(q, moved)) ++mismatches;
        }
        // Both times stay in (-1, 0]; equality cases have probability zero.
        CHECK(mismatches == 0);
    }
}

TEST_CASE("kinetic rescaling") {
    const Point o(0.0, 0.0, 0.0);
    CHECK(kinetic_rescale_point(Point(8.0, 2.0, 4.0), ScalingParams(2.0, o)) == Point(1.0, 1.0, 1.0));
    const Point z0(1.5, -2.0, 0.25);
    CHECK(kinetic_rescale_point(z0, ScalingParams(0.37, z0)) == Point(0.0, 0.0, 0.0));

    UniformStream rng(17);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const Point origin(rng.next(-1, 1), rng.next(-1, 1), rng.next(-1, 1));
        const ScalingParams s(rng.next(0.1, 4.0), origin);
        const Point z(rng.next(-10, 10), rng.next(-10, 10), rng.next(-10, 10));
        const Point back = kinetic_unscale_point(kinetic_rescale_point(z, s), s);
        const double dx = back.x[0] - z.x[0], dv = back.v[0] - z.v[0], dt = back.t - z.t;
        const double norm = std::sqrt(z.x[0] * z.x[0] + z.v[0] * z.v[0] + z.t * z.t);
        worst = std::max(worst, std::sqrt(dx * dx + dv * dv + dt * dt) / norm);
    }
    CHECK(worst <= 1e-14);
}

TEST_CASE("cylinder rescale") {
    const Point o(0.0, 0.0, 0.0);
    const CylinderSpec r = cylinder_rescale(CylinderSpec(o, 2.0), ScalingParams(2.0, o));
    CHECK(r.radius == 1.0);
    CHECK(r.center == o);

    const Point z0(0.4, 0.3, 2.0);
    const CylinderSpec recentered = cylinder_rescale(CylinderSpec(z0, 1.0), ScalingParams(1.0, z0));
    CHECK(recentered.radius == 1.0);
    CHECK(recentered.center == o);

    CHECK_THROWS_AS(cylinder_rescale(CylinderSpec(z0, 1.0), ScalingParams(2.0, o)), std::invalid_argument);
    CHECK_THROWS_AS(cylinder_rescale(CylinderSpec(z0, 1.0, CylinderKind::Slanted), ScalingParams(2.0, z0)),
                    std::invalid_argument);

    // Membership commutes with the map.
    UniformStream rng(23);
    for (CylinderKind kind : {CylinderKind::Straight, CylinderKind::Sheared}) {
        const CylinderSpec q(z0, 0.8, kind);
        const ScalingParams s(0.5, z0);
        const CylinderSpec image = cylinder_rescale(q, s);
        int mismatches = 0;
        for (int k = 0; k < 10000; ++k) {
            const Point z(z0.x[0] + rng.next(-1, 1), z0.v[0] + rng.next(-1, 1), z0.t + rng.next(-1, 0.2));
            if (cylinder_contains(q, z) != cylinder_contains(image, kinetic_rescale_point(z, s))) ++mismatches;
        }
        CHECK(mismatches == 0);
    }
}

TEST_CASE("boxes") {
    const CylinderSpec box = CylinderSpec::make_box(Point(0.0, 0.0, 0.0), 2.0, 2.0, 2.0);
    CHECK(cylinder_contains(box, Point(1.9, -1.9, -1.9)));
    CHECK_FALSE(cylinder_contains(box, Point(0.0, 0.0, -2.0)));
    CHECK(cylinder_volume(box, 1) == doctest::Approx(32.0));
    const Extents half = box.with_radius(0.25).extents();
    CHECK(half.x_radius == doctest::Approx(0.5));
    CHECK(half.duration == doctest::Approx(0.5));
}

TEST_CASE("two-dimensional points use Euclidean balls") {
    const CylinderSpec q(Point({0.0, 0.0}, {0.0, 0.0}, 0.0), 1.0);
    CHECK(cylinder_contains(q, Point({0.6, 0.6}, {0.1, 0.1}, -0.1)));
    CHECK_FALSE(cylinder_contains(q, Point({0.75, 0.75}, {0.1, 0.1}, -0.1)));
    CHECK_THROWS(Point({0.0}, {0.0, 1.0}, 0.0));
}
