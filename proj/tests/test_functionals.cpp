#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "kinreg/functionals.hpp"
#include "kinreg/numeric.hpp"
#include "kinreg/solver.hpp"

using namespace kinreg;

namespace {

// Q_1 centered at (2, 0, 1) is rasterized exactly by this grid: 20 x 20 x 10 cells.
GridSpec aligned_grid() { return GridSpec{40, 40, 20, 4.0, 2.0, 0.0, 2.0}; }
Point aligned_center() { return Point(2.0, 0.0, 1.0); }

GridField sample(const GridSpec& g, const std::function<double(double, double, double)>& fn) {
    GridField f(g);
    for (int n = 0; n < g.nt; ++n)
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.nv; ++j) f.at(n, i, j) = fn(g.x(i), g.v(j), g.t(n));
    return f;
}

GridField wavy(const GridSpec& g) {
    return sample(g, [&](double x, double v, double t) {
        return std::sin(2 * std::numbers::pi * x / g.lx) * std::cos(v) + 0.3 * t * v + 0.1;
    });
}

}  // namespace

TEST_CASE("Lp norm of a constant on an aligned cylinder") {
    const GridField f(aligned_grid(), 2.0);
    const CylinderSpec q(aligned_center(), 1.0);
    CHECK(cell_count(f.grid, q) == 4000);
    CHECK(rasterized_volume(f.grid, q) == doctest::Approx(cylinder_volume(q, 1)).epsilon(1e-13));
    CHECK(lp_norm(f, q, 2.0) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(lp_norm(f, q, kInf) == 2.0);
    CHECK(lp_norm(f, q, 2.0) == mixed_norm(f, q, {2, 2, 2}));
}

TEST_CASE("p = infinity is the max over rasterized cells") {
    const GridField f = wavy(aligned_grid());
    const CylinderSpec q(aligned_center(), 1.0, CylinderKind::Sheared);
    double m = 0.0;
    for_each_cell(f.grid, q, [&](int n, int i, int j) { m = std::max(m, std::abs(f.at(n, i, j))); });
    CHECK(lp_norm(f, q, kInf) == m);
}

TEST_CASE("mixed norms: constants, Hoelder and separable products") {
    const GridSpec g = aligned_grid();
    const CylinderSpec q(aligned_center(), 1.0);
    const GridField c(g, -3.0);
    // |c| (2)^{1/pv} (2)^{1/px} (1)^{1/pt}
    CHECK(mixed_norm(c, q, {2, 6, 1}) == doctest::Approx(3.0 * std::pow(2.0, 1.0) * std::pow(2.0, 1.0 / 6)).epsilon(1e-13));
    CHECK(mixed_norm(c, q, {kInf, 2, 3}) == doctest::Approx(3.0 * std::pow(2.0, 1.0 / 3 + 0.5)).epsilon(1e-13));

    const GridField f = wavy(g);
    CHECK(mixed_norm(f, q, {kInf, 2, 2}) >= mixed_norm(f, q, {2, 2, 2}) / std::sqrt(1.0));
    const CylinderSpec q2(Point(2.0, 0.0, 2.0), 1.0);  // duration 1, inside [0, 2]
    CHECK(mixed_norm(f, q2, {kInf, 2, 2}) >= mixed_norm(f, q2, {2, 2, 2}) / std::sqrt(1.0));

    // a(t) b(x) c(v) on a straight cylinder: product of one-dimensional norms over the same cells.
    auto a = [](double t) { return 1.0 + t * t; };
    auto b = [](double x) { return std::cos(x) + 2.0; };
    auto cv = [](double v) { return v - 0.3; };
    const GridField sep = sample(g, [&](double x, double v, double t) { return a(t) * b(x) * cv(v); });
    const MixedNormSpec spec{3, 1.5, 4};
    double nt = 0, nx = 0, nv = 0;
    for (int n = 0; n < 10; ++n) nt += std::pow(a(g.t(n)), spec.p_t) * g.dt();
    for (int i = 10; i < 30; ++i) nx += std::pow(b(g.x(i)), spec.p_x) * g.dx();
    for (int j = 10; j < 30; ++j) nv += std::pow(std::abs(cv(g.v(j))), spec.p_v) * g.dv();
    const double expect = std::pow(nt, 1 / spec.p_t) * std::pow(nx, 1 / spec.p_x) * std::pow(nv, 1 / spec.p_v);
    CHECK(mixed_norm(sep, q, spec) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("norms are absolutely homogeneous and reject empty regions") {
    const GridField f = wavy(aligned_grid());
    GridField g = f;
    for (double& x : g.values) x *= -7.5;
    const CylinderSpec q(aligned_center(), 0.8, CylinderKind::Sheared);
    for (double p : {1.0, 2.0, 4.5, kInf})
        CHECK(lp_norm(g, q, p) == doctest::Approx(7.5 * lp_norm(f, q, p)).epsilon(1e-14));
    CHECK(mixed_norm(g, q, {2, 6, 1}) == doctest::Approx(7.5 * mixed_norm(f, q, {2, 6, 1})).epsilon(1e-14));
    CHECK_THROWS_AS(lp_norm(f, CylinderSpec(Point(2.0, 0.0, 50.0), 1.0), 2.0), EmptyRegionError);
    CHECK_THROWS_AS(mixed_norm(f, q, {0.5, 2, 2}), std::invalid_argument);
}

TEST_CASE("rasterization wraps periodically in x") {
    const GridSpec g = aligned_grid();
    const CylinderSpec inside(Point(2.0, 0.0, 1.0), 1.0), wrapped(Point(0.0, 0.0, 1.0), 1.0);
    CHECK(cell_count(g, inside) == cell_count(g, wrapped));
    const CylinderSpec sheared(Point(0.1, 0.5, 1.5), 1.0, CylinderKind::Sheared);
    // Brute force over every cell with minimum-image x displacement.
    std::size_t brute = 0;
    for (int n = 0; n < g.nt; ++n)
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.nv; ++j)
                for (int k = -1; k <= 1; ++k)
                    if (cylinder_contains(sheared, Point(g.x(i) + k * g.lx, g.v(j), g.t(n)))) ++brute;
    CHECK(cell_count(g, sheared) == brute);
}

TEST_CASE("velocity gradient") {
    const GridSpec g{8, 32, 3, 1.0, 2.0, 0.0, 1.0};
    const GridField lin = sample(g, [](double x, double v, double) { return 3.0 * v + x; });
    for (double d : grad_v(lin).values) CHECK(d == doctest::Approx(3.0).epsilon(1e-12));
    for (double d : grad_v(GridField(g, 4.0)).values) CHECK(d == 0.0);

    double prev = 0.0;
    for (int nv : {32, 64, 128}) {
        const GridSpec h{2, nv, 1, 1.0, 2.0, 0.0, 1.0};
        const GridField s = sample(h, [](double, double v, double) { return std::sin(v); });
        const GridField d = grad_v(s);
        double err = 0.0;
        for (int j = 0; j < nv; ++j) err = std::max(err, std::abs(d.at(0, 0, j) - std::cos(h.v(j))));
        if (prev > 0.0) CHECK(std::log2(prev / err) > 1.8);
        prev = err;
    }
    CHECK_THROWS(grad_v(GridField(GridSpec{2, 2, 1, 1.0, 1.0, 0.0, 1.0})));
}

TEST_CASE("fractional derivative: pure modes, constants and errors") {
    const GridSpec g{64, 4, 2, 3.0, 1.0, 0.0, 1.0};
    for (int m : {1, 5, 17}) {
        const double k = 2 * std::numbers::pi * m / g.lx;
        const GridField f = sample(g, [&](double x, double v, double) { return std::sin(k * x) * (1 + v); });
        const GridField d = frac_deriv_x(f, 1.0 / 3);
        double err = 0.0, scale = 0.0;
        for (int n = 0; n < g.nt; ++n)
            for (int i = 0; i < g.nx; ++i)
                for (int j = 0; j < g.nv; ++j) {
                    const double expect = std::cbrt(k) * f.at(n, i, j);
                    err = std::max(err, std::abs(d.at(n, i, j) - expect));
                    scale = std::max(scale, std::abs(expect));
                }
        CHECK(err / scale <= 1e-12);
    }
    for (double x : frac_deriv_x(GridField(g, 2.0), 1.0 / 3).values) CHECK(std::abs(x) <= 1e-14);
    CHECK_THROWS_AS(frac_deriv_x(GridField(g, 2.0), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(frac_deriv_x(GridField(g, 2.0), 0.0), std::invalid_argument);

    CutoffSpec wide{1.0, Point(1.5, 0.0, 0.5)};
    CHECK_THROWS_AS(frac_deriv_x(GridField(g, 2.0), 0.5, wide), std::invalid_argument);
}

TEST_CASE("fractional derivative satisfies Plancherel against a direct DFT") {
    const GridSpec g{48, 3, 1, 2.0, 1.0, 0.0, 1.0};
    UniformStream rng(6);
    GridField f(g);
    for (double& x : f.values) x = rng.next(-1, 1);
    const double s = 1.0 / 3;
    const GridField d = frac_deriv_x(f, s);
    for (int j = 0; j < g.nv; ++j) {
        // sum_i |D f|^2 dx = (dx / N) sum_k |xi_k|^{2s} |F_k|^2 over the symmetric spectrum.
        double spectral = 0.0;
        for (int k = 0; k < g.nx; ++k) {
            std::complex<double> c = 0.0;
            for (int i = 0; i < g.nx; ++i) c += f.at(0, i, j) * std::polar(1.0, -2 * std::numbers::pi * k * i / g.nx);
            const int kk = k <= g.nx / 2 ? k : g.nx - k;
            const double xi = 2 * std::numbers::pi * kk / g.lx;
            spectral += std::pow(xi, 2 * s) * std::norm(c);
        }
        spectral *= g.dx() / g.nx;
        double direct = 0.0;
        for (int i = 0; i < g.nx; ++i) direct += d.at(0, i, j) * d.at(0, i, j) * g.dx();
        CHECK(direct == doctest::Approx(spectral).epsilon(1e-12));
    }
}

TEST_CASE("fractional derivative is linear and commutes with translation") {
    const GridSpec g{32, 2, 1, 1.0, 1.0, 0.0, 1.0};
    UniformStream rng(2);
    GridField a(g), b(g);
    for (double& x : a.values) x = rng.next(-1, 1);
    for (double& x : b.values) x = rng.next(-1, 1);
    GridField combo(g);
    for (std::size_t k = 0; k < combo.values.size(); ++k) combo.values[k] = 2.0 * a.values[k] - 0.5 * b.values[k];
    const GridField da = frac_deriv_x(a, 0.4), db = frac_deriv_x(b, 0.4), dc = frac_deriv_x(combo, 0.4);
    for (std::size_t k = 0; k < combo.values.size(); ++k)
        CHECK(dc.values[k] == doctest::Approx(2.0 * da.values[k] - 0.5 * db.values[k]).epsilon(1e-12));

    GridField shifted(g);
    const int shift = 5;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.nv; ++j) shifted.at(0, (i + shift) % g.nx, j) = a.at(0, i, j);
    const GridField ds = frac_deriv_x(shifted, 0.4);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.nv; ++j)
            CHECK(ds.at(0, (i + shift) % g.nx, j) == doctest::Approx(da.at(0, i, j)).epsilon(1e-11));
}

TEST_CASE("cutoff values and transport invariance") {
    const CutoffSpec c{0.5, Point(1.0, 0.0, 2.0)};
    CHECK(cutoff_chi(c, c.center) == 1.0);
    CHECK(cutoff_chi(c, Point(1.0 + 3 * 0.125, 0.0, 2.0)) == 0.0);
    CHECK(cutoff_chi(c, Point(1.0, 1.0, 2.0)) == 0.0);

    // With v0 = 0 the sheared argument is constant along (x + h v, v, t + h).
    UniformStream rng(1);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const Point z(rng.next(0.5, 1.5), rng.next(-0.9, 0.9), rng.next(1.5, 2.0));
        for (double h : {1e-2, 1e-3}) {
            const Point moved(z.x[0] + h * z.v[0], z.v[0], z.t + h);
            worst = std::max(worst, std::abs(cutoff_chi(c, moved) - cutoff_chi(c, z)) / h);
        }
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("cutoff sandwich at every grid node") {
    const GridSpec g{64, 48, 16, 4.0, 3.0, 0.0, 2.0};
    const Point z0(2.0, 0.25, 1.8);
    const double R = 0.7;
    const CutoffSpec c{R, z0};
    const CylinderSpec inner(z0, R, CylinderKind::Sheared), outer(z0, 2 * R, CylinderKind::Sheared);
    int violations = 0;
    for (int n = 0; n < g.nt; ++n)
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.nv; ++j) {
                const Point z(g.x(i), g.v(j), g.t(n));
                if (z.t > z0.t || z.t <= z0.t - R * R) continue;
                const double chi = cutoff_chi(c, z);
                if (cylinder_contains(inner, z) && chi != 1.0) ++violations;
                if (!cylinder_contains(outer, z) && z.t > z0.t - 4 * R * R && chi != 0.0) ++violations;
                if (chi < 0.0 || chi > 1.0) ++violations;
            }
    CHECK(violations == 0);
}

TEST_CASE("weighted mean") {
    // The ramps of phi are steep: 1024 x 512 resolves them to ~1e-15.
    const GridSpec g{1024, 512, 4, 4.0, 3.0, 0.0, 1.0};
    const CutoffSpec c{0.9, Point(2.0, 0.1, 0.8)};
    CHECK(weighted_mean(GridField(g, 3.5), c, 0.9) == doctest::Approx(3.5).epsilon(1e-10));
    CHECK(weighted_mean(GridField(g, 3.5), c, 0.1) == doctest::Approx(3.5).epsilon(1e-10));

    // Odd about the center slice: (x - x0 - (t - t0)(v - v0)) is odd under the point reflection.
    const int n = slice_at(g, 0.8);
    const double t = g.t(n);
    const GridSpec sym{256, 128, 4, 4.0, 3.0, 0.0, 1.0};
    const CutoffSpec centered{0.9, Point(2.0, 0.0, t)};
    const GridField odd = sample(sym, [&](double x, double v, double) { return (x - 2.0) * std::cos(v) + v * v * v; });
    CHECK(std::abs(weighted_mean(odd, centered, t)) <= 1e-12);

    const GridField f = wavy(g);
    const double m = weighted_mean(f, c, 0.55);
    GridField centered_f = f;
    for (double& x : centered_f.values) x -= m;
    CHECK(std::abs(weighted_mean(centered_f, c, 0.55)) <= 1e-12);
    CHECK_THROWS(weighted_mean(f, c, 2.0));
}

TEST_CASE("oscillation") {
    const GridSpec g = aligned_grid();
    CHECK(oscillation(GridField(g, 1.5), CylinderSpec(aligned_center(), 1.0)) == 0.0);
    const GridField v = sample(g, [](double, double v, double) { return v; });
    CHECK(oscillation(v, CylinderSpec(aligned_center(), 1.0)) == doctest::Approx(2.0 - g.dv()).epsilon(1e-12));
    const GridField f = wavy(g);
    for (CylinderKind kind : {CylinderKind::Straight, CylinderKind::Sheared}) {
        double prev = 0.0;
        for (double r : {0.5, 0.7, 0.9, 1.0}) {
            const double o = oscillation(f, CylinderSpec(aligned_center(), r, kind));
            CHECK(o >= prev);
            prev = o;
        }
    }
}

TEST_CASE("level set measures") {
    const GridSpec g = aligned_grid();
    const CylinderSpec q(aligned_center(), 1.0);
    const GridField one(g, 1.0);
    CHECK(level_set_measure(one, q, {LevelKind::AtLeast, 0.5}) == doctest::Approx(4.0).epsilon(1e-13));
    CHECK(level_set_measure(one, q, {LevelKind::AtMost, 0.0}) == 0.0);

    const GridField f = wavy(g);
    const std::size_t a = level_set_count(f, q, {LevelKind::AtMost, 0.0});
    const std::size_t b = level_set_count(f, q, {LevelKind::Between, 0.0, 0.5});
    const std::size_t c = level_set_count(f, q, {LevelKind::AtLeast, 0.5});
    CHECK(a + b + c == cell_count(g, q));
    CHECK(a > 0);
    CHECK(b > 0);
    CHECK(c > 0);
    CHECK_THROWS(level_set_count(f, q, {LevelKind::Between, 0.5, 0.0}));
}

TEST_CASE("cutoff normalization") {
    // Integral of phi over [-2, 2]: 2 on the plateau plus two symmetric transition ramps.
    const double c = cutoff_normalization();
    CHECK(c > 4.0);
    CHECK(c < 16.0);
    double fine = 0.0;
    const int n = 200000;
    for (int k = 0; k < n; ++k) fine += cutoff_profile(-2.0 + (k + 0.5) * 4.0 / n) * 4.0 / n;
    CHECK(c == doctest::Approx(fine * fine).epsilon(1e-10));
}
