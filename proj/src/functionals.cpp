#include "kinreg/functionals.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>

#include "kinreg/numeric.hpp"

namespace kinreg {

namespace {

double wrap_displacement(double d, double lx) {
    d = std::fmod(d, lx);
    if (d >= 0.5 * lx) d -= lx;
    if (d < -0.5 * lx) d += lx;
    return d;
}

void require_d1(const CylinderSpec& cyl) {
    if (cyl.center.dim() != 1) throw std::invalid_argument("grid functionals support d = 1 only");
}

// Power sum of one level of the nested norm. For p = inf the "sum" is a max.
struct Level {
    double p;
    std::vector<double> terms;
    double max = 0.0;
    bool any = false;

    void add(double x) {
        any = true;
        if (std::isinf(p))
            max = std::max(max, x);
        else
            terms.push_back(x);
    }
    // Returns sum * weight (finite p) or the max.
    double reduce(double weight) {
        if (std::isinf(p)) return max;
        return pairwise_sum(terms) * weight;
    }
    void clear() {
        terms.clear();
        max = 0.0;
        any = false;
    }
};

// Value that a child level with exponent p_child contributes to a parent with exponent p_parent,
// given the child's reduced power sum (or max).
double lift(double reduced, double p_child, double p_parent) {
    if (std::isinf(p_child)) return std::isinf(p_parent) ? reduced : std::pow(reduced, p_parent);
    if (p_child == p_parent) return reduced;
    const double norm = std::pow(reduced, 1.0 / p_child);
    return std::isinf(p_parent) ? norm : std::pow(norm, p_parent);
}

double power_term(double value, double p) {
    const double a = std::abs(value);
    if (std::isinf(p)) return a;
    if (p == 1.0) return a;
    if (p == 2.0) return a * a;
    return std::pow(a, p);
}

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

double cutoff_normalization() {
    static const double c = [] {
        constexpr int n = 40000;
        const double h = 4.0 / n;
        std::vector<double> vals;
        vals.reserve(n + 1);
        for (int k = 0; k <= n; ++k) vals.push_back(cutoff_profile(-2.0 + k * h));
        // The integrand vanishes with all derivatives at both ends: the trapezoid rule is spectral.
        const double integral = pairwise_sum(vals) * h;
        return integral * integral;
    }();
    return c;
}

std::size_t for_each_cell(const GridSpec& grid, const CylinderSpec& cyl,
                          const std::function<void(int, int, int)>& fn) {
    require_d1(cyl);
    const Extents e = cyl.extents();
    const double x0 = cyl.center.x[0], v0 = cyl.center.v[0], t0 = cyl.center.t;
    const double dx = grid.dx(), dv = grid.dv(), dt = grid.dt();

    const int n_lo = std::max(0, static_cast<int>(std::floor((t0 - e.duration - grid.t_start) / dt - 0.5)) - 1);
    const int n_hi = std::min(grid.nt - 1, static_cast<int>(std::ceil((t0 - grid.t_start) / dt - 0.5)) + 1);
    const int j_lo = std::max(0, static_cast<int>(std::floor((v0 - e.v_radius + grid.v_max) / dv - 0.5)) - 1);
    const int j_hi = std::min(grid.nv - 1, static_cast<int>(std::ceil((v0 + e.v_radius + grid.v_max) / dv - 0.5)) + 1);

    std::size_t count = 0;
    std::vector<int> xs;
    for (int n = n_lo; n <= n_hi; ++n) {
        const double t = grid.t(n);
        if (!(t - t0 > -e.duration && t - t0 <= 0.0)) continue;

        double xc = x0, half = e.x_radius;
        if (cyl.kind == CylinderKind::Slanted) xc += (t - t0) * v0;
        if (cyl.kind == CylinderKind::Sheared) half += std::abs(t - t0) * e.v_radius;

        xs.clear();
        if (2.0 * half + 2.0 * dx >= grid.lx) {
            for (int i = 0; i < grid.nx; ++i) xs.push_back(i);
        } else {
            const int i_lo = static_cast<int>(std::floor((xc - half) / dx - 0.5)) - 1;
            const int i_hi = static_cast<int>(std::ceil((xc + half) / dx - 0.5)) + 1;
            for (int i = i_lo; i <= i_hi; ++i) xs.push_back(((i % grid.nx) + grid.nx) % grid.nx);
            std::sort(xs.begin(), xs.end());
            xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        }

        for (int i : xs) {
            for (int j = j_lo; j <= j_hi; ++j) {
                const double v = grid.v(j);
                double row_center = x0;
                if (cyl.kind == CylinderKind::Slanted) row_center += (t - t0) * v0;
                if (cyl.kind == CylinderKind::Sheared) row_center += (t - t0) * (v - v0);
                const double x = row_center + wrap_displacement(grid.x(i) - row_center, grid.lx);
                if (cylinder_contains(cyl, std::span<const double>(&x, 1), std::span<const double>(&v, 1), t)) {
                    fn(n, i, j);
                    ++count;
                }
            }
        }
    }
    return count;
}

std::size_t cell_count(const GridSpec& grid, const CylinderSpec& cyl) {
    return for_each_cell(grid, cyl, [](int, int, int) {});
}

double rasterized_volume(const GridSpec& grid, const CylinderSpec& cyl) {
    return static_cast<double>(cell_count(grid, cyl)) * grid.cell_volume();
}

double mixed_norm(const GridField& f, const CylinderSpec& cyl, const MixedNormSpec& spec) {
    for (double p : {spec.p_t, spec.p_x, spec.p_v})
        if (!(p >= 1.0)) throw std::invalid_argument("norm exponents must be >= 1");
    const GridSpec& g = f.grid;

    Level lv{spec.p_v, {}}, lx{spec.p_x, {}}, lt{spec.p_t, {}};
    int cur_n = -1, cur_i = -1;
    auto close_x = [&] {
        if (lv.any) lx.add(lift(lv.reduce(g.dv()), spec.p_v, spec.p_x));
        lv.clear();
    };
    auto close_t = [&] {
        close_x();
        if (lx.any) lt.add(lift(lx.reduce(g.dx()), spec.p_x, spec.p_t));
        lx.clear();
    };
    const std::size_t count = for_each_cell(g, cyl, [&](int n, int i, int j) {
        if (n != cur_n) {
            close_t();
            cur_n = n;
            cur_i = i;
        } else if (i != cur_i) {
            close_x();
            cur_i = i;
        }
        lv.add(power_term(f.at(n, i, j), spec.p_v));
    });
    if (count == 0) throw EmptyRegionError("cylinder does not intersect the grid");
    close_t();
    const double total = lt.reduce(g.dt());
    return std::isinf(spec.p_t) ? total : std::pow(total, 1.0 / spec.p_t);
}

double lp_norm(const GridField& f, const CylinderSpec& cyl, double p) { return mixed_norm(f, cyl, {p, p, p}); }

double max_over(const GridField& f, const CylinderSpec& cyl) {
    double m = -kInf;
    if (for_each_cell(f.grid, cyl, [&](int n, int i, int j) { m = std::max(m, f.at(n, i, j)); }) == 0)
        throw EmptyRegionError("cylinder does not intersect the grid");
    return m;
}

double min_over(const GridField& f, const CylinderSpec& cyl) {
    double m = kInf;
    if (for_each_cell(f.grid, cyl, [&](int n, int i, int j) { m = std::min(m, f.at(n, i, j)); }) == 0)
        throw EmptyRegionError("cylinder does not intersect the grid");
    return m;
}

double mean_over(const GridField& f, const CylinderSpec& cyl) {
    std::vector<double> vals;
    for_each_cell(f.grid, cyl, [&](int n, int i, int j) { vals.push_back(f.at(n, i, j)); });
    if (vals.empty()) throw EmptyRegionError("cylinder does not intersect the grid");
    return pairwise_sum(vals) / static_cast<double>(vals.size());
}

GridField grad_v(const GridField& f) {
    const GridSpec& g = f.grid;
    if (g.nv < 3) throw std::invalid_argument("grad_v needs at least 3 velocity cells");
    GridField out(g, 0.0, f.role);
    const double inv2h = 1.0 / (2.0 * g.dv());
    const int nv = g.nv;
    for (int n = 0; n < g.nt; ++n) {
        for (int i = 0; i < g.nx; ++i) {
            const double* a = &f.values[g.index(n, i, 0)];
            double* o = &out.values[g.index(n, i, 0)];
            o[0] = (-3.0 * a[0] + 4.0 * a[1] - a[2]) * inv2h;
            for (int j = 1; j + 1 < nv; ++j) o[j] = (a[j + 1] - a[j - 1]) * inv2h;
            o[nv - 1] = (3.0 * a[nv - 1] - 4.0 * a[nv - 2] + a[nv - 3]) * inv2h;
        }
    }
    return out;
}

double cutoff_chi(const CutoffSpec& spec, const Point& z) {
    const Point& c = spec.center;
    if (z.dim() != c.dim()) throw std::invalid_argument("cutoff: dimension mismatch");
    const double r = spec.R;
    double xa = 0.0, va = 0.0;
    for (std::size_t k = 0; k < z.dim(); ++k) {
        const double dv = z.v[k] - c.v[k];
        double dx = z.x[k] - c.x[k];
        if (spec.kind == CutoffKind::Sheared) dx -= (z.t - c.t) * dv;
        xa += dx * dx;
        va += dv * dv;
    }
    return cutoff_profile(std::sqrt(xa) / (r * r * r)) * cutoff_profile(std::sqrt(va) / r);
}

double cutoff_chi_periodic(const CutoffSpec& spec, double x, double v, double t, double lx) {
    const Point& c = spec.center;
    const double r = spec.R;
    const double dv = v - c.v[0];
    double dx = x - c.x[0];
    if (spec.kind == CutoffKind::Sheared) dx -= (t - c.t) * dv;
    dx = wrap_displacement(dx, lx);
    return cutoff_profile(dx / (r * r * r)) * cutoff_profile(dv / r);
}

GridField frac_deriv_x(const GridField& f, double s, const std::optional<CutoffSpec>& window) {
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("fractional order must lie in (0, 1)");
    const GridSpec& g = f.grid;
    if (window) {
        if (window->center.dim() != 1) throw std::invalid_argument("window must be d = 1");
        const double r = window->R;
        if (4.0 * r * r * r > 0.5 * g.lx)
            throw std::invalid_argument("window support exceeds half the period");
    }
    const int nx = g.nx, nv = g.nv, nk = nx / 2 + 1;

    struct FftwFree {
        void operator()(void* p) const { fftw_free(p); }
    };
    std::unique_ptr<double, FftwFree> line(static_cast<double*>(fftw_malloc(sizeof(double) * nx)));
    std::unique_ptr<fftw_complex, FftwFree> spec(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * nk)));
    fftw_plan fwd, bwd;
    {
        // FFTW_ESTIMATE keeps the plan (and hence the rounding) independent of timing.
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fwd = fftw_plan_dft_r2c_1d(nx, line.get(), spec.get(), FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_1d(nx, spec.get(), line.get(), FFTW_ESTIMATE);
    }

    std::vector<double> mult(static_cast<std::size_t>(nk));
    for (int k = 0; k < nk; ++k)
        mult[static_cast<std::size_t>(k)] = std::pow(2.0 * std::numbers::pi * k / g.lx, s) / nx;

    GridField out(g, 0.0, f.role);
    for (int n = 0; n < g.nt; ++n) {
        const double t = g.t(n);
        for (int j = 0; j < nv; ++j) {
            const double v = g.v(j);
            for (int i = 0; i < nx; ++i) {
                double w = 1.0;
                if (window) w = cutoff_chi_periodic(*window, g.x(i), v, t, g.lx);
                line.get()[i] = w * f.at(n, i, j);
            }
            fftw_execute(fwd);
            for (int k = 0; k < nk; ++k) {
                spec.get()[k][0] *= mult[static_cast<std::size_t>(k)];
                spec.get()[k][1] *= mult[static_cast<std::size_t>(k)];
            }
            fftw_execute(bwd);
            for (int i = 0; i < nx; ++i) out.at(n, i, j) = line.get()[i];
        }
    }
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
    }
    return out;
}

int slice_at(const GridSpec& grid, double t) {
    if (!(t >= grid.t_start && t <= grid.t_end)) throw std::invalid_argument("time outside the grid range");
    const int n = static_cast<int>(std::floor((t - grid.t_start) / grid.dt()));
    return std::clamp(n, 0, grid.nt - 1);
}

double weighted_mean(const GridField& f, const CutoffSpec& spec, double t) {
    const GridSpec& g = f.grid;
    if (spec.center.dim() != 1) throw std::invalid_argument("weighted_mean supports d = 1 only");
    const int n = slice_at(g, t);
    const double tn = g.t(n);
    std::vector<double> terms;
    terms.reserve(g.slice_size());
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.nv; ++j) {
            const double chi = cutoff_chi_periodic(spec, g.x(i), g.v(j), tn, g.lx);
            if (chi != 0.0) terms.push_back(f.at(n, i, j) * chi);
        }
    }
    const double r = spec.R;
    const double norm = cutoff_normalization() * r * r * r * r;
    return pairwise_sum(terms) * g.dx() * g.dv() / norm;
}

double oscillation(const GridField& f, const CylinderSpec& cyl) {
    double lo = kInf, hi = -kInf;
    if (for_each_cell(f.grid, cyl, [&](int n, int i, int j) {
            const double x = f.at(n, i, j);
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }) == 0)
        throw EmptyRegionError("cylinder does not intersect the grid");
    return hi - lo;
}

bool LevelSet::contains(double value) const {
    switch (kind) {
        case LevelKind::AtLeast:
            return value >= a;
        case LevelKind::AtMost:
            return value <= a;
        case LevelKind::Between:
            return value > a && value < b;
    }
    return false;
}

std::size_t level_set_count(const GridField& f, const CylinderSpec& cyl, const LevelSet& set) {
    if (set.kind == LevelKind::Between && !(set.a < set.b)) throw std::invalid_argument("band needs a < b");
    std::size_t c = 0;
    for_each_cell(f.grid, cyl, [&](int n, int i, int j) {
        if (set.contains(f.at(n, i, j))) ++c;
    });
    return c;
}

double level_set_measure(const GridField& f, const CylinderSpec& cyl, const LevelSet& set) {
    return static_cast<double>(level_set_count(f, cyl, set)) * f.grid.cell_volume();
}

}  // namespace kinreg
