#include "kinreg/verification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "kinreg/coefficients.hpp"
#include "kinreg/numeric.hpp"
#include "kinreg/solver.hpp"

namespace kinreg {

namespace {

constexpr double kShearInclusion = 1.2599210498948732;  // 2^{1/3}

bool is_kinetic(CylinderKind k) { return k != CylinderKind::Box; }

void require_nonnegative(const GridField& f, const CylinderSpec& cyl, const char* what) {
    if (min_over(f, cyl) < 0.0)
        throw std::invalid_argument(std::string(what) + ": field must be nonnegative on the outer cylinder");
}

void require_signed_ok(const GridField& f, const CylinderSpec& cyl, const char* what) {
    if (f.role == FieldRole::SubSolution) require_nonnegative(f, cyl, what);
}

// Per-slice weighted means under a window. The normalization is the discrete sum of chi rather
// than c R^4, so constants are reproduced exactly even when the window is barely resolved.
std::vector<double> slice_means(const GridField& f, const CutoffSpec& window) {
    const GridSpec& g = f.grid;
    std::vector<double> m(static_cast<std::size_t>(g.nt));
    std::vector<double> num, den;
    for (int n = 0; n < g.nt; ++n) {
        num.clear();
        den.clear();
        const double t = g.t(n);
        for (int i = 0; i < g.nx; ++i) {
            for (int j = 0; j < g.nv; ++j) {
                const double chi = cutoff_chi_periodic(window, g.x(i), g.v(j), t, g.lx);
                if (chi == 0.0) continue;
                num.push_back(chi * f.at(n, i, j));
                den.push_back(chi);
            }
        }
        if (den.empty()) throw EmptyRegionError("cutoff window contains no cell center");
        m[static_cast<std::size_t>(n)] = pairwise_sum(num) / pairwise_sum(den);
    }
    return m;
}

GridField subtract_slice_means(const GridField& f, const std::vector<double>& means) {
    GridField out = f;
    const std::size_t s = f.grid.slice_size();
    for (int n = 0; n < f.grid.nt; ++n) {
        const double m = means[static_cast<std::size_t>(n)];
        for (std::size_t k = 0; k < s; ++k) out.values[s * n + k] -= m;
    }
    return out;
}

GridField abs_pow(const GridField& f, double p) {
    GridField out(f.grid, 0.0, f.role);
    for (std::size_t k = 0; k < f.values.size(); ++k) out.values[k] = std::pow(std::abs(f.values[k]), p);
    return out;
}

double wrap(double d, double lx) {
    d = std::fmod(d, lx);
    if (d >= 0.5 * lx) d -= lx;
    if (d < -0.5 * lx) d += lx;
    return d;
}

}  // namespace

EstimateReport make_report(std::string id, double lhs, double rhs_raw, const CylinderSpec& inner,
                           const CylinderSpec& outer, const GridSpec& grid, double cap, double tol) {
    EstimateReport r;
    r.estimate_id = std::move(id);
    r.lhs = lhs;
    r.rhs_raw = rhs_raw;
    r.inner = inner;
    r.outer = outer;
    r.grid = grid;
    r.cap = cap;
    r.degenerate = !(rhs_raw > 0.0);
    if (r.degenerate) {
        r.ratio = 0.0;
        r.pass = std::abs(lhs) <= tol;
    } else {
        r.ratio = lhs / rhs_raw;
        r.pass = std::isfinite(r.ratio) && r.ratio <= cap;
    }
    return r;
}

double energy_shape(double r0, double r1) {
    if (!(r0 > r1 && r1 > 0.0)) throw std::invalid_argument("energy_shape needs R0 > R1 > 0");
    return 1.0 / (r0 * r0 - r1 * r1) + r0 / (r0 * r0 * r0 - r1 * r1 * r1) + 1.0 / ((r0 - r1) * (r0 - r1));
}

void require_nested(const CylinderSpec& inner, const CylinderSpec& outer) {
    if (!(inner.center == outer.center)) throw std::invalid_argument("cylinders must share their center");
    if (inner.kind == outer.kind) {
        const Extents a = inner.extents(), b = outer.extents();
        if (!(a.x_radius < b.x_radius && a.v_radius < b.v_radius && a.duration < b.duration))
            throw std::invalid_argument("inner cylinder must be strictly smaller than the outer one");
        return;
    }
    const bool mixed = (inner.kind == CylinderKind::Sheared && outer.kind == CylinderKind::Straight) ||
                       (inner.kind == CylinderKind::Straight && outer.kind == CylinderKind::Sheared);
    if (!mixed) throw std::invalid_argument("unsupported cylinder pair");
    // Q_{2^{-1/3} R} in QQ_R in Q_{2^{1/3} R}.
    if (!(kShearInclusion * inner.radius < outer.radius))
        throw std::invalid_argument("inner cylinder is not contained in the outer one");
}

std::vector<EstimateReport> verify_energy(const GridField& f, const CylinderSpec& q1, const CylinderSpec& q0,
                                          double q_v, const Caps& caps) {
    require_nested(q1, q0);
    if (!is_kinetic(q0.kind)) throw std::invalid_argument("energy estimate needs kinetic cylinders");
    if (!(q_v >= 2.0)) throw std::invalid_argument("velocity exponent must be >= 2");
    require_signed_ok(f, q0, "energy");
    const double shape = energy_shape(q0.radius, q1.radius);
    const double rhs = std::pow(lp_norm(f, q0, 2.0), 2.0);
    const double grad = std::pow(lp_norm(grad_v(f), q1, 2.0), 2.0);
    const double lqv = std::pow(mixed_norm(f, q1, {2.0, 2.0, q_v}), 2.0);
    const double linf = std::pow(mixed_norm(f, q1, {kInf, 2.0, 2.0}), 2.0);
    return {make_report("energy_grad", grad, rhs, q1, q0, f.grid, caps.energy_grad * shape),
            make_report("energy_lqv", lqv, rhs, q1, q0, f.grid, caps.energy_lqv * shape),
            make_report("energy_linf", linf, rhs, q1, q0, f.grid, caps.energy_linf * shape)};
}

std::vector<EstimateReport> verify_averaging_gain(const GridField& f, const CylinderSpec& q1, const CylinderSpec& q0,
                                                  double q, const Caps& caps) {
    if (f.role == FieldRole::SubSolution)
        throw std::invalid_argument("averaging gain needs a solution, not a sub-solution");
    if (!(q > 1.0 && q <= 2.0)) throw std::invalid_argument("averaging exponent must lie in (1, 2]");
    require_nested(q1, q0);
    const Point& z = q0.center;

    const CutoffSpec straight{std::min(q1.radius, 0.5 * q0.radius), z, CutoffKind::Straight};
    const GridField centered_l2 = subtract_slice_means(f, slice_means(f, straight));
    const GridField d_l2 = frac_deriv_x(centered_l2, 1.0 / 3.0, straight);
    const double lhs_l2 = lp_norm(d_l2, q1, 2.0);
    const double rhs_l2 = lp_norm(f, q0, 2.0);

    const CylinderSpec sheared_q1(z, q1.radius, CylinderKind::Sheared);
    require_nested(sheared_q1, q0);
    const CutoffSpec sheared{q1.radius, z, CutoffKind::Sheared};
    const GridField centered_lq = subtract_slice_means(f, slice_means(f, sheared));
    const GridField d_lq = frac_deriv_x(centered_lq, 1.0 / 3.0, sheared);
    const double lhs_lq = lp_norm(d_lq, sheared_q1, q);
    const double rhs_lq = lp_norm(grad_v(f), q0, q);

    return {make_report("averaging_l2", lhs_l2, rhs_l2, q1, q0, f.grid, caps.averaging_l2),
            make_report("averaging_lq", lhs_lq, rhs_lq, sheared_q1, q0, f.grid, caps.averaging_lq)};
}

double mixed_gain_exponent(int d) {
    if (d < 1) throw std::invalid_argument("dimension must be >= 1");
    return 6.0 * d / (3.0 * d - 2.0);
}

EstimateReport verify_mixed_gain(const GridField& f, const CylinderSpec& q1, const CylinderSpec& q0,
                                 const Caps& caps) {
    require_nested(q1, q0);
    require_signed_ok(f, q0, "mixed gain");
    const double p = mixed_gain_exponent(static_cast<int>(q0.center.dim()));
    const double lhs = mixed_norm(f, q1, {2.0, p, 1.0});
    const double rhs = lp_norm(f, q0, 2.0);
    return make_report("mixed_gain", lhs, rhs, q1, q0, f.grid, caps.mixed_gain);
}

EstimateReport verify_integrability_gain(const GridField& f, const CylinderSpec& q1, const CylinderSpec& q0, double q,
                                         const Caps& caps) {
    if (!(q > 2.0)) throw std::invalid_argument("integrability exponent must exceed 2");
    require_nested(q1, q0);
    require_nonnegative(f, q0, "integrability gain");
    return make_report("integrability_gain", lp_norm(f, q1, q), lp_norm(f, q0, 2.0), q1, q0, f.grid,
                       caps.integrability_gain);
}

EstimateReport verify_sup_bound(const GridField& f, const CylinderSpec& q0, const CylinderSpec& q_inf,
                                const Caps& caps) {
    require_nested(q_inf, q0);
    require_nonnegative(f, q0, "sup bound");
    return make_report("sup_bound", max_over(f, q_inf), lp_norm(f, q0, 2.0), q_inf, q0, f.grid, caps.sup_bound);
}

double moser_a(double r0, double r_inf) {
    if (!(r0 > r_inf && r_inf > 0.0)) throw std::invalid_argument("Moser radii need R0 > R_inf > 0");
    return (std::numbers::pi * std::numbers::pi / 6.0) / (r0 - r_inf);
}

double moser_b(double a, double r_inf) { return 5.0 * a / (6.0 * r_inf); }

double moser_c(int n, double a, double b, double kappa, double c_bar) {
    if (n < 1) return 0.0;
    const double nn = static_cast<double>(n);
    return c_bar * std::pow(a * a * nn * nn * nn * nn + b * nn * nn, kappa);
}

double moser_radius(int n, double r0, double a) {
    std::vector<double> terms;
    for (int k = 1; k <= n; ++k) terms.push_back(1.0 / (a * static_cast<double>(k) * k));
    return r0 - pairwise_sum(terms);
}

double moser_log_product(int n, double a, double b, double kappa, double c_bar) {
    std::vector<double> terms;
    for (int k = 1; k <= n; ++k) terms.push_back(std::log(moser_c(k, a, b, kappa, c_bar)) / (2.0 * std::pow(kappa, k)));
    return pairwise_sum(terms);
}

GridField moser_normalize(const GridField& f, const CylinderSpec& q0) {
    require_nonnegative(f, q0, "Moser iteration");
    const double m = max_over(f, q0);
    if (!(m > 0.0)) throw std::invalid_argument("Moser iteration: field vanishes on Q0");
    GridField g = f;
    for (double& x : g.values) x /= 2.0 * m;
    return g;
}

MoserTrace moser_iterate(const GridField& f, const CylinderSpec& q0, double r_inf, double kappa, int n_max,
                         double c_bar) {
    if (!(kappa > 1.0)) throw std::invalid_argument("kappa must exceed 1");
    if (n_max < 0) throw std::invalid_argument("n_max must be nonnegative");
    MoserTrace tr;
    tr.kappa = kappa;
    tr.r0 = q0.radius;
    tr.r_inf = r_inf;
    tr.c_bar = c_bar;
    tr.grid = f.grid;
    tr.a = moser_a(q0.radius, r_inf);
    tr.b = moser_b(tr.a, r_inf);
    require_nonnegative(f, q0, "Moser iteration");
    tr.normalization = max_over(f, q0);
    if (!(tr.normalization > 0.0)) {
        // f = 0 on Q0: the sup bound holds with both sides zero.
        tr.stop_reason = "field vanishes on Q0";
        return tr;
    }
    const GridField g = moser_normalize(f, q0);

    constexpr double kMaxLog = 700.0;
    tr.stop_reason = "n_max reached";
    for (int n = 0; n <= n_max; ++n) {
        MoserLevel lvl;
        lvl.n = n;
        lvl.q = 2.0 * std::pow(kappa, n);
        lvl.radius = moser_radius(n, q0.radius, tr.a);
        // The squared norm sums g^{2q}; stop before its largest term leaves the normal range.
        const double peak = max_over(g, q0.with_radius(lvl.radius));
        if (2.0 * lvl.q * std::log(1.0 / peak) > kMaxLog) {
            tr.stop_reason = "q_n exceeds floating-point range";
            break;
        }
        GridField gq(g.grid, 0.0, FieldRole::SubSolution);
        for (std::size_t k = 0; k < g.values.size(); ++k) gq.values[k] = std::pow(g.values[k], lvl.q);
        lvl.norm = lp_norm(gq, q0.with_radius(lvl.radius), 2.0);
        if (!(lvl.norm > 0.0)) {
            tr.stop_reason = "level norm underflow";
            break;
        }
        lvl.c_n = moser_c(n, tr.a, tr.b, kappa, c_bar);
        lvl.partial_product = std::exp(moser_log_product(n, tr.a, tr.b, kappa, c_bar));
        if (n > 0) {
            const double prev = tr.levels.back().norm;
            lvl.empirical_constant = lvl.norm * lvl.norm / std::pow(prev, 2.0 * kappa);
        }
        tr.levels.push_back(lvl);
    }
    if (tr.levels.empty()) throw std::runtime_error("Moser iteration produced no levels");

    const double l4 = lp_norm(f, q0, 4.0);
    tr.predicted_sup = std::exp(moser_log_product(200, tr.a, tr.b, kappa, c_bar)) * l4;
    const MoserLevel& last = tr.levels.back();
    tr.last_level_norm = 2.0 * tr.normalization * std::pow(last.norm, 1.0 / last.q);
    tr.actual_sup = max_over(f, q0.with_radius(r_inf));
    return tr;
}

double gamma_d(int d, double q) {
    return (4.0 * d + 2.0) * (1.0 / (2.0 * q) - 0.25) + 1.5 * q - 1.0;
}

GradL2EpsResult verify_grad_l2eps(const GridField& f, const CylinderSpec& q2, const CylinderSpec& q1, double eps,
                                  double q_low, double theta0, const Caps& caps) {
    if (f.role == FieldRole::SubSolution) throw std::invalid_argument("gradient gain needs a solution");
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (!(q_low >= 1.0 && q_low < 2.0)) throw std::invalid_argument("q_low must lie in [1, 2)");
    require_nested(q2, q1);
    if (q1.kind != CylinderKind::Straight) throw std::invalid_argument("gradient gain uses straight cylinders");
    const GridSpec& grid = f.grid;
    const GridField dv = grad_v(f);

    const double p = 2.0 + eps;
    const double lhs = std::pow(lp_norm(dv, q2, p), p);
    const double rhs = std::pow(lp_norm(dv, q1, 2.0), p);

    GradL2EpsResult out;
    out.report = make_report("grad_l2eps", lhs, rhs, q2, q1, grid, caps.grad_l2eps);

    GehringScan& scan = out.scan;
    scan.q = 2.0 / q_low;
    scan.theta0 = theta0;
    scan.gamma = gamma_d(1, scan.q);
    const GridField g = abs_pow(dv, q_low);
    const GridField gq = abs_pow(g, scan.q);

    // Lattice of centers z (at cell centers) with Q_8R(z) inside Q1.
    const double x1 = q1.center.x[0], v1 = q1.center.v[0], t1 = q1.center.t, r1 = q1.radius;
    constexpr int kPerAxis = 5;
    for (double R : {r1 / 12.0, r1 / 10.0}) {
        const double big = 8.0 * R;
        const double ax = r1 * r1 * r1 - big * big * big, av = r1 - big;
        const double t_lo = t1 - r1 * r1 + big * big;
        for (int a = 0; a < kPerAxis; ++a) {
            for (int b = 0; b < kPerAxis; ++b) {
                for (int c = 0; c < kPerAxis; ++c) {
                    const double fx = -1.0 + 2.0 * (a + 0.5) / kPerAxis;
                    const double fv = -1.0 + 2.0 * (b + 0.5) / kPerAxis;
                    const double ft = (c + 0.5) / kPerAxis;
                    const double xr = x1 + fx * ax, vr = v1 + fv * av, tr = t_lo + ft * (t1 - t_lo);
                    const int i = ((static_cast<int>(std::lround(xr / grid.dx() - 0.5)) % grid.nx) + grid.nx) % grid.nx;
                    const int j = std::clamp(static_cast<int>(std::lround((vr + grid.v_max) / grid.dv() - 0.5)), 0,
                                             grid.nv - 1);
                    if (!(tr >= grid.t_start && tr <= grid.t_end)) continue;
                    const int n = slice_at(grid, tr);
                    const double x = x1 + wrap(grid.x(i) - x1, grid.lx), v = grid.v(j), t = grid.t(n);
                    if (!(std::abs(x - x1) + big * big * big < r1 * r1 * r1 && std::abs(v - v1) + big < r1 &&
                          t - big * big >= t1 - r1 * r1 && t <= t1))
                        continue;
                    const Point z(x, v, t);
                    const CylinderSpec small(z, R), large(z, big);
                    GehringSample s;
                    s.center = z;
                    s.radius = R;
                    s.mean_gq_small = mean_over(gq, small);
                    s.mean_g_big_pow = std::pow(mean_over(g, large), scan.q);
                    s.mean_gq_big = mean_over(gq, large);
                    if (!(s.mean_g_big_pow > 0.0 && s.mean_gq_big > 0.0)) continue;
                    scan.samples.push_back(s);
                }
            }
        }
    }
    if (scan.samples.empty()) throw std::invalid_argument("no Gehring cylinder fits inside Q1 on this grid");

    std::vector<double> ratios;
    for (const auto& s : scan.samples) ratios.push_back(s.mean_gq_small / s.mean_g_big_pow);
    std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2, ratios.end());
    scan.b_ref = ratios[ratios.size() / 2];
    std::size_t below = 0;
    for (auto& s : scan.samples) {
        s.theta = std::max(0.0, (s.mean_gq_small - scan.b_ref * s.mean_g_big_pow) / s.mean_gq_big);
        scan.max_theta = std::max(scan.max_theta, s.theta);
        if (s.theta < theta0) ++below;
    }
    scan.fraction_below = static_cast<double>(below) / static_cast<double>(scan.samples.size());
    return out;
}

std::vector<EstimateReport> verify_weighted_mean(const GridField& f, const Point& z0, double R, const Caps& caps) {
    if (!(R > 0.0)) throw std::invalid_argument("radius must be positive");
    if (z0.dim() != 1) throw std::invalid_argument("weighted mean estimates support d = 1 only");
    const GridSpec& g = f.grid;
    const double r3 = 3.0 * R;
    if (!(std::abs(z0.v[0]) + r3 <= g.v_max && z0.t - r3 * r3 >= g.t_start && z0.t <= g.t_end &&
          54.0 * R * R * R <= g.lx))
        throw std::invalid_argument("QQ_3R(z0) does not fit inside the grid");

    const CylinderSpec qr(z0, R, CylinderKind::Sheared);
    const CylinderSpec q2r = qr.with_radius(2.0 * R);
    const CylinderSpec q3r = qr.with_radius(3.0 * R);
    const GridField dv = grad_v(f);

    // Cacciopoli with the mean of chi_{2R}: cutoff radius R covers QQ_2R.
    const std::vector<double> mean_2r = slice_means(f, CutoffSpec{R, z0, CutoffKind::Sheared});
    const GridField centered_2r = subtract_slice_means(f, mean_2r);
    const double caccio_lhs = std::pow(lp_norm(dv, qr, 2.0), 2.0);
    const double caccio_rhs = std::pow(lp_norm(centered_2r, q2r, 2.0), 2.0) / (R * R);

    // Poincare: per slice, the mean of chi_R (cutoff radius R/2) against QQ_R^t.
    const std::vector<double> mean_r = slice_means(f, CutoffSpec{0.5 * R, z0, CutoffKind::Sheared});
    std::vector<std::vector<double>> per_slice(static_cast<std::size_t>(g.nt));
    for_each_cell(g, qr, [&](int n, int i, int j) {
        const double d = f.at(n, i, j) - mean_r[static_cast<std::size_t>(n)];
        per_slice[static_cast<std::size_t>(n)].push_back(d * d);
    });
    double poincare_lhs = 0.0;
    for (const auto& terms : per_slice)
        if (!terms.empty()) poincare_lhs = std::max(poincare_lhs, pairwise_sum(terms) * g.dx() * g.dv());
    const double poincare_rhs = std::pow(lp_norm(dv, q3r, 2.0), 2.0);

    return {make_report("caccio_mean", caccio_lhs, caccio_rhs, qr, q2r, g, caps.caccio_mean),
            make_report("poincare", poincare_lhs, poincare_rhs, qr, q3r, g, caps.poincare)};
}

HolderEstimate estimate_holder(const GridField& f, const Point& z0, std::span<const double> scales,
                               double noise_floor) {
    if (scales.size() < 3) throw std::invalid_argument("Hoelder fit needs at least 3 scales");
    if (!std::is_sorted(scales.begin(), scales.end()) ||
        std::adjacent_find(scales.begin(), scales.end()) != scales.end())
        throw std::invalid_argument("scales must be strictly increasing");
    const GridSpec& g = f.grid;
    const double r = scales.front();
    if (!(r > 0.0)) throw std::invalid_argument("scales must be positive");
    if (2.0 * r * r * r < 8.0 * g.dx() || 2.0 * r < 8.0 * g.dv() || r * r < 8.0 * g.dt())
        throw std::invalid_argument("smallest scale is under-resolved (fewer than 8 cells per axis)");

    HolderEstimate h;
    h.scales.assign(scales.begin(), scales.end());
    h.noise_floor = noise_floor;
    for (double s : scales) h.oscillations.push_back(oscillation(f, CylinderSpec(z0, s)));
    const double top = h.oscillations.back();
    if (!(top > 0.0)) {
        h.degenerate = true;
        h.alpha_hat = kInf;
        h.lambda_hat = kNaN;
        for (double& o : h.oscillations) o = 0.0;
        return h;
    }
    for (double& o : h.oscillations) o /= top;

    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < h.scales.size(); ++k) {
        if (h.oscillations[k] > noise_floor) {
            lx.push_back(std::log(h.scales[k]));
            ly.push_back(std::log(h.oscillations[k]));
        }
    }
    if (lx.size() < 2) {
        h.degenerate = true;
        h.alpha_hat = kInf;
        h.lambda_hat = kNaN;
        return h;
    }
    h.alpha_hat = ls_slope(lx, ly);

    double worst = -kInf;
    for (std::size_t k = 0; k < h.scales.size(); ++k) {
        for (std::size_t m = k + 1; m < h.scales.size(); ++m) {
            if (std::abs(h.scales[m] - 2.0 * h.scales[k]) > 1e-12 * h.scales[m]) continue;
            if (!(h.oscillations[k] > noise_floor)) continue;
            worst = std::max(worst, h.oscillations[k] / h.oscillations[m]);
        }
    }
    h.lambda_hat = std::isfinite(worst) ? 2.0 * (1.0 - worst) : kNaN;
    return h;
}

double oracle_noise_floor(const GridSpec& grid) {
    grid.validate();
    const double V = grid.v_max;
    Gaussian2 g0;
    g0.mean_x = 0.5 * grid.lx;
    g0.mean_v = 0.0;
    g0.cov_xx = std::pow(grid.lx / 16.0, 2.0);
    g0.cov_xv = 0.0;
    g0.cov_vv = std::pow(V / 10.0, 2.0);
    const std::vector<double> init =
        sample_slice(grid, [&](double x, double v) { return periodic_density(g0, x, v, grid.lx); });
    const CoefficientField a1 = CoefficientField::generate(CoefficientKind::Constant, 1.0, 1.0, 0);
    const GridField sol = solve(init, a1, grid);

    // Compare at the last slice whose velocity spread stays well clear of the zero-flux walls.
    int n_eval = 0;
    for (int n = 0; n < grid.nt; ++n)
        if (std::sqrt(g0.cov_vv + 2.0 * (grid.t(n) - grid.t_start)) <= V / 5.0) n_eval = n;
    const Gaussian2 ex = evolve_gaussian(g0, grid.t(n_eval) - grid.t_start);
    double err = 0.0, peak = 0.0;
    for (int i = 0; i < grid.nx; ++i) {
        for (int j = 0; j < grid.nv; ++j) {
            const double e = periodic_density(ex, grid.x(i), grid.v(j), grid.lx);
            peak = std::max(peak, std::abs(e));
            err = std::max(err, std::abs(sol.at(n_eval, i, j) - e));
        }
    }
    return 10.0 * err / peak;
}

CylinderSpec degiorgi_box(const Point& z0, double r) { return CylinderSpec::make_box(z0, r, r, r); }

GridField normalize_on(const GridField& f, const CylinderSpec& q2) {
    double m = 0.0;
    for_each_cell(f.grid, q2, [&](int n, int i, int j) { m = std::max(m, std::abs(f.at(n, i, j))); });
    if (!(m > 0.0)) throw std::invalid_argument("cannot normalize a field that vanishes on Q2");
    GridField out = f;
    for (double& x : out.values) x /= m;
    return out;
}

DeGiorgiMember measure_degiorgi(const GridField& f, const Point& z0) {
    const CylinderSpec q2 = degiorgi_box(z0, 2.0), q1 = degiorgi_box(z0, 1.0), qh = degiorgi_box(z0, 0.5);
    const GridField g = normalize_on(f, q2);
    DeGiorgiMember m;
    m.upper = level_set_measure(g, q1, {LevelKind::AtLeast, 0.5});
    m.lower = level_set_measure(g, q1, {LevelKind::AtMost, 0.0});
    m.band = level_set_measure(g, q1, {LevelKind::Between, 0.0, 0.5});
    const EstimateReport r = verify_sup_bound(apply_convex_change(g, convex::positive_part), q1, qh);
    if (!r.degenerate) m.sup_ratio = r.ratio;
    return m;
}

DeGiorgiParams combine_degiorgi(std::span<const DeGiorgiMember> members, int d, double delta1, double delta2,
                                double c0_hat, std::size_t min_qualifying) {
    if (members.empty()) throw std::invalid_argument("empty ensemble");
    DeGiorgiParams p;
    p.ensemble_size = members.size();
    if (std::isnan(c0_hat)) {
        c0_hat = 0.0;
        for (const auto& m : members)
            if (!std::isnan(m.sup_ratio)) c0_hat = std::max(c0_hat, m.sup_ratio);
    }
    p.c0_hat = c0_hat;
    const Point origin(std::vector<double>(static_cast<std::size_t>(d), 0.0),
                       std::vector<double>(static_cast<std::size_t>(d), 0.0), 0.0);
    p.delta1 = std::isnan(delta1) ? 0.5 * cylinder_volume(degiorgi_box(origin, 1.0), d) : delta1;
    p.delta2 = std::isnan(delta2) ? (c0_hat > 0.0 ? 1.0 / (4.0 * c0_hat * c0_hat) : kInf) : delta2;

    p.alpha_hat = kInf;
    for (const auto& m : members) {
        if (m.upper >= p.delta1 && m.lower >= p.delta2) {
            p.band_measures.push_back(m.band);
            p.alpha_hat = std::min(p.alpha_hat, m.band);
            ++p.qualifying;
        } else {
            p.band_measures.push_back(kNaN);
        }
    }
    if (p.qualifying == 0) p.alpha_hat = kNaN;
    p.valid = p.qualifying >= min_qualifying;
    p.status = p.valid ? "valid"
                       : "inconclusive: " + std::to_string(p.qualifying) + " qualifying members (need " +
                             std::to_string(min_qualifying) + ")";
    return p;
}

DeGiorgiParams check_degiorgi(std::span<const GridField> members, const Point& z0, double delta1, double delta2,
                              double c0_hat, std::size_t min_qualifying) {
    if (members.empty()) throw std::invalid_argument("empty ensemble");
    std::vector<DeGiorgiMember> measured;
    measured.reserve(members.size());
    for (const auto& f : members) measured.push_back(measure_degiorgi(f, z0));
    return combine_degiorgi(measured, static_cast<int>(z0.dim()), delta1, delta2, c0_hat, min_qualifying);
}

DoublingLog doubling_iteration(const GridField& f, const Point& z0, double alpha_hat, double c0_hat,
                               int max_iterations) {
    if (!(alpha_hat > 0.0)) throw std::invalid_argument("alpha_hat must be positive");
    if (!(c0_hat > 0.0)) throw std::invalid_argument("c0_hat must be positive");
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be positive");
    const CylinderSpec q2 = degiorgi_box(z0, 2.0), q1 = degiorgi_box(z0, 1.0), qh = degiorgi_box(z0, 0.5);
    if (max_over(apply_convex_change(f, [](double s) { return std::abs(s); }), q2) > 1.0 + 1e-12)
        throw std::invalid_argument("doubling iteration needs |f| <= 1 on Q2");

    const int d = static_cast<int>(z0.dim());
    const double vol_q1 = cylinder_volume(q1, d);
    const double delta1 = 0.5 * vol_q1;
    const double delta2 = 1.0 / (4.0 * c0_hat * c0_hat);
    const double cell = f.grid.cell_volume();

    DoublingLog log;
    log.grid = f.grid;
    log.k0 = static_cast<int>(std::ceil(vol_q1 / alpha_hat));
    log.bound = 1.0 - std::pow(2.0, -static_cast<double>(log.k0) - 1.0);
    log.sup_half = max_over(f, qh);
    log.bound_holds = log.sup_half <= log.bound;

    std::vector<double> vals;
    for_each_cell(f.grid, q1, [&](int n, int i, int j) { vals.push_back(f.at(n, i, j)); });
    const int iterations = std::min(max_iterations, log.k0 + 1);
    for (int k = 1; k <= iterations; ++k) {
        DoublingRow row;
        row.k = k;
        std::size_t np = 0, band = 0, up = 0, nn = 0;
        for (double x : vals) {
            if (x <= 0.0) ++np;
            if (x > 0.0 && x < 0.5) ++band;
            if (x >= 0.5) ++up;
            if (x >= 0.0) ++nn;
        }
        row.measure_nonpositive = static_cast<double>(np) * cell;
        row.measure_band = static_cast<double>(band) * cell;
        row.measure_upper = static_cast<double>(up) * cell;
        row.measure_nonnegative = static_cast<double>(nn) * cell;
        if (!log.rows.empty() && row.measure_nonpositive < log.rows.back().measure_nonpositive)
            ++log.monotonicity_exceptions;
        if (log.k_delta2 < 0 && row.measure_nonnegative <= delta2) log.k_delta2 = k;
        log.rows.push_back(row);
        for (double& x : vals) x = 2.0 * x - 1.0;
    }

    const double nonpositive = log.rows.front().measure_nonpositive;
    log.conclusive = nonpositive >= delta1;
    log.status = log.conclusive ? (log.bound_holds ? "bound holds" : "bound violated")
                                : "inconclusive: |{f <= 0} in Q1| below delta1";
    return log;
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_reports_csv(std::ostream& os, std::span<const EstimateReport> reports, bool header) {
    if (header) os << "estimate_id,seed,nt,nx,nv,R0,R1,lhs,rhs_raw,ratio,pass\n";
    for (const auto& r : reports) {
        os << r.estimate_id << ',' << r.seed << ',' << r.grid.nt << ',' << r.grid.nx << ',' << r.grid.nv << ','
           << format_double(r.outer.radius) << ',' << format_double(r.inner.radius) << ',' << format_double(r.lhs)
           << ',' << format_double(r.rhs_raw) << ',' << format_double(r.ratio) << ',' << (r.pass ? 1 : 0) << '\n';
    }
}

void write_moser_csv(std::ostream& os, const MoserTrace& trace, std::uint64_t seed, bool header) {
    if (header) os << "seed,nt,nx,nv,n,q,R,norm,C_n,partial_product,empirical_constant\n";
    const GridSpec& g = trace.grid;
    for (const auto& l : trace.levels) {
        os << seed << ',' << g.nt << ',' << g.nx << ',' << g.nv << ',' << l.n << ',' << format_double(l.q) << ',' << format_double(l.radius) << ','
           << format_double(l.norm) << ',' << format_double(l.c_n) << ',' << format_double(l.partial_product) << ','
           << format_double(l.empirical_constant) << '\n';
    }
}

void write_doubling_csv(std::ostream& os, const DoublingLog& log, std::uint64_t seed, bool header) {
    if (header) os << "seed,nt,nx,nv,k,nonpositive,band,upper,nonnegative\n";
    const GridSpec& g = log.grid;
    for (const auto& r : log.rows) {
        os << seed << ',' << g.nt << ',' << g.nx << ',' << g.nv << ',' << r.k << ',' << format_double(r.measure_nonpositive) << ','
           << format_double(r.measure_band) << ',' << format_double(r.measure_upper) << ','
           << format_double(r.measure_nonnegative) << '\n';
    }
}

}  // namespace kinreg
