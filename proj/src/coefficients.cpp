#include "kinreg/coefficients.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "kinreg/numeric.hpp"

namespace kinreg {

namespace {

std::int64_t cell_index(double coord, double h, double offset) {
    if (!std::isfinite(h)) return 0;
    return static_cast<std::int64_t>(std::floor((coord - offset) / h));
}

}  // namespace

CoefficientField CoefficientField::generate(CoefficientKind kind, double lambda, double Lambda, std::uint64_t seed,
                                            const CoefficientParams& params, int d) {
    if (!(lambda > 0.0)) throw std::invalid_argument("ellipticity: lambda must be positive");
    if (!(Lambda >= lambda)) throw std::invalid_argument("ellipticity: Lambda must be >= lambda");
    if (d < 1) throw std::invalid_argument("dimension must be >= 1");
    if (kind == CoefficientKind::Custom) throw std::invalid_argument("use CoefficientField::custom");

    CoefficientField f;
    f.kind_ = kind;
    f.lambda_ = lambda;
    f.Lambda_ = Lambda;
    f.seed_ = seed;
    f.d_ = d;
    f.params_ = params;

    const double h = params.cell;
    f.hx_ = params.hx > 0.0 ? params.hx : h * h * h;
    f.hv_ = params.hv > 0.0 ? params.hv : h;
    f.ht_ = params.ht > 0.0 ? params.ht : h * h;
    if (kind == CoefficientKind::Checkerboard || kind == CoefficientKind::RandomLaminate) {
        if (!(f.hx_ > 0.0 && f.hv_ > 0.0 && f.ht_ > 0.0)) throw std::invalid_argument("cell sizes must be positive");
    }
    // Seed 0 keeps the lattice anchored at the origin; other seeds shift it.
    if (kind == CoefficientKind::Checkerboard && seed != 0) {
        const std::array<std::int64_t, 1> k0{0}, k1{1}, k2{2};
        auto frac = [&](std::span<const std::int64_t> k, double hh) {
            return std::isfinite(hh) ? hh * to_unit_interval(hash_keys(seed, k)) : 0.0;
        };
        f.off_x_ = frac(k0, f.hx_);
        f.off_v_ = frac(k1, f.hv_);
        f.off_t_ = frac(k2, f.ht_);
    }
    return f;
}

CoefficientField CoefficientField::custom(double lambda, double Lambda, ScalarFn fn) {
    if (!(lambda > 0.0) || !(Lambda >= lambda)) throw std::invalid_argument("ellipticity: need 0 < lambda <= Lambda");
    CoefficientField f;
    f.kind_ = CoefficientKind::Custom;
    f.lambda_ = lambda;
    f.Lambda_ = Lambda;
    f.custom_ = std::move(fn);
    return f;
}

double CoefficientField::base_value(std::span<const double> x, std::span<const double> v, double t, int axis) const {
    const double lo = lambda_, hi = Lambda_;
    switch (kind_) {
        case CoefficientKind::Constant: {
            const double c = std::isnan(params_.value) ? 0.5 * (lo + hi) : params_.value;
            return std::clamp(c, lo, hi);
        }
        case CoefficientKind::Checkerboard: {
            std::int64_t parity = axis + cell_index(t, ht_, off_t_);
            for (std::size_t k = 0; k < x.size(); ++k)
                parity += cell_index(x[k], hx_, off_x_) + cell_index(v[k], hv_, off_v_);
            return (parity % 2 == 0) ? lo : hi;
        }
        case CoefficientKind::RandomLaminate: {
            std::int64_t keys[16];
            std::size_t n = 0;
            keys[n++] = axis;
            keys[n++] = cell_index(t, ht_, 0.0);
            for (std::size_t k = 0; k < x.size() && n + 2 <= std::size(keys); ++k) {
                keys[n++] = cell_index(x[k], hx_, 0.0);
                keys[n++] = cell_index(v[k], hv_, 0.0);
            }
            const double u = to_unit_interval(hash_keys(seed_, std::span<const std::int64_t>(keys, n)));
            return std::clamp(lo + (hi - lo) * u, lo, hi);
        }
        case CoefficientKind::Oscillatory: {
            const double mid = 0.5 * (lo + hi), amp = 0.5 * (hi - lo);
            const double phase = axis * 0.5 * std::numbers::pi;
            double s = std::cos(params_.kt * t + phase);
            for (std::size_t k = 0; k < x.size(); ++k) s *= std::sin(params_.kx * x[k]) * std::sin(params_.kv * v[k]);
            return std::clamp(mid + amp * s, lo, hi);
        }
        case CoefficientKind::Custom:
            return custom_(x[0], v[0], t);
    }
    return lo;
}

Point CoefficientField::pull_back(const Point& z) const {
    Point p = z;
    for (auto it = pullbacks_.rbegin(); it != pullbacks_.rend(); ++it) p = kinetic_unscale_point(p, *it);
    return p;
}

double CoefficientField::eval_scalar(double x, double v, double t) const {
    if (d_ != 1) throw std::logic_error("eval_scalar requires d = 1");
    for (auto it = pullbacks_.rbegin(); it != pullbacks_.rend(); ++it) {
        const double r = it->r;
        x = it->origin.x[0] + r * r * r * x;
        v = it->origin.v[0] + r * v;
        t = it->origin.t + r * r * t;
    }
    return base_value(std::span<const double>(&x, 1), std::span<const double>(&v, 1), t, 0);
}

SymMatrix CoefficientField::eval(const Point& z0) const {
    if (static_cast<int>(z0.dim()) != d_) throw std::invalid_argument("coefficient field: point dimension mismatch");
    const Point z = pull_back(z0);
    SymMatrix m(d_);
    if (d_ == 1) {
        m(0, 0) = base_value(z.x, z.v, z.t, 0);
        return m;
    }

    // Q^T diag(mu) Q with Q a product of Givens rotations; the spectrum is mu exactly.
    std::vector<double> mu(static_cast<std::size_t>(d_));
    for (int k = 0; k < d_; ++k) mu[static_cast<std::size_t>(k)] = base_value(z.x, z.v, z.t, k);

    std::vector<std::int64_t> keys;
    if (kind_ == CoefficientKind::Checkerboard || kind_ == CoefficientKind::RandomLaminate) {
        keys.push_back(cell_index(z.t, ht_, off_t_));
        for (int k = 0; k < d_; ++k) {
            keys.push_back(cell_index(z.x[static_cast<std::size_t>(k)], hx_, off_x_));
            keys.push_back(cell_index(z.v[static_cast<std::size_t>(k)], hv_, off_v_));
        }
    }
    Eigen::MatrixXd q = Eigen::MatrixXd::Identity(d_, d_);
    for (int p = 0; p < d_; ++p) {
        for (int r = p + 1; r < d_; ++r) {
            keys.push_back(1000 + p * d_ + r);
            const double angle = std::numbers::pi * to_unit_interval(hash_keys(seed_, keys));
            keys.pop_back();
            Eigen::MatrixXd g = Eigen::MatrixXd::Identity(d_, d_);
            g(p, p) = std::cos(angle);
            g(r, r) = std::cos(angle);
            g(p, r) = -std::sin(angle);
            g(r, p) = std::sin(angle);
            q = g * q;
        }
    }
    Eigen::VectorXd diag(d_);
    for (int k = 0; k < d_; ++k) diag(k) = mu[static_cast<std::size_t>(k)];
    const Eigen::MatrixXd a = q.transpose() * diag.asDiagonal() * q;
    for (int i = 0; i < d_; ++i) {
        for (int j = i; j < d_; ++j) {
            const double s = 0.5 * (a(i, j) + a(j, i));
            m(i, j) = s;
            m(j, i) = s;
        }
    }
    return m;
}

CoefficientField CoefficientField::rescaled(const ScalingParams& s) const {
    if (static_cast<int>(s.origin.dim()) != d_) throw std::invalid_argument("scaling origin dimension mismatch");
    CoefficientField f = *this;
    f.pullbacks_.push_back(s);
    return f;
}

EllipticityReport validate_ellipticity(const CoefficientField& field, const GridSpec& grid, double tol) {
    grid.validate();
    EllipticityReport rep;
    rep.min_eig = std::numeric_limits<double>::infinity();
    rep.max_eig = -std::numeric_limits<double>::infinity();

    const double dx = grid.dx(), dv = grid.dv(), dt = grid.dt();
    const int d = field.dim();
    auto record = [&](double lo, double hi) {
        rep.min_eig = std::min(rep.min_eig, lo);
        rep.max_eig = std::max(rep.max_eig, hi);
        ++rep.samples;
    };

    // Half-spacing lattice: cell centers, faces and half time steps.
    for (int n = 0; n <= 2 * grid.nt; ++n) {
        const double t = grid.t_start + 0.5 * n * dt;
        for (int i = 0; i < 2 * grid.nx; ++i) {
            const double x = 0.5 * i * dx;
            for (int j = 0; j <= 2 * grid.nv; ++j) {
                const double v = -grid.v_max + 0.5 * j * dv;
                if (d == 1) {
                    const double a = field.eval_scalar(x, v, t);
                    record(a, a);
                } else {
                    Point z(std::vector<double>(static_cast<std::size_t>(d), x),
                            std::vector<double>(static_cast<std::size_t>(d), v), t);
                    const SymMatrix m = field.eval(z);
                    Eigen::MatrixXd a(d, d);
                    for (int p = 0; p < d; ++p)
                        for (int r = 0; r < d; ++r) a(p, r) = m(p, r);
                    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
                    record(es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff());
                }
            }
        }
    }
    rep.pass = std::isfinite(rep.min_eig) && std::isfinite(rep.max_eig) && rep.min_eig >= field.lambda() - tol &&
               rep.max_eig <= field.Lambda() + tol;
    return rep;
}

}  // namespace kinreg
