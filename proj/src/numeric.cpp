#include "kinreg/numeric.hpp"

#include <cmath>
#include <stdexcept>

namespace kinreg {

double pairwise_sum(std::span<const double> a) {
    constexpr std::size_t block = 32;
    if (a.size() <= block) {
        double s = 0.0;
        for (double x : a) s += x;
        return s;
    }
    const std::size_t half = a.size() / 2;
    return pairwise_sum(a.first(half)) + pairwise_sum(a.subspan(half));
}

std::uint64_t hash_keys(std::uint64_t seed, std::span<const std::int64_t> keys) {
    std::uint64_t h = mix64(seed);
    for (std::int64_t k : keys) h = mix64(h ^ static_cast<std::uint64_t>(k));
    return h;
}

double smooth_step(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / u);
    const double b = std::exp(-1.0 / (1.0 - u));
    return a / (a + b);
}

double plateau(double s) {
    const double u = 2.0 - std::abs(s);
    return smooth_step(u < 0.0 ? 0.0 : (u > 1.0 ? 1.0 : u));
}

double cutoff_profile(double s) {
    const double e = plateau(s);
    return e * e;
}

double bump(double s) {
    const double q = 1.0 - s * s;
    return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

double bump_derivative(double s) {
    const double q = 1.0 - s * s;
    if (q <= 0.0) return 0.0;
    return std::exp(-1.0 / q) * (-2.0 * s / (q * q));
}

double degiorgi_truncation(double s) { return 0.5 * smooth_step(2.0 * s); }

double ls_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("ls_slope needs >= 2 pairs");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw std::invalid_argument("ls_slope: degenerate abscissae");
    return sxy / sxx;
}

}  // namespace kinreg
