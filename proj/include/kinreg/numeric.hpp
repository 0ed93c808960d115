#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace kinreg {

/// Deterministic pairwise summation (fixed split order, independent of threading).
double pairwise_sum(std::span<const double> a);

/// SplitMix64 finalizer; the counter-based generator behind RandomLaminate cells.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Hash of a seed and a list of signed integer keys.
std::uint64_t hash_keys(std::uint64_t seed, std::span<const std::int64_t> keys);

/// Top 53 bits mapped to [0, 1).
constexpr double to_unit_interval(std::uint64_t u) {
    return static_cast<double>(u >> 11) * 0x1.0p-53;
}

/// Portable uniform draws from mt19937_64 (std distributions differ across standard libraries).
class UniformStream {
public:
    explicit UniformStream(std::uint64_t seed) : engine_(seed) {}
    double next() { return to_unit_interval(engine_()); }
    double next(double lo, double hi) { return lo + (hi - lo) * next(); }

private:
    std::mt19937_64 engine_;
};

/// C-infinity transition: 0 for u <= 0, 1 for u >= 1.
double smooth_step(double u);

/// Plateau eta(s) = S(clamp(2 - |s|, 0, 1)): 1 on |s| <= 1, 0 on |s| >= 2.
double plateau(double s);

/// Cutoff profile phi = eta^2, so sqrt(phi) is smooth.
double cutoff_profile(double s);

/// Smooth compact bump exp(-1/(1-s^2)) on |s| < 1, zero elsewhere.
double bump(double s);
double bump_derivative(double s);

/// Smooth nondecreasing truncation: 0 on (-inf, 0], 1/2 on [1/2, inf).
double degiorgi_truncation(double s);

/// Least-squares slope of y against x.
double ls_slope(std::span<const double> x, std::span<const double> y);

}  // namespace kinreg
