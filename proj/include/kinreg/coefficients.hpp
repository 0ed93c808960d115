#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "kinreg/geometry.hpp"
#include "kinreg/grid.hpp"

namespace kinreg {

enum class CoefficientKind { Constant, Checkerboard, RandomLaminate, Oscillatory, Custom };

struct CoefficientParams {
    /// Constant kind; NaN selects the midpoint (lambda + Lambda) / 2.
    double value = std::numeric_limits<double>::quiet_NaN();
    /// Cell sizes for Checkerboard / RandomLaminate. Nonpositive entries are derived from
    /// `cell` with the kinetic anisotropy (h^3, h, h^2). An infinite size makes the field
    /// constant along that variable (a laminate).
    double cell = 0.1;
    double hx = 0.0;
    double hv = 0.0;
    double ht = 0.0;
    /// Oscillatory wavenumbers.
    double kx = 8.0;
    double kv = 8.0;
    double kt = 4.0;
};

/// Small dense symmetric matrix, row-major.
struct SymMatrix {
    int d = 1;
    std::vector<double> a;

    explicit SymMatrix(int d_ = 1) : d(d_), a(static_cast<std::size_t>(d_) * d_, 0.0) {}
    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * d + j]; }
    [[nodiscard]] double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * d + j]; }
};

/// A measurable, uniformly elliptic diffusion matrix A(x, v, t) with lambda I <= A <= Lambda I.
/// Immutable after construction; evaluation is pure and thread-safe.
class CoefficientField {
public:
    using ScalarFn = std::function<double(double x, double v, double t)>;

    static CoefficientField generate(CoefficientKind kind, double lambda, double Lambda, std::uint64_t seed,
                                     const CoefficientParams& params = {}, int d = 1);

    /// Hand-built d = 1 field. Nothing is clamped, so validate_ellipticity can flag violations.
    static CoefficientField custom(double lambda, double Lambda, ScalarFn fn);

    [[nodiscard]] SymMatrix eval(const Point& z) const;
    /// d = 1 fast path.
    [[nodiscard]] double eval_scalar(double x, double v, double t) const;

    /// Pullback under the kinetic scaling: eval(rescaled, z) = eval(*this, unscale(z)).
    [[nodiscard]] CoefficientField rescaled(const ScalingParams& s) const;

    [[nodiscard]] CoefficientKind kind() const { return kind_; }
    [[nodiscard]] double lambda() const { return lambda_; }
    [[nodiscard]] double Lambda() const { return Lambda_; }
    [[nodiscard]] std::uint64_t seed() const { return seed_; }
    [[nodiscard]] int dim() const { return d_; }
    [[nodiscard]] const CoefficientParams& params() const { return params_; }
    /// Effective cell sizes (hx, hv, ht) of the cellwise kinds.
    [[nodiscard]] double hx() const { return hx_; }
    [[nodiscard]] double hv() const { return hv_; }
    [[nodiscard]] double ht() const { return ht_; }

private:
    CoefficientField() = default;

    [[nodiscard]] double base_value(std::span<const double> x, std::span<const double> v, double t, int axis) const;
    [[nodiscard]] Point pull_back(const Point& z) const;

    CoefficientKind kind_ = CoefficientKind::Constant;
    double lambda_ = 1.0;
    double Lambda_ = 1.0;
    std::uint64_t seed_ = 0;
    int d_ = 1;
    CoefficientParams params_;
    double hx_ = 0.0, hv_ = 0.0, ht_ = 0.0;
    double off_x_ = 0.0, off_v_ = 0.0, off_t_ = 0.0;
    ScalarFn custom_;
    std::vector<ScalingParams> pullbacks_;
};

struct EllipticityReport {
    double min_eig = 0.0;
    double max_eig = 0.0;
    std::size_t samples = 0;
    bool pass = false;
};

/// Samples the field at cell centers, faces and half time steps of the grid and reports the
/// extremal eigenvalues against [lambda - tol, Lambda + tol].
EllipticityReport validate_ellipticity(const CoefficientField& field, const GridSpec& grid, double tol = 1e-12);

}  // namespace kinreg

namespace kinreg {

inline CoefficientField rescale_field(const CoefficientField& field, const ScalingParams& s) {
    return field.rescaled(s);
}

}  // namespace kinreg
