#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "kinreg/coefficients.hpp"
#include "kinreg/grid.hpp"

namespace kinreg {

enum class TransportMethod {
    /// Periodic linear interpolation at the foot of the characteristic. Monotone, conservative.
    SemiLagrangianLinear,
    /// Periodic four-point Lagrange interpolation. Conservative, not monotone.
    SemiLagrangianCubic,
    /// First-order flux-form upwind. Conservative, CFL limited.
    UpwindConservative,
};

enum class FaceAverage { Harmonic, Arithmetic };

struct SchemeParams {
    TransportMethod transport = TransportMethod::SemiLagrangianLinear;
    /// Implicitness of the velocity diffusion; 1/2 is Crank-Nicolson, 1 backward Euler.
    double diffusion_theta = 0.5;
    FaceAverage face_average = FaceAverage::Harmonic;
    /// Upper bound on |v|max dt / dx accepted by the upwind transport.
    double cfl_safety = 0.9;

    void validate() const;
};

/// Raised when a step produces non-finite values.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Free transport f(x, v) <- f(x - v dt, v) on one time slice (x-major, v fastest), in place.
void step_transport(std::span<double> slice, double dt, const GridSpec& grid, const SchemeParams& params);

/// theta-scheme for d_t f = d_v (A d_v f) with zero flux at v = +-V, one tridiagonal solve per
/// x-column. A is sampled at time t_mid.
void step_diffusion(std::span<double> slice, double dt, double t_mid, const CoefficientField& field,
                    const GridSpec& grid, const SchemeParams& params);

/// One Strang step (half transport, diffusion, half transport) from time t.
void strang_step(std::span<double> slice, double t, double dt, const CoefficientField& field, const GridSpec& grid,
                 const SchemeParams& params);

/// Evolves `initial` (the state at t_start) and stores every slice at the time-cell centers.
/// Throws std::invalid_argument when the field fails validate_ellipticity on the grid.
GridField solve(std::span<const double> initial, const CoefficientField& field, const GridSpec& grid,
                const SchemeParams& params = {});

/// Samples f0(x, v) at the cell centers of a slice.
std::vector<double> sample_slice(const GridSpec& grid, const std::function<double(double, double)>& f0);

/// Riemann sum of a slice times dx dv.
double slice_mass(std::span<const double> slice, const GridSpec& grid);
/// Sum of squares of a slice times dx dv.
double slice_energy(std::span<const double> slice, const GridSpec& grid);

/// Fundamental solution of d_t f + v d_x f = d_v^2 f (d = 1): density at (x, v) after time t of
/// the mass started at (y, w). Throws for t <= 0.
double kolmogorov_kernel(double t, double x, double v, double y, double w);

/// Bivariate Gaussian in (x, v).
struct Gaussian2 {
    double mean_x = 0.0;
    double mean_v = 0.0;
    double cov_xx = 1.0;
    double cov_xv = 0.0;
    double cov_vv = 1.0;
    double mass = 1.0;

    [[nodiscard]] double density(double x, double v) const;
};

/// Exact evolution of a Gaussian initial datum under the A = 1 equation on the whole line:
/// mean transported along (x + t v, v), covariance Phi S Phi^T + [[2t^3/3, t^2], [t^2, 2t]].
Gaussian2 evolve_gaussian(const Gaussian2& g0, double t);

/// Periodized density of a Gaussian on x in [0, lx), summing `images` copies on each side.
double periodic_density(const Gaussian2& g, double x, double v, double lx, int images = 3);

/// Smooth compactly supported test function, product of bumps in t, x and v.
struct TestBump {
    double t_center = 0.0, x_center = 0.0, v_center = 0.0;
    double t_radius = 1.0, x_radius = 1.0, v_radius = 1.0;

    [[nodiscard]] double value(double t, double x, double v) const;
};

/// Per bump: sum of f (-d_t phi - v d_x phi) + A d_v f d_v phi over the grid. Approximately zero
/// for solutions; at most a small positive tolerance for sub-solutions with phi >= 0.
/// Throws std::invalid_argument when a bump's support is not strictly inside the domain.
std::vector<double> weak_residual(const GridField& f, const CoefficientField& field, std::span<const TestBump> tests,
                                  FaceAverage face = FaceAverage::Harmonic);

/// Pointwise g(f); the result is tagged as a sub-solution candidate.
GridField apply_convex_change(const GridField& f, const std::function<double(double)>& g);

namespace convex {
inline double positive_part(double s) { return s > 0.0 ? s : 0.0; }
inline double square(double s) { return s * s; }
/// The De Giorgi truncation T: 0 on [-1, 0], 1/2 on [1/2, 1], smooth and nondecreasing.
double truncation(double s);
}  // namespace convex

}  // namespace kinreg
