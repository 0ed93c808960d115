#include "kinreg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kinreg/numeric.hpp"

namespace kinreg {

void SchemeParams::validate() const {
    if (!(diffusion_theta >= 0.0 && diffusion_theta <= 1.0))
        throw std::invalid_argument("diffusion_theta must lie in [0, 1]");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw std::invalid_argument("cfl_safety must lie in (0, 1]");
}

namespace {

inline int wrap(int i, int n) {
    const int r = i % n;
    return r < 0 ? r + n : r;
}

void shift_row_linear(const double* in, double* out, int nx, double shift) {
    // out[i] = f(i - shift): linear interpolation between i-k-1 and i-k.
    const double kf = std::floor(shift);
    const int k = static_cast<int>(kf);
    const double theta = shift - kf;
    for (int i = 0; i < nx; ++i) {
        const double a = in[wrap(i - k, nx)];
        const double b = in[wrap(i - k - 1, nx)];
        out[i] = (1.0 - theta) * a + theta * b;
    }
}

void shift_row_cubic(const double* in, double* out, int nx, double shift) {
    // Evaluate at p = i - shift = i - k - theta = (i - k - 1) + tau, tau = 1 - theta.
    const double kf = std::floor(shift);
    const int k = static_cast<int>(kf);
    const double theta = shift - kf;
    if (theta == 0.0) {
        for (int i = 0; i < nx; ++i) out[i] = in[wrap(i - k, nx)];
        return;
    }
    const double tau = 1.0 - theta;
    const double wm1 = -tau * (tau - 1.0) * (tau - 2.0) / 6.0;
    const double w0 = (tau + 1.0) * (tau - 1.0) * (tau - 2.0) / 2.0;
    const double w1 = -(tau + 1.0) * tau * (tau - 2.0) / 2.0;
    const double w2 = (tau + 1.0) * tau * (tau - 1.0) / 6.0;
    for (int i = 0; i < nx; ++i) {
        const int m = i - k - 1;
        out[i] = wm1 * in[wrap(m - 1, nx)] + w0 * in[wrap(m, nx)] + w1 * in[wrap(m + 1, nx)] +
                 w2 * in[wrap(m + 2, nx)];
    }
}

void shift_row_upwind(const double* in, double* out, int nx, double courant) {
    // Flux form with face fluxes F_{i+1/2}; courant = v dt / dx.
    for (int i = 0; i < nx; ++i) {
        const int im = wrap(i - 1, nx), ip = wrap(i + 1, nx);
        const double flux_right = courant > 0.0 ? courant * in[i] : courant * in[ip];
        const double flux_left = courant > 0.0 ? courant * in[im] : courant * in[i];
        out[i] = in[i] - (flux_right - flux_left);
    }
}

double face_value(double a, double b, FaceAverage avg) {
    if (avg == FaceAverage::Arithmetic) return 0.5 * (a + b);
    return 2.0 * a * b / (a + b);
}

}  // namespace

void step_transport(std::span<double> slice, double dt, const GridSpec& grid, const SchemeParams& params) {
    const int nx = grid.nx, nv = grid.nv;
    if (slice.size() != grid.slice_size()) throw std::invalid_argument("slice size does not match grid");
    if (params.transport == TransportMethod::UpwindConservative) {
        const double courant = grid.v_max * std::abs(dt) / grid.dx();
        if (courant > params.cfl_safety) {
            std::ostringstream os;
            os << "upwind transport: CFL number " << courant << " exceeds " << params.cfl_safety;
            throw std::invalid_argument(os.str());
        }
    }
    std::vector<double> row_in(static_cast<std::size_t>(nx)), row_out(static_cast<std::size_t>(nx));
    for (int j = 0; j < nv; ++j) {
        for (int i = 0; i < nx; ++i) row_in[static_cast<std::size_t>(i)] = slice[static_cast<std::size_t>(i) * nv + j];
        const double v = grid.v(j);
        const double shift = v * dt / grid.dx();
        switch (params.transport) {
            case TransportMethod::SemiLagrangianLinear:
                shift_row_linear(row_in.data(), row_out.data(), nx, shift);
                break;
            case TransportMethod::SemiLagrangianCubic:
                shift_row_cubic(row_in.data(), row_out.data(), nx, shift);
                break;
            case TransportMethod::UpwindConservative:
                shift_row_upwind(row_in.data(), row_out.data(), nx, shift);
                break;
        }
        for (int i = 0; i < nx; ++i) slice[static_cast<std::size_t>(i) * nv + j] = row_out[static_cast<std::size_t>(i)];
    }
}

void step_diffusion(std::span<double> slice, double dt, double t_mid, const CoefficientField& field,
                    const GridSpec& grid, const SchemeParams& params) {
    const int nx = grid.nx, nv = grid.nv;
    if (slice.size() != grid.slice_size()) throw std::invalid_argument("slice size does not match grid");
    if (nv == 1) return;
    const double theta = params.diffusion_theta;
    const double mu = dt / (grid.dv() * grid.dv());

    std::vector<double> a_cell(static_cast<std::size_t>(nv)), a_face(static_cast<std::size_t>(nv - 1));
    std::vector<double> lower(static_cast<std::size_t>(nv)), diag(static_cast<std::size_t>(nv)),
        upper(static_cast<std::size_t>(nv)), rhs(static_cast<std::size_t>(nv));

    for (int i = 0; i < nx; ++i) {
        const double x = grid.x(i);
        for (int j = 0; j < nv; ++j) a_cell[static_cast<std::size_t>(j)] = field.eval_scalar(x, grid.v(j), t_mid);
        for (int j = 0; j + 1 < nv; ++j)
            a_face[static_cast<std::size_t>(j)] =
                face_value(a_cell[static_cast<std::size_t>(j)], a_cell[static_cast<std::size_t>(j + 1)], params.face_average);

        double* col = slice.data() + static_cast<std::size_t>(i) * nv;
        for (int j = 0; j < nv; ++j) {
            const double am = j > 0 ? a_face[static_cast<std::size_t>(j - 1)] : 0.0;
            const double ap = j + 1 < nv ? a_face[static_cast<std::size_t>(j)] : 0.0;
            const double fm = j > 0 ? col[j - 1] : 0.0;
            const double fp = j + 1 < nv ? col[j + 1] : 0.0;
            const double lf = ap * (fp - col[j]) - am * (col[j] - fm);
            rhs[static_cast<std::size_t>(j)] = col[j] + (1.0 - theta) * mu * lf;
            lower[static_cast<std::size_t>(j)] = -theta * mu * am;
            upper[static_cast<std::size_t>(j)] = -theta * mu * ap;
            diag[static_cast<std::size_t>(j)] = 1.0 + theta * mu * (am + ap);
        }

        // Thomas algorithm; the matrix is strictly diagonally dominant for lambda > 0.
        for (int j = 1; j < nv; ++j) {
            const double m = lower[static_cast<std::size_t>(j)] / diag[static_cast<std::size_t>(j - 1)];
            diag[static_cast<std::size_t>(j)] -= m * upper[static_cast<std::size_t>(j - 1)];
            rhs[static_cast<std::size_t>(j)] -= m * rhs[static_cast<std::size_t>(j - 1)];
        }
        if (!(diag[static_cast<std::size_t>(nv - 1)] != 0.0)) throw SolverError("tridiagonal solve: zero pivot");
        col[nv - 1] = rhs[static_cast<std::size_t>(nv - 1)] / diag[static_cast<std::size_t>(nv - 1)];
        for (int j = nv - 2; j >= 0; --j)
            col[j] = (rhs[static_cast<std::size_t>(j)] - upper[static_cast<std::size_t>(j)] * col[j + 1]) /
                     diag[static_cast<std::size_t>(j)];
    }
}

void strang_step(std::span<double> slice, double t, double dt, const CoefficientField& field, const GridSpec& grid,
                 const SchemeParams& params) {
    step_transport(slice, 0.5 * dt, grid, params);
    step_diffusion(slice, dt, t + 0.5 * dt, field, grid, params);
    step_transport(slice, 0.5 * dt, grid, params);
}

GridField solve(std::span<const double> initial, const CoefficientField& field, const GridSpec& grid,
                const SchemeParams& params) {
    grid.validate();
    params.validate();
    if (field.dim() != 1) throw std::invalid_argument("solver supports d = 1 only");
    if (initial.size() != grid.slice_size()) throw std::invalid_argument("initial slice size does not match grid");
    for (double x : initial)
        if (!std::isfinite(x)) throw std::invalid_argument("initial data must be finite");
    const EllipticityReport ell = validate_ellipticity(field, grid);
    if (!ell.pass) {
        std::ostringstream os;
        os << "coefficient field violates ellipticity on the grid: eigenvalues in [" << ell.min_eig << ", "
           << ell.max_eig << "], expected [" << field.lambda() << ", " << field.Lambda() << "]";
        throw std::invalid_argument(os.str());
    }

    GridField out(grid, 0.0, FieldRole::Solution);
    std::vector<double> state(initial.begin(), initial.end());
    const double dt = grid.dt();
    double t = grid.t_start;
    for (int n = 0; n < grid.nt; ++n) {
        const double h = n == 0 ? 0.5 * dt : dt;
        strang_step(state, t, h, field, grid, params);
        t += h;
        for (double x : state) {
            if (!std::isfinite(x)) {
                std::ostringstream os;
                os << "non-finite value after step " << n << " (t = " << t << ", grid " << grid.summary() << ")";
                throw SolverError(os.str());
            }
        }
        std::copy(state.begin(), state.end(), out.slice(n).begin());
    }
    return out;
}

std::vector<double> sample_slice(const GridSpec& grid, const std::function<double(double, double)>& f0) {
    std::vector<double> s(grid.slice_size());
    for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.nv; ++j) s[static_cast<std::size_t>(i) * grid.nv + j] = f0(grid.x(i), grid.v(j));
    return s;
}

double slice_mass(std::span<const double> slice, const GridSpec& grid) {
    return pairwise_sum(slice) * grid.dx() * grid.dv();
}

double slice_energy(std::span<const double> slice, const GridSpec& grid) {
    std::vector<double> sq(slice.size());
    std::transform(slice.begin(), slice.end(), sq.begin(), [](double x) { return x * x; });
    return pairwise_sum(sq) * grid.dx() * grid.dv();
}

double kolmogorov_kernel(double t, double x, double v, double y, double w) {
    if (!(t > 0.0)) throw std::invalid_argument("kolmogorov_kernel: elapsed time must be positive");
    const double a = x - y - t * w;
    const double b = v - w;
    const double det = t * t * t * t / 3.0;
    // Inverse of [[2t^3/3, t^2], [t^2, 2t]].
    const double q = (2.0 * t * a * a - 2.0 * t * t * a * b + (2.0 * t * t * t / 3.0) * b * b) / det;
    return std::exp(-0.5 * q) / (2.0 * std::numbers::pi * std::sqrt(det));
}

double Gaussian2::density(double x, double v) const {
    const double det = cov_xx * cov_vv - cov_xv * cov_xv;
    const double a = x - mean_x, b = v - mean_v;
    const double q = (cov_vv * a * a - 2.0 * cov_xv * a * b + cov_xx * b * b) / det;
    return mass * std::exp(-0.5 * q) / (2.0 * std::numbers::pi * std::sqrt(det));
}

Gaussian2 evolve_gaussian(const Gaussian2& g0, double t) {
    Gaussian2 g = g0;
    g.mean_x = g0.mean_x + t * g0.mean_v;
    // Phi = [[1, t], [0, 1]].
    g.cov_xx = g0.cov_xx + 2.0 * t * g0.cov_xv + t * t * g0.cov_vv + 2.0 * t * t * t / 3.0;
    g.cov_xv = g0.cov_xv + t * g0.cov_vv + t * t;
    g.cov_vv = g0.cov_vv + 2.0 * t;
    return g;
}

double periodic_density(const Gaussian2& g, double x, double v, double lx, int images) {
    double s = 0.0;
    for (int k = -images; k <= images; ++k) s += g.density(x + k * lx, v);
    return s;
}

double TestBump::value(double t, double x, double v) const {
    return bump((t - t_center) / t_radius) * bump((x - x_center) / x_radius) * bump((v - v_center) / v_radius);
}

std::vector<double> weak_residual(const GridField& f, const CoefficientField& field, std::span<const TestBump> tests,
                                  FaceAverage face) {
    const GridSpec& g = f.grid;
    std::vector<double> out;
    out.reserve(tests.size());
    const double dx = g.dx(), dv = g.dv(), dt = g.dt();
    for (const TestBump& b : tests) {
        if (!(b.t_radius > 0.0 && b.x_radius > 0.0 && b.v_radius > 0.0))
            throw std::invalid_argument("test bump radii must be positive");
        if (b.x_center - b.x_radius <= 0.0 || b.x_center + b.x_radius >= g.lx || b.v_center - b.v_radius <= -g.v_max ||
            b.v_center + b.v_radius >= g.v_max || b.t_center - b.t_radius <= g.t_start ||
            b.t_center + b.t_radius >= g.t_end)
            throw std::invalid_argument("test function support exceeds the domain");

        auto range = [](double c, double r, double origin, double h, int n) {
            const int lo = std::max(0, static_cast<int>(std::floor((c - r - origin) / h)) - 1);
            const int hi = std::min(n - 1, static_cast<int>(std::ceil((c + r - origin) / h)) + 1);
            return std::pair{lo, hi};
        };
        const auto [n0, n1] = range(b.t_center, b.t_radius, g.t_start, dt, g.nt);
        const auto [i0, i1] = range(b.x_center, b.x_radius, 0.0, dx, g.nx);
        const auto [j0, j1] = range(b.v_center, b.v_radius, -g.v_max, dv, g.nv);

        // Summation by parts: derivatives fall on f as differences, so constants give exactly 0.
        // d_t f sits at time faces t_{n+1/2}; d_x f is centered and periodic; the flux term uses
        // face coefficients at v_{j+1/2}.
        std::vector<double> terms;
        for (int n = n0; n <= n1; ++n) {
            const double t = g.t(n);
            const double bt = bump((t - b.t_center) / b.t_radius);
            const double bt_face = n + 1 < g.nt ? bump((t + 0.5 * dt - b.t_center) / b.t_radius) : 0.0;
            if (bt == 0.0 && bt_face == 0.0) continue;
            for (int i = i0; i <= i1; ++i) {
                const double x = g.x(i);
                const double bx = bump((x - b.x_center) / b.x_radius);
                if (bx == 0.0) continue;
                const int ip = (i + 1) % g.nx, im = (i + g.nx - 1) % g.nx;
                double acc = 0.0;
                for (int j = j0; j <= j1; ++j) {
                    const double v = g.v(j);
                    const double bv = bump((v - b.v_center) / b.v_radius);
                    if (bv != 0.0) {
                        if (bt_face != 0.0) acc += (f.at(n + 1, i, j) - f.at(n, i, j)) / dt * bt_face * bx * bv;
                        if (bt != 0.0) acc += v * (f.at(n, ip, j) - f.at(n, im, j)) / (2.0 * dx) * bt * bx * bv;
                    }
                    if (j + 1 < g.nv && bt != 0.0) {
                        const double vf = v + 0.5 * dv;
                        const double dbv = bump_derivative((vf - b.v_center) / b.v_radius) / b.v_radius;
                        if (dbv != 0.0) {
                            const double a = face_value(field.eval_scalar(x, v, t), field.eval_scalar(x, v + dv, t), face);
                            acc += a * (f.at(n, i, j + 1) - f.at(n, i, j)) / dv * bt * bx * dbv;
                        }
                    }
                }
                terms.push_back(acc);
            }
        }
        out.push_back(pairwise_sum(terms) * dx * dv * dt);
    }
    return out;
}

GridField apply_convex_change(const GridField& f, const std::function<double(double)>& g) {
    GridField out = f;
    for (double& x : out.values) x = g(x);
    out.role = FieldRole::SubSolution;
    return out;
}

double convex::truncation(double s) { return degiorgi_truncation(s); }

}  // namespace kinreg
