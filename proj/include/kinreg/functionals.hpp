#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "kinreg/geometry.hpp"
#include "kinreg/grid.hpp"

namespace kinreg {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// The cylinder contains no cell center of the grid.
class EmptyRegionError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Exponents of L^{p_t}_t L^{p_x}_x L^{p_v}_v, applied innermost-v, then x, then t.
struct MixedNormSpec {
    double p_t = 2.0;
    double p_x = 2.0;
    double p_v = 2.0;
};

enum class CutoffKind {
    /// phi_{R^3}((x - x0) - (t - t0)(v - v0)) phi_R(v - v0); constant along free transport.
    Sheared,
    /// phi_{R^3}(x - x0) phi_R(v - v0).
    Straight,
};

/// chi_{2R}: equal to 1 on the sheared cylinder of radius R, 0 outside radius 2R.
struct CutoffSpec {
    double R = 1.0;
    Point center;
    CutoffKind kind = CutoffKind::Sheared;
};

/// (integral of phi)^2 for d = 1, computed once by trapezoidal quadrature of the plateau profile.
double cutoff_normalization();

/// Calls fn(n, i, j) for every cell whose center lies in the cylinder, in (t, x, v) lexicographic
/// order. x distances are taken modulo the period. Returns the number of cells visited.
std::size_t for_each_cell(const GridSpec& grid, const CylinderSpec& cyl,
                          const std::function<void(int n, int i, int j)>& fn);

std::size_t cell_count(const GridSpec& grid, const CylinderSpec& cyl);
/// cell_count times the cell volume.
double rasterized_volume(const GridSpec& grid, const CylinderSpec& cyl);

/// (sum over cells of |f|^p dx dv dt)^{1/p}; p = infinity gives the max. Same code path as
/// mixed_norm({p, p, p}).
double lp_norm(const GridField& f, const CylinderSpec& cyl, double p);
double mixed_norm(const GridField& f, const CylinderSpec& cyl, const MixedNormSpec& spec);

double max_over(const GridField& f, const CylinderSpec& cyl);
double min_over(const GridField& f, const CylinderSpec& cyl);
/// Mean value over the rasterized cylinder.
double mean_over(const GridField& f, const CylinderSpec& cyl);

/// d_v f: centered differences inside, second-order one-sided at v = +-V. Needs nv >= 3.
GridField grad_v(const GridField& f);

/// |xi|^s Fourier multiplier along every (t, v) line in x, applied to window * f when a window
/// is given. The window support must fit in half the period. s must lie in (0, 1).
GridField frac_deriv_x(const GridField& f, double s, const std::optional<CutoffSpec>& window = std::nullopt);

double cutoff_chi(const CutoffSpec& spec, const Point& z);
/// cutoff_chi for d = 1 with the x displacement wrapped to the period lx.
double cutoff_chi_periodic(const CutoffSpec& spec, double x, double v, double t, double lx);

/// (c R^{4d})^{-1} sum of f chi_{2R} dx dv over the slice containing time t.
double weighted_mean(const GridField& f, const CutoffSpec& spec, double t);
/// Index of the time slice whose cell contains t.
int slice_at(const GridSpec& grid, double t);

double oscillation(const GridField& f, const CylinderSpec& cyl);

enum class LevelKind { AtLeast, AtMost, Between };

/// {f >= a}, {f <= a} or the open band {a < f < b}.
struct LevelSet {
    LevelKind kind = LevelKind::AtLeast;
    double a = 0.0;
    double b = 0.0;

    [[nodiscard]] bool contains(double value) const;
};

std::size_t level_set_count(const GridField& f, const CylinderSpec& cyl, const LevelSet& set);
double level_set_measure(const GridField& f, const CylinderSpec& cyl, const LevelSet& set);

}  // namespace kinreg
