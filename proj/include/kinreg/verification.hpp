#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "kinreg/calibration.hpp"
#include "kinreg/functionals.hpp"
#include "kinreg/geometry.hpp"
#include "kinreg/grid.hpp"

namespace kinreg {

/// Measured sides of one inequality lhs <= C rhs_raw on one field.
struct EstimateReport {
    std::string estimate_id;
    double lhs = 0.0;
    double rhs_raw = 0.0;
    /// lhs / rhs_raw, or 0 when rhs_raw = 0.
    double ratio = 0.0;
    /// (inner, outer) cylinder pair, e.g. (Q1, Q0).
    CylinderSpec inner;
    CylinderSpec outer;
    std::uint64_t seed = 0;
    GridSpec grid;
    double cap = kInf;
    /// rhs_raw = 0: pass iff lhs <= tolerance.
    bool degenerate = false;
    bool pass = false;
};

/// Builds a report and evaluates pass against the cap.
EstimateReport make_report(std::string id, double lhs, double rhs_raw, const CylinderSpec& inner,
                           const CylinderSpec& outer, const GridSpec& grid, double cap, double tol = 1e-12);

/// 1/(R0^2 - R1^2) + R0/(R0^3 - R1^3) + 1/(R0 - R1)^2.
double energy_shape(double r0, double r1);

/// Throws std::invalid_argument unless inner is strictly inside outer (same center and kind,
/// smaller radius or extents).
void require_nested(const CylinderSpec& inner, const CylinderSpec& outer);

/// Three ratios against int_{Q0} f^2: int_{Q1} |d_v f|^2, ||f||^2 in L^2_t L^2_x L^q_v(Q1),
/// and ||f||^2 in L^inf_t L^2_x L^2_v(Q1). Caps are C-bar times energy_shape(R0, R1).
std::vector<EstimateReport> verify_energy(const GridField& f, const CylinderSpec& q1, const CylinderSpec& q0,
                                          double q_v = 6.0, const Caps& caps = kFrozenCaps);

/// "averaging_l2": ||D_x^{1/3}(chi (f - f~))||_{L^2(Q1)} / ||f||_{L^2(Q0)} with a straight window of
/// radius min(R1, R0/2). "averaging_lq": the same in L^q over the sheared cylinder of radius R1 with
/// the shear-invariant cutoff, against ||d_v f||_{L^q(Q0)}. f~ is the per-slice weighted mean under the
/// window, so constants give lhs = 0. Rejects sub-solutions.
std::vector<EstimateReport> verify_averaging_gain(const GridField& f, const CylinderSpec& q1, const CylinderSpec& q0,
                                                  double q = 1.5, const Caps& caps = kFrozenCaps);

/// L^2_t L^p_x L^1_v(Q1) over L^2(Q0) with p = 2d/(d - 2/3).
EstimateReport verify_mixed_gain(const GridField& f, const CylinderSpec& q1, const CylinderSpec& q0,
                                 const Caps& caps = kFrozenCaps);

/// p = 2d/(d - 2/3); 6 for d = 1.
double mixed_gain_exponent(int d);

/// ||f||_{L^q(Q1)} / ||f||_{L^2(Q0)} for a nonnegative sub-solution; q > 2.
EstimateReport verify_integrability_gain(const GridField& f, const CylinderSpec& q1, const CylinderSpec& q0,
                                         double q = 4.0, const Caps& caps = kFrozenCaps);

/// sup_{Q_inf} f / ||f||_{L^2(Q0)}.
EstimateReport verify_sup_bound(const GridField& f, const CylinderSpec& q0, const CylinderSpec& q_inf,
                                const Caps& caps = kFrozenCaps);

struct MoserLevel {
    int n = 0;
    double q = 0.0;
    double radius = 0.0;
    /// ||g^{q_n}||_{L^2(Q_{R_n})} for the normalized g = f / (2 ||f||_inf,Q0).
    double norm = 0.0;
    /// Explicit constant C_n = C-bar (a^2 n^4 + b n^2)^kappa (0 at n = 0).
    double c_n = 0.0;
    /// Prod_{k=1..n} C_k^{1/(2 kappa^k)}.
    double partial_product = 1.0;
    /// norm_n^2 / norm_{n-1}^{2 kappa}: the measured constant of one iteration step.
    double empirical_constant = 0.0;
};

struct MoserTrace {
    std::vector<MoserLevel> levels;
    double kappa = 3.0;
    double a = 0.0;
    double b = 0.0;
    double r0 = 1.0;
    double r_inf = 0.5;
    double c_bar = 1.0;
    /// ||f||_inf over Q0 used for normalization.
    double normalization = 1.0;
    /// Converged product times ||f||_{L^4(Q0)}: the bound the iteration predicts for sup_{Q_inf} f.
    double predicted_sup = 0.0;
    /// L^{2 q_N}(Q_N) norm of f at the last level: the measured approach to the sup.
    double last_level_norm = 0.0;
    double actual_sup = 0.0;
    std::string stop_reason;
    GridSpec grid;
};

/// Schedule constants of the iteration.
double moser_a(double r0, double r_inf);
double moser_b(double a, double r_inf);
double moser_c(int n, double a, double b, double kappa, double c_bar = 1.0);
/// R_n = R_0 - sum_{k=1..n} 1/(a k^2).
double moser_radius(int n, double r0, double a);
/// log of Prod_{k=1..n} C_k^{1/(2 kappa^k)}.
double moser_log_product(int n, double a, double b, double kappa, double c_bar = 1.0);

/// Moser iteration on a nonnegative sub-solution, cylinders Q_{R_n}(center) of the given kind.
/// Stops at n_max or when the powered normalized field would leave the double range.
/// A field vanishing on Q0 gives a trace with no levels and zero sups.
MoserTrace moser_iterate(const GridField& f, const CylinderSpec& q0, double r_inf, double kappa = 3.0,
                         int n_max = 12, double c_bar = 1.0);

/// f / (2 ||f||_{L^inf(Q0)}): the field the iteration powers.
GridField moser_normalize(const GridField& f, const CylinderSpec& q0);

/// (4d + 2)(1/(2q) - 1/4) + (3/2) q - 1.
double gamma_d(int d, double q);

struct GehringSample {
    Point center;
    double radius = 0.0;
    /// Mean of g^q over Q_R, (mean of g over Q_8R)^q, mean of g^q over Q_8R.
    double mean_gq_small = 0.0;
    double mean_g_big_pow = 0.0;
    double mean_gq_big = 0.0;
    double theta = 0.0;
};

struct GehringScan {
    double q = 0.0;
    double b_ref = 0.0;
    double theta0 = 0.5;
    double max_theta = 0.0;
    double fraction_below = 0.0;
    double gamma = 0.0;
    std::vector<GehringSample> samples;
};

struct GradL2EpsResult {
    EstimateReport report;
    GehringScan scan;
};

/// int_{Q2} |d_v f|^{2+eps} / (int_{Q1} |d_v f|^2)^{(2+eps)/2}, plus the reverse Hoelder scan of
/// g = |d_v f|^{q_low} with q = 2/q_low over cylinders Q_R(z) with Q_8R(z) inside Q1.
GradL2EpsResult verify_grad_l2eps(const GridField& f, const CylinderSpec& q2, const CylinderSpec& q1, double eps = 0.1,
                                  double q_low = 1.5, double theta0 = 0.5, const Caps& caps = kFrozenCaps);

/// "caccio_mean": int_{QQ_R} |d_v f|^2 over R^{-2} int_{QQ_2R} |f - f~_2R|^2.
/// "poincare": sup_t int_{QQ_R^t} |f - f~_R|^2 over int_{QQ_3R} |d_v f|^2 (scale-free form).
/// QQ are sheared cylinders at z0. Throws when QQ_3R(z0) does not fit the grid (54 R^3 <= Lx so no
/// row of QQ_3R wraps onto itself).
std::vector<EstimateReport> verify_weighted_mean(const GridField& f, const Point& z0, double R,
                                                 const Caps& caps = kFrozenCaps);

struct HolderEstimate {
    std::vector<double> scales;
    std::vector<double> oscillations;
    double noise_floor = 0.0;
    double alpha_hat = 0.0;
    double lambda_hat = 0.0;
    bool degenerate = false;
};

/// Oscillation decay over straight cylinders Q_r(z0), r in `scales`, on f normalized by its
/// largest-scale oscillation. alpha_hat is the log-log slope over scales above noise_floor and
/// lambda_hat = 2 (1 - max osc_{r/2} / osc_r) over consecutive dyadic pairs.
HolderEstimate estimate_holder(const GridField& f, const Point& z0, std::span<const double> scales,
                               double noise_floor = 0.0);

/// Ten times the relative L^inf error of the A = 1 Gaussian oracle on this grid.
double oracle_noise_floor(const GridSpec& grid);

struct DeGiorgiParams {
    double delta1 = 0.0;
    double delta2 = 0.0;
    double alpha_hat = 0.0;
    std::size_t ensemble_size = 0;
    std::size_t qualifying = 0;
    double c0_hat = 0.0;
    /// Band measure per member (NaN when the member does not qualify).
    std::vector<double> band_measures;
    bool valid = false;
    std::string status;
};

/// Boxes of the oscillation lemmas around z0: B_r(x0) x B_r(v0) x (t0 - r, t0].
CylinderSpec degiorgi_box(const Point& z0, double r);

/// Level-set measures of one member normalized on Q2, inside Q1 = degiorgi_box(z0, 1).
struct DeGiorgiMember {
    double upper = 0.0;
    double lower = 0.0;
    double band = 0.0;
    /// verify_sup_bound(f_+, Q1, Q_1/2) ratio; NaN when f_+ vanishes on Q1.
    double sup_ratio = kNaN;
};

DeGiorgiMember measure_degiorgi(const GridField& f, const Point& z0);

/// Hypothesis filter over measured members; same defaults as check_degiorgi.
DeGiorgiParams combine_degiorgi(std::span<const DeGiorgiMember> members, int d, double delta1 = kNaN,
                                double delta2 = kNaN, double c0_hat = kNaN, std::size_t min_qualifying = 10);

/// Members normalized to |f| <= 1 on Q2 (all-zero members are rejected). NaN deltas select the
/// defaults |Q1|/2 and 1/(4 C0^2); NaN c0_hat is measured as the ensemble max of
/// verify_sup_bound(f_+, Q1, Q_1/2).
DeGiorgiParams check_degiorgi(std::span<const GridField> members, const Point& z0, double delta1 = kNaN,
                              double delta2 = kNaN, double c0_hat = kNaN, std::size_t min_qualifying = 10);

/// |f| <= 1 on Q2 after dividing by the sup.
GridField normalize_on(const GridField& f, const CylinderSpec& q2);

struct DoublingRow {
    int k = 0;
    double measure_nonpositive = 0.0;
    double measure_band = 0.0;
    double measure_upper = 0.0;
    double measure_nonnegative = 0.0;
};

struct DoublingLog {
    std::vector<DoublingRow> rows;
    std::size_t monotonicity_exceptions = 0;
    int k0 = 0;
    /// First k with |{f_k >= 0} cap Q1| <= delta2, or -1.
    int k_delta2 = -1;
    double sup_half = 0.0;
    double bound = 0.0;
    bool bound_holds = false;
    bool conclusive = false;
    std::string status;
    GridSpec grid;
};

/// f_1 = f, f_{k+1} = 2 f_k - 1 on the cells of Q1 = degiorgi_box(z0, 1).
DoublingLog doubling_iteration(const GridField& f, const Point& z0, double alpha_hat, double c0_hat,
                               int max_iterations = 200);

// CSV emitters. Columns are fixed; doubles use %.17g so reruns are byte-identical. Moser and doubling
// rows carry seed,nt,nx,nv like the report rows.
void write_reports_csv(std::ostream& os, std::span<const EstimateReport> reports, bool header = true);
void write_moser_csv(std::ostream& os, const MoserTrace& trace, std::uint64_t seed, bool header = true);
void write_doubling_csv(std::ostream& os, const DoublingLog& log, std::uint64_t seed, bool header = true);
std::string format_double(double x);

}  // namespace kinreg
