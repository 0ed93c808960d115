#pragma once

#include <limits>

namespace kinreg {

/// Pass caps for every estimate. Energy caps multiply the radius shape
/// 1/(R0^2 - R1^2) + R0/(R0^3 - R1^3) + 1/(R0 - R1)^2; all others bound the ratio directly.
struct Caps {
    double energy_grad = std::numeric_limits<double>::infinity();
    double energy_lqv = std::numeric_limits<double>::infinity();
    double energy_linf = std::numeric_limits<double>::infinity();
    double averaging_l2 = std::numeric_limits<double>::infinity();
    double averaging_lq = std::numeric_limits<double>::infinity();
    double mixed_gain = std::numeric_limits<double>::infinity();
    double integrability_gain = std::numeric_limits<double>::infinity();
    double sup_bound = std::numeric_limits<double>::infinity();
    double grad_l2eps = std::numeric_limits<double>::infinity();
    double caccio_mean = std::numeric_limits<double>::infinity();
    double poincare = std::numeric_limits<double>::infinity();
};

/// 1.5 x the maximum ratio over the calibration ensemble (configs/calibration.yaml: seeds 1001-1020,
/// checkerboard and laminate fields with lambda = 0.2, Lambda = 1, every grid of the ladder).
/// Energy entries are divided by energy_shape(1, 1/2). Regenerate with
/// `kinreg sweep --config configs/calibration.yaml` and the max_ratio rows of aggregate.csv.
inline constexpr Caps kFrozenCaps{
    .energy_grad = 0.00574387,
    .energy_lqv = 0.00389002,
    .energy_linf = 0.0160881,
    .averaging_l2 = 0.107551,
    .averaging_lq = 0.0545187,
    .mixed_gain = 0.302487,
    .integrability_gain = 0.385056,
    .sup_bound = 1.12741,
    .grad_l2eps = 0.0322269,
    .caccio_mean = 0.0302452,
    .poincare = 0.000739002,
};

/// 1.5 x the ensemble max of sup_{Q_1/2} f_+ / ||f_+||_{L^2(Q1)} on the normalized oscillation boxes
/// of the same run (sup_ratio column of degiorgi.csv); sets delta2 = 1/(4 C0^2).
inline constexpr double kFrozenC0Hat = 1.66095;

/// Calibration margin applied to ensemble maxima when freezing caps.
inline constexpr double kCalibrationMargin = 1.5;

}  // namespace kinreg
