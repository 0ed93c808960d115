#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace kinreg {

/// A point z = (x, v, t) of phase space-time. x and v have the same dimension d.
struct Point {
    std::vector<double> x;
    std::vector<double> v;
    double t = 0.0;

    Point() = default;
    Point(std::vector<double> x_, std::vector<double> v_, double t_);
    /// Convenience constructor for d = 1.
    Point(double x_, double v_, double t_);

    [[nodiscard]] std::size_t dim() const { return x.size(); }
    [[nodiscard]] bool finite() const;

    friend bool operator==(const Point&, const Point&) = default;
};

enum class CylinderKind {
    /// B_{R^3}(x0) x B_R(v0) x (t0 - R^2, t0]
    Straight,
    /// |x - x0 - (t - t0) v0| < R^3, |v - v0| < R, t in (t0 - R^2, t0]
    Slanted,
    /// z0 + {(x,v,t) : |x - t v| < R^3, |v| < R, t in (-R^2, 0]}
    Sheared,
    /// Non-kinetic box B_a(x0) x B_b(v0) x (t0 - tau, t0] with explicit extents.
    Box,
};

/// Explicit extents of a cylinder: x-radius, v-radius and time length.
struct Extents {
    double x_radius = 0.0;
    double v_radius = 0.0;
    double duration = 0.0;
};

struct CylinderSpec {
    Point center;
    double radius = 1.0;
    CylinderKind kind = CylinderKind::Straight;
    /// Only read for Box cylinders.
    Extents box;

    CylinderSpec() = default;
    CylinderSpec(Point center_, double radius_, CylinderKind kind_ = CylinderKind::Straight);

    /// Box of the oscillation lemmas: B_a(x0) x B_b(v0) x (t0 - tau, t0].
    static CylinderSpec make_box(Point center, double x_radius, double v_radius, double duration);

    /// (R^3, R, R^2) for kinetic kinds, the explicit extents for Box.
    [[nodiscard]] Extents extents() const;
    /// Same center and kind, new radius. Box extents scale linearly with the radius.
    [[nodiscard]] CylinderSpec with_radius(double r) const;
};

struct ScalingParams {
    double r = 1.0;
    Point origin;

    ScalingParams() = default;
    ScalingParams(double r_, Point origin_);
};

/// Volume of the Euclidean unit ball in R^d.
double unit_ball_volume(int d);

/// Membership using raw coordinates. Strict in space, half-open (t0 - T, t0] in time.
bool cylinder_contains(const CylinderSpec& spec, std::span<const double> x, std::span<const double> v,
                       double t);
bool cylinder_contains(const CylinderSpec& spec, const Point& z);

/// |B_{R^3}| |B_R| R^2; identical for Straight, Slanted and Sheared.
double cylinder_volume(const CylinderSpec& spec, int d);

/// ((x - x0)/r^3, (v - v0)/r, (t - t0)/r^2).
Point kinetic_rescale_point(const Point& z, const ScalingParams& s);
/// Inverse of kinetic_rescale_point: x0 + r^3 x, v0 + r v, t0 + r^2 t.
Point kinetic_unscale_point(const Point& z, const ScalingParams& s);

/// Image of a cylinder under kinetic_rescale_point. The origin must equal the center:
/// rescaling about any other point turns a straight cylinder into a slanted one.
/// Slanted cylinders are rejected for the same reason (their slant velocity would change).
CylinderSpec cylinder_rescale(const CylinderSpec& spec, const ScalingParams& s);

}  // namespace kinreg
