#include "kinreg/geometry.hpp"

#include <cmath>
#include <numbers>

namespace kinreg {

namespace {

void require_same_dim(const Point& a, const Point& b) {
    if (a.x.size() != b.x.size() || a.v.size() != b.v.size())
        throw std::invalid_argument("points of different dimension");
}

}  // namespace

Point::Point(std::vector<double> x_, std::vector<double> v_, double t_)
    : x(std::move(x_)), v(std::move(v_)), t(t_) {
    if (x.size() != v.size()) throw std::invalid_argument("Point: x and v must have the same dimension");
}

Point::Point(double x_, double v_, double t_) : x{x_}, v{v_}, t(t_) {}

bool Point::finite() const {
    for (double c : x)
        if (!std::isfinite(c)) return false;
    for (double c : v)
        if (!std::isfinite(c)) return false;
    return std::isfinite(t);
}

CylinderSpec::CylinderSpec(Point center_, double radius_, CylinderKind kind_)
    : center(std::move(center_)), radius(radius_), kind(kind_) {
    if (!(radius > 0.0)) throw std::invalid_argument("cylinder radius must be positive");
    if (kind == CylinderKind::Box) box = {radius * radius * radius, radius, radius * radius};
}

CylinderSpec CylinderSpec::make_box(Point center, double x_radius, double v_radius, double duration) {
    if (!(x_radius > 0.0 && v_radius > 0.0 && duration > 0.0))
        throw std::invalid_argument("box extents must be positive");
    CylinderSpec c(std::move(center), 1.0, CylinderKind::Box);
    c.box = {x_radius, v_radius, duration};
    return c;
}

Extents CylinderSpec::extents() const {
    if (kind == CylinderKind::Box) return box;
    return {radius * radius * radius, radius, radius * radius};
}

CylinderSpec CylinderSpec::with_radius(double r) const {
    CylinderSpec c = *this;
    if (!(r > 0.0)) throw std::invalid_argument("cylinder radius must be positive");
    if (kind == CylinderKind::Box) {
        const double s = r / radius;
        c.box = {box.x_radius * s, box.v_radius * s, box.duration * s};
    }
    c.radius = r;
    return c;
}

ScalingParams::ScalingParams(double r_, Point origin_) : r(r_), origin(std::move(origin_)) {
    if (!(r > 0.0)) throw std::invalid_argument("scaling factor must be positive");
}

double unit_ball_volume(int d) {
    if (d < 1) throw std::invalid_argument("dimension must be >= 1");
    const double h = 0.5 * d;
    return std::pow(std::numbers::pi, h) / std::tgamma(h + 1.0);
}

bool cylinder_contains(const CylinderSpec& spec, std::span<const double> x, std::span<const double> v,
                       double t) {
    const Point& c = spec.center;
    const std::size_t d = c.x.size();
    if (x.size() != d || v.size() != d) throw std::invalid_argument("point dimension mismatch");

    const Extents e = spec.extents();
    const double dt = t - c.t;
    if (!(dt > -e.duration && dt <= 0.0)) return false;

    double vv = 0.0, xx = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        const double dv = v[k] - c.v[k];
        double dx = x[k] - c.x[k];
        switch (spec.kind) {
            case CylinderKind::Straight:
            case CylinderKind::Box:
                break;
            case CylinderKind::Slanted:
                dx -= dt * c.v[k];
                break;
            case CylinderKind::Sheared:
                dx -= dt * dv;
                break;
        }
        vv += dv * dv;
        xx += dx * dx;
    }
    return vv < e.v_radius * e.v_radius && xx < e.x_radius * e.x_radius;
}

bool cylinder_contains(const CylinderSpec& spec, const Point& z) {
    return cylinder_contains(spec, z.x, z.v, z.t);
}

double cylinder_volume(const CylinderSpec& spec, int d) {
    const Extents e = spec.extents();
    const double ball = unit_ball_volume(d);
    return ball * std::pow(e.x_radius, d) * ball * std::pow(e.v_radius, d) * e.duration;
}

Point kinetic_rescale_point(const Point& z, const ScalingParams& s) {
    require_same_dim(z, s.origin);
    const double r = s.r;
    Point out = z;
    for (std::size_t k = 0; k < z.x.size(); ++k) {
        out.x[k] = (z.x[k] - s.origin.x[k]) / (r * r * r);
        out.v[k] = (z.v[k] - s.origin.v[k]) / r;
    }
    out.t = (z.t - s.origin.t) / (r * r);
    return out;
}

Point kinetic_unscale_point(const Point& z, const ScalingParams& s) {
    require_same_dim(z, s.origin);
    const double r = s.r;
    Point out = z;
    for (std::size_t k = 0; k < z.x.size(); ++k) {
        out.x[k] = s.origin.x[k] + r * r * r * z.x[k];
        out.v[k] = s.origin.v[k] + r * z.v[k];
    }
    out.t = s.origin.t + r * r * z.t;
    return out;
}

CylinderSpec cylinder_rescale(const CylinderSpec& spec, const ScalingParams& s) {
    if (spec.kind == CylinderKind::Slanted)
        throw std::invalid_argument("cylinder_rescale: slanted cylinders change their slant under rescaling");
    if (!(s.origin == spec.center))
        throw std::invalid_argument(
            "cylinder_rescale: origin must equal the cylinder center (otherwise the image is slanted)");

    const std::size_t d = spec.center.dim();
    Point zero(std::vector<double>(d, 0.0), std::vector<double>(d, 0.0), 0.0);
    CylinderSpec out = spec;
    out.center = std::move(zero);
    out.radius = spec.radius / s.r;
    if (spec.kind == CylinderKind::Box) {
        const double r = s.r;
        out.box = {spec.box.x_radius / (r * r * r), spec.box.v_radius / r, spec.box.duration / (r * r)};
    }
    return out;
}

}  // namespace kinreg
