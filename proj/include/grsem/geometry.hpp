#pragma once

#include "grsem/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace grsem {

enum class CurveKind { circle, ellipse, flower };

/// Closed, counterclockwise-parametrized hole boundary on t in [0, 2*pi).
///
/// Flower: r(t) = scale * (r0 + r1 * sin(k t)), x = center + r(t) (cos t, sin t).
/// Ellipse: x = center + (a cos t, b sin t). Circle is the ellipse with a = b.
class ParametricCurve {
public:
    static ParametricCurve circle(Point center, double radius);
    static ParametricCurve ellipse(Point center, double a, double b);
    static ParametricCurve flower(Point center, double r0, double r1, int petals, double scale);

    /// The five-petal flower hole used in the experiments.
    static ParametricCurve standard_flower();
    /// The 0.2 x 0.1 elliptical hole used in the experiments.
    static ParametricCurve standard_ellipse();

    [[nodiscard]] CurveKind kind() const { return kind_; }
    [[nodiscard]] const Point& center() const { return center_; }
    [[nodiscard]] double param(int i) const { return p_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] std::string describe() const;

    [[nodiscard]] Point eval(double t) const;
    /// First (order 1) or second (order 2) derivative with respect to t.
    [[nodiscard]] Vec2 derivative(double t, int order) const;
    [[nodiscard]] Vec2 tangent(double t) const;
    /// Unit normal pointing out of the computational domain, i.e. into the hole.
    [[nodiscard]] Vec2 normal(double t) const;
    /// Unsigned curvature |x'y'' - y'x''| / |x'|^3.
    [[nodiscard]] double curvature(double t) const;

    /// Axis-aligned bounding box as (min corner, max corner).
    [[nodiscard]] std::pair<Point, Point> bounding_box() const;

private:
    ParametricCurve(CurveKind kind, Point center, std::vector<double> p)
        : kind_(kind), center_(std::move(center)), p_(std::move(p)) {}

    CurveKind kind_;
    Point center_;
    std::vector<double> p_;
};

/// Parameter of the point on `curve` closest to `p`.
///
/// A 64-sample scan over the period (plus `guess`, when given) picks the
/// starting branch; a safeguarded Newton iteration on d/dt |p - c(t)|^2
/// with bisection fallback then drives the stationarity residual
/// (p - c(t)) . c'(t) below 1e-12 (scaled). Throws GeometryError after 50
/// iterations without convergence.
double closest_point(const ParametricCurve& curve, const Point& p, std::optional<double> guess = std::nullopt);

/// Same, but the search is restricted to [guess - half_window, guess + half_window],
/// which keeps node projection during elevation on the branch of its edge.
/// The result is not wrapped to [0, 2*pi).
double closest_point_local(const ParametricCurve& curve, const Point& p, double guess, double half_window = 0.5);

double distance_to_curve(const ParametricCurve& curve, const Point& p);

enum class BcKind { dirichlet, neumann };

struct Hole {
    ParametricCurve curve;
    BcKind bc = BcKind::dirichlet;
};

enum class Containment { inside, outside, boundary };

/// Unit square (or general box) minus a set of curved holes.
struct Domain {
    Point lower{0.0, 0.0};
    Point upper{1.0, 1.0};
    BcKind outer_bc = BcKind::dirichlet;
    std::vector<Hole> holes;

    /// Throws GeometryError if a hole leaves the box or two holes overlap.
    void validate() const;
    [[nodiscard]] double area() const;
};

/// Hole area by the shoelace formula on a fine polygonization.
double enclosed_area(const ParametricCurve& curve, int segments = 1 << 14);

/// Classifies p against the domain. Points on the outer box count as inside;
/// points within 1e-9 of a hole curve are `boundary`.
Containment contains(const Domain& domain, const Point& p);

/// True if p lies inside the closed curve (hole interior); exact away from the curve.
bool inside_curve(const ParametricCurve& curve, const Point& p);

}  // namespace grsem
