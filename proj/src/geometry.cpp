#include "grsem/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace grsem {

namespace {

constexpr double kTwoPi = 2.0 * kPi;
constexpr int kScanSamples = 64;
constexpr int kMaxNewton = 50;
constexpr int kPolygonSegments = 4096;
constexpr double kAmbiguous = 1e-9;

double wrap(double t) {
    t = std::fmod(t, kTwoPi);
    return t < 0.0 ? t + kTwoPi : t;
}

/// d/dt of half the squared distance and its derivative.
std::pair<double, double> stationarity(const ParametricCurve& c, const Point& p, double t) {
    const Vec2 r = c.eval(t) - p;
    const Vec2 d1 = c.derivative(t, 1);
    const Vec2 d2 = c.derivative(t, 2);
    return {r.dot(d1), d1.squaredNorm() + r.dot(d2)};
}

/// Safeguarded Newton on g(t) = (c(t) - p).c'(t) inside [lo, hi] with g(lo) < 0 < g(hi).
double bracketed_newton(const ParametricCurve& c, const Point& p, double lo, double hi, double t) {
    for (int it = 0; it < kMaxNewton; ++it) {
        auto [g, dg] = stationarity(c, p, t);
        const double speed = c.derivative(t, 1).norm();
        if (std::abs(g) <= 1e-13 * speed * std::max(1.0, (c.eval(t) - p).norm())) {
            return t;
        }
        if (g < 0.0) {
            lo = t;
        } else {
            hi = t;
        }
        double next = (dg > 0.0) ? t - g / dg : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - t) < 1e-16 * std::max(1.0, std::abs(t))) {
            return next;
        }
        t = next;
        if (hi - lo < 1e-15) {
            return t;
        }
    }
    throw GeometryError("closest_point: no convergence after 50 iterations");
}

/// Refines a local minimum of the distance near `t`; `width` bounds the bracket search.
double refine_minimum(const ParametricCurve& c, const Point& p, double t, double width) {
    auto g = [&](double s) { return stationarity(c, p, s).first; };
    double lo = t - width;
    double hi = t + width;
    // Expand until the derivative changes sign from negative to positive.
    for (int k = 0; k < 8 && !(g(lo) <= 0.0 && g(hi) >= 0.0); ++k) {
        if (g(lo) > 0.0) {
            lo -= width;
        }
        if (g(hi) < 0.0) {
            hi += width;
        }
    }
    if (!(g(lo) <= 0.0 && g(hi) >= 0.0)) {
        throw GeometryError("closest_point: unable to bracket the minimum");
    }
    return bracketed_newton(c, p, lo, hi, std::clamp(t, lo, hi));
}

}  // namespace

ParametricCurve ParametricCurve::circle(Point center, double radius) {
    return {CurveKind::circle, center, {radius, radius}};
}

ParametricCurve ParametricCurve::ellipse(Point center, double a, double b) {
    return {CurveKind::ellipse, center, {a, b}};
}

ParametricCurve ParametricCurve::flower(Point center, double r0, double r1, int petals, double scale) {
    return {CurveKind::flower, center, {r0, r1, static_cast<double>(petals), scale}};
}

ParametricCurve ParametricCurve::standard_flower() { return flower({0.5, 0.5}, 0.25, 0.1, 5, 1.0 / 3.0); }

ParametricCurve ParametricCurve::standard_ellipse() { return ellipse({0.5, 0.5}, 0.2, 0.1); }

std::string ParametricCurve::describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
        case CurveKind::circle: os << "circle " << center_.x() << ' ' << center_.y() << ' ' << p_[0]; break;
        case CurveKind::ellipse:
            os << "ellipse " << center_.x() << ' ' << center_.y() << ' ' << p_[0] << ' ' << p_[1];
            break;
        case CurveKind::flower:
            os << "flower " << center_.x() << ' ' << center_.y() << ' ' << p_[0] << ' ' << p_[1] << ' '
               << p_[2] << ' ' << p_[3];
            break;
    }
    return os.str();
}

Point ParametricCurve::eval(double t) const {
    const double c = std::cos(t);
    const double s = std::sin(t);
    if (kind_ == CurveKind::flower) {
        const double r = p_[3] * (p_[0] + p_[1] * std::sin(p_[2] * t));
        return center_ + r * Vec2(c, s);
    }
    return center_ + Vec2(p_[0] * c, p_[1] * s);
}

Vec2 ParametricCurve::derivative(double t, int order) const {
    const double c = std::cos(t);
    const double s = std::sin(t);
    if (kind_ == CurveKind::flower) {
        const double k = p_[2];
        const double r = p_[3] * (p_[0] + p_[1] * std::sin(k * t));
        const double r1 = p_[3] * p_[1] * k * std::cos(k * t);
        const double r2 = -p_[3] * p_[1] * k * k * std::sin(k * t);
        if (order == 1) {
            return {r1 * c - r * s, r1 * s + r * c};
        }
        return {r2 * c - 2.0 * r1 * s - r * c, r2 * s + 2.0 * r1 * c - r * s};
    }
    if (order == 1) {
        return {-p_[0] * s, p_[1] * c};
    }
    return {-p_[0] * c, -p_[1] * s};
}

Vec2 ParametricCurve::tangent(double t) const {
    const Vec2 d = derivative(t, 1);
    const double n = d.norm();
    if (n < 1e-13) {
        throw GeometryError("degenerate tangent at t = " + std::to_string(t));
    }
    return d / n;
}

Vec2 ParametricCurve::normal(double t) const {
    // Counterclockwise traversal keeps the hole on the left.
    const Vec2 u = tangent(t);
    return {-u.y(), u.x()};
}

double ParametricCurve::curvature(double t) const {
    const Vec2 d1 = derivative(t, 1);
    const double speed = d1.norm();
    if (speed < 1e-13) {
        throw GeometryError("degenerate tangent at t = " + std::to_string(t));
    }
    const Vec2 d2 = derivative(t, 2);
    return std::abs(cross(d1, d2)) / (speed * speed * speed);
}

std::pair<Point, Point> ParametricCurve::bounding_box() const {
    if (kind_ == CurveKind::flower) {
        const double rmax = p_[3] * (p_[0] + std::abs(p_[1]));
        return {center_ - Vec2(rmax, rmax), center_ + Vec2(rmax, rmax)};
    }
    return {center_ - Vec2(p_[0], p_[1]), center_ + Vec2(p_[0], p_[1])};
}

double closest_point(const ParametricCurve& curve, const Point& p, std::optional<double> guess) {
    double best_t = 0.0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kScanSamples; ++i) {
        const double t = kTwoPi * i / kScanSamples;
        const double d = (curve.eval(t) - p).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best_t = t;
        }
    }
    double width = kTwoPi / kScanSamples;
    if (guess) {
        const double d = (curve.eval(*guess) - p).squaredNorm();
        if (d <= best_d) {
            best_t = *guess;
            width *= 0.5;
        }
    }
    return wrap(refine_minimum(curve, p, best_t, width));
}

double closest_point_local(const ParametricCurve& curve, const Point& p, double guess, double half) {
    constexpr int n = 32;
    double best_t = guess;
    double best_d = (curve.eval(guess) - p).squaredNorm();
    for (int i = 0; i <= n; ++i) {
        const double t = guess - half + 2.0 * half * i / n;
        const double d = (curve.eval(t) - p).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best_t = t;
        }
    }
    return refine_minimum(curve, p, best_t, 2.0 * half / n);
}

double distance_to_curve(const ParametricCurve& curve, const Point& p) {
    return (curve.eval(closest_point(curve, p)) - p).norm();
}

double enclosed_area(const ParametricCurve& curve, int segments) {
    double a = 0.0;
    Point prev = curve.eval(0.0);
    for (int i = 1; i <= segments; ++i) {
        const Point cur = curve.eval(kTwoPi * i / segments);
        a += cross(prev, cur);
        prev = cur;
    }
    return 0.5 * std::abs(a);
}

bool inside_curve(const ParametricCurve& curve, const Point& p) {
    // Winding number of the 4096-gon.
    int winding = 0;
    double min_edge_dist = std::numeric_limits<double>::infinity();
    Point a = curve.eval(0.0);
    for (int i = 1; i <= kPolygonSegments; ++i) {
        const Point b = curve.eval(kTwoPi * i / kPolygonSegments);
        const Vec2 ab = b - a;
        const double len2 = ab.squaredNorm();
        const double s = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
        min_edge_dist = std::min(min_edge_dist, (a + s * ab - p).norm());
        if (a.y() <= p.y()) {
            if (b.y() > p.y() && orient(a, b, p) > 0.0) {
                ++winding;
            }
        } else if (b.y() <= p.y() && orient(a, b, p) < 0.0) {
            --winding;
        }
        a = b;
    }
    // Near the polygon, chord sagitta can flip the answer: decide on the exact curve.
    if (min_edge_dist < 1e-4) {
        const double t = closest_point(curve, p);
        return (p - curve.eval(t)).dot(curve.normal(t)) > 0.0;
    }
    return winding != 0;
}

Containment contains(const Domain& domain, const Point& p) {
    constexpr double tol = 1e-12;
    if (p.x() < domain.lower.x() - tol || p.y() < domain.lower.y() - tol || p.x() > domain.upper.x() + tol ||
        p.y() > domain.upper.y() + tol) {
        return Containment::outside;
    }
    for (const Hole& h : domain.holes) {
        const auto [lo, hi] = h.curve.bounding_box();
        if (p.x() < lo.x() - 1e-6 || p.y() < lo.y() - 1e-6 || p.x() > hi.x() + 1e-6 || p.y() > hi.y() + 1e-6) {
            continue;
        }
        if (distance_to_curve(h.curve, p) <= kAmbiguous) {
            return Containment::boundary;
        }
        if (inside_curve(h.curve, p)) {
            return Containment::outside;
        }
    }
    return Containment::inside;
}

void Domain::validate() const {
    if (!(upper.x() > lower.x() && upper.y() > lower.y())) {
        throw GeometryError("domain box is degenerate");
    }
    for (std::size_t i = 0; i < holes.size(); ++i) {
        const auto [lo, hi] = holes[i].curve.bounding_box();
        if (lo.x() <= lower.x() || lo.y() <= lower.y() || hi.x() >= upper.x() || hi.y() >= upper.y()) {
            throw GeometryError("hole " + std::to_string(i) + " is not strictly inside the outer boundary");
        }
        for (int k = 0; k < 256; ++k) {
            const Point q = holes[i].curve.eval(kTwoPi * k / 256);
            for (std::size_t j = 0; j < holes.size(); ++j) {
                if (j != i && inside_curve(holes[j].curve, q)) {
                    throw GeometryError("holes " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
                }
            }
        }
    }
}

double Domain::area() const {
    double a = (upper.x() - lower.x()) * (upper.y() - lower.y());
    for (const Hole& h : holes) {
        a -= enclosed_area(h.curve);
    }
    return a;
}

}  // namespace grsem
