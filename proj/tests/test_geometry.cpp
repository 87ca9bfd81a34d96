#include "grsem/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace grsem;

namespace {

// Curvature from central differences of eval(), independent of derivative().
double fd_curvature(const ParametricCurve& c, double t) {
    const double h = 1e-4;
    const Point xm = c.eval(t - h);
    const Point x0 = c.eval(t);
    const Point xp = c.eval(t + h);
    const Vec2 d1 = (xp - xm) / (2 * h);
    const Vec2 d2 = (xp - 2 * x0 + xm) / (h * h);
    return std::abs(cross(d1, d2)) / std::pow(d1.norm(), 3);
}

// Even-odd ray casting against a fine polygonization of every hole.
bool ray_cast_inside_hole(const ParametricCurve& c, const Point& p, int n = 20000) {
    bool inside = false;
    for (int i = 0; i < n; ++i) {
        const Point a = c.eval(2 * kPi * i / n);
        const Point b = c.eval(2 * kPi * (i + 1) / n);
        if ((a.y() > p.y()) != (b.y() > p.y())) {
            const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
            if (x > p.x()) {
                inside = !inside;
            }
        }
    }
    return inside;
}

}  // namespace

TEST(Curve, CircleCurvatureIsInverseRadius) {
    const auto c = ParametricCurve::circle({0.5, 0.5}, 0.2);
    for (double t : {0.0, 1.0, 2.5, 6.0}) {
        EXPECT_NEAR(c.curvature(t), 5.0, 1e-12);
    }
}

TEST(Curve, FlowerCurvatureMatchesFiniteDifferences) {
    const auto c = ParametricCurve::standard_flower();
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double t = 2 * kPi * (i + 0.37) / 200;
        worst = std::max(worst, std::abs(c.curvature(t) - fd_curvature(c, t)) / fd_curvature(c, t));
    }
    EXPECT_LT(worst, 1e-5);
}

TEST(Curve, EllipseCurvatureAtVertices) {
    const auto c = ParametricCurve::standard_ellipse();
    EXPECT_NEAR(c.curvature(0.0), 0.2 / (0.1 * 0.1), 1e-10);      // a / b^2
    EXPECT_NEAR(c.curvature(kPi / 2), 0.1 / (0.2 * 0.2), 1e-10);  // b / a^2
}

TEST(Curve, NormalPointsIntoTheHoleAndIsUnit) {
    for (const auto& c : {ParametricCurve::standard_flower(), ParametricCurve::standard_ellipse()}) {
        for (int i = 0; i < 50; ++i) {
            const double t = 2 * kPi * i / 50;
            const Vec2 n = c.normal(t);
            EXPECT_NEAR(n.norm(), 1.0, 1e-14);
            EXPECT_NEAR(n.dot(c.tangent(t)), 0.0, 1e-14);
            EXPECT_TRUE(inside_curve(c, c.eval(t) + 1e-4 * n));
        }
    }
}

TEST(ClosestPoint, AgreesWithDenseScan) {
    const auto c = ParametricCurve::standard_flower();
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.3, 0.7);
    const int n_scan = 1000000;
    std::vector<Point> samples(n_scan);
    for (int i = 0; i < n_scan; ++i) {
        samples[static_cast<std::size_t>(i)] = c.eval(2 * kPi * i / n_scan);
    }
    for (int k = 0; k < 20; ++k) {
        const Point p(u(rng), u(rng));
        double best = 1e300;
        for (const auto& s : samples) {
            best = std::min(best, (s - p).squaredNorm());
        }
        const double t = closest_point(c, p);
        // The scan spacing is ~6e-7, so the scan distance is accurate to ~1e-12 in the square.
        EXPECT_NEAR((c.eval(t) - p).norm(), std::sqrt(best), 1e-9);
        // Stationarity residual.
        EXPECT_LT(std::abs((p - c.eval(t)).dot(c.tangent(t))), 1e-10);
    }
}

TEST(ClosestPoint, PointOnCurveReturnsItsParameter) {
    const auto c = ParametricCurve::standard_ellipse();
    for (double t : {0.1, 1.3, 3.0, 5.9}) {
        const double s = closest_point(c, c.eval(t));
        EXPECT_LT((c.eval(s) - c.eval(t)).norm(), 1e-12);
    }
}

TEST(ClosestPoint, LocalSearchStaysOnItsBranch) {
    const auto c = ParametricCurve::standard_flower();
    const double t0 = 0.3;
    const double s = closest_point_local(c, c.eval(t0) + Vec2(1e-4, 0), t0, 0.2);
    EXPECT_NEAR(s, t0, 0.01);
}

TEST(Containment, MatchesRayCasting) {
    Domain d;
    d.holes.push_back({ParametricCurve::standard_flower(), BcKind::neumann});
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.3, 0.7);
    for (int k = 0; k < 400; ++k) {
        const Point p(u(rng), u(rng));
        if (distance_to_curve(d.holes[0].curve, p) < 1e-6) {
            continue;
        }
        const bool in_hole = ray_cast_inside_hole(d.holes[0].curve, p);
        EXPECT_EQ(inside_curve(d.holes[0].curve, p), in_hole);
        EXPECT_EQ(contains(d, p), in_hole ? Containment::outside : Containment::inside);
    }
    EXPECT_EQ(contains(d, Point(1.5, 0.5)), Containment::outside);
    EXPECT_EQ(contains(d, d.holes[0].curve.eval(0.4)), Containment::boundary);
}

TEST(Area, EllipseHoleArea) {
    EXPECT_NEAR(enclosed_area(ParametricCurve::standard_ellipse()), kPi * 0.02, 1e-8);
    Domain d;
    d.holes.push_back({ParametricCurve::standard_ellipse(), BcKind::dirichlet});
    EXPECT_NEAR(d.area(), 1.0 - kPi * 0.02, 1e-8);
}

TEST(Domain, ValidateRejectsHoleOutsideBox) {
    Domain d;
    d.holes.push_back({ParametricCurve::circle({0.95, 0.5}, 0.2), BcKind::dirichlet});
    EXPECT_THROW(d.validate(), GeometryError);
}

TEST(Curve, EvaluationExamples) {
    const Point f = ParametricCurve::standard_flower().eval(0.0);
    EXPECT_NEAR(f.x(), 0.25 / 3 + 0.5, 1e-15);
    EXPECT_NEAR(f.y(), 0.5, 1e-15);
    const Point e = ParametricCurve::standard_ellipse().eval(0.0);
    EXPECT_NEAR(e.x(), 0.7, 1e-15);
    EXPECT_NEAR(e.y(), 0.5, 1e-15);
    const Point c = ParametricCurve::circle({0, 0}, 1.0).eval(kPi / 2);
    EXPECT_NEAR(c.x(), 0.0, 1e-15);
    EXPECT_NEAR(c.y(), 1.0, 1e-15);
}

TEST(Curve, EvaluationIsPeriodic) {
    const auto c = ParametricCurve::standard_flower();
    for (double t : {0.0, 0.7, 3.3}) {
        EXPECT_LT((c.eval(t) - c.eval(t + 2 * kPi)).norm(), 1e-14);
    }
}

TEST(Curve, NormalExamples) {
    const Vec2 n0 = ParametricCurve::circle({0.5, 0.5}, 0.2).normal(0.0);
    EXPECT_NEAR(n0.x(), -1.0, 1e-15);
    EXPECT_NEAR(n0.y(), 0.0, 1e-15);
    const Vec2 n1 = ParametricCurve::standard_ellipse().normal(kPi / 2);
    EXPECT_NEAR(n1.x(), 0.0, 1e-15);
    EXPECT_NEAR(n1.y(), -1.0, 1e-15);
}

TEST(Curve, FlowerPetalTipCurvatureRegression) {
    const auto c = ParametricCurve::standard_flower();
    const double t = kPi / 10;
    EXPECT_NEAR(c.curvature(t), fd_curvature(c, t), 1e-6 * c.curvature(t));
}

TEST(ClosestPoint, RadialProjectionOnCircle) {
    const auto c = ParametricCurve::circle({0, 0}, 1.0);
    const double t = closest_point(c, Point(2, 0));
    EXPECT_LT((c.eval(t) - Point(1, 0)).norm(), 1e-12);
}

TEST(ClosestPoint, ChordMidpointProjectsBetweenEndpoints) {
    const auto c = ParametricCurve::standard_flower();
    const Point mid = 0.5 * (c.eval(0.0) + c.eval(0.1));
    const double t = closest_point(c, mid);
    // Brute-force scan oracle over (0, 0.1) with 10^6 samples.
    double best_t = 0.0;
    double best = 1e300;
    for (int i = 0; i <= 1000000; ++i) {
        const double s = 0.1 * i / 1e6;
        const double d = (c.eval(s) - mid).squaredNorm();
        if (d < best) {
            best = d;
            best_t = s;
        }
    }
    EXPECT_GT(t, 0.0);
    EXPECT_LT(t, 0.1);
    EXPECT_NEAR(t, best_t, 1e-5);
}

TEST(Containment, Examples) {
    Domain flower;
    flower.holes.push_back({ParametricCurve::standard_flower(), BcKind::neumann});
    Domain ellipse;
    ellipse.holes.push_back({ParametricCurve::standard_ellipse(), BcKind::neumann});
    EXPECT_EQ(contains(flower, Point(0.5, 0.5)), Containment::outside);
    EXPECT_EQ(contains(ellipse, Point(0.5, 0.5)), Containment::outside);
    EXPECT_EQ(contains(flower, Point(0.05, 0.05)), Containment::inside);
    EXPECT_EQ(contains(ellipse, Point(0.05, 0.05)), Containment::inside);
    EXPECT_EQ(contains(ellipse, Point(0.7, 0.5)), Containment::boundary);
}
