#include "grsem/highorder.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

using namespace grsem;

namespace {

const Domain kBox{};  // hole-free unit square; meshes keep a pointer to their domain

Domain with_hole(const ParametricCurve& c) {
    Domain d;
    d.holes.push_back({c, BcKind::neumann});
    return d;
}

LinearMixedMesh mesh_for(const Domain& d, double h, GrMode gr) {
    MeshOptions o;
    o.h = h;
    o.gr = gr;
    return generate_mesh(d, o);
}

LinearMixedMesh single_triangle(const Point& a, const Point& b, const Point& c) {
    LinearMixedMesh m;
    m.nodes = {a, b, c};
    m.tags.resize(3);
    m.elements.push_back({ElementShape::tri, {0, 1, 2, -1}, Region::gap});
    build_ahf(m);
    return m;
}

// Largest distance from the curve over the geometry nodes of curved facets.
double max_curved_edge_residual(const HighOrderMesh& m, const ParametricCurve& curve) {
    double worst = 0.0;
    for (std::size_t e = 0; e < m.num_elements(); ++e) {
        if (!m.is_curved(static_cast<int>(e))) {
            continue;
        }
        const ReferenceElement& g = m.geometry_element(static_cast<int>(e));
        for (int k = 0; k <= g.degree(); ++k) {
            const Point x = m.geometry[e].row(g.edge_node(m.curved_facet[e], k)).transpose();
            worst = std::max(worst, distance_to_curve(curve, x));
        }
    }
    return worst;
}

// Largest radial deviation from the circle along the mapped curved edges.
double circle_edge_deviation(const HighOrderMesh& m, const Point& center, double r) {
    double worst = 0.0;
    for (std::size_t e = 0; e < m.num_elements(); ++e) {
        if (!m.is_curved(static_cast<int>(e))) {
            continue;
        }
        const ReferenceElement& g = m.geometry_element(static_cast<int>(e));
        for (int k = 0; k <= 40; ++k) {
            const Point xi = g.edge_point(m.curved_facet[e], -1.0 + 2.0 * k / 40);
            const Point x = map_point(m, static_cast<int>(e), xi).x;
            worst = std::max(worst, std::abs((x - center).norm() - r));
        }
    }
    return worst;
}

}  // namespace

TEST(HighOrder, StraightQuadCenterNode) {
    const LinearMixedMesh lin = structured_grid({0, 0}, {1, 1}, 1.0);
    const HighOrderMesh m = insert_high_order_nodes(lin, kBox, 2, 2);
    EXPECT_EQ(m.num_nodes(), 9u);
    const ReferenceElement& ref = m.solution_element(0);
    // The last node is the interior one, the bilinear image of (0, 0).
    const int center = m.elem_nodes[0][static_cast<std::size_t>(ref.num_nodes() - 1)];
    EXPECT_LT((m.nodes[static_cast<std::size_t>(center)] - Point(0.5, 0.5)).norm(), 1e-15);
}

TEST(HighOrder, StraightTriangleMidEdgeNodes) {
    const LinearMixedMesh lin = single_triangle({0, 0}, {2, 0}, {0, 2});
    const HighOrderMesh m = insert_high_order_nodes(lin, kBox, 2, 2);
    ASSERT_EQ(m.num_nodes(), 6u);
    for (const Point& mid : {Point(1, 0), Point(1, 1), Point(0, 1)}) {
        double best = 1e300;
        for (const Point& x : m.nodes) {
            best = std::min(best, (x - mid).norm());
        }
        EXPECT_LT(best, 1e-15);
    }
}

TEST(HighOrder, SharedEdgeNodesAreMerged) {
    const LinearMixedMesh lin = structured_grid({0, 0}, {2, 1}, 1.0);
    const HighOrderMesh m = insert_high_order_nodes(lin, kBox, 3, 3);
    // Two p=3 quads: 16 + 16 - 4 shared nodes on the common edge.
    EXPECT_EQ(m.num_nodes(), 28u);
}

TEST(Jacobian, Examples) {
    const HighOrderMesh square = insert_high_order_nodes(structured_grid({0, 0}, {1, 1}, 1.0), kBox, 2, 2);
    const auto [lo, hi] = jacobian_extrema(square, 0);
    EXPECT_NEAR(lo, 0.25, 1e-15);
    EXPECT_NEAR(hi, 0.25, 1e-15);

    const HighOrderMesh tri = insert_high_order_nodes(single_triangle({0, 0}, {1, 0}, {0, 1}), kBox, 2, 2);
    EXPECT_NEAR(jacobian_extrema(tri, 0).first, 1.0, 1e-15);

    HighOrderMesh bad = square;
    std::swap(bad.linear.nodes[0], bad.linear.nodes[1]);
    EXPECT_LT(jacobian_extrema(bad, 0).first, 0.0);
}

TEST(ElevateProject, StraightSegmentGivesAffinePlacement) {
    // The straight facets of a curved triangle must keep the affine node placement.
    const auto c = ParametricCurve::circle({0, 0}, 1.0);
    Eigen::Matrix<double, 3, 2> v;
    v << c.eval(0.0).transpose(), c.eval(0.2).transpose(), 0.5, 0.05;
    const int q = 4;
    const Eigen::MatrixX2d X = elevate_and_project(v, 0, c, 0.0, 0.2, q, q);
    const ReferenceElement& g = reference_element(ElementShape::tri, q);
    // Facets 1 and 2 are straight: their nodes must be the affine placement.
    for (int edge = 1; edge <= 2; ++edge) {
        for (int k = 0; k <= q; ++k) {
            const Point xi = g.nodes().row(g.edge_node(edge, k)).transpose();
            const Point affine = v.row(0).transpose() * (1 - xi.x() - xi.y()) + v.row(1).transpose() * xi.x() +
                                 v.row(2).transpose() * xi.y();
            EXPECT_LT((X.row(g.edge_node(edge, k)).transpose() - affine).norm(), 1e-11);
        }
    }
    // Facet 0 nodes lie on the circle.
    for (int k = 0; k <= q; ++k) {
        EXPECT_NEAR(X.row(g.edge_node(0, k)).norm(), 1.0, 1e-10);
    }
}

TEST(ElevateProject, CircleArcQuadraticMidNodeOnCircle) {
    const auto c = ParametricCurve::circle({0, 0}, 1.0);
    Eigen::Matrix<double, 3, 2> v;
    v << c.eval(0.0).transpose(), c.eval(0.3).transpose(), 0.6, 0.1;
    const Eigen::MatrixX2d X = elevate_and_project(v, 0, c, 0.0, 0.3, 2, 2);
    const ReferenceElement& g = reference_element(ElementShape::tri, 2);
    const Point mid = X.row(g.edge_node(0, 1)).transpose();
    EXPECT_NEAR(mid.norm(), 1.0, 1e-10);
    EXPECT_NEAR(std::atan2(mid.y(), mid.x()), 0.15, 1e-3);
}

class CurvedMesh : public ::testing::TestWithParam<std::tuple<const char*, int, int>> {};

TEST_P(CurvedMesh, ValidConformingAndOnTheCurve) {
    const auto [name, p, dq] = GetParam();
    const ParametricCurve curve =
        std::string(name) == "flower" ? ParametricCurve::standard_flower() : ParametricCurve::standard_ellipse();
    const Domain d = with_hole(curve);
    const HighOrderMesh m = insert_high_order_nodes(mesh_for(d, 1.0 / 16.0, GrMode::h), d, p, p + dq);
    EXPECT_EQ(m.straight_fallbacks, 0);

    for (std::size_t e = 0; e < m.num_elements(); ++e) {
        const auto [lo, hi] = jacobian_extrema(m, static_cast<int>(e));
        EXPECT_GT(lo, 0.0) << "element " << e;
        if (m.is_curved(static_cast<int>(e)) && p == 4) {
            const double mean = 0.5 * std::abs(m.linear.signed_area(static_cast<int>(e))) / 0.5;
            EXPECT_GT(lo, 0.2 * mean);
            EXPECT_LT(hi, 5.0 * mean);
        }
    }
    EXPECT_LT(max_curved_edge_residual(m, curve), 1e-10);
    // Solution nodes on the hole are images of reference nodes under the
    // degree-q map: exactly on the curve when they are geometry nodes (q = p),
    // within the geometric approximation error otherwise.
    for (std::size_t i = 0; i < m.num_nodes(); ++i) {
        if (m.info[i].kind == NodeKind::hole) {
            const double gap = (curve.eval(m.info[i].t) - m.nodes[i]).norm();
            EXPECT_LT(gap, dq == 0 ? 1e-10 : 1e-4);
            // Stationarity of the stored closest-point parameter.
            EXPECT_LT(std::abs((m.nodes[i] - curve.eval(m.info[i].t)).dot(curve.tangent(m.info[i].t))),
                      1e-10 * curve.tangent(m.info[i].t).norm());
        }
    }
    // Conformity: every geometric position is one node, and each solution node
    // coincides with the mapped reference node of every element that uses it.
    std::map<std::pair<long long, long long>, int> seen;
    for (std::size_t i = 0; i < m.num_nodes(); ++i) {
        const auto key = std::make_pair(std::llround(m.nodes[i].x() * 1e9), std::llround(m.nodes[i].y() * 1e9));
        EXPECT_TRUE(seen.emplace(key, static_cast<int>(i)).second) << "duplicate node " << i;
    }
    for (std::size_t e = 0; e < m.num_elements(); ++e) {
        const ReferenceElement& ref = m.solution_element(static_cast<int>(e));
        for (int j = 0; j < ref.num_nodes(); ++j) {
            const Point x = map_point(m, static_cast<int>(e), ref.nodes().row(j).transpose()).x;
            const Point& node = m.nodes[static_cast<std::size_t>(m.elem_nodes[e][static_cast<std::size_t>(j)])];
            EXPECT_LT((x - node).norm(), 1e-10);
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Meshes, CurvedMesh,
                         ::testing::Combine(::testing::Values("flower", "ellipse"), ::testing::Values(2, 3, 4),
                                            ::testing::Values(0, 1)),
                         [](const auto& info) {
                             return std::string(std::get<0>(info.param)) + "_p" +
                                    std::to_string(std::get<1>(info.param)) + "_q" +
                                    std::to_string(std::get<1>(info.param) + std::get<2>(info.param));
                         });

TEST(CurvedMesh, CircleGeometryConvergesAtDegreePlusOne) {
    const Point center(0.5, 0.5);
    const double r = 0.15;
    const Domain d = with_hole(ParametricCurve::circle(center, r));
    for (int q = 2; q <= 4; ++q) {
        std::vector<double> err;
        for (double h : {1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0}) {
            err.push_back(circle_edge_deviation(insert_high_order_nodes(mesh_for(d, h, GrMode::none), d, q, q), center, r));
        }
        const double rate = std::log(err[1] / err[2]) / std::log(2.0);
        EXPECT_GE(rate, q + 0.7) << "q=" << q << " errors " << err[0] << ' ' << err[1] << ' ' << err[2];
    }
}

TEST(CurvedMesh, EquidistantFamilyKeepsGeometryOnCurve) {
    const Domain d = with_hole(ParametricCurve::standard_flower());
    HighOrderOptions o;
    o.family = NodeFamily::equidistant;
    const HighOrderMesh m = insert_high_order_nodes(mesh_for(d, 1.0 / 16.0, GrMode::h), d, 3, 3, o);
    // Geometry nodes stay Gauss-Lobatto and on the curve; equidistant solution
    // nodes sit on the mapped edge, within the geometric error of the curve.
    EXPECT_LT(max_curved_edge_residual(m, d.holes[0].curve), 1e-10);
    for (std::size_t i = 0; i < m.num_nodes(); ++i) {
        if (m.info[i].kind == NodeKind::hole) {
            EXPECT_LT(distance_to_curve(d.holes[0].curve, m.nodes[i]), 1e-4);
        }
    }
}

TEST(CurvedMesh, RejectsGeometryDegreeOutOfRange) {
    const Domain d = with_hole(ParametricCurve::standard_flower());
    const LinearMixedMesh lin = mesh_for(d, 1.0 / 8.0, GrMode::h);
    EXPECT_ANY_THROW(insert_high_order_nodes(lin, d, 3, 2));
    EXPECT_ANY_THROW(insert_high_order_nodes(lin, d, 2, 5));
}
