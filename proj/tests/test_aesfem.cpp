#include "grsem/aesfem.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

using namespace grsem;

namespace {

struct Fixture {
    Domain domain;
    HighOrderMesh mesh;
};

Fixture flower_mesh(int p, BcKind bc, double h = 1.0 / 16.0) {
    Fixture f;
    f.domain.holes.push_back({ParametricCurve::standard_flower(), bc});
    MeshOptions o;
    o.h = h;
    o.gr = GrMode::h;
    f.mesh = insert_high_order_nodes(generate_mesh(f.domain, o), f.domain, p, p);
    return f;
}

double tri_area(const BoundarySubmesh& s, const std::array<int, 3>& t) {
    return 0.5 * orient(s.nodes[static_cast<std::size_t>(t[0])], s.nodes[static_cast<std::size_t>(t[1])],
                        s.nodes[static_cast<std::size_t>(t[2])]);
}

// Linear patch u = x + y under -lap u + (x, -y) . grad u = x - y.
PdeCoefficients linear_patch() {
    return {[](const Point& x) { return Vec2(x.x(), -x.y()); }, [](const Point& x) { return x.x() - x.y(); }};
}

Eigen::VectorXd nodal(const HighOrderMesh& m, const std::function<double(const Point&)>& u) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(m.num_nodes()));
    for (std::size_t i = 0; i < m.num_nodes(); ++i) {
        v[static_cast<Eigen::Index>(i)] = u(m.nodes[i]);
    }
    return v;
}

}  // namespace

TEST(SplitQuad, UnitSquareGivesTwoHalfTriangles) {
    const std::array<Point, 4> q{Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)};
    for (const auto& t : split_quad_to_tris(q)) {
        EXPECT_NEAR(0.5 * orient(q[static_cast<std::size_t>(t[0])], q[static_cast<std::size_t>(t[1])],
                                 q[static_cast<std::size_t>(t[2])]),
                    0.5, 1e-15);
    }
}

TEST(SplitQuad, RectangleAndShorterDiagonal) {
    const std::array<Point, 4> r{Point(0, 0), Point(2, 0), Point(2, 1), Point(0, 1)};
    for (const auto& t : split_quad_to_tris(r)) {
        EXPECT_NEAR(0.5 * orient(r[static_cast<std::size_t>(t[0])], r[static_cast<std::size_t>(t[1])],
                                 r[static_cast<std::size_t>(t[2])]),
                    1.0, 1e-15);
    }
    // A kite whose 1-3 diagonal is shorter must be cut along 1-3.
    const std::array<Point, 4> kite{Point(0, 0), Point(1, -0.3), Point(2, 0), Point(1, 0.3)};
    for (const auto& t : split_quad_to_tris(kite)) {
        const std::set<int> s(t.begin(), t.end());
        EXPECT_TRUE(s.count(1) && s.count(3));
    }
}

TEST(SplitQuad, NearDegenerateQuadKeepsPositiveAreas) {
    // Vertex 1 sits 0.1 degrees short of a straight angle.
    const double dip = std::tan(0.05 * kPi / 180.0);
    const std::array<Point, 4> q{Point(0, 0), Point(1, -dip), Point(2, 0), Point(1, 1)};
    for (const auto& t : split_quad_to_tris(q)) {
        EXPECT_GT(orient(q[static_cast<std::size_t>(t[0])], q[static_cast<std::size_t>(t[1])],
                         q[static_cast<std::size_t>(t[2])]),
                  0.0);
    }
}

TEST(SplitQuad, RejectsDegenerateQuad) {
    const std::array<Point, 4> q{Point(0, 0), Point(1, 0), Point(2, 0), Point(3, 0)};
    EXPECT_THROW(split_quad_to_tris(q), MeshError);
}

TEST(Submesh, ZeroLayersIsRejected) {
    const Fixture f = flower_mesh(2, BcKind::neumann, 1.0 / 8.0);
    EXPECT_THROW(extract_boundary_submesh(f.mesh, 0), ConfigError);
}

TEST(Submesh, FlowerQuadraticTwoLayers) {
    const Fixture f = flower_mesh(2, BcKind::neumann);
    const BoundarySubmesh sub = extract_boundary_submesh(f.mesh, 2);

    // Parent map is injective and positions agree.
    std::set<int> parents(sub.parent.begin(), sub.parent.end());
    EXPECT_EQ(parents.size(), sub.parent.size());
    for (std::size_t i = 0; i < sub.num_nodes(); ++i) {
        EXPECT_EQ(sub.nodes[i], f.mesh.nodes[static_cast<std::size_t>(sub.parent[i])]);
    }
    // Every node of every gap triangle is present.
    std::size_t gap = 0;
    for (std::size_t e = 0; e < f.mesh.num_elements(); ++e) {
        if (f.mesh.linear.elements[e].region == Region::gap) {
            ++gap;
            for (int n : f.mesh.elem_nodes[e]) {
                EXPECT_TRUE(parents.count(n));
            }
        }
    }
    EXPECT_EQ(sub.num_gap_elements, gap);
    EXPECT_GT(sub.num_quads, 0u);

    // Positive sub-triangles: p^2 per element.
    for (const auto& t : sub.triangles) {
        EXPECT_GT(tri_area(sub, t), 0.0);
    }
    EXPECT_EQ(sub.triangles.size(), 4 * (sub.num_gap_elements + 2 * sub.num_quads));

    // The boundary edges form closed loops (every node has even boundary degree),
    // and each boundary node is on the hole or on the artificial boundary.
    std::map<std::pair<int, int>, int> count;
    for (const auto& t : sub.triangles) {
        for (int k = 0; k < 3; ++k) {
            const int a = t[static_cast<std::size_t>(k)];
            const int b = t[static_cast<std::size_t>((k + 1) % 3)];
            ++count[{std::min(a, b), std::max(a, b)}];
        }
    }
    std::map<int, int> degree;
    for (const auto& [edge, c] : count) {
        if (c == 1) {
            ++degree[edge.first];
            ++degree[edge.second];
        }
    }
    ASSERT_FALSE(degree.empty());
    for (const auto& [node, d] : degree) {
        EXPECT_EQ(d % 2, 0);
        const auto i = static_cast<std::size_t>(node);
        EXPECT_TRUE(sub.hole[i] >= 0 || sub.artificial[i] || sub.dirichlet[i]);
    }
    EXPECT_GT(std::count(sub.artificial.begin(), sub.artificial.end(), 1), 0);
}

TEST(Submesh, MoreLayersGrowTheSubmesh) {
    const Fixture f = flower_mesh(2, BcKind::neumann);
    EXPECT_LT(extract_boundary_submesh(f.mesh, 1).num_quads, extract_boundary_submesh(f.mesh, 3).num_quads);
}

TEST(Glp, MonomialOrderingAndGradients) {
    Eigen::VectorXd v;
    Eigen::MatrixX2d g;
    glp_monomials(2, Point(2.0, 3.0), v, &g);
    // 1, x, y, x^2, xy, y^2
    EXPECT_EQ(v.size(), 6);
    EXPECT_DOUBLE_EQ(v[3], 4.0);
    EXPECT_DOUBLE_EQ(v[4], 6.0);
    EXPECT_DOUBLE_EQ(v[5], 9.0);
    EXPECT_DOUBLE_EQ(g(4, 0), 3.0);
    EXPECT_DOUBLE_EQ(g(4, 1), 2.0);
}

class GlpConsistency : public ::testing::TestWithParam<int> {};

TEST_P(GlpConsistency, ReproducesPolynomialsOfItsDegree) {
    const int degree = GetParam();
    const Fixture f = flower_mesh(2, BcKind::neumann);
    const BoundarySubmesh sub = extract_boundary_submesh(f.mesh, 2);
    const auto adj = submesh_adjacency(sub);
    // A full polynomial of the fit degree with O(1) coefficients.
    auto u = [degree](const Point& x) {
        double s = 0.3;
        for (int i = 0; i <= degree; ++i) {
            s += std::pow(x.x() - 0.4, i) * std::pow(x.y() - 0.6, degree - i) * (1.0 + 0.5 * i);
        }
        return s;
    };
    auto grad = [degree](const Point& x) {
        Vec2 g = Vec2::Zero();
        for (int i = 0; i <= degree; ++i) {
            const double c = 1.0 + 0.5 * i;
            const int j = degree - i;
            if (i > 0) g.x() += c * i * std::pow(x.x() - 0.4, i - 1) * std::pow(x.y() - 0.6, j);
            if (j > 0) g.y() += c * j * std::pow(x.x() - 0.4, i) * std::pow(x.y() - 0.6, j - 1);
        }
        return g;
    };
    for (std::size_t n = 0; n < sub.num_nodes(); n += 7) {
        const GlpStencil s = build_glp_basis(sub, adj, static_cast<int>(n), degree);
        EXPECT_EQ(s.stencil.front(), static_cast<int>(n));
        EXPECT_GE(static_cast<double>(s.stencil.size()), 1.5 * (degree + 1) * (degree + 2) / 2);
        EXPECT_LE(s.condition, 1e8);
        Eigen::VectorXd vals(static_cast<Eigen::Index>(s.stencil.size()));
        for (std::size_t j = 0; j < s.stencil.size(); ++j) {
            vals[static_cast<Eigen::Index>(j)] = u(sub.nodes[static_cast<std::size_t>(s.stencil[j])]);
        }
        const Point xc = sub.nodes[n];
        const Point x = xc + Vec2(0.3, -0.2) * s.scale;
        EXPECT_NEAR(s.value(xc, x, vals), u(x), 1e-9);
        EXPECT_LT((s.gradient(xc, x, vals) - grad(x)).norm(), 1e-9 * (1.0 + grad(x).norm()));
    }
}

INSTANTIATE_TEST_SUITE_P(Degrees, GlpConsistency, ::testing::Values(1, 2, 3, 4, 5, 6));

TEST(Glp, QuadraticFitHasSecondDerivativeTwo) {
    const Fixture f = flower_mesh(2, BcKind::neumann);
    const BoundarySubmesh sub = extract_boundary_submesh(f.mesh, 2);
    const auto adj = submesh_adjacency(sub);
    const GlpStencil s = build_glp_basis(sub, adj, 0, 2);
    Eigen::VectorXd vals(static_cast<Eigen::Index>(s.stencil.size()));
    for (std::size_t j = 0; j < s.stencil.size(); ++j) {
        vals[static_cast<Eigen::Index>(j)] = std::pow(sub.nodes[static_cast<std::size_t>(s.stencil[j])].x(), 2);
    }
    // Coefficient of ((x - xc)/scale)^2 is scale^2 / 2 * u_xx.
    const double uxx = 2.0 * (s.coeffs * vals)[3] / (s.scale * s.scale);
    EXPECT_NEAR(uxx, 2.0, 1e-9);
}

TEST(Glp, ExhaustedStencilThrows) {
    BoundarySubmesh sub;
    sub.nodes = {{0, 0}, {1, 0}, {0, 1}};
    sub.parent = {0, 1, 2};
    sub.triangles = {{0, 1, 2}};
    sub.artificial.assign(3, 0);
    sub.dirichlet.assign(3, 0);
    sub.hole.assign(3, -1);
    sub.t.assign(3, 0.0);
    EXPECT_THROW(build_glp_basis(sub, submesh_adjacency(sub), 0, 2), SolveError);
}

class PostExactness : public ::testing::TestWithParam<std::tuple<BcKind, NeumannTreatment>> {};

TEST_P(PostExactness, LinearSolutionIsPreserved) {
    const auto [bc, treatment] = GetParam();
    const Fixture f = flower_mesh(3, bc);
    const auto u = [](const Point& x) { return x.x() + x.y(); };
    const Eigen::VectorXd exact = nodal(f.mesh, u);
    const BoundaryData bcs{u, [](const Point&, const Vec2& n, int) { return n.x() + n.y(); }};
    const ParametricCurve& c = f.domain.holes[0].curve;
    const CurveFlux flux = [&c](int, double t) { return c.normal(t).x() + c.normal(t).y(); };
    PostOptions o;
    o.neumann = treatment;
    PostDiagnostics diag;
    const Eigen::VectorXd post = post_process(f.mesh, exact, linear_patch(), bcs, flux, o, &diag);
    EXPECT_LT((post - exact).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_GT(diag.free_nodes, 0u);
    EXPECT_EQ(diag.free_nodes + diag.fixed_nodes, diag.submesh_nodes);
}

INSTANTIATE_TEST_SUITE_P(
    Treatments, PostExactness,
    ::testing::Values(std::make_tuple(BcKind::dirichlet, NeumannTreatment::keep),
                      std::make_tuple(BcKind::neumann, NeumannTreatment::keep),
                      std::make_tuple(BcKind::neumann, NeumannTreatment::collocation)),
    [](const auto& info) {
        if (std::get<0>(info.param) == BcKind::dirichlet) {
            return std::string("dirichlet");
        }
        return std::string(std::get<1>(info.param) == NeumannTreatment::keep ? "neumann_keep" : "neumann_collocation");
    });

TEST(Post, FixedNodesKeepTheirInputValues) {
    const Fixture f = flower_mesh(2, BcKind::neumann);
    const auto u = [](const Point& x) { return x.x() * x.y(); };
    Eigen::VectorXd input = nodal(f.mesh, u);
    for (Eigen::Index i = 0; i < input.size(); ++i) {
        input[i] += 1e-3 * std::sin(static_cast<double>(i));  // a noisy "SEM" field
    }
    const BoundaryData bcs{u, [](const Point&, const Vec2&, int) { return 0.0; }};
    const CurveFlux flux = [](int, double) { return 0.0; };
    const PdeCoefficients coeffs{[](const Point& x) { return Vec2(x.x(), -x.y()); },
                                 [](const Point& x) { return x.y() * x.y() - x.x() * x.x(); }};
    const Eigen::VectorXd post = post_process(f.mesh, input, coeffs, bcs, flux, PostOptions{});
    const BoundarySubmesh sub = extract_boundary_submesh(f.mesh, 2);
    std::vector<char> in_sub(f.mesh.num_nodes(), 0);
    for (std::size_t i = 0; i < sub.num_nodes(); ++i) {
        in_sub[static_cast<std::size_t>(sub.parent[i])] = 1;
        if (sub.artificial[i] || sub.dirichlet[i] || sub.hole[i] >= 0) {
            EXPECT_EQ(post[sub.parent[i]], input[sub.parent[i]]);
        }
    }
    for (std::size_t i = 0; i < f.mesh.num_nodes(); ++i) {
        if (!in_sub[i]) {
            EXPECT_EQ(post[static_cast<Eigen::Index>(i)], input[static_cast<Eigen::Index>(i)]);
        }
    }
}

TEST(MergeBack, EmptySubmeshLeavesParentUnchanged) {
    const Eigen::VectorXd parent = Eigen::VectorXd::LinSpaced(6, 0.0, 5.0);
    BoundarySubmesh empty;
    EXPECT_EQ(merge_back(parent, empty, Eigen::VectorXd()), parent);
}

TEST(MergeBack, ChangesExactlyTheSubmeshNodesAndIsIdempotent) {
    const Eigen::VectorXd parent = Eigen::VectorXd::Zero(10);
    BoundarySubmesh sub;
    sub.parent = {2, 5, 7};
    sub.nodes.resize(3);
    const Eigen::VectorXd corr = Eigen::Vector3d(1.0, 2.0, 3.0);
    const Eigen::VectorXd once = merge_back(parent, sub, corr);
    EXPECT_EQ((once.array() != parent.array()).count(), 3);
    EXPECT_EQ(once[5], 2.0);
    EXPECT_EQ(merge_back(once, sub, corr), once);
}
