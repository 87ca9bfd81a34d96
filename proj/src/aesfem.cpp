#include "grsem/aesfem.hpp"

#include <Eigen/SVD>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace grsem {

namespace {

std::uint64_t edge_key(int a, int b) {
    if (a > b) {
        std::swap(a, b);
    }
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

int num_monomials(int p) { return (p + 1) * (p + 2) / 2; }

}  // namespace

std::array<std::array<int, 3>, 2> split_quad_to_tris(const std::array<Point, 4>& q) {
    const double d02 = (q[2] - q[0]).squaredNorm();
    const double d13 = (q[3] - q[1]).squaredNorm();
    std::array<std::array<int, 3>, 2> tris;
    if (d02 <= d13) {
        tris = {{{0, 1, 2}, {0, 2, 3}}};
    } else {
        tris = {{{0, 1, 3}, {1, 2, 3}}};
    }
    for (const auto& t : tris) {
        if (!(orient(q[static_cast<std::size_t>(t[0])], q[static_cast<std::size_t>(t[1])],
                     q[static_cast<std::size_t>(t[2])]) > 0.0)) {
            throw MeshError("split_quad_to_tris: degenerate quad");
        }
    }
    return tris;
}

BoundarySubmesh extract_boundary_submesh(const HighOrderMesh& mesh, int layers) {
    if (layers < 1) {
        throw ConfigError("post-processing needs at least one quad layer");
    }
    const LinearMixedMesh& lin = mesh.linear;
    BoundarySubmesh sub;
    sub.layers = layers;
    std::vector<int> local_id(mesh.num_nodes(), -1);
    auto node = [&](int parent) {
        int& id = local_id[static_cast<std::size_t>(parent)];
        if (id < 0) {
            id = static_cast<int>(sub.parent.size());
            sub.parent.push_back(parent);
            sub.nodes.push_back(mesh.nodes[static_cast<std::size_t>(parent)]);
        }
        return id;
    };
    auto add_tri = [&](int a, int b, int c, std::size_t elem) {
        const int ia = node(a);
        const int ib = node(b);
        const int ic = node(c);
        if (!(orient(sub.nodes[static_cast<std::size_t>(ia)], sub.nodes[static_cast<std::size_t>(ib)],
                     sub.nodes[static_cast<std::size_t>(ic)]) > 0.0)) {
            throw MeshError("extract_boundary_submesh: inverted sub-triangle in element " + std::to_string(elem));
        }
        sub.triangles.push_back({ia, ib, ic});
    };

    const int p = mesh.p;
    std::vector<char> included(mesh.num_elements(), 0);
    std::vector<char> corner_in(lin.num_nodes(), 0);
    auto absorb = [&](std::size_t e) {
        const Element& el = lin.elements[e];
        const ReferenceElement& ref = mesh.solution_element(static_cast<int>(e));
        std::vector<int> at(static_cast<std::size_t>((p + 1) * (p + 1)), -1);
        for (int k = 0; k < ref.num_nodes(); ++k) {
            const auto& ij = ref.lattice()[static_cast<std::size_t>(k)];
            at[static_cast<std::size_t>(ij[0] + (p + 1) * ij[1])] = mesh.elem_nodes[e][static_cast<std::size_t>(k)];
        }
        auto g = [&](int i, int j) { return at[static_cast<std::size_t>(i + (p + 1) * j)]; };
        if (el.shape == ElementShape::tri) {
            for (int j = 0; j < p; ++j) {
                for (int i = 0; i + j < p; ++i) {
                    add_tri(g(i, j), g(i + 1, j), g(i, j + 1), e);
                    if (i + j + 1 < p) {
                        add_tri(g(i + 1, j), g(i + 1, j + 1), g(i, j + 1), e);
                    }
                }
            }
            ++sub.num_gap_elements;
        } else {
            for (int j = 0; j < p; ++j) {
                for (int i = 0; i < p; ++i) {
                    const std::array<int, 4> c{g(i, j), g(i + 1, j), g(i + 1, j + 1), g(i, j + 1)};
                    std::array<Point, 4> pts;
                    for (int k = 0; k < 4; ++k) {
                        pts[static_cast<std::size_t>(k)] = mesh.nodes[static_cast<std::size_t>(c[static_cast<std::size_t>(k)])];
                    }
                    for (const auto& t : split_quad_to_tris(pts)) {
                        add_tri(c[static_cast<std::size_t>(t[0])], c[static_cast<std::size_t>(t[1])],
                                c[static_cast<std::size_t>(t[2])], e);
                    }
                }
            }
            ++sub.num_quads;
        }
        included[e] = 1;
    };

    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        if (lin.elements[e].region == Region::gap) {
            absorb(e);
        }
    }
    if (sub.triangles.empty()) {
        throw MeshError("extract_boundary_submesh: the mesh has no near-boundary triangles");
    }
    for (int layer = 0; layer < layers; ++layer) {
        for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
            if (included[e]) {
                for (int k = 0; k < lin.elements[e].num_vertices(); ++k) {
                    corner_in[static_cast<std::size_t>(lin.elements[e].v[static_cast<std::size_t>(k)])] = 1;
                }
            }
        }
        std::vector<std::size_t> join;
        for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
            if (included[e] || lin.elements[e].shape != ElementShape::quad) {
                continue;
            }
            int hits = 0;
            for (int v : lin.elements[e].v) {
                hits += corner_in[static_cast<std::size_t>(v)];
            }
            if (hits >= 2) {
                join.push_back(e);
            }
        }
        for (std::size_t e : join) {
            absorb(e);
        }
    }

    const std::size_t n = sub.num_nodes();
    std::unordered_map<std::uint64_t, int> edge_count;
    for (const auto& t : sub.triangles) {
        for (int k = 0; k < 3; ++k) {
            ++edge_count[edge_key(t[static_cast<std::size_t>(k)], t[static_cast<std::size_t>((k + 1) % 3)])];
        }
    }
    sub.artificial.assign(n, 0);
    sub.dirichlet.assign(n, 0);
    sub.hole.assign(n, -1);
    sub.t.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const SolutionNodeInfo& inf = mesh.info[static_cast<std::size_t>(sub.parent[i])];
        sub.dirichlet[i] = is_dirichlet_node(mesh, sub.parent[i]) ? 1 : 0;
        if (inf.kind == NodeKind::hole) {
            sub.hole[i] = inf.hole;
            sub.t[i] = inf.t;
        }
    }
    for (const auto& t : sub.triangles) {
        for (int k = 0; k < 3; ++k) {
            const int a = t[static_cast<std::size_t>(k)];
            const int b = t[static_cast<std::size_t>((k + 1) % 3)];
            if (edge_count[edge_key(a, b)] != 1) {
                continue;
            }
            for (int v : {a, b}) {
                if (mesh.info[static_cast<std::size_t>(sub.parent[static_cast<std::size_t>(v)])].kind ==
                    NodeKind::interior) {
                    sub.artificial[static_cast<std::size_t>(v)] = 1;
                }
            }
        }
    }
    return sub;
}

std::vector<std::vector<int>> submesh_adjacency(const BoundarySubmesh& sub) {
    std::vector<std::vector<int>> adj(sub.num_nodes());
    for (const auto& t : sub.triangles) {
        for (int k = 0; k < 3; ++k) {
            const int a = t[static_cast<std::size_t>(k)];
            const int b = t[static_cast<std::size_t>((k + 1) % 3)];
            adj[static_cast<std::size_t>(a)].push_back(b);
            adj[static_cast<std::size_t>(b)].push_back(a);
        }
    }
    for (auto& list : adj) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    return adj;
}

void glp_monomials(int degree, const Point& local, Eigen::VectorXd& values, Eigen::MatrixX2d* grads) {
    const int m = num_monomials(degree);
    values.resize(m);
    if (grads) {
        grads->resize(m, 2);
    }
    std::vector<double> px(static_cast<std::size_t>(degree + 1), 1.0);
    std::vector<double> py(static_cast<std::size_t>(degree + 1), 1.0);
    for (int k = 1; k <= degree; ++k) {
        px[static_cast<std::size_t>(k)] = px[static_cast<std::size_t>(k - 1)] * local.x();
        py[static_cast<std::size_t>(k)] = py[static_cast<std::size_t>(k - 1)] * local.y();
    }
    int k = 0;
    for (int total = 0; total <= degree; ++total) {
        for (int j = 0; j <= total; ++j) {
            const int i = total - j;
            values(k) = px[static_cast<std::size_t>(i)] * py[static_cast<std::size_t>(j)];
            if (grads) {
                (*grads)(k, 0) = i > 0 ? i * px[static_cast<std::size_t>(i - 1)] * py[static_cast<std::size_t>(j)] : 0.0;
                (*grads)(k, 1) = j > 0 ? j * px[static_cast<std::size_t>(i)] * py[static_cast<std::size_t>(j - 1)] : 0.0;
            }
            ++k;
        }
    }
}

double GlpStencil::value(const Point& xc, const Point& x, const Eigen::VectorXd& values) const {
    Eigen::VectorXd m;
    glp_monomials(degree, (x - xc) / scale, m, nullptr);
    return m.dot(coeffs * values);
}

Vec2 GlpStencil::gradient(const Point& xc, const Point& x, const Eigen::VectorXd& values) const {
    Eigen::VectorXd m;
    Eigen::MatrixX2d dm;
    glp_monomials(degree, (x - xc) / scale, m, &dm);
    return dm.transpose() * (coeffs * values) / scale;
}

GlpStencil build_glp_basis(const BoundarySubmesh& sub, const std::vector<std::vector<int>>& adjacency, int node,
                           int degree, const GlpOptions& options) {
    const int nmono = num_monomials(degree);
    const auto need = static_cast<std::size_t>(std::ceil(options.stencil_factor * nmono));
    const Point xc = sub.nodes[static_cast<std::size_t>(node)];
    GlpStencil g;
    g.center = node;
    g.degree = degree;
    g.stencil = {node};
    std::vector<char> seen(sub.num_nodes(), 0);
    seen[static_cast<std::size_t>(node)] = 1;
    std::vector<int> frontier{node};
    for (;;) {
        std::vector<int> ring;
        for (int v : frontier) {
            for (int w : adjacency[static_cast<std::size_t>(v)]) {
                if (!seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = 1;
                    ring.push_back(w);
                }
            }
        }
        std::sort(ring.begin(), ring.end());
        g.stencil.insert(g.stencil.end(), ring.begin(), ring.end());
        frontier = ring;
        if (g.stencil.size() >= need) {
            const auto s = static_cast<Eigen::Index>(g.stencil.size());
            double rbar = 0.0;
            g.scale = 0.0;
            for (std::size_t j = 1; j < g.stencil.size(); ++j) {
                const double d = (sub.nodes[static_cast<std::size_t>(g.stencil[j])] - xc).norm();
                rbar += d;
                g.scale = std::max(g.scale, d);
            }
            rbar /= static_cast<double>(g.stencil.size() - 1);
            Eigen::MatrixXd A(s, nmono);
            Eigen::VectorXd w(s);
            Eigen::VectorXd m;
            for (Eigen::Index j = 0; j < s; ++j) {
                const Point xj = sub.nodes[static_cast<std::size_t>(g.stencil[static_cast<std::size_t>(j)])];
                w(j) = std::pow(1.0 + (xj - xc).norm() / rbar, -degree);
                glp_monomials(degree, (xj - xc) / g.scale, m, nullptr);
                A.row(j) = w(j) * m.transpose();
            }
            const Eigen::VectorXd colnorm = A.colwise().norm().transpose();
            const Eigen::MatrixXd As = A * colnorm.cwiseInverse().asDiagonal();
            const Eigen::JacobiSVD<Eigen::MatrixXd> svd(As);
            const auto& sv = svd.singularValues();
            g.condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
            if (g.condition <= options.max_condition) {
                const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(As);
                const Eigen::MatrixXd W = w.asDiagonal();
                g.coeffs = colnorm.cwiseInverse().asDiagonal() * qr.solve(W);
                return g;
            }
        }
        if (ring.empty()) {
            throw SolveError("build_glp_basis: stencil exhausted at submesh node " + std::to_string(node) +
                             " (increase the number of layers)");
        }
    }
}

Eigen::VectorXd solve_post(const BoundarySubmesh& sub, const std::vector<GlpStencil>& bases,
                           const PdeCoefficients& coeffs, const BoundaryData& bcs, const CurveFlux& flux,
                           const Domain& domain, const Eigen::VectorXd& parent_values, NeumannTreatment neumann) {
    const std::size_t n = sub.num_nodes();
    std::vector<std::vector<int>> node_tris(n);
    for (std::size_t t = 0; t < sub.triangles.size(); ++t) {
        for (int v : sub.triangles[t]) {
            node_tris[static_cast<std::size_t>(v)].push_back(static_cast<int>(t));
        }
    }
    std::unordered_map<std::uint64_t, int> edge_count;
    for (const auto& t : sub.triangles) {
        for (int k = 0; k < 3; ++k) {
            ++edge_count[edge_key(t[static_cast<std::size_t>(k)], t[static_cast<std::size_t>((k + 1) % 3)])];
        }
    }
    auto neumann_piece = [&](int i) {
        const int h = sub.hole[static_cast<std::size_t>(i)];
        return h >= 0 && domain.holes[static_cast<std::size_t>(h)].bc == BcKind::neumann;
    };
    auto fixed = [&](int i) { return sub.is_fixed(i) || (neumann == NeumannTreatment::keep && neumann_piece(i)); };

    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    int max_degree = 1;
    for (const auto& b : bases) {
        max_degree = std::max(max_degree, b.degree);
    }
    const QuadratureRule rule = quadrature_rule(ElementShape::tri, 2 * max_degree + 2);
    const Rule1d line = gauss_legendre_1d(max_degree + 2);
    Eigen::VectorXd m;
    Eigen::MatrixX2d dm;

    for (std::size_t i = 0; i < n; ++i) {
        const int ii = static_cast<int>(i);
        if (fixed(ii)) {
            trip.emplace_back(ii, ii, 1.0);
            rhs(ii) = parent_values(sub.parent[i]);
            continue;
        }
        const GlpStencil& g = bases[i];
        if (g.center != ii) {
            throw SolveError("solve_post: missing GLP basis for submesh node " + std::to_string(i));
        }
        const Point xc = sub.nodes[i];
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(g.stencil.size()));
        double b = 0.0;
        if (neumann_piece(ii) && neumann == NeumannTreatment::collocation) {
            const ParametricCurve& curve = domain.holes[static_cast<std::size_t>(sub.hole[i])].curve;
            const double t = sub.t[i];
            glp_monomials(g.degree, Point::Zero(), m, &dm);
            const Vec2 nrm = curve.normal(t);
            row = (dm * nrm).transpose() * g.coeffs / g.scale;
            b = flux(sub.hole[i], t);
        } else {
            for (int tri : node_tris[i]) {
                const auto& v = sub.triangles[static_cast<std::size_t>(tri)];
                const Point& a = sub.nodes[static_cast<std::size_t>(v[0])];
                const Point& bb = sub.nodes[static_cast<std::size_t>(v[1])];
                const Point& c = sub.nodes[static_cast<std::size_t>(v[2])];
                const double area2 = orient(a, bb, c);
                int loc = 0;
                while (v[static_cast<std::size_t>(loc)] != ii) {
                    ++loc;
                }
                const Point& p1 = sub.nodes[static_cast<std::size_t>(v[static_cast<std::size_t>((loc + 1) % 3)])];
                const Point& p2 = sub.nodes[static_cast<std::size_t>(v[static_cast<std::size_t>((loc + 2) % 3)])];
                const Vec2 grad_psi = Vec2(p1.y() - p2.y(), p2.x() - p1.x()) / area2;
                for (Eigen::Index k = 0; k < rule.points.rows(); ++k) {
                    const double r = rule.points(k, 0);
                    const double s = rule.points(k, 1);
                    const Point x = a + r * (bb - a) + s * (c - a);
                    const double lam[3] = {1.0 - r - s, r, s};
                    const double psi = lam[loc];
                    const double w = rule.weights(k) * area2;
                    glp_monomials(g.degree, (x - xc) / g.scale, m, &dm);
                    const Eigen::VectorXd flux_terms = (dm * grad_psi + psi * (dm * coeffs.velocity(x))) / g.scale;
                    row.noalias() += w * flux_terms.transpose() * g.coeffs;
                    b += w * coeffs.source(x) * psi;
                }
            }
            // Boundary integral on Neumann facets (weak treatment).
            for (int tri : node_tris[i]) {
                const auto& v = sub.triangles[static_cast<std::size_t>(tri)];
                for (int k = 0; k < 3; ++k) {
                    const int ea = v[static_cast<std::size_t>(k)];
                    const int eb = v[static_cast<std::size_t>((k + 1) % 3)];
                    if ((ea != ii && eb != ii) || edge_count[edge_key(ea, eb)] != 1) {
                        continue;
                    }
                    int hole = -1;
                    if (neumann_piece(ea) && neumann_piece(eb) && sub.hole[static_cast<std::size_t>(ea)] ==
                                                                      sub.hole[static_cast<std::size_t>(eb)]) {
                        hole = sub.hole[static_cast<std::size_t>(ea)];
                    } else if (!(domain.outer_bc == BcKind::neumann && sub.hole[static_cast<std::size_t>(ea)] < 0 &&
                                 sub.hole[static_cast<std::size_t>(eb)] < 0 && !sub.artificial[static_cast<std::size_t>(ea)] &&
                                 !sub.artificial[static_cast<std::size_t>(eb)])) {
                        continue;
                    }
                    const Point& pa = sub.nodes[static_cast<std::size_t>(ea)];
                    const Point& pb = sub.nodes[static_cast<std::size_t>(eb)];
                    const Vec2 d = pb - pa;
                    const double len = d.norm();
                    const Vec2 nrm(d.y() / len, -d.x() / len);
                    for (std::size_t q = 0; q < line.x.size(); ++q) {
                        const double f = 0.5 * (1.0 + line.x[q]);
                        const Point x = pa + f * d;
                        const double psi = (ea == ii) ? 1.0 - f : f;
                        b += 0.5 * line.w[q] * len * psi * bcs.neumann(x, nrm, hole);
                    }
                }
            }
        }
        for (std::size_t j = 0; j < g.stencil.size(); ++j) {
            trip.emplace_back(ii, g.stencil[j], row(static_cast<Eigen::Index>(j)));
        }
        rhs(ii) = b;
    }
    SparseMatrix A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    A.setFromTriplets(trip.begin(), trip.end());
    SolveOptions so;
    so.tol = 1e-10;
    Eigen::VectorXd u = solve(A, rhs, so).u;
    // Fixed nodes keep their input values exactly.
    for (std::size_t i = 0; i < n; ++i) {
        if (fixed(static_cast<int>(i))) {
            u(static_cast<Eigen::Index>(i)) = parent_values(sub.parent[i]);
        }
    }
    return u;
}

Eigen::VectorXd merge_back(const Eigen::VectorXd& parent_values, const BoundarySubmesh& sub,
                           const Eigen::VectorXd& corrected) {
    Eigen::VectorXd out = parent_values;
    for (std::size_t i = 0; i < sub.num_nodes(); ++i) {
        out(sub.parent[i]) = corrected(static_cast<Eigen::Index>(i));
    }
    return out;
}

Eigen::VectorXd post_process(const HighOrderMesh& mesh, const Eigen::VectorXd& sem_values,
                             const PdeCoefficients& coeffs, const BoundaryData& bcs, const CurveFlux& flux,
                             const PostOptions& options, PostDiagnostics* diagnostics) {
    const BoundarySubmesh sub = extract_boundary_submesh(mesh, options.layers);
    const auto adj = submesh_adjacency(sub);
    const int degree = options.degree > 0 ? options.degree : mesh.p + options.degree_offset;
    std::vector<GlpStencil> bases(sub.num_nodes());
    PostDiagnostics diag;
    diag.submesh_nodes = sub.num_nodes();
    for (std::size_t i = 0; i < sub.num_nodes(); ++i) {
        const int h = sub.hole[i];
        const bool kept = options.neumann == NeumannTreatment::keep && h >= 0 &&
                          mesh.domain->holes[static_cast<std::size_t>(h)].bc == BcKind::neumann;
        if (sub.is_fixed(static_cast<int>(i)) || kept) {
            ++diag.fixed_nodes;
            continue;
        }
        bases[i] = build_glp_basis(sub, adj, static_cast<int>(i), degree, options.glp);
        ++diag.free_nodes;
        ++diag.stencil_sizes[static_cast<int>(bases[i].stencil.size())];
        diag.max_condition = std::max(diag.max_condition, bases[i].condition);
    }
    const Eigen::VectorXd corrected =
        solve_post(sub, bases, coeffs, bcs, flux, *mesh.domain, sem_values, options.neumann);
    const Eigen::VectorXd merged = merge_back(sem_values, sub, corrected);
    diag.changed_nodes = static_cast<std::size_t>((merged.array() != sem_values.array()).count());
    if (diagnostics) {
        *diagnostics = diag;
    }
    return merged;
}

}  // namespace grsem
