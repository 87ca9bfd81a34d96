#include "grsem/highorder.hpp"

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

/// Nodes of `to` interpolated from the geometry X on element `from`.
Eigen::MatrixX2d interpolate_nodes(const ReferenceElement& from, const Eigen::MatrixX2d& X,
                                   const ReferenceElement& to) {
    Eigen::MatrixX2d out(to.num_nodes(), 2);
    Eigen::VectorXd phi;
    for (int i = 0; i < to.num_nodes(); ++i) {
        from.eval(to.nodes().row(i).transpose(), phi);
        out.row(i) = phi.transpose() * X;
    }
    return out;
}

/// Projects the interior nodes of edge `facet` onto the curve, between parameters ta and tb.
void project_edge(const ReferenceElement& ref, Eigen::MatrixX2d& X, int facet, const ParametricCurve& curve,
                  double ta, double tb) {
    const int q = ref.degree();
    const double half = std::abs(tb - ta);
    const std::vector<double> line = gauss_lobatto_1d(q);
    double prev = ta;
    for (int k = 1; k < q; ++k) {
        const int id = ref.edge_node(facet, k);
        const double guess = ta + 0.5 * (1.0 + line[static_cast<std::size_t>(k)]) * (tb - ta);
        const double t = closest_point_local(curve, X.row(id).transpose(), guess, half);
        if ((t - prev) * (tb - ta) <= 0.0 || (tb - t) * (tb - ta) <= 0.0) {
            throw GeometryError("elevate_and_project: projected edge nodes are out of order");
        }
        prev = t;
        X.row(id) = curve.eval(t).transpose();
    }
}

}  // namespace

const ReferenceElement& HighOrderMesh::solution_element(int e) const {
    return reference_element(linear.elements[static_cast<std::size_t>(e)].shape, p, family);
}

const ReferenceElement& HighOrderMesh::geometry_element(int e) const {
    const ElementShape shape = linear.elements[static_cast<std::size_t>(e)].shape;
    return reference_element(shape, is_curved(e) ? q : 1);
}

Eigen::MatrixX2d HighOrderMesh::geometry_nodes(int e) const {
    if (is_curved(e)) {
        return geometry[static_cast<std::size_t>(e)];
    }
    const Element& el = linear.elements[static_cast<std::size_t>(e)];
    Eigen::MatrixX2d X(el.num_vertices(), 2);
    for (int k = 0; k < el.num_vertices(); ++k) {
        X.row(k) = linear.nodes[static_cast<std::size_t>(el.v[static_cast<std::size_t>(k)])].transpose();
    }
    return X;
}

MapPoint map_point(const HighOrderMesh& mesh, int e, const Point& xi) {
    const ReferenceElement& g = mesh.geometry_element(e);
    const Eigen::MatrixX2d X = mesh.geometry_nodes(e);
    Eigen::VectorXd phi;
    Eigen::MatrixX2d dphi;
    g.eval(xi, phi, dphi);
    MapPoint mp;
    mp.x = X.transpose() * phi;
    mp.jac = X.transpose() * dphi;
    return mp;
}

Eigen::MatrixX2d elevate_and_project(const Eigen::Matrix<double, 3, 2>& vertices, int facet,
                                     const ParametricCurve& curve, double ta, double tb, int p_target,
                                     int q_target) {
    while (tb - ta > kPi) {
        tb -= 2.0 * kPi;
    }
    while (tb - ta < -kPi) {
        tb += 2.0 * kPi;
    }
    Eigen::MatrixX2d X = vertices;
    for (int q = 2; q <= p_target + 2; ++q) {
        const ReferenceElement& prev = reference_element(ElementShape::tri, q - 1);
        const ReferenceElement& cur = reference_element(ElementShape::tri, q);
        X = interpolate_nodes(prev, X, cur);
        project_edge(cur, X, facet, curve, ta, tb);
    }
    if (q_target == p_target + 2) {
        return X;
    }
    const ReferenceElement& top = reference_element(ElementShape::tri, p_target + 2);
    const ReferenceElement& out = reference_element(ElementShape::tri, q_target);
    Eigen::MatrixX2d Y = interpolate_nodes(top, X, out);
    project_edge(out, Y, facet, curve, ta, tb);
    return Y;
}

int assembly_exactness(const HighOrderMesh& mesh, int e) { return 2 * mesh.p + (mesh.is_curved(e) ? 4 : 2); }

std::pair<double, double> jacobian_extrema(const HighOrderMesh& mesh, int e) {
    const ElementShape shape = mesh.linear.elements[static_cast<std::size_t>(e)].shape;
    const QuadratureRule rule = quadrature_rule(shape, assembly_exactness(mesh, e));
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < rule.points.rows(); ++k) {
        const double d = map_point(mesh, static_cast<int>(e), rule.points.row(k).transpose()).jac.determinant();
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    return {lo, hi};
}

HighOrderMesh insert_high_order_nodes(const LinearMixedMesh& linear, const Domain& domain, int p, int q,
                                      const HighOrderOptions& options) {
    if (p < 1 || p > 4) {
        throw ConfigError("solution degree p must be in [1, 4]");
    }
    if (q < p || q > p + 2) {
        throw ConfigError("geometry degree q must satisfy p <= q <= p + 2");
    }
    HighOrderMesh mesh;
    mesh.linear = linear;
    if (mesh.linear.sibling.size() != mesh.linear.num_elements()) {
        build_ahf(mesh.linear);
    }
    mesh.domain = &domain;
    mesh.p = p;
    mesh.q = q;
    mesh.family = options.family;
    const LinearMixedMesh& lin = mesh.linear;
    const std::size_t ne = lin.num_elements();
    mesh.curved_facet.assign(ne, -1);
    mesh.geometry.assign(ne, {});

    for (std::size_t e = 0; e < ne; ++e) {
        const Element& el = lin.elements[e];
        int facet = -1;
        for (int f = 0; f < el.num_vertices(); ++f) {
            if (lin.curved_facet_hole(static_cast<int>(e), f) >= 0) {
                if (facet >= 0 || el.shape != ElementShape::tri) {
                    throw MeshError("element " + std::to_string(e) +
                                    " has more than one curved facet or is a curved quad");
                }
                facet = f;
            }
        }
        if (facet < 0) {
            continue;
        }
        const auto [a, b] = lin.facet_nodes(static_cast<int>(e), facet);
        const NodeTag& tag = lin.tags[static_cast<std::size_t>(a)];
        const ParametricCurve& curve = domain.holes.at(static_cast<std::size_t>(tag.hole)).curve;
        Eigen::Matrix<double, 3, 2> V;
        for (int k = 0; k < 3; ++k) {
            V.row(k) = lin.nodes[static_cast<std::size_t>(el.v[static_cast<std::size_t>(k)])].transpose();
        }
        try {
            mesh.geometry[e] =
                elevate_and_project(V, facet, curve, tag.t, lin.tags[static_cast<std::size_t>(b)].t, p, q);
            mesh.curved_facet[e] = facet;
            if (jacobian_extrema(mesh, static_cast<int>(e)).first <= 0.0) {
                throw GeometryError("non-positive Jacobian determinant");
            }
        } catch (const GeometryError& err) {
            if (options.strict_geometry) {
                throw GeometryError("curved element " + std::to_string(e) + ": " + err.what());
            }
            mesh.curved_facet[e] = -1;
            mesh.geometry[e].resize(0, 2);
            ++mesh.straight_fallbacks;
        }
    }

    // Vertices keep their linear ids; edge nodes are shared through the edge key.
    mesh.nodes = lin.nodes;
    mesh.info.resize(lin.num_nodes());
    for (std::size_t i = 0; i < lin.num_nodes(); ++i) {
        mesh.info[i].kind = lin.tags[i].kind;
        mesh.info[i].hole = lin.tags[i].hole;
        mesh.info[i].t = lin.tags[i].t;
    }
    std::unordered_map<std::uint64_t, int> edge_base;
    mesh.elem_nodes.resize(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        const Element& el = lin.elements[e];
        const ReferenceElement& ref = mesh.solution_element(static_cast<int>(e));
        const int nv = el.num_vertices();
        std::vector<int>& ids = mesh.elem_nodes[e];
        ids.assign(static_cast<std::size_t>(ref.num_nodes()), -1);
        auto place = [&](int local) {
            const int id = static_cast<int>(mesh.nodes.size());
            mesh.nodes.push_back(map_point(mesh, static_cast<int>(e), ref.nodes().row(local).transpose()).x);
            mesh.info.emplace_back();
            return id;
        };
        for (int k = 0; k < nv; ++k) {
            ids[static_cast<std::size_t>(k)] = el.v[static_cast<std::size_t>(k)];
        }
        for (int f = 0; f < nv; ++f) {
            const auto [a, b] = lin.facet_nodes(static_cast<int>(e), f);
            const bool boundary = !lin.sibling[e][static_cast<std::size_t>(f)].valid();
            const int hole = lin.curved_facet_hole(static_cast<int>(e), f);
            auto [it, fresh] = edge_base.try_emplace(edge_key(a, b), static_cast<int>(mesh.nodes.size()));
            // Edge nodes are numbered consecutively from the lower vertex id.
            for (int along = 1; along < p; ++along) {
                const int k = (a < b) ? along : p - along;
                const int local = ref.edge_node(f, k);
                if (!fresh) {
                    ids[static_cast<std::size_t>(local)] = it->second + along - 1;
                    continue;
                }
                const int id = place(local);
                ids[static_cast<std::size_t>(local)] = id;
                SolutionNodeInfo& inf = mesh.info[static_cast<std::size_t>(id)];
                if (!boundary) {
                    continue;
                }
                if (hole < 0) {
                    inf.kind = NodeKind::outer;
                    continue;
                }
                inf.kind = NodeKind::hole;
                inf.hole = hole;
                double ta = lin.tags[static_cast<std::size_t>(a)].t;
                double tb = lin.tags[static_cast<std::size_t>(b)].t;
                while (tb - ta > kPi) {
                    tb -= 2.0 * kPi;
                }
                while (tb - ta < -kPi) {
                    tb += 2.0 * kPi;
                }
                const ParametricCurve& curve = domain.holes[static_cast<std::size_t>(hole)].curve;
                const double guess = ta + (static_cast<double>(k) / p) * (tb - ta);
                const double t = closest_point_local(curve, mesh.nodes[static_cast<std::size_t>(id)], guess,
                                                     std::abs(tb - ta));
                inf.t = std::fmod(t + 4.0 * kPi, 2.0 * kPi);
            }
        }
        for (int local = 0; local < ref.num_nodes(); ++local) {
            if (ids[static_cast<std::size_t>(local)] < 0) {
                ids[static_cast<std::size_t>(local)] = place(local);
            }
        }
        if (el.region == Region::gap) {
            for (int id : ids) {
                mesh.info[static_cast<std::size_t>(id)].touches_gap = true;
            }
        }
    }
    return mesh;
}

}  // namespace grsem
