#include "grsem/meshgen.hpp"

#include "delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>

namespace grsem {

namespace {

constexpr double kTwoPi = 2.0 * kPi;

std::uint64_t edge_key(int a, int b) {
    if (a > b) {
        std::swap(a, b);
    }
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

bool on_box(const Point& p, const Point& lo, const Point& hi) {
    constexpr double tol = 1e-12;
    return std::abs(p.x() - lo.x()) < tol || std::abs(p.x() - hi.x()) < tol || std::abs(p.y() - lo.y()) < tol ||
           std::abs(p.y() - hi.y()) < tol;
}

/// Winding number of a closed polygon around p.
int winding(const std::vector<Point>& poly, const Point& p) {
    int w = 0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point& a = poly[i];
        const Point& b = poly[(i + 1) % poly.size()];
        if (a.y() <= p.y()) {
            if (b.y() > p.y() && orient(a, b, p) > 0.0) {
                ++w;
            }
        } else if (b.y() <= p.y() && orient(a, b, p) < 0.0) {
            --w;
        }
    }
    return w;
}

}  // namespace

std::array<int, 2> LinearMixedMesh::facet_nodes(int e, int f) const {
    const Element& el = elements[static_cast<std::size_t>(e)];
    const int n = el.num_vertices();
    return {el.v[static_cast<std::size_t>(f)], el.v[static_cast<std::size_t>((f + 1) % n)]};
}

double LinearMixedMesh::signed_area(int e) const {
    const Element& el = elements[static_cast<std::size_t>(e)];
    const int n = el.num_vertices();
    double a = 0.0;
    for (int i = 0; i < n; ++i) {
        a += cross(nodes[static_cast<std::size_t>(el.v[static_cast<std::size_t>(i)])],
                   nodes[static_cast<std::size_t>(el.v[static_cast<std::size_t>((i + 1) % n)])]);
    }
    return 0.5 * a;
}

int LinearMixedMesh::curved_facet_hole(int e, int f) const {
    if (sibling[static_cast<std::size_t>(e)][static_cast<std::size_t>(f)].valid()) {
        return -1;
    }
    const auto [a, b] = facet_nodes(e, f);
    const NodeTag& ta = tags[static_cast<std::size_t>(a)];
    const NodeTag& tb = tags[static_cast<std::size_t>(b)];
    if (ta.kind == NodeKind::hole && tb.kind == NodeKind::hole && ta.hole == tb.hole) {
        return ta.hole;
    }
    return -1;
}

int LinearMixedMesh::count_curved_facets(int e) const {
    int c = 0;
    for (int f = 0; f < elements[static_cast<std::size_t>(e)].num_vertices(); ++f) {
        c += curved_facet_hole(e, f) >= 0 ? 1 : 0;
    }
    return c;
}

std::size_t LinearMixedMesh::count(ElementShape shape) const {
    return static_cast<std::size_t>(
        std::count_if(elements.begin(), elements.end(), [shape](const Element& el) { return el.shape == shape; }));
}

LinearMixedMesh structured_grid(const Point& lower, const Point& upper, double h) {
    if (!(h > 0.0)) {
        throw MeshError("structured_grid: h must be positive");
    }
    const Vec2 extent = upper - lower;
    const int nx = std::max(1, static_cast<int>(std::ceil(extent.x() / h - 1e-9)));
    const int ny = std::max(1, static_cast<int>(std::ceil(extent.y() / h - 1e-9)));
    LinearMixedMesh mesh;
    mesh.nodes.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            // Exact endpoints so that boundary nodes sit on the box.
            const double x = (i == nx) ? upper.x() : lower.x() + extent.x() * i / nx;
            const double y = (j == ny) ? upper.y() : lower.y() + extent.y() * j / ny;
            mesh.nodes.emplace_back(x, y);
            NodeTag tag;
            if (i == 0 || j == 0 || i == nx || j == ny) {
                tag.kind = NodeKind::outer;
            }
            mesh.tags.push_back(tag);
        }
    }
    auto id = [nx](int i, int j) { return i + (nx + 1) * j; };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            Element el;
            el.shape = ElementShape::quad;
            el.v = {id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)};
            mesh.elements.push_back(el);
        }
    }
    build_ahf(mesh);
    return mesh;
}

CavityCut cut_near_boundary(const LinearMixedMesh& grid, const Domain& domain, double clearance) {
    if (!(clearance > 0.0)) {
        throw MeshError("cut_near_boundary: clearance must be positive");
    }
    const std::size_t nn = grid.num_nodes();
    std::vector<char> removed(nn, 0);
    for (std::size_t i = 0; i < nn; ++i) {
        const Point& p = grid.nodes[i];
        if (contains(domain, p) != Containment::inside) {
            removed[i] = 1;
            continue;
        }
        for (const Hole& hole : domain.holes) {
            const auto [lo, hi] = hole.curve.bounding_box();
            const Vec2 pad(clearance, clearance);
            if ((p.array() < (lo - pad).array()).any() || (p.array() > (hi + pad).array()).any()) {
                continue;
            }
            if (distance_to_curve(hole.curve, p) < clearance) {
                removed[i] = 1;
                break;
            }
        }
    }

    const std::size_t ne = grid.num_elements();
    std::vector<char> keep(ne, 0);
    for (std::size_t e = 0; e < ne; ++e) {
        const Element& el = grid.elements[e];
        keep[e] = 1;
        for (int k = 0; k < el.num_vertices(); ++k) {
            if (removed[static_cast<std::size_t>(el.v[static_cast<std::size_t>(k)])]) {
                keep[e] = 0;
            }
        }
    }

    // Drop protruding quads and pinch configurations until the cavity boundary is a set of simple loops.
    auto hole_distance = [&](const Point& p) {
        double d = std::numeric_limits<double>::infinity();
        for (const Hole& h : domain.holes) {
            d = std::min(d, (p - h.curve.center()).norm());
        }
        return d;
    };
    auto exposed = [&](int e, int f) {
        const HalfFacet& s = grid.sibling[static_cast<std::size_t>(e)][static_cast<std::size_t>(f)];
        if (s.valid()) {
            return !keep[static_cast<std::size_t>(s.elem)];
        }
        return false;  // outer box facet
    };
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t e = 0; e < ne; ++e) {
            if (!keep[e]) {
                continue;
            }
            int n_exposed = 0;
            for (int f = 0; f < 4; ++f) {
                n_exposed += exposed(static_cast<int>(e), f) ? 1 : 0;
            }
            if (n_exposed >= 3) {
                keep[e] = 0;
                changed = true;
            }
        }
        std::vector<std::vector<int>> incident(nn);
        for (std::size_t e = 0; e < ne; ++e) {
            if (keep[e]) {
                for (int v : grid.elements[e].v) {
                    incident[static_cast<std::size_t>(v)].push_back(static_cast<int>(e));
                }
            }
        }
        for (std::size_t v = 0; v < nn; ++v) {
            const auto& inc = incident[v];
            if (inc.size() != 2 || grid.tags[v].kind == NodeKind::outer) {
                continue;
            }
            // Two quads sharing only this vertex.
            const auto& a = grid.elements[static_cast<std::size_t>(inc[0])].v;
            const auto& b = grid.elements[static_cast<std::size_t>(inc[1])].v;
            int shared = 0;
            for (int x : a) {
                shared += static_cast<int>(std::count(b.begin(), b.end(), x));
            }
            if (shared != 1) {
                continue;
            }
            auto centroid = [&](int e) {
                Point c = Point::Zero();
                for (int x : grid.elements[static_cast<std::size_t>(e)].v) {
                    c += grid.nodes[static_cast<std::size_t>(x)];
                }
                return Point(c / 4.0);
            };
            const int drop = hole_distance(centroid(inc[0])) <= hole_distance(centroid(inc[1])) ? inc[0] : inc[1];
            keep[static_cast<std::size_t>(drop)] = 0;
            changed = true;
            break;
        }
    }

    CavityCut cut;
    std::vector<int> new_id(nn, -1);
    for (std::size_t e = 0; e < ne; ++e) {
        if (!keep[e]) {
            continue;
        }
        Element el = grid.elements[e];
        for (int& v : el.v) {
            if (new_id[static_cast<std::size_t>(v)] < 0) {
                new_id[static_cast<std::size_t>(v)] = static_cast<int>(cut.mesh.nodes.size());
                cut.mesh.nodes.push_back(grid.nodes[static_cast<std::size_t>(v)]);
                cut.mesh.tags.push_back(grid.tags[static_cast<std::size_t>(v)]);
            }
            v = new_id[static_cast<std::size_t>(v)];
        }
        el.region = Region::structured;
        cut.mesh.elements.push_back(el);
    }
    build_ahf(cut.mesh);

    // Directed loop edges with the gap on the left: reverse of the quad's own edge.
    std::map<int, int> next;
    const Point lo = domain.lower;
    const Point hi = domain.upper;
    for (std::size_t e = 0; e < cut.mesh.num_elements(); ++e) {
        for (int f = 0; f < 4; ++f) {
            if (cut.mesh.sibling[e][static_cast<std::size_t>(f)].valid()) {
                continue;
            }
            const auto [a, b] = cut.mesh.facet_nodes(static_cast<int>(e), f);
            const Point& pa = cut.mesh.nodes[static_cast<std::size_t>(a)];
            const Point& pb = cut.mesh.nodes[static_cast<std::size_t>(b)];
            if (on_box(pa, lo, hi) && on_box(pb, lo, hi) && on_box(0.5 * (pa + pb), lo, hi)) {
                continue;
            }
            if (next.count(b)) {
                throw MeshError("cut_near_boundary: cavity loop is not closed (pinched vertex)");
            }
            next[b] = a;
        }
    }
    while (!next.empty()) {
        std::vector<int> loop;
        int start = next.begin()->first;
        int cur = start;
        do {
            auto it = next.find(cur);
            if (it == next.end()) {
                if (on_box(cut.mesh.nodes[static_cast<std::size_t>(cur)], lo, hi)) {
                    throw MeshError("cut_near_boundary: cavity reaches the outer boundary (h too coarse for the hole)");
                }
                throw MeshError("cut_near_boundary: cavity loop is not closed");
            }
            loop.push_back(cur);
            const int nxt = it->second;
            next.erase(it);
            cur = nxt;
        } while (cur != start);
        cut.loops.push_back(std::move(loop));
    }
    return cut;
}

double SizingField::at(double param) const {
    if (h.empty()) {
        return h_max;
    }
    double s = std::fmod(param, kTwoPi);
    if (s < 0.0) {
        s += kTwoPi;
    }
    const auto n = static_cast<long>(h.size());
    const long i = std::lround(s / kTwoPi * static_cast<double>(n)) % n;
    return h[static_cast<std::size_t>(i)];
}

double target_edge_length(double curvature, double theta_max, double h_min, double h_max) {
    if (!(curvature > 0.0)) {
        return h_max;
    }
    return std::min(std::max(theta_max / curvature, h_min), h_max);
}

SizingField sizing_from_curvature(const ParametricCurve& curve, double theta_max, double h_min, double h_max,
                                  int n_samples) {
    if (!(theta_max > 0.0) || !(h_min > 0.0) || h_min > h_max) {
        throw MeshError("sizing_from_curvature: require theta_max > 0 and 0 < h_min <= h_max");
    }
    SizingField f;
    f.theta_max = theta_max;
    f.h_min = h_min;
    f.h_max = h_max;
    f.t.resize(static_cast<std::size_t>(n_samples));
    f.h.resize(static_cast<std::size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i) {
        const double t = kTwoPi * i / n_samples;
        f.t[static_cast<std::size_t>(i)] = t;
        f.h[static_cast<std::size_t>(i)] = target_edge_length(curve.curvature(t), theta_max, h_min, h_max);
    }
    return f;
}

SizingField uniform_sizing(double h, int n_samples) {
    SizingField f;
    f.theta_max = 0.0;
    f.h_min = h;
    f.h_max = h;
    f.t.resize(static_cast<std::size_t>(n_samples));
    f.h.assign(static_cast<std::size_t>(n_samples), h);
    for (int i = 0; i < n_samples; ++i) {
        f.t[static_cast<std::size_t>(i)] = kTwoPi * i / n_samples;
    }
    return f;
}

std::vector<double> place_boundary_nodes(const ParametricCurve& curve, const SizingField& sizing, double grading) {
    const std::size_t n = sizing.t.size();
    // Arc length between consecutive samples (4 sub-chords each).
    std::vector<double> ds(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t0 = sizing.t[i];
        const double t1 = (i + 1 < n) ? sizing.t[i + 1] : kTwoPi;
        double len = 0.0;
        Point prev = curve.eval(t0);
        for (int k = 1; k <= 4; ++k) {
            const Point cur = curve.eval(t0 + (t1 - t0) * k / 4.0);
            len += (cur - prev).norm();
            prev = cur;
        }
        ds[i] = len;
    }
    // Limit |dh/ds| so equidistributed neighbours differ by less than `grading`.
    const double slope = 0.8 * (grading - 1.0);
    std::vector<double> h = sizing.h;
    for (int sweep = 0; sweep < 2; ++sweep) {
        for (std::size_t k = 1; k <= 2 * n; ++k) {
            const std::size_t i = k % n;
            const std::size_t j = (k - 1) % n;
            h[i] = std::min(h[i], h[j] + slope * ds[j]);
        }
        for (std::size_t k = 2 * n; k >= 1; --k) {
            const std::size_t i = (k - 1) % n;
            const std::size_t j = k % n;
            h[i] = std::min(h[i], h[j] + slope * ds[i]);
        }
    }
    // Cumulative count of target lengths.
    std::vector<double> phi(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double hj = h[(i + 1) % n];
        phi[i + 1] = phi[i] + ds[i] * 0.5 * (1.0 / h[i] + 1.0 / hj);
    }
    const int segments = std::max(6, static_cast<int>(std::lround(phi[n])));
    std::vector<double> params;
    params.reserve(static_cast<std::size_t>(segments));
    std::size_t i = 0;
    for (int k = 0; k < segments; ++k) {
        const double target = phi[n] * k / segments;
        while (i + 1 < n && phi[i + 1] < target) {
            ++i;
        }
        const double t0 = sizing.t[i];
        const double t1 = (i + 1 < n) ? sizing.t[i + 1] : kTwoPi;
        const double w = (phi[i + 1] > phi[i]) ? (target - phi[i]) / (phi[i + 1] - phi[i]) : 0.0;
        params.push_back(t0 + std::clamp(w, 0.0, 1.0) * (t1 - t0));
    }
    return params;
}

GapMesh triangulate_gap(const std::vector<Point>& loop, const ParametricCurve& curve, const SizingField& sizing,
                        double interior_h, double grading, double min_angle_deg) {
    const std::vector<double> params = place_boundary_nodes(curve, sizing, grading);
    std::vector<Point> bnodes;
    std::vector<double> local_h;
    for (std::size_t i = 0; i < params.size(); ++i) {
        bnodes.push_back(curve.eval(params[i]));
    }
    for (std::size_t i = 0; i < bnodes.size(); ++i) {
        const Point& prev = bnodes[(i + bnodes.size() - 1) % bnodes.size()];
        const Point& next = bnodes[(i + 1) % bnodes.size()];
        local_h.push_back(0.5 * ((bnodes[i] - prev).norm() + (bnodes[i] - next).norm()));
    }
    const double slope = grading - 1.0;
    detail::GapInput in;
    in.loop = loop;
    in.curve = &curve;
    in.curve_params = params;
    in.size = [bnodes, local_h, slope, interior_h](const Point& x) {
        double s = interior_h;
        for (std::size_t i = 0; i < bnodes.size(); ++i) {
            s = std::min(s, local_h[i] + slope * (x - bnodes[i]).norm());
        }
        return s;
    };
    in.min_split_length = 0.5 * *std::min_element(sizing.h.begin(), sizing.h.end());
    in.min_angle_deg = min_angle_deg;
    detail::GapOutput out = detail::triangulate_annulus(in);
    GapMesh g;
    g.points = std::move(out.points);
    g.params = std::move(out.params);
    g.triangles = std::move(out.triangles);
    return g;
}

void build_ahf(LinearMixedMesh& mesh) {
    mesh.sibling.assign(mesh.num_elements(), {});
    std::unordered_map<std::uint64_t, HalfFacet> first;
    first.reserve(mesh.num_elements() * 4);
    std::unordered_map<std::uint64_t, int> count;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const int nf = mesh.elements[e].num_vertices();
        for (int f = 0; f < nf; ++f) {
            const auto [a, b] = mesh.facet_nodes(static_cast<int>(e), f);
            const std::uint64_t k = edge_key(a, b);
            const int c = ++count[k];
            if (c == 1) {
                first[k] = {static_cast<int>(e), f};
            } else if (c == 2) {
                const HalfFacet other = first[k];
                mesh.sibling[e][static_cast<std::size_t>(f)] = other;
                mesh.sibling[static_cast<std::size_t>(other.elem)][static_cast<std::size_t>(other.facet)] = {
                    static_cast<int>(e), f};
            } else {
                throw MeshError("build_ahf: non-manifold edge (" + std::to_string(a) + ", " + std::to_string(b) +
                                ") shared by more than two elements");
            }
        }
    }
}

int enforce_single_boundary_facet(LinearMixedMesh& mesh) {
    if (mesh.sibling.size() != mesh.num_elements()) {
        build_ahf(mesh);
    }
    int flips = 0;
    for (int guard = 0; guard < 10000; ++guard) {
        int bad = -1;
        for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
            if (mesh.elements[e].shape == ElementShape::tri && mesh.count_curved_facets(static_cast<int>(e)) >= 2) {
                bad = static_cast<int>(e);
                break;
            }
        }
        if (bad < 0) {
            return flips;
        }
        // Flip the one facet that is not on the curve.
        int f = -1;
        for (int k = 0; k < 3; ++k) {
            if (mesh.curved_facet_hole(bad, k) < 0 && mesh.sibling[static_cast<std::size_t>(bad)][static_cast<std::size_t>(k)].valid()) {
                f = k;
            }
        }
        if (f < 0) {
            throw MeshError("enforce_single_boundary_facet: element " + std::to_string(bad) +
                            " has no interior facet to flip");
        }
        const HalfFacet nb = mesh.sibling[static_cast<std::size_t>(bad)][static_cast<std::size_t>(f)];
        Element& t = mesh.elements[static_cast<std::size_t>(bad)];
        Element& u = mesh.elements[static_cast<std::size_t>(nb.elem)];
        if (u.shape != ElementShape::tri) {
            throw MeshError("enforce_single_boundary_facet: element " + std::to_string(bad) +
                            " borders a quad across its interior facet");
        }
        const int x = t.v[static_cast<std::size_t>(f)];
        const int y = t.v[static_cast<std::size_t>((f + 1) % 3)];
        const int z = t.v[static_cast<std::size_t>((f + 2) % 3)];
        const int w = u.v[static_cast<std::size_t>((nb.facet + 2) % 3)];
        const auto& P = mesh.nodes;
        if (orient(P[static_cast<std::size_t>(z)], P[static_cast<std::size_t>(x)], P[static_cast<std::size_t>(w)]) <= 0.0 ||
            orient(P[static_cast<std::size_t>(z)], P[static_cast<std::size_t>(w)], P[static_cast<std::size_t>(y)]) <= 0.0) {
            throw MeshError("enforce_single_boundary_facet: flip would invert element " + std::to_string(bad));
        }
        t.v = {z, x, w, -1};
        u.v = {z, w, y, -1};
        build_ahf(mesh);
        ++flips;
    }
    throw MeshError("enforce_single_boundary_facet: flip pass did not terminate");
}

LinearMixedMesh generate_mesh(const Domain& domain, const MeshOptions& opt) {
    domain.validate();
    LinearMixedMesh grid = structured_grid(domain.lower, domain.upper, opt.h);
    const Vec2 extent = domain.upper - domain.lower;
    const double dx = extent.x() / std::ceil(extent.x() / opt.h - 1e-9);
    CavityCut cut = cut_near_boundary(grid, domain, opt.clearance_factor * dx);
    LinearMixedMesh mesh = std::move(cut.mesh);

    for (const auto& loop : cut.loops) {
        std::vector<Point> poly;
        for (int v : loop) {
            poly.push_back(mesh.nodes[static_cast<std::size_t>(v)]);
        }
        int hole_id = -1;
        for (std::size_t h = 0; h < domain.holes.size(); ++h) {
            if (winding(poly, domain.holes[h].curve.eval(0.0)) != 0) {
                if (hole_id >= 0) {
                    throw MeshError("generate_mesh: a cavity loop encloses more than one hole");
                }
                hole_id = static_cast<int>(h);
            }
        }
        if (hole_id < 0) {
            throw MeshError("generate_mesh: cavity loop without a hole");
        }
        const ParametricCurve& curve = domain.holes[static_cast<std::size_t>(hole_id)].curve;
        const SizingField sizing =
            opt.gr == GrMode::none
                ? uniform_sizing(opt.h_max_factor * dx, opt.sizing_samples)
                : sizing_from_curvature(curve, opt.theta_max, opt.h_min_factor * dx, opt.h_max_factor * dx,
                                        opt.sizing_samples);
        const GapMesh gap = triangulate_gap(poly, curve, sizing, dx, opt.grading, opt.min_angle_deg);
        std::vector<int> gid(gap.points.size(), -1);
        for (std::size_t i = 0; i < gap.points.size(); ++i) {
            if (i < loop.size()) {
                gid[i] = loop[i];
                continue;
            }
            gid[i] = static_cast<int>(mesh.nodes.size());
            mesh.nodes.push_back(gap.points[i]);
            NodeTag tag;
            if (std::isfinite(gap.params[i])) {
                tag.kind = NodeKind::hole;
                tag.hole = hole_id;
                tag.t = gap.params[i];
            }
            mesh.tags.push_back(tag);
        }
        for (const auto& tri : gap.triangles) {
            Element el;
            el.shape = ElementShape::tri;
            el.region = Region::gap;
            el.v = {gid[static_cast<std::size_t>(tri[0])], gid[static_cast<std::size_t>(tri[1])],
                    gid[static_cast<std::size_t>(tri[2])], -1};
            mesh.elements.push_back(el);
        }
    }
    build_ahf(mesh);
    enforce_single_boundary_facet(mesh);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        if (mesh.signed_area(static_cast<int>(e)) <= 0.0) {
            throw MeshError("generate_mesh: element " + std::to_string(e) + " has non-positive area");
        }
    }
    return mesh;
}

std::vector<double> element_angles_deg(const LinearMixedMesh& mesh, int e) {
    const Element& el = mesh.elements[static_cast<std::size_t>(e)];
    const int n = el.num_vertices();
    std::vector<double> out;
    for (int i = 0; i < n; ++i) {
        const Point& p = mesh.nodes[static_cast<std::size_t>(el.v[static_cast<std::size_t>(i)])];
        const Point& q = mesh.nodes[static_cast<std::size_t>(el.v[static_cast<std::size_t>((i + 1) % n)])];
        const Point& r = mesh.nodes[static_cast<std::size_t>(el.v[static_cast<std::size_t>((i + n - 1) % n)])];
        const Vec2 u = q - p;
        const Vec2 v = r - p;
        out.push_back(std::atan2(std::abs(cross(u, v)), u.dot(v)) * 180.0 / kPi);
    }
    return out;
}

MeshQuality mesh_quality(const LinearMixedMesh& mesh) {
    MeshQuality q;
    q.min_area = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        for (double a : element_angles_deg(mesh, static_cast<int>(e))) {
            q.min_angle_deg = std::min(q.min_angle_deg, a);
            q.max_angle_deg = std::max(q.max_angle_deg, a);
        }
        q.min_area = std::min(q.min_area, mesh.signed_area(static_cast<int>(e)));
    }
    q.num_quads = mesh.count(ElementShape::quad);
    q.num_tris = mesh.count(ElementShape::tri);
    return q;
}

}  // namespace grsem
