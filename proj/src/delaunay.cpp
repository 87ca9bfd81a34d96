#include "delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace grsem::detail {

namespace {

constexpr double kTwoPi = 2.0 * kPi;
constexpr int kSuper = 3;

std::uint64_t dkey(int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

std::uint64_t ukey(int a, int b) { return a < b ? dkey(a, b) : dkey(b, a); }

Point circumcenter(const Point& a, const Point& b, const Point& c) {
    const Vec2 ab = b - a;
    const Vec2 ac = c - a;
    const double d = 2.0 * cross(ab, ac);
    const double ab2 = ab.squaredNorm();
    const double ac2 = ac.squaredNorm();
    return a + Vec2(ac.y() * ab2 - ab.y() * ac2, ab.x() * ac2 - ac.x() * ab2) / d;
}

double angle_at(const Point& p, const Point& q, const Point& r) {
    const Vec2 u = q - p;
    const Vec2 v = r - p;
    return std::atan2(std::abs(cross(u, v)), u.dot(v));
}

struct CurveSeg {
    int a;
    int b;
    double ta;
    double tb;
    bool alive = true;
    bool splittable = true;
};

class Builder {
public:
    explicit Builder(const GapInput& in) : in_(in) {}

    GapOutput run();

private:
    int add_vertex(const Point& p, double t) {
        pts_.push_back(p);
        par_.push_back(t);
        return static_cast<int>(pts_.size()) - 1;
    }

    int add_tri(int a, int b, int c) {
        const int id = static_cast<int>(tris_.size());
        tris_.push_back({a, b, c});
        alive_.push_back(1);
        half_[dkey(a, b)] = id;
        half_[dkey(b, c)] = id;
        half_[dkey(c, a)] = id;
        return id;
    }

    void kill_tri(int t) {
        const auto& v = tris_[static_cast<std::size_t>(t)];
        for (int i = 0; i < 3; ++i) {
            half_.erase(dkey(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>((i + 1) % 3)]));
        }
        alive_[static_cast<std::size_t>(t)] = 0;
    }

    int find(int a, int b) const {
        auto it = half_.find(dkey(a, b));
        return it == half_.end() ? -1 : it->second;
    }

    int apex(int t, int a, int b) const {
        for (int v : tris_[static_cast<std::size_t>(t)]) {
            if (v != a && v != b) {
                return v;
            }
        }
        return -1;
    }

    bool is_constrained(int a, int b) const { return constrained_.count(ukey(a, b)) != 0; }

    const Point& P(int i) const { return pts_[static_cast<std::size_t>(i)]; }

    void legalize(std::vector<std::pair<int, int>> stack);
    struct Location {
        int tri = -1;
        int edge = -1;
        bool duplicate = false;
    };
    Location locate(const Point& p) const;
    int insert_point(const Point& p, double t);
    void connect(int n, const Location& loc);
    bool split_curve_segment(std::size_t s);
    void refine();
    bool encroaches(int a, int b, const Point& p) const { return (p - P(a)).dot(p - P(b)) < 0.0; }

    const GapInput& in_;
    std::vector<Point> pts_;
    std::vector<double> par_;
    std::vector<std::array<int, 3>> tris_;
    std::vector<char> alive_;
    std::unordered_map<std::uint64_t, int> half_;
    std::unordered_set<std::uint64_t> constrained_;
    std::vector<CurveSeg> segs_;
    std::unordered_map<std::uint64_t, std::size_t> seg_index_;
    std::vector<std::array<int, 2>> loop_segs_;
    double scale_ = 1.0;
    int insertions_ = 0;
};

void Builder::legalize(std::vector<std::pair<int, int>> stack) {
    while (!stack.empty()) {
        const auto [a, b] = stack.back();
        stack.pop_back();
        const int t = find(a, b);
        if (t < 0 || is_constrained(a, b)) {
            continue;
        }
        const int u = find(b, a);
        if (u < 0) {
            continue;
        }
        const int c = apex(t, a, b);
        const int d = apex(u, b, a);
        if (c < kSuper && d < kSuper) {
            continue;
        }
        if (incircle(P(a), P(b), P(c), P(d)) <= 1e-12) {
            continue;
        }
        if (orient(P(c), P(a), P(d)) <= 0.0 || orient(P(c), P(d), P(b)) <= 0.0) {
            continue;
        }
        kill_tri(t);
        kill_tri(u);
        add_tri(c, a, d);
        add_tri(c, d, b);
        stack.emplace_back(a, d);
        stack.emplace_back(d, b);
    }
}

Builder::Location Builder::locate(const Point& p) const {
    const double tol = 1e-12 * scale_;
    for (std::size_t t = 0; t < tris_.size(); ++t) {
        if (!alive_[t]) {
            continue;
        }
        const auto& v = tris_[t];
        double dist[3];
        bool outside = false;
        for (int i = 0; i < 3; ++i) {
            const Point& a = P(v[static_cast<std::size_t>(i)]);
            const Point& b = P(v[static_cast<std::size_t>((i + 1) % 3)]);
            dist[i] = orient(a, b, p) / (b - a).norm();
            if (dist[i] < -tol) {
                outside = true;
                break;
            }
        }
        if (outside) {
            continue;
        }
        Location loc;
        loc.tri = static_cast<int>(t);
        for (int i = 0; i < 3; ++i) {
            if ((P(v[static_cast<std::size_t>(i)]) - p).norm() <= tol) {
                loc.duplicate = true;
                return loc;
            }
        }
        for (int i = 0; i < 3; ++i) {
            if (dist[i] <= tol) {
                loc.edge = i;
            }
        }
        return loc;
    }
    return {};
}

int Builder::insert_point(const Point& p, double t) {
    const Location loc = locate(p);
    if (loc.tri < 0 || loc.duplicate) {
        return -1;
    }
    if (loc.edge >= 0) {
        const auto& v = tris_[static_cast<std::size_t>(loc.tri)];
        if (is_constrained(v[static_cast<std::size_t>(loc.edge)], v[static_cast<std::size_t>((loc.edge + 1) % 3)])) {
            return -1;
        }
    }
    const int n = add_vertex(p, t);
    connect(n, loc);
    return n;
}

void Builder::connect(int n, const Location& loc) {
    const auto v = tris_[static_cast<std::size_t>(loc.tri)];
    if (loc.edge < 0) {
        kill_tri(loc.tri);
        add_tri(v[0], v[1], n);
        add_tri(v[1], v[2], n);
        add_tri(v[2], v[0], n);
        legalize({{v[0], v[1]}, {v[1], v[2]}, {v[2], v[0]}});
        return;
    }
    const int a = v[static_cast<std::size_t>(loc.edge)];
    const int b = v[static_cast<std::size_t>((loc.edge + 1) % 3)];
    const int c = v[static_cast<std::size_t>((loc.edge + 2) % 3)];
    const int u = find(b, a);
    kill_tri(loc.tri);
    add_tri(a, n, c);
    add_tri(n, b, c);
    std::vector<std::pair<int, int>> stack{{c, a}, {b, c}};
    if (u >= 0) {
        const int d = apex(u, b, a);
        kill_tri(u);
        add_tri(b, n, d);
        add_tri(n, a, d);
        stack.emplace_back(d, b);
        stack.emplace_back(a, d);
    }
    legalize(std::move(stack));
}

bool Builder::split_curve_segment(std::size_t s) {
    CurveSeg seg = segs_[s];
    if (!seg.alive || !seg.splittable) {
        return false;
    }
    const int a = seg.a;
    const int b = seg.b;
    const int t = find(b, a);
    if (t < 0) {
        segs_[s].splittable = false;
        return false;
    }
    const int c = apex(t, b, a);
    const double tm = 0.5 * (seg.ta + seg.tb);
    const Point m = in_.curve->eval(tm);
    const double side = orient(P(b), P(a), m) / (P(a) - P(b)).norm();
    const double tol = 1e-12 * scale_;
    int n = -1;
    if (side >= -tol) {
        // Midpoint falls on the gap side: it must lie inside the adjacent triangle.
        if (orient(P(a), P(c), m) <= 0.0 || orient(P(c), P(b), m) <= 0.0) {
            segs_[s].splittable = false;
            return false;
        }
        n = add_vertex(m, tm);
        kill_tri(t);
        add_tri(b, n, c);
        add_tri(n, a, c);
        constrained_.erase(ukey(a, b));
        constrained_.insert(ukey(a, n));
        constrained_.insert(ukey(n, b));
        legalize({{c, b}, {a, c}});
    } else {
        // Midpoint on the hole side: grow a triangle over the old chord.
        for (std::size_t i = kSuper; i < pts_.size(); ++i) {
            const int k = static_cast<int>(i);
            if (k == a || k == b) {
                continue;
            }
            const Point& q = P(k);
            if (orient(P(a), P(b), q) > 0.0 && orient(P(b), m, q) > 0.0 && orient(m, P(a), q) > 0.0) {
                segs_[s].splittable = false;
                return false;
            }
        }
        n = add_vertex(m, tm);
        add_tri(a, b, n);
        constrained_.erase(ukey(a, b));
        constrained_.insert(ukey(a, n));
        constrained_.insert(ukey(n, b));
        legalize({{a, b}});
    }
    ++insertions_;
    segs_[s].alive = false;
    seg_index_.erase(ukey(a, b));
    segs_.push_back({a, n, seg.ta, tm});
    seg_index_[ukey(a, n)] = segs_.size() - 1;
    segs_.push_back({n, b, tm, seg.tb});
    seg_index_[ukey(n, b)] = segs_.size() - 1;
    return true;
}

void Builder::refine() {
    const double min_angle = in_.min_angle_deg * kPi / 180.0;
    std::set<std::array<int, 3>> skip;
    bool changed = true;
    while (changed && insertions_ < in_.max_insertions) {
        changed = false;
        for (std::size_t s = 0; s < segs_.size(); ++s) {
            if (!segs_[s].alive) {
                continue;
            }
            const int t = find(segs_[s].b, segs_[s].a);
            if (t < 0) {
                continue;
            }
            const int c = apex(t, segs_[s].b, segs_[s].a);
            const double len = (P(segs_[s].a) - P(segs_[s].b)).norm();
            if (encroaches(segs_[s].a, segs_[s].b, P(c)) && len > in_.min_split_length) {
                changed |= split_curve_segment(s);
            }
        }
        const std::size_t ntri = tris_.size();
        for (std::size_t t = 0; t < ntri && insertions_ < in_.max_insertions; ++t) {
            if (!alive_[t]) {
                continue;
            }
            auto v = tris_[t];
            std::array<int, 3> key = v;
            std::sort(key.begin(), key.end());
            if (skip.count(key)) {
                continue;
            }
            const Point& p0 = P(v[0]);
            const Point& p1 = P(v[1]);
            const Point& p2 = P(v[2]);
            const double ang[3] = {angle_at(p0, p1, p2), angle_at(p1, p2, p0), angle_at(p2, p0, p1)};
            const int imin = static_cast<int>(std::min_element(ang, ang + 3) - ang);
            // Angles between two constrained edges are input angles and cannot be improved.
            const int vi = v[static_cast<std::size_t>(imin)];
            const int vn = v[static_cast<std::size_t>((imin + 1) % 3)];
            const int vp = v[static_cast<std::size_t>((imin + 2) % 3)];
            const bool input_corner = is_constrained(vi, vn) && is_constrained(vp, vi);
            const Point cc = circumcenter(p0, p1, p2);
            const double radius = (cc - p0).norm();
            const Point centroid = (p0 + p1 + p2) / 3.0;
            const bool bad = ang[imin] < min_angle && !input_corner;
            const bool big = radius > 0.8 * in_.size(centroid);
            if (!bad && !big) {
                continue;
            }
            auto encroaches_fixed = [&](const Point& x) {
                return std::any_of(loop_segs_.begin(), loop_segs_.end(),
                                   [&](const auto& ls) { return encroaches(ls[0], ls[1], x); });
            };
            Point target = cc;
            if (encroaches_fixed(target)) {
                // Fallback: apex of the equilateral triangle on the shortest edge.
                const int ia = (imin + 1) % 3;
                const Point& q0 = P(v[static_cast<std::size_t>(ia)]);
                const Point& q1 = P(v[static_cast<std::size_t>((ia + 1) % 3)]);
                const Vec2 e = q1 - q0;
                target = 0.5 * (q0 + q1) + (std::sqrt(3.0) / 2.0) * Vec2(-e.y(), e.x());
                if (!bad || encroaches_fixed(target)) {
                    skip.insert(key);
                    continue;
                }
            }
            int enc_curve = -1;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t s = 0; s < segs_.size(); ++s) {
                if (segs_[s].alive && encroaches(segs_[s].a, segs_[s].b, target)) {
                    const double d = (target - 0.5 * (P(segs_[s].a) + P(segs_[s].b))).norm();
                    if (d < best) {
                        best = d;
                        enc_curve = static_cast<int>(s);
                    }
                }
            }
            if (enc_curve >= 0) {
                const auto& s = segs_[static_cast<std::size_t>(enc_curve)];
                const double len = (P(s.a) - P(s.b)).norm();
                if (len > in_.min_split_length && split_curve_segment(static_cast<std::size_t>(enc_curve))) {
                    changed = true;
                } else {
                    skip.insert(key);
                }
                continue;
            }
            if (insert_point(target, std::numeric_limits<double>::quiet_NaN()) >= 0) {
                ++insertions_;
                changed = true;
            } else {
                skip.insert(key);
            }
        }
    }
}

GapOutput Builder::run() {
    const std::size_t nloop = in_.loop.size();
    const std::size_t ncurve = in_.curve_params.size();
    if (nloop < 3 || ncurve < 3) {
        throw MeshError("gap triangulation needs a closed loop and at least 3 curve nodes");
    }
    Point lo = in_.loop[0];
    Point hi = in_.loop[0];
    for (const Point& p : in_.loop) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    scale_ = (hi - lo).maxCoeff();
    const Point c = 0.5 * (lo + hi);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    add_vertex(c + scale_ * Vec2(-100.0, -100.0), nan);
    add_vertex(c + scale_ * Vec2(100.0, -100.0), nan);
    add_vertex(c + scale_ * Vec2(0.0, 100.0), nan);
    add_tri(0, 1, 2);

    for (const Point& p : in_.loop) {
        add_vertex(p, nan);
    }
    for (double t : in_.curve_params) {
        add_vertex(in_.curve->eval(t), t);
    }
    std::vector<int> order(nloop + ncurve);
    std::iota(order.begin(), order.end(), kSuper);
    std::mt19937 rng(20230917u);
    std::shuffle(order.begin(), order.end(), rng);

    for (int idx : order) {
        const Location loc = locate(P(idx));
        if (loc.tri < 0 || loc.duplicate) {
            throw MeshError("gap triangulation: failed to insert boundary vertex");
        }
        connect(idx, loc);
    }

    // Constraints: loop segments must already be Delaunay edges.
    for (std::size_t i = 0; i < nloop; ++i) {
        const int a = kSuper + static_cast<int>(i);
        const int b = kSuper + static_cast<int>((i + 1) % nloop);
        if (find(a, b) < 0 && find(b, a) < 0) {
            throw MeshError("gap triangulation: cavity edge missing from the Delaunay triangulation");
        }
        constrained_.insert(ukey(a, b));
        loop_segs_.push_back({a, b});
    }
    const int first_curve = kSuper + static_cast<int>(nloop);
    for (std::size_t i = 0; i < ncurve; ++i) {
        const int a = first_curve + static_cast<int>(i);
        const int b = first_curve + static_cast<int>((i + 1) % ncurve);
        const double ta = in_.curve_params[i];
        const double tb = (i + 1 < ncurve) ? in_.curve_params[i + 1] : in_.curve_params[0] + kTwoPi;
        segs_.push_back({a, b, ta, tb});
        seg_index_[ukey(a, b)] = segs_.size() - 1;
    }
    // Recover missing curve segments by midpoint splitting (conforming Delaunay).
    for (int pass = 0; pass < 64; ++pass) {
        bool missing = false;
        for (const auto& s : segs_) {
            if (s.alive && (find(s.a, s.b) >= 0 || find(s.b, s.a) >= 0)) {
                constrained_.insert(ukey(s.a, s.b));
            }
        }
        const std::size_t nseg = segs_.size();
        for (std::size_t i = 0; i < nseg; ++i) {
            if (!segs_[i].alive || find(segs_[i].a, segs_[i].b) >= 0 || find(segs_[i].b, segs_[i].a) >= 0) {
                continue;
            }
            missing = true;
            CurveSeg s = segs_[i];
            const double tm = 0.5 * (s.ta + s.tb);
            const int n = insert_point(in_.curve->eval(tm), tm);
            if (n < 0) {
                throw MeshError("gap triangulation: unable to recover a curve segment");
            }
            segs_[i].alive = false;
            seg_index_.erase(ukey(s.a, s.b));
            segs_.push_back({s.a, n, s.ta, tm});
            seg_index_[ukey(s.a, n)] = segs_.size() - 1;
            segs_.push_back({n, s.b, tm, s.tb});
            seg_index_[ukey(n, s.b)] = segs_.size() - 1;
        }
        if (!missing) {
            break;
        }
        if (pass == 63) {
            throw MeshError("gap triangulation: curve segment recovery did not converge");
        }
    }

    // Keep only the triangles reachable from the gap side of the cavity loop.
    const int seed = find(kSuper, kSuper + 1);
    if (seed < 0) {
        throw MeshError("gap triangulation: no triangle on the gap side of the cavity loop");
    }
    std::vector<char> in_gap(tris_.size(), 0);
    std::vector<int> stack{seed};
    in_gap[static_cast<std::size_t>(seed)] = 1;
    while (!stack.empty()) {
        const int t = stack.back();
        stack.pop_back();
        const auto v = tris_[static_cast<std::size_t>(t)];
        for (int i = 0; i < 3; ++i) {
            const int a = v[static_cast<std::size_t>(i)];
            const int b = v[static_cast<std::size_t>((i + 1) % 3)];
            if (is_constrained(a, b)) {
                continue;
            }
            const int u = find(b, a);
            if (u >= 0 && !in_gap[static_cast<std::size_t>(u)]) {
                in_gap[static_cast<std::size_t>(u)] = 1;
                stack.push_back(u);
            }
        }
    }
    for (std::size_t t = 0; t < tris_.size(); ++t) {
        if (alive_[t] && !in_gap[t]) {
            kill_tri(static_cast<int>(t));
        }
    }
    for (std::size_t t = 0; t < tris_.size(); ++t) {
        if (alive_[t]) {
            for (int v : tris_[t]) {
                if (v < kSuper) {
                    throw MeshError("gap triangulation: region leaks to the bounding triangle");
                }
            }
        }
    }
    for (const auto& s : segs_) {
        if (s.alive && (find(s.b, s.a) < 0 || find(s.a, s.b) >= 0)) {
            throw MeshError("gap triangulation: curve segment is not a gap boundary edge");
        }
    }

    refine();

    GapOutput out;
    out.points.assign(pts_.begin() + kSuper, pts_.end());
    out.params.reserve(out.points.size());
    for (std::size_t i = kSuper; i < par_.size(); ++i) {
        double t = par_[i];
        if (std::isfinite(t)) {
            t = std::fmod(t, kTwoPi);
            if (t < 0.0) {
                t += kTwoPi;
            }
        }
        out.params.push_back(t);
    }
    for (std::size_t t = 0; t < tris_.size(); ++t) {
        if (alive_[t]) {
            const auto& v = tris_[t];
            out.triangles.push_back({v[0] - kSuper, v[1] - kSuper, v[2] - kSuper});
        }
    }
    for (const auto& s : segs_) {
        if (s.alive) {
            out.curve_segments.push_back({s.a - kSuper, s.b - kSuper});
        }
    }
    return out;
}

}  // namespace

double incircle(const Point& a, const Point& b, const Point& c, const Point& d) {
    const Vec2 ad = a - d;
    const Vec2 bd = b - d;
    const Vec2 cd = c - d;
    const double det = ad.squaredNorm() * cross(bd, cd) - bd.squaredNorm() * cross(ad, cd) +
                       cd.squaredNorm() * cross(ad, bd);
    const double s = std::max({(a - b).squaredNorm(), (b - c).squaredNorm(), (c - a).squaredNorm()});
    return det / (s * s);
}

GapOutput triangulate_annulus(const GapInput& input) { return Builder(input).run(); }

}  // namespace grsem::detail
