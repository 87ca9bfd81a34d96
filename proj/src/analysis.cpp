#include "grsem/analysis.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

namespace grsem {

ExactValue exact_solution(double omega, const Point& x) {
    const double a = omega * kPi;
    const double sx = std::sin(a * x.x());
    const double cx = std::cos(a * x.x());
    const double sy = std::sin(a * x.y());
    const double cy = std::cos(a * x.y());
    ExactValue v;
    v.u = sx * cy + x.x() * x.y();
    v.grad = Vec2(a * cx * cy + x.y(), -a * sx * sy + x.x());
    return v;
}

Vec2 model_velocity(const Point& x) { return Vec2(x.x(), -x.y()); }

double derived_source(double omega, const Point& x) {
    const double a = omega * kPi;
    const double s = std::sin(a * x.x()) * std::cos(a * x.y());
    // -lap(xy) = 0 and v . grad(xy) = xy - xy = 0.
    const ExactValue e = exact_solution(omega, x);
    const Vec2 grad_wave = e.grad - Vec2(x.y(), x.x());
    return 2.0 * a * a * s + model_velocity(x).dot(grad_wave);
}

PdeCoefficients ManufacturedCase::coefficients() const {
    PdeCoefficients c;
    c.velocity = model_velocity;
    const double w = omega;
    c.source = [w](const Point& x) { return derived_source(w, x); };
    return c;
}

BoundaryData ManufacturedCase::boundary_data(const Domain& domain) const {
    BoundaryData b;
    const double w = omega;
    b.dirichlet = [w](const Point& x) { return exact_solution(w, x).u; };
    const Domain* d = &domain;
    b.neumann = [w, d](const Point& x, const Vec2& discrete_normal, int hole) {
        if (hole < 0) {
            return exact_solution(w, x).grad.dot(discrete_normal);
        }
        const ParametricCurve& curve = d->holes[static_cast<std::size_t>(hole)].curve;
        const double t = closest_point(curve, x);
        return exact_solution(w, curve.eval(t)).grad.dot(curve.normal(t));
    };
    return b;
}

CurveFlux ManufacturedCase::curve_flux(const Domain& domain) const {
    const double w = omega;
    const Domain* d = &domain;
    return [w, d](int hole, double t) {
        const ParametricCurve& curve = d->holes[static_cast<std::size_t>(hole)].curve;
        return exact_solution(w, curve.eval(t)).grad.dot(curve.normal(t));
    };
}

Eigen::VectorXd ManufacturedCase::nodal_values(const HighOrderMesh& mesh) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(mesh.num_nodes()));
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        v(static_cast<Eigen::Index>(i)) = u(mesh.nodes[i]);
    }
    return v;
}

std::vector<int> all_nodes(const HighOrderMesh& mesh) {
    std::vector<int> ids(mesh.num_nodes());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        ids[i] = static_cast<int>(i);
    }
    return ids;
}

std::vector<int> interior_nodes(const HighOrderMesh& mesh) {
    std::vector<int> ids;
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        if (!mesh.info[i].touches_gap) {
            ids.push_back(static_cast<int>(i));
        }
    }
    return ids;
}

double l2_nodal_error(const Eigen::VectorXd& u, const Eigen::VectorXd& exact, const std::vector<int>& subset) {
    if (subset.empty()) {
        throw ConfigError("l2_nodal_error: empty node subset");
    }
    double s = 0.0;
    for (int i : subset) {
        const double d = u(i) - exact(i);
        s += d * d;
    }
    return std::sqrt(s);
}

double rms_nodal_error(const Eigen::VectorXd& u, const Eigen::VectorXd& exact, const std::vector<int>& subset) {
    return l2_nodal_error(u, exact, subset) / std::sqrt(static_cast<double>(subset.size()));
}

double convergence_rate(double error_coarse, double error_fine, double dof_coarse, double dof_fine, int dim) {
    if (!(error_coarse > 0.0) || !(error_fine > 0.0)) {
        throw ConfigError("convergence_rate: errors must be positive");
    }
    if (!(dof_coarse > 0.0) || !(dof_fine > 0.0) || dof_coarse == dof_fine || dim < 1) {
        throw ConfigError("convergence_rate: dof counts must be positive and distinct");
    }
    return -std::log(error_fine / error_coarse) / (std::log(dof_fine / dof_coarse) / dim);
}

namespace {

double max_angle_of(const LinearMixedMesh& mesh, const std::vector<int>& elems) {
    double m = 0.0;
    for (int e : elems) {
        for (double a : element_angles_deg(mesh, e)) {
            m = std::max(m, a);
        }
    }
    return m;
}

double global_max_angle(const LinearMixedMesh& mesh) {
    double m = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        for (double a : element_angles_deg(mesh, static_cast<int>(e))) {
            m = std::max(m, a);
        }
    }
    return m;
}

/// Candidate move: node i along unit direction d for at most s_max.
struct Move {
    int node = -1;
    Vec2 dir = Vec2::Zero();
    double s_max = 0.0;
    double rate = 0.0;
};

}  // namespace

LinearMixedMesh distort_mesh(const LinearMixedMesh& mesh, double max_angle_deg) {
    if (!(max_angle_deg > 90.0) || !(max_angle_deg < 180.0)) {
        throw ConfigError("distort_mesh: target angle must lie in (90, 180) degrees");
    }
    const double current = global_max_angle(mesh);
    if (std::abs(current - max_angle_deg) <= 0.01) {
        return mesh;
    }
    if (max_angle_deg < current) {
        throw MeshError("distort_mesh: the mesh already has a larger angle than the target");
    }

    const std::size_t nn = mesh.num_nodes();
    std::vector<std::vector<int>> star(nn);
    std::vector<char> movable(nn, 1);
    std::vector<char> near_curve(nn, 0);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const Element& el = mesh.elements[e];
        bool touches_hole = false;
        for (int k = 0; k < el.num_vertices(); ++k) {
            touches_hole = touches_hole || mesh.tags[static_cast<std::size_t>(el.v[static_cast<std::size_t>(k)])].kind ==
                                               NodeKind::hole;
        }
        for (int k = 0; k < el.num_vertices(); ++k) {
            const auto v = static_cast<std::size_t>(el.v[static_cast<std::size_t>(k)]);
            star[v].push_back(static_cast<int>(e));
            if (el.shape != ElementShape::tri || mesh.tags[v].kind != NodeKind::interior) {
                movable[v] = 0;
            }
            near_curve[v] = near_curve[v] || touches_hole;
        }
    }

    // Scan every movable node and incident edge line; the preferred move
    // reaches a flat angle with the smallest displacement.
    Move best;
    Move best_near;
    LinearMixedMesh trial = mesh;
    for (std::size_t i = 0; i < nn; ++i) {
        if (!movable[i] || star[i].empty()) {
            continue;
        }
        const Point xi = mesh.nodes[i];
        const double amax = max_angle_of(mesh, star[i]);
        for (int e : star[i]) {
            const Element& el = mesh.elements[static_cast<std::size_t>(e)];
            for (int k = 0; k < 3; ++k) {
                const int m = el.v[static_cast<std::size_t>(k)];
                if (m == static_cast<int>(i)) {
                    continue;
                }
                const Vec2 dir = (xi - mesh.nodes[static_cast<std::size_t>(m)]).normalized();
                // Largest step that keeps every star triangle positive.
                double s_max = std::numeric_limits<double>::infinity();
                for (int f : star[i]) {
                    const Element& t = mesh.elements[static_cast<std::size_t>(f)];
                    int loc = 0;
                    while (t.v[static_cast<std::size_t>(loc)] != static_cast<int>(i)) {
                        ++loc;
                    }
                    const Point& a = mesh.nodes[static_cast<std::size_t>(t.v[static_cast<std::size_t>((loc + 1) % 3)])];
                    const Point& b = mesh.nodes[static_cast<std::size_t>(t.v[static_cast<std::size_t>((loc + 2) % 3)])];
                    // orient(a, b, xi + s dir) = orient(a, b, xi) + s cross(b - a, dir)
                    const double o = orient(a, b, xi);
                    const double slope = cross(b - a, dir);
                    if (slope < 0.0) {
                        s_max = std::min(s_max, -o / slope);
                    }
                }
                if (!std::isfinite(s_max) || s_max <= 0.0) {
                    continue;
                }
                // A move that runs into another vertex degenerates two
                // triangles at once and the angle jumps instead of sweeping.
                trial.nodes[i] = xi + (1.0 - 1e-9) * s_max * dir;
                const double reachable = max_angle_of(trial, star[i]);
                trial.nodes[i] = xi;
                if (reachable < max_angle_deg) {
                    continue;
                }
                Move mv{static_cast<int>(i), dir, s_max, (180.0 - amax) / s_max};
                Move& slot = near_curve[i] ? best_near : best;
                if (mv.rate > slot.rate) {
                    slot = mv;
                }
            }
        }
    }
    const Move chosen = best.node >= 0 ? best : best_near;
    if (chosen.node < 0) {
        throw MeshError("distort_mesh: no interior gap-triangle node can be moved");
    }

    LinearMixedMesh out = mesh;
    const Point x0 = mesh.nodes[static_cast<std::size_t>(chosen.node)];
    auto angle_at = [&](double s) {
        out.nodes[static_cast<std::size_t>(chosen.node)] = x0 + s * chosen.dir;
        return std::max(current, max_angle_of(out, star[static_cast<std::size_t>(chosen.node)]));
    };
    double lo = 0.0;
    double hi = chosen.s_max;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * chosen.s_max; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (angle_at(mid) < max_angle_deg) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double reached = angle_at(lo);
    if (std::abs(reached - max_angle_deg) > 0.01) {
        throw MeshError("distort_mesh: target angle unreachable without inverting an element");
    }
    for (int e : star[static_cast<std::size_t>(chosen.node)]) {
        if (!(out.signed_area(e) > 0.0)) {
            throw MeshError("distort_mesh: distortion inverted an element");
        }
    }
    return out;
}

namespace {

using GroupKey = std::tuple<std::string, std::string, std::string, int, int, std::string, int, bool, double, double>;

GroupKey group_of(const RunRecord& r) {
    return {r.domain, r.bc, r.family, r.p, r.q, r.gr_mode, r.layers, r.post, r.omega, r.target_angle_deg};
}

double rate_or_nan(double ec, double ef, double dc, double df) {
    if (!(ec > 0.0) || !(ef > 0.0) || dc == df) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return convergence_rate(ec, ef, dc, df);
}

std::string fmt(double v) {
    if (!std::isfinite(v)) {
        return "";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot write " + path.string());
    }
    return f;
}

constexpr const char* kCsvHeader =
    "run_id,domain,p,q,gr_mode,layers,dof,l2_all,l2_interior,l2_post,rate_all,rate_interior,rate_post,"
    "max_angle_deg,wall_time_s\n";

std::string csv_row(const RunRecord& r) {
    std::ostringstream s;
    s << r.run_id << ',' << r.domain << ',' << r.p << ',' << r.q << ',' << r.gr_mode << ',' << r.layers << ','
      << r.dof << ',' << (r.ok ? fmt(r.l2_all) : "") << ',' << (r.ok ? fmt(r.l2_interior) : "") << ','
      << (r.ok && r.post ? fmt(r.l2_post) : "") << ',' << fmt(r.rate_all) << ',' << fmt(r.rate_interior) << ','
      << fmt(r.rate_post) << ',' << fmt(r.max_angle_deg) << ',' << fmt(r.wall_time_s) << '\n';
    return s.str();
}

}  // namespace

void append_report_row(const RunRecord& record, const std::filesystem::path& path) {
    const bool fresh = !std::filesystem::exists(path);
    std::ofstream f(path, std::ios::binary | std::ios::app);
    if (!f) {
        throw IoError("cannot append to " + path.string());
    }
    if (fresh) {
        f << kCsvHeader;
    }
    f << csv_row(record);
    if (!f) {
        throw IoError("failed writing " + path.string());
    }
}

void compute_rates(std::vector<RunRecord>& records) {
    std::map<GroupKey, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < records.size(); ++i) {
        groups[group_of(records[i])].push_back(i);
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (auto& [key, idx] : groups) {
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return records[a].dof < records[b].dof; });
        for (std::size_t k = 0; k < idx.size(); ++k) {
            RunRecord& f = records[idx[k]];
            f.rate_all = f.rate_interior = f.rate_post = nan;
            if (k == 0 || !f.ok || !records[idx[k - 1]].ok) {
                continue;
            }
            const RunRecord& c = records[idx[k - 1]];
            const auto dc = static_cast<double>(c.dof);
            const auto df = static_cast<double>(f.dof);
            f.rate_all = rate_or_nan(c.l2_all, f.l2_all, dc, df);
            f.rate_interior = rate_or_nan(c.l2_interior, f.l2_interior, dc, df);
            if (f.post && c.post) {
                f.rate_post = rate_or_nan(c.l2_post, f.l2_post, dc, df);
            }
        }
    }
}

std::string series_label(const RunRecord& r) {
    std::string s = "p=" + std::to_string(r.p) + " gr=" + r.gr_mode + " q=" + std::to_string(r.q);
    if (r.family != "gl") {
        s += " nodes=" + r.family;
    }
    if (r.target_angle_deg > 0.0) {
        s += " angle=" + fmt(r.target_angle_deg);
    }
    return s;
}

void emit_report(const std::vector<RunRecord>& records, const std::filesystem::path& dir, const std::string& stem) {
    if (records.empty()) {
        throw ConfigError("emit_report: no records");
    }
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
    }

    std::ofstream csv = open_out(dir / (stem + ".csv"));
    csv << kCsvHeader;
    for (const RunRecord& r : records) {
        csv << csv_row(r);
    }

    nlohmann::json runs = nlohmann::json::array();
    for (const RunRecord& r : records) {
        nlohmann::json j;
        j["run_id"] = r.run_id;
        j["status"] = r.ok ? "ok" : "failed";
        if (!r.message.empty()) {
            j["message"] = r.message;
        }
        j["domain"] = r.domain;
        j["bc"] = r.bc;
        j["family"] = r.family;
        j["p"] = r.p;
        j["q"] = r.q;
        j["gr_mode"] = r.gr_mode;
        j["h"] = r.h;
        j["omega"] = r.omega;
        j["dof"] = r.dof;
        j["target_angle_deg"] = num(r.target_angle_deg > 0.0 ? r.target_angle_deg : std::nan(""));
        j["errors"] = {{"l2_all", num(r.l2_all)},           {"l2_interior", num(r.l2_interior)},
                       {"rms_all", num(r.rms_all)},         {"rms_interior", num(r.rms_interior)},
                       {"rate_all", num(r.rate_all)},       {"rate_interior", num(r.rate_interior)}};
        j["mesh"] = {{"max_angle_deg", num(r.max_angle_deg)},
                     {"min_angle_deg", num(r.min_angle_deg)},
                     {"min_det_j", num(r.min_det_j)},
                     {"straight_fallbacks", r.straight_fallbacks}};
        j["solver"] = {{"relative_residual", num(r.residual)}, {"wall_time_s", num(r.wall_time_s)}};
        if (r.post) {
            nlohmann::json hist = nlohmann::json::object();
            for (const auto& [size, count] : r.post_diag.stencil_sizes) {
                hist[std::to_string(size)] = count;
            }
            j["post"] = {{"layers", r.layers},
                         {"l2", num(r.l2_post)},
                         {"rms", num(r.rms_post)},
                         {"rate", num(r.rate_post)},
                         {"submesh_nodes", r.post_diag.submesh_nodes},
                         {"free_nodes", r.post_diag.free_nodes},
                         {"fixed_nodes", r.post_diag.fixed_nodes},
                         {"changed_nodes", r.post_diag.changed_nodes},
                         {"max_condition", num(r.post_diag.max_condition)},
                         {"stencil_sizes", hist}};
        }
        runs.push_back(std::move(j));
    }
    std::ofstream js = open_out(dir / (stem + ".json"));
    js << nlohmann::json{{"runs", runs}}.dump(2) << '\n';

    std::ofstream plot = open_out(dir / (stem + "_plot.dat"));
    plot << "# dof error series\n";
    std::map<std::string, std::vector<std::pair<long, double>>> series;
    for (const RunRecord& r : records) {
        if (!r.ok) {
            continue;
        }
        const std::string base = r.domain + " " + r.bc + " " + series_label(r);
        series[base + " sem"].emplace_back(r.dof, r.l2_all);
        series[base + " interior"].emplace_back(r.dof, r.l2_interior);
        if (r.post) {
            series[base + " post"].emplace_back(r.dof, r.l2_post);
        }
    }
    for (auto& [label, pts] : series) {
        std::stable_sort(pts.begin(), pts.end());
        for (const auto& [dof, err] : pts) {
            plot << dof << ' ' << fmt(err) << " \"" << label << "\"\n";
        }
    }
    if (!csv || !js || !plot) {
        throw IoError("failed while writing the report into " + dir.string());
    }
}

}  // namespace grsem
