#include "grsem/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <thread>

namespace grsem {

std::string case_id(const RunConfig& config, const StudyCase& sc) {
    const long n = std::lround(1.0 / sc.h);
    std::string id = to_string(config.domain) + "-" + to_string(sc.gr) + "-p" + std::to_string(sc.p) + "-q" +
                     std::to_string(config.geometry_degree(sc.p, sc.gr)) + "-n" + std::to_string(n);
    if (config.family == NodeFamily::equidistant) {
        id += "-eq";
    }
    if (sc.target_angle_deg > 0.0) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "-a%.6g", sc.target_angle_deg);
        id += buf;
    }
    return id;
}

PreparedMesh prepare_mesh(const RunConfig& config, const StudyCase& sc) {
    PreparedMesh out;
    auto domain = std::make_shared<Domain>(config.make_domain());
    LinearMixedMesh linear = generate_mesh(*domain, config.mesh_options(sc.h, sc.gr));
    if (sc.target_angle_deg > 0.0) {
        linear = distort_mesh(linear, sc.target_angle_deg);
    }
    HighOrderOptions ho;
    ho.strict_geometry = config.strict_geometry;
    ho.family = config.family;
    out.mesh = insert_high_order_nodes(linear, *domain, sc.p, config.geometry_degree(sc.p, sc.gr), ho);
    out.domain = std::move(domain);
    return out;
}

CaseResult run_case(const RunConfig& config, const StudyCase& sc) {
    const auto start = std::chrono::steady_clock::now();
    PreparedMesh prepared = prepare_mesh(config, sc);
    CaseResult res = solve_prepared(config, sc, std::move(prepared));
    if (!config.deterministic) {
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        res.record.wall_time_s = elapsed.count();
    }
    return res;
}

CaseResult solve_prepared(const RunConfig& config, const StudyCase& sc, PreparedMesh prepared) {
    const auto start = std::chrono::steady_clock::now();
    CaseResult res;
    RunRecord& r = res.record;
    r.run_id = case_id(config, sc);
    r.domain = to_string(config.domain);
    r.bc = config.domain == DomainKind::square ? "dirichlet"
                                                : (config.hole_bc == BcKind::neumann ? "neumann" : "dirichlet");
    r.family = config.family == NodeFamily::gauss_lobatto ? "gl" : "eq";
    r.p = sc.p;
    r.q = prepared.mesh.q;
    r.gr_mode = to_string(sc.gr);
    r.post = config.post;
    r.layers = config.post ? config.layers : 0;
    r.h = sc.h;
    r.omega = config.omega;
    r.target_angle_deg = sc.target_angle_deg;

    res.prepared = std::move(prepared);
    const HighOrderMesh& mesh = res.prepared.mesh;
    const Domain& domain = *res.prepared.domain;
    const MeshQuality quality = mesh_quality(mesh.linear);
    r.max_angle_deg = quality.max_angle_deg;
    r.min_angle_deg = quality.min_angle_deg;
    r.straight_fallbacks = mesh.straight_fallbacks;
    r.min_det_j = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        r.min_det_j = std::min(r.min_det_j, jacobian_extrema(mesh, static_cast<int>(e)).first);
    }

    const ManufacturedCase mc{config.omega};
    const PdeCoefficients coeffs = mc.coefficients();
    const BoundaryData bcs = mc.boundary_data(domain);
    AssemblyOptions ao;
    ao.threads = config.threads;
    const AssembledSystem sys = assemble(mesh, coeffs, bcs, ao);
    SolveOptions so;
    so.tol = config.tol;
    so.iterative = config.iterative;
    const SolveResult sol = solve(sys.matrix, sys.rhs, so);
    res.u = sol.u;
    r.residual = sol.relative_residual;
    r.dof = static_cast<long>(mesh.num_nodes());

    res.exact = mc.nodal_values(mesh);
    const std::vector<int> all = all_nodes(mesh);
    const std::vector<int> inner = interior_nodes(mesh);
    r.l2_all = l2_nodal_error(res.u, res.exact, all);
    r.rms_all = rms_nodal_error(res.u, res.exact, all);
    if (!inner.empty()) {
        r.l2_interior = l2_nodal_error(res.u, res.exact, inner);
        r.rms_interior = rms_nodal_error(res.u, res.exact, inner);
    }
    if (config.post) {
        res.u_post = post_process(mesh, res.u, coeffs, bcs, mc.curve_flux(domain), config.post_options(sc.p),
                                  &r.post_diag);
        r.l2_post = l2_nodal_error(res.u_post, res.exact, all);
        r.rms_post = rms_nodal_error(res.u_post, res.exact, all);
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    r.wall_time_s = config.deterministic ? 0.0 : elapsed.count();
    return res;
}

RunRecord run_case_record(const RunConfig& config, const StudyCase& sc) {
    try {
        return run_case(config, sc).record;
    } catch (const std::exception& e) {
        RunRecord r;
        r.run_id = case_id(config, sc);
        r.domain = to_string(config.domain);
        r.bc = config.hole_bc == BcKind::neumann ? "neumann" : "dirichlet";
        r.family = config.family == NodeFamily::gauss_lobatto ? "gl" : "eq";
        r.p = sc.p;
        r.q = config.geometry_degree(sc.p, sc.gr);
        r.gr_mode = to_string(sc.gr);
        r.post = config.post;
        r.layers = config.post ? config.layers : 0;
        r.h = sc.h;
        r.omega = config.omega;
        r.target_angle_deg = sc.target_angle_deg;
        r.ok = false;
        r.message = e.what();
        const double nan = std::numeric_limits<double>::quiet_NaN();
        r.l2_all = r.l2_interior = r.l2_post = nan;
        r.rms_all = r.rms_interior = r.rms_post = nan;
        r.max_angle_deg = r.min_angle_deg = r.min_det_j = r.residual = nan;
        return r;
    }
}

std::vector<StudyCase> study_cases(const RunConfig& config) {
    std::vector<StudyCase> cases;
    for (GrMode g : config.gr) {
        for (int p : config.degree) {
            for (double h : config.h) {
                cases.push_back({h, p, g, 0.0});
            }
        }
    }
    return cases;
}

std::vector<StudyCase> quality_cases(const RunConfig& config) {
    std::vector<StudyCase> cases;
    for (GrMode g : config.gr) {
        for (int p : config.degree) {
            for (double h : config.h) {
                cases.push_back({h, p, g, 0.0});
                for (double a : config.angles) {
                    cases.push_back({h, p, g, a});
                }
            }
        }
    }
    return cases;
}

std::vector<RunRecord> run_cases(const RunConfig& config, const std::vector<StudyCase>& cases) {
    std::vector<RunRecord> records(cases.size());
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(config.jobs), cases.size()));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < cases.size(); i = next++) {
            records[i] = run_case_record(config, cases[i]);
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    compute_rates(records);
    return records;
}

}  // namespace grsem
