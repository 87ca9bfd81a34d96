// Command-line driver: mesh generation, single solves and the convergence
// and mesh-quality studies.

#include "grsem/mesh_io.hpp"
#include "grsem/pipeline.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

using namespace grsem;

/// Flag values layered on top of the config file and the environment.
struct Overrides {
    std::string config;
    std::string out;
    bool post = false;
    int layers = 0;
    std::string gr;
    std::vector<int> degree;
    int geom_degree = 0;
    double omega = 0.0;
    int jobs = 0;
    std::vector<std::string> h;
    std::string mesh_file;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("-c,--config", o.config, "configuration file (INI style)");
    cmd->add_option("-o,--out", o.out, "output directory");
    cmd->add_flag("--post", o.post, "post-process near-boundary nodes");
    cmd->add_option("--layers", o.layers, "quad layers of the post-processing submesh")->check(CLI::PositiveNumber);
    cmd->add_option("--gr", o.gr, "geometric refinement: none, h, hp or a comma-separated list");
    cmd->add_option("--degree", o.degree, "solution degree(s)")->delimiter(',');
    cmd->add_option("--geom-degree", o.geom_degree, "geometry degree q (0: automatic)");
    cmd->add_option("--omega", o.omega, "frequency of the manufactured solution")->check(CLI::PositiveNumber);
    cmd->add_option("--jobs", o.jobs, "concurrent study runs")->check(CLI::PositiveNumber);
    cmd->add_option("--grid-size", o.h, "grid size(s), e.g. 1/32")->delimiter(',');
}

RunConfig load(const Overrides& o) {
    ConfigTable table;
    if (!o.config.empty()) {
        table = parse_config_file(o.config);
    }
    apply_env_overrides(table);
    auto join = [](const auto& values) {
        std::ostringstream s;
        for (const auto& v : values) {
            s << v << ' ';
        }
        return s.str();
    };
    if (!o.out.empty()) {
        table["output.dir"] = o.out;
    }
    if (o.post) {
        table["post.enabled"] = "true";
    }
    if (o.layers > 0) {
        table["post.layers"] = std::to_string(o.layers);
    }
    if (!o.gr.empty()) {
        table["mesh.gr"] = o.gr;
    }
    if (!o.degree.empty()) {
        table["solver.degree"] = join(o.degree);
    }
    if (o.geom_degree > 0) {
        table["solver.geom_degree"] = std::to_string(o.geom_degree);
    }
    if (o.omega > 0.0) {
        std::ostringstream s;
        s.precision(17);
        s << o.omega;
        table["solver.omega"] = s.str();
    }
    if (o.jobs > 0) {
        table["output.jobs"] = std::to_string(o.jobs);
    }
    if (!o.h.empty()) {
        table["mesh.h"] = join(o.h);
    }
    return config_from_table(table);
}

StudyCase single_case(const RunConfig& c, const char* command) {
    if (c.h.size() != 1 || c.degree.size() != 1 || c.gr.size() != 1) {
        throw ConfigError(std::string(command) + " needs exactly one value for mesh.h, solver.degree and mesh.gr");
    }
    return {c.h.front(), c.degree.front(), c.gr.front(), 0.0};
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    }
}

int cmd_mesh(const Overrides& o) {
    const RunConfig c = load(o);
    const StudyCase sc = single_case(c, "mesh");
    const PreparedMesh pm = prepare_mesh(c, sc);
    ensure_dir(c.out_dir);
    const std::string id = case_id(c, sc);
    write_mesh(c.out_dir / (id + ".mesh"), pm.mesh.linear, &pm.mesh);

    const MeshQuality q = mesh_quality(pm.mesh.linear);
    double min_det = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < pm.mesh.num_elements(); ++e) {
        min_det = std::min(min_det, jacobian_extrema(pm.mesh, static_cast<int>(e)).first);
    }
    std::ofstream summary(c.out_dir / (id + "_quality.txt"));
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "nodes %zu\nsolution_nodes %zu\nquads %zu\ntriangles %zu\nmin_angle_deg %.6f\nmax_angle_deg %.6f\n"
                  "min_det_j %.6e\nstraight_fallbacks %d\n",
                  pm.mesh.linear.num_nodes(), pm.mesh.num_nodes(), q.num_quads, q.num_tris, q.min_angle_deg,
                  q.max_angle_deg, min_det, pm.mesh.straight_fallbacks);
    summary << buf;
    if (!summary) {
        throw IoError("failed writing the quality summary");
    }
    std::cout << "mesh " << id << '\n' << buf;
    return 0;
}

int cmd_solve(const Overrides& o) {
    const RunConfig c = load(o);
    const StudyCase sc = single_case(c, "solve");
    CaseResult res;
    if (!o.mesh_file.empty()) {
        MeshFile mf = read_mesh(std::filesystem::path(o.mesh_file));
        if (!mf.high_order) {
            throw IoError("mesh file " + o.mesh_file + " has no high-order section");
        }
        PreparedMesh pm;
        auto domain = std::make_shared<Domain>(c.make_domain());
        pm.mesh = std::move(*mf.high_order);
        pm.mesh.domain = domain.get();
        pm.domain = std::move(domain);
        res = solve_prepared(c, sc, std::move(pm));
    } else {
        res = run_case(c, sc);
    }
    ensure_dir(c.out_dir);
    const RunRecord& r = res.record;
    write_solution(c.out_dir / (r.run_id + ".sol"), res.u);
    if (c.post) {
        write_solution(c.out_dir / (r.run_id + "_post.sol"), res.u_post);
    }
    append_report_row(r, c.out_dir / "runs.csv");
    emit_report({r}, c.out_dir, r.run_id);
    std::printf("%s dof=%ld l2_all=%.6e l2_interior=%.6e", r.run_id.c_str(), r.dof, r.l2_all, r.l2_interior);
    if (c.post) {
        std::printf(" l2_post=%.6e", r.l2_post);
    }
    std::printf(" residual=%.2e\n", r.residual);
    return 0;
}

int report_study(const RunConfig& c, const std::vector<RunRecord>& records, const std::string& stem) {
    emit_report(records, c.out_dir, stem);
    int failed = 0;
    for (const RunRecord& r : records) {
        if (!r.ok) {
            ++failed;
            std::printf("%-34s FAILED: %s\n", r.run_id.c_str(), r.message.c_str());
            continue;
        }
        std::printf("%-34s dof=%7ld l2_all=%.4e rate=%6.2f l2_int=%.4e rate=%6.2f", r.run_id.c_str(), r.dof,
                    r.l2_all, r.rate_all, r.l2_interior, r.rate_interior);
        if (r.post) {
            std::printf(" l2_post=%.4e rate=%6.2f", r.l2_post, r.rate_post);
        }
        std::printf("\n");
    }
    std::printf("%zu runs, %d failed; report in %s\n", records.size(), failed, c.out_dir.string().c_str());
    return 0;
}

int cmd_study(const Overrides& o) {
    const RunConfig c = load(o);
    if (c.h.size() < 2) {
        throw ConfigError("study needs at least two resolutions in mesh.h");
    }
    return report_study(c, run_cases(c, study_cases(c)), "study");
}

int cmd_quality(const Overrides& o) {
    RunConfig c = load(o);
    if (c.angles.empty()) {
        // 180 degrees minus 10^-4 ... 10^1.
        for (int k = 1; k >= -4; --k) {
            c.angles.push_back(180.0 - std::pow(10.0, k));
        }
    }
    return report_study(c, run_cases(c, quality_cases(c)), "quality");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mixed-element spectral element toolkit with curvature-based mesh refinement.\n\nConfig keys "
                 "(section.key = default):\n" +
                 grsem::describe_defaults() +
                 "Environment variables GRSEM_<SECTION>_<KEY> override the file; flags override both."};
    app.require_subcommand(1);
    Overrides o;
    CLI::App* mesh = app.add_subcommand("mesh", "generate a mesh and a quality summary");
    CLI::App* solve = app.add_subcommand("solve", "solve one case, optionally post-processed");
    CLI::App* study = app.add_subcommand("study", "convergence study over resolutions, degrees and refinement modes");
    CLI::App* quality = app.add_subcommand("quality-study", "solve on meshes distorted to given maximum angles");
    for (CLI::App* cmd : {mesh, solve, study, quality}) {
        add_common(cmd, o);
    }
    solve->add_option("--mesh", o.mesh_file, "solve on a previously written mesh file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(grsem::ErrorKind::config);
    }
    try {
        if (mesh->parsed()) {
            return cmd_mesh(o);
        }
        if (solve->parsed()) {
            return cmd_solve(o);
        }
        if (study->parsed()) {
            return cmd_study(o);
        }
        return cmd_quality(o);
    } catch (const grsem::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
