#pragma once

#include "grsem/aesfem.hpp"
#include "grsem/meshgen.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace grsem {

enum class DomainKind { flower, ellipse, square };

/// Everything a run or a study needs. List-valued entries (h, degree, gr)
/// span a study; single-run commands require exactly one value each.
struct RunConfig {
    DomainKind domain = DomainKind::flower;
    BcKind hole_bc = BcKind::neumann;
    BcKind outer_bc = BcKind::dirichlet;

    std::vector<double> h{1.0 / 16.0};
    std::vector<GrMode> gr{GrMode::h};
    double theta_max = 0.2;
    double h_min_factor = 1.0 / 8.0;
    double h_max_factor = 1.0;
    double grading = 1.3;
    double clearance_factor = 1.5;
    bool strict_geometry = true;

    std::vector<int> degree{2};
    int geom_degree = 0;  ///< 0: p for gr none/h, p+1 for hp
    NodeFamily family = NodeFamily::gauss_lobatto;
    double omega = 10.0;
    double tol = 1e-12;
    bool iterative = false;
    int threads = 1;

    bool post = false;
    int layers = 2;
    int fit_degree_offset = 2;  ///< GLP degree = p + offset
    NeumannTreatment neumann = NeumannTreatment::keep;
    double stencil_factor = 1.5;
    double max_condition = 1e8;

    std::vector<double> angles;  ///< quality study targets in degrees

    std::filesystem::path out_dir = "grsem_out";
    /// Write wall_time_s = 0 so repeated runs give byte-identical reports.
    bool deterministic = false;
    int jobs = 1;

    /// Geometry degree used for solution degree p under GR mode g.
    [[nodiscard]] int geometry_degree(int p, GrMode g) const;
    [[nodiscard]] Domain make_domain() const;
    [[nodiscard]] MeshOptions mesh_options(double h, GrMode g) const;
    [[nodiscard]] PostOptions post_options(int p) const;
};

/// Raw "section.key" -> value table, kept for diagnostics and env overrides.
using ConfigTable = std::map<std::string, std::string>;

/// Reads `[section]` headers and `key = value` lines; `#` and `;` start comments.
/// Throws ConfigError on syntax errors or duplicate keys.
ConfigTable parse_config_text(std::istream& in, const std::string& origin = "<config>");
ConfigTable parse_config_file(const std::filesystem::path& path);

/// Overrides entries from environment variables <prefix><SECTION>_<KEY>
/// (upper case), e.g. GRSEM_SOLVER_DEGREE for solver.degree. Only keys the
/// schema knows are consulted.
void apply_env_overrides(ConfigTable& table, const std::string& prefix = "GRSEM_");

/// Converts a table into a validated RunConfig. Unknown keys are rejected.
RunConfig config_from_table(const ConfigTable& table);

/// Cross-field checks (q >= p, layers >= 1 with post-processing on, ...).
void validate(const RunConfig& config);

/// Every recognised key with its default, as "section.key = value" lines.
std::string describe_defaults();

std::string to_string(GrMode g);
GrMode parse_gr_mode(const std::string& s);
std::string to_string(DomainKind d);

}  // namespace grsem
