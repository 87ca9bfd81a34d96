#pragma once

#include "grsem/aesfem.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace grsem {

/// u = sin(w pi x) cos(w pi y) + x y with its gradient.
struct ExactValue {
    double u = 0.0;
    Vec2 grad = Vec2::Zero();
};
ExactValue exact_solution(double omega, const Point& x);

/// Velocity field v = (x, -y) of the model problem.
Vec2 model_velocity(const Point& x);

/// f = -lap(u) + v . grad(u) for the manufactured u and v = (x, -y).
double derived_source(double omega, const Point& x);

/// Manufactured problem bundled for the solver and the post-processor.
struct ManufacturedCase {
    double omega = 10.0;

    [[nodiscard]] double u(const Point& x) const { return exact_solution(omega, x).u; }
    [[nodiscard]] Vec2 grad(const Point& x) const { return exact_solution(omega, x).grad; }
    [[nodiscard]] PdeCoefficients coefficients() const;
    /// Dirichlet data is u itself. Neumann data on a hole is grad(u) . n taken
    /// at the closest curve point with the exact curve normal; on the box it
    /// uses the discrete normal, which is exact there.
    [[nodiscard]] BoundaryData boundary_data(const Domain& domain) const;
    [[nodiscard]] CurveFlux curve_flux(const Domain& domain) const;
    /// Exact values at all solution nodes.
    [[nodiscard]] Eigen::VectorXd nodal_values(const HighOrderMesh& mesh) const;
};

/// All solution nodes.
std::vector<int> all_nodes(const HighOrderMesh& mesh);
/// Nodes that belong only to structured quads (no node of a gap triangle).
std::vector<int> interior_nodes(const HighOrderMesh& mesh);

/// sqrt(sum_i (u_i - exact_i)^2) over `subset`. Throws ConfigError when empty.
double l2_nodal_error(const Eigen::VectorXd& u, const Eigen::VectorXd& exact, const std::vector<int>& subset);
/// Root mean square over `subset`; a resolution-independent companion metric.
double rms_nodal_error(const Eigen::VectorXd& u, const Eigen::VectorXd& exact, const std::vector<int>& subset);

/// -log(e_f / e_c) / log((dof_f / dof_c)^(1/d)). Throws ConfigError on
/// non-positive errors or equal dof counts.
double convergence_rate(double error_coarse, double error_fine, double dof_coarse, double dof_fine, int dim = 2);

/// Moves one interior gap-triangle node along the line of an incident edge
/// until the largest element angle equals `max_angle_deg` (within 0.01 deg).
/// Returns the mesh unchanged when the target equals the current maximum.
/// Throws ConfigError for targets outside (90, 180) and MeshError when the
/// target cannot be reached without inverting an element.
LinearMixedMesh distort_mesh(const LinearMixedMesh& mesh, double max_angle_deg);

/// One row of a convergence or quality study.
struct RunRecord {
    std::string run_id;
    std::string domain;
    std::string bc;
    std::string family = "gl";
    int p = 0;
    int q = 0;
    std::string gr_mode;
    int layers = 0;
    bool post = false;
    double h = 0.0;
    double omega = 0.0;
    double target_angle_deg = 0.0;  ///< 0 when the mesh was not distorted
    long dof = 0;
    double l2_all = 0.0;
    double l2_interior = 0.0;
    double l2_post = 0.0;
    double rms_all = 0.0;
    double rms_interior = 0.0;
    double rms_post = 0.0;
    double rate_all = 0.0;
    double rate_interior = 0.0;
    double rate_post = 0.0;
    double max_angle_deg = 0.0;
    double min_angle_deg = 0.0;
    double min_det_j = 0.0;
    int straight_fallbacks = 0;
    double residual = 0.0;
    double wall_time_s = 0.0;
    bool ok = true;
    std::string message;
    PostDiagnostics post_diag;
};

/// Fills the rate columns. Runs are grouped by everything except the
/// resolution, ordered by dof, and each rate compares a run with the next
/// coarser one in its group (NaN for the coarsest or after a failed run).
void compute_rates(std::vector<RunRecord>& records);

/// Series key used in the plot data: "p=<p> gr=<mode> q=<q>".
std::string series_label(const RunRecord& r);

/// Appends one CSV row to `path`, writing the header first when the file is new.
void append_report_row(const RunRecord& record, const std::filesystem::path& path);

/// Writes <stem>.csv, <stem>.json and <stem>_plot.dat into `dir`.
/// Throws IoError when a file cannot be written and ConfigError when
/// `records` is empty.
void emit_report(const std::vector<RunRecord>& records, const std::filesystem::path& dir,
                 const std::string& stem = "report");

}  // namespace grsem
