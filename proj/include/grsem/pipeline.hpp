#pragma once

#include "grsem/analysis.hpp"
#include "grsem/config.hpp"

#include <memory>

namespace grsem {

/// One point of a study: resolution, degree, refinement mode, optional distortion.
struct StudyCase {
    double h = 1.0 / 16.0;
    int p = 2;
    GrMode gr = GrMode::h;
    double target_angle_deg = 0.0;  ///< > 0: distort the linear mesh to this max angle
};

/// Linear and high-order mesh of a case. The domain is shared so that the
/// high-order mesh's domain pointer stays valid when the struct is moved.
struct PreparedMesh {
    std::shared_ptr<const Domain> domain;
    HighOrderMesh mesh;
};

PreparedMesh prepare_mesh(const RunConfig& config, const StudyCase& sc);

struct CaseResult {
    RunRecord record;
    PreparedMesh prepared;
    Eigen::VectorXd u;       ///< SEM nodal solution
    Eigen::VectorXd u_post;  ///< post-processed solution (empty without post-processing)
    Eigen::VectorXd exact;
};

/// Mesh, solve, optionally post-process and measure one case. Throws on failure.
CaseResult run_case(const RunConfig& config, const StudyCase& sc);

/// Solve and measure on an existing mesh (e.g. one read from a file).
CaseResult solve_prepared(const RunConfig& config, const StudyCase& sc, PreparedMesh prepared);

/// Same as run_case but returns only the record; failures become rows with
/// ok = false and the error message.
RunRecord run_case_record(const RunConfig& config, const StudyCase& sc);

/// Cross product of resolutions, degrees and refinement modes.
std::vector<StudyCase> study_cases(const RunConfig& config);

/// For every degree and refinement mode: an undistorted baseline followed by
/// one case per target angle, all at every configured resolution.
std::vector<StudyCase> quality_cases(const RunConfig& config);

/// Runs the cases on `config.jobs` worker threads, keeps the input order and
/// fills the rate columns.
std::vector<RunRecord> run_cases(const RunConfig& config, const std::vector<StudyCase>& cases);

std::string case_id(const RunConfig& config, const StudyCase& sc);

}  // namespace grsem
