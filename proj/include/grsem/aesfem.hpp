#pragma once

#include "grsem/sem.hpp"

#include <map>

namespace grsem {

/// Linear triangle mesh through the high-order nodes of the near-boundary
/// elements. Indices refer to submesh nodes unless stated otherwise.
struct BoundarySubmesh {
    std::vector<int> parent;  ///< submesh node -> parent solution node (injective)
    std::vector<Point> nodes;
    std::vector<std::array<int, 3>> triangles;
    std::vector<char> artificial;  ///< on the artificial boundary
    std::vector<char> dirichlet;   ///< on a Dirichlet piece of the true boundary
    std::vector<int> hole;         ///< hole id for nodes on a hole curve, else -1
    std::vector<double> t;         ///< curve parameter for hole nodes
    int layers = 0;
    std::size_t num_gap_elements = 0;
    std::size_t num_quads = 0;

    [[nodiscard]] std::size_t num_nodes() const { return nodes.size(); }
    [[nodiscard]] bool is_fixed(int i) const {
        return artificial[static_cast<std::size_t>(i)] || dirichlet[static_cast<std::size_t>(i)];
    }
};

/// Decomposes every gap triangle into p^2 linear triangles through its nodes,
/// then absorbs `layers` rings of quads (a quad joins when two or more of its
/// corner nodes are already in the submesh) split along shorter diagonals.
/// Throws ConfigError for layers < 1 and MeshError for an empty submesh.
BoundarySubmesh extract_boundary_submesh(const HighOrderMesh& mesh, int layers);

/// Splits the quad (a, b, c, d), counterclockwise, along its shorter diagonal.
/// Returns local corner indices of the two triangles. Throws MeshError when
/// either triangle would have non-positive area.
std::array<std::array<int, 3>, 2> split_quad_to_tris(const std::array<Point, 4>& quad);

/// Weighted least-squares polynomial fit around one node.
struct GlpStencil {
    int center = -1;
    int degree = 0;
    std::vector<int> stencil;  ///< submesh nodes, center first
    double scale = 1.0;        ///< length used to normalize local coordinates
    double condition = 0.0;    ///< 2-norm condition of the scaled weighted Vandermonde
    /// coeffs(a, j): coefficient of monomial a contributed by stencil value j.
    /// Monomials are ((x - xc)/scale)^i ((y - yc)/scale)^j ordered by total degree.
    Eigen::MatrixXd coeffs;

    /// Fitted value and gradient at x for the stencil values `values`.
    [[nodiscard]] double value(const Point& xc, const Point& x, const Eigen::VectorXd& values) const;
    [[nodiscard]] Vec2 gradient(const Point& xc, const Point& x, const Eigen::VectorXd& values) const;
};

struct GlpOptions {
    double stencil_factor = 1.5;   ///< minimum stencil size = factor * (p+1)(p+2)/2
    double max_condition = 1e8;
};

/// Node-to-node adjacency of the submesh triangles.
std::vector<std::vector<int>> submesh_adjacency(const BoundarySubmesh& sub);

/// Builds the GLP fit for `node`, growing the stencil ring by ring. Throws
/// SolveError when the submesh runs out of nodes first.
GlpStencil build_glp_basis(const BoundarySubmesh& sub, const std::vector<std::vector<int>>& adjacency, int node,
                           int degree, const GlpOptions& options = {});

/// Monomial values and gradients in local coordinates; helper shared with tests.
void glp_monomials(int degree, const Point& local, Eigen::VectorXd& values, Eigen::MatrixX2d* grads);

enum class NeumannTreatment {
    /// Boundary integral of g over the linear submesh facets.
    weak,
    /// du/dn of the local fit equals g at the node, with the exact curve normal.
    collocation,
    /// Neumann nodes keep their input values and act as fixed nodes.
    keep
};

struct PostOptions {
    int layers = 2;
    /// Fit degree; 0 means the SEM degree plus `degree_offset`.
    int degree = 0;
    int degree_offset = 2;
    NeumannTreatment neumann = NeumannTreatment::keep;
    GlpOptions glp;
};

struct PostDiagnostics {
    std::size_t submesh_nodes = 0;
    std::size_t free_nodes = 0;
    std::size_t fixed_nodes = 0;
    std::size_t changed_nodes = 0;
    double max_condition = 0.0;
    std::map<int, int> stencil_sizes;  ///< histogram: size -> count
};

/// Hole-curve Neumann data evaluated at a curve parameter.
using CurveFlux = std::function<double(int hole, double t)>;

/// Petrov-Galerkin solve on the submesh: GLP trial fits, linear hat test
/// functions, fixed nodes keep `parent_values`. Returns submesh node values.
Eigen::VectorXd solve_post(const BoundarySubmesh& sub, const std::vector<GlpStencil>& bases,
                           const PdeCoefficients& coeffs, const BoundaryData& bcs, const CurveFlux& flux,
                           const Domain& domain, const Eigen::VectorXd& parent_values, NeumannTreatment neumann);

/// Copies corrected values back onto the parent nodes of the submesh.
Eigen::VectorXd merge_back(const Eigen::VectorXd& parent_values, const BoundarySubmesh& sub,
                           const Eigen::VectorXd& corrected);

/// Complete post-processing step: extract, fit, solve, merge.
Eigen::VectorXd post_process(const HighOrderMesh& mesh, const Eigen::VectorXd& sem_values,
                             const PdeCoefficients& coeffs, const BoundaryData& bcs, const CurveFlux& flux,
                             const PostOptions& options, PostDiagnostics* diagnostics = nullptr);

}  // namespace grsem
