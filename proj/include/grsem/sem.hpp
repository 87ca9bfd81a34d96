#pragma once

#include "grsem/highorder.hpp"

#include <Eigen/Sparse>

#include <functional>

namespace grsem {

/// Coefficients of -lap(u) + v . grad(u) = f (unit diffusion).
struct PdeCoefficients {
    std::function<Vec2(const Point&)> velocity;
    std::function<double(const Point&)> source;
};

/// Boundary data. `neumann` receives the boundary point, the outward normal
/// of the discrete boundary there and the hole id (-1 for the outer box), and
/// returns the prescribed flux du/dn.
struct BoundaryData {
    std::function<double(const Point&)> dirichlet;
    std::function<double(const Point&, const Vec2&, int)> neumann;
};

using SparseMatrix = Eigen::SparseMatrix<double>;

struct AssembledSystem {
    SparseMatrix matrix;
    Eigen::VectorXd rhs;
    std::vector<char> is_dirichlet;
    Eigen::VectorXd dirichlet_values;

    [[nodiscard]] Eigen::Index num_dofs() const { return rhs.size(); }
};

struct AssemblyOptions {
    /// When false, Dirichlet rows are left untouched (used by the symmetry checks).
    bool apply_dirichlet = true;
    /// Number of worker threads for the element loop.
    int threads = 1;
};

/// True iff solution node i lies on a boundary part (outer box or hole) with a Dirichlet condition.
bool is_dirichlet_node(const HighOrderMesh& mesh, int i);

/// Galerkin weak form  int grad u . grad psi + (v . grad u) psi = int f psi + int_{Gamma_N} g psi
/// with Dirichlet rows replaced by identity rows. Curved elements are integrated
/// through their degree-q map, including their Neumann facets.
AssembledSystem assemble(const HighOrderMesh& mesh, const PdeCoefficients& coeffs, const BoundaryData& bcs,
                         const AssemblyOptions& options = {});

struct SolveOptions {
    double tol = 1e-12;
    /// BiCGSTAB with an incomplete LU preconditioner instead of sparse LU.
    bool iterative = false;
    int max_iterations = 5000;
};

struct SolveResult {
    Eigen::VectorXd u;
    double relative_residual = 0.0;
    int iterations = 0;
};

/// Solves A u = b. Throws SolveError on singular systems or when the relative
/// residual stays above `tol`.
SolveResult solve(const SparseMatrix& matrix, const Eigen::VectorXd& rhs, const SolveOptions& options = {});

/// Evaluates a nodal field inside element e at reference point xi.
double evaluate(const HighOrderMesh& mesh, const Eigen::VectorXd& u, int e, const Point& xi);

}  // namespace grsem
