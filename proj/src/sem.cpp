#include "grsem/sem.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <cmath>
#include <cstdio>
#include <thread>

namespace grsem {

namespace {

/// Basis tabulation of one element kind at its quadrature points.
struct Tabulation {
    QuadratureRule rule;
    std::vector<Eigen::VectorXd> phi;
    std::vector<Eigen::MatrixX2d> dphi;
    std::vector<Eigen::VectorXd> geo;
    std::vector<Eigen::MatrixX2d> dgeo;
};

Tabulation tabulate(const ReferenceElement& sol, const ReferenceElement& geo, int exactness) {
    Tabulation t;
    t.rule = quadrature_rule(sol.shape(), exactness);
    const auto n = static_cast<std::size_t>(t.rule.points.rows());
    t.phi.resize(n);
    t.dphi.resize(n);
    t.geo.resize(n);
    t.dgeo.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Point xi = t.rule.points.row(static_cast<Eigen::Index>(k)).transpose();
        sol.eval(xi, t.phi[k], t.dphi[k]);
        geo.eval(xi, t.geo[k], t.dgeo[k]);
    }
    return t;
}

bool neumann_facet(const HighOrderMesh& mesh, int e, int f, int& hole) {
    const LinearMixedMesh& lin = mesh.linear;
    if (lin.sibling[static_cast<std::size_t>(e)][static_cast<std::size_t>(f)].valid()) {
        return false;
    }
    hole = lin.curved_facet_hole(e, f);
    if (hole >= 0) {
        return mesh.domain->holes[static_cast<std::size_t>(hole)].bc == BcKind::neumann;
    }
    return mesh.domain->outer_bc == BcKind::neumann;
}

struct ElementContribution {
    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::VectorXd rhs;
};

void assemble_range(const HighOrderMesh& mesh, const PdeCoefficients& coeffs, const BoundaryData& bcs,
                    const std::vector<char>& dirichlet, std::size_t begin, std::size_t end,
                    ElementContribution& out) {
    out.rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_nodes()));
    Tabulation tab[2][2];  // [shape is quad][curved]
    bool have[2][2] = {{false, false}, {false, false}};
    const int nfacet_pts = mesh.p + 3;
    const Rule1d line = gauss_legendre_1d(nfacet_pts);
    for (std::size_t e = begin; e < end; ++e) {
        const int ei = static_cast<int>(e);
        const ReferenceElement& sol = mesh.solution_element(ei);
        const ReferenceElement& geo = mesh.geometry_element(ei);
        const int sq = sol.shape() == ElementShape::quad ? 1 : 0;
        const int cv = mesh.is_curved(ei) ? 1 : 0;
        if (!have[sq][cv]) {
            tab[sq][cv] = tabulate(sol, geo, assembly_exactness(mesh, ei));
            have[sq][cv] = true;
        }
        const Tabulation& t = tab[sq][cv];
        const Eigen::MatrixX2d X = mesh.geometry_nodes(ei);
        const int n = sol.num_nodes();
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
        for (Eigen::Index k = 0; k < t.rule.points.rows(); ++k) {
            const auto kk = static_cast<std::size_t>(k);
            const Eigen::Matrix2d J = X.transpose() * t.dgeo[kk];
            const double det = J.determinant();
            if (!(det > 0.0)) {
                throw SolveError("assemble: singular or inverted map in element " + std::to_string(e));
            }
            const Point x = X.transpose() * t.geo[kk];
            const Eigen::MatrixX2d G = t.dphi[kk] * J.inverse();
            const double w = t.rule.weights(k) * det;
            const Vec2 v = coeffs.velocity(x);
            K.noalias() += w * (G * G.transpose() + t.phi[kk] * (G * v).transpose());
            b.noalias() += (w * coeffs.source(x)) * t.phi[kk];
        }
        for (int f = 0; f < sol.num_vertices(); ++f) {
            int hole = -1;
            if (!bcs.neumann || !neumann_facet(mesh, ei, f, hole)) {
                continue;
            }
            const Vec2 dxi = geo.edge_tangent(f);
            Eigen::VectorXd phi;
            Eigen::VectorXd g;
            Eigen::MatrixX2d dg;
            for (std::size_t k = 0; k < line.x.size(); ++k) {
                const Point xi = geo.edge_point(f, line.x[k]);
                sol.eval(xi, phi);
                geo.eval(xi, g, dg);
                const Point x = X.transpose() * g;
                const Vec2 dx = (X.transpose() * dg) * dxi;
                const double ds = dx.norm();
                const Vec2 normal(dx.y() / ds, -dx.x() / ds);
                b.noalias() += (line.w[k] * ds * bcs.neumann(x, normal, hole)) * phi;
            }
        }
        const std::vector<int>& ids = mesh.elem_nodes[e];
        for (int i = 0; i < n; ++i) {
            const int gi = ids[static_cast<std::size_t>(i)];
            if (dirichlet[static_cast<std::size_t>(gi)]) {
                continue;
            }
            out.rhs(gi) += b(i);
            for (int j = 0; j < n; ++j) {
                out.triplets.emplace_back(gi, ids[static_cast<std::size_t>(j)], K(i, j));
            }
        }
    }
}

}  // namespace

bool is_dirichlet_node(const HighOrderMesh& mesh, int i) {
    const SolutionNodeInfo& inf = mesh.info[static_cast<std::size_t>(i)];
    if (inf.kind == NodeKind::outer) {
        return mesh.domain->outer_bc == BcKind::dirichlet;
    }
    if (inf.kind == NodeKind::hole) {
        return mesh.domain->holes[static_cast<std::size_t>(inf.hole)].bc == BcKind::dirichlet;
    }
    return false;
}

AssembledSystem assemble(const HighOrderMesh& mesh, const PdeCoefficients& coeffs, const BoundaryData& bcs,
                         const AssemblyOptions& options) {
    if (mesh.domain == nullptr) {
        throw SolveError("assemble: mesh has no domain attached");
    }
    const std::size_t nn = mesh.num_nodes();
    AssembledSystem sys;
    sys.is_dirichlet.assign(nn, 0);
    sys.dirichlet_values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nn));
    if (options.apply_dirichlet) {
        for (std::size_t i = 0; i < nn; ++i) {
            if (is_dirichlet_node(mesh, static_cast<int>(i))) {
                if (!bcs.dirichlet) {
                    throw SolveError("assemble: Dirichlet nodes present but no Dirichlet data given");
                }
                sys.is_dirichlet[i] = 1;
                sys.dirichlet_values(static_cast<Eigen::Index>(i)) = bcs.dirichlet(mesh.nodes[i]);
            }
        }
    }

    const std::size_t ne = mesh.num_elements();
    const std::size_t nthreads = std::max<std::size_t>(1, std::min<std::size_t>(options.threads, ne));
    std::vector<ElementContribution> parts(nthreads);
    if (nthreads == 1) {
        assemble_range(mesh, coeffs, bcs, sys.is_dirichlet, 0, ne, parts[0]);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(nthreads);
        for (std::size_t t = 0; t < nthreads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    assemble_range(mesh, coeffs, bcs, sys.is_dirichlet, ne * t / nthreads, ne * (t + 1) / nthreads,
                                   parts[t]);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) {
            th.join();
        }
        for (auto& err : errors) {
            if (err) {
                std::rethrow_exception(err);
            }
        }
    }

    std::vector<Eigen::Triplet<double>> triplets;
    sys.rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nn));
    for (auto& part : parts) {
        triplets.insert(triplets.end(), part.triplets.begin(), part.triplets.end());
        sys.rhs += part.rhs;
    }
    for (std::size_t i = 0; i < nn; ++i) {
        if (sys.is_dirichlet[i]) {
            triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
            sys.rhs(static_cast<Eigen::Index>(i)) = sys.dirichlet_values(static_cast<Eigen::Index>(i));
        }
    }
    sys.matrix.resize(static_cast<Eigen::Index>(nn), static_cast<Eigen::Index>(nn));
    sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
    return sys;
}

SolveResult solve(const SparseMatrix& matrix, const Eigen::VectorXd& rhs, const SolveOptions& options) {
    SolveResult r;
    const double bnorm = std::max(rhs.norm(), std::numeric_limits<double>::min());
    if (options.iterative) {
        Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<double>> solver;
        solver.setTolerance(options.tol);
        solver.setMaxIterations(options.max_iterations);
        solver.compute(matrix);
        if (solver.info() != Eigen::Success) {
            throw SolveError("solve: incomplete LU factorization failed");
        }
        r.u = solver.solve(rhs);
        r.iterations = static_cast<int>(solver.iterations());
    } else {
        Eigen::SparseLU<SparseMatrix> lu;
        lu.analyzePattern(matrix);
        lu.factorize(matrix);
        if (lu.info() != Eigen::Success) {
            throw SolveError("solve: matrix is singular (" + lu.lastErrorMessage() + ")");
        }
        r.u = lu.solve(rhs);
        // A few steps of iterative refinement tighten the residual.
        for (int it = 0; it < 3; ++it) {
            const Eigen::VectorXd res = rhs - matrix * r.u;
            if (res.norm() <= 1e-3 * options.tol * bnorm) {
                break;
            }
            r.u += lu.solve(res);
            ++r.iterations;
        }
    }
    r.relative_residual = (matrix * r.u - rhs).norm() / bnorm;
    if (!std::isfinite(r.relative_residual) || r.relative_residual > options.tol) {
        char msg[128];
        std::snprintf(msg, sizeof msg, "solve: relative residual %.3e above tolerance %.3e", r.relative_residual,
                      options.tol);
        throw SolveError(msg);
    }
    return r;
}

double evaluate(const HighOrderMesh& mesh, const Eigen::VectorXd& u, int e, const Point& xi) {
    Eigen::VectorXd phi;
    mesh.solution_element(e).eval(xi, phi);
    double s = 0.0;
    const std::vector<int>& ids = mesh.elem_nodes[static_cast<std::size_t>(e)];
    for (std::size_t i = 0; i < ids.size(); ++i) {
        s += phi(static_cast<Eigen::Index>(i)) * u(ids[i]);
    }
    return s;
}

}  // namespace grsem
