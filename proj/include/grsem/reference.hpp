#pragma once

#include "grsem/meshgen.hpp"

#include <Eigen/Dense>

#include <vector>

namespace grsem {

/// Gauss-Lobatto nodes on [-1, 1]: the endpoints plus the roots of P'_p, ascending.
std::vector<double> gauss_lobatto_1d(int p);

/// Gauss-Lobatto weights matching gauss_lobatto_1d(p): 2 / (p (p+1) P_p(x)^2).
std::vector<double> gauss_lobatto_weights_1d(int p);

struct Rule1d {
    std::vector<double> x;
    std::vector<double> w;
};

/// n-point Gauss-Legendre rule on [-1, 1] (exact to degree 2n-1).
Rule1d gauss_legendre_1d(int n);

/// Legendre polynomial P_n and its derivative at x.
std::pair<double, double> legendre(int n, double x);

enum class NodeFamily { gauss_lobatto, equidistant };

/// Nodal Lagrange element on the reference quad [-1,1]^2 or the reference
/// triangle (0,0), (1,0), (0,1).
///
/// Node ordering: vertices (counterclockwise), then the p-1 nodes of each
/// edge i (from vertex i toward vertex i+1), then interior nodes. Edge nodes
/// follow the 1D family distribution in both shapes, so quads and triangles
/// share edge nodes.
class ReferenceElement {
public:
    ReferenceElement(ElementShape shape, int degree, NodeFamily family = NodeFamily::gauss_lobatto);

    [[nodiscard]] ElementShape shape() const { return shape_; }
    [[nodiscard]] int degree() const { return degree_; }
    [[nodiscard]] NodeFamily family() const { return family_; }
    [[nodiscard]] int num_nodes() const { return static_cast<int>(nodes_.rows()); }
    [[nodiscard]] int num_vertices() const { return static_cast<int>(shape_); }
    /// Reference coordinates, one node per row.
    [[nodiscard]] const Eigen::MatrixX2d& nodes() const { return nodes_; }

    /// Local index of the k-th node (k = 0..p) along edge `edge`, walking from
    /// vertex `edge` to vertex `edge+1`.
    [[nodiscard]] int edge_node(int edge, int k) const;

    /// Reference point on edge `edge` at s in [-1, 1] (s = -1 at its first vertex),
    /// and the constant derivative d(xi)/ds.
    [[nodiscard]] Point edge_point(int edge, double s) const;
    [[nodiscard]] Vec2 edge_tangent(int edge) const;

    /// Integer lattice position (i, j) of every node: the tensor index on the
    /// quad, barycentric-style (i, j) with i + j <= p on the triangle. Used to
    /// split an element into p^2 linear sub-cells through its nodes.
    [[nodiscard]] const std::vector<std::array<int, 2>>& lattice() const { return lattice_; }

    /// Basis values at xi.
    void eval(const Point& xi, Eigen::VectorXd& values) const;
    /// Basis values and reference gradients (num_nodes x 2).
    void eval(const Point& xi, Eigen::VectorXd& values, Eigen::MatrixX2d& grads) const;

    /// Reference measure: 4 for the quad, 1/2 for the triangle.
    [[nodiscard]] double measure() const { return shape_ == ElementShape::quad ? 4.0 : 0.5; }

private:
    void build_quad();
    void build_triangle();
    [[nodiscard]] std::vector<double> line_nodes() const;

    ElementShape shape_;
    int degree_;
    NodeFamily family_;
    Eigen::MatrixX2d nodes_;
    std::vector<std::array<int, 2>> lattice_;
    std::vector<double> line_;
    // Triangle: inverse Vandermonde in the Legendre-product basis.
    Eigen::MatrixXd inv_vandermonde_;
};

/// Cached reference elements, safe to share across threads once built.
const ReferenceElement& reference_element(ElementShape shape, int degree,
                                          NodeFamily family = NodeFamily::gauss_lobatto);

struct QuadratureRule {
    Eigen::MatrixX2d points;
    Eigen::VectorXd weights;
};

/// Gauss rule exact for polynomials of total degree `exactness` (tensor rule
/// on the quad, collapsed Gauss rule on the triangle). Weights are positive.
QuadratureRule quadrature_rule(ElementShape shape, int exactness);

}  // namespace grsem
