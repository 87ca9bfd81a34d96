#pragma once

#include "grsem/reference.hpp"

#include <vector>

namespace grsem {

/// Classification of a global solution node.
struct SolutionNodeInfo {
    NodeKind kind = NodeKind::interior;
    int hole = -1;
    double t = 0.0;                ///< curve parameter of the closest point, for hole nodes
    bool touches_gap = false;      ///< belongs to at least one gap triangle
};

/// Degree-p solution nodes and per-element degree-q geometry on top of a
/// linear mixed mesh.
struct HighOrderMesh {
    LinearMixedMesh linear;
    const Domain* domain = nullptr;
    int p = 1;
    int q = 1;
    NodeFamily family = NodeFamily::gauss_lobatto;

    std::vector<Point> nodes;
    std::vector<SolutionNodeInfo> info;
    /// Global solution-node ids per element in reference-element order.
    std::vector<std::vector<int>> elem_nodes;
    /// Local facet on the curve, or -1 for straight elements.
    std::vector<int> curved_facet;
    /// Geometry nodes (degree q, Gauss-Lobatto family) of curved elements;
    /// empty for straight elements, which use their vertices.
    std::vector<Eigen::MatrixX2d> geometry;
    /// Curved elements kept straight because their curved map was invalid
    /// (only with strict_geometry off).
    int straight_fallbacks = 0;

    [[nodiscard]] std::size_t num_nodes() const { return nodes.size(); }
    [[nodiscard]] std::size_t num_elements() const { return linear.num_elements(); }
    [[nodiscard]] bool is_curved(int e) const { return curved_facet[static_cast<std::size_t>(e)] >= 0; }
    [[nodiscard]] const ReferenceElement& solution_element(int e) const;
    [[nodiscard]] const ReferenceElement& geometry_element(int e) const;
    /// Geometry nodes of element e (vertices for straight elements).
    [[nodiscard]] Eigen::MatrixX2d geometry_nodes(int e) const;
};

/// Evaluated element map: position and Jacobian d x / d xi.
struct MapPoint {
    Point x;
    Eigen::Matrix2d jac;
};

MapPoint map_point(const HighOrderMesh& mesh, int e, const Point& xi);

struct HighOrderOptions {
    /// Abort on projection failure or a non-positive Jacobian; otherwise the
    /// element keeps straight edges.
    bool strict_geometry = true;
    NodeFamily family = NodeFamily::gauss_lobatto;
};

/// Builds global solution nodes of degree p and geometry of degree q
/// (p <= q <= p+2). Shared edge nodes are merged by topology.
HighOrderMesh insert_high_order_nodes(const LinearMixedMesh& linear, const Domain& domain, int p, int q,
                                      const HighOrderOptions& options = {});

/// Geometry nodes of degree `q_target` for a triangle with one edge on the
/// curve: the element is elevated one degree at a time up to p_target+2,
/// interpolating the previous map and projecting curved-edge nodes onto the
/// curve, then interpolated down to q_target. Curved-edge nodes of the result
/// are projected once more so they lie on the curve.
///
/// `vertices` are the three triangle corners, `facet` the local curved edge
/// and ta, tb the curve parameters of its endpoints.
Eigen::MatrixX2d elevate_and_project(const Eigen::Matrix<double, 3, 2>& vertices, int facet,
                                     const ParametricCurve& curve, double ta, double tb, int p_target,
                                     int q_target);

/// Minimum and maximum det J over the assembly quadrature points of element e.
std::pair<double, double> jacobian_extrema(const HighOrderMesh& mesh, int e);

/// Assembly quadrature exactness for element e.
int assembly_exactness(const HighOrderMesh& mesh, int e);

}  // namespace grsem
