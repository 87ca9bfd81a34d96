#pragma once

#include "grsem/geometry.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace grsem {

enum class ElementShape : std::uint8_t { tri = 3, quad = 4 };
enum class Region : std::uint8_t { structured, gap };
enum class NodeKind : std::uint8_t { interior, outer, hole };

struct NodeTag {
    NodeKind kind = NodeKind::interior;
    int hole = -1;   ///< hole index for NodeKind::hole
    double t = 0.0;  ///< curve parameter for NodeKind::hole
};

struct Element {
    ElementShape shape = ElementShape::quad;
    std::array<int, 4> v{-1, -1, -1, -1};  ///< counterclockwise vertices
    Region region = Region::structured;

    [[nodiscard]] int num_vertices() const { return static_cast<int>(shape); }
};

/// Reference to local facet `facet` of element `elem`; elem < 0 marks "no sibling".
struct HalfFacet {
    int elem = -1;
    int facet = -1;

    [[nodiscard]] bool valid() const { return elem >= 0; }
    friend bool operator==(const HalfFacet&, const HalfFacet&) = default;
};

/// Linear quad/triangle mesh with array-based half-facet connectivity.
/// Local facet i of an element joins vertices i and i+1 (cyclic).
struct LinearMixedMesh {
    std::vector<Point> nodes;
    std::vector<NodeTag> tags;
    std::vector<Element> elements;
    std::vector<std::array<HalfFacet, 4>> sibling;

    [[nodiscard]] std::size_t num_nodes() const { return nodes.size(); }
    [[nodiscard]] std::size_t num_elements() const { return elements.size(); }
    [[nodiscard]] std::array<int, 2> facet_nodes(int e, int f) const;
    [[nodiscard]] double signed_area(int e) const;
    /// Boundary facet lying on hole curve; returns the hole id or -1.
    [[nodiscard]] int curved_facet_hole(int e, int f) const;
    [[nodiscard]] int count_curved_facets(int e) const;
    [[nodiscard]] std::size_t count(ElementShape shape) const;
};

/// Counterclockwise uniform quad grid with ceil(W/h) x ceil(H/h) cells.
LinearMixedMesh structured_grid(const Point& lower, const Point& upper, double h);

struct CavityCut {
    LinearMixedMesh mesh;
    /// Closed loops of exposed quad edges, each counterclockwise around its gap
    /// (the gap lies on the left of every directed loop edge).
    std::vector<std::vector<int>> loops;
};

/// Removes grid nodes outside the domain or within `clearance` of a hole and
/// every quad touching them, then extracts the cavity loops. Quads that would
/// leave pinched (vertex-only) contacts are dropped as well.
CavityCut cut_near_boundary(const LinearMixedMesh& grid, const Domain& domain, double clearance);

/// Target boundary edge lengths sampled uniformly in the curve parameter.
struct SizingField {
    double theta_max = 0.2;
    double h_min = 0.0;
    double h_max = 0.0;
    std::vector<double> t;
    std::vector<double> h;

    /// Nearest-parameter lookup.
    [[nodiscard]] double at(double param) const;
};

/// h_i = min(max(theta_max / K_i, h_min), h_max) at n_samples parameters;
/// zero curvature maps to h_max.
SizingField sizing_from_curvature(const ParametricCurve& curve, double theta_max, double h_min, double h_max,
                                  int n_samples = 4096);

/// Constant sizing h (no curvature refinement).
SizingField uniform_sizing(double h, int n_samples = 4096);

/// Sizing law for a single curvature value.
double target_edge_length(double curvature, double theta_max, double h_min, double h_max);

/// Boundary node parameters by equidistributing the (grading-limited) sizing
/// along arc length. Adjacent segment lengths differ by at most `grading`.
std::vector<double> place_boundary_nodes(const ParametricCurve& curve, const SizingField& sizing,
                                         double grading = 1.3);

struct GapMesh {
    std::vector<Point> points;  ///< loop points first, in loop order
    std::vector<double> params; ///< curve parameter or NaN
    std::vector<std::array<int, 3>> triangles;
};

/// Triangulates the annulus between a cavity loop (counterclockwise around
/// the gap) and the curve, with boundary nodes placed exactly on the curve.
GapMesh triangulate_gap(const std::vector<Point>& loop, const ParametricCurve& curve, const SizingField& sizing,
                        double interior_h, double grading = 1.3, double min_angle_deg = 21.0);

/// Flips interior edges until no triangle has more than one facet on a
/// curved boundary. Returns the number of flips. Requires valid AHF arrays;
/// rebuilds them. Throws MeshError if a flip would invert an element.
int enforce_single_boundary_facet(LinearMixedMesh& mesh);

/// Fills mesh.sibling. Throws MeshError on non-manifold facets.
void build_ahf(LinearMixedMesh& mesh);

enum class GrMode { none, h, hp };

struct MeshOptions {
    double h = 1.0 / 16.0;
    GrMode gr = GrMode::none;
    double theta_max = 0.2;
    double h_min_factor = 1.0 / 8.0;  ///< h_min = factor * h
    double h_max_factor = 1.0;        ///< h_max = factor * h
    double clearance_factor = 1.5;
    double grading = 1.3;
    int sizing_samples = 4096;
    double min_angle_deg = 21.0;
};

/// Complete linear meshing pipeline: grid, cut, sizing, gap triangulation,
/// node merge, AHF, edge flips.
LinearMixedMesh generate_mesh(const Domain& domain, const MeshOptions& options);

struct MeshQuality {
    double min_angle_deg = 180.0;
    double max_angle_deg = 0.0;
    double min_area = 0.0;
    std::size_t num_quads = 0;
    std::size_t num_tris = 0;
};

/// Interior angles of element e (3 or 4 entries).
std::vector<double> element_angles_deg(const LinearMixedMesh& mesh, int e);
MeshQuality mesh_quality(const LinearMixedMesh& mesh);

}  // namespace grsem
