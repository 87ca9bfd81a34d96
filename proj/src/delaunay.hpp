#pragma once

// Constrained Delaunay refinement of the annular gap between a cavity loop
// of straight quad edges and a smooth closed curve. Internal to meshgen.

#include "grsem/geometry.hpp"

#include <array>
#include <functional>
#include <vector>

namespace grsem::detail {

struct GapInput {
    /// Cavity loop, counterclockwise with the gap on the left. Never split.
    std::vector<Point> loop;
    const ParametricCurve* curve = nullptr;
    /// Increasing curve parameters of the initial boundary nodes, spanning one period.
    std::vector<double> curve_params;
    /// Target edge length at a point.
    std::function<double(const Point&)> size;
    /// Curve segments shorter than this are never split by refinement.
    double min_split_length = 0.0;
    double min_angle_deg = 21.0;
    int max_insertions = 200000;
};

struct GapOutput {
    /// loop points first (same order as the input), then curve and Steiner nodes.
    std::vector<Point> points;
    /// Curve parameter in [0, 2pi) for nodes on the curve, NaN elsewhere.
    std::vector<double> params;
    std::vector<std::array<int, 3>> triangles;
    /// Curve segments (a, b) with increasing parameter from a to b.
    std::vector<std::array<int, 2>> curve_segments;
};

GapOutput triangulate_annulus(const GapInput& input);

/// Positive iff d lies inside the circumcircle of the counterclockwise triangle (a, b, c).
double incircle(const Point& a, const Point& b, const Point& c, const Point& d);

}  // namespace grsem::detail
