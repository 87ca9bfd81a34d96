#pragma once

#include "grsem/highorder.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>

namespace grsem {

// Plain-text mesh format, all reals with 17 significant digits:
//
//   grsem-mesh 1
//   nodes <N>
//   <id> <x> <y> <tag> <t>          tag: 0 interior, 1 outer box, 2+k hole k
//   elements <M>
//   quad <a> <b> <c> <d> <region>   region: s (structured) or g (gap)
//   tri <a> <b> <c> <region>
//
// An optional high-order section follows:
//
//   highorder <p> <q> <family>      family: gl or eq
//   solution_nodes <N>
//   <id> <x> <y> <kind> <hole> <t> <touches_gap>
//   element_nodes <M>
//   <elem> <count> <ids...>
//   geometry <C>
//   <elem> <facet> <count> <x0> <y0> <x1> <y1> ...

void write_mesh(std::ostream& out, const LinearMixedMesh& mesh, const HighOrderMesh* high_order = nullptr);
void write_mesh(const std::filesystem::path& path, const LinearMixedMesh& mesh,
                const HighOrderMesh* high_order = nullptr);

struct MeshFile {
    LinearMixedMesh linear;
    std::optional<HighOrderMesh> high_order;  ///< domain pointer left null
};

/// Parses the format above and rebuilds the half-facet arrays. Throws
/// IoError on unreadable files and MeshError on malformed content.
MeshFile read_mesh(std::istream& in);
MeshFile read_mesh(const std::filesystem::path& path);

/// One `<node_id> <value>` line per node.
void write_solution(const std::filesystem::path& path, const Eigen::VectorXd& u);
Eigen::VectorXd read_solution(const std::filesystem::path& path);

}  // namespace grsem
