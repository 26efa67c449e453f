#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spheretile/goldberg.hpp"
#include "spheretile/hexgrid.hpp"

namespace spheretile {

/// Global tile coloring: each icoface colors its chart cells through a fixed
/// permutation of the base seven-coloring; tiles take the value of their
/// canonical chart. face_perm[f].image[b] is the color assigned to base
/// value b on face f.
struct GlobalColoring {
  std::array<Perm7, 20> face_perm{};
  std::vector<ColorId> tile_colors;
  /// The unordered color pair swapped across each icoedge (set when the seam
  /// map is a single transposition; empty for seams that match or mismatch
  /// by more than a transposition).
  std::array<std::optional<std::pair<ColorId, ColorId>>, 30> edge_swaps{};
  /// Color of the pentagon at each icovertex.
  std::array<ColorId, 12> vertex_colors{};
};

/// Combinatorial too-close candidates: same-colored tile pairs at mesh
/// distance 1 or 2, grouped by their nearest icoedge.
struct MismatchReport {
  std::array<std::vector<std::pair<int, int>>, 30> edge_conflicts{};
  /// Number of icoedges whose seam value map is not the identity.
  int mismatched_edges = 0;

  int total_conflicts() const {
    int n = 0;
    for (const auto& v : edge_conflicts) n += static_cast<int>(v.size());
    return n;
  }
};

/// Raised when the per-icovertex transition cycles fail to close; indicates
/// an inconsistent permutation table, not an input condition.
class ClosureFailure : public std::runtime_error {
 public:
  explicit ClosureFailure(const std::string& msg) : std::runtime_error(msg) {}
};

/// The color-value map across the seam from face f to adjacent face g:
/// a tile color seen in f's coloring maps to the color the same base cell
/// would receive from g's coloring.
Perm7 seam_value_map(const CombinatorialTiling& t, const GlobalColoring& g, int f, int gface);

/// Pure Isbell propagation over a breadth-first spanning tree of icofaces
/// (no swaps). The report lists every icoedge whose two sides disagree.
std::pair<GlobalColoring, MismatchReport> color_naive(const CombinatorialTiling& t);

/// The distributed coloring: every icoedge carries exactly one swapped color
/// pair and all 12 icovertex transition cycles close. Supports the
/// GP(4m, 2m+1) family plus the GP(m,0) fixtures with m = 2 or 6 (mod 7);
/// other specs have no such coloring and are rejected.
GlobalColoring color_distributed(const CombinatorialTiling& t);

/// Same-color tile pairs at mesh distance <= 2 (the candidates geometry must
/// separate), attributed to their nearest icoedge.
MismatchReport combinatorial_conflicts(const CombinatorialTiling& t, const GlobalColoring& g);

}  // namespace spheretile
