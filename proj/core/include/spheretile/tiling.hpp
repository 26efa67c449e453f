#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "spheretile/spheregeom.hpp"
#include "spheretile/stitch.hpp"

namespace spheretile {

/// A structurally ill-formed tiling (dangling references, broken boundary
/// loops, off-sphere vertices, inconsistent arc geometry).
class MalformedTiling : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A tiling realized on a sphere: a vertex table, typed boundary edges and
/// colored tiles whose boundaries are edge loops listed in counterclockwise
/// order seen from outside. This is the unit of persistence: verification,
/// optimization and rendering all consume exactly this structure.
struct SphericalTiling {
  double radius = 1.0;

  /// Construction parameters (zero for hand-built fixtures).
  struct Spec {
    int m = 0;
    int gm = 0;
    int gn = 0;
    /// Per-seam stitch phase offsets, when built from the seam pipeline.
    std::vector<double> phases;
  };
  Spec spec;

  std::vector<Vec3> vertices;

  enum class EdgeKind { Geodesic, UnitArc };
  struct Edge {
    int a = -1, b = -1;
    EdgeKind kind = EdgeKind::Geodesic;
    /// Arc-center vertex id for UnitArc edges (the curve lies at chordal
    /// distance exactly 1 from that vertex); -1 for geodesics.
    int center = -1;
  };
  std::vector<Edge> edges;

  struct Tile {
    ColorId color = -1;
    /// Edge ids in boundary order; consecutive edges share a vertex.
    std::vector<int> boundary;
  };
  std::vector<Tile> tiles;

  /// Vertex pairs pinned to chordal length exactly 1 (seam chords and arc
  /// radii). Serialized as annotations.
  std::vector<std::array<int, 2>> unit_chords;
  /// Tiles whose diameter is pinned to exactly 1 by the pinned lengths.
  std::vector<int> unscalable_tiles;
  /// True for partial tilings (single-seam studies): free boundary edges are
  /// expected and sphere coverage is not.
  bool patch = false;

  struct Provenance {
    std::string tool;
    std::string config_hash;
    std::uint64_t seed = 0;
  };
  Provenance provenance;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int edge_count() const { return static_cast<int>(edges.size()); }
  int tile_count() const { return static_cast<int>(tiles.size()); }
};

/// Vertices of tile t in boundary order (v[i] is the shared endpoint of
/// boundary edges i-1 and i). Throws MalformedTiling if the loop breaks.
std::vector<int> tile_vertex_loop(const SphericalTiling& s, int t);

/// Structural and geometric validation: references resolve, vertices lie on
/// the sphere within 1e-9 * r, boundary loops close, every edge borders
/// exactly two tiles (one or two when `patch`). Arc-circle closure is not a
/// file invariant (freshly built, unoptimized realizations violate it); it is
/// enforced where distances are computed. Throws MalformedTiling.
void validate_spherical_tiling(const SphericalTiling& s);

/// Boundary region of one tile for distance work. Arc endpoints may sit up
/// to arc_tol off their unit circle (mid-pipeline states); sampling then uses
/// the circle through their projections plus the endpoints themselves.
/// Throws MalformedTiling past arc_tol.
TileRegion tile_region(const SphericalTiling& s, int t, double arc_tol = 1e-5);

/// Solid angle of every tile (fan decomposition over boundary samples at
/// spacing h, positive for counterclockwise boundaries). Shared edges reuse
/// identical sample points in both incident tiles, so the sum over a closed
/// tiling telescopes to 4*pi up to rounding regardless of arc closure.
std::vector<double> tile_solid_angles(const SphericalTiling& s, double h = kDefaultSamplingH,
                                      double arc_tol = 1e-5);

/// Edge ids bounding exactly one tile (empty for closed tilings).
std::vector<int> free_boundary_edges(const SphericalTiling& s);

/// Realizes a deformed tiling on the sphere of the given radius: nodes are
/// projected radially from the flat polyhedron (junctions at merged-corner
/// midpoints), seam arc records become UnitArc edges, and chord records plus
/// arc radii become pinned unit lengths. The result is combinatorially final
/// but geometrically unoptimized: pinned lengths generally do not measure 1
/// until vertex optimization has run.
SphericalTiling realize(const DeformedTiling& d, double radius);

/// Node ids of `d` that survive realization (contracted-away corners drop
/// out), in ascending order; the position of a node id in this list is its
/// vertex id in realize()'s output.
std::vector<int> realized_node_ids(const DeformedTiling& d);

/// Restriction of `s` to the given tiles with compact ids (order-preserving).
/// Arc centers and boundary vertices are retained; pinned pairs that leave
/// the vertex set are dropped. The result is flagged as a patch.
SphericalTiling extract_patch(const SphericalTiling& s, const std::vector<int>& tile_ids);

}  // namespace spheretile
