#pragma once

#include <array>
#include <optional>
#include <vector>

#include "spheretile/hexgrid.hpp"
#include "spheretile/vec3.hpp"

namespace spheretile {

/// Fixed canonical icosahedron incidence structure with deterministic ids.
/// Vertex positions have unit circumradius.
struct IcoNet {
  std::array<Vec3, 12> vertex_pos;
  /// Vertex triples, counterclockwise seen from outside.
  std::array<std::array<int, 3>, 20> face_vertices;

  struct IcoEdge {
    int v0, v1;  // v0 < v1
    int f0, f1;  // f0 < f1
  };
  std::array<IcoEdge, 30> edges;

  /// Incident faces/edges of each vertex, counterclockwise about the
  /// outward vertex axis.
  std::array<std::array<int, 5>, 12> vertex_faces;
  std::array<std::array<int, 5>, 12> vertex_edges;
  std::array<std::array<int, 3>, 20> face_edges;
  std::array<int, 12> antipode;

  /// Edge id shared by two adjacent faces, -1 if not adjacent.
  int edge_between(int f, int g) const;
  /// Edge id joining two vertices, -1 if not joined.
  int edge_of_vertices(int a, int b) const;
};

IcoNet build_ico_net();

/// Goldberg polyhedron parameters. family_m is set when (gm, gn) is the
/// (4m, 2m+1) working family.
struct GoldbergSpec {
  int gm = 1;
  int gn = 0;
  std::optional<int> family_m;
};

/// The working family GP(4m, 2m+1).
GoldbergSpec family_spec(int m);

/// Canonical address of a cell: pentagons live at icovertices, hexagons at a
/// lattice coordinate of their canonical (lowest-id containing) icoface.
struct CellRef {
  enum class Kind { None, Hexagon, Pentagon };
  Kind kind = Kind::None;
  int face = -1;
  AxialCoord coord{};
  int icovertex = -1;

  bool operator==(const CellRef&) const = default;
};

/// Directed seam map between adjacent icofaces f -> g in lattice coordinates:
/// p_g = rot60^k(p_f) + t.
struct SeamTransition {
  int k = -1;
  AxialCoord t{};
};

/// One tile of the undeformed Goldberg tiling straddling the icoedge band,
/// ordered along the icoedge. lam in [0,1] is the normalized position along
/// the icoedge; side is the sign of the perpendicular offset.
struct IcoedgeTileEntry {
  int tile = -1;
  double lam = 0.0;
  int side = 0;  // -1, 0, +1
};

/// One of the 60 rotational symmetries of the icosahedron, with the induced
/// relabelings. corner_shift[f] in {0,1,2} tells how the corners of face f
/// cyclically align with those of face_map[f].
struct IcoRotation {
  Mat3 R;
  std::array<int, 12> vertex_map;
  std::array<int, 20> face_map;
  std::array<int, 20> corner_shift;
};

struct CombinatorialTiling {
  GoldbergSpec spec;
  IcoNet net;
  /// Lattice address of face corner 1; corner 0 is (0,0) and corner 2 is
  /// rot60(w). Identical for every face. One chiral form chosen consistently.
  AxialCoord w{};
  int T = 0;

  enum class TileKind { Hexagon, Pentagon };
  struct Tile {
    TileKind kind = TileKind::Hexagon;
    int home_face = -1;
    AxialCoord coord{};
    int icovertex = -1;  // pentagons only
    /// Neighbor tile ids, counterclockwise seen from outside.
    std::vector<int> ring;
    /// corners[i] lies between ring[i] and ring[i+1].
    std::vector<int> corners;
    /// Center on the flat-faced (equilateral) polyhedron, circumradius 1.
    Vec3 center{};
    bool icoedge_straddling = false;
    bool icovertex_adjacent = false;
  };
  std::vector<Tile> tiles;

  std::vector<Vec3> corner_pos;
  std::vector<std::array<int, 3>> corner_tiles;

  /// Half-edge h = he_offset[t] + slot is the boundary piece of tile t facing
  /// ring[slot], running from corners[slot-1] to corners[slot].
  std::vector<int> he_offset;
  std::vector<int> he_tile_of;
  std::vector<int> he_twin;
  int half_edge_count() const { return static_cast<int>(he_twin.size()); }
  int he_tile(int h) const { return he_tile_of[static_cast<std::size_t>(h)]; }
  int he_slot(int h) const { return h - he_offset[static_cast<std::size_t>(he_tile(h))]; }
  int he_next(int h) const;

  /// Seam map between adjacent faces; throws for non-adjacent pairs.
  const SeamTransition& transition(int f, int g) const;
  AxialCoord apply_transition(int f, int g, const AxialCoord& p) const;

  /// Canonical cell containing lattice point p of face f's chart (p may lie a
  /// little outside the face). Kind None if nothing is found nearby.
  CellRef canon(int face, AxialCoord p) const;
  /// Tile id for a chart point, -1 if none.
  int tile_at(int face, AxialCoord p) const;
  int tile_of(const CellRef& c) const;
  /// Pentagons occupy tile ids 0..11, one per icovertex.
  int pentagon_tile(int icovertex) const { return icovertex; }
  /// The (face, corner address) pairs hosting an icovertex (5 of them).
  std::vector<std::pair<int, AxialCoord>> pentagon_addrs(int icovertex) const;

  /// 3D position of a chart point on face f's plane (the chart extends past
  /// the face triangle; off-face points land on the unfolded plane).
  Vec3 chart_point(int face, const Vec2& planar) const;
  Vec3 cell_center(int face, const AxialCoord& p) const;

  /// Tiles within lattice distance < 1 of the icoedge segment, ordered along
  /// the icoedge (endpoint pentagons first and last).
  const std::vector<IcoedgeTileEntry>& icoedge_band(int edge_id) const;

  /// Applies a rotation to a chart address: returns the image chart address
  /// on face rot.face_map[f].
  std::pair<int, AxialCoord> map_cell(const IcoRotation& rot, int f, const AxialCoord& p) const;
  /// The induced tile permutation; throws if the rotation is not an
  /// automorphism of the tiling.
  std::vector<int> tile_permutation(const IcoRotation& rot) const;

  int pentagon_count() const { return 12; }
  int hexagon_count() const { return static_cast<int>(tiles.size()) - 12; }

  // Internal per-face affine charts and cached icoedge bands.
  std::array<Vec3, 20> chart_origin;
  std::array<Vec3, 20> chart_u;
  std::array<Vec3, 20> chart_v;
  std::vector<std::vector<IcoedgeTileEntry>> edge_bands;
  std::array<std::array<SeamTransition, 20>, 20> trans;
};

CombinatorialTiling build_goldberg(const GoldbergSpec& spec);

/// Straddling/abutting tiles of an icoedge in order, with side annotations.
std::vector<IcoedgeTileEntry> icoedge_tiles(const CombinatorialTiling& t, int edge_id);

/// The 60 rotational symmetries, deterministically ordered; index 0 is the
/// identity.
std::vector<IcoRotation> ico_rotations(const IcoNet& net);

}  // namespace spheretile
