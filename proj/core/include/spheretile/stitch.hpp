#pragma once

#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "spheretile/coloring.hpp"
#include "spheretile/goldberg.hpp"

namespace spheretile {

/// The repeating surgery pattern applied along every seam. Role offsets are
/// axial lattice coordinates relative to a stitch's core cell, in the frame
/// where `period` is the translation to the next stitch. Roles suffixed
/// "@next" refer to the following stitch; records with gap scope apply only
/// between consecutive stitches of one seam.
struct StitchTemplate {
  AxialCoord period{};
  std::map<std::string, AxialCoord> roles;

  struct Contraction {
    std::string a, b;       // role names, b may carry @next
    std::string junction;   // junction label
    bool gap_scope = false;
  };
  std::vector<Contraction> contractions;

  struct ChordSpec {
    std::string tile;                  // host role
    std::array<std::string, 2> ends;   // junction labels
    std::array<std::string, 2> between;
  };
  std::vector<ChordSpec> chords;

  struct ArcSpec {
    std::array<std::string, 2> segment;  // boundary between these roles
    std::string center;                  // junction label
    std::string opposite;                // point-contact role kept at distance 1
  };
  std::vector<ArcSpec> arcs;

  std::vector<std::string> unscalable;
};

/// Loads and validates a template from its JSON file.
StitchTemplate load_stitch_template(const std::string& path);
/// The built-in copy of the checked-in template.
StitchTemplate default_stitch_template();
/// Structural validation: role references resolve, contraction pairs are
/// lattice-adjacent, the half-turn about the core maps the role set onto
/// itself up to period shifts. Throws std::invalid_argument.
void validate_stitch_template(const StitchTemplate& tmpl);

class TemplateMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class NoSymmetricPhase : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class DovetailConflict : public std::runtime_error {
 public:
  DovetailConflict(const std::string& what, std::vector<std::pair<int, int>> pairs_)
      : std::runtime_error(what), pairs(std::move(pairs_)) {}
  std::vector<std::pair<int, int>> pairs;
};

/// The tiling after seam surgery: contracted 4-valent junctions, unit-chord
/// and unit-arc designations, per-tile scalability tags.
struct DeformedTiling {
  CombinatorialTiling base;
  GlobalColoring coloring;

  struct Junction {
    std::array<int, 2> corners{-1, -1};
    std::array<int, 4> tiles{-1, -1, -1, -1};
    int icoedge = -1;
    int stitch = -1;  // stitch index along the icoedge; gap junctions use the
                      // earlier stitch's index
    bool gap = false;
  };
  std::vector<Junction> junctions;
  /// Per corner of the base tiling: junction id or -1.
  std::vector<int> corner_junction;

  /// Boundary loop of each tile after contraction. Node ids: corners keep
  /// their ids; junction j becomes corner_count + j.
  std::vector<std::vector<int>> tile_nodes;
  int corner_count() const { return static_cast<int>(base.corner_pos.size()); }
  int node_count() const { return corner_count() + static_cast<int>(junctions.size()); }
  bool node_is_junction(int node) const { return node >= corner_count(); }
  /// Flat-polyhedron positions for all nodes (junctions at the contracted
  /// corner pair's midpoint).
  std::vector<Vec3> node_positions() const;

  /// A straight segment inside host_tile between two junctions, constrained
  /// to length exactly 1, keeping the `separated` same-colored pair apart.
  struct UnitChord {
    int host_tile = -1;
    int j0 = -1, j1 = -1;  // node ids
    std::array<int, 2> separated{-1, -1};
  };
  std::vector<UnitChord> chords;

  /// The host/neighbor shared boundary drawn as a unit-radius arc centered
  /// at `junction`, keeping point_cell (touching only at the junction) at
  /// distance exactly 1 from the neighbor.
  struct UnitArc {
    int host_tile = -1;
    int neighbor = -1;
    int junction = -1;  // node id
    int point_cell = -1;
  };
  std::vector<UnitArc> arcs;

  /// Tiles hosting at least one chord/arc record: these cannot grow or
  /// shrink; every other tile can absorb scale changes.
  std::vector<bool> unscalable;

  struct Stitch {
    int icoedge = -1;
    int index = -1;  // position along the icoedge, 0 nearest the lower vertex
    int core = -1;
    std::array<int, 2> sides{-1, -1};
    std::array<int, 2> junction_ids{-1, -1};
  };
  std::vector<Stitch> stitches;
  std::vector<std::vector<int>> edge_stitches;  // per icoedge, in order

  /// Per stitch: the unscalable tiles attributed to it (six each; tiles in
  /// icovertex regions belong to the end windows of both incident seams).
  std::vector<std::vector<int>> stitch_windows;

  /// Ordered shared nodes between two tiles along a's boundary loop.
  std::vector<int> contact_nodes(int a, int b) const;
};

/// Performs the surgery: instantiates the template on every icoedge (anchored
/// at the conflict cores of the distributed coloring), contracts boundaries
/// to junctions, then re-derives every unit-chord/unit-arc constraint from
/// the post-surgery contact structure and cross-checks the template.
DeformedTiling apply_stitches(const CombinatorialTiling& t, const GlobalColoring& g,
                              const StitchTemplate& tmpl);

/// Half-integer stitch offset that centers the stitch repeats symmetrically
/// about the icoedge midpoint: 0 when a stitch midpoint coincides with the
/// icoedge midpoint (odd count), 1/2 when the midpoint falls between two
/// stitches (even count). Throws NoSymmetricPhase when the conflict layout
/// admits neither.
double align_phase(const CombinatorialTiling& t, int icoedge);

/// Checks the pentagon patch at icovertex v: no same-colored positive-measure
/// contacts and no tile with two same-colored positive-measure neighbors may
/// appear among tiles within two steps of the pentagon. Returns the empty
/// list on success; throws DovetailConflict listing offending pairs.
std::vector<std::pair<int, int>> assemble_icovertex(const DeformedTiling& d, int v);

/// Euler characteristic of the deformed surface (nodes - edges + tiles).
int deformed_euler_characteristic(const DeformedTiling& d);

}  // namespace spheretile
