#pragma once

#include <array>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spheretile/tiling.hpp"

namespace spheretile {

/// Tiles fail to cover the sphere (total solid angle short of 4*pi).
class CoverageGap : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
/// Tile interiors overlap (total solid angle exceeds 4*pi, or a tile has
/// non-positive oriented area).
class OverlapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Verification result. The verdict uses the raw sampled extrema, which move
/// monotonically toward the true values as h refines (a sampled diameter only
/// grows, a sampled separation only shrinks), so refinement can never flip an
/// invalid verdict to valid. The brackets add the sampling slack (2h) on the
/// uncertain side and must contain any finer estimate.
struct VerifyReport {
  bool valid = false;
  bool patch_mode = false;
  double tol = 0.0;
  double h = 0.0;
  /// Largest sampled tile diameter: bracket [sampled, sampled + 2h].
  int worst_diameter_tile = -1;
  Bracket worst_diameter{};
  /// Smallest sampled same-color separation: bracket [sampled - 2h, sampled].
  /// With no same-color pair in range, the pair is {-1,-1} and the value is
  /// the sphere diameter.
  std::array<int, 2> worst_separation_pair{-1, -1};
  Bracket worst_separation{};
  std::vector<std::array<int, 2>> siamese;
  std::vector<int> unscalable_tiles;
  /// "scalable" or "unscalable"; refining to "quasi-scalable" needs the
  /// feasibility probe of scalability_class.
  std::string classification;
  /// Total solid angle minus 4*pi (0 in patch mode, where coverage is not
  /// expected).
  double solid_angle_defect = 0.0;
  /// Patch mode: tiles touching the free boundary, excluded from the verdict
  /// (their shapes and missing neighbors are boundary effects).
  std::vector<int> excluded_tiles;
};

/// Canonical JSON text of a report (bit-identical for equal reports).
std::string report_to_json(const VerifyReport& r);

/// Full independent check of a realized tiling: structural validation, sphere
/// coverage by solid-angle accounting (within 1e-6 of 4*pi; CoverageGap /
/// OverlapError beyond), all tile diameters <= 1 + tol and all same-color
/// separations >= 1 - tol at sampling h (equality at 1 is valid). Patch
/// inputs skip coverage and exclude the free-boundary zone from the verdict.
VerifyReport verify_tiling(const SphericalTiling& t, double tol, double h = kDefaultSamplingH);

/// Pairs of tiles lying entirely inside the inner boundary of each other's
/// annulus of exclusion, i.e. every sampled cross-pair distance stays below 1
/// by the conservative margin 2h. Pairs with any cross distance >= 1 are
/// rejected by exact witness.
std::vector<std::array<int, 2>> siamese_pairs(const SphericalTiling& t,
                                              double h = kDefaultSamplingH);

/// Tiles abutting two tiles of one color (abutment = sharing at least one
/// boundary vertex; for two same-colored abutters one contact is necessarily
/// a single point). Such a tile's diameter is pinned to exactly 1.
std::vector<int> unscalable_tiles(const SphericalTiling& t);

/// Feasibility oracle supplied by the optimization layer: can the tiling's
/// vertices be rearranged to make it valid at the given radius?
using FeasibilityProbe = std::function<bool(const SphericalTiling&, double radius)>;

/// "scalable" when no tile is unscalable; otherwise "quasi-scalable" when the
/// probe confirms feasibility at radius * (1 +/- 0.02), else "unscalable".
/// Without a probe the unscalable/quasi distinction is left at "unscalable".
std::string scalability_class(const SphericalTiling& t, double tol,
                              const FeasibilityProbe& probe = {});

enum class PlatonicSolid { Cube, Octahedron, Dodecahedron };

/// Radial projection of a Platonic solid's face partition: cube 6 tiles in 6
/// colors, octahedron 8 tiles in 4 colors on antipodal pairs, dodecahedron 12
/// tiles in 6 colors on antipodal pairs. Throws std::invalid_argument for a
/// non-positive radius.
SphericalTiling build_platonic_fixture(PlatonicSolid solid, double r);
/// Name variant: "cube", "octahedron", "dodecahedron".
SphericalTiling build_platonic_fixture(const std::string& name, double r);

}  // namespace spheretile
