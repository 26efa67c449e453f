#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "spheretile/hexgrid.hpp"
#include "spheretile/vec3.hpp"

namespace spheretile {

/// Default boundary sampling spacing. Bracket slack is twice this.
inline constexpr double kDefaultSamplingH = 0.005;

/// A point constrained to the sphere of radius r about the origin.
/// All distances in this module are chordal (straight-line in 3-space).
struct SpherePoint {
  Vec3 pos{};
  double r = 1.0;
};

/// Validates |pos| = r within 1e-12 * r.
SpherePoint make_sphere_point(const Vec3& pos, double r);

/// Point at distance r along the ray from the origin through net_point.
/// Throws on a zero-length input.
SpherePoint radial_project(const Vec3& net_point, double r);

/// Chordal distance. Throws if the radius tags differ.
double chord_dist(const SpherePoint& p, const SpherePoint& q);

/// A boundary piece: either a geodesic (great-circle) arc between its
/// endpoints or an arc of the circle at chordal distance exactly 1 from a
/// center point on the sphere. The minor solution is used unless `major`.
struct ArcEdge {
  enum class Kind { Geodesic, UnitCircle };
  Kind kind = Kind::Geodesic;
  SpherePoint a, b;
  std::optional<SpherePoint> center;
  bool major = false;
};

ArcEdge make_geodesic(const SpherePoint& a, const SpherePoint& b);

/// Unit-circle arc about `center`. Requires r >= 1/2 (the unit circle about a
/// sphere point exists only then), endpoints at chordal distance 1 from the
/// center within 1e-9.
ArcEdge make_unit_arc(const SpherePoint& a, const SpherePoint& b, const SpherePoint& center,
                      bool major = false);

/// Points along the edge including both endpoints, consecutive chordal
/// spacing <= h. Unit-circle samples lie exactly on {|x| = r, |x - c| = 1}.
/// Coincident endpoints yield the single point.
std::vector<SpherePoint> sample_edge(const ArcEdge& e, double h);

/// A tile: a closed loop of arcs plus its color.
struct TileRegion {
  int tile = -1;
  ColorId color = -1;
  std::vector<ArcEdge> boundary;
};

/// Checks the loop is closed (consecutive endpoints coincide within
/// 1e-9 * r) and all pieces share one radius tag. Throws on violation.
void validate_tile_region(const TileRegion& t);

/// All boundary samples at spacing h (closing duplicates removed).
std::vector<SpherePoint> boundary_samples(const TileRegion& t, double h);

struct Bracket {
  double lower = 0.0;
  double upper = 0.0;
};

/// Diameter bracket from boundary samples: lower = max pairwise chordal
/// distance over samples, upper = lower + 2h. Throws on an empty boundary.
Bracket tile_diameter(const TileRegion& t, double h);

struct PairDistResult {
  double lower = 0.0;
  double upper = 0.0;
  bool overlap = false;
};

/// Min-distance bracket between two tiles: upper = min pairwise chordal
/// sample distance, lower = upper - 2h (clamped at 0). `overlap` is set when
/// one tile's samples lie strictly inside the other region.
PairDistResult tile_pair_min_dist(const TileRegion& a, const TileRegion& b, double h);

/// Spherical cap (axis through a sphere point, angular radius) containing all
/// boundary samples of a tile.
struct BoundingCap {
  SpherePoint axis;
  double angle = 0.0;
};

BoundingCap bounding_cap(const TileRegion& t, double h = kDefaultSamplingH);

/// Lower bound on the chordal distance between any point of cap c1 and any
/// point of cap c2 (0 if the caps may touch).
double cap_min_chord(const BoundingCap& c1, const BoundingCap& c2);

/// True when some sample of `inner` lies strictly inside the region bounded
/// by `outer`'s boundary loop (margin h/2 from the boundary itself).
bool tile_contains_sample_of(const TileRegion& outer, const TileRegion& inner, double h);

/// Numerical witness that radial projection cannot reduce a separation below
/// the planar one times the local linear scale. p and q lie on net planes at
/// distances plane_p and plane_q from the origin; the factor used is the
/// minimum endpoint singular value of the projection differential,
/// r * plane / |point|^2.
bool projection_separation_witness(const Vec3& p, const Vec3& q, double plane_p, double plane_q,
                                   double r, double tol = 1e-9);

}  // namespace spheretile
