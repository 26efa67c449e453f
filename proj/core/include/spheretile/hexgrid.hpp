#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace spheretile {

/// Axial coordinate on the hexagonal lattice.
struct AxialCoord {
  int q = 0;
  int r = 0;

  constexpr bool operator==(const AxialCoord&) const = default;
  constexpr AxialCoord operator+(const AxialCoord& o) const { return {q + o.q, r + o.r}; }
  constexpr AxialCoord operator-(const AxialCoord& o) const { return {q - o.q, r - o.r}; }
  constexpr AxialCoord operator-() const { return {-q, -r}; }
};

/// Strict-weak order so AxialCoord can key ordered containers.
constexpr bool operator<(const AxialCoord& a, const AxialCoord& b) {
  return a.q != b.q ? a.q < b.q : a.r < b.r;
}

/// One of the seven tile colors, 0..6.
using ColorId = int;

/// Permutation of the seven colors. image must contain each of 0..6 once.
struct Perm7 {
  std::array<ColorId, 7> image{0, 1, 2, 3, 4, 5, 6};

  constexpr bool operator==(const Perm7&) const = default;
};

/// The identity permutation.
constexpr Perm7 perm_identity() { return Perm7{}; }

/// Transposition of colors 2 and 3.
constexpr Perm7 perm_swap23() { return Perm7{{0, 1, 3, 2, 4, 5, 6}}; }

/// The permutation relating the color sequences on two sides of a lattice
/// rotation; together with perm_swap23 it generates the 5-cycle used to walk
/// color sequences around an icosahedral vertex.
constexpr Perm7 perm_hex() { return Perm7{{0, 3, 6, 2, 5, 1, 4}}; }

constexpr bool perm_is_valid(const Perm7& p) {
  std::array<bool, 7> seen{};
  for (ColorId c : p.image) {
    if (c < 0 || c > 6 || seen[static_cast<std::size_t>(c)]) return false;
    seen[static_cast<std::size_t>(c)] = true;
  }
  return true;
}

/// The 6 neighbors of a hexagon in fixed cyclic order starting at (+1,0):
/// [(1,0), (1,-1), (0,-1), (-1,0), (-1,1), (0,1)] added to c.
std::array<AxialCoord, 6> neighbors(const AxialCoord& c);

/// The seven-coloring of the hexagonal lattice: (q + 3r) mod 7, non-negative.
ColorId isbell_color(const AxialCoord& c);

/// result[i] = seq[p.image[i]].
std::array<ColorId, 7> perm_apply(const Perm7& p, const std::array<ColorId, 7>& seq);
std::vector<ColorId> perm_apply(const Perm7& p, const std::vector<ColorId>& seq);

/// One step of the edge-sequence walk: swap23 applied after hex.
std::array<ColorId, 7> edge_step(const std::array<ColorId, 7>& seq);
std::vector<ColorId> edge_step(const std::vector<ColorId>& seq);

/// Composition with perm_apply(compose(p,q), s) = perm_apply(p, perm_apply(q, s)),
/// i.e. compose(p,q).image[i] = q.image[p.image[i]].
Perm7 perm_compose(const Perm7& p, const Perm7& q);

Perm7 perm_inverse(const Perm7& p);

/// Smallest k >= 1 with p^k = identity.
int perm_order(const Perm7& p);

/// Rotation of the lattice by 60 degrees about the origin, mapping the
/// neighbor direction (1,0) to (0,1). Multiplies isbell_color by 3 mod 7.
constexpr AxialCoord rot60(const AxialCoord& c) { return {-c.r, c.q + c.r}; }

/// c rotated by k sixths of a turn (k taken mod 6).
AxialCoord rot60_pow(const AxialCoord& c, int k);

/// Hex-lattice step distance between two cells.
int hex_distance(const AxialCoord& a, const AxialCoord& b);

/// Planar point used by the hexagon geometry helpers.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Center of hexagon c when tiles have the given diameter (flat-top
/// orientation, circumradius diameter/2).
Vec2 hex_center(const AxialCoord& c, double diameter);

/// The 6 corners of hexagon c in counterclockwise order (flat-top).
std::array<Vec2, 6> hex_corners(const AxialCoord& c, double diameter);

/// Exact minimum distance between two planar segments.
double segment_segment_distance(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1);

/// Minimum distance between two closed hexagonal tiles (exact, via the 36
/// boundary segment pairs; valid for disjoint tiles).
double hex_pair_distance(const AxialCoord& a, const AxialCoord& b, double diameter);

/// (min distance between distinct same-colored closed tiles) / (tile
/// diameter) for the seven-coloring, by brute force over all same-color
/// pairs with coordinates in [-window, window]^2. Requires window >= 8.
double isbell_separation_ratio(int window);

}  // namespace spheretile
