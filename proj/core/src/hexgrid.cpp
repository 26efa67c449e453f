#include "spheretile/hexgrid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spheretile {

std::array<AxialCoord, 6> neighbors(const AxialCoord& c) {
  return {AxialCoord{c.q + 1, c.r},     AxialCoord{c.q + 1, c.r - 1},
          AxialCoord{c.q, c.r - 1},     AxialCoord{c.q - 1, c.r},
          AxialCoord{c.q - 1, c.r + 1}, AxialCoord{c.q, c.r + 1}};
}

ColorId isbell_color(const AxialCoord& c) {
  int v = (c.q + 3 * c.r) % 7;
  return v < 0 ? v + 7 : v;
}

std::array<ColorId, 7> perm_apply(const Perm7& p, const std::array<ColorId, 7>& seq) {
  std::array<ColorId, 7> out{};
  for (std::size_t i = 0; i < 7; ++i) out[i] = seq[static_cast<std::size_t>(p.image[i])];
  return out;
}

std::vector<ColorId> perm_apply(const Perm7& p, const std::vector<ColorId>& seq) {
  if (seq.size() != 7) throw std::invalid_argument("perm_apply: sequence length must be 7");
  std::vector<ColorId> out(7);
  for (std::size_t i = 0; i < 7; ++i) out[i] = seq[static_cast<std::size_t>(p.image[i])];
  return out;
}

std::array<ColorId, 7> edge_step(const std::array<ColorId, 7>& seq) {
  return perm_apply(perm_swap23(), perm_apply(perm_hex(), seq));
}

std::vector<ColorId> edge_step(const std::vector<ColorId>& seq) {
  if (seq.size() != 7) throw std::invalid_argument("edge_step: sequence length must be 7");
  return perm_apply(perm_swap23(), perm_apply(perm_hex(), seq));
}

Perm7 perm_compose(const Perm7& p, const Perm7& q) {
  Perm7 out;
  for (std::size_t i = 0; i < 7; ++i)
    out.image[i] = q.image[static_cast<std::size_t>(p.image[i])];
  return out;
}

Perm7 perm_inverse(const Perm7& p) {
  Perm7 out;
  for (std::size_t i = 0; i < 7; ++i)
    out.image[static_cast<std::size_t>(p.image[i])] = static_cast<ColorId>(i);
  return out;
}

int perm_order(const Perm7& p) {
  Perm7 acc = p;
  int k = 1;
  while (!(acc == perm_identity())) {
    acc = perm_compose(acc, p);
    ++k;
    if (k > 5040) throw std::logic_error("perm_order: not a permutation");
  }
  return k;
}

AxialCoord rot60_pow(const AxialCoord& c, int k) {
  int steps = ((k % 6) + 6) % 6;
  AxialCoord out = c;
  for (int i = 0; i < steps; ++i) out = rot60(out);
  return out;
}

int hex_distance(const AxialCoord& a, const AxialCoord& b) {
  int dq = a.q - b.q;
  int dr = a.r - b.r;
  return (std::abs(dq) + std::abs(dr) + std::abs(dq + dr)) / 2;
}

Vec2 hex_center(const AxialCoord& c, double diameter) {
  // Flat-top orientation, circumradius diameter/2.
  double s = diameter / 2.0;
  double sqrt3 = std::sqrt(3.0);
  return {1.5 * s * c.q, sqrt3 * s * (c.r + 0.5 * c.q)};
}

std::array<Vec2, 6> hex_corners(const AxialCoord& c, double diameter) {
  double s = diameter / 2.0;
  Vec2 ctr = hex_center(c, diameter);
  std::array<Vec2, 6> out{};
  for (int i = 0; i < 6; ++i) {
    double ang = M_PI / 3.0 * i;
    out[static_cast<std::size_t>(i)] = {ctr.x + s * std::cos(ang), ctr.y + s * std::sin(ang)};
  }
  return out;
}

namespace {

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  double vx = b.x - a.x, vy = b.y - a.y;
  double wx = p.x - a.x, wy = p.y - a.y;
  double vv = vx * vx + vy * vy;
  double t = vv > 0.0 ? (wx * vx + wy * vy) / vv : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  double dx = wx - t * vx, dy = wy - t * vy;
  return std::sqrt(dx * dx + dy * dy);
}

double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

bool segments_intersect(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1) {
  double d1 = orient(b0, b1, a0);
  double d2 = orient(b0, b1, a1);
  double d3 = orient(a0, a1, b0);
  double d4 = orient(a0, a1, b1);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

}  // namespace

double segment_segment_distance(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1) {
  if (segments_intersect(a0, a1, b0, b1)) return 0.0;
  return std::min(std::min(point_segment_distance(a0, b0, b1), point_segment_distance(a1, b0, b1)),
                  std::min(point_segment_distance(b0, a0, a1), point_segment_distance(b1, a0, a1)));
}

double hex_pair_distance(const AxialCoord& a, const AxialCoord& b, double diameter) {
  // Evaluate with a translated to the origin so the result depends only on
  // the lattice offset b - a (exact translation invariance in floating point).
  auto ca = hex_corners({0, 0}, diameter);
  auto cb = hex_corners(b - a, diameter);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 6; ++i) {
    const Vec2& a0 = ca[static_cast<std::size_t>(i)];
    const Vec2& a1 = ca[static_cast<std::size_t>((i + 1) % 6)];
    for (int j = 0; j < 6; ++j) {
      const Vec2& b0 = cb[static_cast<std::size_t>(j)];
      const Vec2& b1 = cb[static_cast<std::size_t>((j + 1) % 6)];
      best = std::min(best, segment_segment_distance(a0, a1, b0, b1));
    }
  }
  return best;
}

double isbell_separation_ratio(int window) {
  if (window < 8)
    throw std::invalid_argument("isbell_separation_ratio: window must be >= 8");
  // Every color class is a translate of the color-0 class, so it suffices to
  // scan pairs within one class. Center distances bound tile distances, so
  // pairs whose centers are far beyond the current best can be skipped.
  const double diameter = 1.0;
  std::vector<AxialCoord> tiles;
  for (int q = -window; q <= window; ++q)
    for (int r = -window; r <= window; ++r)
      if (isbell_color({q, r}) == 0) tiles.push_back({q, r});

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    Vec2 ci = hex_center(tiles[i], diameter);
    for (std::size_t j = i + 1; j < tiles.size(); ++j) {
      Vec2 cj = hex_center(tiles[j], diameter);
      double cd = std::hypot(ci.x - cj.x, ci.y - cj.y);
      if (cd - diameter >= best) continue;
      best = std::min(best, hex_pair_distance(tiles[i], tiles[j], diameter));
    }
  }
  if (!std::isfinite(best))
    throw std::invalid_argument("isbell_separation_ratio: window contains no same-color pair");
  return best / diameter;
}

}  // namespace spheretile
