#include "spheretile/spheregeom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spheretile {

namespace {

constexpr double kRadiusTagTol = 1e-12;

void check_same_radius(const SpherePoint& p, const SpherePoint& q) {
  if (std::abs(p.r - q.r) > kRadiusTagTol * std::max(p.r, q.r))
    throw std::invalid_argument("sphere points carry different radius tags");
}

// Orthonormal basis of the plane through the unit circle about center c:
// the circle {|x| = r, |x - c| = 1} lies in the plane x . chat = d0 with
// d0 = (r^2 - 1/2) / r, has center d0 * chat and radius sqrt(r^2 - d0^2).
struct UnitCircleFrame {
  Vec3 c0;      // circle center
  Vec3 u, v;    // orthonormal in-plane axes
  double rho;   // circle radius
};

UnitCircleFrame unit_circle_frame(const SpherePoint& center) {
  double r = center.r;
  Vec3 chat = normalized(center.pos);
  double d0 = (r * r - 0.5) / r;
  double rho2 = r * r - d0 * d0;
  UnitCircleFrame f;
  f.rho = rho2 > 0 ? std::sqrt(rho2) : 0.0;
  f.c0 = chat * d0;
  Vec3 seed = std::abs(chat.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  f.u = normalized(cross(chat, seed));
  f.v = cross(chat, f.u);
  return f;
}

double circle_angle_of(const UnitCircleFrame& f, const Vec3& p) {
  Vec3 d = p - f.c0;
  return std::atan2(dot(d, f.v), dot(d, f.u));
}

// Power-of-two segment count >= x: halving h then doubles the count exactly,
// so coarser sample sets are subsets of finer ones and brackets nest.
int segments_for(double x) {
  int n = 1;
  while (n < x && n < (1 << 24)) n <<= 1;
  return n;
}

}  // namespace

SpherePoint make_sphere_point(const Vec3& pos, double r) {
  if (r <= 0) throw std::invalid_argument("sphere radius must be positive");
  if (std::abs(norm(pos) - r) > 1e-12 * r)
    throw std::invalid_argument("point does not lie on the sphere of the given radius");
  return SpherePoint{pos, r};
}

SpherePoint radial_project(const Vec3& net_point, double r) {
  double len = norm(net_point);
  if (len == 0.0) throw std::invalid_argument("cannot project the origin to the sphere");
  if (r <= 0) throw std::invalid_argument("sphere radius must be positive");
  return SpherePoint{net_point * (r / len), r};
}

double chord_dist(const SpherePoint& p, const SpherePoint& q) {
  check_same_radius(p, q);
  return dist(p.pos, q.pos);
}

ArcEdge make_geodesic(const SpherePoint& a, const SpherePoint& b) {
  check_same_radius(a, b);
  ArcEdge e;
  e.kind = ArcEdge::Kind::Geodesic;
  e.a = a;
  e.b = b;
  return e;
}

ArcEdge make_unit_arc(const SpherePoint& a, const SpherePoint& b, const SpherePoint& center,
                      bool major) {
  check_same_radius(a, b);
  check_same_radius(a, center);
  if (center.r < 0.5)
    throw std::invalid_argument(
        "unit-circle edges need sphere radius >= 1/2 (no unit circle exists below)");
  if (std::abs(dist(a.pos, center.pos) - 1.0) > 1e-9 ||
      std::abs(dist(b.pos, center.pos) - 1.0) > 1e-9)
    throw std::invalid_argument("unit-circle arc endpoints must be at chordal distance 1 "
                                "from the center");
  ArcEdge e;
  e.kind = ArcEdge::Kind::UnitCircle;
  e.a = a;
  e.b = b;
  e.center = center;
  e.major = major;
  return e;
}

std::vector<SpherePoint> sample_edge(const ArcEdge& e, double h) {
  if (h <= 0) throw std::invalid_argument("sampling spacing must be positive");
  double r = e.a.r;
  if (dist(e.a.pos, e.b.pos) == 0.0 && !e.major) return {e.a};

  std::vector<SpherePoint> out;
  if (e.kind == ArcEdge::Kind::Geodesic) {
    double theta = angle_between(e.a.pos, e.b.pos);
    if (theta == 0.0) return {e.a};
    int n = segments_for(r * theta / h);
    double s = std::sin(theta);
    out.reserve(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
      double t = static_cast<double>(i) / n;
      Vec3 p;
      if (s > 1e-12) {
        p = e.a.pos * (std::sin((1 - t) * theta) / s) + e.b.pos * (std::sin(t * theta) / s);
      } else {
        p = e.a.pos * (1 - t) + e.b.pos * t;
      }
      out.push_back(SpherePoint{normalized(p) * r, r});
    }
    out.front() = e.a;
    out.back() = e.b;
    return out;
  }

  UnitCircleFrame f = unit_circle_frame(*e.center);
  double pa = circle_angle_of(f, e.a.pos);
  double pb = circle_angle_of(f, e.b.pos);
  double dphi = pb - pa;
  const double two_pi = 2 * std::acos(-1.0);
  while (dphi <= -std::acos(-1.0)) dphi += two_pi;
  while (dphi > std::acos(-1.0)) dphi -= two_pi;
  if (e.major) dphi = dphi > 0 ? dphi - two_pi : dphi + two_pi;
  int n = segments_for(f.rho * std::abs(dphi) / h);
  out.reserve(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    double phi = pa + dphi * static_cast<double>(i) / n;
    Vec3 p = f.c0 + (f.u * std::cos(phi) + f.v * std::sin(phi)) * f.rho;
    out.push_back(SpherePoint{p, r});
  }
  out.front() = e.a;
  out.back() = e.b;
  return out;
}

void validate_tile_region(const TileRegion& t) {
  if (t.boundary.empty()) throw std::invalid_argument("tile region has an empty boundary");
  double r = t.boundary.front().a.r;
  for (std::size_t i = 0; i < t.boundary.size(); ++i) {
    const ArcEdge& e = t.boundary[i];
    check_same_radius(e.a, t.boundary.front().a);
    check_same_radius(e.b, t.boundary.front().a);
    const ArcEdge& next = t.boundary[(i + 1) % t.boundary.size()];
    if (dist(e.b.pos, next.a.pos) > 1e-9 * r)
      throw std::invalid_argument("tile boundary loop is not closed");
  }
}

std::vector<SpherePoint> boundary_samples(const TileRegion& t, double h) {
  std::vector<SpherePoint> out;
  for (const ArcEdge& e : t.boundary) {
    auto s = sample_edge(e, h);
    // Drop each edge's final sample: it coincides with the next edge's first.
    out.insert(out.end(), s.begin(), s.end() - (s.size() > 1 ? 1 : 0));
  }
  return out;
}

Bracket tile_diameter(const TileRegion& t, double h) {
  auto s = boundary_samples(t, h);
  if (s.empty()) throw std::invalid_argument("tile region has an empty boundary");
  double best = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j) best = std::max(best, dist(s[i].pos, s[j].pos));
  return Bracket{best, best + 2 * h};
}

PairDistResult tile_pair_min_dist(const TileRegion& a, const TileRegion& b, double h) {
  auto sa = boundary_samples(a, h);
  auto sb = boundary_samples(b, h);
  if (sa.empty() || sb.empty()) throw std::invalid_argument("tile region has an empty boundary");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : sa)
    for (const auto& q : sb) best = std::min(best, dist(p.pos, q.pos));
  PairDistResult res;
  res.upper = best;
  res.lower = std::max(0.0, best - 2 * h);
  if (tile_contains_sample_of(a, b, h) || tile_contains_sample_of(b, a, h)) {
    res.overlap = true;
    res.lower = 0.0;
    res.upper = 0.0;
  }
  return res;
}

BoundingCap bounding_cap(const TileRegion& t, double h) {
  auto s = boundary_samples(t, h);
  if (s.empty()) throw std::invalid_argument("tile region has an empty boundary");
  Vec3 sum{};
  for (const auto& p : s) sum = sum + p.pos;
  double r = s.front().r;
  Vec3 axis = norm(sum) > 0 ? normalized(sum) : normalized(s.front().pos);
  double worst = 0.0;
  for (const auto& p : s) worst = std::max(worst, angle_between(axis, p.pos));
  return BoundingCap{SpherePoint{axis * r, r}, worst};
}

double cap_min_chord(const BoundingCap& c1, const BoundingCap& c2) {
  double r = c1.axis.r;
  double gap = angle_between(c1.axis.pos, c2.axis.pos) - c1.angle - c2.angle;
  if (gap <= 0) return 0.0;
  return 2 * r * std::sin(std::min(gap, std::acos(-1.0)) / 2);
}

bool tile_contains_sample_of(const TileRegion& outer, const TileRegion& inner, double h) {
  // Project both onto the plane tangent at the outer cap's axis (central
  // projection) and use the planar winding number; valid while the outer
  // region stays well inside a hemisphere, which holds for all tiles here.
  BoundingCap cap = bounding_cap(outer, h);
  if (cap.angle >= std::acos(-1.0) / 2 - 0.1) return false;
  Vec3 n = normalized(cap.axis.pos);
  Vec3 seed = std::abs(n.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  Vec3 u = normalized(cross(n, seed));
  Vec3 v = cross(n, u);
  auto to_plane = [&](const Vec3& p, Vec2& out) {
    double depth = dot(p, n);
    if (depth <= 1e-9) return false;
    out = Vec2{dot(p, u) / depth, dot(p, v) / depth};
    return true;
  };

  std::vector<Vec2> poly;
  for (const auto& p : boundary_samples(outer, h)) {
    Vec2 q;
    if (!to_plane(p.pos, q)) return false;
    poly.push_back(q);
  }

  double margin = h / 2;
  for (const auto& p : boundary_samples(inner, h)) {
    Vec2 q;
    if (!to_plane(p.pos, q)) continue;
    // Keep clear of the outer boundary itself: shared edges are not overlap.
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& b : poly) {
      double dx = q.x - b.x, dy = q.y - b.y;
      nearest = std::min(nearest, std::sqrt(dx * dx + dy * dy));
    }
    if (nearest <= margin) continue;
    int winding = 0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Vec2& a = poly[i];
      const Vec2& b = poly[(i + 1) % poly.size()];
      if (a.y <= q.y) {
        if (b.y > q.y && (b.x - a.x) * (q.y - a.y) - (q.x - a.x) * (b.y - a.y) > 0) ++winding;
      } else if (b.y <= q.y && (b.x - a.x) * (q.y - a.y) - (q.x - a.x) * (b.y - a.y) < 0) {
        --winding;
      }
    }
    if (winding != 0) return true;
  }
  return false;
}

bool projection_separation_witness(const Vec3& p, const Vec3& q, double plane_p, double plane_q,
                                   double r, double tol) {
  double np = norm(p), nq = norm(q);
  if (np == 0 || nq == 0) throw std::invalid_argument("net point at the origin");
  double factor = std::min(r * plane_p / (np * np), r * plane_q / (nq * nq));
  double planar = dist(p, q);
  double spherical = dist(p * (r / np), q * (r / nq));
  return spherical >= factor * planar - tol;
}

}  // namespace spheretile
