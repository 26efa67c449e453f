#include "spheretile/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <tuple>
#include <utility>

#include "json.hpp"

#include "spheretile/spheregeom.hpp"
#include "spheretile/tiling_io.hpp"

namespace spheretile {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct TileSamples {
  std::vector<Vec3> pts;
  BoundingCap cap;
};

/// Boundary samples and bounding caps for every tile, computed once and
/// shared by the diameter, separation, and Siamese scans. The caps contain
/// all samples, so cap-based chord bounds are sound for sampled extrema.
std::vector<TileSamples> collect_samples(const SphericalTiling& s, double h) {
  std::vector<TileSamples> out(s.tiles.size());
  for (int t = 0; t < static_cast<int>(s.tiles.size()); ++t) {
    TileRegion region = tile_region(s, t);
    std::vector<SpherePoint> sp = boundary_samples(region, h);
    TileSamples& ts = out[t];
    ts.pts.reserve(sp.size());
    Vec3 sum{};
    for (const SpherePoint& p : sp) {
      ts.pts.push_back(p.pos);
      sum += p.pos;
    }
    Vec3 axis = norm(sum) > 1e-12 ? normalized(sum) : normalized(ts.pts.front());
    double worst = 0.0;
    for (const Vec3& p : ts.pts) worst = std::max(worst, angle_between(axis, p));
    ts.cap = BoundingCap{SpherePoint{axis * s.radius, s.radius}, worst};
  }
  return out;
}

/// Max pairwise chordal distance over one tile's samples. The farthest pair
/// of a sub-hemispheric region lies on its boundary, so boundary samples
/// suffice.
double sampled_diameter(const TileSamples& t) {
  double best2 = 0.0;
  const auto& p = t.pts;
  for (std::size_t i = 0; i + 1 < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j) best2 = std::max(best2, dist2(p[i], p[j]));
  return std::sqrt(best2);
}

/// Min chordal distance over cross pairs of samples.
double sampled_min_dist(const TileSamples& a, const TileSamples& b) {
  double best2 = std::numeric_limits<double>::infinity();
  for (const Vec3& p : a.pts)
    for (const Vec3& q : b.pts) best2 = std::min(best2, dist2(p, q));
  return std::sqrt(best2);
}

/// Max chordal distance over cross pairs, abandoned (returning `stop`) as
/// soon as a witness pair at or above `stop` is found.
double sampled_max_cross(const TileSamples& a, const TileSamples& b, double stop) {
  double stop2 = stop * stop;
  // Cheap witness pass over a coarse subset first: one pair at or above the
  // threshold already rejects, and far-apart tiles reject on the first probe.
  std::size_t sa = std::max<std::size_t>(1, a.pts.size() / 8);
  std::size_t sb = std::max<std::size_t>(1, b.pts.size() / 8);
  for (std::size_t i = 0; i < a.pts.size(); i += sa)
    for (std::size_t j = 0; j < b.pts.size(); j += sb)
      if (dist2(a.pts[i], b.pts[j]) >= stop2) return stop;
  double best2 = 0.0;
  for (const Vec3& p : a.pts)
    for (const Vec3& q : b.pts) {
      double d2 = dist2(p, q);
      if (d2 >= stop2) return stop;
      best2 = std::max(best2, d2);
    }
  return std::sqrt(best2);
}

std::vector<std::array<int, 2>> siamese_scan(const std::vector<TileSamples>& cache,
                                             const std::vector<char>& include, double h) {
  std::vector<std::array<int, 2>> out;
  int n = static_cast<int>(cache.size());
  for (int a = 0; a < n; ++a) {
    if (!include[a]) continue;
    for (int b = a + 1; b < n; ++b) {
      if (!include[b]) continue;
      // Mutual containment inside each other's annulus inner boundary means
      // every cross distance stays below 1. Far pairs reject on cap bounds:
      // a min-distance floor of 1 forces a witness at or above 1.
      if (cap_min_chord(cache[a].cap, cache[b].cap) >= 1.0) continue;
      double m = sampled_max_cross(cache[a], cache[b], 1.0);
      if (m + 2 * h < 1.0) out.push_back({a, b});
    }
  }
  return out;
}

/// Face loop of vertex indices ordered counterclockwise around the outward
/// normal, so every fixture tile gets positive oriented solid angle.
std::vector<int> ccw_order(const std::vector<Vec3>& verts, std::vector<int> face, const Vec3& n) {
  Vec3 nn = normalized(n);
  Vec3 seed = std::abs(nn.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  Vec3 e1 = normalized(cross(nn, seed));
  Vec3 e2 = cross(nn, e1);
  std::sort(face.begin(), face.end(), [&](int i, int j) {
    double ai = std::atan2(dot(verts[i], e2), dot(verts[i], e1));
    double aj = std::atan2(dot(verts[j], e2), dot(verts[j], e1));
    return ai < aj;
  });
  return face;
}

SphericalTiling faces_to_tiling(double r, const std::vector<Vec3>& dirs,
                                const std::vector<std::vector<int>>& loops,
                                const std::vector<int>& colors, const std::string& config) {
  SphericalTiling s;
  s.radius = r;
  s.vertices.reserve(dirs.size());
  for (const Vec3& d : dirs) s.vertices.push_back(normalized(d) * r);

  std::map<std::pair<int, int>, int> edge_id;
  auto edge_between = [&](int a, int b) {
    auto key = std::minmax(a, b);
    auto it = edge_id.find(key);
    if (it != edge_id.end()) return it->second;
    int id = static_cast<int>(s.edges.size());
    s.edges.push_back(SphericalTiling::Edge{a, b, SphericalTiling::EdgeKind::Geodesic, -1});
    edge_id.emplace(key, id);
    return id;
  };

  for (std::size_t f = 0; f < loops.size(); ++f) {
    SphericalTiling::Tile tile;
    tile.color = colors[f];
    const std::vector<int>& loop = loops[f];
    for (std::size_t i = 0; i < loop.size(); ++i)
      tile.boundary.push_back(edge_between(loop[i], loop[(i + 1) % loop.size()]));
    s.tiles.push_back(std::move(tile));
  }

  s.provenance.tool = kToolVersion;
  s.provenance.config_hash = config;
  s.provenance.seed = 0;
  validate_spherical_tiling(s);
  return s;
}

SphericalTiling build_cube(double r) {
  std::vector<Vec3> dirs;
  for (int sx : {1, -1})
    for (int sy : {1, -1})
      for (int sz : {1, -1}) dirs.push_back(Vec3{double(sx), double(sy), double(sz)});

  const Vec3 normals[6] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  std::vector<std::vector<int>> loops;
  std::vector<int> colors;
  for (int f = 0; f < 6; ++f) {
    std::vector<int> face;
    for (int v = 0; v < 8; ++v)
      if (dot(dirs[v], normals[f]) > 0.5) face.push_back(v);
    loops.push_back(ccw_order(dirs, face, normals[f]));
    colors.push_back(f);
  }
  return faces_to_tiling(r, dirs, loops, colors, "fixture:cube");
}

SphericalTiling build_octahedron(double r) {
  std::vector<Vec3> dirs = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  std::vector<std::vector<int>> loops;
  std::vector<int> colors;
  std::map<std::array<int, 3>, int> pair_color;
  for (int sx : {1, -1})
    for (int sy : {1, -1})
      for (int sz : {1, -1}) {
        std::vector<int> face = {sx > 0 ? 0 : 1, sy > 0 ? 2 : 3, sz > 0 ? 4 : 5};
        Vec3 n{double(sx), double(sy), double(sz)};
        loops.push_back(ccw_order(dirs, face, n));
        std::array<int, 3> key = std::min(std::array<int, 3>{sx, sy, sz},
                                          std::array<int, 3>{-sx, -sy, -sz});
        auto it = pair_color.find(key);
        if (it == pair_color.end())
          it = pair_color.emplace(key, static_cast<int>(pair_color.size())).first;
        colors.push_back(it->second);
      }
  return faces_to_tiling(r, dirs, loops, colors, "fixture:octahedron");
}

SphericalTiling build_dodecahedron(double r) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> dirs;
  for (int sx : {1, -1})
    for (int sy : {1, -1})
      for (int sz : {1, -1}) dirs.push_back(Vec3{double(sx), double(sy), double(sz)});
  for (int sy : {1, -1})
    for (int sz : {1, -1}) dirs.push_back(Vec3{0, sy / phi, sz * phi});
  for (int sx : {1, -1})
    for (int sy : {1, -1}) dirs.push_back(Vec3{sx / phi, sy * phi, 0});
  for (int sx : {1, -1})
    for (int sz : {1, -1}) dirs.push_back(Vec3{sx * phi, 0, sz / phi});

  // Face-center directions (the dual icosahedron's vertices in the matching
  // orientation); antipodal faces share a color.
  std::vector<Vec3> normals;
  for (int sx : {1, -1})
    for (int sz : {1, -1}) normals.push_back(Vec3{double(sx), 0, sz * phi});
  for (int sx : {1, -1})
    for (int sy : {1, -1}) normals.push_back(Vec3{sx * phi, double(sy), 0});
  for (int sy : {1, -1})
    for (int sz : {1, -1}) normals.push_back(Vec3{0, sy * phi, double(sz)});

  std::vector<std::vector<int>> loops;
  std::vector<int> colors;
  std::vector<Vec3> seen_axes;
  for (const Vec3& n : normals) {
    Vec3 nn = normalized(n);
    std::vector<int> face;
    for (int v = 0; v < static_cast<int>(dirs.size()); ++v)
      if (dot(normalized(dirs[v]), nn) > 0.5) face.push_back(v);
    loops.push_back(ccw_order(dirs, face, nn));
    int color = -1;
    for (std::size_t i = 0; i < seen_axes.size(); ++i)
      if (norm(seen_axes[i] + nn) < 1e-9 || norm(seen_axes[i] - nn) < 1e-9)
        color = static_cast<int>(i);
    if (color < 0) {
      color = static_cast<int>(seen_axes.size());
      seen_axes.push_back(nn);
    }
    colors.push_back(color);
  }
  return faces_to_tiling(r, dirs, loops, colors, "fixture:dodecahedron");
}

}  // namespace

std::vector<int> unscalable_tiles(const SphericalTiling& s) {
  std::vector<std::vector<int>> incident(s.vertices.size());
  std::vector<std::vector<int>> loops(s.tiles.size());
  for (int t = 0; t < static_cast<int>(s.tiles.size()); ++t) {
    loops[t] = tile_vertex_loop(s, t);
    for (int v : loops[t]) incident[v].push_back(t);
  }
  std::vector<int> out;
  for (int t = 0; t < static_cast<int>(s.tiles.size()); ++t) {
    std::set<int> abutters;
    for (int v : loops[t])
      for (int other : incident[v])
        if (other != t) abutters.insert(other);
    std::map<int, int> color_count;
    bool pinned = false;
    for (int other : abutters)
      if (++color_count[s.tiles[other].color] >= 2) pinned = true;
    if (pinned) out.push_back(t);
  }
  return out;
}

std::vector<std::array<int, 2>> siamese_pairs(const SphericalTiling& s, double h) {
  validate_spherical_tiling(s);
  auto cache = collect_samples(s, h);
  std::vector<char> include(s.tiles.size(), 1);
  return siamese_scan(cache, include, h);
}

std::string scalability_class(const SphericalTiling& s, double tol, const FeasibilityProbe& probe) {
  (void)tol;
  if (unscalable_tiles(s).empty()) return "scalable";
  if (probe && probe(s, s.radius * 1.02) && probe(s, s.radius * 0.98)) return "quasi-scalable";
  return "unscalable";
}

VerifyReport verify_tiling(const SphericalTiling& s, double tol, double h) {
  validate_spherical_tiling(s);

  VerifyReport rep;
  rep.patch_mode = s.patch;
  rep.tol = tol;
  rep.h = h;

  // Patch inputs: tiles touching the free boundary see boundary effects
  // (missing neighbors, clipped shapes) and are excluded from the verdict.
  std::vector<char> include(s.tiles.size(), 1);
  if (s.patch) {
    std::set<int> rim_vertices;
    for (int e : free_boundary_edges(s)) {
      rim_vertices.insert(s.edges[e].a);
      rim_vertices.insert(s.edges[e].b);
    }
    for (int t = 0; t < static_cast<int>(s.tiles.size()); ++t)
      for (int v : tile_vertex_loop(s, t))
        if (rim_vertices.count(v)) {
          include[t] = 0;
          break;
        }
    for (int t = 0; t < static_cast<int>(s.tiles.size()); ++t)
      if (!include[t]) rep.excluded_tiles.push_back(t);
  } else {
    // Coverage by solid-angle accounting: the oriented per-tile angles of a
    // closed tiling must sum to the full sphere.
    std::vector<double> omega = tile_solid_angles(s, h);
    double sum = 0.0;
    for (int t = 0; t < static_cast<int>(omega.size()); ++t) {
      if (omega[t] <= 0.0)
        throw OverlapError("tile " + std::to_string(t) + " has non-positive oriented area");
      sum += omega[t];
    }
    rep.solid_angle_defect = sum - 4 * kPi;
    if (rep.solid_angle_defect < -1e-6 * 4 * kPi)
      throw CoverageGap("tiles cover less than the full sphere by " +
                        std::to_string(-rep.solid_angle_defect) + " sr");
    if (rep.solid_angle_defect > 1e-6 * 4 * kPi)
      throw OverlapError("tiles overcover the sphere by " +
                         std::to_string(rep.solid_angle_defect) + " sr");
  }

  auto cache = collect_samples(s, h);

  // Diameters: verdict on the raw sampled maximum (it only grows under
  // refinement); the bracket adds sampling slack above.
  double worst_d = 0.0;
  for (int t = 0; t < static_cast<int>(s.tiles.size()); ++t) {
    if (!include[t]) continue;
    double d = sampled_diameter(cache[t]);
    if (d > worst_d) {
      worst_d = d;
      rep.worst_diameter_tile = t;
    }
  }
  rep.worst_diameter = Bracket{worst_d, worst_d + 2 * h};

  // Separations: same-color pairs, processed in ascending order of the cap
  // chord bound. A pair whose bound exceeds the best sampled minimum found
  // so far cannot improve it (its samples live inside its caps), so the scan
  // stops early with the exact global sampled minimum.
  struct Cand {
    double lb;
    int a, b;
  };
  std::vector<Cand> cands;
  for (int a = 0; a < static_cast<int>(s.tiles.size()); ++a) {
    if (!include[a]) continue;
    for (int b = a + 1; b < static_cast<int>(s.tiles.size()); ++b) {
      if (!include[b] || s.tiles[a].color != s.tiles[b].color) continue;
      cands.push_back(Cand{cap_min_chord(cache[a].cap, cache[b].cap), a, b});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
    return x.lb != y.lb ? x.lb < y.lb : std::tie(x.a, x.b) < std::tie(y.a, y.b);
  });
  double worst_s = 2 * s.radius;
  for (const Cand& c : cands) {
    if (c.lb >= worst_s) break;
    double m = sampled_min_dist(cache[c.a], cache[c.b]);
    if (m < worst_s) {
      worst_s = m;
      rep.worst_separation_pair = {c.a, c.b};
    }
  }
  rep.worst_separation = Bracket{std::max(0.0, worst_s - 2 * h), worst_s};

  rep.siamese = siamese_scan(cache, include, h);
  rep.unscalable_tiles = unscalable_tiles(s);
  rep.classification = rep.unscalable_tiles.empty() ? "scalable" : "unscalable";
  rep.valid = worst_d <= 1.0 + tol && worst_s >= 1.0 - tol;
  return rep;
}

std::string report_to_json(const VerifyReport& r) {
  nlohmann::ordered_json j;
  j["valid"] = r.valid;
  j["patch_mode"] = r.patch_mode;
  j["tol"] = r.tol;
  j["h"] = r.h;
  j["worst_diameter"]["tile"] = r.worst_diameter_tile;
  j["worst_diameter"]["lower"] = r.worst_diameter.lower;
  j["worst_diameter"]["upper"] = r.worst_diameter.upper;
  j["worst_separation"]["pair"] = r.worst_separation_pair;
  j["worst_separation"]["lower"] = r.worst_separation.lower;
  j["worst_separation"]["upper"] = r.worst_separation.upper;
  j["siamese"] = nlohmann::ordered_json::array();
  for (const auto& p : r.siamese) j["siamese"].push_back(p);
  j["unscalable_tiles"] = r.unscalable_tiles;
  j["classification"] = r.classification;
  j["solid_angle_defect"] = r.solid_angle_defect;
  j["excluded_tiles"] = r.excluded_tiles;
  return j.dump(1) + "\n";
}

SphericalTiling build_platonic_fixture(PlatonicSolid solid, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("fixture radius must be positive");
  switch (solid) {
    case PlatonicSolid::Cube:
      return build_cube(r);
    case PlatonicSolid::Octahedron:
      return build_octahedron(r);
    case PlatonicSolid::Dodecahedron:
      return build_dodecahedron(r);
  }
  throw std::invalid_argument("unknown platonic solid");
}

SphericalTiling build_platonic_fixture(const std::string& name, double r) {
  if (name == "cube") return build_platonic_fixture(PlatonicSolid::Cube, r);
  if (name == "octahedron") return build_platonic_fixture(PlatonicSolid::Octahedron, r);
  if (name == "dodecahedron") return build_platonic_fixture(PlatonicSolid::Dodecahedron, r);
  throw std::invalid_argument("unknown fixture name: " + name);
}

}  // namespace spheretile
