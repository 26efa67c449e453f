#include "spheretile/goldberg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

namespace spheretile {

namespace {

constexpr double kPhi = 1.6180339887498948482;

Vec2 embed(const AxialCoord& p) {
  return {p.q + p.r / 2.0, p.r * std::sqrt(3.0) / 2.0};
}

long long icross(const AxialCoord& a, const AxialCoord& b) {
  return static_cast<long long>(a.q) * b.r - static_cast<long long>(a.r) * b.q;
}

// 2x the Euclidean dot product of embedded lattice vectors (always integral).
long long idot2(const AxialCoord& a, const AxialCoord& b) {
  return 2LL * a.q * b.q + 2LL * a.r * b.r + static_cast<long long>(a.q) * b.r +
         static_cast<long long>(a.r) * b.q;
}

}  // namespace

int IcoNet::edge_between(int f, int g) const {
  for (int e = 0; e < 30; ++e)
    if ((edges[static_cast<std::size_t>(e)].f0 == f && edges[static_cast<std::size_t>(e)].f1 == g) ||
        (edges[static_cast<std::size_t>(e)].f0 == g && edges[static_cast<std::size_t>(e)].f1 == f))
      return e;
  return -1;
}

int IcoNet::edge_of_vertices(int a, int b) const {
  for (int e = 0; e < 30; ++e)
    if ((edges[static_cast<std::size_t>(e)].v0 == a && edges[static_cast<std::size_t>(e)].v1 == b) ||
        (edges[static_cast<std::size_t>(e)].v0 == b && edges[static_cast<std::size_t>(e)].v1 == a))
      return e;
  return -1;
}

IcoNet build_ico_net() {
  IcoNet net;
  // Vertices from the cyclic (0, +-1, +-phi) pattern, normalized to unit
  // circumradius. Order is fixed: ids are load-bearing for the coloring
  // tables and must never change.
  const double pairs[4][2] = {{1, kPhi}, {-1, kPhi}, {1, -kPhi}, {-1, -kPhi}};
  int vi = 0;
  for (const auto& ab : pairs) {
    double a = ab[0], b = ab[1];
    net.vertex_pos[static_cast<std::size_t>(vi++)] = Vec3{0, a, b};
    net.vertex_pos[static_cast<std::size_t>(vi++)] = Vec3{a, b, 0};
    net.vertex_pos[static_cast<std::size_t>(vi++)] = Vec3{b, 0, a};
  }
  double inv = 1.0 / norm(net.vertex_pos[0]);
  for (auto& v : net.vertex_pos) v *= inv;

  // Adjacency: vertex pairs at the minimal positive distance.
  double edge2 = 1e18;
  for (int i = 0; i < 12; ++i)
    for (int j = i + 1; j < 12; ++j)
      edge2 = std::min(edge2, dist2(net.vertex_pos[static_cast<std::size_t>(i)],
                                    net.vertex_pos[static_cast<std::size_t>(j)]));
  auto adjacent = [&](int i, int j) {
    return std::abs(dist2(net.vertex_pos[static_cast<std::size_t>(i)],
                          net.vertex_pos[static_cast<std::size_t>(j)]) -
                    edge2) < 1e-9;
  };

  // Faces: mutually adjacent triples in ascending id order, flipped to
  // counterclockwise-from-outside orientation.
  int fi = 0;
  for (int i = 0; i < 12; ++i)
    for (int j = i + 1; j < 12; ++j)
      for (int k = j + 1; k < 12; ++k) {
        if (!(adjacent(i, j) && adjacent(j, k) && adjacent(i, k))) continue;
        const Vec3 &a = net.vertex_pos[static_cast<std::size_t>(i)],
                   &b = net.vertex_pos[static_cast<std::size_t>(j)],
                   &c = net.vertex_pos[static_cast<std::size_t>(k)];
        bool ccw = dot(cross(b - a, c - a), a + b + c) > 0;
        net.face_vertices[static_cast<std::size_t>(fi++)] =
            ccw ? std::array<int, 3>{i, j, k} : std::array<int, 3>{i, k, j};
      }
  if (fi != 20) throw std::logic_error("icosahedron: expected 20 faces");

  // Edges: sorted vertex pairs, each with its two faces (lower id first).
  std::map<std::pair<int, int>, std::vector<int>> edge_faces;
  for (int f = 0; f < 20; ++f) {
    const auto& fv = net.face_vertices[static_cast<std::size_t>(f)];
    for (int s = 0; s < 3; ++s) {
      int a = fv[static_cast<std::size_t>(s)], b = fv[static_cast<std::size_t>((s + 1) % 3)];
      edge_faces[{std::min(a, b), std::max(a, b)}].push_back(f);
    }
  }
  if (edge_faces.size() != 30) throw std::logic_error("icosahedron: expected 30 edges");
  int ei = 0;
  for (auto& [vp, fs] : edge_faces) {
    if (fs.size() != 2) throw std::logic_error("icoedge must bound exactly 2 faces");
    std::sort(fs.begin(), fs.end());
    net.edges[static_cast<std::size_t>(ei++)] = IcoNet::IcoEdge{vp.first, vp.second, fs[0], fs[1]};
  }

  for (int f = 0; f < 20; ++f) {
    const auto& fv = net.face_vertices[static_cast<std::size_t>(f)];
    for (int s = 0; s < 3; ++s)
      net.face_edges[static_cast<std::size_t>(f)][static_cast<std::size_t>(s)] =
          net.edge_of_vertices(fv[static_cast<std::size_t>(s)], fv[static_cast<std::size_t>((s + 1) % 3)]);
  }

  // Per-vertex incidence, counterclockwise about the outward axis.
  for (int v = 0; v < 12; ++v) {
    Vec3 axis = net.vertex_pos[static_cast<std::size_t>(v)];
    Vec3 e1{};
    std::vector<std::pair<double, int>> fs, es;
    for (int f = 0; f < 20; ++f) {
      const auto& fv = net.face_vertices[static_cast<std::size_t>(f)];
      if (std::find(fv.begin(), fv.end(), v) == fv.end()) continue;
      Vec3 ctr = (net.vertex_pos[static_cast<std::size_t>(fv[0])] +
                  net.vertex_pos[static_cast<std::size_t>(fv[1])] +
                  net.vertex_pos[static_cast<std::size_t>(fv[2])]) /
                 3.0;
      Vec3 d = ctr - axis * dot(ctr, axis);
      if (fs.empty()) e1 = normalized(d);
      fs.emplace_back(std::atan2(dot(axis, cross(e1, d)), dot(e1, d)), f);
    }
    for (int e = 0; e < 30; ++e) {
      const auto& ed = net.edges[static_cast<std::size_t>(e)];
      if (ed.v0 != v && ed.v1 != v) continue;
      Vec3 other = net.vertex_pos[static_cast<std::size_t>(ed.v0 == v ? ed.v1 : ed.v0)];
      Vec3 d = other - axis * dot(other, axis);
      es.emplace_back(std::atan2(dot(axis, cross(e1, d)), dot(e1, d)), e);
    }
    std::sort(fs.begin(), fs.end());
    std::sort(es.begin(), es.end());
    if (fs.size() != 5 || es.size() != 5) throw std::logic_error("icovertex valence must be 5");
    for (int s = 0; s < 5; ++s) {
      net.vertex_faces[static_cast<std::size_t>(v)][static_cast<std::size_t>(s)] =
          fs[static_cast<std::size_t>(s)].second;
      net.vertex_edges[static_cast<std::size_t>(v)][static_cast<std::size_t>(s)] =
          es[static_cast<std::size_t>(s)].second;
    }
  }

  for (int v = 0; v < 12; ++v) {
    net.antipode[static_cast<std::size_t>(v)] = -1;
    for (int u = 0; u < 12; ++u)
      if (norm(net.vertex_pos[static_cast<std::size_t>(v)] +
               net.vertex_pos[static_cast<std::size_t>(u)]) < 1e-9)
        net.antipode[static_cast<std::size_t>(v)] = u;
    if (net.antipode[static_cast<std::size_t>(v)] < 0)
      throw std::logic_error("icosahedron: missing antipodal vertex");
  }
  return net;
}

GoldbergSpec family_spec(int m) {
  if (m < 1) throw std::invalid_argument("family_spec: m must be >= 1");
  GoldbergSpec s;
  s.gm = 4 * m;
  s.gn = 2 * m + 1;
  s.family_m = m;
  return s;
}

int CombinatorialTiling::he_next(int h) const {
  int t = he_tile(h);
  int slot = he_slot(h);
  int n = static_cast<int>(tiles[static_cast<std::size_t>(t)].ring.size());
  return he_offset[static_cast<std::size_t>(t)] + (slot + 1) % n;
}

const SeamTransition& CombinatorialTiling::transition(int f, int g) const {
  const SeamTransition& tr = trans[static_cast<std::size_t>(f)][static_cast<std::size_t>(g)];
  if (tr.k < 0) throw std::invalid_argument("transition: faces are not adjacent");
  return tr;
}

AxialCoord CombinatorialTiling::apply_transition(int f, int g, const AxialCoord& p) const {
  const SeamTransition& tr = transition(f, g);
  return rot60_pow(p, tr.k) + tr.t;
}

namespace {

struct BaryNums {
  long long A, B;  // weights of corners 1 and 2, over denominator T
};

BaryNums bary_nums(const AxialCoord& p, const AxialCoord& w) {
  AxialCoord w2 = rot60(w);
  return {icross(p, w2), icross(w, p)};
}

bool contains_closed(const AxialCoord& p, const AxialCoord& w, long long T) {
  auto [A, B] = bary_nums(p, w);
  return A >= 0 && B >= 0 && A + B <= T;
}

bool contains_open(const AxialCoord& p, const AxialCoord& w, long long T) {
  auto [A, B] = bary_nums(p, w);
  return A > 0 && B > 0 && A + B < T;
}

}  // namespace

CellRef CombinatorialTiling::canon(int face, AxialCoord p) const {
  auto corner_vertex = [&](int f, const AxialCoord& a) -> int {
    const auto& fv = net.face_vertices[static_cast<std::size_t>(f)];
    if (a == AxialCoord{0, 0}) return fv[0];
    if (a == w) return fv[1];
    if (a == rot60(w)) return fv[2];
    return -1;
  };

  // Fast path: strictly interior points have a unique representative.
  if (contains_open(p, w, T)) {
    CellRef c;
    c.kind = CellRef::Kind::Hexagon;
    c.face = face;
    c.coord = p;
    return c;
  }

  // Walk the seam transitions collecting every chart representative whose
  // closed triangle contains the point; boundary cells have several.
  std::set<std::tuple<int, int, int>> seen;
  std::vector<std::tuple<int, AxialCoord, int>> stack{{face, p, 0}};
  int best_face = -1;
  AxialCoord best_coord{};
  int pentagon_vertex = -1;
  while (!stack.empty()) {
    auto [f2, p2, depth] = stack.back();
    stack.pop_back();
    if (!seen.insert({f2, p2.q, p2.r}).second) continue;
    bool inside = contains_closed(p2, w, T);
    if (inside) {
      int vid = corner_vertex(f2, p2);
      if (vid >= 0) pentagon_vertex = std::min(pentagon_vertex < 0 ? 12 : pentagon_vertex, vid);
      if (best_face < 0 || std::tuple(f2, p2.q, p2.r) < std::tuple(best_face, best_coord.q, best_coord.r)) {
        best_face = f2;
        best_coord = p2;
      }
    }
    if (inside || depth < 3) {
      for (int g = 0; g < 20; ++g) {
        const SeamTransition& tr = trans[static_cast<std::size_t>(f2)][static_cast<std::size_t>(g)];
        if (tr.k < 0) continue;
        stack.emplace_back(g, rot60_pow(p2, tr.k) + tr.t, depth + 1);
      }
    }
  }

  CellRef c;
  if (pentagon_vertex >= 0) {
    c.kind = CellRef::Kind::Pentagon;
    c.icovertex = pentagon_vertex;
    // Canonical chart address: minimal (face, coord) among hosts.
    for (const auto& [f2, a] : pentagon_addrs(pentagon_vertex))
      if (c.face < 0 || std::tuple(f2, a.q, a.r) < std::tuple(c.face, c.coord.q, c.coord.r)) {
        c.face = f2;
        c.coord = a;
      }
  } else if (best_face >= 0) {
    c.kind = CellRef::Kind::Hexagon;
    c.face = best_face;
    c.coord = best_coord;
  }
  return c;
}

std::vector<std::pair<int, AxialCoord>> CombinatorialTiling::pentagon_addrs(int icovertex) const {
  std::vector<std::pair<int, AxialCoord>> out;
  const std::array<AxialCoord, 3> addrs{AxialCoord{0, 0}, w, rot60(w)};
  for (int f = 0; f < 20; ++f) {
    const auto& fv = net.face_vertices[static_cast<std::size_t>(f)];
    for (int s = 0; s < 3; ++s)
      if (fv[static_cast<std::size_t>(s)] == icovertex)
        out.emplace_back(f, addrs[static_cast<std::size_t>(s)]);
  }
  return out;
}

int CombinatorialTiling::tile_of(const CellRef& c) const {
  if (c.kind == CellRef::Kind::None) return -1;
  if (c.kind == CellRef::Kind::Pentagon) return c.icovertex;
  // Hexagons are stored sorted by (face, q, r) after the 12 pentagons.
  int lo = 12, hi = static_cast<int>(tiles.size());
  while (lo < hi) {
    int mid = (lo + hi) / 2;
    const Tile& t = tiles[static_cast<std::size_t>(mid)];
    if (std::tuple(t.home_face, t.coord.q, t.coord.r) < std::tuple(c.face, c.coord.q, c.coord.r))
      lo = mid + 1;
    else
      hi = mid;
  }
  if (lo < static_cast<int>(tiles.size())) {
    const Tile& t = tiles[static_cast<std::size_t>(lo)];
    if (t.home_face == c.face && t.coord == c.coord) return lo;
  }
  return -1;
}

int CombinatorialTiling::tile_at(int face, AxialCoord p) const { return tile_of(canon(face, p)); }

Vec3 CombinatorialTiling::chart_point(int face, const Vec2& planar) const {
  return chart_origin[static_cast<std::size_t>(face)] +
         chart_u[static_cast<std::size_t>(face)] * planar.x +
         chart_v[static_cast<std::size_t>(face)] * planar.y;
}

Vec3 CombinatorialTiling::cell_center(int face, const AxialCoord& p) const {
  return chart_point(face, embed(p));
}

const std::vector<IcoedgeTileEntry>& CombinatorialTiling::icoedge_band(int edge_id) const {
  if (edge_id < 0 || edge_id >= 30)
    throw std::invalid_argument("icoedge_band: unknown icoedge id");
  return edge_bands[static_cast<std::size_t>(edge_id)];
}

std::pair<int, AxialCoord> CombinatorialTiling::map_cell(const IcoRotation& rot, int f,
                                                         const AxialCoord& p) const {
  int g = rot.face_map[static_cast<std::size_t>(f)];
  int s = rot.corner_shift[static_cast<std::size_t>(f)];
  AxialCoord q = p;
  if (s == 1)
    q = rot60_pow(p, 2) + w;
  else if (s == 2)
    q = rot60_pow(p, 4) + rot60(w);
  return {g, q};
}

std::vector<int> CombinatorialTiling::tile_permutation(const IcoRotation& rot) const {
  std::vector<int> perm(tiles.size(), -1);
  std::vector<char> hit(tiles.size(), 0);
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    const Tile& t = tiles[i];
    int image;
    if (t.kind == TileKind::Pentagon) {
      image = rot.vertex_map[static_cast<std::size_t>(t.icovertex)];
    } else {
      auto [g, q] = map_cell(rot, t.home_face, t.coord);
      image = tile_at(g, q);
    }
    if (image < 0) throw std::logic_error("tile_permutation: rotation image not a tile");
    if (tiles[static_cast<std::size_t>(image)].kind != t.kind)
      throw std::logic_error("tile_permutation: rotation changed tile kind");
    perm[i] = image;
    if (hit[static_cast<std::size_t>(image)]++)
      throw std::logic_error("tile_permutation: rotation not a bijection");
  }
  return perm;
}

CombinatorialTiling build_goldberg(const GoldbergSpec& spec) {
  if (spec.gm < 1 || spec.gn < 0)
    throw std::invalid_argument("build_goldberg: require gm >= 1 and gn >= 0");

  CombinatorialTiling t;
  t.spec = spec;
  t.net = build_ico_net();
  t.w = AxialCoord{spec.gn, spec.gm};
  t.T = spec.gm * spec.gm + spec.gm * spec.gn + spec.gn * spec.gn;
  const AxialCoord w2 = rot60(t.w);

  // Directed seam transitions: match the two shared corner addresses.
  const std::array<AxialCoord, 3> addrs{AxialCoord{0, 0}, t.w, w2};
  auto corner_addr = [&](int f, int v) -> AxialCoord {
    const auto& fv = t.net.face_vertices[static_cast<std::size_t>(f)];
    for (int s = 0; s < 3; ++s)
      if (fv[static_cast<std::size_t>(s)] == v) return addrs[static_cast<std::size_t>(s)];
    throw std::logic_error("corner_addr: vertex not on face");
  };
  for (auto& row : t.trans)
    for (auto& tr : row) tr = SeamTransition{};
  for (int e = 0; e < 30; ++e) {
    const auto& ed = t.net.edges[static_cast<std::size_t>(e)];
    for (auto [f, g] : {std::pair{ed.f0, ed.f1}, std::pair{ed.f1, ed.f0}}) {
      AxialCoord ax = corner_addr(f, ed.v0), ay = corner_addr(f, ed.v1);
      AxialCoord bx = corner_addr(g, ed.v0), by = corner_addr(g, ed.v1);
      bool found = false;
      for (int k = 0; k < 6 && !found; ++k) {
        AxialCoord t1 = bx - rot60_pow(ax, k);
        AxialCoord t2 = by - rot60_pow(ay, k);
        if (t1 == t2) {
          t.trans[static_cast<std::size_t>(f)][static_cast<std::size_t>(g)] = SeamTransition{k, t1};
          found = true;
        }
      }
      if (!found) throw std::logic_error("build_goldberg: no seam transition");
    }
  }

  // Per-face affine charts: lattice corners (0,0), w, rot60(w) map onto the
  // face's 3D corners.
  for (int f = 0; f < 20; ++f) {
    const auto& fv = t.net.face_vertices[static_cast<std::size_t>(f)];
    Vec3 va = t.net.vertex_pos[static_cast<std::size_t>(fv[0])];
    Vec3 vb = t.net.vertex_pos[static_cast<std::size_t>(fv[1])];
    Vec3 vc = t.net.vertex_pos[static_cast<std::size_t>(fv[2])];
    Vec2 e1 = embed(t.w), e2 = embed(w2);
    double det = e1.x * e2.y - e1.y * e2.x;
    Vec3 db = vb - va, dc = vc - va;
    t.chart_origin[static_cast<std::size_t>(f)] = va;
    t.chart_u[static_cast<std::size_t>(f)] = (db * e2.y - dc * e1.y) / det;
    t.chart_v[static_cast<std::size_t>(f)] = (dc * e1.x - db * e2.x) / det;
  }

  // Enumerate cells: scan each face's closed triangle and canonicalize.
  int qlo = std::min({0, t.w.q, w2.q}) - 1, qhi = std::max({0, t.w.q, w2.q}) + 1;
  int rlo = std::min({0, t.w.r, w2.r}) - 1, rhi = std::max({0, t.w.r, w2.r}) + 1;
  std::set<std::tuple<int, int, int>> hex_keys;  // (face, q, r) canonical
  for (int f = 0; f < 20; ++f)
    for (int q = qlo; q <= qhi; ++q)
      for (int r = rlo; r <= rhi; ++r) {
        AxialCoord p{q, r};
        if (!contains_closed(p, t.w, t.T)) continue;
        CellRef c = t.canon(f, p);
        if (c.kind == CellRef::Kind::Hexagon) hex_keys.insert({c.face, c.coord.q, c.coord.r});
      }

  // Tiles: pentagons 0..11 by icovertex, then hexagons by (face, q, r).
  t.tiles.resize(12 + hex_keys.size());
  for (int v = 0; v < 12; ++v) {
    CombinatorialTiling::Tile& tile = t.tiles[static_cast<std::size_t>(v)];
    tile.kind = CombinatorialTiling::TileKind::Pentagon;
    tile.icovertex = v;
    auto hosts = t.pentagon_addrs(v);
    tile.home_face = hosts[0].first;
    tile.coord = hosts[0].second;
    for (const auto& [f, a] : hosts)
      if (std::tuple(f, a.q, a.r) < std::tuple(tile.home_face, tile.coord.q, tile.coord.r)) {
        tile.home_face = f;
        tile.coord = a;
      }
    tile.center = t.net.vertex_pos[static_cast<std::size_t>(v)];
  }
  {
    int id = 12;
    for (const auto& [f, q, r] : hex_keys) {
      CombinatorialTiling::Tile& tile = t.tiles[static_cast<std::size_t>(id++)];
      tile.kind = CombinatorialTiling::TileKind::Hexagon;
      tile.home_face = f;
      tile.coord = AxialCoord{q, r};
      tile.center = t.cell_center(f, tile.coord);
    }
  }

  // Adjacency rings. Hexagons: the 6 lattice neighbors of the home chart in
  // counterclockwise order (exact). Pentagons: union over host charts,
  // ordered by angle about the outward axis.
  const std::array<AxialCoord, 6> ccw{AxialCoord{1, 0},  AxialCoord{0, 1},  AxialCoord{-1, 1},
                                      AxialCoord{-1, 0}, AxialCoord{0, -1}, AxialCoord{1, -1}};
  for (std::size_t i = 0; i < t.tiles.size(); ++i) {
    CombinatorialTiling::Tile& tile = t.tiles[i];
    if (tile.kind == CombinatorialTiling::TileKind::Hexagon) {
      tile.ring.reserve(6);
      for (const auto& d : ccw) {
        int n = t.tile_at(tile.home_face, tile.coord + d);
        if (n < 0) throw std::logic_error("build_goldberg: hexagon neighbor missing");
        tile.ring.push_back(n);
      }
    } else {
      std::set<int> nbrs;
      for (const auto& [f, a] : t.pentagon_addrs(tile.icovertex))
        for (const auto& d : ccw) {
          int n = t.tile_at(f, a + d);
          if (n >= 0 && n != static_cast<int>(i)) nbrs.insert(n);
        }
      if (nbrs.size() != 5) throw std::logic_error("build_goldberg: pentagon valence != 5");
      Vec3 axis = tile.center;
      Vec3 e1{};
      std::vector<std::pair<double, int>> ordered;
      for (int n : nbrs) {
        Vec3 d = t.tiles[static_cast<std::size_t>(n)].center - axis;
        d = d - axis * (dot(d, axis) / dot(axis, axis));
        if (ordered.empty()) e1 = normalized(d);
        ordered.emplace_back(std::atan2(dot(normalized(axis), cross(e1, d)), dot(e1, d)), n);
      }
      std::sort(ordered.begin(), ordered.end());
      for (const auto& [ang, n] : ordered) tile.ring.push_back(n);
    }
    std::set<int> uniq(tile.ring.begin(), tile.ring.end());
    if (uniq.size() != tile.ring.size())
      throw std::logic_error("build_goldberg: repeated neighbor in ring");
  }

  // Corners: one id per sorted tile triple around a lattice corner.
  std::map<std::array<int, 3>, int> corner_ids;
  for (std::size_t i = 0; i < t.tiles.size(); ++i) {
    CombinatorialTiling::Tile& tile = t.tiles[i];
    std::size_t n = tile.ring.size();
    tile.corners.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      std::array<int, 3> key{static_cast<int>(i), tile.ring[j], tile.ring[(j + 1) % n]};
      std::sort(key.begin(), key.end());
      auto [it, fresh] = corner_ids.try_emplace(key, static_cast<int>(corner_ids.size()));
      tile.corners[j] = it->second;
    }
  }
  t.corner_tiles.resize(corner_ids.size());
  t.corner_pos.assign(corner_ids.size(), Vec3{});
  for (const auto& [key, id] : corner_ids) {
    t.corner_tiles[static_cast<std::size_t>(id)] = key;
    t.corner_pos[static_cast<std::size_t>(id)] =
        (t.tiles[static_cast<std::size_t>(key[0])].center +
         t.tiles[static_cast<std::size_t>(key[1])].center +
         t.tiles[static_cast<std::size_t>(key[2])].center) /
        3.0;
  }

  // Half-edges.
  t.he_offset.resize(t.tiles.size());
  int off = 0;
  for (std::size_t i = 0; i < t.tiles.size(); ++i) {
    t.he_offset[i] = off;
    off += static_cast<int>(t.tiles[i].ring.size());
  }
  t.he_tile_of.resize(static_cast<std::size_t>(off));
  t.he_twin.assign(static_cast<std::size_t>(off), -1);
  for (std::size_t i = 0; i < t.tiles.size(); ++i)
    for (std::size_t j = 0; j < t.tiles[i].ring.size(); ++j)
      t.he_tile_of[static_cast<std::size_t>(t.he_offset[i]) + j] = static_cast<int>(i);
  for (std::size_t i = 0; i < t.tiles.size(); ++i) {
    for (std::size_t j = 0; j < t.tiles[i].ring.size(); ++j) {
      int n = t.tiles[i].ring[j];
      const auto& nring = t.tiles[static_cast<std::size_t>(n)].ring;
      auto it = std::find(nring.begin(), nring.end(), static_cast<int>(i));
      if (it == nring.end()) throw std::logic_error("build_goldberg: adjacency not symmetric");
      t.he_twin[static_cast<std::size_t>(t.he_offset[i]) + j] =
          t.he_offset[static_cast<std::size_t>(n)] + static_cast<int>(it - nring.begin());
    }
  }

  // Icoedge bands, exact integer geometry in the lower face's chart.
  t.edge_bands.resize(30);
  for (int e = 0; e < 30; ++e) {
    const auto& ed = t.net.edges[static_cast<std::size_t>(e)];
    AxialCoord a = corner_addr(ed.f0, ed.v0);
    AxialCoord b = corner_addr(ed.f0, ed.v1);
    AxialCoord d = b - a;
    long long den = idot2(d, d);  // = 2T
    std::vector<std::tuple<long long, long long, int>> found;  // (lam_num, cross, tile)
    std::set<int> dedupe;
    int bqlo = std::min(a.q, b.q) - 2, bqhi = std::max(a.q, b.q) + 2;
    int brlo = std::min(a.r, b.r) - 2, brhi = std::max(a.r, b.r) + 2;
    for (int q = bqlo; q <= bqhi; ++q)
      for (int r = brlo; r <= brhi; ++r) {
        AxialCoord p{q, r};
        AxialCoord rel = p - a;
        long long lam_num = idot2(rel, d);
        if (lam_num < 0 || lam_num > den) continue;
        long long cr = icross(d, rel);
        if (3 * cr * cr >= 2 * den) continue;  // |perp| >= 1
        int tile = t.tile_at(ed.f0, p);
        if (tile < 0 || !dedupe.insert(tile).second) continue;
        found.emplace_back(lam_num, cr, tile);
      }
    std::sort(found.begin(), found.end());
    auto& band = t.edge_bands[static_cast<std::size_t>(e)];
    for (const auto& [lam_num, cr, tile] : found) {
      IcoedgeTileEntry entry;
      entry.tile = tile;
      entry.lam = static_cast<double>(lam_num) / static_cast<double>(den);
      entry.side = cr > 0 ? 1 : (cr < 0 ? -1 : 0);
      band.push_back(entry);
      if (t.tiles[static_cast<std::size_t>(tile)].kind == CombinatorialTiling::TileKind::Hexagon)
        t.tiles[static_cast<std::size_t>(tile)].icoedge_straddling = true;
    }
  }

  // Icovertex buffer: cells within 2 lattice steps of a pentagon.
  for (int v = 0; v < 12; ++v)
    for (const auto& [f, a] : t.pentagon_addrs(v))
      for (int dq = -2; dq <= 2; ++dq)
        for (int dr = -2; dr <= 2; ++dr) {
          AxialCoord p{a.q + dq, a.r + dr};
          if (hex_distance(p, a) > 2) continue;
          int tile = t.tile_at(f, p);
          if (tile >= 0) t.tiles[static_cast<std::size_t>(tile)].icovertex_adjacent = true;
        }

  return t;
}

std::vector<IcoedgeTileEntry> icoedge_tiles(const CombinatorialTiling& t, int edge_id) {
  return t.icoedge_band(edge_id);
}

std::vector<IcoRotation> ico_rotations(const IcoNet& net) {
  auto frame = [&](const Vec3& a, const Vec3& b) {
    Vec3 e1 = normalized(a);
    Vec3 e2 = normalized(b - e1 * dot(e1, b));
    return mat3_from_columns(e1, e2, cross(e1, e2));
  };
  const auto& f0 = net.face_vertices[0];
  Mat3 src = frame(net.vertex_pos[static_cast<std::size_t>(f0[0])],
                   net.vertex_pos[static_cast<std::size_t>(f0[1])]);
  Mat3 src_t = src.transposed();

  std::vector<IcoRotation> out;
  out.reserve(60);
  for (int g = 0; g < 20; ++g) {
    for (int s = 0; s < 3; ++s) {
      const auto& fg = net.face_vertices[static_cast<std::size_t>(g)];
      Vec3 ta = net.vertex_pos[static_cast<std::size_t>(fg[static_cast<std::size_t>(s)])];
      Vec3 tb = net.vertex_pos[static_cast<std::size_t>(fg[static_cast<std::size_t>((s + 1) % 3)])];
      IcoRotation rot;
      rot.R = frame(ta, tb) * src_t;
      for (int v = 0; v < 12; ++v) {
        Vec3 img = rot.R * net.vertex_pos[static_cast<std::size_t>(v)];
        int best = -1;
        for (int u = 0; u < 12; ++u)
          if (dist(img, net.vertex_pos[static_cast<std::size_t>(u)]) < 1e-6) best = u;
        if (best < 0) throw std::logic_error("ico_rotations: image is not a vertex");
        rot.vertex_map[static_cast<std::size_t>(v)] = best;
      }
      for (int f = 0; f < 20; ++f) {
        const auto& fv = net.face_vertices[static_cast<std::size_t>(f)];
        std::array<int, 3> img{rot.vertex_map[static_cast<std::size_t>(fv[0])],
                               rot.vertex_map[static_cast<std::size_t>(fv[1])],
                               rot.vertex_map[static_cast<std::size_t>(fv[2])]};
        int found_face = -1, found_shift = -1;
        for (int h = 0; h < 20 && found_face < 0; ++h) {
          const auto& hv = net.face_vertices[static_cast<std::size_t>(h)];
          for (int sh = 0; sh < 3; ++sh) {
            if (hv[static_cast<std::size_t>(sh)] == img[0] &&
                hv[static_cast<std::size_t>((sh + 1) % 3)] == img[1] &&
                hv[static_cast<std::size_t>((sh + 2) % 3)] == img[2]) {
              found_face = h;
              found_shift = sh;
              break;
            }
          }
        }
        if (found_face < 0) throw std::logic_error("ico_rotations: image is not a face");
        rot.face_map[static_cast<std::size_t>(f)] = found_face;
        rot.corner_shift[static_cast<std::size_t>(f)] = found_shift;
      }
      out.push_back(rot);
    }
  }
  // Deterministic order with the identity first.
  std::stable_sort(out.begin(), out.end(), [](const IcoRotation& a, const IcoRotation& b) {
    bool ia = true, ib = true;
    for (int v = 0; v < 12; ++v) {
      ia = ia && a.vertex_map[static_cast<std::size_t>(v)] == v;
      ib = ib && b.vertex_map[static_cast<std::size_t>(v)] == v;
    }
    return ia > ib;
  });
  return out;
}

}  // namespace spheretile
