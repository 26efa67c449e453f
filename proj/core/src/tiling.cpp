#include "spheretile/tiling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace spheretile {

namespace {

std::pair<int, int> ekey(int u, int v) { return {std::min(u, v), std::max(u, v)}; }

bool finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

ArcEdge oriented_arc_edge(const SphericalTiling& s, const SphericalTiling::Edge& e, int from,
                          int to, double arc_tol) {
  double r = s.radius;
  SpherePoint pa{s.vertices[static_cast<std::size_t>(from)], r};
  SpherePoint pb{s.vertices[static_cast<std::size_t>(to)], r};
  ArcEdge ae;
  ae.a = pa;
  ae.b = pb;
  if (e.kind == SphericalTiling::EdgeKind::Geodesic) {
    ae.kind = ArcEdge::Kind::Geodesic;
    return ae;
  }
  if (r < 0.5) throw MalformedTiling("unit-arc edges need sphere radius >= 1/2");
  const Vec3& c = s.vertices[static_cast<std::size_t>(e.center)];
  double da = std::abs(dist(pa.pos, c) - 1.0);
  double db = std::abs(dist(pb.pos, c) - 1.0);
  if (da > arc_tol || db > arc_tol) {
    std::ostringstream os;
    os << "arc endpoints sit " << std::max(da, db) << " off the unit circle about vertex "
       << e.center << " (tolerance " << arc_tol << ")";
    throw MalformedTiling(os.str());
  }
  ae.kind = ArcEdge::Kind::UnitCircle;
  ae.center = SpherePoint{c, r};
  return ae;
}

/// Signed solid angle of the spherical triangle spanned by unit vectors.
double tri_solid_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
  double num = dot(a, cross(b, c));
  double den = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
  return 2.0 * std::atan2(num, den);
}

}  // namespace

std::vector<int> tile_vertex_loop(const SphericalTiling& s, int t) {
  if (t < 0 || t >= s.tile_count()) throw MalformedTiling("tile id out of range");
  const auto& loop = s.tiles[static_cast<std::size_t>(t)].boundary;
  std::size_t k = loop.size();
  if (k < 2) throw MalformedTiling("tile boundary needs at least two edges");
  for (int eid : loop) {
    if (eid < 0 || eid >= s.edge_count()) throw MalformedTiling("boundary edge id out of range");
  }
  const auto& e0 = s.edges[static_cast<std::size_t>(loop[0])];
  const auto& e1 = s.edges[static_cast<std::size_t>(loop[1])];
  int start;
  if (e0.b == e1.a || e0.b == e1.b) {
    start = e0.a;
  } else if (e0.a == e1.a || e0.a == e1.b) {
    start = e0.b;
  } else {
    std::ostringstream os;
    os << "boundary of tile " << t << " breaks between its first two edges";
    throw MalformedTiling(os.str());
  }
  std::vector<int> vs;
  vs.reserve(k);
  int cur = start;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& e = s.edges[static_cast<std::size_t>(loop[i])];
    vs.push_back(cur);
    if (e.a == cur) {
      cur = e.b;
    } else if (e.b == cur) {
      cur = e.a;
    } else {
      std::ostringstream os;
      os << "boundary of tile " << t << " breaks at edge position " << i;
      throw MalformedTiling(os.str());
    }
  }
  if (cur != start) {
    std::ostringstream os;
    os << "boundary of tile " << t << " does not close";
    throw MalformedTiling(os.str());
  }
  return vs;
}

void validate_spherical_tiling(const SphericalTiling& s) {
  if (!(s.radius > 0) || !std::isfinite(s.radius)) throw MalformedTiling("radius must be positive");
  double r = s.radius;
  for (const Vec3& v : s.vertices) {
    if (!finite(v)) throw MalformedTiling("non-finite vertex position");
    if (std::abs(norm(v) - r) > 1e-9 * r) {
      throw MalformedTiling("vertex is off the sphere beyond 1e-9 * radius");
    }
  }
  int V = s.vertex_count();
  for (const auto& e : s.edges) {
    if (e.a < 0 || e.a >= V || e.b < 0 || e.b >= V) throw MalformedTiling("edge endpoint out of range");
    if (e.a == e.b) throw MalformedTiling("degenerate edge joins a vertex to itself");
    if (e.kind == SphericalTiling::EdgeKind::UnitArc) {
      if (e.center < 0 || e.center >= V) throw MalformedTiling("arc center out of range");
      if (r < 0.5) throw MalformedTiling("unit-arc edges need sphere radius >= 1/2");
    } else if (e.center != -1) {
      throw MalformedTiling("geodesic edge carries an arc center");
    }
  }
  std::vector<int> use(s.edges.size(), 0);
  for (int t = 0; t < s.tile_count(); ++t) {
    const auto& tile = s.tiles[static_cast<std::size_t>(t)];
    if (tile.color < 0 || tile.color >= 7) throw MalformedTiling("tile color outside the 7-color palette");
    auto vs = tile_vertex_loop(s, t);
    for (std::size_t i = 0; i < vs.size(); ++i) {
      use[static_cast<std::size_t>(tile.boundary[i])] += 1;
    }
  }
  for (std::size_t i = 0; i < use.size(); ++i) {
    if (use[i] == 0) throw MalformedTiling("edge belongs to no tile");
    if (use[i] > 2) throw MalformedTiling("edge belongs to more than two tiles");
    if (use[i] == 1 && !s.patch) throw MalformedTiling("free boundary edge in a closed tiling");
  }
  for (const auto& ch : s.unit_chords) {
    if (ch[0] < 0 || ch[0] >= V || ch[1] < 0 || ch[1] >= V || ch[0] == ch[1]) {
      throw MalformedTiling("pinned unit length references invalid vertices");
    }
  }
  for (int t : s.unscalable_tiles) {
    if (t < 0 || t >= s.tile_count()) throw MalformedTiling("unscalable tile id out of range");
  }
}

TileRegion tile_region(const SphericalTiling& s, int t, double arc_tol) {
  const auto& tile = s.tiles[static_cast<std::size_t>(t)];
  auto vs = tile_vertex_loop(s, t);
  TileRegion reg;
  reg.tile = t;
  reg.color = tile.color;
  reg.boundary.reserve(vs.size());
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const auto& e = s.edges[static_cast<std::size_t>(tile.boundary[i])];
    reg.boundary.push_back(oriented_arc_edge(s, e, vs[i], vs[(i + 1) % vs.size()], arc_tol));
  }
  return reg;
}

std::vector<double> tile_solid_angles(const SphericalTiling& s, double h, double arc_tol) {
  double r = s.radius;
  // Canonical samples per edge in stored a -> b direction, as unit vectors.
  // Both incident tiles reuse them, so shared boundaries cancel exactly.
  std::vector<std::vector<Vec3>> samples(s.edges.size());
  for (std::size_t i = 0; i < s.edges.size(); ++i) {
    const auto& e = s.edges[i];
    ArcEdge ae = oriented_arc_edge(s, e, e.a, e.b, arc_tol);
    auto pts = sample_edge(ae, h);
    samples[i].reserve(pts.size());
    for (const auto& p : pts) samples[i].push_back(normalized(p.pos));
  }
  (void)r;
  std::vector<double> out(static_cast<std::size_t>(s.tile_count()), 0.0);
  for (int t = 0; t < s.tile_count(); ++t) {
    const auto& tile = s.tiles[static_cast<std::size_t>(t)];
    auto vs = tile_vertex_loop(s, t);
    std::vector<Vec3> poly;
    for (std::size_t i = 0; i < vs.size(); ++i) {
      int eid = tile.boundary[i];
      const auto& e = s.edges[static_cast<std::size_t>(eid)];
      const auto& pts = samples[static_cast<std::size_t>(eid)];
      bool forward = (e.a == vs[i]);
      // Skip the final point of each piece; the next piece contributes it.
      if (forward) {
        poly.insert(poly.end(), pts.begin(), pts.end() - 1);
      } else {
        poly.insert(poly.end(), pts.rbegin(), pts.rend() - 1);
      }
    }
    Vec3 centroid{};
    for (const auto& p : poly) centroid += p;
    double cn = norm(centroid);
    Vec3 cdir = cn > 1e-12 ? centroid / cn : poly.front();
    double omega = 0.0;
    double comp = 0.0;  // Kahan compensation
    for (std::size_t k = 0; k < poly.size(); ++k) {
      double term = tri_solid_angle(cdir, poly[k], poly[(k + 1) % poly.size()]);
      double y = term - comp;
      double tt = omega + y;
      comp = (tt - omega) - y;
      omega = tt;
    }
    out[static_cast<std::size_t>(t)] = omega;
  }
  return out;
}

std::vector<int> free_boundary_edges(const SphericalTiling& s) {
  std::vector<int> use(s.edges.size(), 0);
  for (const auto& tile : s.tiles) {
    for (int eid : tile.boundary) use[static_cast<std::size_t>(eid)] += 1;
  }
  std::vector<int> out;
  for (std::size_t i = 0; i < use.size(); ++i) {
    if (use[i] == 1) out.push_back(static_cast<int>(i));
  }
  return out;
}

SphericalTiling realize(const DeformedTiling& d, double radius) {
  if (!(radius > 0.5)) {
    throw std::invalid_argument("realization radius must exceed 1/2 (unit arcs exist only then)");
  }
  SphericalTiling s;
  s.radius = radius;
  s.spec.gm = d.base.spec.gm;
  s.spec.gn = d.base.spec.gn;
  s.spec.m = d.base.spec.family_m.value_or(0);
  s.spec.phases.reserve(30);
  for (int e = 0; e < 30; ++e) s.spec.phases.push_back(align_phase(d.base, e));

  // Contracted-away corners leave dead node ids behind; keep only nodes that
  // still appear on some boundary, in ascending node-id order.
  auto flat = d.node_positions();
  auto used = realized_node_ids(d);
  std::vector<int> node_vertex(flat.size(), -1);
  for (int n : used) {
    node_vertex[static_cast<std::size_t>(n)] = s.vertex_count();
    s.vertices.push_back(normalized(flat[static_cast<std::size_t>(n)]) * radius);
  }

  std::map<std::pair<int, int>, int> eid;
  int T = static_cast<int>(d.tile_nodes.size());
  s.tiles.resize(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    const auto& loop = d.tile_nodes[static_cast<std::size_t>(t)];
    auto& tile = s.tiles[static_cast<std::size_t>(t)];
    tile.color = d.coloring.tile_colors[static_cast<std::size_t>(t)];
    tile.boundary.reserve(loop.size());
    for (std::size_t k = 0; k < loop.size(); ++k) {
      int u = node_vertex[static_cast<std::size_t>(loop[k])];
      int v = node_vertex[static_cast<std::size_t>(loop[(k + 1) % loop.size()])];
      auto key = ekey(u, v);
      auto it = eid.find(key);
      int id;
      if (it == eid.end()) {
        id = s.edge_count();
        s.edges.push_back(SphericalTiling::Edge{u, v, SphericalTiling::EdgeKind::Geodesic, -1});
        eid.emplace(key, id);
      } else {
        id = it->second;
      }
      tile.boundary.push_back(id);
    }
  }

  std::set<std::pair<int, int>> pinned;
  for (const auto& ch : d.chords) {
    pinned.insert(ekey(node_vertex[static_cast<std::size_t>(ch.j0)],
                       node_vertex[static_cast<std::size_t>(ch.j1)]));
  }
  for (const auto& arc : d.arcs) {
    auto run = d.contact_nodes(arc.host_tile, arc.neighbor);
    if (run.size() < 2) {
      throw std::logic_error("arc record names tiles without a shared boundary run");
    }
    int center = node_vertex[static_cast<std::size_t>(arc.junction)];
    for (std::size_t i = 0; i + 1 < run.size(); ++i) {
      int u = node_vertex[static_cast<std::size_t>(run[i])];
      int v = node_vertex[static_cast<std::size_t>(run[i + 1])];
      auto& e = s.edges[static_cast<std::size_t>(eid.at(ekey(u, v)))];
      if (e.kind == SphericalTiling::EdgeKind::UnitArc && e.center != center) {
        throw std::logic_error("one boundary edge demanded as arcs about two centers");
      }
      e.kind = SphericalTiling::EdgeKind::UnitArc;
      e.center = center;
    }
    for (int node : run) {
      pinned.insert(ekey(node_vertex[static_cast<std::size_t>(node)], center));
    }
  }
  s.unit_chords.reserve(pinned.size());
  for (const auto& p : pinned) s.unit_chords.push_back({p.first, p.second});

  for (std::size_t t = 0; t < d.unscalable.size(); ++t) {
    if (d.unscalable[t]) s.unscalable_tiles.push_back(static_cast<int>(t));
  }
  return s;
}

std::vector<int> realized_node_ids(const DeformedTiling& d) {
  std::vector<char> used(static_cast<std::size_t>(d.node_count()), 0);
  for (const auto& loop : d.tile_nodes) {
    for (int n : loop) used[static_cast<std::size_t>(n)] = 1;
  }
  std::vector<int> out;
  for (std::size_t n = 0; n < used.size(); ++n) {
    if (used[n]) out.push_back(static_cast<int>(n));
  }
  return out;
}

SphericalTiling extract_patch(const SphericalTiling& s, const std::vector<int>& tile_ids) {
  for (int t : tile_ids) {
    if (t < 0 || t >= s.tile_count()) throw std::invalid_argument("patch tile id out of range");
  }
  std::set<int> keep_edges, keep_vertices;
  for (int t : tile_ids) {
    for (int eid : s.tiles[static_cast<std::size_t>(t)].boundary) {
      keep_edges.insert(eid);
      const auto& e = s.edges[static_cast<std::size_t>(eid)];
      keep_vertices.insert(e.a);
      keep_vertices.insert(e.b);
      if (e.center >= 0) keep_vertices.insert(e.center);
    }
  }
  std::map<int, int> vmap, emap;
  SphericalTiling out;
  out.radius = s.radius;
  out.spec = s.spec;
  out.provenance = s.provenance;
  out.patch = true;
  for (int v : keep_vertices) {
    vmap[v] = out.vertex_count();
    out.vertices.push_back(s.vertices[static_cast<std::size_t>(v)]);
  }
  for (int e : keep_edges) {
    emap[e] = out.edge_count();
    auto edge = s.edges[static_cast<std::size_t>(e)];
    edge.a = vmap.at(edge.a);
    edge.b = vmap.at(edge.b);
    if (edge.center >= 0) edge.center = vmap.at(edge.center);
    out.edges.push_back(edge);
  }
  std::map<int, int> tmap;
  for (int t : tile_ids) {
    tmap[t] = out.tile_count();
    auto tile = s.tiles[static_cast<std::size_t>(t)];
    for (int& eid : tile.boundary) eid = emap.at(eid);
    out.tiles.push_back(std::move(tile));
  }
  for (const auto& ch : s.unit_chords) {
    auto a = vmap.find(ch[0]);
    auto b = vmap.find(ch[1]);
    if (a != vmap.end() && b != vmap.end()) out.unit_chords.push_back({a->second, b->second});
  }
  for (int t : s.unscalable_tiles) {
    auto it = tmap.find(t);
    if (it != tmap.end()) out.unscalable_tiles.push_back(it->second);
  }
  std::sort(out.unscalable_tiles.begin(), out.unscalable_tiles.end());
  return out;
}

}  // namespace spheretile
