#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "spheretile/coloring.hpp"
#include "spheretile/tiling.hpp"
#include "spheretile/tiling_io.hpp"

using namespace spheretile;

namespace {

const DeformedTiling& family_deformed(int m) {
  static std::map<int, DeformedTiling> cache;
  auto it = cache.find(m);
  if (it == cache.end()) {
    auto t = build_goldberg(family_spec(m));
    auto g = color_distributed(t);
    it = cache.emplace(m, apply_stitches(t, g, default_stitch_template())).first;
  }
  return it->second;
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace

TEST_CASE("realized m=1 tiling has the surgery census and validates") {
  const auto& d = family_deformed(1);
  auto s = realize(d, 4.0);
  CHECK(s.tile_count() == 372);
  CHECK(s.vertex_count() == 560);  // 740 corners - 180 merged pairs
  CHECK(s.edge_count() == 930);    // Euler: nodes + tiles - 2
  CHECK(s.spec.m == 1);
  CHECK(s.spec.gm == 4);
  CHECK(s.spec.gn == 3);
  REQUIRE(s.spec.phases.size() == 30);
  for (double p : s.spec.phases) CHECK(p == 0.5);
  int arcs = 0;
  for (const auto& e : s.edges) {
    if (e.kind == SphericalTiling::EdgeKind::UnitArc) {
      ++arcs;
      CHECK(e.center >= 0);
    }
  }
  CHECK(arcs == 240);
  CHECK(s.unscalable_tiles.size() == 300);
  CHECK_FALSE(s.patch);
  CHECK_NOTHROW(validate_spherical_tiling(s));
  for (const auto& v : s.vertices) CHECK(std::abs(norm(v) - 4.0) <= 4e-9);
  for (int t = 0; t < s.tile_count(); ++t) {
    CHECK(s.tiles[static_cast<std::size_t>(t)].color == d.coloring.tile_colors[static_cast<std::size_t>(t)]);
    CHECK(s.tiles[static_cast<std::size_t>(t)].boundary.size() == d.tile_nodes[static_cast<std::size_t>(t)].size());
  }
}

TEST_CASE("every edge is traversed once in each direction") {
  const auto& d = family_deformed(1);
  auto s = realize(d, 4.0);
  std::map<std::pair<int, int>, int> oriented;
  for (int t = 0; t < s.tile_count(); ++t) {
    auto vs = tile_vertex_loop(s, t);
    for (std::size_t i = 0; i < vs.size(); ++i) {
      oriented[{vs[i], vs[(i + 1) % vs.size()]}] += 1;
    }
  }
  CHECK(oriented.size() == 2 * s.edges.size());
  for (const auto& [key, count] : oriented) {
    CHECK(count == 1);
    CHECK(oriented.count({key.second, key.first}) == 1);
  }
}

TEST_CASE("pinned unit lengths cover seam chords and arc radii") {
  const auto& d = family_deformed(1);
  auto s = realize(d, 4.0);
  auto nodes = realized_node_ids(d);
  REQUIRE(static_cast<int>(nodes.size()) == s.vertex_count());
  std::vector<int> node_vertex(static_cast<std::size_t>(d.node_count()), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    node_vertex[static_cast<std::size_t>(nodes[i])] = static_cast<int>(i);
  }
  std::set<std::pair<int, int>> pins;
  for (const auto& p : s.unit_chords) {
    auto key = std::minmax(p[0], p[1]);
    CHECK(pins.insert({key.first, key.second}).second);  // no duplicates
    // Every pinned pair touches at least one junction node.
    CHECK((d.node_is_junction(nodes[static_cast<std::size_t>(p[0])]) ||
           d.node_is_junction(nodes[static_cast<std::size_t>(p[1])])));
  }
  int both_junction = 0;
  for (const auto& p : s.unit_chords) {
    if (d.node_is_junction(nodes[static_cast<std::size_t>(p[0])]) &&
        d.node_is_junction(nodes[static_cast<std::size_t>(p[1])])) {
      ++both_junction;
    }
  }
  CHECK(both_junction >= 180);  // the seam chords join junction pairs
  auto vkey = [&](int n0, int n1) {
    auto key = std::minmax(node_vertex[static_cast<std::size_t>(n0)],
                           node_vertex[static_cast<std::size_t>(n1)]);
    return std::pair<int, int>{key.first, key.second};
  };
  for (const auto& ch : d.chords) CHECK(pins.count(vkey(ch.j0, ch.j1)) == 1);
  for (const auto& arc : d.arcs) {
    for (int node : d.contact_nodes(arc.host_tile, arc.neighbor)) {
      CHECK(pins.count(vkey(node, arc.junction)) == 1);
    }
  }
}

TEST_CASE("tile solid angles telescope to the full sphere") {
  const auto& d = family_deformed(1);
  auto s = realize(d, 4.0);
  // The raw realization has arcs far from their unit circles; a wide-open
  // tolerance still yields consistent shared boundaries.
  auto omega = tile_solid_angles(s, 0.02, 1e9);
  double sum = 0.0;
  for (double o : omega) {
    CHECK(o > 0.0);
    sum += o;
  }
  CHECK(std::abs(sum - 4 * kPi) < 1e-9);
}

TEST_CASE("tile_region enforces arc closure but accepts geodesic tiles") {
  const auto& d = family_deformed(1);
  auto s = realize(d, 4.0);
  std::set<int> arc_tiles;
  for (int t = 0; t < s.tile_count(); ++t) {
    for (int eid : s.tiles[static_cast<std::size_t>(t)].boundary) {
      if (s.edges[static_cast<std::size_t>(eid)].kind == SphericalTiling::EdgeKind::UnitArc) {
        arc_tiles.insert(t);
      }
    }
  }
  REQUIRE(!arc_tiles.empty());
  CHECK_THROWS_AS(tile_region(s, *arc_tiles.begin()), MalformedTiling);
  int geodesic_tile = -1;
  for (int t = 0; t < s.tile_count(); ++t) {
    if (!arc_tiles.count(t)) {
      geodesic_tile = t;
      break;
    }
  }
  REQUIRE(geodesic_tile >= 0);
  auto reg = tile_region(s, geodesic_tile);
  CHECK_NOTHROW(validate_tile_region(reg));
  CHECK(reg.color == s.tiles[static_cast<std::size_t>(geodesic_tile)].color);
}

TEST_CASE("serialization round-trips byte-identically and preserves content") {
  const auto& d = family_deformed(1);
  auto s = realize(d, 4.0);
  s.provenance.tool = kToolVersion;
  s.provenance.config_hash = "deadbeef";
  s.provenance.seed = 42;
  std::string text = serialize_tiling(s);
  auto back = parse_tiling(text);
  CHECK(serialize_tiling(back) == text);
  REQUIRE(back.vertex_count() == s.vertex_count());
  for (int i = 0; i < s.vertex_count(); ++i) {
    CHECK(back.vertices[static_cast<std::size_t>(i)].x == s.vertices[static_cast<std::size_t>(i)].x);
    CHECK(back.vertices[static_cast<std::size_t>(i)].y == s.vertices[static_cast<std::size_t>(i)].y);
    CHECK(back.vertices[static_cast<std::size_t>(i)].z == s.vertices[static_cast<std::size_t>(i)].z);
  }
  REQUIRE(back.edge_count() == s.edge_count());
  for (int i = 0; i < s.edge_count(); ++i) {
    const auto& a = s.edges[static_cast<std::size_t>(i)];
    const auto& b = back.edges[static_cast<std::size_t>(i)];
    CHECK(a.a == b.a);
    CHECK(a.b == b.b);
    CHECK(a.kind == b.kind);
    CHECK(a.center == b.center);
  }
  CHECK(back.tiles.size() == s.tiles.size());
  CHECK(back.unit_chords == s.unit_chords);
  CHECK(back.unscalable_tiles == s.unscalable_tiles);
  CHECK(back.patch == s.patch);
  CHECK(back.provenance.tool == s.provenance.tool);
  CHECK(back.provenance.config_hash == s.provenance.config_hash);
  CHECK(back.provenance.seed == s.provenance.seed);
  CHECK(back.spec.phases == s.spec.phases);
  // Determinism: rebuilding from scratch serializes to the same bytes.
  auto s2 = realize(family_deformed(1), 4.0);
  s2.provenance = s.provenance;
  CHECK(serialize_tiling(s2) == text);
}

TEST_CASE("parser rejects schema violations") {
  const auto& d = family_deformed(1);
  auto s = realize(d, 4.0);
  std::string good = serialize_tiling(s);
  CHECK_THROWS_AS(parse_tiling("{"), MalformedTiling);
  CHECK_THROWS_AS(parse_tiling("[]"), MalformedTiling);
  {
    std::string bad = good;
    auto pos = bad.find("tiling/v1");
    bad.replace(pos, 9, "tiling/v2");
    CHECK_THROWS_AS(parse_tiling(bad), MalformedTiling);
  }
  {
    auto broken = s;
    broken.edges[0].a = broken.vertex_count() + 5;
    CHECK_THROWS_AS(parse_tiling(serialize_tiling(broken)), MalformedTiling);
  }
  {
    auto off = s;
    off.vertices[0] = off.vertices[0] * 1.001;
    CHECK_THROWS_AS(parse_tiling(serialize_tiling(off)), MalformedTiling);
  }
  {
    auto miscolored = s;
    miscolored.tiles[0].color = 7;
    CHECK_THROWS_AS(parse_tiling(serialize_tiling(miscolored)), MalformedTiling);
  }
}

TEST_CASE("patch extraction keeps a valid open submesh") {
  const auto& d = family_deformed(1);
  auto s = realize(d, 4.0);
  const auto& edge0 = d.base.net.edges[0];
  std::vector<int> ids;
  for (int t = 0; t < s.tile_count(); ++t) {
    const auto& tile = d.base.tiles[static_cast<std::size_t>(t)];
    if (tile.kind == CombinatorialTiling::TileKind::Hexagon &&
        (tile.home_face == edge0.f0 || tile.home_face == edge0.f1)) {
      ids.push_back(t);
    }
  }
  REQUIRE(!ids.empty());
  auto patch = extract_patch(s, ids);
  CHECK(patch.patch);
  CHECK(patch.tile_count() == static_cast<int>(ids.size()));
  CHECK_NOTHROW(validate_spherical_tiling(patch));
  CHECK(!free_boundary_edges(patch).empty());
  CHECK(free_boundary_edges(s).empty());
  // Round-trip including the patch flag.
  auto back = parse_tiling(serialize_tiling(patch));
  CHECK(back.patch);
  CHECK(serialize_tiling(back) == serialize_tiling(patch));
  // The patch keeps some pinned lengths and unscalable tiles from the seam.
  CHECK(!patch.unit_chords.empty());
  CHECK(!patch.unscalable_tiles.empty());
}
