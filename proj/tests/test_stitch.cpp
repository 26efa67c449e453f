#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"
#include "spheretile/stitch.hpp"

using namespace spheretile;

namespace {

struct Pipeline {
  CombinatorialTiling t;
  GlobalColoring g;
  StitchTemplate tmpl;
  DeformedTiling d;
};

const Pipeline& family_pipeline(int m) {
  static std::map<int, Pipeline> cache;
  auto it = cache.find(m);
  if (it == cache.end()) {
    Pipeline p;
    p.t = build_goldberg(family_spec(m));
    p.g = color_distributed(p.t);
    p.tmpl = default_stitch_template();
    p.d = apply_stitches(p.t, p.g, p.tmpl);
    it = cache.emplace(m, std::move(p)).first;
  }
  return it->second;
}

}  // namespace

TEST_CASE("stitch template loads from the data file and matches the built-in copy") {
  const StitchTemplate builtin = default_stitch_template();
  const StitchTemplate loaded =
      load_stitch_template(std::string(SPHERETILE_DATA_DIR) + "/stitch_template.json");
  CHECK(loaded.period == builtin.period);
  CHECK(loaded.roles == builtin.roles);
  CHECK(loaded.contractions.size() == builtin.contractions.size());
  CHECK(loaded.chords.size() == builtin.chords.size());
  CHECK(loaded.arcs.size() == builtin.arcs.size());
  CHECK(loaded.unscalable == builtin.unscalable);
  for (std::size_t i = 0; i < loaded.contractions.size(); ++i) {
    CHECK(loaded.contractions[i].a == builtin.contractions[i].a);
    CHECK(loaded.contractions[i].b == builtin.contractions[i].b);
    CHECK(loaded.contractions[i].junction == builtin.contractions[i].junction);
    CHECK(loaded.contractions[i].gap_scope == builtin.contractions[i].gap_scope);
  }
}

TEST_CASE("stitch template validation rejects malformed tables") {
  const StitchTemplate good = default_stitch_template();

  StitchTemplate bad = good;
  bad.roles.erase("outer_b");
  CHECK_THROWS_AS(validate_stitch_template(bad), std::invalid_argument);

  bad = good;
  bad.contractions[0].b = "diag_a";  // not adjacent to the core
  CHECK_THROWS_AS(validate_stitch_template(bad), std::invalid_argument);

  bad = good;
  bad.roles["lonely"] = AxialCoord{3, 1};  // -offset is not a shifted role
  CHECK_THROWS_AS(validate_stitch_template(bad), std::invalid_argument);

  bad = good;
  bad.chords[0].ends[0] = "j_zz";
  CHECK_THROWS_AS(validate_stitch_template(bad), std::invalid_argument);

  bad = good;
  bad.period = AxialCoord{0, 0};
  CHECK_THROWS_AS(validate_stitch_template(bad), std::invalid_argument);
}

TEST_CASE("surgery census on the smallest working tiling") {
  const auto& p = family_pipeline(1);
  const auto& d = p.d;

  // 372 tiles keep their count; junction, stitch and record censuses.
  CHECK(d.base.tiles.size() == 372);
  CHECK(d.junctions.size() == 180);  // 6 per icoedge
  CHECK(d.stitches.size() == 60);    // 2 per icoedge
  CHECK(d.chords.size() == 180);     // 1 per stitch + 4 per gap
  CHECK(d.arcs.size() == 240);       // 4 per gap + 4 per icoedge at its ends

  std::array<int, 30> per_edge_j{};
  int gap_junctions = 0;
  for (const auto& j : d.junctions) {
    per_edge_j[static_cast<std::size_t>(j.icoedge)]++;
    if (j.gap) gap_junctions++;
  }
  for (int e = 0; e < 30; ++e) CHECK(per_edge_j[static_cast<std::size_t>(e)] == 6);
  CHECK(gap_junctions == 60);

  int pinned = 0;
  for (bool u : d.unscalable) pinned += u ? 1 : 0;
  CHECK(pinned == 300);  // 10 per icoedge

  CHECK(deformed_euler_characteristic(d) == 2);
}

TEST_CASE("junctions are 4-valent merges of two corners") {
  const auto& p = family_pipeline(1);
  const auto& d = p.d;
  const int C = d.corner_count();
  for (std::size_t jid = 0; jid < d.junctions.size(); ++jid) {
    const auto& j = d.junctions[jid];
    CHECK(d.corner_junction[static_cast<std::size_t>(j.corners[0])] == static_cast<int>(jid));
    CHECK(d.corner_junction[static_cast<std::size_t>(j.corners[1])] == static_cast<int>(jid));
    std::set<int> tiles(j.tiles.begin(), j.tiles.end());
    CHECK(tiles.size() == 4);
    for (int tid : tiles) {
      CHECK(tid >= 12);  // never a pentagon
      const auto& poly = d.tile_nodes[static_cast<std::size_t>(tid)];
      CHECK(std::count(poly.begin(), poly.end(), C + static_cast<int>(jid)) == 1);
    }
  }
  // Junction positions average the two merged corners.
  const auto pos = d.node_positions();
  for (std::size_t jid = 0; jid < d.junctions.size(); ++jid) {
    const auto& j = d.junctions[jid];
    const Vec3 mid = (d.base.corner_pos[static_cast<std::size_t>(j.corners[0])] +
                      d.base.corner_pos[static_cast<std::size_t>(j.corners[1])]) *
                     0.5;
    CHECK(norm(pos[static_cast<std::size_t>(C) + jid] - mid) < 1e-12);
  }
}

TEST_CASE("stitch sides carry the vertex-free color and cores one fixed other color") {
  const auto& p = family_pipeline(1);
  std::array<std::set<ColorId>, 30> core_colors;
  for (const auto& s : p.d.stitches) {
    const auto swap = p.g.edge_swaps[static_cast<std::size_t>(s.icoedge)];
    REQUIRE(swap.has_value());
    const ColorId side0 = p.g.tile_colors[static_cast<std::size_t>(s.sides[0])];
    const ColorId side1 = p.g.tile_colors[static_cast<std::size_t>(s.sides[1])];
    const ColorId core = p.g.tile_colors[static_cast<std::size_t>(s.core)];
    CHECK(side0 == 0);
    CHECK(side1 == 0);
    // The core sits between the too-close pair; it is neither vertex-free nor
    // one of the seam's swapped colors.
    CHECK(core != 0);
    CHECK(core != swap->first);
    CHECK(core != swap->second);
    core_colors[static_cast<std::size_t>(s.icoedge)].insert(core);
    // Sides stay scalable: they host no record.
    CHECK_FALSE(p.d.unscalable[static_cast<std::size_t>(s.sides[0])]);
    CHECK_FALSE(p.d.unscalable[static_cast<std::size_t>(s.sides[1])]);
    CHECK(p.d.unscalable[static_cast<std::size_t>(s.core)]);
  }
  for (int e = 0; e < 30; ++e) CHECK(core_colors[static_cast<std::size_t>(e)].size() == 1);
}

TEST_CASE("every chord joins two junctions of one host and separates a same-colored pair") {
  const auto& p = family_pipeline(1);
  const auto& d = p.d;
  for (const auto& rec : d.chords) {
    CHECK(d.node_is_junction(rec.j0));
    CHECK(d.node_is_junction(rec.j1));
    CHECK(rec.j0 < rec.j1);
    const auto& poly = d.tile_nodes[static_cast<std::size_t>(rec.host_tile)];
    CHECK(std::count(poly.begin(), poly.end(), rec.j0) == 1);
    CHECK(std::count(poly.begin(), poly.end(), rec.j1) == 1);
    CHECK(p.g.tile_colors[static_cast<std::size_t>(rec.separated[0])] ==
          p.g.tile_colors[static_cast<std::size_t>(rec.separated[1])]);
    // Each protected cell touches the host exactly at its chord end.
    const auto run0 = d.contact_nodes(rec.host_tile, rec.separated[0]);
    const auto run1 = d.contact_nodes(rec.host_tile, rec.separated[1]);
    REQUIRE(run0.size() == 1);
    REQUIRE(run1.size() == 1);
    std::set<int> ends{run0[0], run1[0]};
    CHECK(ends == std::set<int>{rec.j0, rec.j1});
  }
}

TEST_CASE("every arc pins a point contact at unit distance from a shared boundary") {
  const auto& p = family_pipeline(1);
  const auto& d = p.d;
  std::set<std::pair<int, int>> boundaries;
  for (const auto& rec : d.arcs) {
    CHECK(d.node_is_junction(rec.junction));
    // The point cell touches the host only at the arc's center junction.
    const auto touch = d.contact_nodes(rec.host_tile, rec.point_cell);
    REQUIRE(touch.size() == 1);
    CHECK(touch[0] == rec.junction);
    // The positive-measure neighbor shares a real boundary run through it.
    const auto run = d.contact_nodes(rec.host_tile, rec.neighbor);
    CHECK(run.size() >= 2);
    // Point cell and neighbor form the protected same-colored pair.
    CHECK(p.g.tile_colors[static_cast<std::size_t>(rec.point_cell)] ==
          p.g.tile_colors[static_cast<std::size_t>(rec.neighbor)]);
    // One boundary is never demanded as arcs about two centers.
    const auto key = std::make_pair(std::min(rec.host_tile, rec.neighbor),
                                    std::max(rec.host_tile, rec.neighbor));
    CHECK(boundaries.insert(key).second);
  }
}

TEST_CASE("stitch windows hold exactly six expected-unscalable tiles each") {
  const auto& p = family_pipeline(1);
  const auto& d = p.d;
  std::map<int, int> membership;
  for (const auto& w : d.stitch_windows) {
    CHECK(w.size() == 6);
    for (int h : w) {
      CHECK(d.unscalable[static_cast<std::size_t>(h)]);
      membership[h]++;
    }
  }
  // Every pinned tile belongs to a window; the 60 icovertex-region hosts are
  // shared between the end windows of two seams.
  int pinned = 0;
  for (bool u : d.unscalable) pinned += u ? 1 : 0;
  CHECK(static_cast<int>(membership.size()) == pinned);
  int singles = 0, doubles = 0;
  for (const auto& [h, c] : membership) {
    if (c == 1) singles++;
    if (c == 2) doubles++;
  }
  CHECK(singles == 240);
  CHECK(doubles == 60);
}

TEST_CASE("surgery census scales with the family index") {
  const auto& p = family_pipeline(2);
  const auto& d = p.d;
  CHECK(d.junctions.size() == 30u * 14u);  // 8m-2 per icoedge
  CHECK(d.stitches.size() == 30u * 4u);    // 2m per icoedge
  int pinned = 0;
  for (bool u : d.unscalable) pinned += u ? 1 : 0;
  CHECK(pinned == 30 * 24);  // 14m-4 per icoedge
  CHECK(d.chords.size() == 30u * 16u);
  CHECK(d.arcs.size() == 30u * 16u);
  CHECK(deformed_euler_characteristic(d) == 2);
  // End windows keep six tiles; interior stitches pick up a seventh (the
  // second diagonal of the neighboring gap).
  std::map<std::size_t, int> sizes;
  for (const auto& w : d.stitch_windows) sizes[w.size()]++;
  CHECK(sizes == std::map<std::size_t, int>{{6, 60}, {7, 60}});
}

TEST_CASE("contraction shrinks a shared boundary to a single point") {
  const auto& p = family_pipeline(1);
  const auto& d = p.d;
  const auto& s = d.stitches[0];
  // Core vs side: exactly one shared node, the stitch junction.
  for (int k = 0; k < 2; ++k) {
    const auto run = d.contact_nodes(s.core, s.sides[static_cast<std::size_t>(k)]);
    REQUIRE(run.size() == 1);
    CHECK(run[0] == d.corner_count() + s.junction_ids[static_cast<std::size_t>(k)]);
  }
  // An untouched neighbor pair still shares a two-node boundary.
  int plain = -1, nbr = -1;
  for (std::size_t x = 12; x < d.base.tiles.size() && plain < 0; ++x) {
    if (d.tile_nodes[x].size() != 6) continue;
    for (int y : d.base.tiles[x].ring) {
      if (y >= 12 && d.tile_nodes[static_cast<std::size_t>(y)].size() == 6) {
        plain = static_cast<int>(x);
        nbr = y;
        break;
      }
    }
  }
  REQUIRE(plain >= 0);
  CHECK(d.contact_nodes(plain, nbr).size() == 2);
}

TEST_CASE("seam phase is symmetric on every icoedge of the working family") {
  const auto& p = family_pipeline(1);
  for (int e = 0; e < 30; ++e) CHECK(align_phase(p.t, e) == 0.5);
  const auto& p3 = family_pipeline(2);
  for (int e = 0; e < 30; ++e) CHECK(align_phase(p3.t, e) == 0.5);
}

TEST_CASE("icovertex assembly is clean for the distributed coloring") {
  const auto& p = family_pipeline(1);
  for (int v = 0; v < 12; ++v) {
    const auto offenders = assemble_icovertex(p.d, v);
    CHECK(offenders.empty());
  }
}

TEST_CASE("icovertex assembly flags a naive coloring") {
  const auto& p = family_pipeline(1);
  auto [naive, report] = color_naive(p.t);
  REQUIRE(report.mismatched_edges >= 1);
  int bad_edge = -1;
  for (int e = 0; e < 30; ++e)
    if (!report.edge_conflicts[static_cast<std::size_t>(e)].empty()) bad_edge = e;
  REQUIRE(bad_edge >= 0);

  DeformedTiling miscolored = p.d;
  miscolored.coloring = naive;
  const auto& edge = p.t.net.edges[static_cast<std::size_t>(bad_edge)];
  bool flagged = false;
  for (int v : {edge.v0, edge.v1}) {
    try {
      assemble_icovertex(miscolored, v);
    } catch (const DovetailConflict& ex) {
      flagged = true;
      CHECK_FALSE(ex.pairs.empty());
      for (const auto& [a, b] : ex.pairs)
        CHECK(naive.tile_colors[static_cast<std::size_t>(a)] ==
              naive.tile_colors[static_cast<std::size_t>(b)]);
    }
  }
  CHECK(flagged);
}

TEST_CASE("all twelve icovertex patches are isomorphic as tagged patches") {
  const auto& p = family_pipeline(1);
  const auto& d = p.d;
  std::map<int, std::vector<int>> node_tiles;
  for (std::size_t x = 0; x < d.tile_nodes.size(); ++x)
    for (int node : d.tile_nodes[x]) node_tiles[node].push_back(static_cast<int>(x));

  auto signature = [&](int v) {
    std::set<int> patch{d.base.pentagon_tile(v)};
    for (int depth = 0; depth < 2; ++depth) {
      std::set<int> grow = patch;
      for (int x : patch)
        for (int node : d.tile_nodes[static_cast<std::size_t>(x)])
          for (int other : node_tiles[node]) grow.insert(other);
      patch = std::move(grow);
    }
    std::multiset<std::tuple<std::size_t, bool, bool>> tags;
    std::set<int> junctions;
    for (int x : patch) {
      tags.insert({d.tile_nodes[static_cast<std::size_t>(x)].size(),
                   d.unscalable[static_cast<std::size_t>(x)],
                   d.base.tiles[static_cast<std::size_t>(x)].kind ==
                       CombinatorialTiling::TileKind::Pentagon});
      for (int node : d.tile_nodes[static_cast<std::size_t>(x)])
        if (d.node_is_junction(node)) junctions.insert(node);
    }
    return std::make_tuple(patch.size(), junctions.size(), tags);
  };
  const auto ref = signature(0);
  for (int v = 1; v < 12; ++v) CHECK(signature(v) == ref);
}

TEST_CASE("surgery is deterministic") {
  const auto& p = family_pipeline(1);
  const DeformedTiling again = apply_stitches(p.t, p.g, p.tmpl);
  REQUIRE(again.junctions.size() == p.d.junctions.size());
  for (std::size_t i = 0; i < again.junctions.size(); ++i) {
    CHECK(again.junctions[i].corners == p.d.junctions[i].corners);
    CHECK(again.junctions[i].tiles == p.d.junctions[i].tiles);
  }
  REQUIRE(again.chords.size() == p.d.chords.size());
  for (std::size_t i = 0; i < again.chords.size(); ++i) {
    CHECK(again.chords[i].host_tile == p.d.chords[i].host_tile);
    CHECK(again.chords[i].j0 == p.d.chords[i].j0);
    CHECK(again.chords[i].j1 == p.d.chords[i].j1);
  }
  REQUIRE(again.arcs.size() == p.d.arcs.size());
  for (std::size_t i = 0; i < again.arcs.size(); ++i) {
    CHECK(again.arcs[i].host_tile == p.d.arcs[i].host_tile);
    CHECK(again.arcs[i].junction == p.d.arcs[i].junction);
  }
}

TEST_CASE("a template whose side cells miss the conflicts is rejected") {
  const auto& p = family_pipeline(1);
  StitchTemplate off = p.tmpl;
  // Still core-adjacent and half-turn symmetric, so static validation passes,
  // but the cells do not sit on the seam conflicts.
  off.roles["side_a"] = AxialCoord{0, 1};
  off.roles["side_b"] = AxialCoord{0, -1};
  validate_stitch_template(off);
  CHECK_THROWS_AS(apply_stitches(p.t, p.g, off), TemplateMismatch);
}

TEST_CASE("non-family fixtures are not accepted by the surgery pipeline") {
  CombinatorialTiling nine = build_goldberg(GoldbergSpec{9, 0, std::nullopt});
  GlobalColoring g = color_distributed(nine);
  CHECK_THROWS_AS(apply_stitches(nine, g, default_stitch_template()), TemplateMismatch);
  CHECK_THROWS_AS(align_phase(nine, 0), NoSymmetricPhase);
}
