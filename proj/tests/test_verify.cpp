#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "json.hpp"
#include "spheretile/coloring.hpp"
#include "spheretile/tiling.hpp"
#include "spheretile/tiling_io.hpp"
#include "spheretile/verify.hpp"

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

const double kRootThreeEighths = std::sqrt(3.0 / 8.0);

}  // namespace

TEST_CASE("cube fixture: 6 tiles, 6 colors, valid up to sqrt(3/8) by diameter") {
  auto cube = build_platonic_fixture(PlatonicSolid::Cube, 0.60);
  CHECK(cube.tile_count() == 6);
  CHECK(cube.vertex_count() == 8);
  CHECK(cube.edge_count() == 12);
  std::set<int> colors;
  for (const auto& t : cube.tiles) colors.insert(t.color);
  CHECK(colors.size() == 6);

  auto rep = verify_tiling(cube, 1e-6, 0.005);
  CHECK(rep.valid);
  CHECK_FALSE(rep.patch_mode);
  CHECK(rep.classification == "scalable");
  CHECK(rep.unscalable_tiles.empty());
  CHECK(rep.siamese.empty());
  // face-diagonal corners give diameter 2*sqrt(2/3)*r
  CHECK(rep.worst_diameter.lower == doctest::Approx(2 * std::sqrt(2.0 / 3.0) * 0.60).epsilon(1e-9));
  CHECK(rep.worst_diameter.upper == doctest::Approx(rep.worst_diameter.lower + 0.01));
  // no same-color pair exists: sentinel pair, sphere diameter as the value
  CHECK(rep.worst_separation_pair == std::array<int, 2>{-1, -1});
  CHECK(rep.worst_separation.upper == doctest::Approx(1.2));
  CHECK(std::abs(rep.solid_angle_defect) <= 1e-6 * 4 * 3.14159265358979323846);

  // equality at diameter 1 is valid; above the threshold it is not
  CHECK(verify_tiling(build_platonic_fixture(PlatonicSolid::Cube, kRootThreeEighths), 1e-6, 0.005)
            .valid);
  auto above = verify_tiling(
      build_platonic_fixture(PlatonicSolid::Cube, kRootThreeEighths + 0.01), 1e-6, 0.005);
  CHECK_FALSE(above.valid);
  CHECK(above.worst_diameter.lower > 1.0 + 1e-6);
}

TEST_CASE("octahedron fixture at sqrt(1/2): valid with every distance pinned at 1") {
  const double r = std::sqrt(0.5);
  auto octa = build_platonic_fixture(PlatonicSolid::Octahedron, r);
  CHECK(octa.tile_count() == 8);
  CHECK(octa.vertex_count() == 6);
  CHECK(octa.edge_count() == 12);
  std::map<int, int> color_count;
  for (const auto& t : octa.tiles) ++color_count[t.color];
  CHECK(color_count.size() == 4);
  for (const auto& [c, n] : color_count) CHECK(n == 2);

  auto rep = verify_tiling(octa, 1e-6, 0.005);
  CHECK(rep.valid);
  // same-color faces are antipodal; their separation is exactly 1, as is
  // every face diameter (vertex pairs at r*sqrt(2))
  CHECK(rep.worst_diameter.lower == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.worst_separation.upper == doctest::Approx(1.0).epsilon(1e-12));
  // every face abuts antipodal same-color pairs: all 8 tiles unscalable
  CHECK(rep.unscalable_tiles.size() == 8);
  CHECK(rep.classification == "unscalable");
  CHECK(rep.siamese.empty());

  // probe-backed refinement: quasi-scalable only if both nudged radii pass
  int calls = 0;
  auto probe_yes = [&](const SphericalTiling&, double) {
    ++calls;
    return true;
  };
  CHECK(scalability_class(octa, 1e-6, probe_yes) == "quasi-scalable");
  CHECK(calls == 2);
  auto probe_no = [](const SphericalTiling&, double) { return false; };
  CHECK(scalability_class(octa, 1e-6, probe_no) == "unscalable");
  CHECK(scalability_class(octa, 1e-6) == "unscalable");

  // scalable tilings never consult the probe
  auto cube = build_platonic_fixture(PlatonicSolid::Cube, 0.60);
  int cube_calls = 0;
  auto counting = [&](const SphericalTiling&, double) {
    ++cube_calls;
    return false;
  };
  CHECK(scalability_class(cube, 1e-6, counting) == "scalable");
  CHECK(cube_calls == 0);
}

TEST_CASE("dodecahedron fixture: separation-driven transition at sqrt(3/8)") {
  auto dode = build_platonic_fixture(PlatonicSolid::Dodecahedron, 0.62);
  CHECK(dode.tile_count() == 12);
  CHECK(dode.vertex_count() == 20);
  CHECK(dode.edge_count() == 30);
  std::map<int, std::vector<int>> by_color;
  for (int t = 0; t < dode.tile_count(); ++t) by_color[dode.tiles[t].color].push_back(t);
  CHECK(by_color.size() == 6);
  for (const auto& [c, ts] : by_color) {
    REQUIRE(ts.size() == 2);
    // same-color faces are antipodal: their vertex centroids cancel
    Vec3 c0{}, c1{};
    for (int v : tile_vertex_loop(dode, ts[0])) c0 += dode.vertices[v];
    for (int v : tile_vertex_loop(dode, ts[1])) c1 += dode.vertices[v];
    CHECK(norm(c0 + c1) <= 1e-9);
  }

  auto rep = verify_tiling(dode, 1e-6, 0.005);
  CHECK(rep.valid);
  CHECK(rep.classification == "scalable");
  // min separation between antipodal faces is sqrt(8/3)*r, reached at
  // vertex pairs, which sampling always includes
  CHECK(rep.worst_separation.upper == doctest::Approx(std::sqrt(8.0 / 3.0) * 0.62).epsilon(1e-9));
  CHECK(rep.worst_diameter.lower < 1.0);

  CHECK_FALSE(verify_tiling(build_platonic_fixture(PlatonicSolid::Dodecahedron, 0.60), 1e-6, 0.005)
                  .valid);
  // the invalid->valid transition sits at sqrt(3/8) to vertex-sample accuracy
  CHECK_FALSE(verify_tiling(
                  build_platonic_fixture(PlatonicSolid::Dodecahedron, kRootThreeEighths - 1e-4),
                  1e-6, 0.005)
                  .valid);
  CHECK(verify_tiling(build_platonic_fixture(PlatonicSolid::Dodecahedron, kRootThreeEighths + 1e-4),
                      1e-6, 0.005)
            .valid);
}

TEST_CASE("refining h never flips an invalid verdict to valid") {
  auto dode = build_platonic_fixture(PlatonicSolid::Dodecahedron, 0.605);
  double prev_sep = 0.0;
  double prev_diam = 10.0;
  bool first = true;
  for (double h : {0.02, 0.01, 0.005, 0.0025}) {
    auto rep = verify_tiling(dode, 1e-6, h);
    CHECK_FALSE(rep.valid);
    if (!first) {
      // sampled extrema move one-sidedly: diameters grow, separations shrink
      CHECK(rep.worst_diameter.lower >= prev_diam - 1e-15);
      CHECK(rep.worst_separation.upper <= prev_sep + 1e-15);
    }
    // brackets stay consistent with the raw values
    CHECK(rep.worst_diameter.upper == doctest::Approx(rep.worst_diameter.lower + 2 * h));
    CHECK(rep.worst_separation.lower == doctest::Approx(rep.worst_separation.upper - 2 * h));
    prev_diam = rep.worst_diameter.lower;
    prev_sep = rep.worst_separation.upper;
    first = false;
  }
}

TEST_CASE("siamese detection: mutual proximity below 1, witnessed rejection above") {
  // tiny sphere: all cross distances below 1, so every pair is Siamese
  auto octa_small = siamese_pairs(build_platonic_fixture(PlatonicSolid::Octahedron, 0.2), 0.005);
  CHECK(octa_small.size() == 28);  // all pairs of 8 tiles

  // at working radii no pair is mutually contained
  CHECK(siamese_pairs(build_platonic_fixture(PlatonicSolid::Octahedron, std::sqrt(0.5)), 0.005)
            .empty());
  CHECK(siamese_pairs(build_platonic_fixture(PlatonicSolid::Cube, 0.60), 0.005).empty());

  // margin: cross distances within 2h of 1 are not declared Siamese
  // (octahedron at r just below 1/2 has max cross distance 2r close to 1)
  auto near = siamese_pairs(build_platonic_fixture(PlatonicSolid::Octahedron, 0.4999), 0.02);
  CHECK(near.empty());
  auto clear = siamese_pairs(build_platonic_fixture(PlatonicSolid::Octahedron, 0.45), 0.02);
  CHECK(clear.size() == 28);
}

TEST_CASE("combinatorial unscalable tags match the surgery annotations") {
  const auto& d = family_deformed(1);
  auto s = realize(d, 4.0);
  auto tagged = unscalable_tiles(s);
  CHECK(tagged == s.unscalable_tiles);
  CHECK(tagged.size() == 300);
}

TEST_CASE("raw surgery output fails verification as malformed (arcs unclosed)") {
  const auto& d = family_deformed(1);
  auto s = realize(d, 4.0);
  CHECK_THROWS_AS(verify_tiling(s, 1e-6, 0.02), MalformedTiling);
}

TEST_CASE("a reversed tile loop is reported as an overlap") {
  auto cube = build_platonic_fixture(PlatonicSolid::Cube, 0.60);
  std::reverse(cube.tiles[2].boundary.begin(), cube.tiles[2].boundary.end());
  CHECK_NOTHROW(validate_spherical_tiling(cube));
  CHECK_THROWS_AS(verify_tiling(cube, 1e-6, 0.02), OverlapError);
}

TEST_CASE("patch mode: free-boundary zone excluded, interior verified") {
  // the smallest family member has no tile whose whole vertex star stays
  // clear of unit arcs, so the patch comes from the next one
  const auto& d = family_deformed(2);
  auto s = realize(d, 7.0);

  // pick a tile whose vertex star is free of unit arcs and take the star as
  // the patch; the seed tile is then interior (every edge at its vertices is
  // shared by two patch tiles)
  std::vector<std::set<int>> tile_verts(s.tiles.size());
  std::vector<char> geodesic_only(s.tiles.size(), 1);
  std::vector<std::vector<int>> incident(s.vertices.size());
  for (int t = 0; t < s.tile_count(); ++t) {
    for (int e : s.tiles[t].boundary)
      if (s.edges[e].kind != SphericalTiling::EdgeKind::Geodesic) geodesic_only[t] = 0;
    for (int v : tile_vertex_loop(s, t)) {
      tile_verts[t].insert(v);
      incident[v].push_back(t);
    }
  }
  int seed = -1;
  std::vector<int> patch_tiles;
  for (int t = 0; t < s.tile_count() && seed < 0; ++t) {
    if (!geodesic_only[t]) continue;
    std::set<int> star{t};
    bool ok = true;
    for (int v : tile_verts[t])
      for (int other : incident[v]) {
        star.insert(other);
        if (!geodesic_only[other]) ok = false;
      }
    if (ok) {
      seed = t;
      patch_tiles.assign(star.begin(), star.end());
    }
  }
  REQUIRE(seed >= 0);

  auto patch = extract_patch(s, patch_tiles);
  auto rep = verify_tiling(patch, 1e-6, 0.01);
  CHECK(rep.patch_mode);
  CHECK(rep.solid_angle_defect == 0.0);
  // everything but the seed touches the free boundary
  int seed_local =
      static_cast<int>(std::lower_bound(patch_tiles.begin(), patch_tiles.end(), seed) -
                       patch_tiles.begin());
  CHECK(rep.excluded_tiles.size() == patch_tiles.size() - 1);
  CHECK(std::find(rep.excluded_tiles.begin(), rep.excluded_tiles.end(), seed_local) ==
        rep.excluded_tiles.end());
  // the verdict covers exactly the seed tile
  CHECK(rep.worst_diameter_tile == seed_local);
  CHECK(rep.worst_diameter.lower > 0.0);
  CHECK(rep.worst_diameter.lower < 1.0);
}

TEST_CASE("verification reports round-trip bit-identically through files") {
  auto dode = build_platonic_fixture(PlatonicSolid::Dodecahedron, 0.615);
  auto rep1 = verify_tiling(dode, 1e-6, 0.01);
  auto reparsed = parse_tiling(serialize_tiling(dode));
  auto rep2 = verify_tiling(reparsed, 1e-6, 0.01);
  CHECK(report_to_json(rep1) == report_to_json(rep2));

  // report text is well-formed JSON with the expected fields
  auto j = nlohmann::ordered_json::parse(report_to_json(rep1));
  CHECK(j["valid"].is_boolean());
  CHECK(j["worst_diameter"]["tile"].is_number_integer());
  CHECK(j["worst_separation"]["pair"].size() == 2);
  CHECK(j["classification"] == "scalable");
  CHECK(j["h"] == 0.01);
}

TEST_CASE("fixture names and argument validation") {
  CHECK(build_platonic_fixture("cube", 0.6).tile_count() == 6);
  CHECK(build_platonic_fixture("octahedron", 0.7).tile_count() == 8);
  CHECK(build_platonic_fixture("dodecahedron", 0.62).tile_count() == 12);
  CHECK_THROWS_AS(build_platonic_fixture("icosahedron", 0.6), std::invalid_argument);
  CHECK_THROWS_AS(build_platonic_fixture(PlatonicSolid::Cube, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_platonic_fixture(PlatonicSolid::Cube, -1.0), std::invalid_argument);
}
