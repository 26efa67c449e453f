#include "spheretile/hexgrid.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "doctest.h"

using namespace spheretile;

TEST_CASE("neighbors are the six fixed offsets in order") {
  auto n = neighbors({0, 0});
  CHECK(n[0] == AxialCoord{1, 0});
  CHECK(n[1] == AxialCoord{1, -1});
  CHECK(n[2] == AxialCoord{0, -1});
  CHECK(n[3] == AxialCoord{-1, 0});
  CHECK(n[4] == AxialCoord{-1, 1});
  CHECK(n[5] == AxialCoord{0, 1});

  auto n2 = neighbors({2, 3});
  for (std::size_t i = 0; i < 6; ++i) {
    AxialCoord d{n2[i].q - 2, n2[i].r - 3};
    CHECK(d == n[i]);
    CHECK(!(n2[i] == AxialCoord{2, 3}));
  }
}

TEST_CASE("isbell_color formula and neighborhood properness") {
  CHECK(isbell_color({0, 0}) == 0);
  CHECK(isbell_color({7, 0}) == 0);
  CHECK(isbell_color({1, 2}) == 0);
  CHECK(isbell_color({-1, 0}) == 6);

  std::set<ColorId> hood{0};
  for (const auto& n : neighbors({0, 0})) hood.insert(isbell_color(n));
  CHECK(hood == std::set<ColorId>{0, 1, 2, 3, 4, 5, 6});

  for (int q = -25; q <= 25; ++q)
    for (int r = -25; r <= 25; ++r)
      for (const auto& n : neighbors({q, r}))
        REQUIRE(isbell_color({q, r}) != isbell_color(n));
}

TEST_CASE("same-color lattice closed under (7,0) and (1,2)") {
  for (int q = -25; q <= 25; ++q)
    for (int r = -25; r <= 25; ++r) {
      ColorId c = isbell_color({q, r});
      REQUIRE(isbell_color({q + 7, r}) == c);
      REQUIRE(isbell_color({q + 1, r + 2}) == c);
    }
}

TEST_CASE("perm_apply convention pinned by the published sequences") {
  std::array<ColorId, 7> id{0, 1, 2, 3, 4, 5, 6};
  CHECK(perm_apply(perm_hex(), id) == std::array<ColorId, 7>{0, 3, 6, 2, 5, 1, 4});
  CHECK(perm_apply(perm_identity(), std::array<ColorId, 7>{3, 1, 4, 1, 5, 9, 2}) ==
        std::array<ColorId, 7>{3, 1, 4, 1, 5, 9, 2});
  CHECK(perm_apply(perm_swap23(), std::array<ColorId, 7>{0, 3, 6, 2, 5, 1, 4}) ==
        std::array<ColorId, 7>{0, 3, 2, 6, 5, 1, 4});
}

TEST_CASE("edge_step reproduces the five-sequence cycle") {
  std::array<ColorId, 7> s{0, 1, 2, 3, 4, 5, 6};
  s = edge_step(s);
  CHECK(s == std::array<ColorId, 7>{0, 3, 2, 6, 5, 1, 4});
  s = edge_step(s);
  CHECK(s == std::array<ColorId, 7>{0, 6, 2, 4, 1, 3, 5});
  s = edge_step(s);
  s = edge_step(s);
  CHECK(s == std::array<ColorId, 7>{0, 5, 2, 1, 6, 4, 3});
  s = edge_step(s);
  CHECK(s == std::array<ColorId, 7>{0, 1, 2, 3, 4, 5, 6});
}

TEST_CASE("perm_apply preserves the multiset of entries") {
  std::array<ColorId, 7> s{5, 5, 0, 1, 3, 3, 3};
  auto t = perm_apply(perm_hex(), s);
  std::multiset<ColorId> ms(s.begin(), s.end()), mt(t.begin(), t.end());
  CHECK(ms == mt);
}

TEST_CASE("perm_compose convention and order of swap23*hex") {
  Perm7 step = perm_compose(perm_swap23(), perm_hex());
  // compose matches nested application on every basis sequence.
  std::array<ColorId, 7> id{0, 1, 2, 3, 4, 5, 6};
  CHECK(perm_apply(step, id) == perm_apply(perm_swap23(), perm_apply(perm_hex(), id)));
  CHECK(perm_order(step) == 5);
  CHECK(perm_order(perm_identity()) == 1);
  CHECK(perm_order(perm_swap23()) == 2);

  CHECK(perm_compose(perm_identity(), perm_hex()) == perm_hex());
  CHECK(perm_compose(perm_hex(), perm_inverse(perm_hex())) == perm_identity());
  CHECK(perm_is_valid(step));
}

TEST_CASE("rot60 maps (1,0) to (0,1) and triples isbell_color") {
  CHECK(rot60({1, 0}) == AxialCoord{0, 1});
  CHECK(rot60_pow({1, 0}, 6) == AxialCoord{1, 0});
  for (int q = -10; q <= 10; ++q)
    for (int r = -10; r <= 10; ++r) {
      AxialCoord c{q, r};
      REQUIRE(isbell_color(rot60(c)) == (3 * isbell_color(c)) % 7);
    }
}

TEST_CASE("hex_distance basics") {
  CHECK(hex_distance({0, 0}, {0, 0}) == 0);
  CHECK(hex_distance({0, 0}, {1, 0}) == 1);
  CHECK(hex_distance({0, 0}, {1, 2}) == 3);
  CHECK(hex_distance({0, 0}, {-2, 3}) == 3);
}

TEST_CASE("separation ratio equals sqrt(7)/2 and is window-stable") {
  double expected = std::sqrt(7.0) / 2.0;
  double r10 = isbell_separation_ratio(10);
  CHECK(std::abs(r10 - expected) < 1e-9);
  CHECK(isbell_separation_ratio(8) == r10);
  CHECK(isbell_separation_ratio(20) == r10);
  CHECK_THROWS_AS(isbell_separation_ratio(3), std::invalid_argument);
}

TEST_CASE("hexagon geometry helpers are consistent") {
  // Adjacent tiles share a boundary: distance 0. Corner-to-corner pair (1,2)
  // for unit-diameter tiles sits at sqrt(7)/2.
  CHECK(hex_pair_distance({0, 0}, {1, 0}, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(hex_pair_distance({0, 0}, {1, 2}, 1.0) ==
        doctest::Approx(std::sqrt(7.0) / 2.0).epsilon(1e-12));
  // Ratio is scale-invariant.
  double d5 = hex_pair_distance({0, 0}, {1, 2}, 5.0) / 5.0;
  CHECK(d5 == doctest::Approx(std::sqrt(7.0) / 2.0).epsilon(1e-12));
}
