#include "spheretile/coloring.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace spheretile {

namespace {

// Solved per-face permutation tables. Color 0 is the icovertex-free color;
// six colors land on two antipodal icovertices each. The family table is
// independent of m; the m=2 (mod 7) and m=6 (mod 7) tables cover the
// GP(m,0) fixtures. Face and vertex ids refer to the fixed icosahedron
// ordering produced by build_ico_net.
constexpr int kFamilyPi[20][7] = {
    {6, 1, 2, 3, 4, 5, 0}, {6, 3, 4, 2, 5, 1, 0}, {6, 5, 3, 1, 2, 4, 0}, {6, 4, 1, 5, 3, 2, 0},
    {6, 2, 5, 4, 1, 3, 0}, {3, 1, 5, 4, 2, 6, 0}, {3, 5, 6, 2, 1, 4, 0}, {3, 4, 2, 5, 6, 1, 0},
    {1, 5, 4, 2, 3, 6, 0}, {1, 2, 3, 4, 6, 5, 0}, {5, 3, 1, 2, 6, 4, 0}, {5, 4, 2, 3, 1, 6, 0},
    {2, 5, 4, 1, 6, 3, 0}, {2, 1, 6, 4, 3, 5, 0}, {4, 6, 3, 5, 1, 2, 0}, {4, 2, 5, 6, 3, 1, 0},
    {5, 6, 2, 1, 3, 4, 0}, {2, 3, 4, 6, 1, 5, 0}, {4, 1, 5, 3, 6, 2, 0}, {6, 3, 5, 1, 4, 2, 0}};
constexpr int kFamilyVertexColor[12] = {6, 3, 1, 5, 2, 4, 5, 2, 4, 6, 3, 1};

constexpr int kTwoModSevenPi[20][7] = {
    {1, 0, 2, 3, 4, 5, 6}, {1, 0, 6, 2, 5, 3, 4}, {1, 0, 3, 5, 6, 4, 2}, {1, 0, 5, 4, 2, 6, 3},
    {1, 0, 4, 6, 3, 2, 5}, {4, 0, 1, 5, 3, 2, 6}, {4, 0, 3, 6, 5, 1, 2}, {4, 0, 6, 1, 2, 5, 3},
    {6, 0, 1, 4, 5, 3, 2}, {6, 0, 2, 1, 3, 4, 5}, {2, 0, 3, 1, 5, 6, 4}, {2, 0, 1, 6, 4, 5, 3},
    {5, 0, 4, 1, 6, 3, 2}, {5, 0, 2, 4, 3, 1, 6}, {3, 0, 5, 6, 2, 4, 1}, {3, 0, 6, 4, 1, 2, 5},
    {2, 0, 3, 4, 6, 5, 1}, {5, 0, 2, 6, 1, 3, 4}, {3, 0, 5, 1, 4, 2, 6}, {1, 0, 5, 3, 6, 2, 4}};
constexpr int kTwoModSevenVertexColor[12] = {1, 4, 6, 2, 5, 3, 2, 5, 3, 1, 4, 6};

constexpr int kPow3Mod7[6] = {1, 3, 2, 6, 4, 5};

// Base-color map across the seam f -> g: base values transform affinely
// under the lattice transition p_g = rot60^k(p_f) + t.
ColorId seam_base_map(const CombinatorialTiling& t, int f, int g, ColorId b) {
  const SeamTransition& tr = t.transition(f, g);
  return static_cast<ColorId>((kPow3Mod7[tr.k] * b + isbell_color(tr.t)) % 7);
}

Perm7 invert_table(const Perm7& p) { return perm_inverse(p); }

void assign_tile_colors(const CombinatorialTiling& t, GlobalColoring& g) {
  g.tile_colors.resize(t.tiles.size());
  for (std::size_t i = 0; i < t.tiles.size(); ++i) {
    const auto& tile = t.tiles[i];
    ColorId base = isbell_color(tile.coord);
    g.tile_colors[i] =
        g.face_perm[static_cast<std::size_t>(tile.home_face)].image[static_cast<std::size_t>(base)];
  }
  for (int v = 0; v < 12; ++v)
    g.vertex_colors[static_cast<std::size_t>(v)] = g.tile_colors[static_cast<std::size_t>(v)];
}

double point_segment_dist(const Vec3& p, const Vec3& a, const Vec3& b) {
  Vec3 d = b - a;
  double tnum = dot(p - a, d);
  double tden = dot(d, d);
  double s = tden > 0 ? std::clamp(tnum / tden, 0.0, 1.0) : 0.0;
  return dist(p, a + d * s);
}

// Same-color tile pairs at mesh distance 1 or 2, grouped by nearest icoedge.
void scan_conflicts(const CombinatorialTiling& t, const GlobalColoring& g, MismatchReport& rep) {
  std::set<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < t.tiles.size(); ++i) {
    ColorId c = g.tile_colors[i];
    std::set<int> near;
    for (int n : t.tiles[i].ring) {
      if (n > static_cast<int>(i)) near.insert(n);
      for (int n2 : t.tiles[static_cast<std::size_t>(n)].ring)
        if (n2 > static_cast<int>(i)) near.insert(n2);
    }
    for (int other : near)
      if (g.tile_colors[static_cast<std::size_t>(other)] == c)
        pairs.insert({static_cast<int>(i), other});
  }
  for (const auto& [a, b] : pairs) {
    Vec3 mid = (t.tiles[static_cast<std::size_t>(a)].center +
                t.tiles[static_cast<std::size_t>(b)].center) /
               2.0;
    int best_edge = 0;
    double best = 1e18;
    for (int e = 0; e < 30; ++e) {
      const auto& ed = t.net.edges[static_cast<std::size_t>(e)];
      double d = point_segment_dist(mid, t.net.vertex_pos[static_cast<std::size_t>(ed.v0)],
                                    t.net.vertex_pos[static_cast<std::size_t>(ed.v1)]);
      if (d < best) {
        best = d;
        best_edge = e;
      }
    }
    rep.edge_conflicts[static_cast<std::size_t>(best_edge)].emplace_back(a, b);
  }
  for (auto& v : rep.edge_conflicts) std::sort(v.begin(), v.end());
}

int count_mismatched_edges(const CombinatorialTiling& t, const GlobalColoring& g) {
  int count = 0;
  for (int e = 0; e < 30; ++e) {
    const auto& ed = t.net.edges[static_cast<std::size_t>(e)];
    if (!(seam_value_map(t, g, ed.f0, ed.f1) == perm_identity())) ++count;
  }
  return count;
}

}  // namespace

Perm7 seam_value_map(const CombinatorialTiling& t, const GlobalColoring& g, int f, int gface) {
  Perm7 out;
  Perm7 inv_f = invert_table(g.face_perm[static_cast<std::size_t>(f)]);
  for (int c = 0; c < 7; ++c) {
    ColorId b = inv_f.image[static_cast<std::size_t>(c)];
    ColorId b2 = seam_base_map(t, f, gface, b);
    out.image[static_cast<std::size_t>(c)] =
        g.face_perm[static_cast<std::size_t>(gface)].image[static_cast<std::size_t>(b2)];
  }
  return out;
}

std::pair<GlobalColoring, MismatchReport> color_naive(const CombinatorialTiling& t) {
  GlobalColoring g;
  // Breadth-first tree from face 0; across each tree seam the coloring is
  // continued exactly (the seam value map becomes the identity there).
  std::array<bool, 20> done{};
  g.face_perm[0] = perm_identity();
  done[0] = true;
  std::deque<int> queue{0};
  while (!queue.empty()) {
    int f = queue.front();
    queue.pop_front();
    for (int h = 0; h < 20; ++h) {
      if (done[static_cast<std::size_t>(h)] || t.trans[static_cast<std::size_t>(f)][static_cast<std::size_t>(h)].k < 0)
        continue;
      // Choose pi_h with pi_h(L_fh(b)) = pi_f(b) for all base values b.
      for (int b = 0; b < 7; ++b) {
        ColorId b2 = seam_base_map(t, f, h, b);
        g.face_perm[static_cast<std::size_t>(h)].image[static_cast<std::size_t>(b2)] =
            g.face_perm[static_cast<std::size_t>(f)].image[static_cast<std::size_t>(b)];
      }
      done[static_cast<std::size_t>(h)] = true;
      queue.push_back(h);
    }
  }

  assign_tile_colors(t, g);

  MismatchReport rep;
  rep.mismatched_edges = count_mismatched_edges(t, g);
  for (int e = 0; e < 30; ++e) {
    const auto& ed = t.net.edges[static_cast<std::size_t>(e)];
    Perm7 tau = seam_value_map(t, g, ed.f0, ed.f1);
    int moved = 0;
    for (int c = 0; c < 7; ++c) moved += tau.image[static_cast<std::size_t>(c)] != c;
    if (moved == 2) {
      ColorId a = -1, b = -1;
      for (int c = 0; c < 7; ++c)
        if (tau.image[static_cast<std::size_t>(c)] != c) (a < 0 ? a : b) = c;
      g.edge_swaps[static_cast<std::size_t>(e)] = std::pair<ColorId, ColorId>{a, b};
    }
  }
  scan_conflicts(t, g, rep);
  return {g, rep};
}

GlobalColoring color_distributed(const CombinatorialTiling& t) {
  const int(*pi)[7] = nullptr;
  const int* vcolor = nullptr;
  if (t.spec.family_m.has_value()) {
    pi = kFamilyPi;
    vcolor = kFamilyVertexColor;
  } else if (t.spec.gn == 0) {
    int residue = t.spec.gm % 7;
    if (residue == 2) {
      pi = kTwoModSevenPi;
      vcolor = kTwoModSevenVertexColor;
    } else if (residue == 0) {
      throw std::invalid_argument(
          "color_distributed: GP(m,0) with m divisible by 7 admits no distributed coloring "
          "(the seam base-color step degenerates)");
    } else {
      throw std::invalid_argument(
          "color_distributed: GP(m,0) supported only for m = 2 (mod 7); other residues either "
          "admit no seam solution or only improper ones");
    }
  } else {
    throw std::invalid_argument(
        "color_distributed: spec must be GP(4m,2m+1) or a supported GP(m,0) fixture");
  }

  GlobalColoring g;
  for (int f = 0; f < 20; ++f)
    for (int c = 0; c < 7; ++c)
      g.face_perm[static_cast<std::size_t>(f)].image[static_cast<std::size_t>(c)] =
          pi[f][c];
  assign_tile_colors(t, g);

  // Every host chart must agree on each pentagon's color, and that color must
  // match the table.
  for (int v = 0; v < 12; ++v) {
    for (const auto& [f, a] : t.pentagon_addrs(v)) {
      ColorId c = g.face_perm[static_cast<std::size_t>(f)]
                      .image[static_cast<std::size_t>(isbell_color(a))];
      if (c != vcolor[v])
        throw ClosureFailure("color_distributed: pentagon color differs between charts");
    }
    g.vertex_colors[static_cast<std::size_t>(v)] = vcolor[v];
  }

  // Seam maps must each be a single transposition; record the swapped pair.
  for (int e = 0; e < 30; ++e) {
    const auto& ed = t.net.edges[static_cast<std::size_t>(e)];
    Perm7 tau = seam_value_map(t, g, ed.f0, ed.f1);
    Perm7 tau_back = seam_value_map(t, g, ed.f1, ed.f0);
    if (!(perm_compose(tau, tau_back) == perm_identity()))
      throw ClosureFailure("color_distributed: seam maps are not mutually inverse");
    ColorId a = -1, b = -1;
    int moved = 0;
    for (int c = 0; c < 7; ++c)
      if (tau.image[static_cast<std::size_t>(c)] != c) {
        ++moved;
        (a < 0 ? a : b) = c;
      }
    if (moved != 2 || tau.image[static_cast<std::size_t>(a)] != b)
      throw ClosureFailure("color_distributed: seam map is not a single transposition");
    g.edge_swaps[static_cast<std::size_t>(e)] = std::pair<ColorId, ColorId>{a, b};
  }

  // Five-step cycle closure. Crossing a seam acts on vertex-local color
  // readings as a 60-degree chart rotation followed by the seam's swap;
  // factoring the pure rotation out of each crossing, the five steps around
  // an icovertex must compose to the identity.
  for (int v = 0; v < 12; ++v) {
    std::array<AxialCoord, 20> corner{};
    for (const auto& [f, a] : t.pentagon_addrs(v)) corner[static_cast<std::size_t>(f)] = a;
    const auto& ring = t.net.vertex_faces[static_cast<std::size_t>(v)];
    Perm7 acc = perm_identity();
    for (int s = 0; s < 5; ++s) {
      int f = ring[static_cast<std::size_t>(s)];
      int gf = ring[static_cast<std::size_t>((s + 1) % 5)];
      Perm7 tau = seam_value_map(t, g, f, gf);
      // Value-space 60-degree rotation about the corner in chart gf, with
      // the sense matching the counterclockwise ring traversal: on base
      // values, b -> 3*(b - bc) + bc.
      const Perm7& pg = g.face_perm[static_cast<std::size_t>(gf)];
      Perm7 pginv = perm_inverse(pg);
      int bc = isbell_color(corner[static_cast<std::size_t>(gf)]);
      Perm7 unrot;
      for (int c = 0; c < 7; ++c) {
        int b = pginv.image[static_cast<std::size_t>(c)];
        int b2 = (3 * ((b - bc + 7) % 7) + bc) % 7;
        unrot.image[static_cast<std::size_t>(c)] = pg.image[static_cast<std::size_t>(b2)];
      }
      acc = perm_compose(acc, perm_compose(tau, unrot));
    }
    if (!(acc == perm_identity()))
      throw ClosureFailure("color_distributed: icovertex five-step cycle does not close");
  }
  return g;
}

MismatchReport combinatorial_conflicts(const CombinatorialTiling& t, const GlobalColoring& g) {
  MismatchReport rep;
  rep.mismatched_edges = count_mismatched_edges(t, g);
  scan_conflicts(t, g, rep);
  return rep;
}

}  // namespace spheretile
