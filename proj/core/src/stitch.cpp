#include "spheretile/stitch.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <fstream>

#include "json.hpp"

namespace spheretile {
namespace {

constexpr const char* kBuiltinTemplateJson = R"json(
{
  "format": "stitch-template/1",
  "lattice": "axial",
  "period": [-2, 3],
  "roles": {
    "core": [0, 0],
    "side_a": [1, 0],
    "side_b": [-1, 0],
    "flank_a_up": [0, 1],
    "flank_a_down": [1, -1],
    "flank_b_up": [-1, 1],
    "flank_b_down": [0, -1],
    "diag_a": [0, 2],
    "diag_b": [-2, 1],
    "outer_a": [0, 3],
    "outer_b": [-2, 0]
  },
  "contractions": [
    { "pair": ["core", "side_a"], "junction": "j_a", "scope": "stitch" },
    { "pair": ["core", "side_b"], "junction": "j_b", "scope": "stitch" },
    { "pair": ["flank_a_up", "flank_a_down@next"], "junction": "j_gap_a", "scope": "gap" },
    { "pair": ["flank_b_up", "flank_b_down@next"], "junction": "j_gap_b", "scope": "gap" }
  ],
  "chords": [
    { "tile": "core", "ends": ["j_a", "j_b"], "between": ["side_a", "side_b"] },
    { "tile": "flank_a_up", "ends": ["j_a", "j_gap_a"], "between": ["flank_a_down", "flank_a_down@next"] },
    { "tile": "flank_b_up", "ends": ["j_b", "j_gap_b"], "between": ["flank_b_down", "flank_b_down@next"] },
    { "tile": "flank_a_down@next", "ends": ["j_gap_a", "j_a@next"], "between": ["flank_a_up", "flank_a_up@next"] },
    { "tile": "flank_b_down@next", "ends": ["j_gap_b", "j_b@next"], "between": ["flank_b_up", "flank_b_up@next"] }
  ],
  "arcs": [
    { "segment": ["flank_b_up", "diag_b"], "center": "j_gap_a", "opposite": "diag_a" },
    { "segment": ["diag_a", "outer_a"], "center": "j_gap_a", "opposite": "flank_b_up" },
    { "segment": ["diag_b", "outer_b"], "center": "j_gap_b", "opposite": "flank_a_down@next" },
    { "segment": ["flank_a_down@next", "diag_a"], "center": "j_gap_b", "opposite": "diag_b" }
  ],
  "unscalable": [
    "core",
    "flank_a_up",
    "flank_b_up",
    "diag_a",
    "diag_b",
    "flank_a_down@next",
    "flank_b_down@next"
  ],
  "symmetry": { "type": "half_turn", "center": "core", "cell_map": "negate" }
}
)json";

AxialCoord parse_axial(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2)
    throw std::invalid_argument("stitch template: axial coordinate must be a 2-array");
  return AxialCoord{j[0].get<int>(), j[1].get<int>()};
}

StitchTemplate parse_template(const nlohmann::json& j) {
  if (j.value("format", "") != std::string("stitch-template/1"))
    throw std::invalid_argument("stitch template: unknown format tag");
  if (j.value("lattice", "") != std::string("axial"))
    throw std::invalid_argument("stitch template: unknown lattice tag");
  StitchTemplate t;
  t.period = parse_axial(j.at("period"));
  for (const auto& [name, off] : j.at("roles").items()) t.roles[name] = parse_axial(off);
  for (const auto& c : j.at("contractions")) {
    StitchTemplate::Contraction out;
    out.a = c.at("pair").at(0).get<std::string>();
    out.b = c.at("pair").at(1).get<std::string>();
    out.junction = c.at("junction").get<std::string>();
    const std::string scope = c.at("scope").get<std::string>();
    if (scope != "stitch" && scope != "gap")
      throw std::invalid_argument("stitch template: contraction scope must be stitch or gap");
    out.gap_scope = scope == "gap";
    t.contractions.push_back(std::move(out));
  }
  for (const auto& c : j.at("chords")) {
    StitchTemplate::ChordSpec out;
    out.tile = c.at("tile").get<std::string>();
    out.ends = {c.at("ends").at(0).get<std::string>(), c.at("ends").at(1).get<std::string>()};
    out.between = {c.at("between").at(0).get<std::string>(),
                   c.at("between").at(1).get<std::string>()};
    t.chords.push_back(std::move(out));
  }
  for (const auto& a : j.at("arcs")) {
    StitchTemplate::ArcSpec out;
    out.segment = {a.at("segment").at(0).get<std::string>(),
                   a.at("segment").at(1).get<std::string>()};
    out.center = a.at("center").get<std::string>();
    out.opposite = a.at("opposite").get<std::string>();
    t.arcs.push_back(std::move(out));
  }
  for (const auto& u : j.at("unscalable")) t.unscalable.push_back(u.get<std::string>());
  return t;
}

/// Splits "name@next" into (name, is_next).
std::pair<std::string, bool> split_next(const std::string& role) {
  const std::string suffix = "@next";
  if (role.size() > suffix.size() &&
      role.compare(role.size() - suffix.size(), suffix.size(), suffix) == 0)
    return {role.substr(0, role.size() - suffix.size()), true};
  return {role, false};
}

bool is_neighbor_offset(const AxialCoord& d) {
  for (const AxialCoord& n : neighbors(AxialCoord{0, 0}))
    if (n == d) return true;
  return false;
}

struct JunctionLabelInfo {
  bool gap_scope = false;
};

std::map<std::string, JunctionLabelInfo> junction_labels(const StitchTemplate& t) {
  std::map<std::string, JunctionLabelInfo> out;
  for (const auto& c : t.contractions) out[c.junction] = {c.gap_scope};
  return out;
}

Vec2 axial_embed(const AxialCoord& c) {
  return {c.q + 0.5 * c.r, 0.8660254037844386 * c.r};
}

double point_segment_dist2d(const Vec2& p, const Vec2& a, const Vec2& b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double wx = p.x - a.x, wy = p.y - a.y;
  const double vv = vx * vx + vy * vy;
  double s = vv > 0 ? (wx * vx + wy * vy) / vv : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  const double dx = wx - s * vx, dy = wy - s * vy;
  return std::sqrt(dx * dx + dy * dy);
}

/// Lattice addresses near one icoedge, in the chart of its lower face.
struct EdgeRoster {
  std::map<AxialCoord, int> tile_of_pos;
  std::map<int, AxialCoord> pos_of_tile;
};

EdgeRoster build_edge_roster(const CombinatorialTiling& t, int edge_id) {
  const auto& e = t.net.edges[static_cast<std::size_t>(edge_id)];
  const int f = e.f0;
  AxialCoord aP{}, aQ{};
  bool gotP = false, gotQ = false;
  for (const auto& [face, addr] : t.pentagon_addrs(e.v0))
    if (face == f) { aP = addr; gotP = true; }
  for (const auto& [face, addr] : t.pentagon_addrs(e.v1))
    if (face == f) { aQ = addr; gotQ = true; }
  if (!gotP || !gotQ) throw std::logic_error("edge roster: icoedge endpoints not in chart");

  EdgeRoster roster;
  const Vec2 eP = axial_embed(aP), eQ = axial_embed(aQ);
  const int qlo = std::min(aP.q, aQ.q) - 6, qhi = std::max(aP.q, aQ.q) + 6;
  const int rlo = std::min(aP.r, aQ.r) - 6, rhi = std::max(aP.r, aQ.r) + 6;
  for (int q = qlo; q <= qhi; ++q) {
    for (int r = rlo; r <= rhi; ++r) {
      const AxialCoord p{q, r};
      if (point_segment_dist2d(axial_embed(p), eP, eQ) > 4.5) continue;
      const int tile = t.tile_at(f, p);
      if (tile < 0) continue;
      roster.tile_of_pos[p] = tile;
      if (!roster.pos_of_tile.count(tile)) roster.pos_of_tile[tile] = p;
    }
  }
  return roster;
}

[[noreturn]] void mismatch(const std::string& msg) { throw TemplateMismatch("apply_stitches: " + msg); }

/// State shared while instantiating the template over every icoedge.
struct SurgeryState {
  const CombinatorialTiling& t;
  const GlobalColoring& g;
  const StitchTemplate& tmpl;
  DeformedTiling& d;
  // (edge, stitch index, label) -> junction id, likewise for gaps.
  std::map<std::tuple<int, int, std::string>, int> stitch_junc;
  std::map<std::tuple<int, int, std::string>, int> gap_junc;
  // Per edge: roster, frame rotation, core lattice addresses in stitch order.
  std::array<EdgeRoster, 30> rosters;
  std::array<int, 30> frame_k{};
  std::array<std::vector<AxialCoord>, 30> core_addrs;

  int contract(int tile_a, int tile_b, int edge, int stitch, bool gap) {
    std::vector<int> shared;
    for (int ca : t.tiles[static_cast<std::size_t>(tile_a)].corners)
      for (int cb : t.tiles[static_cast<std::size_t>(tile_b)].corners)
        if (ca == cb) shared.push_back(ca);
    if (shared.size() != 2) mismatch("contraction pair does not share exactly two corners");
    for (int c : shared)
      if (d.corner_junction[static_cast<std::size_t>(c)] >= 0)
        mismatch("contraction overlaps an existing junction");
    std::set<int> around;
    for (int c : shared)
      for (int q : t.corner_tiles[static_cast<std::size_t>(c)]) around.insert(q);
    if (around.size() != 4) mismatch("junction is not 4-valent");
    DeformedTiling::Junction j;
    j.corners = {shared[0], shared[1]};
    int idx = 0;
    for (int q : around) j.tiles[static_cast<std::size_t>(idx++)] = q;
    j.icoedge = edge;
    j.stitch = stitch;
    j.gap = gap;
    const int id = static_cast<int>(d.junctions.size());
    d.junctions.push_back(j);
    d.corner_junction[static_cast<std::size_t>(shared[0])] = id;
    d.corner_junction[static_cast<std::size_t>(shared[1])] = id;
    return id;
  }

  /// Lattice address of a role for stitch `i` of `edge` (@next already split
  /// off by the caller as an index shift).
  AxialCoord role_addr(int edge, int i, const std::string& base_role) const {
    const auto it = tmpl.roles.find(base_role);
    if (it == tmpl.roles.end())
      throw std::invalid_argument("stitch template references unknown role " + base_role);
    const auto& cores = core_addrs[static_cast<std::size_t>(edge)];
    return cores[static_cast<std::size_t>(i)] +
           rot60_pow(it->second, frame_k[static_cast<std::size_t>(edge)]);
  }

  int role_tile(int edge, int i, const std::string& role) const {
    const auto [base, next] = split_next(role);
    const AxialCoord a = role_addr(edge, next ? i + 1 : i, base);
    const auto& roster = rosters[static_cast<std::size_t>(edge)];
    const auto it = roster.tile_of_pos.find(a);
    if (it == roster.tile_of_pos.end()) mismatch("role cell " + role + " not found near icoedge");
    return it->second;
  }

  int junction_id(int edge, int i, const std::string& label_in) const {
    const auto [label, next] = split_next(label_in);
    const auto& labels = stitch_junc;
    auto it = labels.find({edge, next ? i + 1 : i, label});
    if (it != labels.end()) return it->second;
    auto git = gap_junc.find({edge, i, label});
    if (git != gap_junc.end()) return git->second;
    mismatch("junction label " + label_in + " was never instantiated");
  }
};

struct DiscoveredRecords {
  // (host, jmin, jmax) -> index into d.chords
  std::map<std::tuple<int, int, int>, int> chords;
  // (tile_min, tile_max, junction node) -> index into d.arcs
  std::map<std::tuple<int, int, int>, int> arcs;
};

}  // namespace

StitchTemplate load_stitch_template(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("stitch template: cannot open " + path);
  nlohmann::json j;
  in >> j;
  StitchTemplate t = parse_template(j);
  validate_stitch_template(t);
  return t;
}

StitchTemplate default_stitch_template() {
  StitchTemplate t = parse_template(nlohmann::json::parse(kBuiltinTemplateJson));
  validate_stitch_template(t);
  return t;
}

void validate_stitch_template(const StitchTemplate& t) {
  auto fail = [](const std::string& m) { throw std::invalid_argument("stitch template: " + m); };
  if (t.period == AxialCoord{0, 0}) fail("period must be nonzero");
  if (!t.roles.count("core") || !(t.roles.at("core") == AxialCoord{0, 0}))
    fail("role core must exist at the origin");
  auto resolve = [&](const std::string& role) -> AxialCoord {
    const auto [base, next] = split_next(role);
    const auto it = t.roles.find(base);
    if (it == t.roles.end()) fail("unknown role " + role);
    return next ? it->second + t.period : it->second;
  };
  const auto labels = junction_labels(t);
  for (const auto& c : t.contractions) {
    if (!is_neighbor_offset(resolve(c.b) - resolve(c.a)))
      fail("contraction pair " + c.a + "," + c.b + " is not lattice-adjacent");
  }
  auto check_label = [&](const std::string& l) {
    if (!labels.count(split_next(l).first)) fail("unknown junction label " + l);
  };
  for (const auto& c : t.chords) {
    resolve(c.tile);
    resolve(c.between[0]);
    resolve(c.between[1]);
    check_label(c.ends[0]);
    check_label(c.ends[1]);
  }
  for (const auto& a : t.arcs) {
    resolve(a.segment[0]);
    resolve(a.segment[1]);
    resolve(a.opposite);
    check_label(a.center);
  }
  for (const auto& u : t.unscalable) resolve(u);
  // The half-turn about the core must map the role set onto itself up to
  // period shifts (labels may swap).
  std::set<AxialCoord> shapes;
  for (const auto& [name, off] : t.roles) {
    shapes.insert(off);
    shapes.insert(off + t.period);
    shapes.insert(off - t.period);
  }
  for (const auto& [name, off] : t.roles)
    if (!shapes.count(-off)) fail("role " + name + " breaks the half-turn symmetry");
}

std::vector<Vec3> DeformedTiling::node_positions() const {
  std::vector<Vec3> pos(static_cast<std::size_t>(node_count()));
  for (std::size_t c = 0; c < base.corner_pos.size(); ++c) pos[c] = base.corner_pos[c];
  for (std::size_t j = 0; j < junctions.size(); ++j) {
    const auto& jn = junctions[j];
    pos[base.corner_pos.size() + j] =
        (base.corner_pos[static_cast<std::size_t>(jn.corners[0])] +
         base.corner_pos[static_cast<std::size_t>(jn.corners[1])]) *
        0.5;
  }
  return pos;
}

std::vector<int> DeformedTiling::contact_nodes(int a, int b) const {
  const auto& pa = tile_nodes[static_cast<std::size_t>(a)];
  const auto& pb = tile_nodes[static_cast<std::size_t>(b)];
  std::set<int> inb(pb.begin(), pb.end());
  const int n = static_cast<int>(pa.size());
  // Start after a node not shared with b so the shared run is contiguous.
  int start = -1;
  for (int i = 0; i < n; ++i)
    if (!inb.count(pa[static_cast<std::size_t>(i)])) { start = i; break; }
  std::vector<int> run;
  if (start < 0) return run;
  for (int k = 1; k <= n; ++k) {
    const int node = pa[static_cast<std::size_t>((start + k) % n)];
    if (inb.count(node)) run.push_back(node);
  }
  return run;
}

DeformedTiling apply_stitches(const CombinatorialTiling& t, const GlobalColoring& g,
                              const StitchTemplate& tmpl) {
  validate_stitch_template(tmpl);
  DeformedTiling d;
  d.base = t;
  d.coloring = g;
  d.corner_junction.assign(t.corner_pos.size(), -1);
  d.unscalable.assign(t.tiles.size(), false);
  d.edge_stitches.resize(30);

  const MismatchReport report = combinatorial_conflicts(t, g);
  SurgeryState st{t, g, tmpl, d, {}, {}, {}, {}, {}};

  // --- Per icoedge: anchor the template at the conflict cores and contract.
  for (int e = 0; e < 30; ++e) {
    const auto& conflicts = report.edge_conflicts[static_cast<std::size_t>(e)];
    if (conflicts.empty()) continue;
    st.rosters[static_cast<std::size_t>(e)] = build_edge_roster(t, e);
    const EdgeRoster& roster = st.rosters[static_cast<std::size_t>(e)];
    const auto& edge = t.net.edges[static_cast<std::size_t>(e)];
    const Vec3 vP = t.net.vertex_pos[static_cast<std::size_t>(edge.v0)];
    const Vec3 vQ = t.net.vertex_pos[static_cast<std::size_t>(edge.v1)];
    const Vec3 dir = normalized(vQ - vP);

    struct StitchSeed {
      int core = -1;
      std::array<int, 2> pair{-1, -1};
      double lam = 0.0;
    };
    std::vector<StitchSeed> seeds;
    for (const auto& [a, b] : conflicts) {
      std::vector<int> common;
      for (int x : t.tiles[static_cast<std::size_t>(a)].ring)
        for (int y : t.tiles[static_cast<std::size_t>(b)].ring)
          if (x == y) common.push_back(x);
      if (common.size() != 1) mismatch("conflict pair lacks a unique shared neighbor cell");
      StitchSeed s;
      s.core = common[0];
      s.pair = {a, b};
      s.lam = dot(t.tiles[static_cast<std::size_t>(s.core)].center - vP, dir);
      seeds.push_back(s);
    }
    std::sort(seeds.begin(), seeds.end(),
              [](const StitchSeed& x, const StitchSeed& y) { return x.lam < y.lam; });

    // Frame: the lattice step between consecutive cores must be a rotation of
    // the template period, the same rotation throughout the seam.
    auto addr_of = [&](int tile) -> AxialCoord {
      const auto it = roster.pos_of_tile.find(tile);
      if (it == roster.pos_of_tile.end()) mismatch("stitch cell missing from seam roster");
      return it->second;
    };
    auto& cores = st.core_addrs[static_cast<std::size_t>(e)];
    for (const auto& s : seeds) cores.push_back(addr_of(s.core));
    if (cores.size() < 2) mismatch("a seam must carry at least two stitches");
    const AxialCoord step = cores[1] - cores[0];
    int k = -1;
    for (int kk = 0; kk < 6; ++kk)
      if (rot60_pow(tmpl.period, kk) == step) k = kk;
    if (k < 0) mismatch("stitch spacing does not match the template period");
    st.frame_k[static_cast<std::size_t>(e)] = k;
    for (std::size_t i = 1; i < cores.size(); ++i)
      if (!(cores[i] - cores[i - 1] == step)) mismatch("stitches are not evenly spaced");

    const int n = static_cast<int>(seeds.size());
    for (int i = 0; i < n; ++i) {
      const int sa = st.role_tile(e, i, "side_a");
      const int sb = st.role_tile(e, i, "side_b");
      const auto& pair = seeds[static_cast<std::size_t>(i)].pair;
      const bool direct = (sa == pair[0] && sb == pair[1]);
      const bool flipped = (sa == pair[1] && sb == pair[0]);
      if (!direct && !flipped) mismatch("conflict pair does not sit at the template side cells");
      if (g.tile_colors[static_cast<std::size_t>(sa)] !=
          g.tile_colors[static_cast<std::size_t>(sb)])
        mismatch("side cells of one stitch differ in color");

      DeformedTiling::Stitch rec;
      rec.icoedge = e;
      rec.index = i;
      rec.core = seeds[static_cast<std::size_t>(i)].core;
      rec.sides = {sa, sb};
      for (const auto& c : tmpl.contractions) {
        if (c.gap_scope) continue;
        const int ta = st.role_tile(e, i, c.a);
        const int tb = st.role_tile(e, i, c.b);
        const int id = st.contract(ta, tb, e, i, false);
        st.stitch_junc[{e, i, c.junction}] = id;
        if (c.junction == "j_a") rec.junction_ids[0] = id;
        if (c.junction == "j_b") rec.junction_ids[1] = id;
      }
      const int sid = static_cast<int>(d.stitches.size());
      d.stitches.push_back(rec);
      d.edge_stitches[static_cast<std::size_t>(e)].push_back(sid);
    }
    for (int i = 0; i + 1 < n; ++i) {
      for (const auto& c : tmpl.contractions) {
        if (!c.gap_scope) continue;
        const int ta = st.role_tile(e, i, c.a);
        const int tb = st.role_tile(e, i, c.b);
        const int id = st.contract(ta, tb, e, i, true);
        st.gap_junc[{e, i, c.junction}] = id;
      }
    }
  }

  // --- Post-surgery boundary loops.
  const int corner_count = d.corner_count();
  d.tile_nodes.resize(t.tiles.size());
  for (std::size_t x = 0; x < t.tiles.size(); ++x) {
    std::vector<int> nodes;
    for (int c : t.tiles[x].corners) {
      const int j = d.corner_junction[static_cast<std::size_t>(c)];
      const int node = j >= 0 ? corner_count + j : c;
      if (!nodes.empty() && nodes.back() == node) continue;
      nodes.push_back(node);
    }
    while (nodes.size() > 1 && nodes.front() == nodes.back()) nodes.pop_back();
    d.tile_nodes[x] = std::move(nodes);
  }

  // --- Contact analysis: every remaining too-close same-colored pair must be
  // held apart by a unit chord (two point contacts) or a unit arc (one point
  // contact against a shared boundary). Two positive-measure contacts with
  // the same color cannot be fixed and are an error, as is one boundary
  // demanded as arcs about two different centers.
  std::map<int, std::vector<int>> node_tiles;
  for (std::size_t x = 0; x < d.tile_nodes.size(); ++x)
    for (int node : d.tile_nodes[x]) node_tiles[node].push_back(static_cast<int>(x));

  DiscoveredRecords found;
  std::map<std::pair<int, int>, std::set<int>> arc_demands;
  std::vector<std::pair<int, int>> double_positive;
  for (std::size_t cid = 0; cid < d.tile_nodes.size(); ++cid) {
    std::map<int, std::vector<int>> contact;  // neighbor tile -> shared nodes
    for (int node : d.tile_nodes[cid])
      for (int other : node_tiles[node])
        if (other != static_cast<int>(cid)) contact[other].push_back(node);
    std::map<ColorId, std::vector<int>> by_color;
    for (const auto& [other, nodes] : contact)
      by_color[g.tile_colors[static_cast<std::size_t>(other)]].push_back(other);
    for (const auto& [col, members] : by_color) {
      if (members.size() < 2) continue;
      for (std::size_t i = 0; i < members.size(); ++i) {
        for (std::size_t j = i + 1; j < members.size(); ++j) {
          const int A = members[i], B = members[j];
          const bool posA = contact[A].size() >= 2, posB = contact[B].size() >= 2;
          if (posA && posB) {
            double_positive.emplace_back(A, B);
          } else if (!posA && !posB) {
            const int ja = contact[A][0], jb = contact[B][0];
            if (ja < corner_count || jb < corner_count)
              mismatch("point contact away from a junction");
            DeformedTiling::UnitChord rec;
            rec.host_tile = static_cast<int>(cid);
            rec.j0 = std::min(ja, jb);
            rec.j1 = std::max(ja, jb);
            rec.separated = {ja <= jb ? A : B, ja <= jb ? B : A};
            found.chords[{rec.host_tile, rec.j0, rec.j1}] = static_cast<int>(d.chords.size());
            d.chords.push_back(rec);
          } else {
            const int point_cell = posA ? B : A;
            const int positive = posA ? A : B;
            const int jn = contact[point_cell][0];
            if (jn < corner_count) mismatch("point contact away from a junction");
            DeformedTiling::UnitArc rec;
            rec.host_tile = static_cast<int>(cid);
            rec.neighbor = positive;
            rec.junction = jn;
            rec.point_cell = point_cell;
            const auto key = std::make_tuple(std::min<int>(static_cast<int>(cid), positive),
                                             std::max<int>(static_cast<int>(cid), positive), jn);
            if (!found.arcs.count(key)) {
              found.arcs[key] = static_cast<int>(d.arcs.size());
              d.arcs.push_back(rec);
            }
            arc_demands[{std::min<int>(static_cast<int>(cid), positive),
                         std::max<int>(static_cast<int>(cid), positive)}]
                .insert(jn);
          }
        }
      }
    }
  }
  if (!double_positive.empty()) {
    std::ostringstream os;
    os << "apply_stitches: " << double_positive.size()
       << " same-colored pair(s) both have positive-measure contact with one tile; first pair "
       << double_positive[0].first << "," << double_positive[0].second;
    throw TemplateMismatch(os.str());
  }
  for (const auto& [boundary, centers] : arc_demands)
    if (centers.size() > 1)
      mismatch("one shared boundary is demanded as unit arcs about two different centers");

  for (const auto& rec : d.chords) d.unscalable[static_cast<std::size_t>(rec.host_tile)] = true;
  for (const auto& rec : d.arcs) d.unscalable[static_cast<std::size_t>(rec.host_tile)] = true;

  // --- Cross-check: every record the template predicts must have been
  // discovered, with matching junctions and protected cells.
  for (int e = 0; e < 30; ++e) {
    const auto& stitch_ids = d.edge_stitches[static_cast<std::size_t>(e)];
    const int n = static_cast<int>(stitch_ids.size());
    if (n == 0) continue;
    auto has_next = [](std::initializer_list<std::string> names) {
      for (const auto& s : names)
        if (split_next(s).second) return true;
      return false;
    };
    const auto labels = junction_labels(tmpl);
    for (const auto& spec : tmpl.chords) {
      const bool gap_scoped = has_next({spec.tile, spec.ends[0], spec.ends[1], spec.between[0],
                                        spec.between[1]}) ||
                              labels.at(split_next(spec.ends[0]).first).gap_scope ||
                              labels.at(split_next(spec.ends[1]).first).gap_scope;
      const int count = gap_scoped ? n - 1 : n;
      for (int i = 0; i < count; ++i) {
        const int host = st.role_tile(e, i, spec.tile);
        const int j0 = st.junction_id(e, i, spec.ends[0]);
        const int j1 = st.junction_id(e, i, spec.ends[1]);
        const int n0 = corner_count + std::min(j0, j1), n1 = corner_count + std::max(j0, j1);
        const auto it = found.chords.find({host, n0, n1});
        if (it == found.chords.end()) mismatch("template chord missing after surgery");
        const auto& rec = d.chords[static_cast<std::size_t>(it->second)];
        const int b0 = st.role_tile(e, i, spec.between[0]);
        const int b1 = st.role_tile(e, i, spec.between[1]);
        if (!((rec.separated[0] == b0 && rec.separated[1] == b1) ||
              (rec.separated[0] == b1 && rec.separated[1] == b0)))
          mismatch("template chord protects unexpected cells");
      }
    }
    for (const auto& spec : tmpl.arcs) {
      const bool gap_scoped = has_next({spec.segment[0], spec.segment[1], spec.opposite}) ||
                              labels.at(split_next(spec.center).first).gap_scope;
      const int count = gap_scoped ? n - 1 : n;
      for (int i = 0; i < count; ++i) {
        const int s0 = st.role_tile(e, i, spec.segment[0]);
        const int s1 = st.role_tile(e, i, spec.segment[1]);
        const int jn = corner_count + st.junction_id(e, i, spec.center);
        const auto it = found.arcs.find({std::min(s0, s1), std::max(s0, s1), jn});
        if (it == found.arcs.end()) mismatch("template arc missing after surgery");
        const auto& rec = d.arcs[static_cast<std::size_t>(it->second)];
        if (rec.point_cell != st.role_tile(e, i, spec.opposite))
          mismatch("template arc protects an unexpected cell");
      }
    }
    for (const auto& role : tmpl.unscalable) {
      const bool gap_scoped = split_next(role).second;
      const int count = gap_scoped ? n - 1 : n;
      for (int i = 0; i < count; ++i)
        if (!d.unscalable[static_cast<std::size_t>(st.role_tile(e, i, role))])
          mismatch("template-tagged cell carries no record after surgery");
    }
  }

  // --- Stitch windows: a record host joins the window of every stitch whose
  // own junction its records reference; hosts whose records only touch gap
  // junctions join the nearer of the gap's two stitches. Hosts next to an
  // icovertex reference the end stitches of two seams and join both windows.
  d.stitch_windows.assign(d.stitches.size(), {});
  {
    std::map<int, std::set<int>> via_stitch;  // host -> stitch ids
    std::map<int, std::set<int>> via_gap;     // host -> gap junction ids
    auto note = [&](int host, int node) {
      const auto& j = d.junctions[static_cast<std::size_t>(node - corner_count)];
      if (!j.gap)
        via_stitch[host].insert(
            d.edge_stitches[static_cast<std::size_t>(j.icoedge)][static_cast<std::size_t>(
                j.stitch)]);
      else
        via_gap[host].insert(node - corner_count);
    };
    for (const auto& rec : d.chords) {
      note(rec.host_tile, rec.j0);
      note(rec.host_tile, rec.j1);
    }
    for (const auto& rec : d.arcs) note(rec.host_tile, rec.junction);
    std::set<std::pair<int, int>> members;
    for (const auto& [host, ids] : via_stitch)
      for (int s : ids) members.insert({s, host});
    for (const auto& [host, gaps] : via_gap) {
      if (via_stitch.count(host)) continue;
      for (int jid : gaps) {
        const auto& j = d.junctions[static_cast<std::size_t>(jid)];
        const auto& ids = d.edge_stitches[static_cast<std::size_t>(j.icoedge)];
        const int s0 = ids[static_cast<std::size_t>(j.stitch)];
        const int s1 = ids[static_cast<std::size_t>(j.stitch + 1)];
        const Vec3 p = t.tiles[static_cast<std::size_t>(host)].center;
        const double d0 =
            norm(p - t.tiles[static_cast<std::size_t>(d.stitches[static_cast<std::size_t>(s0)]
                                                          .core)].center);
        const double d1 =
            norm(p - t.tiles[static_cast<std::size_t>(d.stitches[static_cast<std::size_t>(s1)]
                                                          .core)].center);
        members.insert({d0 <= d1 ? s0 : s1, host});
      }
    }
    for (const auto& [s, host] : members)
      d.stitch_windows[static_cast<std::size_t>(s)].push_back(host);
  }
  return d;
}

int deformed_euler_characteristic(const DeformedTiling& d) {
  std::set<int> nodes;
  std::size_t half_edges = 0;
  for (const auto& poly : d.tile_nodes) {
    half_edges += poly.size();
    for (int n : poly) nodes.insert(n);
  }
  if (half_edges % 2 != 0) throw std::logic_error("deformed surface has unmatched boundary");
  return static_cast<int>(nodes.size()) - static_cast<int>(half_edges / 2) +
         static_cast<int>(d.tile_nodes.size());
}

double align_phase(const CombinatorialTiling& t, int icoedge) {
  const GlobalColoring g = color_distributed(t);
  const MismatchReport report = combinatorial_conflicts(t, g);
  const auto& conflicts = report.edge_conflicts[static_cast<std::size_t>(icoedge)];
  if (conflicts.empty()) throw NoSymmetricPhase("align_phase: seam carries no stitches");
  const auto& edge = t.net.edges[static_cast<std::size_t>(icoedge)];
  const Vec3 vP = t.net.vertex_pos[static_cast<std::size_t>(edge.v0)];
  const Vec3 vQ = t.net.vertex_pos[static_cast<std::size_t>(edge.v1)];
  const Vec3 axis = vQ - vP;
  const double len2 = norm2(axis);

  std::vector<std::pair<double, ColorId>> lams;  // normalized position, core color
  for (const auto& [a, b] : conflicts) {
    std::vector<int> common;
    for (int x : t.tiles[static_cast<std::size_t>(a)].ring)
      for (int y : t.tiles[static_cast<std::size_t>(b)].ring)
        if (x == y) common.push_back(x);
    if (common.size() != 1)
      throw NoSymmetricPhase("align_phase: conflict pattern does not form stitches");
    const double lam = dot(t.tiles[static_cast<std::size_t>(common[0])].center - vP, axis) / len2;
    lams.emplace_back(lam, g.tile_colors[static_cast<std::size_t>(common[0])]);
  }
  std::sort(lams.begin(), lams.end());
  const std::size_t n = lams.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(lams[i].first + lams[n - 1 - i].first - 1.0) > 1e-6)
      throw NoSymmetricPhase("align_phase: stitch positions are not symmetric about the midpoint");
    if (lams[i].second != lams[n - 1 - i].second)
      throw NoSymmetricPhase("align_phase: stitch colors break the half-turn palindrome");
  }
  return n % 2 == 1 ? 0.0 : 0.5;
}

std::vector<std::pair<int, int>> assemble_icovertex(const DeformedTiling& d, int v) {
  const int pent = d.base.pentagon_tile(v);
  // Tiles within two contact steps of the pentagon.
  std::map<int, std::vector<int>> node_tiles;
  for (std::size_t x = 0; x < d.tile_nodes.size(); ++x)
    for (int node : d.tile_nodes[x]) node_tiles[node].push_back(static_cast<int>(x));
  std::set<int> patch{pent};
  for (int depth = 0; depth < 2; ++depth) {
    std::set<int> grow = patch;
    for (int x : patch)
      for (int node : d.tile_nodes[static_cast<std::size_t>(x)])
        for (int other : node_tiles[node]) grow.insert(other);
    patch = std::move(grow);
  }

  std::set<std::pair<int, int>> bad;
  for (int cid : patch) {
    std::map<int, int> contact;  // neighbor -> shared node count
    for (int node : d.tile_nodes[static_cast<std::size_t>(cid)])
      for (int other : node_tiles[node])
        if (other != cid) ++contact[other];
    const ColorId own = d.coloring.tile_colors[static_cast<std::size_t>(cid)];
    std::map<ColorId, std::vector<int>> by_color;
    for (const auto& [other, shared] : contact) {
      if (patch.count(other) == 0) continue;
      if (shared >= 2 && d.coloring.tile_colors[static_cast<std::size_t>(other)] == own)
        bad.insert({std::min(cid, other), std::max(cid, other)});
      by_color[d.coloring.tile_colors[static_cast<std::size_t>(other)]].push_back(other);
    }
    for (const auto& [col, members] : by_color)
      for (std::size_t i = 0; i < members.size(); ++i)
        for (std::size_t j = i + 1; j < members.size(); ++j)
          if (contact[members[i]] >= 2 && contact[members[j]] >= 2)
            bad.insert({std::min(members[i], members[j]), std::max(members[i], members[j])});
  }
  if (!bad.empty()) {
    std::ostringstream os;
    os << "assemble_icovertex: " << bad.size() << " same-colored contact violation(s) at vertex "
       << v;
    throw DovetailConflict(os.str(), std::vector<std::pair<int, int>>(bad.begin(), bad.end()));
  }
  return {};
}

}  // namespace spheretile
