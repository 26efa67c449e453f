#include "spheretile/optimize.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "optimize_internal.hpp"
#include "spheretile/coloring.hpp"
#include "spheretile/goldberg.hpp"
#include "spheretile/stitch.hpp"

namespace spheretile {

namespace {

constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Configuration text
// ---------------------------------------------------------------------------

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw std::invalid_argument("config: bad numeric value for '" + key + "': " + v);
  return out;
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw std::invalid_argument("config: bad integer value for '" + key + "': " + v);
  return out;
}

// ---------------------------------------------------------------------------
// Differentiable boundary sampling primitives.  All points live on the sphere
// of radius r about the origin; gradients are ambient 3-vectors pulled back
// through the chain rule by the caller.
// ---------------------------------------------------------------------------

constexpr double kSlerpTiny = 1e-7;

void sample_geodesic(const Vec3& a, const Vec3& b, int n, Vec3* out) {
  const double nc = norm(cross(a, b));
  const double dc = dot(a, b);
  const double theta = std::atan2(nc, dc);
  if (theta < kSlerpTiny) {
    for (int k = 0; k <= n; ++k) {
      const double t = static_cast<double>(k) / n;
      out[k] = a + (b - a) * t;
    }
    return;
  }
  const double s = std::sin(theta);
  for (int k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) / n;
    out[k] = (a * std::sin((1.0 - t) * theta) + b * std::sin(t * theta)) / s;
  }
}

void geodesic_backward(const Vec3& a, const Vec3& b, int n, int k, const Vec3& w, Vec3& ga,
                       Vec3& gb) {
  const double t = static_cast<double>(k) / n;
  const Vec3 v = cross(a, b);
  const double nc = norm(v);
  const double dc = dot(a, b);
  const double theta = std::atan2(nc, dc);
  if (theta < kSlerpTiny) {
    ga += w * (1.0 - t);
    gb += w * t;
    return;
  }
  const double s = std::sin(theta);
  const double al = 1.0 - t, be = t;
  const double sa = std::sin(al * theta), sb = std::sin(be * theta);
  const Vec3 p = (a * sa + b * sb) / s;
  // dP/dtheta
  const Vec3 dpdth = (a * (al * std::cos(al * theta)) + b * (be * std::cos(be * theta))) / s -
                     p * (std::cos(theta) / s);
  const double gth = dot(w, dpdth);
  // theta = atan2(|a x b|, a.b)
  const double q = nc * nc + dc * dc;
  const Vec3 vh = v / nc;
  const Vec3 dth_da = (cross(b, vh) * dc - b * nc) / q;
  const Vec3 dth_db = (cross(vh, a) * dc - a * nc) / q;
  ga += w * (sa / s) + dth_da * gth;
  gb += w * (sb / s) + dth_db * gth;
}

// Arc of the circle {|x| = r, |x - c| = 1} between the circle projections of
// a and b, parametrized by angle fraction.  c is constrained to the sphere by
// its own chart, so only its direction matters here.
struct ArcFrame {
  Vec3 ch, e1, e2;
  double ncen = 0.0, nu = 0.0;
  double d0 = 0.0, rho = 0.0;
  double cb = 0.0, sb = 0.0, phi = 0.0;
};

ArcFrame arc_frame(const Vec3& a, const Vec3& b, const Vec3& c, double r) {
  ArcFrame f;
  f.ncen = norm(c);
  f.ch = c / f.ncen;
  f.d0 = (r * r - 0.5) / r;
  f.rho = std::sqrt(std::max(0.0, r * r - 0.25)) / r;
  Vec3 u = a - f.ch * dot(a, f.ch);
  f.nu = norm(u);
  if (f.nu < 1e-12) {
    // Degenerate start direction; pick any tangent (no gradient flows).
    Vec3 h = std::abs(f.ch.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    u = cross(f.ch, h);
    f.nu = norm(u);
  }
  f.e1 = u / f.nu;
  f.e2 = cross(f.ch, f.e1);
  f.cb = dot(b, f.e1);
  f.sb = dot(b, f.e2);
  f.phi = std::atan2(f.sb, f.cb);
  return f;
}

void sample_arc(const Vec3& a, const Vec3& b, const Vec3& c, double r, int n, Vec3* out) {
  const ArcFrame f = arc_frame(a, b, c, r);
  for (int k = 0; k <= n; ++k) {
    const double psi = f.phi * static_cast<double>(k) / n;
    out[k] = f.ch * f.d0 + (f.e1 * std::cos(psi) + f.e2 * std::sin(psi)) * f.rho;
  }
}

void arc_backward(const Vec3& a, const Vec3& b, const Vec3& c, double r, int n, int k,
                  const Vec3& w, Vec3& ga, Vec3& gb, Vec3& gc) {
  const ArcFrame f = arc_frame(a, b, c, r);
  const double t = static_cast<double>(k) / n;
  const double psi = f.phi * t;
  const double cp = std::cos(psi), sp = std::sin(psi);
  // P = d0*ch + rho*(cp*e1 + sp*e2)
  Vec3 ge1 = w * (f.rho * cp);
  Vec3 ge2 = w * (f.rho * sp);
  Vec3 gch = w * f.d0;
  const double gpsi = dot(w, (f.e2 * cp - f.e1 * sp) * f.rho);
  const double gphi = gpsi * t;
  // phi = atan2(sb, cb)
  const double q = f.sb * f.sb + f.cb * f.cb;
  if (q > 1e-24) {
    const double gsb = gphi * f.cb / q;
    const double gcb = -gphi * f.sb / q;
    gb += f.e2 * gsb + f.e1 * gcb;
    ge2 += b * gsb;
    ge1 += b * gcb;
  }
  // e2 = ch x e1
  gch += cross(f.e1, ge2);
  ge1 += cross(ge2, f.ch);
  // e1 = u / nu, u = a - (a.ch) ch
  const Vec3 gu = (ge1 - f.e1 * dot(ge1, f.e1)) / f.nu;
  ga += gu - f.ch * dot(gu, f.ch);
  gch += -(a * dot(gu, f.ch) + gu * dot(a, f.ch));
  // ch = c / |c|
  gc += (gch - f.ch * dot(gch, f.ch)) / f.ncen;
}

double geodesic_length(const Vec3& a, const Vec3& b, double r) {
  return r * std::atan2(norm(cross(a, b)), dot(a, b));
}

double arc_length(const Vec3& a, const Vec3& b, const Vec3& c, double r) {
  const ArcFrame f = arc_frame(a, b, c, r);
  return std::abs(f.phi) * f.rho * r;
}

// ---------------------------------------------------------------------------
// Bounding-cap interval trees over a tile's boundary point list: exact
// max-pair (diameter) and min-pair (separation) queries with sound cap
// bounds for pruning.
// ---------------------------------------------------------------------------

struct CapNode {
  int lo = 0, hi = 0;  // point index range [lo, hi)
  int left = -1, right = -1;
  Vec3 axis{};
  double ang = 0.0;
};

struct CapTree {
  std::vector<CapNode> nodes;
  int root = -1;

  int build(const std::vector<Vec3>& pts, int lo, int hi) {
    CapNode nd;
    nd.lo = lo;
    nd.hi = hi;
    if (hi - lo > 16) {
      const int mid = lo + (hi - lo) / 2;
      nd.left = build(pts, lo, mid);
      nd.right = build(pts, mid, hi);
      const CapNode& l = nodes[static_cast<std::size_t>(nd.left)];
      const CapNode& rn = nodes[static_cast<std::size_t>(nd.right)];
      Vec3 ax = l.axis + rn.axis;
      double na = norm(ax);
      nd.axis = na > 1e-12 ? ax / na : l.axis;
      nd.ang = 0.0;
      for (const CapNode* ch : {&l, &rn}) {
        const double d = std::atan2(norm(cross(nd.axis, ch->axis)), dot(nd.axis, ch->axis));
        nd.ang = std::max(nd.ang, d + ch->ang);
      }
    } else {
      Vec3 ax{};
      for (int i = lo; i < hi; ++i) ax += pts[static_cast<std::size_t>(i)];
      double na = norm(ax);
      nd.axis = na > 1e-12 ? ax / na : Vec3{0, 0, 1};
      nd.ang = 0.0;
      for (int i = lo; i < hi; ++i) {
        const Vec3 p = pts[static_cast<std::size_t>(i)];
        const double d = std::atan2(norm(cross(nd.axis, p)), dot(nd.axis, p));
        nd.ang = std::max(nd.ang, d);
      }
    }
    nodes.push_back(nd);
    return static_cast<int>(nodes.size()) - 1;
  }

  void rebuild(const std::vector<Vec3>& pts) {
    nodes.clear();
    root = pts.empty() ? -1 : build(pts, 0, static_cast<int>(pts.size()));
  }
};

double cap_pair_max(const CapNode& a, const CapNode& b, double r) {
  const double g = std::atan2(norm(cross(a.axis, b.axis)), dot(a.axis, b.axis)) + a.ang + b.ang;
  return 2.0 * r * std::sin(std::min(g, kPi) * 0.5);
}

double cap_pair_min(const CapNode& a, const CapNode& b, double r) {
  const double g = std::atan2(norm(cross(a.axis, b.axis)), dot(a.axis, b.axis)) - a.ang - b.ang;
  if (g <= 0.0) return 0.0;
  return 2.0 * r * std::sin(std::min(g, kPi) * 0.5);
}

struct BestPair {
  double value = 0.0;
  int i = -1, j = -1;
};

void max_pair_rec(const CapTree& ta, const std::vector<Vec3>& pa, const CapTree& tb,
                  const std::vector<Vec3>& pb, int na, int nb, double r, bool self,
                  BestPair& best) {
  const CapNode& a = ta.nodes[static_cast<std::size_t>(na)];
  const CapNode& b = tb.nodes[static_cast<std::size_t>(nb)];
  if (cap_pair_max(a, b, r) <= best.value) return;
  const bool la = a.left < 0, lb = b.left < 0;
  if (la && lb) {
    for (int i = a.lo; i < a.hi; ++i) {
      const int j0 = (self && na == nb) ? i + 1 : b.lo;
      for (int j = j0; j < b.hi; ++j) {
        const double d2 = dist2(pa[static_cast<std::size_t>(i)], pb[static_cast<std::size_t>(j)]);
        if (d2 > best.value * best.value) {
          best.value = std::sqrt(d2);
          best.i = i;
          best.j = j;
        }
      }
    }
    return;
  }
  if (self && na == nb) {
    max_pair_rec(ta, pa, tb, pb, a.left, b.left, r, self, best);
    max_pair_rec(ta, pa, tb, pb, a.left, b.right, r, self, best);
    max_pair_rec(ta, pa, tb, pb, a.right, b.right, r, self, best);
    return;
  }
  if (lb || (!la && (a.hi - a.lo) >= (b.hi - b.lo))) {
    max_pair_rec(ta, pa, tb, pb, a.left, nb, r, self, best);
    max_pair_rec(ta, pa, tb, pb, a.right, nb, r, self, best);
  } else {
    max_pair_rec(ta, pa, tb, pb, na, b.left, r, self, best);
    max_pair_rec(ta, pa, tb, pb, na, b.right, r, self, best);
  }
}

void min_pair_rec(const CapTree& ta, const std::vector<Vec3>& pa, const CapTree& tb,
                  const std::vector<Vec3>& pb, int na, int nb, double r, BestPair& best) {
  const CapNode& a = ta.nodes[static_cast<std::size_t>(na)];
  const CapNode& b = tb.nodes[static_cast<std::size_t>(nb)];
  if (cap_pair_min(a, b, r) >= best.value) return;
  const bool la = a.left < 0, lb = b.left < 0;
  if (la && lb) {
    for (int i = a.lo; i < a.hi; ++i) {
      for (int j = b.lo; j < b.hi; ++j) {
        const double d2 = dist2(pa[static_cast<std::size_t>(i)], pb[static_cast<std::size_t>(j)]);
        if (d2 < best.value * best.value) {
          best.value = std::sqrt(d2);
          best.i = i;
          best.j = j;
        }
      }
    }
    return;
  }
  if (lb || (!la && (a.hi - a.lo) >= (b.hi - b.lo))) {
    min_pair_rec(ta, pa, tb, pb, a.left, nb, r, best);
    min_pair_rec(ta, pa, tb, pb, a.right, nb, r, best);
  } else {
    min_pair_rec(ta, pa, tb, pb, na, b.left, r, best);
    min_pair_rec(ta, pa, tb, pb, na, b.right, r, best);
  }
}

// ---------------------------------------------------------------------------
// Tile boundary point sets (plain, chart-free): shared by constraint
// generation and by the one-shot pair-distance queries in the exclusion scan.
// ---------------------------------------------------------------------------

std::vector<Vec3> tile_point_set(const SphericalTiling& s, int t, double h) {
  std::vector<Vec3> pts;
  const auto loop = tile_vertex_loop(s, t);
  for (int v : loop) pts.push_back(s.vertices[static_cast<std::size_t>(v)]);
  for (int e : s.tiles[static_cast<std::size_t>(t)].boundary) {
    const auto& ed = s.edges[static_cast<std::size_t>(e)];
    const Vec3 a = s.vertices[static_cast<std::size_t>(ed.a)];
    const Vec3 b = s.vertices[static_cast<std::size_t>(ed.b)];
    double len = 0.0;
    const bool arc = ed.kind == SphericalTiling::EdgeKind::UnitArc;
    Vec3 c{};
    if (arc) {
      c = s.vertices[static_cast<std::size_t>(ed.center)];
      len = arc_length(a, b, c, s.radius);
    } else {
      len = geodesic_length(a, b, s.radius);
    }
    const int n = std::max(1, static_cast<int>(std::ceil(len / h)));
    std::vector<Vec3> seg(static_cast<std::size_t>(n) + 1);
    if (arc)
      sample_arc(a, b, c, s.radius, n, seg.data());
    else
      sample_geodesic(a, b, n, seg.data());
    pts.insert(pts.end(), seg.begin(), seg.end());
  }
  return pts;
}

struct SimpleCap {
  Vec3 axis{};
  double ang = 0.0;
};

SimpleCap cap_of(const std::vector<Vec3>& pts) {
  SimpleCap c;
  Vec3 ax{};
  for (const Vec3& p : pts) ax += p;
  const double na = norm(ax);
  c.axis = na > 1e-12 ? ax / na : Vec3{0, 0, 1};
  for (const Vec3& p : pts) {
    const double d = std::atan2(norm(cross(c.axis, p)), dot(c.axis, p));
    c.ang = std::max(c.ang, d);
  }
  return c;
}

double simple_cap_min_chord(const SimpleCap& a, const SimpleCap& b, double r) {
  const double g = std::atan2(norm(cross(a.axis, b.axis)), dot(a.axis, b.axis)) - a.ang - b.ang;
  if (g <= 0.0) return 0.0;
  return 2.0 * r * std::sin(std::min(g, kPi) * 0.5);
}

// ---------------------------------------------------------------------------
// Spherical residual backend
// ---------------------------------------------------------------------------

struct PtRef {
  int plan = -1;  // -1: vertex reference
  int k = -1;     // sample index, or vertex id when plan < 0
};

class SphereBackend final : public detail::ResidualBackend {
 public:
  SphereBackend(const SphericalTiling& s, const ConstraintSet& cs, const SymmetryMap* sym,
                int threads);

  int ineq_count() const override { return static_cast<int>(ineqs_.size()); }
  int eq_count() const override { return static_cast<int>(eqs_.size()); }
  void eval(const std::vector<double>& x) override;
  double ineq(int i) const override { return ineqs_[static_cast<std::size_t>(i)].resid; }
  double eq(int j) const override { return eqs_[static_cast<std::size_t>(j)].resid; }
  double ineq_weight(int i) const override { return ineqs_[static_cast<std::size_t>(i)].weight; }
  double eq_weight(int j) const override { return eqs_[static_cast<std::size_t>(j)].weight; }
  void add_ineq_grad(int i, double scale, std::vector<double>& g) const override;
  void add_eq_grad(int j, double scale, std::vector<double>& g) const override;
  void rebase(std::vector<double>& x) override;
  void set_resolution(double h) override;

  int dim() const { return 2 * nslots_; }
  bool reduced() const { return reduced_; }
  const std::vector<Vec3>& positions() const { return pos_; }
  /// Signed residuals aligned with the public constraint set (equalities as
  /// |length - 1|), reconstructed from orbit representatives when reduced.
  std::vector<double> public_residuals() const;

 private:
  struct IneqRec {
    ConstraintKind kind = ConstraintKind::Diameter;
    int tile_a = -1, tile_b = -1;  // indices into tracked tile list
    double weight = 1.0, bound = 1.0;
    bool upper = false;
    double resid = 0.0;
    PtRef ra, rb;
  };
  struct EqRec {
    int u = -1, v = -1;
    double weight = 1.0;
    double resid = 0.0;
  };
  struct Plan {
    int edge = -1;
    int n = 1;
    int offset = 0;
  };

  void materialize(const std::vector<double>& x);
  void fill_samples();
  Vec3 point_of(const PtRef& ref) const;
  void add_ambient(int vertex, const Vec3& gv, std::vector<double>& g) const;
  void backprop_ref(const PtRef& ref, const Vec3& gv, std::vector<double>& g) const;
  void compute_ineq(IneqRec& c) const;

  const SphericalTiling& s_;
  const SymmetryMap* sym_ = nullptr;
  bool reduced_ = false;
  int threads_ = 1;
  double r_ = 1.0;

  // Orbit / chart structure.
  std::vector<int> rep_, gof_, slot_;
  std::vector<char> frozen_;
  std::vector<Vec3> base_, fu_, fv_, fixed_;
  int nslots_ = 0;

  // Current geometry.
  std::vector<Vec3> pos_, yhat_;
  std::vector<double> ylen_;
  std::vector<double> last_x_;
  bool have_eval_ = false;

  // Sampling.
  double h_ = kDefaultSamplingH;
  std::vector<Plan> plans_;
  std::vector<int> plan_of_edge_;
  std::vector<Vec3> samples_;

  // Tracked tiles: point ref lists + cap trees.
  std::vector<int> tracked_tiles_;           // tile ids
  std::vector<int> track_of_tile_;           // tile id -> tracked index or -1
  std::vector<std::vector<int>> tile_loops_;  // per tracked tile
  std::vector<std::vector<PtRef>> tile_refs_;
  std::vector<std::vector<Vec3>> tile_pts_;
  std::vector<CapTree> tile_trees_;

  std::vector<IneqRec> ineqs_;
  std::vector<EqRec> eqs_;
  // Public-set alignment: for each public constraint, the internal record
  // (ineq index or ~eq index) providing its residual.
  std::vector<int> public_map_;
};

Vec3 stabilizer_axis(const Mat3& R, const Vec3& hint) {
  const double tr = R.m[0][0] + R.m[1][1] + R.m[2][2];
  const double ca = 0.5 * (tr - 1.0);
  Vec3 best{};
  double bn = -1.0;
  for (int c = 0; c < 3; ++c) {
    Vec3 col{R.m[0][c] + R.m[c][0], R.m[1][c] + R.m[c][1], R.m[2][c] + R.m[c][2]};
    col[c] -= 2.0 * ca;
    const double n = norm(col);
    if (n > bn) {
      bn = n;
      best = col;
    }
  }
  Vec3 a = best / bn;
  if (dot(a, hint) < 0.0) a = -a;
  return a;
}

SphereBackend::SphereBackend(const SphericalTiling& s, const ConstraintSet& cs,
                             const SymmetryMap* sym, int threads)
    : s_(s), sym_(sym), threads_(threads), r_(s.radius) {
  const int nv = s.vertex_count();
  rep_.resize(static_cast<std::size_t>(nv));
  gof_.assign(static_cast<std::size_t>(nv), 0);
  slot_.assign(static_cast<std::size_t>(nv), -1);
  frozen_.assign(static_cast<std::size_t>(nv), 0);
  fixed_.assign(static_cast<std::size_t>(nv), Vec3{});

  reduced_ = sym_ != nullptr && !sym_->rotations.empty();
  if (reduced_) {
    const int ng = static_cast<int>(sym_->rotations.size());
    for (int v = 0; v < nv; ++v) {
      int rep = v, gmin = 0;
      for (int g = 0; g < ng; ++g) {
        const int w = sym_->vertex_map[static_cast<std::size_t>(g)][static_cast<std::size_t>(v)];
        if (w < rep) rep = w;
      }
      rep_[static_cast<std::size_t>(v)] = rep;
      if (rep != v) {
        for (int g = 0; g < ng; ++g) {
          if (sym_->vertex_map[static_cast<std::size_t>(g)][static_cast<std::size_t>(rep)] == v) {
            gmin = g;
            break;
          }
        }
      }
      gof_[static_cast<std::size_t>(v)] = gmin;
    }
    for (int v = 0; v < nv; ++v) {
      if (rep_[static_cast<std::size_t>(v)] != v) continue;
      for (int g = 1; g < ng; ++g) {
        if (sym_->vertex_map[static_cast<std::size_t>(g)][static_cast<std::size_t>(v)] == v) {
          frozen_[static_cast<std::size_t>(v)] = 1;
          const Vec3 axis =
              stabilizer_axis(sym_->rotations[static_cast<std::size_t>(g)],
                              s.vertices[static_cast<std::size_t>(v)]);
          fixed_[static_cast<std::size_t>(v)] = axis * r_;
          break;
        }
      }
    }
  } else {
    for (int v = 0; v < nv; ++v) rep_[static_cast<std::size_t>(v)] = v;
  }

  base_.assign(static_cast<std::size_t>(nv), Vec3{});
  fu_.assign(static_cast<std::size_t>(nv), Vec3{});
  fv_.assign(static_cast<std::size_t>(nv), Vec3{});
  nslots_ = 0;
  for (int v = 0; v < nv; ++v) {
    if (rep_[static_cast<std::size_t>(v)] != v || frozen_[static_cast<std::size_t>(v)]) continue;
    slot_[static_cast<std::size_t>(v)] = nslots_++;
    const Vec3 b = normalized(s.vertices[static_cast<std::size_t>(v)]);
    base_[static_cast<std::size_t>(v)] = b;
    const Vec3 h = std::abs(b.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    fu_[static_cast<std::size_t>(v)] = normalized(cross(b, h));
    fv_[static_cast<std::size_t>(v)] = cross(b, fu_[static_cast<std::size_t>(v)]);
  }

  pos_.assign(static_cast<std::size_t>(nv), Vec3{});
  yhat_.assign(static_cast<std::size_t>(nv), Vec3{});
  ylen_.assign(static_cast<std::size_t>(nv), 1.0);

  // Constraint records.  With a symmetry map, dedupe orbits: the first
  // constraint whose orbit key equals its own key becomes the representative
  // and carries the orbit size as weight.
  std::map<std::tuple<int, int, int, double, int>, int> orbit_rep;  // key -> internal idx
  auto orbit_key = [&](const Constraint& c) {
    int a = c.a, b = c.b;
    if (reduced_) {
      const int ng = static_cast<int>(sym_->rotations.size());
      if (c.kind == ConstraintKind::Diameter) {
        for (int g = 0; g < ng; ++g)
          a = std::min(a, sym_->tile_map[static_cast<std::size_t>(g)][static_cast<std::size_t>(c.a)]);
        b = -1;
      } else if (c.kind == ConstraintKind::Separation) {
        std::pair<int, int> best{std::numeric_limits<int>::max(), 0};
        for (int g = 0; g < ng; ++g) {
          int ia = sym_->tile_map[static_cast<std::size_t>(g)][static_cast<std::size_t>(c.a)];
          int ib = sym_->tile_map[static_cast<std::size_t>(g)][static_cast<std::size_t>(c.b)];
          if (ia > ib) std::swap(ia, ib);
          best = std::min(best, {ia, ib});
        }
        a = best.first;
        b = best.second;
      } else {
        std::pair<int, int> best{std::numeric_limits<int>::max(), 0};
        for (int g = 0; g < ng; ++g) {
          int ia = sym_->vertex_map[static_cast<std::size_t>(g)][static_cast<std::size_t>(c.a)];
          int ib = sym_->vertex_map[static_cast<std::size_t>(g)][static_cast<std::size_t>(c.b)];
          if (ia > ib) std::swap(ia, ib);
          best = std::min(best, {ia, ib});
        }
        a = best.first;
        b = best.second;
      }
    }
    return std::make_tuple(static_cast<int>(c.kind), a, b, c.bound, c.upper ? 1 : 0);
  };
  auto orbit_size = [&](const Constraint& c) {
    if (!reduced_) return 1.0;
    const int ng = static_cast<int>(sym_->rotations.size());
    std::set<std::pair<int, int>> images;
    for (int g = 0; g < ng; ++g) {
      if (c.kind == ConstraintKind::Diameter) {
        images.insert({sym_->tile_map[static_cast<std::size_t>(g)][static_cast<std::size_t>(c.a)], -1});
      } else if (c.kind == ConstraintKind::Separation) {
        int ia = sym_->tile_map[static_cast<std::size_t>(g)][static_cast<std::size_t>(c.a)];
        int ib = sym_->tile_map[static_cast<std::size_t>(g)][static_cast<std::size_t>(c.b)];
        if (ia > ib) std::swap(ia, ib);
        images.insert({ia, ib});
      } else {
        int ia = sym_->vertex_map[static_cast<std::size_t>(g)][static_cast<std::size_t>(c.a)];
        int ib = sym_->vertex_map[static_cast<std::size_t>(g)][static_cast<std::size_t>(c.b)];
        if (ia > ib) std::swap(ia, ib);
        images.insert({ia, ib});
      }
    }
    return static_cast<double>(images.size());
  };

  track_of_tile_.assign(s.tiles.size(), -1);
  auto track_tile = [&](int t) {
    if (track_of_tile_[static_cast<std::size_t>(t)] < 0) {
      track_of_tile_[static_cast<std::size_t>(t)] = static_cast<int>(tracked_tiles_.size());
      tracked_tiles_.push_back(t);
    }
    return track_of_tile_[static_cast<std::size_t>(t)];
  };

  public_map_.reserve(cs.constraints.size());
  for (const Constraint& c : cs.constraints) {
    const auto key = orbit_key(c);
    auto it = orbit_rep.find(key);
    if (it != orbit_rep.end()) {
      public_map_.push_back(it->second);
      continue;
    }
    int internal = -1;
    if (c.kind == ConstraintKind::UnitChord) {
      EqRec e;
      e.u = c.a;
      e.v = c.b;
      e.weight = c.weight * orbit_size(c);
      eqs_.push_back(e);
      internal = ~(static_cast<int>(eqs_.size()) - 1);
    } else {
      IneqRec rec;
      rec.kind = c.kind;
      rec.weight = c.weight * orbit_size(c);
      rec.bound = c.bound;
      rec.upper = c.upper;
      rec.tile_a = track_tile(c.a);
      if (c.kind == ConstraintKind::Separation) rec.tile_b = track_tile(c.b);
      ineqs_.push_back(rec);
      internal = static_cast<int>(ineqs_.size()) - 1;
    }
    orbit_rep.emplace(key, internal);
    public_map_.push_back(internal);
  }

  tile_loops_.resize(tracked_tiles_.size());
  for (std::size_t i = 0; i < tracked_tiles_.size(); ++i)
    tile_loops_[i] = tile_vertex_loop(s, tracked_tiles_[i]);
  tile_refs_.resize(tracked_tiles_.size());
  tile_pts_.resize(tracked_tiles_.size());
  tile_trees_.resize(tracked_tiles_.size());

  plan_of_edge_.assign(s.edges.size(), -1);
  for (int t : tracked_tiles_)
    for (int e : s.tiles[static_cast<std::size_t>(t)].boundary)
      if (plan_of_edge_[static_cast<std::size_t>(e)] < 0) {
        plan_of_edge_[static_cast<std::size_t>(e)] = static_cast<int>(plans_.size());
        plans_.push_back(Plan{e, 1, 0});
      }

  std::vector<double> x0(static_cast<std::size_t>(dim()), 0.0);
  materialize(x0);
  set_resolution(h_);
}

void SphereBackend::materialize(const std::vector<double>& x) {
  const int nv = s_.vertex_count();
  for (int v = 0; v < nv; ++v) {
    if (rep_[static_cast<std::size_t>(v)] != v) continue;
    if (frozen_[static_cast<std::size_t>(v)]) {
      pos_[static_cast<std::size_t>(v)] = fixed_[static_cast<std::size_t>(v)];
      continue;
    }
    const int s = slot_[static_cast<std::size_t>(v)];
    const Vec3 y = base_[static_cast<std::size_t>(v)] +
                   fu_[static_cast<std::size_t>(v)] * x[static_cast<std::size_t>(2 * s)] +
                   fv_[static_cast<std::size_t>(v)] * x[static_cast<std::size_t>(2 * s + 1)];
    const double ny = norm(y);
    ylen_[static_cast<std::size_t>(v)] = ny;
    yhat_[static_cast<std::size_t>(v)] = y / ny;
    pos_[static_cast<std::size_t>(v)] = yhat_[static_cast<std::size_t>(v)] * r_;
  }
  if (reduced_) {
    for (int v = 0; v < nv; ++v) {
      if (rep_[static_cast<std::size_t>(v)] == v) continue;
      pos_[static_cast<std::size_t>(v)] =
          sym_->rotations[static_cast<std::size_t>(gof_[static_cast<std::size_t>(v)])] *
          pos_[static_cast<std::size_t>(rep_[static_cast<std::size_t>(v)])];
    }
  }
}

void SphereBackend::set_resolution(double h) {
  h_ = h;
  int offset = 0;
  for (Plan& p : plans_) {
    const auto& ed = s_.edges[static_cast<std::size_t>(p.edge)];
    const Vec3 a = pos_[static_cast<std::size_t>(ed.a)];
    const Vec3 b = pos_[static_cast<std::size_t>(ed.b)];
    double len = 0.0;
    if (ed.kind == SphericalTiling::EdgeKind::UnitArc)
      len = arc_length(a, b, pos_[static_cast<std::size_t>(ed.center)], r_);
    else
      len = geodesic_length(a, b, r_);
    p.n = std::min(16384, std::max(1, static_cast<int>(std::ceil(len / h))));
    p.offset = offset;
    offset += p.n + 1;
  }
  samples_.assign(static_cast<std::size_t>(offset), Vec3{});

  for (std::size_t ti = 0; ti < tracked_tiles_.size(); ++ti) {
    auto& refs = tile_refs_[ti];
    refs.clear();
    for (int v : tile_loops_[ti]) refs.push_back(PtRef{-1, v});
    for (int e : s_.tiles[static_cast<std::size_t>(tracked_tiles_[ti])].boundary) {
      const Plan& p = plans_[static_cast<std::size_t>(plan_of_edge_[static_cast<std::size_t>(e)])];
      for (int k = 0; k <= p.n; ++k)
        refs.push_back(PtRef{plan_of_edge_[static_cast<std::size_t>(e)], k});
    }
    tile_pts_[ti].resize(refs.size());
  }
  have_eval_ = false;
}

void SphereBackend::fill_samples() {
  const int np = static_cast<int>(plans_.size());
  detail::parallel_ranges(np, threads_, [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      const Plan& p = plans_[static_cast<std::size_t>(i)];
      const auto& ed = s_.edges[static_cast<std::size_t>(p.edge)];
      const Vec3 a = pos_[static_cast<std::size_t>(ed.a)];
      const Vec3 b = pos_[static_cast<std::size_t>(ed.b)];
      Vec3* out = samples_.data() + p.offset;
      if (ed.kind == SphericalTiling::EdgeKind::UnitArc)
        sample_arc(a, b, pos_[static_cast<std::size_t>(ed.center)], r_, p.n, out);
      else
        sample_geodesic(a, b, p.n, out);
    }
  });
}

Vec3 SphereBackend::point_of(const PtRef& ref) const {
  if (ref.plan < 0) return pos_[static_cast<std::size_t>(ref.k)];
  const Plan& p = plans_[static_cast<std::size_t>(ref.plan)];
  return samples_[static_cast<std::size_t>(p.offset + ref.k)];
}

void SphereBackend::compute_ineq(IneqRec& c) const {
  const auto& pa = tile_pts_[static_cast<std::size_t>(c.tile_a)];
  const auto& ta = tile_trees_[static_cast<std::size_t>(c.tile_a)];
  BestPair best;
  if (c.kind == ConstraintKind::Diameter) {
    best.value = 0.0;
    best.i = 0;
    best.j = 0;
    max_pair_rec(ta, pa, ta, pa, ta.root, ta.root, r_, true, best);
    c.resid = best.value - c.bound;
    c.ra = tile_refs_[static_cast<std::size_t>(c.tile_a)][static_cast<std::size_t>(best.i)];
    c.rb = tile_refs_[static_cast<std::size_t>(c.tile_a)][static_cast<std::size_t>(best.j)];
  } else {
    const auto& pb = tile_pts_[static_cast<std::size_t>(c.tile_b)];
    const auto& tb = tile_trees_[static_cast<std::size_t>(c.tile_b)];
    best.value = 4.0 * r_ + 1.0;
    min_pair_rec(ta, pa, tb, pb, ta.root, tb.root, r_, best);
    c.resid = c.upper ? best.value - c.bound : c.bound - best.value;
    c.ra = tile_refs_[static_cast<std::size_t>(c.tile_a)][static_cast<std::size_t>(best.i)];
    c.rb = tile_refs_[static_cast<std::size_t>(c.tile_b)][static_cast<std::size_t>(best.j)];
  }
}

void SphereBackend::eval(const std::vector<double>& x) {
  if (have_eval_ && x == last_x_) return;
  materialize(x);
  fill_samples();
  const int nt = static_cast<int>(tracked_tiles_.size());
  detail::parallel_ranges(nt, threads_, [&](int lo, int hi) {
    for (int ti = lo; ti < hi; ++ti) {
      auto& pts = tile_pts_[static_cast<std::size_t>(ti)];
      const auto& refs = tile_refs_[static_cast<std::size_t>(ti)];
      for (std::size_t k = 0; k < refs.size(); ++k) pts[k] = point_of(refs[k]);
      tile_trees_[static_cast<std::size_t>(ti)].rebuild(pts);
    }
  });
  const int ni = static_cast<int>(ineqs_.size());
  detail::parallel_ranges(ni, threads_, [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) compute_ineq(ineqs_[static_cast<std::size_t>(i)]);
  });
  for (EqRec& e : eqs_) {
    e.resid = dist(pos_[static_cast<std::size_t>(e.u)], pos_[static_cast<std::size_t>(e.v)]) - 1.0;
  }
  last_x_ = x;
  have_eval_ = true;
}

void SphereBackend::add_ambient(int vertex, const Vec3& gv, std::vector<double>& g) const {
  const int rv = rep_[static_cast<std::size_t>(vertex)];
  Vec3 gg = gv;
  if (reduced_ && vertex != rv) {
    gg = sym_->rotations[static_cast<std::size_t>(gof_[static_cast<std::size_t>(vertex)])]
             .transposed() *
         gv;
  }
  const int sl = slot_[static_cast<std::size_t>(rv)];
  if (sl < 0) return;
  const Vec3 yh = yhat_[static_cast<std::size_t>(rv)];
  const double f = r_ / ylen_[static_cast<std::size_t>(rv)];
  const double gyh = dot(gg, yh);
  g[static_cast<std::size_t>(2 * sl)] +=
      f * (dot(gg, fu_[static_cast<std::size_t>(rv)]) - gyh * dot(yh, fu_[static_cast<std::size_t>(rv)]));
  g[static_cast<std::size_t>(2 * sl + 1)] +=
      f * (dot(gg, fv_[static_cast<std::size_t>(rv)]) - gyh * dot(yh, fv_[static_cast<std::size_t>(rv)]));
}

void SphereBackend::backprop_ref(const PtRef& ref, const Vec3& gv, std::vector<double>& g) const {
  if (ref.plan < 0) {
    add_ambient(ref.k, gv, g);
    return;
  }
  const Plan& p = plans_[static_cast<std::size_t>(ref.plan)];
  const auto& ed = s_.edges[static_cast<std::size_t>(p.edge)];
  const Vec3 a = pos_[static_cast<std::size_t>(ed.a)];
  const Vec3 b = pos_[static_cast<std::size_t>(ed.b)];
  Vec3 ga{}, gb{}, gc{};
  if (ed.kind == SphericalTiling::EdgeKind::UnitArc) {
    arc_backward(a, b, pos_[static_cast<std::size_t>(ed.center)], r_, p.n, ref.k, gv, ga, gb, gc);
    add_ambient(ed.center, gc, g);
  } else {
    geodesic_backward(a, b, p.n, ref.k, gv, ga, gb);
  }
  add_ambient(ed.a, ga, g);
  add_ambient(ed.b, gb, g);
}

void SphereBackend::add_ineq_grad(int i, double scale, std::vector<double>& g) const {
  const IneqRec& c = ineqs_[static_cast<std::size_t>(i)];
  const Vec3 pa = point_of(c.ra);
  const Vec3 pb = point_of(c.rb);
  const double d = dist(pa, pb);
  if (d < 1e-12) return;
  double sgn = 1.0;  // d(resid)/d(distance)
  if (c.kind == ConstraintKind::Separation && !c.upper) sgn = -1.0;
  const Vec3 dir = (pa - pb) / d;
  backprop_ref(c.ra, dir * (scale * sgn), g);
  backprop_ref(c.rb, dir * (-scale * sgn), g);
}

void SphereBackend::add_eq_grad(int j, double scale, std::vector<double>& g) const {
  const EqRec& e = eqs_[static_cast<std::size_t>(j)];
  const Vec3 pa = pos_[static_cast<std::size_t>(e.u)];
  const Vec3 pb = pos_[static_cast<std::size_t>(e.v)];
  const double d = dist(pa, pb);
  if (d < 1e-12) return;
  const Vec3 dir = (pa - pb) / d;
  add_ambient(e.u, dir * scale, g);
  add_ambient(e.v, dir * (-scale), g);
}

void SphereBackend::rebase(std::vector<double>& x) {
  materialize(x);
  const int nv = s_.vertex_count();
  for (int v = 0; v < nv; ++v) {
    if (slot_[static_cast<std::size_t>(v)] < 0) continue;
    const Vec3 b = normalized(pos_[static_cast<std::size_t>(v)]);
    base_[static_cast<std::size_t>(v)] = b;
    const Vec3 h = std::abs(b.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    fu_[static_cast<std::size_t>(v)] = normalized(cross(b, h));
    fv_[static_cast<std::size_t>(v)] = cross(b, fu_[static_cast<std::size_t>(v)]);
  }
  std::fill(x.begin(), x.end(), 0.0);
  materialize(x);
  have_eval_ = false;
}

std::vector<double> SphereBackend::public_residuals() const {
  std::vector<double> out;
  out.reserve(public_map_.size());
  for (int idx : public_map_) {
    if (idx >= 0)
      out.push_back(ineqs_[static_cast<std::size_t>(idx)].resid);
    else
      out.push_back(std::abs(eqs_[static_cast<std::size_t>(~idx)].resid));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Solve driver shared by the public entry points
// ---------------------------------------------------------------------------

bool orbit_closed(const ConstraintSet& cs, const SymmetryMap& sym) {
  // Every constraint's orbit must stay inside the set with matching
  // bound/upper, otherwise reduction would change the problem.
  std::set<std::tuple<int, int, int, double, int>> present;
  for (const Constraint& c : cs.constraints) {
    int a = c.a, b = c.b;
    if (c.kind != ConstraintKind::Diameter && a > b) std::swap(a, b);
    present.insert({static_cast<int>(c.kind), a, b, c.bound, c.upper ? 1 : 0});
  }
  const int ng = static_cast<int>(sym.rotations.size());
  for (const Constraint& c : cs.constraints) {
    for (int g = 0; g < ng; ++g) {
      int ia, ib;
      if (c.kind == ConstraintKind::UnitChord) {
        ia = sym.vertex_map[static_cast<std::size_t>(g)][static_cast<std::size_t>(c.a)];
        ib = sym.vertex_map[static_cast<std::size_t>(g)][static_cast<std::size_t>(c.b)];
        if (ia > ib) std::swap(ia, ib);
      } else if (c.kind == ConstraintKind::Diameter) {
        ia = sym.tile_map[static_cast<std::size_t>(g)][static_cast<std::size_t>(c.a)];
        ib = -1;
      } else {
        ia = sym.tile_map[static_cast<std::size_t>(g)][static_cast<std::size_t>(c.a)];
        ib = sym.tile_map[static_cast<std::size_t>(g)][static_cast<std::size_t>(c.b)];
        if (ia > ib) std::swap(ia, ib);
      }
      if (!present.count({static_cast<int>(c.kind), ia, ib, c.bound, c.upper ? 1 : 0}))
        return false;
    }
  }
  return true;
}

bool symmetry_matches_positions(const SphericalTiling& s, const SymmetryMap& sym) {
  if (sym.rotations.empty()) return false;
  if (sym.vertex_map[0].size() != s.vertices.size()) return false;
  const double tol = 1e-5 * s.radius;
  const int ng = static_cast<int>(sym.rotations.size());
  for (int g = 1; g < ng; g += 7) {
    for (int v = 0; v < s.vertex_count(); v += 37) {
      const Vec3 im = sym.rotations[static_cast<std::size_t>(g)] *
                      s.vertices[static_cast<std::size_t>(v)];
      const int w = sym.vertex_map[static_cast<std::size_t>(g)][static_cast<std::size_t>(v)];
      if (dist(im, s.vertices[static_cast<std::size_t>(w)]) > tol) return false;
    }
  }
  return true;
}

FeasibilityResult solve_with(const SphericalTiling& s, const ConstraintSet& cs,
                             const OptimizerConfig& cfg, const SymmetryMap* sym) {
  const SymmetryMap* use = nullptr;
  const bool want = cfg.symmetry == 1 || (cfg.symmetry < 0 && s.spec.m >= 3);
  if (sym != nullptr && cfg.symmetry != 0 && want && orbit_closed(cs, *sym) &&
      symmetry_matches_positions(s, *sym))
    use = sym;

  SphereBackend backend(s, cs, use, detail::resolve_threads(cfg));
  std::vector<double> x(static_cast<std::size_t>(backend.dim()), 0.0);
  const detail::SolveOutcome out = detail::run_feasibility_solve(backend, cfg, x);

  FeasibilityResult res;
  res.iterations = out.iterations;
  res.max_violation = detail::max_violation_of(backend);
  res.feasible = res.max_violation <= cfg.tol_feas;
  res.residuals = backend.public_residuals();
  if (res.feasible)
    res.status = OptimizeStatus::Converged;
  else if (out.stalled)
    res.status = OptimizeStatus::NumericalStall;
  else
    res.status = OptimizeStatus::MaxIterationsExceeded;
  res.tiling = s;
  res.tiling.vertices = backend.positions();
  return res;
}

// ---------------------------------------------------------------------------
// Family pipeline cache (combinatorial surgery output per m)
// ---------------------------------------------------------------------------

const DeformedTiling& family_deformed(int m) {
  static std::map<int, DeformedTiling> cache;
  auto it = cache.find(m);
  if (it == cache.end()) {
    const CombinatorialTiling t = build_goldberg(family_spec(m));
    const GlobalColoring g = color_distributed(t);
    it = cache.emplace(m, apply_stitches(t, g, default_stitch_template())).first;
  }
  return it->second;
}

struct RangeProbeResult {
  RadiusProbe probe;
  std::vector<Vec3> positions;  // kept when feasible (warm-start donor)
};

// Seed scan, outward expansion and bisection of both ends, generic over the
// probe.  The probe owns warm-start state.
RadiusRange run_range_scan(int m, const OptimizerConfig& cfg, double r0,
                           const std::function<RadiusProbe(double)>& probe_fn) {
  RadiusRange rr;
  rr.m = m;
  std::map<double, bool> seen;
  auto probe = [&](double r) {
    auto it = seen.find(r);
    if (it != seen.end()) return it->second;
    const RadiusProbe p = probe_fn(r);
    rr.probes.push_back(p);
    seen.emplace(r, p.feasible);
    return p.feasible;
  };

  const std::array<double, 13> offsets{0.0, 0.5,  -0.5, 1.0,  -1.0, 1.5, -1.5,
                                       2.0, -2.0, 2.5,  -2.5, 3.0,  -3.0};
  double seed = -1.0;
  for (double off : offsets) {
    const double r = r0 + off;
    if (r < 0.55) continue;
    if (probe(r)) {
      seed = r;
      break;
    }
  }
  if (seed < 0.0)
    throw NoFeasibleSeed("no feasible radius near " + fmt_double(r0) + " for m=" +
                         std::to_string(m));

  double lo_feas = seed, hi_feas = seed;
  double lo_infeas = -1.0, hi_infeas = -1.0;
  for (int step = 1; step <= 80; ++step) {
    const double r = hi_feas + 0.5;
    if (probe(r)) {
      hi_feas = r;
    } else {
      hi_infeas = r;
      break;
    }
  }
  if (hi_infeas < 0.0) throw std::runtime_error("radius scan failed to bracket the upper end");
  for (int step = 1; step <= 80; ++step) {
    const double r = lo_feas - 0.5;
    if (r < 0.55) {
      lo_infeas = std::max(0.5, r);
      seen.emplace(lo_infeas, false);
      break;
    }
    if (probe(r)) {
      lo_feas = r;
    } else {
      lo_infeas = r;
      break;
    }
  }
  if (lo_infeas < 0.0) throw std::runtime_error("radius scan failed to bracket the lower end");

  while (hi_infeas - hi_feas > cfg.bisect_tol) {
    const double mid = 0.5 * (hi_feas + hi_infeas);
    if (probe(mid))
      hi_feas = mid;
    else
      hi_infeas = mid;
  }
  while (lo_feas - lo_infeas > cfg.bisect_tol) {
    const double mid = 0.5 * (lo_feas + lo_infeas);
    if (probe(mid))
      lo_feas = mid;
    else
      lo_infeas = mid;
  }
  rr.r_min = lo_feas;
  rr.r_max = hi_feas;
  return rr;
}

// Warm-start helper: nearest feasible donor, radially rescaled.
class WarmStore {
 public:
  void add(double r, std::vector<Vec3> positions) { store_[r] = std::move(positions); }
  bool apply(SphericalTiling& s, double r) const {
    if (store_.empty()) return false;
    auto it = store_.lower_bound(r);
    if (it == store_.end())
      --it;
    else if (it != store_.begin()) {
      auto prev = std::prev(it);
      if (r - prev->first < it->first - r) it = prev;
    }
    const double f = r / it->first;
    s.vertices = it->second;
    for (Vec3& v : s.vertices) v = v * f;
    return true;
  }

 private:
  std::map<double, std::vector<Vec3>> store_;
};

bool tiling_has_arcs(const SphericalTiling& s) {
  for (const auto& e : s.edges)
    if (e.kind == SphericalTiling::EdgeKind::UnitArc) return true;
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

OptimizerConfig parse_optimizer_config(const std::string& text) {
  OptimizerConfig cfg;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "tol_feas")
      cfg.tol_feas = parse_double(key, val);
    else if (key == "mu0")
      cfg.mu0 = parse_double(key, val);
    else if (key == "penalty_stages")
      cfg.penalty_stages = static_cast<int>(parse_int(key, val));
    else if (key == "penalty_factor")
      cfg.penalty_factor = parse_double(key, val);
    else if (key == "max_inner_iterations")
      cfg.max_inner_iterations = static_cast<int>(parse_int(key, val));
    else if (key == "polish_iterations")
      cfg.polish_iterations = static_cast<int>(parse_int(key, val));
    else if (key == "h_opt")
      cfg.h_opt = parse_double(key, val);
    else if (key == "h_fine")
      cfg.h_fine = parse_double(key, val);
    else if (key == "cutoff")
      cfg.cutoff = parse_double(key, val);
    else if (key == "lbfgs_history")
      cfg.lbfgs_history = static_cast<int>(parse_int(key, val));
    else if (key == "seed")
      cfg.seed = static_cast<unsigned long long>(parse_int(key, val));
    else if (key == "symmetry")
      cfg.symmetry = static_cast<int>(parse_int(key, val));
    else if (key == "bisect_tol")
      cfg.bisect_tol = parse_double(key, val);
    else if (key == "threads")
      cfg.threads = static_cast<int>(parse_int(key, val));
    else
      throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  return cfg;
}

std::string canonical_config_text(const OptimizerConfig& cfg) {
  // threads is runtime placement, not mathematics: results are independent of
  // it, so it stays out of the canonical text (and thus out of the hash).
  std::string out;
  out += "tol_feas=" + fmt_double(cfg.tol_feas) + "\n";
  out += "mu0=" + fmt_double(cfg.mu0) + "\n";
  out += "penalty_stages=" + std::to_string(cfg.penalty_stages) + "\n";
  out += "penalty_factor=" + fmt_double(cfg.penalty_factor) + "\n";
  out += "max_inner_iterations=" + std::to_string(cfg.max_inner_iterations) + "\n";
  out += "polish_iterations=" + std::to_string(cfg.polish_iterations) + "\n";
  out += "h_opt=" + fmt_double(cfg.h_opt) + "\n";
  out += "h_fine=" + fmt_double(cfg.h_fine) + "\n";
  out += "cutoff=" + fmt_double(cfg.cutoff) + "\n";
  out += "lbfgs_history=" + std::to_string(cfg.lbfgs_history) + "\n";
  out += "seed=" + std::to_string(cfg.seed) + "\n";
  out += "symmetry=" + std::to_string(cfg.symmetry) + "\n";
  out += "bisect_tol=" + fmt_double(cfg.bisect_tol) + "\n";
  return out;
}

std::string config_hash(const OptimizerConfig& cfg) {
  const std::string text = canonical_config_text(cfg);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// Constraint generation
// ---------------------------------------------------------------------------

ConstraintSet generate_constraints(const SphericalTiling& s, double cutoff) {
  validate_spherical_tiling(s);
  ConstraintSet cs;
  const int nt = s.tile_count();
  const double h = 0.05;

  std::vector<SimpleCap> caps(static_cast<std::size_t>(nt));
  for (int t = 0; t < nt; ++t) caps[static_cast<std::size_t>(t)] = cap_of(tile_point_set(s, t, h));

  for (int t = 0; t < nt; ++t) {
    Constraint c;
    c.kind = ConstraintKind::Diameter;
    c.a = t;
    cs.constraints.push_back(c);
  }
  for (int a = 0; a < nt; ++a) {
    for (int b = a + 1; b < nt; ++b) {
      if (s.tiles[static_cast<std::size_t>(a)].color != s.tiles[static_cast<std::size_t>(b)].color)
        continue;
      const double lb = simple_cap_min_chord(caps[static_cast<std::size_t>(a)],
                                             caps[static_cast<std::size_t>(b)], s.radius);
      if (lb < cutoff) {
        Constraint c;
        c.kind = ConstraintKind::Separation;
        c.a = a;
        c.b = b;
        cs.constraints.push_back(c);
      } else {
        cs.pruned_pairs.push_back({a, b});
      }
    }
  }
  for (const auto& pr : s.unit_chords) {
    Constraint c;
    c.kind = ConstraintKind::UnitChord;
    c.a = pr[0];
    c.b = pr[1];
    cs.constraints.push_back(c);
  }
  return cs;
}

// ---------------------------------------------------------------------------
// Symmetry map
// ---------------------------------------------------------------------------

std::optional<SymmetryMap> build_symmetry_map(const DeformedTiling& d) {
  SymmetryMap sym;
  std::vector<IcoRotation> rots;
  try {
    rots = ico_rotations(d.base.net);
  } catch (const std::exception&) {
    return std::nullopt;
  }

  const std::vector<int> rni = realized_node_ids(d);
  std::vector<int> vid_of_node(static_cast<std::size_t>(d.node_count()), -1);
  for (std::size_t i = 0; i < rni.size(); ++i)
    vid_of_node[static_cast<std::size_t>(rni[i])] = static_cast<int>(i);

  std::map<std::array<int, 3>, int> corner_of_triple;
  const int nc = d.corner_count();
  for (int c = 0; c < nc; ++c) {
    std::array<int, 3> key = d.base.corner_tiles[static_cast<std::size_t>(c)];
    std::sort(key.begin(), key.end());
    if (!corner_of_triple.emplace(key, c).second) return std::nullopt;
  }

  const std::vector<Vec3> npos = d.node_positions();
  const int nt = static_cast<int>(d.base.tiles.size());

  for (const IcoRotation& rot : rots) {
    std::vector<int> perm;
    try {
      perm = d.base.tile_permutation(rot);
    } catch (const std::exception&) {
      return std::nullopt;
    }

    // Color equivariance: the induced color relabeling must be a bijection.
    std::array<int, 7> sigma;
    sigma.fill(-1);
    for (int t = 0; t < nt; ++t) {
      const int c = d.coloring.tile_colors[static_cast<std::size_t>(t)];
      const int ci = d.coloring.tile_colors[static_cast<std::size_t>(perm[static_cast<std::size_t>(t)])];
      if (sigma[static_cast<std::size_t>(c)] < 0)
        sigma[static_cast<std::size_t>(c)] = ci;
      else if (sigma[static_cast<std::size_t>(c)] != ci)
        return std::nullopt;
    }

    std::vector<int> corner_img(static_cast<std::size_t>(nc), -1);
    for (int c = 0; c < nc; ++c) {
      std::array<int, 3> key;
      for (int i = 0; i < 3; ++i)
        key[static_cast<std::size_t>(i)] =
            perm[static_cast<std::size_t>(d.base.corner_tiles[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)])];
      std::sort(key.begin(), key.end());
      const auto it = corner_of_triple.find(key);
      if (it == corner_of_triple.end()) return std::nullopt;
      corner_img[static_cast<std::size_t>(c)] = it->second;
    }

    auto node_image = [&](int node) -> int {
      if (node < nc) {
        const int ci = corner_img[static_cast<std::size_t>(node)];
        if (d.corner_junction[static_cast<std::size_t>(ci)] >= 0) return -1;
        return ci;
      }
      const int j = node - nc;
      const int c0 = d.junctions[static_cast<std::size_t>(j)].corners[0];
      const int c1 = d.junctions[static_cast<std::size_t>(j)].corners[1];
      const int j0 = d.corner_junction[static_cast<std::size_t>(corner_img[static_cast<std::size_t>(c0)])];
      const int j1 = d.corner_junction[static_cast<std::size_t>(corner_img[static_cast<std::size_t>(c1)])];
      if (j0 < 0 || j0 != j1) return -1;
      return nc + j0;
    };

    std::vector<int> vmap(rni.size(), -1);
    for (std::size_t i = 0; i < rni.size(); ++i) {
      const int img = node_image(rni[i]);
      if (img < 0) return std::nullopt;
      const int w = vid_of_node[static_cast<std::size_t>(img)];
      if (w < 0) return std::nullopt;
      vmap[i] = w;
      // Geometric validation on the flat polyhedron.
      const Vec3 want = rot.R * npos[static_cast<std::size_t>(rni[i])];
      if (dist(want, npos[static_cast<std::size_t>(img)]) > 1e-6) return std::nullopt;
    }

    sym.rotations.push_back(rot.R);
    sym.vertex_map.push_back(std::move(vmap));
    sym.tile_map.push_back(std::move(perm));
  }
  return sym;
}

// ---------------------------------------------------------------------------
// Public solves
// ---------------------------------------------------------------------------

FeasibilityResult optimize_vertices(const SphericalTiling& s, const OptimizerConfig& cfg) {
  return optimize_vertices(s, cfg, nullptr);
}

FeasibilityResult optimize_vertices(const SphericalTiling& s, const OptimizerConfig& cfg,
                                    const SymmetryMap* sym) {
  const ConstraintSet cs = generate_constraints(s, cfg.cutoff);
  return solve_with(s, cs, cfg, sym);
}

FeasibilityProbe make_feasibility_probe(const OptimizerConfig& cfg) {
  return [cfg](const SphericalTiling& s, double radius) {
    if (radius <= 0.0) return false;
    if (radius <= 0.5 && tiling_has_arcs(s)) return false;
    SphericalTiling probe = s;
    const double f = radius / s.radius;
    probe.radius = radius;
    for (Vec3& v : probe.vertices) v = v * f;
    return optimize_vertices(probe, cfg).feasible;
  };
}

// ---------------------------------------------------------------------------
// Radius ranges
// ---------------------------------------------------------------------------

RadiusRange radius_range(int m, const OptimizerConfig& cfg) {
  if (m < 1) throw std::invalid_argument("radius_range: family index must be >= 1");
  const DeformedTiling& d = family_deformed(m);
  std::optional<SymmetryMap> sym;
  if (cfg.symmetry == 1 || (cfg.symmetry < 0 && m >= 3)) sym = build_symmetry_map(d);

  WarmStore warm;
  auto probe_fn = [&](double r) {
    SphericalTiling s = realize(d, r);
    warm.apply(s, r);
    const FeasibilityResult res = optimize_vertices(s, cfg, sym ? &*sym : nullptr);
    RadiusProbe p;
    p.r = r;
    p.feasible = res.feasible;
    p.max_violation = res.max_violation;
    p.iterations = res.iterations;
    if (res.feasible) warm.add(r, res.tiling.vertices);
    return p;
  };
  return run_range_scan(m, cfg, 3.5 * m + 0.5, probe_fn);
}

std::string probe_log_text(const RadiusRange& rr) {
  std::string out = "family_m=" + std::to_string(rr.m) + "\n";
  out += "probes=" + std::to_string(rr.probes.size()) + "\n";
  char buf[128];
  for (const RadiusProbe& p : rr.probes) {
    std::snprintf(buf, sizeof(buf), "probe r=%.6f feasible=%d max_violation=%.3e iterations=%d\n",
                  p.r, p.feasible ? 1 : 0, p.max_violation, p.iterations);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "r_min=%.6f r_max=%.6f\n", rr.r_min, rr.r_max);
  out += buf;
  return out;
}

RadiusRange exclusion_range(int m, double band, const OptimizerConfig& cfg) {
  if (m < 1) throw std::invalid_argument("exclusion_range: family index must be >= 1");
  if (band <= 0.0 || band >= 0.05)
    throw std::invalid_argument("exclusion_range: band must lie in (0, 0.05)");
  const DeformedTiling& d = family_deformed(m);
  std::optional<SymmetryMap> sym;
  if (cfg.symmetry == 1 || (cfg.symmetry < 0 && m >= 3)) sym = build_symmetry_map(d);

  // Pinned-at-1 pairs are exempt from the exclusion band.
  std::set<std::pair<int, int>> exempt;
  for (const auto& ch : d.chords) {
    int a = ch.separated[0], b = ch.separated[1];
    if (a >= 0 && b >= 0) exempt.insert({std::min(a, b), std::max(a, b)});
  }
  for (const auto& arc : d.arcs) {
    int a = arc.neighbor, b = arc.point_cell;
    if (a >= 0 && b >= 0) exempt.insert({std::min(a, b), std::max(a, b)});
  }

  WarmStore warm;
  auto probe_fn = [&](double r) {
    SphericalTiling s = realize(d, r);
    warm.apply(s, r);
    RadiusProbe p;
    p.r = r;
    const ConstraintSet base_cs = generate_constraints(s, cfg.cutoff);
    FeasibilityResult base = solve_with(s, base_cs, cfg, sym ? &*sym : nullptr);
    p.iterations = base.iterations;
    p.max_violation = base.max_violation;
    if (!base.feasible) {
      p.feasible = false;
      return p;
    }

    // Distances of every near-unit tile pair at the base solution, via a
    // one-shot evaluation of plain separation residuals.
    const SphericalTiling& sol = base.tiling;
    const int nt = sol.tile_count();
    std::vector<SimpleCap> caps(static_cast<std::size_t>(nt));
    for (int t = 0; t < nt; ++t)
      caps[static_cast<std::size_t>(t)] = cap_of(tile_point_set(sol, t, 0.05));
    ConstraintSet pair_cs;
    for (int a = 0; a < nt; ++a)
      for (int b = a + 1; b < nt; ++b)
        if (simple_cap_min_chord(caps[static_cast<std::size_t>(a)],
                                 caps[static_cast<std::size_t>(b)], sol.radius) < 1.2) {
          Constraint c;
          c.kind = ConstraintKind::Separation;
          c.a = a;
          c.b = b;
          pair_cs.constraints.push_back(c);
        }
    SphereBackend pair_backend(sol, pair_cs, nullptr, detail::resolve_threads(cfg));
    std::vector<double> x0(static_cast<std::size_t>(pair_backend.dim()), 0.0);
    pair_backend.set_resolution(cfg.h_fine);
    pair_backend.eval(x0);
    const std::vector<double> dres = pair_backend.public_residuals();

    ConstraintSet branched = base_cs;
    for (std::size_t i = 0; i < pair_cs.constraints.size(); ++i) {
      const Constraint& c = pair_cs.constraints[i];
      const double dmin = 1.0 - dres[i];
      if (std::abs(dmin - 1.0) >= 0.05) continue;
      if (exempt.count({c.a, c.b})) continue;
      Constraint br = c;
      if (dmin < 1.0) {
        br.upper = true;
        br.bound = 1.0 - band;
      } else {
        br.upper = false;
        br.bound = 1.0 + band;
      }
      branched.constraints.push_back(br);
    }

    const FeasibilityResult res = solve_with(sol, branched, cfg, sym ? &*sym : nullptr);
    p.feasible = res.feasible;
    p.max_violation = res.max_violation;
    p.iterations += res.iterations;
    if (res.feasible) warm.add(r, res.tiling.vertices);
    return p;
  };
  return run_range_scan(m, cfg, 3.5 * m + 0.5, probe_fn);
}

}  // namespace spheretile
