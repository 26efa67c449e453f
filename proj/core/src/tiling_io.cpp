#include "spheretile/tiling_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace spheretile {

namespace {

using ordered_json = nlohmann::ordered_json;

int as_int(const ordered_json& j, const char* what) {
  if (!j.is_number_integer()) {
    throw MalformedTiling(std::string(what) + " must be an integer");
  }
  return j.get<int>();
}

double as_real(const ordered_json& j, const char* what) {
  if (!j.is_number()) throw MalformedTiling(std::string(what) + " must be a number");
  return j.get<double>();
}

const ordered_json& field(const ordered_json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw MalformedTiling(std::string("missing mandatory field '") + key + "'");
  return *it;
}

}  // namespace

std::string serialize_tiling(const SphericalTiling& s) {
  ordered_json j;
  j["format"] = kTilingFormat;
  ordered_json spec;
  spec["m"] = s.spec.m;
  spec["gm"] = s.spec.gm;
  spec["gn"] = s.spec.gn;
  spec["phases"] = s.spec.phases;
  j["spec"] = std::move(spec);
  j["radius"] = s.radius;
  ordered_json verts = ordered_json::array();
  for (const auto& v : s.vertices) verts.push_back(ordered_json::array({v.x, v.y, v.z}));
  j["vertices"] = std::move(verts);
  ordered_json edges = ordered_json::array();
  for (const auto& e : s.edges) {
    if (e.kind == SphericalTiling::EdgeKind::Geodesic) {
      edges.push_back(ordered_json::array({e.a, e.b}));
    } else {
      edges.push_back(ordered_json::array({e.a, e.b, e.center}));
    }
  }
  j["edges"] = std::move(edges);
  ordered_json tiles = ordered_json::array();
  for (const auto& t : s.tiles) {
    ordered_json tj;
    tj["color"] = t.color;
    tj["boundary"] = t.boundary;
    tiles.push_back(std::move(tj));
  }
  j["tiles"] = std::move(tiles);
  if (!s.unit_chords.empty() || !s.unscalable_tiles.empty() || s.patch) {
    ordered_json ann;
    if (!s.unit_chords.empty()) {
      ordered_json uc = ordered_json::array();
      for (const auto& p : s.unit_chords) uc.push_back(ordered_json::array({p[0], p[1]}));
      ann["unit_chords"] = std::move(uc);
    }
    if (!s.unscalable_tiles.empty()) ann["unscalable_tiles"] = s.unscalable_tiles;
    if (s.patch) ann["patch"] = true;
    j["annotations"] = std::move(ann);
  }
  ordered_json prov;
  prov["tool"] = s.provenance.tool;
  prov["config"] = s.provenance.config_hash;
  prov["seed"] = s.provenance.seed;
  j["provenance"] = std::move(prov);
  return j.dump(1) + "\n";
}

SphericalTiling parse_tiling(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw MalformedTiling(std::string("not valid JSON: ") + ex.what());
  }
  if (!j.is_object()) throw MalformedTiling("top level must be an object");
  if (!field(j, "format").is_string() || field(j, "format").get<std::string>() != kTilingFormat) {
    throw MalformedTiling(std::string("unknown format tag (expected ") + kTilingFormat + ")");
  }
  SphericalTiling s;
  const auto& spec = field(j, "spec");
  s.spec.m = as_int(field(spec, "m"), "spec.m");
  s.spec.gm = as_int(field(spec, "gm"), "spec.gm");
  s.spec.gn = as_int(field(spec, "gn"), "spec.gn");
  const auto& phases = field(spec, "phases");
  if (!phases.is_array()) throw MalformedTiling("spec.phases must be an array");
  for (const auto& p : phases) s.spec.phases.push_back(as_real(p, "spec.phases entry"));
  s.radius = as_real(field(j, "radius"), "radius");

  const auto& verts = field(j, "vertices");
  if (!verts.is_array()) throw MalformedTiling("vertices must be an array");
  s.vertices.reserve(verts.size());
  for (const auto& v : verts) {
    if (!v.is_array() || v.size() != 3) throw MalformedTiling("each vertex must be [x, y, z]");
    s.vertices.push_back(Vec3{as_real(v[0], "vertex coordinate"), as_real(v[1], "vertex coordinate"),
                              as_real(v[2], "vertex coordinate")});
  }

  const auto& edges = field(j, "edges");
  if (!edges.is_array()) throw MalformedTiling("edges must be an array");
  s.edges.reserve(edges.size());
  for (const auto& e : edges) {
    if (!e.is_array() || (e.size() != 2 && e.size() != 3)) {
      throw MalformedTiling("each edge must be [a, b] or [a, b, arc_center]");
    }
    SphericalTiling::Edge edge;
    edge.a = as_int(e[0], "edge endpoint");
    edge.b = as_int(e[1], "edge endpoint");
    if (e.size() == 3) {
      edge.kind = SphericalTiling::EdgeKind::UnitArc;
      edge.center = as_int(e[2], "edge arc center");
    }
    s.edges.push_back(edge);
  }

  const auto& tiles = field(j, "tiles");
  if (!tiles.is_array()) throw MalformedTiling("tiles must be an array");
  s.tiles.reserve(tiles.size());
  for (const auto& t : tiles) {
    if (!t.is_object()) throw MalformedTiling("each tile must be an object");
    SphericalTiling::Tile tile;
    tile.color = as_int(field(t, "color"), "tile color");
    const auto& b = field(t, "boundary");
    if (!b.is_array()) throw MalformedTiling("tile boundary must be an array");
    for (const auto& eid : b) tile.boundary.push_back(as_int(eid, "tile boundary edge"));
    s.tiles.push_back(std::move(tile));
  }

  if (auto it = j.find("annotations"); it != j.end()) {
    const auto& ann = *it;
    if (!ann.is_object()) throw MalformedTiling("annotations must be an object");
    if (auto uc = ann.find("unit_chords"); uc != ann.end()) {
      for (const auto& p : *uc) {
        if (!p.is_array() || p.size() != 2) throw MalformedTiling("unit chord must be [a, b]");
        s.unit_chords.push_back({as_int(p[0], "unit chord vertex"), as_int(p[1], "unit chord vertex")});
      }
    }
    if (auto ut = ann.find("unscalable_tiles"); ut != ann.end()) {
      for (const auto& t : *ut) s.unscalable_tiles.push_back(as_int(t, "unscalable tile id"));
    }
    if (auto pf = ann.find("patch"); pf != ann.end()) {
      if (!pf->is_boolean()) throw MalformedTiling("patch flag must be boolean");
      s.patch = pf->get<bool>();
    }
  }

  const auto& prov = field(j, "provenance");
  if (!field(prov, "tool").is_string() || !field(prov, "config").is_string()) {
    throw MalformedTiling("provenance tool and config must be strings");
  }
  s.provenance.tool = field(prov, "tool").get<std::string>();
  s.provenance.config_hash = field(prov, "config").get<std::string>();
  if (!field(prov, "seed").is_number_integer() && !field(prov, "seed").is_number_unsigned()) {
    throw MalformedTiling("provenance seed must be an integer");
  }
  s.provenance.seed = field(prov, "seed").get<std::uint64_t>();

  validate_spherical_tiling(s);
  return s;
}

void write_tiling_file(const SphericalTiling& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << serialize_tiling(s);
  if (!out) throw std::runtime_error("write failed: " + path);
}

SphericalTiling read_tiling_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_tiling(ss.str());
}

}  // namespace spheretile
