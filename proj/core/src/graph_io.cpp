#include "sgf/graph_io.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "sgf/error.hpp"
#include "sgf/io.hpp"
#include "sgf/seed.hpp"

namespace sgf {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

ordered_json vec(const Vec3& v) { return ordered_json::array({v.x, v.y, v.z}); }

Vec3 vec_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

std::string graph_to_json(const SceneGraph& graph) {
  ordered_json doc;
  doc["scene_id"] = graph.scene_id;
  doc["seed"] = to_hex(graph.seed);
  doc["config_digest"] = graph.config_digest;
  doc["room_type"] = graph.room_type ? ordered_json(*graph.room_type) : ordered_json(nullptr);
  ordered_json nodes = ordered_json::array();
  for (const auto& n : graph.nodes) {
    ordered_json j;
    j["id"] = n.id;
    j["label"] = n.label;
    j["centroid"] = vec(n.centroid);
    j["size"] = vec(n.size());
    j["level"] = n.level ? ordered_json(*n.level) : ordered_json(nullptr);
    nodes.push_back(std::move(j));
  }
  doc["nodes"] = std::move(nodes);
  ordered_json edges = ordered_json::array();
  for (const auto& e : graph.edges) {
    ordered_json j;
    j["source"] = e.source;
    j["target"] = e.target;
    j["relation"] = std::string(to_string(e.relation));
    j["distance"] = e.geom.distance;
    j["theta_h_deg"] = e.geom.theta_h * kDeg;
    j["theta_v_deg"] = e.geom.theta_v * kDeg;
    j["proximity"] = std::string(to_string(e.geom.proximity));
    edges.push_back(std::move(j));
  }
  doc["edges"] = std::move(edges);
  ordered_json multi = ordered_json::array();
  for (const auto& m : graph.multi) {
    ordered_json j;
    j["kind"] = std::string(to_string(m.kind));
    j["target"] = m.target ? ordered_json(*m.target) : ordered_json(nullptr);
    j["anchors"] = m.anchors;
    j["axis"] = m.axis ? ordered_json(std::string(to_string(*m.axis))) : ordered_json(nullptr);
    multi.push_back(std::move(j));
  }
  doc["multi"] = std::move(multi);
  return doc.dump(1) + "\n";
}

SceneGraph graph_from_json(std::string_view text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(origin + ": JSON parse error at byte " + std::to_string(e.byte));
  }
  SceneGraph g;
  try {
    g.scene_id = doc.at("scene_id").get<std::string>();
    g.seed = std::stoull(doc.at("seed").get<std::string>(), nullptr, 16);
    g.config_digest = doc.at("config_digest").get<std::string>();
    if (doc.contains("room_type") && !doc["room_type"].is_null()) g.room_type = doc["room_type"].get<std::string>();
    for (const auto& j : doc.at("nodes")) {
      ObjectNode n;
      n.id = j.at("id").get<InstanceId>();
      n.label = j.at("label").get<std::string>();
      n.centroid = vec_from(j.at("centroid"));
      const Vec3 size = vec_from(j.at("size"));
      if (!(size.x >= 0 && size.y >= 0 && size.z >= 0)) throw DataError(origin + ": negative node size");
      n.bbox = AABB(n.centroid - size * 0.5, n.centroid + size * 0.5);
      if (!j.at("level").is_null()) n.level = j["level"].get<int>();
      g.nodes.push_back(std::move(n));
    }
    for (const auto& j : doc.at("edges")) {
      Edge e;
      e.source = j.at("source").get<InstanceId>();
      e.target = j.at("target").get<InstanceId>();
      const auto rel = relation_from_string(j.at("relation").get<std::string>());
      if (!rel) throw DataError(origin + ": unknown relation '" + j["relation"].get<std::string>() + "'");
      e.relation = *rel;
      e.geom.distance = j.at("distance").get<double>();
      e.geom.theta_h = j.at("theta_h_deg").get<double>() / kDeg;
      e.geom.theta_v = j.at("theta_v_deg").get<double>() / kDeg;
      const auto prox = proximity_from_string(j.value("proximity", std::string("none")));
      if (!prox) throw DataError(origin + ": unknown proximity grade");
      e.geom.proximity = *prox;
      g.edges.push_back(e);
    }
    for (const auto& j : doc.at("multi")) {
      MultiRelation m;
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "between") {
        m.kind = MultiKind::kBetween;
      } else if (kind == "aligned") {
        m.kind = MultiKind::kAligned;
      } else {
        throw DataError(origin + ": unknown multi-relation kind '" + kind + "'");
      }
      if (!j.at("target").is_null()) m.target = j["target"].get<InstanceId>();
      m.anchors = j.at("anchors").get<std::vector<InstanceId>>();
      if (!j.at("axis").is_null()) {
        const std::string axis = j["axis"].get<std::string>();
        if (axis != "X" && axis != "Y") throw DataError(origin + ": unknown axis '" + axis + "'");
        m.axis = axis == "X" ? Axis::kX : Axis::kY;
      }
      g.multi.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw DataError(origin + ": malformed scene graph: " + e.what());
  } catch (const std::logic_error& e) {
    throw DataError(origin + ": malformed scene graph: " + e.what());
  }
  std::sort(g.nodes.begin(), g.nodes.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(g.edges.begin(), g.edges.end(), edge_less);
  const auto violations = validate_graph(g);
  if (!violations.empty()) throw DataError(origin + ": invalid scene graph: " + describe(violations));
  return g;
}

SceneGraph load_graph(const std::filesystem::path& path) {
  return graph_from_json(io::read_file(path), path.string());
}

}  // namespace sgf
