#include "sgf/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "sgf/error.hpp"
#include "sgf/io.hpp"
#include "sgf/ply.hpp"
#include "sgf/seed.hpp"

namespace sgf {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void IngestConfig::validate() const {
  if (max_points < 1) throw ConfigError("ingest.max_points must be >= 1");
  if (min_objects < 1) throw ConfigError("ingest.min_objects must be >= 1");
  if (!(max_extent_m > 0.0)) throw ConfigError("ingest.max_extent_m must be > 0");
  if (floor_labels.empty()) throw ConfigError("ingest.floor_labels must not be empty");
}

std::optional<SceneFormat> format_for(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".ply" || ext == ".PLY") return SceneFormat::kPly;
  if (ext == ".json" || ext == ".JSON") return SceneFormat::kJson;
  return std::nullopt;
}

namespace {

InstanceId parse_instance_key(std::string_view key, const std::string& origin) {
  InstanceId id = 0;
  const auto res = std::from_chars(key.data(), key.data() + key.size(), id);
  if (res.ec != std::errc() || res.ptr != key.data() + key.size()) {
    throw DataError(origin + ": instance key '" + std::string(key) + "' is not a non-negative integer");
  }
  return id;
}

void ensure_valid(const ScenePointCloud& scene, const std::string& origin) {
  const auto violations = validate_scene(scene);
  if (!violations.empty()) {
    throw DataError(origin + ": invalid scene: " + describe(violations));
  }
}

}  // namespace

ScenePointCloud scene_from_json(std::string_view text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(origin + ": JSON parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  ScenePointCloud scene;
  try {
    scene.scene_id = doc.at("scene_id").get<std::string>();
    scene.source_dataset = doc.value("source_dataset", std::string{});
    if (doc.contains("room_type") && !doc["room_type"].is_null()) {
      scene.room_type = doc["room_type"].get<std::string>();
    }
    for (const auto& [key, label] : doc.at("instances").items()) {
      scene.instances.emplace(parse_instance_key(key, origin), label.get<std::string>());
    }
    const json& pts = doc.at("points");
    if (!pts.is_array()) throw DataError(origin + ": 'points' must be an array");
    scene.points.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const json& row = pts[i];
      if (!row.is_array() || row.size() != 8) {
        throw DataError(origin + ": point " + std::to_string(i) + " must be an array of 8 numbers");
      }
      for (const auto& v : row) {
        if (!v.is_number()) throw DataError(origin + ": point " + std::to_string(i) + " has a non-numeric value");
      }
      const auto id_at = [&](std::size_t k, std::string_view what) {
        const json& v = row[k];
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0 || v.get<std::int64_t>() > 0xFFFFFFFFLL) {
          throw DataError(origin + ": point " + std::to_string(i) + " has invalid " + std::string(what));
        }
        return static_cast<std::uint32_t>(v.get<std::int64_t>());
      };
      const auto color_at = [&](std::size_t k) {
        const json& v = row[k];
        if (!v.is_number_integer()) {
          throw DataError(origin + ": point " + std::to_string(i) + " color must be an integer");
        }
        return static_cast<int>(std::clamp<std::int64_t>(v.get<std::int64_t>(), -100000, 100000));
      };
      scene.points.push_back(PointRecord{row[0].get<double>(), row[1].get<double>(), row[2].get<double>(),
                                         color_at(3), color_at(4), color_at(5), id_at(6, "instance_id"),
                                         id_at(7, "semantic_id")});
    }
  } catch (const json::exception& e) {
    throw DataError(origin + ": malformed scene: " + e.what());
  }
  ensure_valid(scene, origin);
  return scene;
}

std::string scene_to_json(const ScenePointCloud& scene) {
  ordered_json doc;
  doc["scene_id"] = scene.scene_id;
  doc["source_dataset"] = scene.source_dataset;
  doc["room_type"] = scene.room_type ? ordered_json(*scene.room_type) : ordered_json(nullptr);
  ordered_json instances = ordered_json::object();
  for (const auto& [id, label] : scene.instances) instances[std::to_string(id)] = label;
  doc["instances"] = std::move(instances);
  ordered_json pts = ordered_json::array();
  pts.get_ref<ordered_json::array_t&>().reserve(scene.points.size());
  for (const auto& p : scene.points) {
    pts.push_back(ordered_json::array({p.x, p.y, p.z, p.r, p.g, p.b, p.instance_id, p.semantic_id}));
  }
  doc["points"] = std::move(pts);
  return doc.dump() + "\n";
}

ScenePointCloud scene_from_ply(std::string_view bytes, const std::string& origin,
                               const std::map<InstanceId, std::string>* sidecar_labels) {
  ply::Contents contents;
  try {
    contents = ply::parse(bytes);
  } catch (const DataError& e) {
    throw DataError(origin + ": " + e.what());
  }
  ScenePointCloud scene;
  scene.points = std::move(contents.points);
  for (const std::string& c : contents.comments) {
    std::istringstream is(c);
    std::string key;
    is >> key;
    std::string rest;
    std::getline(is >> std::ws, rest);
    if (key == "scene_id") {
      scene.scene_id = rest;
    } else if (key == "source_dataset") {
      scene.source_dataset = rest;
    } else if (key == "room_type") {
      scene.room_type = rest;
    } else if (key == "instance") {
      std::istringstream ls(rest);
      std::string id_text;
      ls >> id_text;
      std::string label;
      std::getline(ls >> std::ws, label);
      if (label.empty()) throw DataError(origin + ": malformed instance comment '" + c + "'");
      scene.instances[parse_instance_key(id_text, origin)] = label;
    }
  }
  if (sidecar_labels) {
    for (const auto& [id, label] : *sidecar_labels) scene.instances.try_emplace(id, label);
  }
  if (scene.instances.empty()) {
    throw DataError(origin + ": no instance labels (expected 'comment instance <id> <label>' lines or a "
                    "<stem>.instances.json sidecar)");
  }
  if (scene.scene_id.empty()) scene.scene_id = std::filesystem::path(origin).stem().string();
  ensure_valid(scene, origin);
  return scene;
}

ScenePointCloud load_scene(const std::filesystem::path& path, std::optional<SceneFormat> format) {
  if (!format) format = format_for(path);
  if (!format) throw DataError(path.string() + ": unknown scene format (expected .ply or .json)");
  const std::string bytes = io::read_file(path);
  ScenePointCloud scene;
  if (*format == SceneFormat::kJson) {
    scene = scene_from_json(bytes, path.string());
  } else {
    std::filesystem::path sidecar = path;
    sidecar.replace_extension(".instances.json");
    std::map<InstanceId, std::string> labels;
    if (std::filesystem::exists(sidecar)) {
      json doc;
      try {
        doc = json::parse(io::read_file(sidecar));
        for (const auto& [key, label] : doc.items()) {
          labels[parse_instance_key(key, sidecar.string())] = label.get<std::string>();
        }
      } catch (const json::exception& e) {
        throw DataError(sidecar.string() + ": " + e.what());
      }
    }
    scene = scene_from_ply(bytes, path.string(), labels.empty() ? nullptr : &labels);
  }
  return scene;
}

// ---------------------------------------------------------------------------

ScenePointCloud subsample(const ScenePointCloud& scene, std::size_t max_points, std::uint64_t seed) {
  if (max_points < 1) throw ConfigError("subsample: max_points must be >= 1");
  const std::size_t n = scene.points.size();
  if (n <= max_points) return scene;

  std::map<InstanceId, std::vector<std::size_t>> by_instance;
  for (std::size_t i = 0; i < n; ++i) by_instance[scene.points[i].instance_id].push_back(i);
  if (max_points < by_instance.size()) {
    throw DataError("subsample: scene " + scene.scene_id + " has " + std::to_string(by_instance.size()) +
                    " instances, more than max_points=" + std::to_string(max_points));
  }

  Rng rng(derive_seed(seed, {"subsample", scene.scene_id}));
  std::vector<char> taken(n, 0);
  for (const auto& [id, indices] : by_instance) taken[rng.pick(indices)] = 1;

  std::vector<std::size_t> pool;
  pool.reserve(n - by_instance.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!taken[i]) pool.push_back(i);
  }
  // Partial Fisher-Yates: the first `need` slots become a uniform sample.
  const std::size_t need = max_points - by_instance.size();
  for (std::size_t i = 0; i < need; ++i) {
    std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
    taken[pool[i]] = 1;
  }

  ScenePointCloud out = scene;
  out.points.clear();
  out.points.reserve(max_points);
  for (std::size_t i = 0; i < n; ++i) {
    if (taken[i]) out.points.push_back(scene.points[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------

ScenePointCloud transform_scene(const Transform& t, const ScenePointCloud& scene) {
  ScenePointCloud out = scene;
  for (auto& p : out.points) {
    const Vec3 q = transform_point(t, p.position());
    p.x = q.x;
    p.y = q.y;
    p.z = q.z;
  }
  return out;
}

NormalizedScene normalize(const ScenePointCloud& scene, const std::set<std::string>& floor_labels) {
  std::optional<AABB> floor;
  for (const auto& p : scene.points) {
    const auto it = scene.instances.find(p.instance_id);
    if (it == scene.instances.end() || !floor_labels.contains(it->second)) continue;
    if (floor) {
      floor->extend(p.position());
    } else {
      floor = AABB::around(p.position());
    }
  }
  if (!floor) throw DataError("normalize: scene " + scene.scene_id + " has no floor");
  const Vec3 ext = floor->size();
  if (!(ext.x > 0.0) || !(ext.y > 0.0)) {
    throw DataError("normalize: scene " + scene.scene_id + " has a degenerate floor (zero XY extent)");
  }
  const Vec3 c{(floor->min().x + floor->max().x) / 2, (floor->min().y + floor->max().y) / 2, floor->max().z};

  // Longer side onto +X; a -90 degree turn about Z maps (x, y) to (y, -x).
  Transform t = identity_transform();
  if (ext.y > ext.x) {
    t = {0, 1, 0, 0, -1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};
  }
  const Vec3 rc = transform_point(t, c);
  t[3] = -rc.x;
  t[7] = -rc.y;
  t[11] = -rc.z;
  return {transform_scene(t, scene), t};
}

// ---------------------------------------------------------------------------

LabelMap label_map_from_json(std::string_view text, const std::string& origin) {
  LabelMap map;
  try {
    const json doc = json::parse(text);
    if (!doc.is_object()) throw DataError(origin + ": label map must be a JSON object");
    for (const auto& [src, dst] : doc.items()) map.emplace(src, dst.get<std::string>());
  } catch (const json::parse_error& e) {
    throw DataError(origin + ": JSON parse error at byte " + std::to_string(e.byte));
  } catch (const json::exception& e) {
    throw DataError(origin + ": " + e.what());
  }
  return map;
}

LabelMap load_label_map(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("label map not found: " + path.string());
  return label_map_from_json(io::read_file(path), path.string());
}

AlignedScene align_semantics(const ScenePointCloud& scene, const LabelMap& label_map) {
  AlignedScene out{scene, {}};
  std::set<std::string> vocab;
  for (const auto& [src, dst] : label_map) vocab.insert(dst);
  out.report.vocabulary.assign(vocab.begin(), vocab.end());

  std::map<InstanceId, std::uint32_t> new_ids;
  std::set<std::string> unmapped;
  for (auto& [id, label] : out.scene.instances) {
    const auto it = label_map.find(label);
    if (it == label_map.end()) {
      unmapped.insert(label);
      continue;
    }
    label = it->second;
    const auto pos = std::lower_bound(out.report.vocabulary.begin(), out.report.vocabulary.end(), label);
    new_ids[id] = static_cast<std::uint32_t>(pos - out.report.vocabulary.begin());
    ++out.report.remapped_instances;
  }
  for (auto& p : out.scene.points) {
    const auto it = new_ids.find(p.instance_id);
    if (it != new_ids.end()) p.semantic_id = it->second;
  }
  out.report.unmapped.assign(unmapped.begin(), unmapped.end());
  return out;
}

FilterDecision filter_scene(const ScenePointCloud& scene, const IngestConfig& cfg) {
  std::set<InstanceId> present;
  std::optional<AABB> extent;
  for (const auto& p : scene.points) {
    present.insert(p.instance_id);
    if (extent) {
      extent->extend(p.position());
    } else {
      extent = AABB::around(p.position());
    }
  }
  std::size_t objects = 0;
  for (InstanceId id : present) {
    const auto it = scene.instances.find(id);
    if (it != scene.instances.end() && !cfg.floor_labels.contains(it->second)) ++objects;
  }
  if (objects < cfg.min_objects) return FilterDecision::reject("min_objects", static_cast<double>(objects));
  const double diagonal = extent ? extent->diagonal_xy() : 0.0;
  if (diagonal > cfg.max_extent_m) return FilterDecision::reject("max_extent", diagonal);
  return FilterDecision::accept();
}

}  // namespace sgf
