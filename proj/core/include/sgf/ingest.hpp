#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sgf/scene_model.hpp"
#include "sgf/transform.hpp"

namespace sgf {

struct IngestConfig {
  std::size_t max_points = 240000;
  std::size_t min_objects = 4;
  double max_extent_m = 25.0;
  std::uint64_t seed = 0;
  std::filesystem::path label_map_path;
  std::set<std::string> floor_labels = {"floor"};

  /// Throws ConfigError when an invariant fails.
  void validate() const;
};

enum class SceneFormat { kPly, kJson };

/// Format from the file extension (.ply / .json).
std::optional<SceneFormat> format_for(const std::filesystem::path& path);

/// Loads and validates a scene. PLY label tables come from header comments or
/// from a sidecar `<stem>.instances.json`. Throws DataError on parse failures
/// (with byte offset or line) and on invariant violations (listing them).
ScenePointCloud load_scene(const std::filesystem::path& path, std::optional<SceneFormat> format = std::nullopt);

/// Canonical JSON scene codec. Decoding validates like load_scene.
ScenePointCloud scene_from_json(std::string_view text, const std::string& origin = "<memory>");
std::string scene_to_json(const ScenePointCloud& scene);

/// Builds and validates a scene from PLY bytes plus an optional sidecar label table.
ScenePointCloud scene_from_ply(std::string_view bytes, const std::string& origin,
                               const std::map<InstanceId, std::string>* sidecar_labels = nullptr);

/// Caps the scene at `max_points` by seeded uniform sampling without
/// replacement, reserving one point per instance first so no instance
/// disappears. Returns the input unchanged when already under the cap.
ScenePointCloud subsample(const ScenePointCloud& scene, std::size_t max_points, std::uint64_t seed);

ScenePointCloud transform_scene(const Transform& t, const ScenePointCloud& scene);

struct NormalizedScene {
  ScenePointCloud scene;
  Transform transform;
};

/// Moves the floor box's XY center and top face to the origin and turns the
/// longer XY side of the floor box onto +X (ties keep the orientation).
NormalizedScene normalize(const ScenePointCloud& scene, const std::set<std::string>& floor_labels);

using LabelMap = std::map<std::string, std::string>;

/// JSON object {"<source_label>": "<canonical_label>"}.
LabelMap load_label_map(const std::filesystem::path& path);
LabelMap label_map_from_json(std::string_view text, const std::string& origin = "<memory>");

struct AlignmentReport {
  std::vector<std::string> unmapped;    // sorted distinct labels without a mapping
  std::vector<std::string> vocabulary;  // sorted distinct canonical labels of the map
  std::size_t remapped_instances = 0;
};

struct AlignedScene {
  ScenePointCloud scene;
  AlignmentReport report;
};

/// Relabels instances through the map. Mapped instances take their index in
/// the canonical vocabulary as semantic id; unmapped ones are kept verbatim.
AlignedScene align_semantics(const ScenePointCloud& scene, const LabelMap& label_map);

struct FilterDecision {
  bool keep = true;
  std::string rule;  // "min_objects" or "max_extent" on reject
  double measured = 0.0;

  static FilterDecision accept() { return {}; }
  static FilterDecision reject(std::string rule, double measured) { return {false, std::move(rule), measured}; }
};

/// Rejects scenes with fewer than cfg.min_objects non-floor objects or an XY
/// diagonal above cfg.max_extent_m.
FilterDecision filter_scene(const ScenePointCloud& scene, const IngestConfig& cfg);

}  // namespace sgf
