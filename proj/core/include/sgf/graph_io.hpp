#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "sgf/scene_model.hpp"

namespace sgf {

/// Scene graph JSON: scene_id, seed (16 hex digits), config_digest,
/// room_type, nodes [{id, label, centroid, size, level}], edges [{source,
/// target, relation, distance, theta_h_deg, theta_v_deg, proximity}], multi
/// [{kind, target|null, anchors, axis|null}]. Arrays follow the graph's
/// sorted order, so equal graphs serialize to equal bytes.
std::string graph_to_json(const SceneGraph& graph);

/// Inverse of graph_to_json up to floating-point rounding of boxes and
/// angles. Throws DataError naming `origin` on malformed input.
SceneGraph graph_from_json(std::string_view text, const std::string& origin = "<memory>");

SceneGraph load_graph(const std::filesystem::path& path);

}  // namespace sgf
