#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sgf/scene_model.hpp"

namespace sgf::ply {

enum class Format { kAscii, kBinaryLittleEndian, kBinaryBigEndian };

/// Vertex records and header comments of a PLY file. Vertex properties are
/// matched by name: x, y, z, red, green, blue, instance_id, semantic_id.
struct Contents {
  std::vector<PointRecord> points;
  std::vector<std::string> comments;
};

/// Parses an in-memory PLY file. Throws DataError naming the header line,
/// body line (ASCII) or byte offset (binary) on malformed input.
Contents parse(std::string_view bytes);

/// Serializes the points with the label table as "comment instance <id> <label>"
/// lines, plus scene_id / source_dataset / room_type comments.
std::string serialize(const ScenePointCloud& scene, Format format);

}  // namespace sgf::ply
