#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sgf/geometry.hpp"

namespace sgf {

using InstanceId = std::uint32_t;

/// One row of the N×8 point matrix: position, color, instance and semantic id.
struct PointRecord {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  int r = 0;
  int g = 0;
  int b = 0;
  InstanceId instance_id = 0;
  std::uint32_t semantic_id = 0;

  Vec3 position() const { return {x, y, z}; }
  friend bool operator==(const PointRecord&, const PointRecord&) = default;
};

struct ScenePointCloud {
  std::string scene_id;
  std::string source_dataset;
  std::optional<std::string> room_type;
  std::map<InstanceId, std::string> instances;  // instance id -> semantic label
  std::vector<PointRecord> points;

  friend bool operator==(const ScenePointCloud&, const ScenePointCloud&) = default;
};

/// A broken invariant, with the ids (instance ids or point indices) involved.
struct Violation {
  std::string invariant;
  std::string detail;
  std::vector<std::int64_t> ids;
};

/// Diagnostics only; an empty result means every scene invariant holds.
std::vector<Violation> validate_scene(const ScenePointCloud& scene);

std::string describe(const std::vector<Violation>& violations);

// ---------------------------------------------------------------------------
// Relations

enum class RelationCategory { kInContactVertical, kNonContactVertical, kHorizontal, kMultiObject };

enum class RelationType {
  // in-contact vertical
  kSupportedBy,
  kEmbeddedInto,
  kPlacedIn,
  kInside,
  // non-contact vertical
  kHangingOn,
  kAffixedOn,
  kMountedOn,
  kAbove,
  kBelow,
  kHigherThan,
  kLowerThan,
  // horizontal
  kNearLeftOf,
  kFarLeftOf,
  kNearRightOf,
  kFarRightOf,
  kBehind,
  kInFrontOf,
  kCloseTo,
  kAdjacentTo,
  kBesides,
  kNextTo,
  // multi-object
  kBetween,
  kAligned,
};

inline constexpr std::size_t kRelationTypeCount = 23;
inline constexpr std::size_t kTaxonomySize = 21;

/// Every relation in declaration order.
const std::array<RelationType, kRelationTypeCount>& all_relation_types();

/// The 21-entry relation taxonomy: identical to RelationType except that the
/// near/far variants of left-of and right-of share one bin each.
std::string_view taxonomy_bin(RelationType r);
const std::array<std::string_view, kTaxonomySize>& taxonomy_bins();

RelationCategory category_of(RelationType r);
std::string_view to_string(RelationType r);
std::optional<RelationType> relation_from_string(std::string_view s);
std::string_view to_string(RelationCategory c);

bool is_left_of(RelationType r);
bool is_right_of(RelationType r);

/// above<->below, higher-than<->lower-than, left<->right, behind<->in-front-of.
std::optional<RelationType> mirror_of(RelationType r);

// ---------------------------------------------------------------------------
// Graph

/// One object instance. `level` stays empty until hierarchy assignment;
/// -1 is reserved for the floor root.
struct ObjectNode {
  InstanceId id = 0;
  std::string label;
  Vec3 centroid;
  AABB bbox;
  std::optional<int> level;
  std::size_t point_count = 0;

  Vec3 size() const { return bbox.size(); }
  friend bool operator==(const ObjectNode&, const ObjectNode&) = default;
};

enum class Proximity { kNone, kClose, kAdjacent };
std::string_view to_string(Proximity p);
std::optional<Proximity> proximity_from_string(std::string_view s);

struct EdgeGeometry {
  double distance = 0.0;  // 3D centroid distance, meters
  double theta_h = 0.0;   // radians, atan2 of the XY displacement anchor -> subject
  double theta_v = 0.0;   // radians, elevation of the displacement
  Proximity proximity = Proximity::kNone;

  friend bool operator==(const EdgeGeometry&, const EdgeGeometry&) = default;
};

/// Directed relation triplet: `source` is the described object, `target`
/// the anchor ("source <relation> target").
struct Edge {
  InstanceId source = 0;
  InstanceId target = 0;
  RelationType relation = RelationType::kSupportedBy;
  EdgeGeometry geom;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Total order used for byte-stable output.
bool edge_less(const Edge& a, const Edge& b);

enum class MultiKind { kBetween, kAligned };
enum class Axis { kX, kY };

std::string_view to_string(MultiKind k);
std::string_view to_string(Axis a);

struct MultiRelation {
  MultiKind kind = MultiKind::kBetween;
  std::optional<InstanceId> target;  // between only
  std::vector<InstanceId> anchors;   // 2 for between, >= 3 members for aligned
  std::optional<Axis> axis;          // aligned only

  friend bool operator==(const MultiRelation&, const MultiRelation&) = default;
};

bool multi_less(const MultiRelation& a, const MultiRelation& b);

struct SceneGraph {
  std::string scene_id;
  std::optional<std::string> room_type;
  std::vector<ObjectNode> nodes;  // sorted by id
  std::vector<Edge> edges;        // sorted by edge_less
  std::vector<MultiRelation> multi;
  std::string config_digest;
  std::uint64_t seed = 0;

  const ObjectNode* find(InstanceId id) const;
  const ObjectNode& at(InstanceId id) const;
};

/// Checks every SceneGraph invariant: unique ids, edge endpoints exist, no
/// self-edges, |level gap| <= 1 across edges, at most one in-contact parent,
/// multi-relation arity.
std::vector<Violation> validate_graph(const SceneGraph& graph);

/// Node for one instance: exact min/max box of its points, centroid at the box
/// center, level unset. Throws DataError for unknown or empty instances.
ObjectNode node_from_instance(const ScenePointCloud& scene, InstanceId id);

/// All nodes with at least one point, sorted by id, in a single pass.
std::vector<ObjectNode> nodes_from_scene(const ScenePointCloud& scene);

}  // namespace sgf
