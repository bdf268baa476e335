#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sgf/scene_model.hpp"

namespace sgf {

/// Which nodes receive the non-contact vertical pass.
enum class HangableRule {
  kNoInContactParent,      // nodes with no in-contact vertical relation (default)
  kNoHorizontalRelation,   // literal reading: nodes with no horizontal relation
};

/// Geometric thresholds for relation extraction. Distances in meters, ratios
/// unitless.
struct GraphConfig {
  double eps_contact_m = 0.05;
  double footprint_overlap_min = 0.3;
  double containment_inside = 0.95;
  double containment_embedded = 0.5;
  std::set<std::string> container_labels = {"basket", "bathtub", "bin", "bowl", "box", "bucket",
                                             "cabinet", "closet", "drawer", "pot", "shelf", "sink",
                                             "trash can", "wardrobe"};
  std::set<std::string> wall_labels = {"wall"};
  std::set<std::string> floor_labels = {"floor"};
  double hang_gap_m = 0.10;
  double above_overlap_min = 0.2;
  double higher_min_dz_m = 0.3;
  double higher_max_xy_m = 2.0;
  double near_max_m = 1.5;
  double close_max_m = 0.5;
  double adjacent_gap_m = 0.2;
  double aligned_delta_floor_m = 0.10;
  double aligned_delta_scale = 0.02;
  HangableRule hangable_rule = HangableRule::kNoInContactParent;
  std::uint64_t seed = 0;

  /// Throws ConfigError unless every threshold is > 0 and
  /// containment_inside > containment_embedded.
  void validate() const;

  /// Every length threshold multiplied by `s`; ratios unchanged.
  GraphConfig scaled(double s) const;
};

// ---------------------------------------------------------------------------
// Refinement table

struct RefinementKey {
  std::string target_label;
  RelationType relation = RelationType::kHangingOn;
  std::string anchor_label;

  auto operator<=>(const RefinementKey&) const = default;
};

/// Class-conditioned relation renaming, e.g. (tv, hanging-on, wall) -> mounted-on.
class RefinementMap {
 public:
  /// Throws ConfigError when `replacement` leaves the category of key.relation.
  void add(const RefinementKey& key, RelationType replacement);
  std::optional<RelationType> lookup(std::string_view target_label, RelationType relation,
                                     std::string_view anchor_label) const;

  const std::map<RefinementKey, RelationType>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  /// JSON list of {"target","relation","anchor","refined"} objects.
  static RefinementMap from_json(std::string_view text, const std::string& origin = "<memory>");
  std::string to_json() const;

  /// The bundled table (core/data/refinement.json).
  static RefinementMap builtin();

 private:
  std::map<RefinementKey, RelationType> entries_;
};

// ---------------------------------------------------------------------------
// Pairwise predicates

/// First match in precedence order inside > embedded-into > placed-in >
/// supported-by.
std::optional<RelationType> vertical_in_contact(const ObjectNode& target, const ObjectNode& anchor,
                                                const GraphConfig& cfg);

/// First match in precedence order hanging-on > above/below > higher/lower-than.
/// Never yields affixed-on or mounted-on; those come from refinement.
std::optional<RelationType> vertical_non_contact(const ObjectNode& target, const ObjectNode& anchor,
                                                 const GraphConfig& cfg);

/// Distance and angles of the displacement anchor -> target.
EdgeGeometry edge_geometry(const ObjectNode& target, const ObjectNode& anchor);

struct HorizontalRelation {
  RelationType relation;
  EdgeGeometry geom;
};

/// Directional relation in the normalized room frame (+X right, +Y front):
/// 90 degree sectors centered on the axes, near/far split for left/right, and
/// the proximity grade recorded in geom. None when the XY centroids coincide.
std::optional<HorizontalRelation> horizontal(const ObjectNode& target, const ObjectNode& anchor,
                                             const GraphConfig& cfg);

// ---------------------------------------------------------------------------
// Graph passes

/// Levels from support chains: floor roots -1, children parent + 1. Parentless
/// non-root nodes take the level of their first non-contact anchor that sits
/// on a floor-rooted chain (0 if none). Non-contact edges spanning more than
/// one level are dropped. Throws DataError listing any in-contact cycle.
SceneGraph assign_levels(SceneGraph graph, const GraphConfig& cfg);

/// between and aligned relations among sibling groups.
std::vector<MultiRelation> multi_object(const SceneGraph& graph, const GraphConfig& cfg);

SceneGraph refine(SceneGraph graph, const RefinementMap& refinement);

/// Full construction: nodes, in-contact pass, hangable non-contact pass,
/// levels, horizontal pass, multi-object pass, refinement.
SceneGraph build_scene_graph(const ScenePointCloud& scene, const GraphConfig& cfg,
                             const RefinementMap& refinement = RefinementMap::builtin());

/// Same pipeline starting from prebuilt nodes.
SceneGraph build_scene_graph(std::string scene_id, std::optional<std::string> room_type,
                             std::vector<ObjectNode> nodes, const GraphConfig& cfg,
                             const RefinementMap& refinement);

/// SHA-256 over the canonical JSON of the config and refinement table.
std::string graph_config_digest(const GraphConfig& cfg, const RefinementMap& refinement);

}  // namespace sgf
