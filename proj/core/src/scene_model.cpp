#include "sgf/scene_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "sgf/error.hpp"

namespace sgf {

namespace {

struct RelationInfo {
  RelationType type;
  std::string_view name;
  std::string_view bin;
  RelationCategory category;
};

constexpr std::array<RelationInfo, kRelationTypeCount> kRelations = {{
    {RelationType::kSupportedBy, "supported-by", "supported-by", RelationCategory::kInContactVertical},
    {RelationType::kEmbeddedInto, "embedded-into", "embedded-into", RelationCategory::kInContactVertical},
    {RelationType::kPlacedIn, "placed-in", "placed-in", RelationCategory::kInContactVertical},
    {RelationType::kInside, "inside", "inside", RelationCategory::kInContactVertical},
    {RelationType::kHangingOn, "hanging-on", "hanging-on", RelationCategory::kNonContactVertical},
    {RelationType::kAffixedOn, "affixed-on", "affixed-on", RelationCategory::kNonContactVertical},
    {RelationType::kMountedOn, "mounted-on", "mounted-on", RelationCategory::kNonContactVertical},
    {RelationType::kAbove, "above", "above", RelationCategory::kNonContactVertical},
    {RelationType::kBelow, "below", "below", RelationCategory::kNonContactVertical},
    {RelationType::kHigherThan, "higher-than", "higher-than", RelationCategory::kNonContactVertical},
    {RelationType::kLowerThan, "lower-than", "lower-than", RelationCategory::kNonContactVertical},
    {RelationType::kNearLeftOf, "near-left-of", "left-of", RelationCategory::kHorizontal},
    {RelationType::kFarLeftOf, "far-left-of", "left-of", RelationCategory::kHorizontal},
    {RelationType::kNearRightOf, "near-right-of", "right-of", RelationCategory::kHorizontal},
    {RelationType::kFarRightOf, "far-right-of", "right-of", RelationCategory::kHorizontal},
    {RelationType::kBehind, "behind", "behind", RelationCategory::kHorizontal},
    {RelationType::kInFrontOf, "in-front-of", "in-front-of", RelationCategory::kHorizontal},
    {RelationType::kCloseTo, "close-to", "close-to", RelationCategory::kHorizontal},
    {RelationType::kAdjacentTo, "adjacent-to", "adjacent-to", RelationCategory::kHorizontal},
    {RelationType::kBesides, "besides", "besides", RelationCategory::kHorizontal},
    {RelationType::kNextTo, "next-to", "next-to", RelationCategory::kHorizontal},
    {RelationType::kBetween, "between", "between", RelationCategory::kMultiObject},
    {RelationType::kAligned, "aligned", "aligned", RelationCategory::kMultiObject},
}};

const RelationInfo& info(RelationType r) { return kRelations[static_cast<std::size_t>(r)]; }

}  // namespace

const std::array<RelationType, kRelationTypeCount>& all_relation_types() {
  static const auto kAll = [] {
    std::array<RelationType, kRelationTypeCount> out{};
    for (std::size_t i = 0; i < kRelations.size(); ++i) out[i] = kRelations[i].type;
    return out;
  }();
  return kAll;
}

std::string_view taxonomy_bin(RelationType r) { return info(r).bin; }

const std::array<std::string_view, kTaxonomySize>& taxonomy_bins() {
  static const auto kBins = [] {
    std::array<std::string_view, kTaxonomySize> out{};
    std::size_t n = 0;
    for (const auto& ri : kRelations) {
      if (std::find(out.begin(), out.begin() + n, ri.bin) == out.begin() + n) out[n++] = ri.bin;
    }
    return out;
  }();
  return kBins;
}

RelationCategory category_of(RelationType r) { return info(r).category; }

std::string_view to_string(RelationType r) { return info(r).name; }

std::optional<RelationType> relation_from_string(std::string_view s) {
  for (const auto& ri : kRelations) {
    if (ri.name == s) return ri.type;
  }
  return std::nullopt;
}

std::string_view to_string(RelationCategory c) {
  switch (c) {
    case RelationCategory::kInContactVertical: return "in-contact-vertical";
    case RelationCategory::kNonContactVertical: return "non-contact-vertical";
    case RelationCategory::kHorizontal: return "horizontal";
    case RelationCategory::kMultiObject: return "multi-object";
  }
  return "?";
}

bool is_left_of(RelationType r) { return r == RelationType::kNearLeftOf || r == RelationType::kFarLeftOf; }
bool is_right_of(RelationType r) { return r == RelationType::kNearRightOf || r == RelationType::kFarRightOf; }

std::optional<RelationType> mirror_of(RelationType r) {
  switch (r) {
    case RelationType::kAbove: return RelationType::kBelow;
    case RelationType::kBelow: return RelationType::kAbove;
    case RelationType::kHigherThan: return RelationType::kLowerThan;
    case RelationType::kLowerThan: return RelationType::kHigherThan;
    case RelationType::kNearLeftOf: return RelationType::kNearRightOf;
    case RelationType::kNearRightOf: return RelationType::kNearLeftOf;
    case RelationType::kFarLeftOf: return RelationType::kFarRightOf;
    case RelationType::kFarRightOf: return RelationType::kFarLeftOf;
    case RelationType::kBehind: return RelationType::kInFrontOf;
    case RelationType::kInFrontOf: return RelationType::kBehind;
    default: return std::nullopt;
  }
}

std::string_view to_string(Proximity p) {
  switch (p) {
    case Proximity::kNone: return "none";
    case Proximity::kClose: return "close";
    case Proximity::kAdjacent: return "adjacent";
  }
  return "none";
}

std::optional<Proximity> proximity_from_string(std::string_view s) {
  if (s == "none") return Proximity::kNone;
  if (s == "close") return Proximity::kClose;
  if (s == "adjacent") return Proximity::kAdjacent;
  return std::nullopt;
}

std::string_view to_string(MultiKind k) { return k == MultiKind::kBetween ? "between" : "aligned"; }
std::string_view to_string(Axis a) { return a == Axis::kX ? "X" : "Y"; }

bool edge_less(const Edge& a, const Edge& b) {
  return std::tuple(a.source, a.target, static_cast<int>(a.relation)) <
         std::tuple(b.source, b.target, static_cast<int>(b.relation));
}

bool multi_less(const MultiRelation& a, const MultiRelation& b) {
  const auto key = [](const MultiRelation& m) {
    return std::tuple(static_cast<int>(m.kind), m.target.value_or(0), m.anchors,
                      m.axis ? static_cast<int>(*m.axis) : -1);
  };
  return key(a) < key(b);
}

// ---------------------------------------------------------------------------

std::vector<Violation> validate_scene(const ScenePointCloud& scene) {
  std::vector<Violation> out;
  if (scene.points.empty()) {
    out.push_back({"point_count", "scene has no points", {}});
    return out;
  }
  std::set<InstanceId> unknown;
  std::map<InstanceId, std::set<std::uint32_t>> semantic_ids;
  for (std::size_t i = 0; i < scene.points.size(); ++i) {
    const PointRecord& p = scene.points[i];
    const auto idx = static_cast<std::int64_t>(i);
    if (!p.position().finite()) {
      out.push_back({"finite_coordinates", "point " + std::to_string(i) + " has a non-finite coordinate", {idx}});
    }
    const auto in_range = [](int c) { return c >= 0 && c <= 255; };
    if (!in_range(p.r) || !in_range(p.g) || !in_range(p.b)) {
      out.push_back({"color_range",
                     "point " + std::to_string(i) + " color (" + std::to_string(p.r) + "," +
                         std::to_string(p.g) + "," + std::to_string(p.b) + ") outside 0-255",
                     {idx}});
    }
    if (!scene.instances.contains(p.instance_id)) {
      unknown.insert(p.instance_id);
    } else {
      semantic_ids[p.instance_id].insert(p.semantic_id);
    }
  }
  for (InstanceId id : unknown) {
    out.push_back({"known_instance", "points reference undeclared instance " + std::to_string(id), {id}});
  }
  for (const auto& [id, ids] : semantic_ids) {
    if (ids.size() > 1) {
      out.push_back({"semantic_consistency",
                     "instance " + std::to_string(id) + " (" + scene.instances.at(id) + ") carries " +
                         std::to_string(ids.size()) + " different semantic ids",
                     {id}});
    }
  }
  return out;
}

std::string describe(const std::vector<Violation>& violations) {
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violations[i].invariant << ": " << violations[i].detail;
  }
  return os.str();
}

// ---------------------------------------------------------------------------

const ObjectNode* SceneGraph::find(InstanceId id) const {
  const auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                                   [](const ObjectNode& n, InstanceId v) { return n.id < v; });
  if (it != nodes.end() && it->id == id) return &*it;
  // Fall back to a scan for graphs whose nodes are not sorted.
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

const ObjectNode& SceneGraph::at(InstanceId id) const {
  const ObjectNode* n = find(id);
  if (!n) throw DataError("scene graph " + scene_id + " has no node " + std::to_string(id));
  return *n;
}

std::vector<Violation> validate_graph(const SceneGraph& graph) {
  std::vector<Violation> out;
  std::unordered_map<InstanceId, const ObjectNode*> by_id;
  for (const auto& n : graph.nodes) {
    if (!by_id.emplace(n.id, &n).second) {
      out.push_back({"unique_node_id", "duplicate node id " + std::to_string(n.id), {n.id}});
    }
  }
  std::map<InstanceId, int> in_contact_parents;
  for (const auto& e : graph.edges) {
    const auto s = by_id.find(e.source);
    const auto t = by_id.find(e.target);
    if (s == by_id.end() || t == by_id.end()) {
      out.push_back({"edge_endpoints", "edge " + std::to_string(e.source) + "->" + std::to_string(e.target) +
                                           " references a missing node",
                     {e.source, e.target}});
      continue;
    }
    if (e.source == e.target) {
      out.push_back({"no_self_edge", "self edge on " + std::to_string(e.source), {e.source}});
    }
    if (s->second->level && t->second->level && std::abs(*s->second->level - *t->second->level) > 1) {
      out.push_back({"level_gap",
                     "edge " + std::to_string(e.source) + " " + std::string(to_string(e.relation)) + " " +
                         std::to_string(e.target) + " spans levels " + std::to_string(*s->second->level) +
                         " and " + std::to_string(*t->second->level),
                     {e.source, e.target}});
    }
    if (category_of(e.relation) == RelationCategory::kInContactVertical && ++in_contact_parents[e.source] == 2) {
      out.push_back({"single_in_contact_parent",
                     "node " + std::to_string(e.source) + " has several in-contact parents", {e.source}});
    }
    if (category_of(e.relation) == RelationCategory::kMultiObject) {
      out.push_back({"pairwise_edge", "multi-object relation stored as a pairwise edge", {e.source, e.target}});
    }
  }
  for (const auto& m : graph.multi) {
    std::vector<std::int64_t> ids(m.anchors.begin(), m.anchors.end());
    if (m.kind == MultiKind::kBetween && (m.anchors.size() != 2 || !m.target)) {
      out.push_back({"between_arity", "between relation needs a target and exactly 2 anchors", ids});
    }
    if (m.kind == MultiKind::kAligned && (m.anchors.size() < 3 || !m.axis)) {
      out.push_back({"aligned_arity", "aligned relation needs an axis and at least 3 members", ids});
    }
    for (InstanceId a : m.anchors) {
      if (!by_id.contains(a)) out.push_back({"multi_members", "multi relation references missing node", {a}});
    }
    if (m.target && !by_id.contains(*m.target)) {
      out.push_back({"multi_members", "multi relation references missing node", {*m.target}});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

ObjectNode node_from_instance(const ScenePointCloud& scene, InstanceId id) {
  const auto label = scene.instances.find(id);
  if (label == scene.instances.end()) {
    throw DataError("scene " + scene.scene_id + ": unknown instance id " + std::to_string(id));
  }
  std::optional<AABB> box;
  std::size_t count = 0;
  for (const auto& p : scene.points) {
    if (p.instance_id != id) continue;
    if (box) {
      box->extend(p.position());
    } else {
      box = AABB::around(p.position());
    }
    ++count;
  }
  if (!box) {
    throw DataError("scene " + scene.scene_id + ": instance " + std::to_string(id) + " has no points");
  }
  return ObjectNode{id, label->second, box->center(), *box, std::nullopt, count};
}

std::vector<ObjectNode> nodes_from_scene(const ScenePointCloud& scene) {
  std::map<InstanceId, std::pair<AABB, std::size_t>> acc;
  for (const auto& p : scene.points) {
    auto [it, fresh] = acc.try_emplace(p.instance_id, AABB::around(p.position()), 0);
    if (!fresh) it->second.first.extend(p.position());
    ++it->second.second;
  }
  std::vector<ObjectNode> nodes;
  nodes.reserve(acc.size());
  for (const auto& [id, box_count] : acc) {
    const auto label = scene.instances.find(id);
    if (label == scene.instances.end()) {
      throw DataError("scene " + scene.scene_id + ": unknown instance id " + std::to_string(id));
    }
    const AABB& box = box_count.first;
    nodes.push_back(ObjectNode{id, label->second, box.center(), box, std::nullopt, box_count.second});
  }
  return nodes;
}

}  // namespace sgf
