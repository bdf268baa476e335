#include "sgf/graph_builder.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <unordered_map>

#include <json.hpp>

#include "sgf/config.hpp"
#include "sgf/error.hpp"
#include "sgf/resources.hpp"
#include "sgf/seed.hpp"

namespace sgf {

using json = nlohmann::json;

void GraphConfig::validate() const {
  const std::pair<const char*, double> positive[] = {
      {"eps_contact_m", eps_contact_m},
      {"footprint_overlap_min", footprint_overlap_min},
      {"containment_inside", containment_inside},
      {"containment_embedded", containment_embedded},
      {"hang_gap_m", hang_gap_m},
      {"above_overlap_min", above_overlap_min},
      {"higher_min_dz_m", higher_min_dz_m},
      {"higher_max_xy_m", higher_max_xy_m},
      {"near_max_m", near_max_m},
      {"close_max_m", close_max_m},
      {"adjacent_gap_m", adjacent_gap_m},
      {"aligned_delta_floor_m", aligned_delta_floor_m},
      {"aligned_delta_scale", aligned_delta_scale},
  };
  for (const auto& [name, value] : positive) {
    if (!(value > 0.0)) throw ConfigError(std::string("graph.") + name + " must be > 0");
  }
  if (!(containment_inside > containment_embedded)) {
    throw ConfigError("graph.containment_inside must exceed graph.containment_embedded");
  }
}

GraphConfig GraphConfig::scaled(double s) const {
  GraphConfig out = *this;
  out.eps_contact_m *= s;
  out.hang_gap_m *= s;
  out.higher_min_dz_m *= s;
  out.higher_max_xy_m *= s;
  out.near_max_m *= s;
  out.close_max_m *= s;
  out.adjacent_gap_m *= s;
  out.aligned_delta_floor_m *= s;
  return out;
}

// ---------------------------------------------------------------------------

void RefinementMap::add(const RefinementKey& key, RelationType replacement) {
  if (category_of(key.relation) != category_of(replacement)) {
    throw ConfigError("refinement (" + key.target_label + ", " + std::string(to_string(key.relation)) + ", " +
                      key.anchor_label + ") -> " + std::string(to_string(replacement)) + " crosses from " +
                      std::string(to_string(category_of(key.relation))) + " to " +
                      std::string(to_string(category_of(replacement))));
  }
  entries_[key] = replacement;
}

std::optional<RelationType> RefinementMap::lookup(std::string_view target_label, RelationType relation,
                                                  std::string_view anchor_label) const {
  const auto it = entries_.find(RefinementKey{std::string(target_label), relation, std::string(anchor_label)});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

RefinementMap RefinementMap::from_json(std::string_view text, const std::string& origin) {
  RefinementMap map;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": JSON parse error at byte " + std::to_string(e.byte));
  }
  if (!doc.is_array()) throw ConfigError(origin + ": refinement map must be a JSON array");
  for (const auto& entry : doc) {
    try {
      const auto relation = relation_from_string(entry.at("relation").get<std::string>());
      const auto refined = relation_from_string(entry.at("refined").get<std::string>());
      if (!relation || !refined) throw ConfigError(origin + ": unknown relation in " + entry.dump());
      map.add({entry.at("target").get<std::string>(), *relation, entry.at("anchor").get<std::string>()}, *refined);
    } catch (const json::exception& e) {
      throw ConfigError(origin + ": malformed refinement entry " + entry.dump() + ": " + e.what());
    }
  }
  return map;
}

std::string RefinementMap::to_json() const {
  json doc = json::array();
  for (const auto& [key, refined] : entries_) {
    doc.push_back({{"target", key.target_label},
                   {"relation", std::string(to_string(key.relation))},
                   {"anchor", key.anchor_label},
                   {"refined", std::string(to_string(refined))}});
  }
  return doc.dump();
}

RefinementMap RefinementMap::builtin() {
  static const RefinementMap kBuiltin = from_json(resources::get("refinement.json"), "refinement.json");
  return kBuiltin;
}

// ---------------------------------------------------------------------------

std::optional<RelationType> vertical_in_contact(const ObjectNode& target, const ObjectNode& anchor,
                                                const GraphConfig& cfg) {
  const AABB& t = target.bbox;
  const AABB& a = anchor.bbox;
  const double contained = containment_fraction(t, a);
  if (contained >= cfg.containment_inside && t.volume() < a.volume()) return RelationType::kInside;
  if (contained >= cfg.containment_embedded && contained < cfg.containment_inside) return RelationType::kEmbeddedInto;
  if (cfg.container_labels.contains(anchor.label) && footprint_fraction(t, a) >= 1.0 &&
      a.z().contains(t.min().z)) {
    return RelationType::kPlacedIn;
  }
  const double gap = t.min().z - a.max().z;
  if (std::abs(gap) <= cfg.eps_contact_m && t.min().z >= a.max().z - cfg.eps_contact_m &&
      footprint_fraction(t, a) >= cfg.footprint_overlap_min) {
    return RelationType::kSupportedBy;
  }
  return std::nullopt;
}

std::optional<RelationType> vertical_non_contact(const ObjectNode& target, const ObjectNode& anchor,
                                                 const GraphConfig& cfg) {
  const AABB& t = target.bbox;
  const AABB& a = anchor.bbox;
  if (cfg.wall_labels.contains(anchor.label) && footprint_gap(t, a) <= cfg.hang_gap_m &&
      overlap_length(t.z(), a.z()) >= 0.0) {
    return RelationType::kHangingOn;
  }
  if (footprint_overlap_of_smaller(t, a) >= cfg.above_overlap_min) {
    if (t.min().z >= a.max().z + cfg.eps_contact_m) return RelationType::kAbove;
    if (a.min().z >= t.max().z + cfg.eps_contact_m) return RelationType::kBelow;
  }
  const Vec3 d = target.centroid - anchor.centroid;
  if (d.norm_xy() <= cfg.higher_max_xy_m && !footprints_overlap(t, a)) {
    if (d.z >= cfg.higher_min_dz_m) return RelationType::kHigherThan;
    if (-d.z >= cfg.higher_min_dz_m) return RelationType::kLowerThan;
  }
  return std::nullopt;
}

EdgeGeometry edge_geometry(const ObjectNode& target, const ObjectNode& anchor) {
  const Vec3 d = target.centroid - anchor.centroid;
  return EdgeGeometry{d.norm(), std::atan2(d.y, d.x), std::atan2(d.z, d.norm_xy()), Proximity::kNone};
}

std::optional<HorizontalRelation> horizontal(const ObjectNode& target, const ObjectNode& anchor,
                                             const GraphConfig& cfg) {
  const Vec3 d = target.centroid - anchor.centroid;
  const double r = d.norm_xy();
  if (r < 1e-9) return std::nullopt;

  // Sector boundaries as exact comparisons so that negating the displacement
  // always lands in the mirrored sector.
  RelationType rel;
  const bool near = r <= cfg.near_max_m;
  if (d.x > 0 && d.y <= d.x && d.y > -d.x) {
    rel = near ? RelationType::kNearRightOf : RelationType::kFarRightOf;        // (-45, 45]
  } else if (d.y > 0 && d.y > d.x && d.y >= -d.x) {
    rel = RelationType::kInFrontOf;                                             // (45, 135]
  } else if (d.x < 0 && d.y < -d.x && d.y >= d.x) {
    rel = near ? RelationType::kNearLeftOf : RelationType::kFarLeftOf;          // (135, 180] u (-180, -135]
  } else {
    rel = RelationType::kBehind;                                                // (-135, -45]
  }

  EdgeGeometry geom = edge_geometry(target, anchor);
  if (footprint_gap(target.bbox, anchor.bbox) <= cfg.adjacent_gap_m) {
    geom.proximity = Proximity::kAdjacent;
  } else if (r <= cfg.close_max_m) {
    geom.proximity = Proximity::kClose;
  }
  return HorizontalRelation{rel, geom};
}

// ---------------------------------------------------------------------------

namespace {

using NodeIndex = std::unordered_map<InstanceId, const ObjectNode*>;

NodeIndex index_nodes(const std::vector<ObjectNode>& nodes) {
  NodeIndex idx;
  for (const auto& n : nodes) idx.emplace(n.id, &n);
  return idx;
}

std::map<InstanceId, InstanceId> in_contact_parents(const SceneGraph& graph) {
  std::map<InstanceId, InstanceId> parent;
  for (const auto& e : graph.edges) {
    if (category_of(e.relation) == RelationCategory::kInContactVertical) parent.emplace(e.source, e.target);
  }
  return parent;
}

int non_contact_rank(RelationType r) {
  switch (r) {
    case RelationType::kHangingOn:
    case RelationType::kAffixedOn:
    case RelationType::kMountedOn: return 0;
    case RelationType::kAbove: return 1;
    case RelationType::kBelow: return 2;
    case RelationType::kHigherThan: return 3;
    case RelationType::kLowerThan: return 4;
    default: return 5;
  }
}

}  // namespace

SceneGraph assign_levels(SceneGraph graph, const GraphConfig& cfg) {
  const auto parent = in_contact_parents(graph);
  std::map<InstanceId, std::vector<InstanceId>> children;
  for (const auto& [child, p] : parent) children[p].push_back(child);

  for (const auto& n : graph.nodes) {
    std::vector<InstanceId> path{n.id};
    InstanceId cur = n.id;
    while (true) {
      const auto it = parent.find(cur);
      if (it == parent.end()) break;
      cur = it->second;
      const auto seen = std::find(path.begin(), path.end(), cur);
      if (seen != path.end()) {
        std::string cycle;
        for (auto p = seen; p != path.end(); ++p) cycle += std::to_string(*p) + " -> ";
        throw DataError("scene " + graph.scene_id + ": in-contact cycle " + cycle + std::to_string(cur));
      }
      path.push_back(cur);
    }
  }

  std::map<InstanceId, int> level;
  const auto propagate = [&](InstanceId top, int top_level) {
    std::vector<std::pair<InstanceId, int>> stack{{top, top_level}};
    while (!stack.empty()) {
      const auto [id, lv] = stack.back();
      stack.pop_back();
      level[id] = lv;
      const auto it = children.find(id);
      if (it == children.end()) continue;
      for (InstanceId c : it->second) stack.emplace_back(c, lv + 1);
    }
  };

  std::vector<InstanceId> floating;
  for (const auto& n : graph.nodes) {
    if (parent.contains(n.id)) continue;
    if (cfg.floor_labels.contains(n.label)) {
      propagate(n.id, -1);
    } else {
      floating.push_back(n.id);
    }
  }
  const std::map<InstanceId, int> grounded = level;

  const NodeIndex idx = index_nodes(graph.nodes);
  for (InstanceId h : floating) {
    const Edge* best = nullptr;
    for (const auto& e : graph.edges) {
      if (e.source != h || category_of(e.relation) != RelationCategory::kNonContactVertical) continue;
      if (!grounded.contains(e.target) || cfg.floor_labels.contains(idx.at(e.target)->label)) continue;
      if (!best || std::tuple(non_contact_rank(e.relation), e.target) <
                       std::tuple(non_contact_rank(best->relation), best->target)) {
        best = &e;
      }
    }
    propagate(h, best ? std::max(0, grounded.at(best->target)) : 0);
  }

  for (auto& n : graph.nodes) n.level = level.at(n.id);
  std::erase_if(graph.edges, [&](const Edge& e) {
    return category_of(e.relation) == RelationCategory::kNonContactVertical &&
           std::abs(level.at(e.source) - level.at(e.target)) > 1;
  });
  return graph;
}

std::vector<MultiRelation> multi_object(const SceneGraph& graph, const GraphConfig& cfg) {
  std::vector<MultiRelation> out;
  const NodeIndex idx = index_nodes(graph.nodes);

  // between: nearest left-of and right-of neighbour pointing at the target.
  std::map<InstanceId, std::pair<const Edge*, const Edge*>> sides;
  for (const auto& e : graph.edges) {
    if (!is_left_of(e.relation) && !is_right_of(e.relation)) continue;
    auto& slot = is_left_of(e.relation) ? sides[e.target].first : sides[e.target].second;
    if (!slot || std::tuple(e.geom.distance, e.source) < std::tuple(slot->geom.distance, slot->source)) slot = &e;
  }
  for (const auto& [target, lr] : sides) {
    if (lr.first && lr.second) {
      out.push_back({MultiKind::kBetween, target, {lr.first->source, lr.second->source}, std::nullopt});
    }
  }

  // aligned: maximal runs of >= 3 siblings whose coordinate spread is below delta.
  std::optional<AABB> extent;
  for (const auto& n : graph.nodes) {
    if (extent) {
      extent->extend(n.bbox);
    } else {
      extent = n.bbox;
    }
  }
  const double delta =
      std::max(cfg.aligned_delta_floor_m, cfg.aligned_delta_scale * (extent ? extent->diagonal_xy() : 0.0));
  std::map<InstanceId, std::vector<InstanceId>> groups;
  for (const auto& [child, p] : in_contact_parents(graph)) groups[p].push_back(child);
  for (const auto& [p, members] : groups) {
    if (members.size() < 3) continue;
    for (Axis axis : {Axis::kX, Axis::kY}) {
      const auto coord = [&](InstanceId id) {
        return axis == Axis::kX ? idx.at(id)->centroid.x : idx.at(id)->centroid.y;
      };
      std::vector<InstanceId> sorted = members;
      std::sort(sorted.begin(), sorted.end(), [&](InstanceId a, InstanceId b) {
        return std::tuple(coord(a), a) < std::tuple(coord(b), b);
      });
      std::size_t j = 0;
      std::size_t prev_end = 0;
      for (std::size_t i = 0; i < sorted.size(); ++i) {
        j = std::max(j, i);
        while (j + 1 < sorted.size() && coord(sorted[j + 1]) - coord(sorted[i]) < delta) ++j;
        const std::size_t end = j + 1;
        if (end - i >= 3 && (i == 0 || end > prev_end)) {
          std::vector<InstanceId> group(sorted.begin() + static_cast<std::ptrdiff_t>(i),
                                        sorted.begin() + static_cast<std::ptrdiff_t>(end));
          std::sort(group.begin(), group.end());
          out.push_back({MultiKind::kAligned, std::nullopt, std::move(group), axis});
        }
        prev_end = std::max(prev_end, end);
      }
    }
  }
  std::sort(out.begin(), out.end(), multi_less);
  return out;
}

SceneGraph refine(SceneGraph graph, const RefinementMap& refinement) {
  if (refinement.empty()) return graph;
  const NodeIndex idx = index_nodes(graph.nodes);
  for (auto& e : graph.edges) {
    const auto replacement = refinement.lookup(idx.at(e.source)->label, e.relation, idx.at(e.target)->label);
    if (replacement) e.relation = *replacement;
  }
  std::sort(graph.edges.begin(), graph.edges.end(), edge_less);
  return graph;
}

// ---------------------------------------------------------------------------

namespace {

bool is_root(const ObjectNode& n, const GraphConfig& cfg) { return cfg.floor_labels.contains(n.label); }

void in_contact_pass(SceneGraph& graph, const GraphConfig& cfg) {
  for (const auto& t : graph.nodes) {
    if (is_root(t, cfg)) continue;
    const ObjectNode* best = nullptr;
    RelationType best_rel{};
    double best_score = 0.0;
    double best_gap = 0.0;
    for (const auto& a : graph.nodes) {
      if (a.id == t.id) continue;
      const auto rel = vertical_in_contact(t, a, cfg);
      if (!rel) continue;
      const double score = footprint_fraction(t.bbox, a.bbox);
      const double gap = std::abs(t.bbox.min().z - a.bbox.max().z);
      if (!best || std::tuple(-score, gap, a.id) < std::tuple(-best_score, best_gap, best->id)) {
        best = &a;
        best_rel = *rel;
        best_score = score;
        best_gap = gap;
      }
    }
    if (best) graph.edges.push_back({t.id, best->id, best_rel, edge_geometry(t, *best)});
  }
}

void horizontal_pass(SceneGraph& graph, const GraphConfig& cfg) {
  const auto parent = in_contact_parents(graph);
  std::map<InstanceId, std::vector<const ObjectNode*>> siblings;
  const NodeIndex idx = index_nodes(graph.nodes);
  for (const auto& [child, p] : parent) siblings[p].push_back(idx.at(child));
  for (const auto& [p, group] : siblings) {
    for (const ObjectNode* t : group) {
      for (const ObjectNode* a : group) {
        if (t == a) continue;
        if (const auto h = horizontal(*t, *a, cfg)) graph.edges.push_back({t->id, a->id, h->relation, h->geom});
      }
    }
  }
}

void non_contact_pass(SceneGraph& graph, const std::set<InstanceId>& hangable, const GraphConfig& cfg) {
  const auto hanging = [&](const ObjectNode& t, const ObjectNode& a) {
    return vertical_non_contact(t, a, cfg) == RelationType::kHangingOn;
  };
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < graph.nodes.size(); ++j) {
      const ObjectNode& a = graph.nodes[i];
      const ObjectNode& b = graph.nodes[j];
      const bool ha = hangable.contains(a.id);
      const bool hb = hangable.contains(b.id);
      if (!ha && !hb) continue;
      if (ha && hanging(a, b)) {
        graph.edges.push_back({a.id, b.id, RelationType::kHangingOn, edge_geometry(a, b)});
        continue;
      }
      if (hb && hanging(b, a)) {
        graph.edges.push_back({b.id, a.id, RelationType::kHangingOn, edge_geometry(b, a)});
        continue;
      }
      const ObjectNode& h = ha ? a : b;
      const ObjectNode& o = ha ? b : a;
      const auto rel = vertical_non_contact(h, o, cfg);
      if (!rel) continue;
      graph.edges.push_back({h.id, o.id, *rel, edge_geometry(h, o)});
      graph.edges.push_back({o.id, h.id, *mirror_of(*rel), edge_geometry(o, h)});
    }
  }
}

}  // namespace

SceneGraph build_scene_graph(std::string scene_id, std::optional<std::string> room_type,
                             std::vector<ObjectNode> nodes, const GraphConfig& cfg,
                             const RefinementMap& refinement) {
  cfg.validate();
  SceneGraph graph;
  graph.scene_id = std::move(scene_id);
  graph.room_type = std::move(room_type);
  graph.nodes = std::move(nodes);
  std::sort(graph.nodes.begin(), graph.nodes.end(),
            [](const ObjectNode& a, const ObjectNode& b) { return a.id < b.id; });
  for (auto& n : graph.nodes) n.level.reset();
  graph.config_digest = graph_config_digest(cfg, refinement);
  graph.seed = derive_seed(cfg.seed, {"graph", graph.scene_id});

  in_contact_pass(graph, cfg);

  std::set<InstanceId> hangable;
  if (cfg.hangable_rule == HangableRule::kNoInContactParent) {
    const auto parent = in_contact_parents(graph);
    for (const auto& n : graph.nodes) {
      if (!is_root(n, cfg) && !parent.contains(n.id)) hangable.insert(n.id);
    }
    non_contact_pass(graph, hangable, cfg);
    horizontal_pass(graph, cfg);
  } else {
    horizontal_pass(graph, cfg);
    std::set<InstanceId> related;
    for (const auto& e : graph.edges) {
      if (category_of(e.relation) == RelationCategory::kHorizontal) related.insert(e.source);
    }
    for (const auto& n : graph.nodes) {
      if (!is_root(n, cfg) && !related.contains(n.id)) hangable.insert(n.id);
    }
    non_contact_pass(graph, hangable, cfg);
  }

  std::sort(graph.edges.begin(), graph.edges.end(), edge_less);
  graph = assign_levels(std::move(graph), cfg);
  graph.multi = multi_object(graph, cfg);
  graph = refine(std::move(graph), refinement);
  return graph;
}

SceneGraph build_scene_graph(const ScenePointCloud& scene, const GraphConfig& cfg, const RefinementMap& refinement) {
  return build_scene_graph(scene.scene_id, scene.room_type, nodes_from_scene(scene), cfg, refinement);
}

std::string graph_config_digest(const GraphConfig& cfg, const RefinementMap& refinement) {
  json doc;
  doc["graph"] = to_json(cfg);
  doc["refinement"] = json::parse(refinement.to_json());
  return sha256_hex(doc.dump());
}

}  // namespace sgf
