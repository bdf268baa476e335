#include <doctest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "sgf/error.hpp"
#include "sgf/scene_model.hpp"
#include "sgf/synthetic.hpp"

using namespace sgf;

namespace {

ScenePointCloud three_instance_scene() {
  ScenePointCloud s;
  s.scene_id = "s";
  s.source_dataset = "test";
  s.instances = {{0, "floor"}, {1, "table"}, {2, "cup"}};
  s.points = {{0, 0, 0, 10, 20, 30, 0, 0}, {4, 4, 0, 10, 20, 30, 0, 0}, {1, 1, 0.1, 0, 0, 0, 1, 1},
              {2, 2, 0.8, 0, 0, 0, 1, 1},  {1.5, 1.5, 0.8, 255, 255, 255, 2, 2}};
  return s;
}

}  // namespace

TEST_SUITE("scene_model") {
  TEST_CASE("a well-formed scene has no violations") {
    CHECK(validate_scene(three_instance_scene()).empty());
  }

  TEST_CASE("a point with an undeclared instance is named") {
    auto s = three_instance_scene();
    s.points.push_back({0, 0, 0, 0, 0, 0, 7, 0});
    const auto v = validate_scene(s);
    REQUIRE(v.size() == 1);
    CHECK(v[0].invariant == "known_instance");
    CHECK(v[0].ids == std::vector<std::int64_t>{7});
  }

  TEST_CASE("an out-of-range color channel is one violation") {
    auto s = three_instance_scene();
    s.points[0].r = 300;
    const auto v = validate_scene(s);
    REQUIRE(v.size() == 1);
    CHECK(v[0].invariant == "color_range");
  }

  TEST_CASE("empty scenes, non-finite coordinates and split semantic ids are reported") {
    ScenePointCloud empty;
    CHECK(validate_scene(empty).size() == 1);

    auto s = three_instance_scene();
    s.points[1].x = std::nan("");
    s.points[2].semantic_id = 9;
    const auto v = validate_scene(s);
    REQUIRE(v.size() == 2);
    CHECK(describe(v).find("finite_coordinates") != std::string::npos);
    CHECK(describe(v).find("semantic_consistency") != std::string::npos);
  }

  TEST_CASE("node box is the min/max of the instance points") {
    ScenePointCloud s;
    s.scene_id = "s";
    s.instances = {{5, "box"}};
    s.points = {{0, 0, 0, 0, 0, 0, 5, 0}, {2, 2, 2, 0, 0, 0, 5, 0}};
    const ObjectNode n = node_from_instance(s, 5);
    CHECK(n.bbox.min() == Vec3{0, 0, 0});
    CHECK(n.bbox.max() == Vec3{2, 2, 2});
    CHECK(n.centroid == Vec3{1, 1, 1});
    CHECK(n.point_count == 2);
    CHECK_FALSE(n.level.has_value());
  }

  TEST_CASE("a single point gives a degenerate box") {
    ScenePointCloud s;
    s.instances = {{1, "dot"}};
    s.points = {{1, 2, 3, 0, 0, 0, 1, 0}};
    const ObjectNode n = node_from_instance(s, 1);
    CHECK(n.bbox.min() == n.bbox.max());
    CHECK(n.centroid == Vec3{1, 2, 3});
  }

  TEST_CASE("cup of the reference scene is centered at (1.5, 1.5, 0.85)") {
    const ScenePointCloud s = scene_from_boxes("ref", fixtures::floor_table_cup_chair(), 3);
    const ObjectNode cup = node_from_instance(s, 2);
    // Independent reduction over the generated points.
    double lo[3] = {1e9, 1e9, 1e9};
    double hi[3] = {-1e9, -1e9, -1e9};
    for (const auto& p : s.points) {
      if (p.instance_id != 2) continue;
      const double v[3] = {p.x, p.y, p.z};
      for (int k = 0; k < 3; ++k) {
        lo[k] = std::min(lo[k], v[k]);
        hi[k] = std::max(hi[k], v[k]);
      }
    }
    CHECK(cup.centroid.x == doctest::Approx((lo[0] + hi[0]) / 2).epsilon(1e-12));
    CHECK(cup.centroid.x == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(cup.centroid.y == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(cup.centroid.z == doctest::Approx(0.85).epsilon(1e-12));
  }

  TEST_CASE("unknown or empty instances are errors naming the id") {
    auto s = three_instance_scene();
    CHECK_THROWS_WITH_AS(node_from_instance(s, 42), doctest::Contains("42"), DataError);
    s.instances[9] = "ghost";
    CHECK_THROWS_AS(node_from_instance(s, 9), DataError);
  }

  TEST_CASE("node construction does not depend on point order") {
    ScenePointCloud s = scene_from_boxes("perm", fixtures::floor_table_cup_chair(), 11);
    const auto before = nodes_from_scene(s);
    std::mt19937_64 rng(5);
    for (int round = 0; round < 5; ++round) {
      std::shuffle(s.points.begin(), s.points.end(), rng);
      CHECK(nodes_from_scene(s) == before);
      for (const auto& n : before) CHECK(node_from_instance(s, n.id) == n);
    }
  }

  TEST_CASE("centroid lies inside the box and size is max - min") {
    for (std::size_t i = 0; i < 10; ++i) {
      for (const auto& n : nodes_from_scene(generate_scene(1, i).scene)) {
        CHECK(n.bbox.contains(n.centroid));
        CHECK(n.size() == n.bbox.max() - n.bbox.min());
      }
    }
  }

  TEST_CASE("relation names round-trip and categories are fixed") {
    CHECK(all_relation_types().size() == kRelationTypeCount);
    std::set<std::string_view> names;
    for (RelationType r : all_relation_types()) {
      CHECK(relation_from_string(to_string(r)) == r);
      names.insert(to_string(r));
    }
    CHECK(names.size() == kRelationTypeCount);
    CHECK_FALSE(relation_from_string("sideways").has_value());
    CHECK(category_of(RelationType::kInside) == RelationCategory::kInContactVertical);
    CHECK(category_of(RelationType::kMountedOn) == RelationCategory::kNonContactVertical);
    CHECK(category_of(RelationType::kNextTo) == RelationCategory::kHorizontal);
    CHECK(category_of(RelationType::kAligned) == RelationCategory::kMultiObject);
  }

  TEST_CASE("the taxonomy has 21 bins and merges only near/far left and right") {
    std::set<std::string_view> bins;
    for (RelationType r : all_relation_types()) bins.insert(taxonomy_bin(r));
    CHECK(bins.size() == kTaxonomySize);
    CHECK(taxonomy_bins().size() == kTaxonomySize);
    CHECK(taxonomy_bin(RelationType::kNearLeftOf) == taxonomy_bin(RelationType::kFarLeftOf));
    CHECK(taxonomy_bin(RelationType::kNearRightOf) == taxonomy_bin(RelationType::kFarRightOf));
    CHECK(taxonomy_bin(RelationType::kNearLeftOf) != taxonomy_bin(RelationType::kNearRightOf));
  }

  TEST_CASE("mirror pairs are involutions") {
    for (RelationType r : all_relation_types()) {
      if (const auto m = mirror_of(r)) {
        CHECK(mirror_of(*m) == r);
        CHECK(category_of(*m) == category_of(r));
      }
    }
    CHECK(mirror_of(RelationType::kAbove) == RelationType::kBelow);
    CHECK(mirror_of(RelationType::kNearLeftOf) == RelationType::kNearRightOf);
    CHECK(mirror_of(RelationType::kBehind) == RelationType::kInFrontOf);
    CHECK_FALSE(mirror_of(RelationType::kSupportedBy).has_value());
  }

  TEST_CASE("graph validator reports each broken invariant") {
    SceneGraph g;
    g.scene_id = "g";
    g.nodes = {fixtures::node(0, "floor", {0, 0, 0}, {4, 4, 0.05}), fixtures::node(1, "table", {1, 1, 0.05}, {2, 2, 0.8}),
               fixtures::node(2, "cup", {1.4, 1.4, 0.8}, {1.6, 1.6, 0.9})};
    g.nodes[0].level = -1;
    g.nodes[1].level = 0;
    g.nodes[2].level = 1;
    g.edges = {{1, 0, RelationType::kSupportedBy, {}}, {2, 1, RelationType::kSupportedBy, {}}};
    CHECK(validate_graph(g).empty());

    auto bad = g;
    bad.edges.push_back({2, 0, RelationType::kSupportedBy, {}});  // level gap 2 and a second parent
    bad.edges.push_back({1, 1, RelationType::kNextTo, {}});
    bad.edges.push_back({1, 9, RelationType::kNextTo, {}});
    bad.multi.push_back({MultiKind::kBetween, 1, {0}, std::nullopt});
    bad.multi.push_back({MultiKind::kAligned, std::nullopt, {0, 1, 2}, std::nullopt});
    std::set<std::string> found;
    for (const auto& v : validate_graph(bad)) found.insert(v.invariant);
    CHECK(found == std::set<std::string>{"level_gap", "single_in_contact_parent", "no_self_edge", "edge_endpoints",
                                         "between_arity", "aligned_arity"});
  }
}
