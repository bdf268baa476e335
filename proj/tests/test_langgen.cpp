#include <doctest.h>

#include <algorithm>
#include <array>
#include <cctype>

#include "fixtures.hpp"
#include "sgf/clients.hpp"
#include "sgf/error.hpp"
#include "sgf/graph_builder.hpp"
#include "sgf/langgen.hpp"
#include "sgf/synthetic.hpp"

using namespace sgf;

namespace {

const TemplatePool& pool() {
  static const TemplatePool p = TemplatePool::builtin();
  return p;
}

/// Smallest seed whose choice picks the given template.
std::uint64_t seed_for_template(std::size_t index, std::size_t templates, std::size_t phrases) {
  for (std::uint64_t s = 0;; ++s) {
    if (choose(s, templates, phrases).template_index == index) return s;
  }
}

std::size_t occurrences(const std::string& text, const std::string& word) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(word); pos != std::string::npos; pos = text.find(word, pos + 1)) ++n;
  return n;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

TEST_SUITE("langgen.pairwise") {
  const Triplet chair{"chair", RelationType::kNextTo, "armchair"};

  TEST_CASE("the first template reads target, relation, anchor") {
    CHECK(render_pairwise(chair, pool(), {0, 0}) == "The chair is next to the armchair.");
    const auto seed = seed_for_template(0, pool().pairwise.size(), pool().phrases(RelationType::kNextTo).size());
    CHECK(gen_pairwise(chair, pool(), seed) == "The chair is next to the armchair.");
  }

  TEST_CASE("the inversion template leads with the relation") {
    CHECK(render_pairwise(chair, pool(), {1, 0}) == "Next to the armchair is the chair.");
  }

  TEST_CASE("far-right-of surfaces as 'far to the right of'") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      CHECK(lower(gen_pairwise({"suitcase", RelationType::kFarRightOf, "shoes"}, pool(), seed)).find("far to the right of") !=
            std::string::npos);
    }
  }

  TEST_CASE("output is deterministic per seed and mentions both labels") {
    for (std::size_t i = 0; i < 10; ++i) {
      const auto g = build_scene_graph(generate_scene(3, i).scene, {});
      for (const auto& e : g.edges) {
        const Triplet t{g.at(e.source).label, e.relation, g.at(e.target).label};
        const std::string text = gen_pairwise(t, pool(), i);
        CHECK_FALSE(text.empty());
        CHECK(text == gen_pairwise(t, pool(), i));
        CHECK(text.find(t.target) != std::string::npos);
        CHECK(text.find(t.anchor) != std::string::npos);
      }
    }
  }

  TEST_CASE("indefinite articles follow the first sound") {
    CHECK(render_pairwise({"armchair", RelationType::kNextTo, "bed"}, pool(), {2, 0}) ==
          "It is an armchair that is next to the bed.");
    CHECK(render_pairwise({"lamp", RelationType::kNextTo, "bed"}, pool(), {3, 0}) ==
          "There is a lamp that is next to the bed.");
  }
}

TEST_SUITE("langgen.multi") {
  TEST_CASE("between names the target and both anchors") {
    const MultiPhrase m{MultiKind::kBetween, "fridge", {"cabinet", "sofa"}};
    CHECK(render_multi(m, pool(), {0, 0}) == "The fridge is between cabinet and sofa.");
    const auto seed = seed_for_template(0, pool().multi.size(), 1);
    CHECK(gen_multi(m, pool(), seed) == "The fridge is between cabinet and sofa.");
  }

  TEST_CASE("identical anchor labels are told apart") {
    const MultiPhrase m{MultiKind::kBetween, "bed", {"lamp", "lamp"}};
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      const std::string text = gen_multi(m, pool(), seed);
      CHECK(text.find("one lamp") != std::string::npos);
      CHECK(text.find("the other lamp") != std::string::npos);
      CHECK(text.find("one lamp") < text.find("the other lamp"));
    }
  }

  TEST_CASE("aligned names every member") {
    SceneGraph g;
    for (InstanceId i = 1; i <= 3; ++i) g.nodes.push_back(fixtures::node(i, "chair", {0.8 * i, 1, 0}, {0.8 * i + 0.4, 1.4, 0.9}));
    const MultiRelation rel{MultiKind::kAligned, std::nullopt, {1, 2, 3}, Axis::kY};
    const MultiPhrase m = multi_phrase(rel, g);
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      const std::string text = gen_multi(m, pool(), seed);
      CHECK(occurrences(text, "chair") == 3);
      CHECK(lower(text).find("aligned") != std::string::npos);
    }
  }

  TEST_CASE("disambiguation uses ordinals beyond two copies") {
    CHECK(disambiguate({"box", "box", "box"}, true) ==
          std::vector<std::string>{"the first box", "the second box", "the third box"});
    CHECK(disambiguate({"box", "cup"}, true) == std::vector<std::string>{"the box", "the cup"});
    CHECK(disambiguate({"box", "cup"}, false) == std::vector<std::string>{"box", "cup"});
  }
}

TEST_SUITE("langgen.star") {
  constexpr auto L = RelationType::kNearLeftOf;
  constexpr auto A = RelationType::kAbove;
  constexpr auto B = RelationType::kBehind;

  TEST_CASE("cluster kinds") {
    CHECK(classify_star({L, L, L}) == ClusterKind::kAllSame);
    CHECK(classify_star({L, L, A}) == ClusterKind::kTwoSame);
    CHECK(classify_star({L, A, B}) == ClusterKind::kAllDistinct);
  }

  TEST_CASE("classification is invariant under permutation") {
    const auto all = all_relation_types();
    for (RelationType a : all) {
      for (RelationType b : all) {
        for (RelationType c : {L, A, B, a}) {
          std::array<RelationType, 3> r{a, b, c};
          const ClusterKind k = classify_star(r);
          std::sort(r.begin(), r.end());
          do {
            CHECK(classify_star(r) == k);
          } while (std::next_permutation(r.begin(), r.end()));
        }
      }
    }
  }

  TEST_CASE("all-same merges the anchors into one clause") {
    const std::array<StarArm, 3> arms{{{L, "chair"}, {L, "stool"}, {L, "bench"}}};
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const std::string text = gen_star("table", arms, pool(), seed);
      CHECK(text.find("the chair, the stool and the bench") != std::string::npos);
      std::size_t phrases = 0;
      for (const auto& p : pool().phrases(L)) phrases += text.find(p) != std::string::npos;
      CHECK(phrases >= 1);
    }
  }

  TEST_CASE("two-same puts the pair first") {
    // Every hand instantiation of the two two-same templates.
    std::set<std::string> expected;
    for (const auto& p1 : pool().phrases(L)) {
      for (const auto& p2 : pool().phrases(A)) {
        expected.insert("The table is " + p1 + " the chair and the stool, and " + p2 + " the rug.");
        expected.insert("There is a table " + p1 + " the chair and the stool that is also " + p2 + " the rug.");
      }
    }
    for (const auto& arms : {std::array<StarArm, 3>{{{L, "chair"}, {L, "stool"}, {A, "rug"}}},
                             std::array<StarArm, 3>{{{L, "chair"}, {A, "rug"}, {L, "stool"}}},
                             std::array<StarArm, 3>{{{A, "rug"}, {L, "chair"}, {L, "stool"}}}}) {
      for (std::uint64_t seed = 0; seed < 10; ++seed) CHECK(expected.count(gen_star("table", arms, pool(), seed)) == 1);
    }
  }

  TEST_CASE("all-distinct uses three clauses") {
    const std::array<StarArm, 3> arms{{{L, "chair"}, {A, "rug"}, {B, "sofa"}}};
    const std::string text = gen_star("table", arms, pool(), 4);
    CHECK(text.find("the chair") < text.find("the rug"));
    CHECK(text.find("the rug") < text.find("the sofa"));
    CHECK(text.find("{") == std::string::npos);
  }

  TEST_CASE("an anchor sharing the target label becomes 'the other'") {
    const std::array<StarArm, 3> arms{{{L, "chair"}, {A, "rug"}, {B, "table"}}};
    CHECK(gen_star("table", arms, pool(), 1).find("the other table") != std::string::npos);
  }

  TEST_CASE("star order moves the odd relation last") {
    CHECK(star_order({L, L, A}) == std::array<std::size_t, 3>{0, 1, 2});
    CHECK(star_order({L, A, L}) == std::array<std::size_t, 3>{0, 2, 1});
    CHECK(star_order({A, L, L}) == std::array<std::size_t, 3>{1, 2, 0});
    CHECK(star_order({L, A, B}) == std::array<std::size_t, 3>{0, 1, 2});
  }
}

TEST_SUITE("langgen.scene_prompt") {
  SceneGraph bedroom() {
    SceneGraph g;
    g.scene_id = "bedroom";
    g.room_type = "bedroom";
    g.nodes = {fixtures::node(0, "floor", {0, 0, 0}, {5, 5, 0.05}), fixtures::node(1, "bed", {2, 2, 0.05}, {3.5, 4, 0.6}),
               fixtures::node(2, "nightstand", {1.2, 2, 0.05}, {1.7, 2.5, 0.6}),
               fixtures::node(3, "nightstand", {3.8, 2, 0.05}, {4.3, 2.5, 0.6})};
    for (InstanceId c : {1u, 2u, 3u}) g.edges.push_back({c, 0, RelationType::kSupportedBy, {}});
    g.edges.push_back({2, 1, RelationType::kNearLeftOf, {}});
    g.edges.push_back({3, 1, RelationType::kNearRightOf, {}});
    return g;
  }

  TEST_CASE("object counts cover every node") {
    const ScenePrompt p = build_scene_prompt(bedroom(), {}, pool(), 7);
    CHECK(p.payload["scene_type"] == "bedroom");
    CHECK(p.payload["object_count"]["nightstand"] == 2);
    CHECK(p.payload["object_count"]["bed"] == 1);
    CHECK(p.payload["relation"].size() == 5);
    CHECK(p.instruction.find("80 words") != std::string::npos);
    CHECK(p.instruction.find("\"nightstand\":2") != std::string::npos);
  }

  TEST_CASE("an empty edge budget keeps the counts") {
    const ScenePrompt p = build_scene_prompt(bedroom(), {30, 0}, pool(), 7);
    CHECK(p.payload["relation"].empty());
    CHECK(p.payload["object_count"]["nightstand"] == 2);
  }

  TEST_CASE("edge sampling respects the budget and is deterministic") {
    const auto g = build_scene_graph(generate_scene(12, 0).scene, {});
    const ScenePrompt a = build_scene_prompt(g, {30, 3}, pool(), 99);
    const ScenePrompt b = build_scene_prompt(g, {30, 3}, pool(), 99);
    CHECK(a.payload.dump() == b.payload.dump());
    CHECK(a.instruction == b.instruction);
    CHECK(a.payload["relation"].size() == std::min<std::size_t>(3, g.edges.size()));
  }

  TEST_CASE("empty graphs are rejected") {
    CHECK_THROWS(build_scene_prompt(SceneGraph{}, {}, pool(), 1));
  }

  TEST_CASE("offline caption summarizes counts and relations") {
    const ScenePrompt p = build_scene_prompt(bedroom(), {30, 1}, pool(), 7);
    const std::string caption = template_scene_caption(p.payload);
    CHECK(caption.rfind("This is a bedroom with", 0) == 0);
    CHECK(caption.find("2 nightstands") != std::string::npos);
  }
}

TEST_SUITE("langgen.rephrase") {
  RephraseRequest referral(std::string text, std::string target) {
    RephraseRequest r;
    r.kind = RephraseKind::kReferralSimple;
    r.text = std::move(text);
    r.target_label = std::move(target);
    return r;
  }

  TEST_CASE("identity stub returns the same sentence without flags") {
    const auto r = rephrase(referral("The bed is between desk and nightstand.", "bed"), StubRephraser(StubRephraser::Mode::kIdentity));
    CHECK(r.text == "The bed is between desk and nightstand.");
    CHECK(r.flags.empty());
    CHECK(r.accepted);
  }

  TEST_CASE("a rewrite that loses the target keeps the original") {
    const auto r = rephrase(referral("The bed is next to the desk.", "bed"), StubRephraser(StubRephraser::Mode::kDropTarget));
    CHECK(r.text == "The bed is next to the desk.");
    CHECK(r.flags == std::vector<std::string>{"rephrase-rejected"});
    CHECK_FALSE(r.accepted);
  }

  TEST_CASE("two sentences are trimmed to the first") {
    const auto r = rephrase(referral("The bed is next to the desk.", "bed"), StubRephraser(StubRephraser::Mode::kTwoSentences));
    CHECK(r.text == "The bed is next to the desk.");
    CHECK(r.flags == std::vector<std::string>{"rephrase-trimmed"});
  }

  TEST_CASE("client failure keeps the original and flags it") {
    const auto r = rephrase(referral("The bed is next to the desk.", "bed"), StubRephraser(StubRephraser::Mode::kFail));
    CHECK(r.text == "The bed is next to the desk.");
    CHECK(r.flags == std::vector<std::string>{"rephrase-failed"});
  }

  TEST_CASE("prefix stub rewrites and keeps the target") {
    const auto r = rephrase(referral("The bed is next to the desk.", "bed"), StubRephraser(StubRephraser::Mode::kPrefix));
    CHECK(r.text == "In this room, the bed is next to the desk.");
    CHECK(r.accepted);
  }

  TEST_CASE("sentence splitter") {
    bool trimmed = true;
    CHECK(first_sentence("  One sentence only.  ", &trimmed) == "One sentence only.");
    CHECK_FALSE(trimmed);
    CHECK(first_sentence("The lamp is 1.5 m away. Another one.", &trimmed) == "The lamp is 1.5 m away.");
    CHECK(trimmed);
    CHECK(first_sentence("Is it here? yes it is.", &trimmed) == "Is it here? yes it is.");
  }

  TEST_CASE("requests need the fields their kind uses") {
    RephraseRequest r;
    r.kind = RephraseKind::kSceneSummary;
    CHECK_THROWS_AS(r.validate(), ConfigError);
    r.kind = RephraseKind::kReferralSubjectLocked;
    r.text = "The bed is next to the desk.";
    r.target_label = "bed";
    CHECK_THROWS_AS(r.validate(), ConfigError);
    r.anchor_labels = {"desk"};
    CHECK_NOTHROW(r.validate());
    const std::string prompt = render_prompt(r);
    CHECK(prompt.find("{") == std::string::npos);
    CHECK(prompt.find("bed") != std::string::npos);
  }

  TEST_CASE("every kind has a prompt with its slots filled") {
    for (RephraseKind k : {RephraseKind::kReferralSimple, RephraseKind::kReferralSubjectLocked, RephraseKind::kReferralEnriched,
                           RephraseKind::kCaptionSummary}) {
      RephraseRequest r;
      r.kind = k;
      r.text = "The bed is next to the desk.";
      r.target_label = "bed";
      r.anchor_labels = {"desk"};
      const std::string prompt = render_prompt(r);
      CHECK_FALSE(prompt.empty());
      CHECK(prompt.find("{target}") == std::string::npos);
      CHECK(prompt.find("{caption}") == std::string::npos);
    }
  }
}

TEST_SUITE("langgen.pool") {
  TEST_CASE("every template renders without unresolved slots") {
    const std::map<std::string, std::string> values{
        {"target", "apple"},   {"relation", "next to"},  {"anchor", "box"},       {"anchor1", "box"},
        {"anchor2", "cup"},    {"anchor3", "bag"},       {"anchors", "x and y"},  {"relation1", "near"},
        {"relation2", "above"}, {"relation3", "behind"}};
    std::vector<std::string> all;
    all.insert(all.end(), pool().pairwise.begin(), pool().pairwise.end());
    all.insert(all.end(), pool().multi.begin(), pool().multi.end());
    all.insert(all.end(), pool().aligned.begin(), pool().aligned.end());
    for (const auto& [kind, list] : pool().star) all.insert(all.end(), list.begin(), list.end());
    for (const auto& t : all) {
      const std::string out = fill_template(t, values);
      CHECK(out.find('{') == std::string::npos);
      CHECK(out.find('}') == std::string::npos);
    }
    for (RelationType r : all_relation_types()) CHECK_FALSE(pool().phrases(r).empty());
  }

  TEST_CASE("slot audit rejects mismatched templates") {
    CHECK(template_slots("The {target} is {relation} the {anchor}.") ==
          std::vector<std::string>{"target", "relation", "anchor"});
    CHECK_THROWS_AS(fill_template("{missing}", {}), ConfigError);
    auto bad = pool();
    bad.pairwise.push_back("The {target} is alone.");
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = pool();
    bad.lexicon.erase(RelationType::kBehind);
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK_THROWS_AS(TemplatePool::from_json("[]"), ConfigError);
  }

  TEST_CASE("choices stay in range") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const TemplateChoice c = choose(seed, 8, 3);
      CHECK(c.template_index < 8);
      CHECK(c.phrase_index < 3);
    }
  }
}
