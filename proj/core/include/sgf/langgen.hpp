#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sgf/clients.hpp"
#include "sgf/scene_model.hpp"

namespace sgf {

enum class ClusterKind { kAllSame, kTwoSame, kAllDistinct };

std::string_view to_string(ClusterKind k);

/// Sentence templates and surface phrases. Slots: {target}, {a:target}
/// (with indefinite article), {relation}, {anchor}, {anchor1}..{anchor3},
/// {anchors}, {relation1}..{relation3}.
struct TemplatePool {
  std::vector<std::string> pairwise;
  std::vector<std::string> multi;
  std::vector<std::string> aligned;
  std::map<ClusterKind, std::vector<std::string>> star;
  std::map<RelationType, std::vector<std::string>> lexicon;

  /// Throws ConfigError when a template's slots do not match its family or a
  /// relation has no phrase.
  void validate() const;

  const std::vector<std::string>& phrases(RelationType r) const { return lexicon.at(r); }

  static TemplatePool from_json(std::string_view text, const std::string& origin = "<memory>");
  /// The bundled pool (core/data/templates.json).
  static TemplatePool builtin();
};

/// Slot names used by a template, e.g. {"target", "relation", "anchor"}.
std::vector<std::string> template_slots(std::string_view tmpl);

/// Substitutes slots; the first letter of the result is capitalized. Throws
/// ConfigError for a slot missing from `values`.
std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& values);

struct Triplet {
  std::string target;
  RelationType relation = RelationType::kNextTo;
  std::string anchor;
};

/// Deterministic (template, phrase) choice for a seed.
struct TemplateChoice {
  std::size_t template_index = 0;
  std::size_t phrase_index = 0;
};
TemplateChoice choose(std::uint64_t seed, std::size_t template_count, std::size_t phrase_count);

std::string render_pairwise(const Triplet& t, const TemplatePool& pool, TemplateChoice choice);
std::string gen_pairwise(const Triplet& t, const TemplatePool& pool, std::uint64_t seed);

/// between: target plus two anchors. aligned: the first member is the
/// subject and the rest are listed.
struct MultiPhrase {
  MultiKind kind = MultiKind::kBetween;
  std::string target;
  std::vector<std::string> anchors;
};
MultiPhrase multi_phrase(const MultiRelation& rel, const SceneGraph& graph);

std::string render_multi(const MultiPhrase& m, const TemplatePool& pool, TemplateChoice choice);
std::string gen_multi(const MultiPhrase& m, const TemplatePool& pool, std::uint64_t seed);

/// Labels as they read in a sentence. Repeated labels are told apart:
/// two copies become "one X" / "the other X", three or more get ordinals.
/// With `definite`, labels that occur once are prefixed with "the".
std::vector<std::string> disambiguate(const std::vector<std::string>& labels, bool definite);

ClusterKind classify_star(const std::array<RelationType, 3>& relations);

struct StarArm {
  RelationType relation = RelationType::kNextTo;
  std::string anchor;
};

/// Sentence order of three arms as input positions: TwoSame moves the odd
/// relation last and keeps the pair in input order; otherwise identity.
std::array<std::size_t, 3> star_order(const std::array<RelationType, 3>& relations);

/// Star reference: one target, three anchors, arms in order_star_arms order.
std::string gen_star(const std::string& target, const std::array<StarArm, 3>& arms, const TemplatePool& pool,
                     std::uint64_t seed);

struct ScenePromptConfig {
  std::size_t max_nodes = 30;
  std::size_t max_edges = 20;
};

struct ScenePrompt {
  nlohmann::ordered_json payload;  // scene_type, object_count, relation
  std::string instruction;         // prompt text with the payload substituted
};

ScenePrompt build_scene_prompt(const SceneGraph& graph, const ScenePromptConfig& cfg, const TemplatePool& pool,
                               std::uint64_t seed);

/// Offline scene caption from a prompt payload: room type, the most frequent
/// objects and the first sampled relations.
std::string template_scene_caption(const nlohmann::ordered_json& payload);

enum class RephraseKind { kReferralSimple, kReferralSubjectLocked, kReferralEnriched, kSceneSummary, kCaptionSummary };

std::string_view to_string(RephraseKind k);
bool is_referral(RephraseKind k);

struct RephraseRequest {
  RephraseKind kind = RephraseKind::kReferralSimple;
  std::string text;                   // sentence to rewrite, or the caption list for caption-summary
  std::string target_label;           // referral kinds and caption-summary
  std::vector<std::string> anchor_labels;
  std::optional<nlohmann::ordered_json> scene_graph;  // scene-summary only

  /// Throws ConfigError when a field required by `kind` is missing.
  void validate() const;
};

/// The verbatim prompt for the kind with its slots filled.
std::string render_prompt(const RephraseRequest& req);

struct RephraseResult {
  std::string text;
  std::vector<std::string> flags;  // rephrase-trimmed | rephrase-rejected | rephrase-failed
  bool accepted = false;           // false when the original text was kept
};

/// First sentence of `text`, trimmed. Sentence ends are '.', '!' or '?'
/// followed by whitespace and an uppercase letter, or the end of text.
std::string first_sentence(std::string_view text, bool* trimmed = nullptr);

/// Sends the request; keeps the original text on failure or when a referral
/// rewrite loses the target label. Never throws ClientError.
RephraseResult rephrase(const RephraseRequest& req, const TextClient& client);

}  // namespace sgf
