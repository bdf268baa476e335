#include "sgf/langgen.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <stdexcept>

#include "sgf/error.hpp"
#include "sgf/resources.hpp"
#include "sgf/seed.hpp"

namespace sgf {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(ClusterKind k) {
  switch (k) {
    case ClusterKind::kAllSame: return "all_same";
    case ClusterKind::kTwoSame: return "two_same";
    case ClusterKind::kAllDistinct: return "all_distinct";
  }
  return "?";
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string with_article(const std::string& label) {
  if (label.empty()) return label;
  const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(label.front())));
  const bool vowel = c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
  return (vowel ? "an " : "a ") + label;
}

std::string capitalize(std::string s) {
  if (!s.empty()) s.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(s.front())));
  return s;
}

std::string ordinal(std::size_t i) {
  static const char* kWords[] = {"first", "second", "third", "fourth", "fifth",
                                 "sixth", "seventh", "eighth", "ninth", "tenth"};
  if (i < 10) return kWords[i];
  const std::size_t n = i + 1;
  const char* suffix = (n % 100 >= 11 && n % 100 <= 13) ? "th"
                       : n % 10 == 1                     ? "st"
                       : n % 10 == 2                     ? "nd"
                       : n % 10 == 3                     ? "rd"
                                                         : "th";
  return std::to_string(n) + suffix;
}

std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += (i + 1 == items.size()) ? " and " : ", ";
    out += items[i];
  }
  return out;
}

std::multiset<std::string> normalized_slots(std::string_view tmpl) {
  std::multiset<std::string> out;
  for (std::string s : template_slots(tmpl)) {
    if (s.rfind("a:", 0) == 0) s = s.substr(2);
    out.insert(std::move(s));
  }
  return out;
}

void check_family(const std::vector<std::string>& templates, const std::multiset<std::string>& expected,
                  const std::string& family) {
  if (templates.empty()) throw ConfigError("template pool: family '" + family + "' is empty");
  for (const std::string& t : templates) {
    if (normalized_slots(t) != expected) {
      throw ConfigError("template pool: '" + t + "' does not match the slots of family '" + family + "'");
    }
  }
}

std::vector<std::string> string_list(const json& v, const std::string& what) {
  if (!v.is_array()) throw ConfigError("template pool: '" + what + "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& s : v) {
    if (!s.is_string()) throw ConfigError("template pool: '" + what + "' must be an array of strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

}  // namespace

std::vector<std::string> template_slots(std::string_view tmpl) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = tmpl.find('{', pos)) != std::string_view::npos) {
    const std::size_t end = tmpl.find('}', pos);
    if (end == std::string_view::npos) throw ConfigError("template '" + std::string(tmpl) + "' has an unclosed slot");
    out.emplace_back(tmpl.substr(pos + 1, end - pos - 1));
    pos = end + 1;
  }
  return out;
}

std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const std::size_t open = tmpl.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    out.append(tmpl.substr(pos, open - pos));
    const std::size_t close = tmpl.find('}', open);
    if (close == std::string_view::npos) throw ConfigError("template '" + std::string(tmpl) + "' has an unclosed slot");
    std::string name(tmpl.substr(open + 1, close - open - 1));
    bool article = false;
    if (name.rfind("a:", 0) == 0) {
      article = true;
      name = name.substr(2);
    }
    const auto it = values.find(name);
    if (it == values.end()) throw ConfigError("template '" + std::string(tmpl) + "': no value for slot '" + name + "'");
    out += article ? with_article(it->second) : it->second;
    pos = close + 1;
  }
  return capitalize(std::move(out));
}

void TemplatePool::validate() const {
  check_family(pairwise, {"target", "relation", "anchor"}, "pairwise");
  check_family(multi, {"target", "relation", "anchor1", "anchor2"}, "multi");
  check_family(aligned, {"target", "relation", "anchors"}, "aligned");
  const auto family = [&](ClusterKind k) -> const std::vector<std::string>& {
    const auto it = star.find(k);
    if (it == star.end()) throw ConfigError("template pool: no star templates for " + std::string(to_string(k)));
    return it->second;
  };
  check_family(family(ClusterKind::kAllSame), {"target", "relation", "anchor1", "anchor2", "anchor3"},
               "star.all_same");
  check_family(family(ClusterKind::kTwoSame),
               {"target", "relation1", "relation2", "anchor1", "anchor2", "anchor3"}, "star.two_same");
  check_family(family(ClusterKind::kAllDistinct),
               {"target", "relation1", "relation2", "relation3", "anchor1", "anchor2", "anchor3"},
               "star.all_distinct");
  for (RelationType r : all_relation_types()) {
    const auto it = lexicon.find(r);
    if (it == lexicon.end() || it->second.empty()) {
      throw ConfigError("template pool: no surface phrase for relation '" + std::string(to_string(r)) + "'");
    }
  }
}

TemplatePool TemplatePool::from_json(std::string_view text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": JSON parse error at byte " + std::to_string(e.byte));
  }
  TemplatePool pool;
  try {
    pool.pairwise = string_list(doc.at("pairwise"), "pairwise");
    pool.multi = string_list(doc.at("multi"), "multi");
    pool.aligned = string_list(doc.at("aligned"), "aligned");
    for (ClusterKind k : {ClusterKind::kAllSame, ClusterKind::kTwoSame, ClusterKind::kAllDistinct}) {
      const std::string key(to_string(k));
      pool.star[k] = string_list(doc.at("star").at(key), "star." + key);
    }
    for (const auto& [name, phrases] : doc.at("lexicon").items()) {
      const auto rel = relation_from_string(name);
      if (!rel) throw ConfigError(origin + ": unknown relation '" + name + "' in lexicon");
      pool.lexicon[*rel] = string_list(phrases, "lexicon." + name);
    }
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": malformed template pool: " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  pool.validate();
  return pool;
}

TemplatePool TemplatePool::builtin() {
  static const TemplatePool pool = from_json(resources::get("templates.json"), "templates.json");
  return pool;
}

TemplateChoice choose(std::uint64_t seed, std::size_t template_count, std::size_t phrase_count) {
  Rng rng(seed);
  TemplateChoice c;
  c.template_index = rng.below(template_count);
  c.phrase_index = rng.below(phrase_count);
  return c;
}

std::string render_pairwise(const Triplet& t, const TemplatePool& pool, TemplateChoice choice) {
  if (category_of(t.relation) == RelationCategory::kMultiObject) {
    throw std::invalid_argument("pairwise sentence requested for a multi-object relation");
  }
  const auto& phrases = pool.phrases(t.relation);
  const std::string anchor = t.anchor == t.target ? "other " + t.anchor : t.anchor;
  return fill_template(pool.pairwise.at(choice.template_index),
                       {{"target", t.target}, {"relation", phrases.at(choice.phrase_index)}, {"anchor", anchor}});
}

std::string gen_pairwise(const Triplet& t, const TemplatePool& pool, std::uint64_t seed) {
  return render_pairwise(t, pool, choose(seed, pool.pairwise.size(), pool.phrases(t.relation).size()));
}

std::vector<std::string> disambiguate(const std::vector<std::string>& labels, bool definite) {
  std::map<std::string, std::size_t> total;
  for (const auto& l : labels) ++total[l];
  std::map<std::string, std::size_t> seen;
  std::vector<std::string> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    const std::size_t n = total[l];
    const std::size_t i = seen[l]++;
    if (n == 1) {
      out.push_back(definite ? "the " + l : l);
    } else if (n == 2) {
      out.push_back((i == 0 ? "one " : "the other ") + l);
    } else {
      out.push_back("the " + ordinal(i) + " " + l);
    }
  }
  return out;
}

MultiPhrase multi_phrase(const MultiRelation& rel, const SceneGraph& graph) {
  MultiPhrase m;
  m.kind = rel.kind;
  if (rel.kind == MultiKind::kBetween) {
    m.target = graph.at(rel.target.value()).label;
    for (InstanceId a : rel.anchors) m.anchors.push_back(graph.at(a).label);
  } else {
    const InstanceId subject = rel.target.value_or(rel.anchors.front());
    m.target = graph.at(subject).label;
    for (InstanceId a : rel.anchors) {
      if (a != subject) m.anchors.push_back(graph.at(a).label);
    }
  }
  return m;
}

std::string render_multi(const MultiPhrase& m, const TemplatePool& pool, TemplateChoice choice) {
  const std::vector<std::string> anchors = disambiguate(m.anchors, false);
  if (m.kind == MultiKind::kBetween) {
    if (anchors.size() != 2) throw std::invalid_argument("between needs exactly two anchors");
    return fill_template(pool.multi.at(choice.template_index),
                         {{"target", m.target},
                          {"relation", pool.phrases(RelationType::kBetween).at(choice.phrase_index)},
                          {"anchor1", anchors[0]},
                          {"anchor2", anchors[1]}});
  }
  if (anchors.size() < 2) throw std::invalid_argument("aligned needs at least two other members");
  return fill_template(pool.aligned.at(choice.template_index),
                       {{"target", m.target},
                        {"relation", pool.phrases(RelationType::kAligned).at(choice.phrase_index)},
                        {"anchors", join_list(anchors)}});
}

std::string gen_multi(const MultiPhrase& m, const TemplatePool& pool, std::uint64_t seed) {
  const bool between = m.kind == MultiKind::kBetween;
  const auto& templates = between ? pool.multi : pool.aligned;
  const auto& phrases = pool.phrases(between ? RelationType::kBetween : RelationType::kAligned);
  return render_multi(m, pool, choose(seed, templates.size(), phrases.size()));
}

ClusterKind classify_star(const std::array<RelationType, 3>& r) {
  const int equal_pairs = (r[0] == r[1]) + (r[0] == r[2]) + (r[1] == r[2]);
  if (equal_pairs == 3) return ClusterKind::kAllSame;
  if (equal_pairs == 1) return ClusterKind::kTwoSame;
  return ClusterKind::kAllDistinct;
}

std::array<std::size_t, 3> star_order(const std::array<RelationType, 3>& r) {
  if (classify_star(r) != ClusterKind::kTwoSame) return {0, 1, 2};
  if (r[0] == r[1]) return {0, 1, 2};
  if (r[0] == r[2]) return {0, 2, 1};
  return {1, 2, 0};
}

std::string gen_star(const std::string& target, const std::array<StarArm, 3>& arms, const TemplatePool& pool,
                     std::uint64_t seed) {
  const ClusterKind kind = classify_star({arms[0].relation, arms[1].relation, arms[2].relation});
  const auto order = star_order({arms[0].relation, arms[1].relation, arms[2].relation});
  const std::array<StarArm, 3> ordered = {arms[order[0]], arms[order[1]], arms[order[2]]};
  std::vector<std::string> anchors = disambiguate({ordered[0].anchor, ordered[1].anchor, ordered[2].anchor}, true);
  const auto same_as_target = std::count_if(ordered.begin(), ordered.end(),
                                             [&](const StarArm& a) { return a.anchor == target; });
  for (std::size_t i = 0; i < 3; ++i) {
    if (same_as_target == 1 && ordered[i].anchor == target) anchors[i] = "the other " + target;
  }

  Rng rng(seed);
  const auto& templates = pool.star.at(kind);
  const std::string& tmpl = templates[rng.below(templates.size())];
  const auto phrase = [&](RelationType r) { return rng.pick(pool.phrases(r)); };

  std::map<std::string, std::string> values{
      {"target", target}, {"anchor1", anchors[0]}, {"anchor2", anchors[1]}, {"anchor3", anchors[2]}};
  switch (kind) {
    case ClusterKind::kAllSame:
      values["relation"] = phrase(ordered[0].relation);
      break;
    case ClusterKind::kTwoSame:
      values["relation1"] = phrase(ordered[0].relation);
      values["relation2"] = phrase(ordered[2].relation);
      break;
    case ClusterKind::kAllDistinct:
      values["relation1"] = phrase(ordered[0].relation);
      values["relation2"] = phrase(ordered[1].relation);
      values["relation3"] = phrase(ordered[2].relation);
      break;
  }
  return fill_template(tmpl, values);
}

ScenePrompt build_scene_prompt(const SceneGraph& graph, const ScenePromptConfig& cfg, const TemplatePool& pool,
                               std::uint64_t seed) {
  if (graph.nodes.empty()) throw std::invalid_argument("scene prompt requested for an empty graph");
  Rng rng(seed);

  std::map<std::string, std::size_t> counts;
  for (const auto& n : graph.nodes) ++counts[n.label];

  std::vector<InstanceId> ids;
  for (const auto& n : graph.nodes) ids.push_back(n.id);
  if (ids.size() > cfg.max_nodes) {
    rng.shuffle(std::span<InstanceId>(ids));
    ids.resize(cfg.max_nodes);
  }
  const std::set<InstanceId> sampled(ids.begin(), ids.end());

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < graph.edges.size(); ++i) {
    const Edge& e = graph.edges[i];
    if (sampled.count(e.source) && sampled.count(e.target)) candidates.push_back(i);
  }
  if (candidates.size() > cfg.max_edges) {
    rng.shuffle(std::span<std::size_t>(candidates));
    candidates.resize(cfg.max_edges);
    std::sort(candidates.begin(), candidates.end());
  }

  ScenePrompt out;
  out.payload["scene_type"] = graph.room_type.value_or("room");
  ordered_json object_count = ordered_json::object();
  for (const auto& [label, n] : counts) object_count[label] = n;
  out.payload["object_count"] = std::move(object_count);
  ordered_json relations = ordered_json::array();
  for (std::size_t i : candidates) {
    const Edge& e = graph.edges[i];
    relations.push_back(
        ordered_json::array({graph.at(e.source).label, pool.phrases(e.relation).front(), graph.at(e.target).label}));
  }
  out.payload["relation"] = std::move(relations);

  RephraseRequest req;
  req.kind = RephraseKind::kSceneSummary;
  req.scene_graph = out.payload;
  out.instruction = render_prompt(req);
  return out;
}

namespace {

std::string plural(const std::string& label) {
  const auto ends = [&](std::string_view s) {
    return label.size() >= s.size() && label.compare(label.size() - s.size(), s.size(), s) == 0;
  };
  if (ends("s") || ends("x") || ends("ch") || ends("sh")) return label + "es";
  return label + "s";
}

}  // namespace

std::string template_scene_caption(const ordered_json& payload) {
  const std::string room = payload.at("scene_type").get<std::string>();
  std::vector<std::pair<std::size_t, std::string>> objects;
  for (const auto& [label, n] : payload.at("object_count").items()) {
    objects.emplace_back(n.get<std::size_t>(), label);
  }
  std::stable_sort(objects.begin(), objects.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  if (objects.size() > 5) objects.resize(5);
  std::vector<std::string> parts;
  for (const auto& [n, label] : objects) {
    parts.push_back(n == 1 ? with_article(label) : std::to_string(n) + " " + plural(label));
  }
  std::string out = capitalize("this is " + with_article(lower(room)));
  if (!parts.empty()) out += " with " + join_list(parts);
  out += ".";
  const auto& rels = payload.at("relation");
  for (std::size_t i = 0; i < rels.size() && i < 2; ++i) {
    out += " The " + rels[i][0].get<std::string>() + " is " + rels[i][1].get<std::string>() + " the " +
           rels[i][2].get<std::string>() + ".";
  }
  return out;
}

std::string_view to_string(RephraseKind k) {
  switch (k) {
    case RephraseKind::kReferralSimple: return "referral-simple";
    case RephraseKind::kReferralSubjectLocked: return "referral-subject-locked";
    case RephraseKind::kReferralEnriched: return "referral-enriched";
    case RephraseKind::kSceneSummary: return "scene-summary";
    case RephraseKind::kCaptionSummary: return "caption-summary";
  }
  return "?";
}

bool is_referral(RephraseKind k) {
  return k == RephraseKind::kReferralSimple || k == RephraseKind::kReferralSubjectLocked ||
         k == RephraseKind::kReferralEnriched;
}

void RephraseRequest::validate() const {
  const std::string name(to_string(kind));
  if (kind == RephraseKind::kSceneSummary) {
    if (!scene_graph) throw ConfigError(name + " request needs a scene graph payload");
    return;
  }
  if (text.empty()) throw ConfigError(name + " request needs text");
  if (target_label.empty() && kind != RephraseKind::kReferralSimple) {
    throw ConfigError(name + " request needs a target label");
  }
  if (kind == RephraseKind::kReferralSubjectLocked && anchor_labels.empty()) {
    throw ConfigError(name + " request needs anchor labels");
  }
}

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

}  // namespace

std::string render_prompt(const RephraseRequest& req) {
  req.validate();
  std::string prompt(resources::get("prompts/" + std::string(to_string(req.kind)) + ".txt"));
  while (!prompt.empty() && (prompt.back() == '\n' || prompt.back() == ' ')) prompt.pop_back();
  std::string anchors;
  for (std::size_t i = 0; i < req.anchor_labels.size(); ++i) {
    if (i > 0) anchors += ", ";
    anchors += req.anchor_labels[i];
  }
  // Slot values may contain braces, so the payload goes in last.
  replace_all(prompt, "{caption}", req.text);
  replace_all(prompt, "{target}", req.target_label);
  replace_all(prompt, "{anchors}", anchors);
  if (req.scene_graph) replace_all(prompt, "{scene_graph}", req.scene_graph->dump());
  return prompt;
}

std::string first_sentence(std::string_view text, bool* trimmed) {
  const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && is_space(text[b])) ++b;
  while (e > b && is_space(text[e - 1])) --e;
  const std::string_view t = text.substr(b, e - b);
  if (trimmed) *trimmed = false;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    if (t[i] != '.' && t[i] != '!' && t[i] != '?') continue;
    std::size_t j = i + 1;
    if (!is_space(t[j])) continue;
    while (j < t.size() && is_space(t[j])) ++j;
    if (j < t.size() && (std::isupper(static_cast<unsigned char>(t[j])) || t[j] == '"')) {
      if (trimmed) *trimmed = true;
      return std::string(t.substr(0, i + 1));
    }
  }
  return std::string(t);
}

RephraseResult rephrase(const RephraseRequest& req, const TextClient& client) {
  const std::string prompt = render_prompt(req);
  RephraseResult kept{req.text, {}, false};
  std::string reply;
  try {
    json request;
    request["kind"] = std::string(to_string(req.kind));
    request["prompt"] = prompt;
    request["text"] = req.text;
    reply = response_text(client.call(request));
  } catch (const ClientError&) {
    kept.flags = {"rephrase-failed"};
    return kept;
  }
  bool trimmed = false;
  std::string sentence = first_sentence(reply, &trimmed);
  if (sentence.empty() ||
      (is_referral(req.kind) && !req.target_label.empty() &&
       lower(sentence).find(lower(req.target_label)) == std::string::npos)) {
    kept.flags = {"rephrase-rejected"};
    return kept;
  }
  RephraseResult out{std::move(sentence), {}, true};
  if (trimmed) out.flags.push_back("rephrase-trimmed");
  return out;
}

}  // namespace sgf
