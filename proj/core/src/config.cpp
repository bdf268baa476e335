#include "sgf/config.hpp"

#include <cstdlib>
#include <set>

#include "sgf/error.hpp"
#include "sgf/io.hpp"
#include "sgf/seed.hpp"

namespace sgf {

using json = nlohmann::json;

namespace {

std::string_view to_string(HangableRule r) {
  return r == HangableRule::kNoInContactParent ? "no-in-contact-parent" : "no-horizontal-relation";
}

std::string_view to_string(RephraseMode m) {
  switch (m) {
    case RephraseMode::kNone: return "none";
    case RephraseMode::kStub: return "stub";
    case RephraseMode::kHttp: return "http";
  }
  return "?";
}

std::string_view to_string(CaptionerMode m) { return m == CaptionerMode::kStub ? "stub" : "http"; }

std::string_view to_string(StubRephraser::Mode m) {
  switch (m) {
    case StubRephraser::Mode::kIdentity: return "identity";
    case StubRephraser::Mode::kPrefix: return "prefix";
    case StubRephraser::Mode::kDropTarget: return "drop-target";
    case StubRephraser::Mode::kTwoSentences: return "two-sentences";
    case StubRephraser::Mode::kFail: return "fail";
  }
  return "?";
}

std::string_view to_string(SelectionRule r) { return r == SelectionRule::kProduct ? "product" : "lexicographic"; }

/// Reads fields of one JSON object and rejects keys that were never read.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_ + " must be an object");
  }
  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!obj_.contains(key)) return;
    try {
      out = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path_ + "." + key + " has the wrong type");
    }
  }

  void path(const char* key, std::filesystem::path& out, const std::filesystem::path& base) {
    seen_.insert(key);
    if (!obj_.contains(key) || obj_.at(key).is_null()) return;
    if (!obj_.at(key).is_string()) throw ConfigError(path_ + "." + key + " must be a string");
    const std::filesystem::path p = obj_.at(key).get<std::string>();
    out = (p.is_relative() && !base.empty()) ? base / p : p;
  }

  std::optional<Section> child(const char* key) {
    seen_.insert(key);
    if (!obj_.contains(key)) return std::nullopt;
    return Section(obj_.at(key), path_ + "." + key);
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) throw ConfigError(path_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string file_digest(const std::filesystem::path& p) { return p.empty() ? "" : sha256_hex(io::read_file(p)); }

}  // namespace

RephraseMode rephrase_mode_from_string(const std::string& s) {
  if (s == "none") return RephraseMode::kNone;
  if (s == "stub") return RephraseMode::kStub;
  if (s == "http") return RephraseMode::kHttp;
  throw ConfigError("rephrase mode must be none, stub or http (got '" + s + "')");
}

CaptionerMode captioner_mode_from_string(const std::string& s) {
  if (s == "stub") return CaptionerMode::kStub;
  if (s == "http") return CaptionerMode::kHttp;
  throw ConfigError("captioner mode must be stub or http (got '" + s + "')");
}

json to_json(const IngestConfig& c) {
  return json{{"max_points", c.max_points},
              {"min_objects", c.min_objects},
              {"max_extent_m", c.max_extent_m},
              {"label_map", c.label_map_path.empty() ? json(nullptr) : json(c.label_map_path.string())},
              {"floor_labels", c.floor_labels}};
}

json to_json(const GraphConfig& c) {
  return json{{"eps_contact_m", c.eps_contact_m},
              {"footprint_overlap_min", c.footprint_overlap_min},
              {"containment_inside", c.containment_inside},
              {"containment_embedded", c.containment_embedded},
              {"container_labels", c.container_labels},
              {"wall_labels", c.wall_labels},
              {"floor_labels", c.floor_labels},
              {"hang_gap_m", c.hang_gap_m},
              {"above_overlap_min", c.above_overlap_min},
              {"higher_min_dz_m", c.higher_min_dz_m},
              {"higher_max_xy_m", c.higher_max_xy_m},
              {"near_max_m", c.near_max_m},
              {"close_max_m", c.close_max_m},
              {"adjacent_gap_m", c.adjacent_gap_m},
              {"aligned_delta_floor_m", c.aligned_delta_floor_m},
              {"aligned_delta_scale", c.aligned_delta_scale},
              {"hangable_rule", std::string(to_string(c.hangable_rule))}};
}

json to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["ingest"] = to_json(c.ingest);
  j["graph"] = to_json(c.graph);
  j["templates"] = c.templates_path.empty() ? json(nullptr) : json(c.templates_path.string());
  j["refinement"] = c.refinement_path.empty() ? json(nullptr) : json(c.refinement_path.string());
  j["clients"] = json{{"rephrase", std::string(to_string(c.clients.rephrase))},
                      {"rephrase_url", c.clients.rephrase_url},
                      {"stub_mode", std::string(to_string(c.clients.stub_mode))},
                      {"captioner", std::string(to_string(c.clients.captioner))},
                      {"captioner_url", c.clients.captioner_url},
                      {"scorer_url", c.clients.scorer_url},
                      {"summarizer_url", c.clients.summarizer_url},
                      {"timeout_ms", c.clients.timeout_ms}};
  j["sampling"] = json{{"referrals_per_scene", c.sampling.referrals_per_scene},
                       {"star_per_scene", c.sampling.star_per_scene},
                       {"scene_captions_per_scene", c.sampling.scene_captions_per_scene},
                       {"scene_prompt_max_nodes", c.sampling.scene_prompt.max_nodes},
                       {"scene_prompt_max_edges", c.sampling.scene_prompt.max_edges}};
  j["caption"] = json{{"top_k", c.caption.top_k},
                      {"zbuf_cell_px", c.caption.zbuf_cell_px},
                      {"crop_margin", c.caption.crop_margin},
                      {"selection", std::string(to_string(c.caption.rule))}};
  return j;
}

void RunConfig::propagate_seed() {
  ingest.seed = seed;
  graph.seed = seed;
}

void RunConfig::validate() const {
  ingest.validate();
  graph.validate();
  caption.validate();
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (clients.timeout_ms <= 0) throw ConfigError("clients.timeout_ms must be > 0");
  const auto must_exist = [](const std::filesystem::path& p, const char* what) {
    if (!p.empty() && !std::filesystem::exists(p)) {
      throw ConfigError(std::string(what) + " '" + p.string() + "' does not exist");
    }
  };
  must_exist(ingest.label_map_path, "ingest.label_map");
  must_exist(templates_path, "templates");
  must_exist(refinement_path, "refinement");
  if (clients.rephrase == RephraseMode::kHttp && clients.rephrase_url.empty()) {
    throw ConfigError("clients.rephrase_url is required when rephrase = http");
  }
  if (clients.captioner == CaptionerMode::kHttp &&
      (clients.captioner_url.empty() || clients.scorer_url.empty() || clients.summarizer_url.empty())) {
    throw ConfigError("captioner_url, scorer_url and summarizer_url are required when captioner = http");
  }
}

TemplatePool RunConfig::template_pool() const {
  if (templates_path.empty()) return TemplatePool::builtin();
  return TemplatePool::from_json(io::read_file(templates_path), templates_path.string());
}

RefinementMap RunConfig::refinement() const {
  if (refinement_path.empty()) return RefinementMap::builtin();
  return RefinementMap::from_json(io::read_file(refinement_path), refinement_path.string());
}

RunConfig run_config_from_json(std::string_view text, const std::string& origin,
                               const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": JSON parse error at byte " + std::to_string(e.byte));
  }
  RunConfig c;
  Section root(doc, origin);
  root.get("seed", c.seed);
  root.path("out_dir", c.out_dir, base_dir);
  root.get("jobs", c.jobs);
  root.path("templates", c.templates_path, base_dir);
  root.path("refinement", c.refinement_path, base_dir);
  if (auto s = root.child("ingest")) {
    s->get("max_points", c.ingest.max_points);
    s->get("min_objects", c.ingest.min_objects);
    s->get("max_extent_m", c.ingest.max_extent_m);
    s->path("label_map", c.ingest.label_map_path, base_dir);
    s->get("floor_labels", c.ingest.floor_labels);
    s->finish();
  }
  if (auto s = root.child("graph")) {
    GraphConfig& g = c.graph;
    s->get("eps_contact_m", g.eps_contact_m);
    s->get("footprint_overlap_min", g.footprint_overlap_min);
    s->get("containment_inside", g.containment_inside);
    s->get("containment_embedded", g.containment_embedded);
    s->get("container_labels", g.container_labels);
    s->get("wall_labels", g.wall_labels);
    s->get("floor_labels", g.floor_labels);
    s->get("hang_gap_m", g.hang_gap_m);
    s->get("above_overlap_min", g.above_overlap_min);
    s->get("higher_min_dz_m", g.higher_min_dz_m);
    s->get("higher_max_xy_m", g.higher_max_xy_m);
    s->get("near_max_m", g.near_max_m);
    s->get("close_max_m", g.close_max_m);
    s->get("adjacent_gap_m", g.adjacent_gap_m);
    s->get("aligned_delta_floor_m", g.aligned_delta_floor_m);
    s->get("aligned_delta_scale", g.aligned_delta_scale);
    std::string rule(to_string(g.hangable_rule));
    s->get("hangable_rule", rule);
    if (rule == "no-in-contact-parent") {
      g.hangable_rule = HangableRule::kNoInContactParent;
    } else if (rule == "no-horizontal-relation") {
      g.hangable_rule = HangableRule::kNoHorizontalRelation;
    } else {
      throw ConfigError(origin + ": graph.hangable_rule must be no-in-contact-parent or no-horizontal-relation");
    }
    s->finish();
  }
  if (auto s = root.child("clients")) {
    std::string rephrase(to_string(c.clients.rephrase));
    std::string captioner(to_string(c.clients.captioner));
    std::string stub_mode(to_string(c.clients.stub_mode));
    s->get("rephrase", rephrase);
    s->get("captioner", captioner);
    s->get("stub_mode", stub_mode);
    s->get("rephrase_url", c.clients.rephrase_url);
    s->get("captioner_url", c.clients.captioner_url);
    s->get("scorer_url", c.clients.scorer_url);
    s->get("summarizer_url", c.clients.summarizer_url);
    s->get("timeout_ms", c.clients.timeout_ms);
    c.clients.rephrase = rephrase_mode_from_string(rephrase);
    c.clients.captioner = captioner_mode_from_string(captioner);
    c.clients.stub_mode = StubRephraser::mode_from_string(stub_mode);
    s->finish();
  }
  if (auto s = root.child("sampling")) {
    s->get("referrals_per_scene", c.sampling.referrals_per_scene);
    s->get("star_per_scene", c.sampling.star_per_scene);
    s->get("scene_captions_per_scene", c.sampling.scene_captions_per_scene);
    s->get("scene_prompt_max_nodes", c.sampling.scene_prompt.max_nodes);
    s->get("scene_prompt_max_edges", c.sampling.scene_prompt.max_edges);
    s->finish();
  }
  if (auto s = root.child("caption")) {
    s->get("top_k", c.caption.top_k);
    s->get("zbuf_cell_px", c.caption.zbuf_cell_px);
    s->get("crop_margin", c.caption.crop_margin);
    std::string rule(to_string(c.caption.rule));
    s->get("selection", rule);
    if (rule == "product") {
      c.caption.rule = SelectionRule::kProduct;
    } else if (rule == "lexicographic") {
      c.caption.rule = SelectionRule::kLexicographic;
    } else {
      throw ConfigError(origin + ": caption.selection must be product or lexicographic");
    }
    s->finish();
  }
  root.finish();
  c.propagate_seed();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file '" + path.string() + "' does not exist");
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return run_config_from_json(text, path.string(), path.parent_path());
}

void apply_env_overrides(RunConfig& cfg, const std::function<std::optional<std::string>(const char*)>& getenv) {
  const auto get = [&](const char* name) -> std::optional<std::string> {
    if (getenv) return getenv(name);
    const char* v = std::getenv(name);
    if (!v) return std::nullopt;
    return std::string(v);
  };
  const auto number = [](const std::string& v, const char* name) {
    try {
      std::size_t pos = 0;
      const auto n = std::stoull(v, &pos, 0);
      if (pos != v.size()) throw std::invalid_argument(v);
      return n;
    } catch (const std::logic_error&) {
      throw ConfigError(std::string(name) + " must be a non-negative integer (got '" + v + "')");
    }
  };
  if (auto v = get("SGF_SEED")) cfg.seed = number(*v, "SGF_SEED");
  if (auto v = get("SGF_JOBS")) cfg.jobs = number(*v, "SGF_JOBS");
  if (auto v = get("SGF_OUT")) cfg.out_dir = *v;
  if (auto v = get("SGF_REPHRASE")) cfg.clients.rephrase = rephrase_mode_from_string(*v);
  if (auto v = get("SGF_REPHRASE_URL")) cfg.clients.rephrase_url = *v;
  if (auto v = get("SGF_CAPTIONER")) cfg.clients.captioner = captioner_mode_from_string(*v);
  if (auto v = get("SGF_CAPTIONER_URL")) cfg.clients.captioner_url = *v;
  if (auto v = get("SGF_SCORER_URL")) cfg.clients.scorer_url = *v;
  if (auto v = get("SGF_SUMMARIZER_URL")) cfg.clients.summarizer_url = *v;
  if (auto v = get("SGF_LABEL_MAP")) cfg.ingest.label_map_path = *v;
  cfg.propagate_seed();
}

std::string run_config_digest(const RunConfig& cfg) {
  json j = to_json(cfg);
  j["files"] = json{{"label_map", file_digest(cfg.ingest.label_map_path)},
                    {"templates", file_digest(cfg.templates_path)},
                    {"refinement", file_digest(cfg.refinement_path)}};
  // Paths do not change outputs; file contents do.
  j["ingest"].erase("label_map");
  j.erase("templates");
  j.erase("refinement");
  return sha256_hex(j.dump());
}

}  // namespace sgf
