#include "sgf/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "sgf/error.hpp"
#include "sgf/graph_io.hpp"
#include "sgf/io.hpp"
#include "sgf/log.hpp"
#include "sgf/seed.hpp"

namespace sgf {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(std::max<std::size_t>(jobs, 1), n);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string file_stem(const std::string& scene_id) {
  std::string out = scene_id;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                    c == '_' || c == '-';
    if (!ok) c = '_';
  }
  if (out.empty() || out.front() == '.') out.insert(out.begin(), '_');
  return out;
}

namespace {

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool is_sidecar(const fs::path& p) {
  const std::string name = p.filename().string();
  return ends_with(name, ".cameras.json") || ends_with(name, ".instances.json");
}

std::vector<fs::path> list_files(const fs::path& dir, std::string_view suffix) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw DataError("cannot read directory " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && ends_with(entry.path().filename().string(), suffix)) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

fs::path cameras_path_for(const fs::path& scene_file) {
  fs::path p = scene_file;
  p.replace_extension(".cameras.json");
  return p;
}

std::string join_ids(const std::vector<InstanceId>& ids) {
  std::string out;
  for (InstanceId id : ids) out += std::to_string(id) + ",";
  return out;
}

/// Claims output stems so that two inputs never write the same file.
class StemRegistry {
 public:
  void claim(const std::string& stem, const std::string& owner) {
    const std::lock_guard<std::mutex> lock(mutex_);
    const auto [it, inserted] = owners_.emplace(stem, owner);
    if (!inserted) throw DataError("scene id collision: " + it->second + " and " + owner + " both map to " + stem);
  }

 private:
  std::mutex mutex_;
  std::map<std::string, std::string> owners_;
};

void collect(CommandResult& result, const std::vector<std::vector<std::string>>& per_item) {
  for (const auto& w : per_item) result.warnings.insert(result.warnings.end(), w.begin(), w.end());
}

}  // namespace

std::vector<fs::path> list_scene_inputs(const fs::path& input) {
  std::error_code ec;
  if (fs::is_regular_file(input, ec)) return {input};
  if (!fs::is_directory(input, ec)) throw DataError("cannot read input " + input.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(input)) {
    if (!entry.is_regular_file() || is_sidecar(entry.path())) continue;
    if (format_for(entry.path())) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::unique_ptr<TextClient> make_rephraser(const ClientConfig& cfg) {
  switch (cfg.rephrase) {
    case RephraseMode::kNone: return nullptr;
    case RephraseMode::kStub: return std::make_unique<StubRephraser>(cfg.stub_mode);
    case RephraseMode::kHttp:
      return std::make_unique<HttpClient>(cfg.rephrase_url, std::chrono::milliseconds(cfg.timeout_ms));
  }
  return nullptr;
}

CaptionClientSet make_caption_clients(const ClientConfig& cfg) {
  CaptionClientSet set;
  if (cfg.captioner == CaptionerMode::kStub) {
    set.captioner = std::make_unique<StubCaptioner>();
    set.scorer = std::make_unique<StubScorer>();
    set.summarizer = std::make_unique<StubSummarizer>();
  } else {
    const std::chrono::milliseconds timeout(cfg.timeout_ms);
    set.captioner = std::make_unique<HttpClient>(cfg.captioner_url, timeout);
    set.scorer = std::make_unique<HttpClient>(cfg.scorer_url, timeout);
    set.summarizer = std::make_unique<HttpClient>(cfg.summarizer_url, timeout);
  }
  return set;
}

// ---------------------------------------------------------------------------
// Language generation

namespace {

struct Candidate {
  RecordForm form = RecordForm::kPairwise;
  InstanceId target = 0;
  std::vector<InstanceId> anchors;
  RelationType relation = RelationType::kNextTo;
  const MultiRelation* multi = nullptr;
};

/// Proximate horizontal edges may be phrased with a proximity relation
/// instead of the directional one.
RelationType surface_relation(const Edge& e, std::uint64_t root) {
  if (category_of(e.relation) != RelationCategory::kHorizontal || e.geom.proximity == Proximity::kNone) {
    return e.relation;
  }
  const std::array<RelationType, 4> options =
      e.geom.proximity == Proximity::kAdjacent
          ? std::array{e.relation, RelationType::kAdjacentTo, RelationType::kNextTo, RelationType::kBesides}
          : std::array{e.relation, RelationType::kCloseTo, RelationType::kBesides, RelationType::kNextTo};
  Rng rng(derive_seed(root, {"surface", std::to_string(e.source), std::to_string(e.target)}));
  return options[rng.below(options.size())];
}

LanguageRecord rephrased(const LanguageRecord& base, const RephraseRequest& req, const TextClient& client) {
  const RephraseResult res = rephrase(req, client);
  LanguageRecord r = base;
  r.source = req.kind == RephraseKind::kSceneSummary ? RecordSource::kSummary : RecordSource::kRephrased;
  r.text = res.text;
  r.flags = res.flags;
  return finalize(std::move(r));
}

}  // namespace

SceneLanguage generate_language(const SceneGraph& graph, const RunConfig& cfg, const TemplatePool& pool,
                                const TextClient* rephraser) {
  SceneLanguage out;
  const std::uint64_t root = derive_seed(cfg.seed, {"language", graph.scene_id});
  const auto label = [&](InstanceId id) { return graph.at(id).label; };
  // Floors and walls serve as anchors only.
  const auto is_structural = [&](InstanceId id) {
    return cfg.graph.floor_labels.contains(label(id)) || cfg.graph.wall_labels.contains(label(id));
  };

  // Referrals: round-robin across surface relations.
  std::map<RelationType, std::vector<Candidate>> groups;
  for (const auto& e : graph.edges) {
    if (is_structural(e.source)) continue;
    groups[surface_relation(e, root)].push_back({RecordForm::kPairwise, e.source, {e.target}, surface_relation(e, root)});
  }
  for (const auto& m : graph.multi) {
    const bool between = m.kind == MultiKind::kBetween;
    Candidate c{RecordForm::kMulti, 0, {}, between ? RelationType::kBetween : RelationType::kAligned, &m};
    c.target = between ? *m.target : m.anchors.front();
    if (is_structural(c.target)) continue;
    for (InstanceId a : m.anchors) {
      if (a != c.target) c.anchors.push_back(a);
    }
    groups[c.relation].push_back(std::move(c));
  }
  std::vector<RelationType> order;
  for (auto& [rel, cands] : groups) {
    order.push_back(rel);
    // Canonical order first, so the shuffle does not depend on graph order.
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      return std::tie(a.form, a.target, a.anchors) < std::tie(b.form, b.target, b.anchors);
    });
    Rng grng(derive_seed(root, {"referral-group", to_string(rel)}));
    grng.shuffle(std::span<Candidate>(cands));
  }
  Rng orng(derive_seed(root, {"referral-order"}));
  orng.shuffle(std::span<RelationType>(order));
  std::vector<const Candidate*> picked;
  for (std::size_t round = 0; picked.size() < cfg.sampling.referrals_per_scene; ++round) {
    bool any = false;
    for (RelationType rel : order) {
      const auto& cands = groups[rel];
      if (round >= cands.size()) continue;
      any = true;
      picked.push_back(&cands[round]);
      if (picked.size() == cfg.sampling.referrals_per_scene) break;
    }
    if (!any) break;
  }
  for (const Candidate* c : picked) {
    LanguageRecord r;
    r.scene_id = graph.scene_id;
    r.kind = RecordKind::kObjectReferral;
    r.form = c->form;
    r.target_id = c->target;
    r.anchor_ids = c->anchors;
    r.relation = c->relation;
    r.seed = derive_seed(root, {"referral", to_string(c->form), std::to_string(c->target), join_ids(c->anchors),
                                to_string(c->relation)});
    r.text = c->form == RecordForm::kPairwise
                 ? gen_pairwise({label(c->target), c->relation, label(c->anchors.front())}, pool, r.seed)
                 : gen_multi(multi_phrase(*c->multi, graph), pool, r.seed);
    r = finalize(std::move(r));
    if (rephraser) {
      RephraseRequest req;
      req.kind = Rng(derive_seed(r.seed, {"rephrase-kind"})).below(2) == 0 ? RephraseKind::kReferralSimple
                                                                             : RephraseKind::kReferralSubjectLocked;
      req.text = r.text;
      req.target_label = label(c->target);
      for (InstanceId a : c->anchors) req.anchor_labels.push_back(label(a));
      out.records.push_back(rephrased(r, req, *rephraser));
    }
    out.records.push_back(std::move(r));
  }

  // Star references: targets with at least three distinct anchors.
  if (cfg.sampling.star_per_scene > 0) {
    std::map<InstanceId, std::map<InstanceId, const Edge*>> arms;
    for (const auto& e : graph.edges) {
      if (is_structural(e.source)) continue;
      arms[e.source].emplace(e.target, &e);  // edges are sorted, so the first per anchor wins
    }
    std::vector<InstanceId> eligible;
    for (const auto& [t, by_anchor] : arms) {
      if (by_anchor.size() >= 3) eligible.push_back(t);
    }
    Rng srng(derive_seed(root, {"star"}));
    srng.shuffle(std::span<InstanceId>(eligible));
    if (eligible.size() < cfg.sampling.star_per_scene) {
      out.warnings.push_back("scene " + graph.scene_id + ": " + std::to_string(eligible.size()) +
                             " target(s) with three distinct anchors; " +
                             std::to_string(cfg.sampling.star_per_scene - eligible.size()) + " star reference(s) skipped");
    }
    for (std::size_t k = 0; k < eligible.size() && k < cfg.sampling.star_per_scene; ++k) {
      const InstanceId t = eligible[k];
      std::vector<const Edge*> edges;
      for (const auto& [a, e] : arms[t]) edges.push_back(e);
      srng.shuffle(std::span<const Edge*>(edges));
      std::array<RelationType, 3> rels{};
      for (std::size_t i = 0; i < 3; ++i) rels[i] = surface_relation(*edges[i], root);
      const auto ord = star_order(rels);
      std::array<StarArm, 3> star_arms;
      LanguageRecord r;
      r.scene_id = graph.scene_id;
      r.kind = RecordKind::kObjectReferral;
      r.form = RecordForm::kStar;
      r.target_id = t;
      for (std::size_t i = 0; i < 3; ++i) {
        star_arms[i] = {rels[i], label(edges[i]->target)};
        r.anchor_ids.push_back(edges[ord[i]]->target);
      }
      r.relation = rels[ord[0]];
      r.seed = derive_seed(root, {"star", std::to_string(t), join_ids(r.anchor_ids)});
      r.text = gen_star(label(t), star_arms, pool, r.seed);
      r = finalize(std::move(r));
      if (rephraser) {
        RephraseRequest req;
        req.kind = RephraseKind::kReferralEnriched;
        req.text = r.text;
        req.target_label = label(t);
        out.records.push_back(rephrased(r, req, *rephraser));
      }
      out.records.push_back(std::move(r));
    }
  }

  // Scene captions from sampled subgraphs.
  for (std::size_t k = 0; k < cfg.sampling.scene_captions_per_scene && !graph.nodes.empty(); ++k) {
    LanguageRecord r;
    r.scene_id = graph.scene_id;
    r.kind = RecordKind::kSceneCaption;
    r.seed = derive_seed(root, {"scene-caption", std::to_string(k)});
    const ScenePrompt prompt = build_scene_prompt(graph, cfg.sampling.scene_prompt, pool, r.seed);
    r.text = template_scene_caption(prompt.payload);
    r = finalize(std::move(r));
    if (rephraser) {
      RephraseRequest req;
      req.kind = RephraseKind::kSceneSummary;
      req.text = r.text;
      req.scene_graph = prompt.payload;
      out.records.push_back(rephrased(r, req, *rephraser));
    }
    out.records.push_back(std::move(r));
  }
  for (const auto& r : out.records) {
    for (const auto& f : r.flags) {
      if (f == "rephrase-failed") out.warnings.push_back("scene " + graph.scene_id + ": rephrase failed for record " + r.record_id);
    }
  }
  return out;
}

SceneLanguage caption_scene(const ScenePointCloud& scene, const std::vector<Camera>& cameras, const RunConfig& cfg,
                            const CaptionClients& clients) {
  SceneLanguage out;
  const std::uint64_t root = derive_seed(cfg.seed, {"caption", scene.scene_id});
  const CaptionContext ctx(scene, cameras, cfg.caption);
  for (const auto& [id, label] : scene.instances) {
    if (cfg.graph.floor_labels.contains(label) || ctx.object_points(id).empty()) continue;
    CaptionResult res;
    try {
      res = caption_object(ctx, id, clients);
    } catch (const DataError& e) {
      out.warnings.push_back(std::string(e.what()) + "; skipped");
      continue;
    }
    LanguageRecord r;
    r.scene_id = scene.scene_id;
    r.kind = RecordKind::kObjectCaption;
    r.target_id = id;
    r.text = res.text;
    r.source = RecordSource::kSummary;
    r.flags = res.flags;
    r.seed = derive_seed(root, {"object", std::to_string(id)});
    out.records.push_back(finalize(std::move(r)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands

CommandResult cmd_ingest(const RunConfig& cfg, const fs::path& input, const fs::path& out,
                         std::vector<IngestEntry>* entries_out) {
  cfg.validate();
  const auto files = list_scene_inputs(input);
  std::optional<LabelMap> label_map;
  if (!cfg.ingest.label_map_path.empty()) label_map = load_label_map(cfg.ingest.label_map_path);

  std::vector<IngestEntry> entries(files.size());
  std::vector<std::vector<std::string>> warnings(files.size());
  StemRegistry stems;
  parallel_for(files.size(), cfg.jobs, [&](std::size_t i) {
    IngestEntry& entry = entries[i];
    entry.input = files[i].filename().string();
    ScenePointCloud scene = load_scene(files[i]);
    entry.scene_id = scene.scene_id;
    entry.points_in = scene.points.size();
    stems.claim(file_stem(scene.scene_id), files[i].string());
    scene = subsample(scene, cfg.ingest.max_points, cfg.ingest.seed);
    NormalizedScene norm;
    try {
      norm = normalize(scene, cfg.ingest.floor_labels);
    } catch (const DataError& e) {
      entry.rule = "normalize";
      entry.detail = e.what();
      warnings[i].push_back(files[i].string() + ": rejected: " + e.what());
      return;
    }
    scene = std::move(norm.scene);
    if (label_map) {
      AlignedScene aligned = align_semantics(scene, *label_map);
      scene = std::move(aligned.scene);
      if (!aligned.report.unmapped.empty()) {
        std::string list;
        for (const auto& l : aligned.report.unmapped) list += (list.empty() ? "" : ", ") + l;
        entry.detail = "unmapped labels: " + list;
      }
    }
    const FilterDecision decision = filter_scene(scene, cfg.ingest);
    entry.points_out = scene.points.size();
    if (!decision.keep) {
      entry.rule = decision.rule;
      entry.measured = decision.measured;
      return;
    }
    entry.kept = true;
    const std::string stem = file_stem(scene.scene_id);
    io::write_file_atomic(out / "scenes" / (stem + ".json"), scene_to_json(scene));
    const fs::path cams = cameras_path_for(files[i]);
    if (fs::exists(cams)) {
      io::write_file_atomic(out / "scenes" / (stem + ".cameras.json"),
                            cameras_to_json(transform_cameras(load_cameras(cams), norm.transform)));
    }
  });

  ordered_json report = ordered_json::array();
  CommandResult result;
  collect(result, warnings);
  for (const auto& e : entries) {
    ordered_json j;
    j["input"] = e.input;
    j["scene_id"] = e.scene_id;
    j["status"] = e.kept ? "kept" : "rejected";
    j["rule"] = e.rule.empty() ? ordered_json(nullptr) : ordered_json(e.rule);
    j["measured"] = e.rule.empty() || e.rule == "normalize" ? ordered_json(nullptr) : ordered_json(e.measured);
    j["points_in"] = e.points_in;
    j["points_out"] = e.points_out;
    j["detail"] = e.detail;
    report.push_back(std::move(j));
    if (e.kept) ++result.outputs;
  }
  io::write_file_atomic(out / "ingest_report.json", report.dump(1) + "\n");
  if (entries_out) *entries_out = std::move(entries);
  return result;
}

CommandResult cmd_build_graph(const RunConfig& cfg, const fs::path& scenes, const fs::path& out) {
  cfg.validate();
  const auto files = list_scene_inputs(scenes);
  const RefinementMap refinement = cfg.refinement();
  StemRegistry stems;
  parallel_for(files.size(), cfg.jobs, [&](std::size_t i) {
    const ScenePointCloud scene = load_scene(files[i]);
    const std::string stem = file_stem(scene.scene_id);
    stems.claim(stem, files[i].string());
    SceneGraph graph;
    try {
      graph = build_scene_graph(scene, cfg.graph, refinement);
    } catch (const DataError& e) {
      throw DataError(files[i].string() + ": " + e.what());
    }
    io::write_file_atomic(out / "graphs" / (stem + ".json"), graph_to_json(graph));
  });
  return {files.size(), {}};
}

std::size_t merge_corpus(const fs::path& out) {
  std::vector<fs::path> shards;
  if (fs::is_directory(out / "shards")) shards = list_files(out / "shards", ".jsonl");
  return merge_shards(shards, out / "corpus.jsonl");
}

CommandResult cmd_gen_lang(const RunConfig& cfg, const fs::path& graphs, const fs::path& out) {
  cfg.validate();
  const auto files = list_files(graphs, ".json");
  const TemplatePool pool = cfg.template_pool();
  const auto rephraser = make_rephraser(cfg.clients);
  std::vector<std::vector<std::string>> warnings(files.size());
  StemRegistry stems;
  parallel_for(files.size(), cfg.jobs, [&](std::size_t i) {
    const SceneGraph graph = load_graph(files[i]);
    const std::string stem = file_stem(graph.scene_id);
    stems.claim(stem, files[i].string());
    SceneLanguage lang = generate_language(graph, cfg, pool, rephraser.get());
    warnings[i] = std::move(lang.warnings);
    write_records(std::move(lang.records), out / "shards" / (stem + ".lang.jsonl"));
  });
  CommandResult result;
  collect(result, warnings);
  result.outputs = merge_corpus(out);
  return result;
}

CommandResult cmd_caption_objects(const RunConfig& cfg, const fs::path& scenes, const fs::path& out,
                                  bool skip_missing_cameras) {
  cfg.validate();
  const auto files = list_scene_inputs(scenes);
  if (!skip_missing_cameras) {
    for (const auto& f : files) {
      if (!fs::exists(cameras_path_for(f))) {
        throw ConfigError(f.string() + ": no camera file " + cameras_path_for(f).string());
      }
    }
  }
  const CaptionClientSet clients = make_caption_clients(cfg.clients);
  std::vector<std::vector<std::string>> warnings(files.size());
  StemRegistry stems;
  parallel_for(files.size(), cfg.jobs, [&](std::size_t i) {
    const fs::path cams = cameras_path_for(files[i]);
    if (!fs::exists(cams)) {
      warnings[i].push_back(files[i].string() + ": no camera file; object captions skipped");
      return;
    }
    const ScenePointCloud scene = load_scene(files[i]);
    const std::string stem = file_stem(scene.scene_id);
    stems.claim(stem, files[i].string());
    SceneLanguage lang = caption_scene(scene, load_cameras(cams), cfg, clients.view());
    warnings[i] = std::move(lang.warnings);
    write_records(std::move(lang.records), out / "shards" / (stem + ".captions.jsonl"));
  });
  CommandResult result;
  collect(result, warnings);
  result.outputs = merge_corpus(out);
  return result;
}

CorpusStats cmd_stats(const fs::path& corpus, const fs::path& out) {
  const CorpusStats stats = compute_stats(read_records(corpus));
  io::write_file_atomic(out / "stats.json", stats_to_json(stats));
  io::write_file_atomic(out / "stats.txt", stats_to_table(stats));
  return stats;
}

CommandResult cmd_run_all(const RunConfig& cfg, const fs::path& input, const fs::path& out) {
  cfg.validate();
  for (const char* sub : {"scenes", "graphs", "shards"}) fs::remove_all(out / sub);
  CommandResult result;
  std::vector<IngestEntry> entries;
  const auto append = [&](const CommandResult& r) {
    result.warnings.insert(result.warnings.end(), r.warnings.begin(), r.warnings.end());
  };
  append(cmd_ingest(cfg, input, out, &entries));
  fs::create_directories(out / "scenes");
  append(cmd_build_graph(cfg, out / "scenes", out));
  fs::create_directories(out / "graphs");
  append(cmd_gen_lang(cfg, out / "graphs", out));
  append(cmd_caption_objects(cfg, out / "scenes", out, true));
  result.outputs = merge_corpus(out);
  cmd_stats(out / "corpus.jsonl", out);

  ordered_json manifest;
  manifest["config_digest"] = run_config_digest(cfg);
  manifest["seed"] = to_hex(cfg.seed);
  ordered_json inputs = ordered_json::array();
  for (const auto& f : list_scene_inputs(input)) {
    inputs.push_back(ordered_json{{"file", f.filename().string()}, {"sha256", sha256_hex(io::read_file(f))}});
  }
  manifest["inputs"] = std::move(inputs);
  ordered_json scenes = ordered_json::array();
  ordered_json rejected = ordered_json::array();
  for (const auto& e : entries) {
    if (!e.kept) {
      rejected.push_back(ordered_json{{"input", e.input}, {"scene_id", e.scene_id}, {"rule", e.rule}, {"detail", e.detail}});
      continue;
    }
    const std::string stem = file_stem(e.scene_id);
    ordered_json s;
    s["scene_id"] = e.scene_id;
    s["scene"] = "scenes/" + stem + ".json";
    s["graph"] = "graphs/" + stem + ".json";
    ordered_json shards = ordered_json::array();
    for (const char* kind : {".captions.jsonl", ".lang.jsonl"}) {
      const std::string rel = "shards/" + stem + kind;
      if (fs::exists(out / rel)) shards.push_back(rel);
    }
    s["shards"] = std::move(shards);
    scenes.push_back(std::move(s));
  }
  manifest["scenes"] = std::move(scenes);
  manifest["rejected"] = std::move(rejected);
  manifest["outputs"] = ordered_json{{"corpus", "corpus.jsonl"},
                                     {"records", result.outputs},
                                     {"stats_json", "stats.json"},
                                     {"stats_table", "stats.txt"},
                                     {"ingest_report", "ingest_report.json"}};
  manifest["warnings"] = result.warnings;
  io::write_file_atomic(out / "manifest.json", manifest.dump(1) + "\n");
  return result;
}

CommandResult cmd_synth(std::uint64_t seed, std::size_t count, const fs::path& out, const SyntheticOptions& opts,
                        std::size_t jobs) {
  opts.validate();
  parallel_for(count, jobs, [&](std::size_t i) {
    const SyntheticScene s = generate_scene(seed, i, opts);
    const std::string stem = file_stem(s.scene.scene_id);
    io::write_file_atomic(out / (stem + ".json"), scene_to_json(s.scene));
    io::write_file_atomic(out / (stem + ".cameras.json"), cameras_to_json(s.cameras));
  });
  return {count, {}};
}

}  // namespace sgf
