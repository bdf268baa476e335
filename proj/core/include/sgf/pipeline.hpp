#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sgf/config.hpp"
#include "sgf/corpus.hpp"
#include "sgf/synthetic.hpp"

namespace sgf {

/// Runs fn(0..n-1) on up to `jobs` threads. Every index runs even if some
/// fail; afterwards the exception of the lowest failing index is rethrown.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

/// Scene ids become file stems; characters outside [A-Za-z0-9._-] map to '_'.
std::string file_stem(const std::string& scene_id);

/// Scene files (.json / .ply) in a directory, sorted, skipping camera and
/// label sidecars. A regular file is returned as is.
std::vector<std::filesystem::path> list_scene_inputs(const std::filesystem::path& input);

std::unique_ptr<TextClient> make_rephraser(const ClientConfig& cfg);

struct CaptionClientSet {
  std::unique_ptr<TextClient> captioner;
  std::unique_ptr<TextClient> scorer;
  std::unique_ptr<TextClient> summarizer;
  CaptionClients view() const { return {*captioner, *scorer, *summarizer}; }
};
CaptionClientSet make_caption_clients(const ClientConfig& cfg);

struct SceneLanguage {
  std::vector<LanguageRecord> records;
  std::vector<std::string> warnings;
};

/// Referral, star and scene-caption records for one graph. Referrals are
/// drawn round-robin across surface relations so rare relations are
/// represented; every stochastic choice derives from (cfg.seed, scene id).
SceneLanguage generate_language(const SceneGraph& graph, const RunConfig& cfg, const TemplatePool& pool,
                                const TextClient* rephraser);

/// Object-caption records for every visible non-floor instance.
SceneLanguage caption_scene(const ScenePointCloud& scene, const std::vector<Camera>& cameras, const RunConfig& cfg,
                            const CaptionClients& clients);

struct IngestEntry {
  std::string input;
  std::string scene_id;
  bool kept = false;
  std::string rule;  // filter rule or "normalize" on rejection
  double measured = 0.0;
  std::string detail;
  std::size_t points_in = 0;
  std::size_t points_out = 0;
};

struct CommandResult {
  std::size_t outputs = 0;
  std::vector<std::string> warnings;
};

/// Each command writes under `out` and returns what it produced. Data and
/// config errors propagate as DataError / ConfigError naming the file.
CommandResult cmd_ingest(const RunConfig& cfg, const std::filesystem::path& input, const std::filesystem::path& out,
                         std::vector<IngestEntry>* entries = nullptr);
CommandResult cmd_build_graph(const RunConfig& cfg, const std::filesystem::path& scenes,
                              const std::filesystem::path& out);
CommandResult cmd_gen_lang(const RunConfig& cfg, const std::filesystem::path& graphs, const std::filesystem::path& out);
/// Requires <stem>.cameras.json next to every scene unless `skip_missing_cameras`.
CommandResult cmd_caption_objects(const RunConfig& cfg, const std::filesystem::path& scenes,
                                  const std::filesystem::path& out, bool skip_missing_cameras = false);
/// Writes stats.json and stats.txt under `out`.
CorpusStats cmd_stats(const std::filesystem::path& corpus, const std::filesystem::path& out);
/// ingest, build-graph, gen-lang, caption-objects, merge, stats and manifest.
CommandResult cmd_run_all(const RunConfig& cfg, const std::filesystem::path& input, const std::filesystem::path& out);
/// Writes `count` synthetic scenes (<id>.json + <id>.cameras.json).
CommandResult cmd_synth(std::uint64_t seed, std::size_t count, const std::filesystem::path& out,
                        const SyntheticOptions& opts = {}, std::size_t jobs = 1);

/// Merges every *.jsonl under out/shards into out/corpus.jsonl.
std::size_t merge_corpus(const std::filesystem::path& out);

}  // namespace sgf
