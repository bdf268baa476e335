#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include <json.hpp>

#include "sgf/caption_pipeline.hpp"
#include "sgf/graph_builder.hpp"
#include "sgf/ingest.hpp"
#include "sgf/langgen.hpp"

namespace sgf {

enum class RephraseMode { kNone, kStub, kHttp };
enum class CaptionerMode { kStub, kHttp };

struct ClientConfig {
  RephraseMode rephrase = RephraseMode::kNone;
  std::string rephrase_url;
  StubRephraser::Mode stub_mode = StubRephraser::Mode::kPrefix;
  CaptionerMode captioner = CaptionerMode::kStub;
  std::string captioner_url;
  std::string scorer_url;
  std::string summarizer_url;
  int timeout_ms = 30000;
};

struct SamplingConfig {
  std::size_t referrals_per_scene = 12;
  std::size_t star_per_scene = 2;
  std::size_t scene_captions_per_scene = 1;
  ScenePromptConfig scene_prompt;
};

struct RunConfig {
  std::uint64_t seed = 0;
  IngestConfig ingest;
  GraphConfig graph;
  std::filesystem::path templates_path;   // empty: bundled pool
  std::filesystem::path refinement_path;  // empty: bundled table
  ClientConfig clients;
  SamplingConfig sampling;
  CaptionOptions caption;
  std::filesystem::path out_dir = "out";
  std::size_t jobs = 1;

  /// Copies the root seed into the ingest and graph stages.
  void propagate_seed();
  /// Throws ConfigError on bad values or missing referenced files.
  void validate() const;

  TemplatePool template_pool() const;
  RefinementMap refinement() const;
};

nlohmann::json to_json(const IngestConfig& cfg);
nlohmann::json to_json(const GraphConfig& cfg);
/// Every field except out_dir and jobs, which do not affect outputs.
nlohmann::json to_json(const RunConfig& cfg);

/// Unknown keys are rejected. Relative paths resolve against `base_dir`.
RunConfig run_config_from_json(std::string_view text, const std::string& origin = "<memory>",
                               const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Applies SGF_SEED, SGF_JOBS, SGF_OUT, SGF_REPHRASE, SGF_REPHRASE_URL,
/// SGF_CAPTIONER, SGF_CAPTIONER_URL, SGF_SCORER_URL, SGF_SUMMARIZER_URL and
/// SGF_LABEL_MAP. `getenv` defaults to std::getenv.
void apply_env_overrides(RunConfig& cfg,
                         const std::function<std::optional<std::string>(const char*)>& getenv = {});

RephraseMode rephrase_mode_from_string(const std::string& s);
CaptionerMode captioner_mode_from_string(const std::string& s);

/// SHA-256 of the canonical JSON form plus the contents of referenced files.
std::string run_config_digest(const RunConfig& cfg);

}  // namespace sgf
