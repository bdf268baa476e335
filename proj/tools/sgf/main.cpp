// sgf: scene graph and language corpus pipeline.
//
// Settings resolve as config file < SGF_* environment < command-line flags.
// Exit codes: 0 success, 1 config error, 2 data error, 3 client error.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sgf/config.hpp"
#include "sgf/error.hpp"
#include "sgf/log.hpp"
#include "sgf/pipeline.hpp"

namespace {

struct Options {
  std::string config;
  std::string input;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::string rephrase;
  std::string captioner;
  std::size_t count = 100;
  bool quiet = false;
  bool verbose = false;
};

void add_common(CLI::App* cmd, Options& o, bool needs_input) {
  cmd->add_option("--config", o.config, "Run config (JSON)")->check(CLI::ExistingFile);
  auto* in = cmd->add_option("--input", o.input, "Input file or directory");
  if (needs_input) in->required();
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--seed", o.seed, "Root seed");
  cmd->add_option("--jobs", o.jobs, "Scene-level worker count")->check(CLI::PositiveNumber);
  cmd->add_option("--rephrase", o.rephrase, "Rephrase client")->check(CLI::IsMember({"none", "stub", "http"}));
  cmd->add_option("--captioner", o.captioner, "Caption clients")->check(CLI::IsMember({"stub", "http"}));
  cmd->add_flag("-q,--quiet", o.quiet, "Suppress warnings");
  cmd->add_flag("-v,--verbose", o.verbose, "Progress messages");
}

sgf::RunConfig resolve(const Options& o) {
  sgf::RunConfig cfg = o.config.empty() ? sgf::RunConfig{} : sgf::load_run_config(o.config);
  sgf::apply_env_overrides(cfg);
  if (o.seed) cfg.seed = *o.seed;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (!o.rephrase.empty()) cfg.clients.rephrase = sgf::rephrase_mode_from_string(o.rephrase);
  if (!o.captioner.empty()) cfg.clients.captioner = sgf::captioner_mode_from_string(o.captioner);
  cfg.propagate_seed();
  cfg.validate();
  return cfg;
}

void report(const sgf::CommandResult& r, const char* what) {
  for (const auto& w : r.warnings) sgf::log::warn(w);
  std::cout << r.outputs << ' ' << what << '\n';
}

int exit_code(sgf::ErrorKind kind) {
  switch (kind) {
    case sgf::ErrorKind::kConfig: return 1;
    case sgf::ErrorKind::kData: return 2;
    case sgf::ErrorKind::kClient: return 3;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scene graph construction and language corpus generation"};
  app.require_subcommand(1);
  Options o;

  auto* ingest = app.add_subcommand("ingest", "Subsample, normalize, align and filter scenes");
  auto* graph = app.add_subcommand("build-graph", "Build one scene graph per ingested scene");
  auto* lang = app.add_subcommand("gen-lang", "Generate referral and scene-caption records from graphs");
  auto* caption = app.add_subcommand("caption-objects", "Caption objects through the view-selection pipeline");
  auto* stats = app.add_subcommand("stats", "Corpus statistics as JSON and table");
  auto* run_all = app.add_subcommand("run-all", "Every stage from raw scenes to corpus statistics");
  auto* synth = app.add_subcommand("synth", "Write seeded synthetic scenes with cameras");
  for (auto* cmd : {ingest, graph, lang, caption, stats, run_all}) add_common(cmd, o, true);
  add_common(synth, o, false);  // writes to --out
  synth->add_option("--count", o.count, "Number of scenes")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  sgf::log::set_level(o.quiet ? sgf::log::Level::kQuiet : o.verbose ? sgf::log::Level::kInfo : sgf::log::Level::kWarn);

  try {
    const sgf::RunConfig cfg = resolve(o);
    const std::filesystem::path out = cfg.out_dir;
    if (ingest->parsed()) {
      report(sgf::cmd_ingest(cfg, o.input, out), "scene(s) kept");
    } else if (graph->parsed()) {
      report(sgf::cmd_build_graph(cfg, o.input, out), "graph(s) written");
    } else if (lang->parsed()) {
      report(sgf::cmd_gen_lang(cfg, o.input, out), "corpus record(s)");
    } else if (caption->parsed()) {
      report(sgf::cmd_caption_objects(cfg, o.input, out), "corpus record(s)");
    } else if (stats->parsed()) {
      std::cout << sgf::stats_to_table(sgf::cmd_stats(o.input, out));
    } else if (run_all->parsed()) {
      report(sgf::cmd_run_all(cfg, o.input, out), "corpus record(s)");
    } else if (synth->parsed()) {
      report(sgf::cmd_synth(cfg.seed, o.count, out,
                            sgf::SyntheticOptions{}, cfg.jobs),
             "synthetic scene(s)");
    }
  } catch (const sgf::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
