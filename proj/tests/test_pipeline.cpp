#include <doctest.h>

#include <atomic>

#include <json.hpp>

#include "fixtures.hpp"
#include "sgf/error.hpp"
#include "sgf/graph_io.hpp"
#include "sgf/io.hpp"
#include "sgf/pipeline.hpp"

using namespace sgf;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

void write_scene(const fs::path& dir, const std::string& id, const std::vector<SyntheticBox>& boxes) {
  io::write_file_atomic(dir / (id + ".json"), scene_to_json(scene_from_boxes(id, boxes, 1)));
}

std::vector<SyntheticBox> room(std::size_t objects) {
  std::vector<SyntheticBox> b{fixtures::box("floor", {0, 0, 0}, {4, 4, 0.05})};
  for (std::size_t i = 0; i < objects; ++i) {
    const double x = 0.2 + 0.9 * i;
    b.push_back(fixtures::box(i % 2 ? "chair" : "table", {x, 1, 0.05}, {x + 0.5, 1.5, 0.8}));
  }
  return b;
}

RunConfig quiet_config() {
  RunConfig c;
  c.seed = 11;
  c.propagate_seed();
  return c;
}

std::string slurp(const fs::path& p) { return io::read_file(p); }

/// Every regular file under `root`, relative path to bytes.
std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return out;
}

}  // namespace

TEST_SUITE("pipeline.helpers") {
  TEST_CASE("parallel_for runs every index and rethrows the lowest failure") {
    std::atomic<int> ran{0};
    CHECK_THROWS_WITH(parallel_for(20, 4,
                                   [&](std::size_t i) {
                                     ++ran;
                                     if (i == 7 || i == 13) throw DataError("fail " + std::to_string(i));
                                   }),
                      "fail 7");
    CHECK(ran == 20);
    parallel_for(0, 4, [](std::size_t) { FAIL("no work expected"); });
  }

  TEST_CASE("file stems are filesystem safe") {
    CHECK(file_stem("scene0001_00") == "scene0001_00");
    CHECK(file_stem("a/b c:d") == "a_b_c_d");
  }

  TEST_CASE("scene inputs skip sidecars") {
    fixtures::TempDir dir("inputs");
    for (const char* f : {"b.json", "a.ply", "a.instances.json", "b.cameras.json", "notes.txt"}) io::write_file_atomic(dir / f, "x");
    const auto files = list_scene_inputs(dir.path());
    REQUIRE(files.size() == 2);
    CHECK(files[0].filename() == "a.ply");
    CHECK(files[1].filename() == "b.json");
  }
}

TEST_SUITE("pipeline.ingest") {
  TEST_CASE("three scenes, one too sparse") {
    fixtures::TempDir in("ingest_in");
    fixtures::TempDir out("ingest_out");
    write_scene(in.path(), "big1", room(4));
    write_scene(in.path(), "big2", room(4));
    write_scene(in.path(), "small", room(2));
    std::vector<IngestEntry> entries;
    const auto r = cmd_ingest(quiet_config(), in.path(), out.path(), &entries);
    CHECK(r.outputs == 2);
    CHECK(fs::exists(out / "scenes/big1.json"));
    CHECK_FALSE(fs::exists(out / "scenes/small.json"));
    const json report = json::parse(slurp(out / "ingest_report.json"));
    REQUIRE(report.size() == 3);
    CHECK(report[2]["scene_id"] == "small");
    CHECK(report[2]["status"] == "rejected");
    CHECK(report[2]["rule"] == "min_objects");
    CHECK(report[2]["measured"] == 2.0);

    const std::string first = slurp(out / "scenes/big1.json");
    cmd_ingest(quiet_config(), in.path(), out.path());
    CHECK(slurp(out / "scenes/big1.json") == first);
  }

  TEST_CASE("a missing label map is a configuration error") {
    fixtures::TempDir in("ingest_in");
    fixtures::TempDir out("ingest_out");
    RunConfig c = quiet_config();
    c.ingest.label_map_path = in / "nope.json";
    CHECK_THROWS_AS(cmd_ingest(c, in.path(), out.path()), ConfigError);
  }

  TEST_CASE("a scene without a floor is rejected, not fatal") {
    fixtures::TempDir in("ingest_in");
    fixtures::TempDir out("ingest_out");
    write_scene(in.path(), "nofloor", {fixtures::box("table", {0, 0, 0}, {1, 1, 1})});
    write_scene(in.path(), "ok", room(4));
    const auto r = cmd_ingest(quiet_config(), in.path(), out.path());
    CHECK(r.outputs == 1);
    const json report = json::parse(slurp(out / "ingest_report.json"));
    CHECK(report[0]["rule"] == "normalize");
  }

  TEST_CASE("corrupt input names the file") {
    fixtures::TempDir in("ingest_in");
    fixtures::TempDir out("ingest_out");
    io::write_file_atomic(in / "broken.json", "{\"scene_id\": ");
    CHECK_THROWS_WITH_AS(cmd_ingest(quiet_config(), in.path(), out.path()), doctest::Contains("broken.json"), DataError);
  }
}

TEST_SUITE("pipeline.graph_and_language") {
  TEST_CASE("build-graph on the reference scene") {
    fixtures::TempDir in("graph_in");
    fixtures::TempDir out("graph_out");
    write_scene(in.path(), "ref", fixtures::floor_table_cup_chair());
    CHECK(cmd_build_graph(quiet_config(), in.path(), out.path()).outputs == 1);
    const SceneGraph g = graph_from_json(slurp(out / "graphs/ref.json"));
    CHECK(g.edges.size() == 5);
    CHECK(fixtures::has_edge(g, 3, RelationType::kNearRightOf, 1));
    CHECK_FALSE(g.config_digest.empty());
  }

  TEST_CASE("build-graph on an empty directory writes nothing") {
    fixtures::TempDir in("graph_in");
    fixtures::TempDir out("graph_out");
    CHECK(cmd_build_graph(quiet_config(), in.path(), out.path()).outputs == 0);
  }

  TEST_CASE("five template referrals without rephrasing") {
    fixtures::TempDir out("lang");
    const SceneGraph g = build_scene_graph(generate_scene(4, 0).scene, {});
    io::write_file_atomic(out / "graphs/s.json", graph_to_json(g));
    RunConfig c = quiet_config();
    c.sampling.referrals_per_scene = 5;
    c.sampling.star_per_scene = 0;
    c.sampling.scene_captions_per_scene = 0;
    CHECK(cmd_gen_lang(c, out / "graphs", out.path()).outputs == 5);
    const auto recs = read_records(out / "corpus.jsonl");
    REQUIRE(recs.size() == 5);
    for (const auto& r : recs) {
      CHECK(r.source == RecordSource::kTemplate);
      CHECK(r.kind == RecordKind::kObjectReferral);
    }
  }

  TEST_CASE("identity rephrasing keeps the text and marks the source") {
    const SceneGraph g = build_scene_graph(generate_scene(4, 0).scene, {});
    RunConfig c = quiet_config();
    c.sampling.referrals_per_scene = 5;
    c.sampling.star_per_scene = 0;
    c.sampling.scene_captions_per_scene = 0;
    const StubRephraser identity(StubRephraser::Mode::kIdentity);
    const SceneLanguage lang = generate_language(g, c, TemplatePool::builtin(), &identity);
    std::map<std::uint64_t, std::string> template_text;
    for (const auto& r : lang.records) {
      if (r.source == RecordSource::kTemplate) template_text[r.seed] = r.text;
    }
    std::size_t rephrased = 0;
    for (const auto& r : lang.records) {
      if (r.source != RecordSource::kRephrased) continue;
      ++rephrased;
      CHECK(r.text == template_text.at(r.seed));
      CHECK(r.flags.empty());
    }
    CHECK(rephrased == 5);
  }

  TEST_CASE("stars need three distinct anchors") {
    SceneGraph g = build_scene_graph(scene_from_boxes("two", room(2), 1), {});
    RunConfig c = quiet_config();
    c.sampling.star_per_scene = 1;
    const SceneLanguage lang = generate_language(g, c, TemplatePool::builtin(), nullptr);
    for (const auto& r : lang.records) CHECK(r.form != RecordForm::kStar);
    REQUIRE(lang.warnings.size() == 1);
    CHECK(lang.warnings[0].find("star reference(s) skipped") != std::string::npos);
  }

  TEST_CASE("walls and floors never become referral targets") {
    RunConfig c = quiet_config();
    c.sampling.referrals_per_scene = 100;
    for (std::size_t i = 0; i < 5; ++i) {
      const SceneGraph g = build_scene_graph(generate_scene(8, i).scene, {});
      for (const auto& r : generate_language(g, c, TemplatePool::builtin(), nullptr).records) {
        if (!r.target_id) continue;
        const std::string& label = g.at(*r.target_id).label;
        CHECK(label != "wall");
        CHECK(label != "floor");
      }
    }
  }

  TEST_CASE("language records do not depend on edge order") {
    SceneGraph g = build_scene_graph(generate_scene(4, 1).scene, {});
    const RunConfig c = quiet_config();
    const auto a = generate_language(g, c, TemplatePool::builtin(), nullptr);
    std::reverse(g.multi.begin(), g.multi.end());
    const auto b = generate_language(g, c, TemplatePool::builtin(), nullptr);
    REQUIRE(a.records.size() == b.records.size());
    std::set<std::string> ia, ib;
    for (const auto& r : a.records) ia.insert(r.record_id + r.text);
    for (const auto& r : b.records) ib.insert(r.record_id + r.text);
    CHECK(ia == ib);
  }
}

TEST_SUITE("pipeline.captions") {
  void write_caption_scene(const fs::path& dir, bool with_cameras) {
    const std::vector<SyntheticBox> boxes{
        fixtures::box("floor", {0, 0, 0}, {4, 4, 0.05}), fixtures::box("cube", {1, 1, 0.05}, {1.5, 1.5, 0.55}),
        fixtures::box("crate", {2.5, 1, 0.05}, {3, 1.5, 0.55}), fixtures::box("ghost", {1.75, -4, 0.05}, {2.25, -3.5, 0.55})};
    io::write_file_atomic(dir / "cap.json", scene_to_json(scene_from_boxes("cap", boxes, 1)));
    if (!with_cameras) return;
    Camera cam;
    cam.fx = cam.fy = 100;
    cam.cx = 80;
    cam.cy = 60;
    cam.width = 160;
    cam.height = 120;
    cam.extrinsics = look_at({2, -2, 1.5}, {2, 1.25, 0.3});
    cam.image_ref = "cap_0.png";
    io::write_file_atomic(dir / "cap.cameras.json", cameras_to_json({cam}));
  }

  TEST_CASE("two visible objects give two records and the hidden one a warning") {
    fixtures::TempDir in("cap_in");
    fixtures::TempDir out("cap_out");
    write_caption_scene(in.path(), true);
    const auto r = cmd_caption_objects(quiet_config(), in.path(), out.path());
    CHECK(r.outputs == 2);
    const auto recs = read_records(out / "corpus.jsonl");
    REQUIRE(recs.size() == 2);
    for (const auto& rec : recs) CHECK(rec.kind == RecordKind::kObjectCaption);
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].find("never visible") != std::string::npos);
  }

  TEST_CASE("a scene without cameras is a configuration error") {
    fixtures::TempDir in("cap_in");
    fixtures::TempDir out("cap_out");
    write_caption_scene(in.path(), false);
    CHECK_THROWS_AS(cmd_caption_objects(quiet_config(), in.path(), out.path()), ConfigError);
    CHECK(cmd_caption_objects(quiet_config(), in.path(), out.path(), true).warnings.size() == 1);
  }
}

TEST_SUITE("pipeline.end_to_end") {
  TEST_CASE("stats of an empty corpus are all zero") {
    fixtures::TempDir dir("stats");
    write_records({}, dir / "corpus.jsonl");
    const CorpusStats s = cmd_stats(dir / "corpus.jsonl", dir.path());
    CHECK(s.total == 0);
    CHECK(json::parse(slurp(dir / "stats.json"))["total"] == 0);
    CHECK_THROWS_AS(cmd_stats(dir / "missing.jsonl", dir.path()), DataError);
  }

  TEST_CASE("run-all is deterministic and independent of the job count") {
    fixtures::TempDir in("e2e_in");
    fixtures::TempDir out1("e2e_a");
    fixtures::TempDir out4("e2e_b");
    cmd_synth(21, 6, in.path());
    RunConfig c = quiet_config();
    c.clients.rephrase = RephraseMode::kStub;
    cmd_run_all(c, in.path(), out1.path());
    const auto first = tree(out1.path());
    cmd_run_all(c, in.path(), out1.path());
    CHECK(tree(out1.path()) == first);
    c.jobs = 4;
    cmd_run_all(c, in.path(), out4.path());
    CHECK(tree(out4.path()) == first);
  }

  TEST_CASE("every corpus record references a graph listed in the manifest") {
    fixtures::TempDir in("e2e_in");
    fixtures::TempDir out("e2e_out");
    cmd_synth(5, 4, in.path());
    write_scene(in.path(), "tiny", room(1));
    const auto r = cmd_run_all(quiet_config(), in.path(), out.path());
    const json manifest = json::parse(slurp(out / "manifest.json"));
    CHECK(manifest["inputs"].size() == 5);
    CHECK(manifest["rejected"].size() == 1);
    CHECK(manifest["outputs"]["records"] == r.outputs);
    std::set<std::string> scenes;
    for (const auto& s : manifest["scenes"]) {
      CHECK(fs::exists(out / s["graph"].get<std::string>()));
      CHECK(fs::exists(out / s["scene"].get<std::string>()));
      scenes.insert(s["scene_id"]);
    }
    const auto recs = read_records(out / "corpus.jsonl");
    CHECK(recs.size() == r.outputs);
    for (const auto& rec : recs) CHECK(scenes.count(rec.scene_id) == 1);
    const json stats = json::parse(slurp(out / "stats.json"));
    CHECK(stats["total"] == recs.size());
  }
}
