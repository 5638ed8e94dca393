#include <doctest.h>

#include <json.hpp>

#include "salgraph/error.hpp"
#include "salgraph/pipeline.hpp"
#include "salgraph/synthetic.hpp"
#include "support.hpp"

using namespace salgraph;
namespace fs = std::filesystem;

namespace {

PipelineConfig small_config(const test::TempDir& tmp) {
  write_clip(moving_square_clip({16, 16, 8}, 4), tmp / "frames", tmp / "gt");
  PipelineConfig cfg;
  cfg.input_dir = tmp / "frames";
  cfg.gt_dir = tmp / "gt";
  cfg.output_dir = tmp / "out";
  cfg.segmentation.min_size = 20;
  cfg.levels = 6;
  return cfg;
}

bool has_partial(const fs::path& dir) {
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.path().extension() == kPartialSuffix) return true;
  return false;
}

}  // namespace

TEST_CASE("config text parsing") {
  const auto pairs = parse_config_text(
      "# comment\n[graph]\nrho = 0.2   # trailing\n\nmu=0.05\ninput_dir = \"frames dir\"\n");
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[0] == std::pair<std::string, std::string>{"rho", "0.2"});
  CHECK(pairs[1] == std::pair<std::string, std::string>{"mu", "0.05"});
  CHECK(pairs[2].second == "frames dir");
  CHECK_THROWS_AS(parse_config_text("no equals sign\n"), ConfigError);
}

TEST_CASE("apply_config") {
  SUBCASE("defaults") {
    const PipelineConfig cfg;
    CHECK(cfg.rho_lab == 0.1);
    CHECK(cfg.propagation.mu == 0.1);
    CHECK(cfg.fusion.beta == 0.7);
    CHECK(cfg.levels == 10);
    CHECK(cfg.selected_layer() == 5);
  }

  SUBCASE("later pairs win, so flags appended after the file take precedence") {
    const auto cfg = apply_config({}, {{"mu", "0.3"}, {"beta", "0.5"}, {"mu", "0.4"}});
    CHECK(cfg.propagation.mu == 0.4);
    CHECK(cfg.fusion.beta == 0.5);
  }

  SUBCASE("rho sets both spaces") {
    const auto cfg = apply_config({}, {{"rho", "0.25"}, {"rho_fcn", "0.5"}});
    CHECK(cfg.rho_lab == 0.25);
    CHECK(cfg.rho_fcn == 0.5);
  }

  SUBCASE("typed values") {
    const auto cfg = apply_config({}, {{"solver", "iterative"},
                                       {"connectivity", "26"},
                                       {"write_overlay", "false"},
                                       {"layer", "3"},
                                       {"feature_tensor", "x.fvol"}});
    CHECK(cfg.propagation.solver == SolverKind::kIterative);
    CHECK(cfg.connectivity == Connectivity::k26);
    CHECK_FALSE(cfg.write_overlay);
    CHECK(cfg.selected_layer() == 3);
    CHECK(cfg.feature_tensor_path == fs::path("x.fvol"));
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS(apply_config({}, {{"nonsense", "1"}}), ConfigError);
    CHECK_THROWS_AS(apply_config({}, {{"mu", "abc"}}), ConfigError);
    CHECK_THROWS_AS(apply_config({}, {{"mu", "0.1x"}}), ConfigError);
    CHECK_THROWS_AS(apply_config({}, {{"levels", "-2"}}), ConfigError);
    CHECK_THROWS_AS(apply_config({}, {{"connectivity", "8"}}), ConfigError);
    CHECK_THROWS_AS(apply_config({}, {{"solver", "magic"}}), ConfigError);
  }

  SUBCASE("snapshot round trips") {
    auto cfg = apply_config({}, {{"rho_lab", "0.3"}, {"mu", "0.123456789"}, {"gt_dir", "g"}});
    const auto again = apply_config({}, config_snapshot(cfg));
    CHECK(config_snapshot(again) == config_snapshot(cfg));
    CHECK(again.propagation.mu == 0.123456789);
  }
}

TEST_CASE("validate rejects out-of-range parameters") {
  auto bad = [](const char* k, const char* v) {
    PipelineConfig cfg = apply_config({}, {{k, v}});
    CHECK_THROWS_AS(validate(cfg), ConfigError);
  };
  bad("rho", "0");
  bad("rho_fcn", "-1");
  bad("mu", "0");
  bad("beta", "1.5");
  bad("k", "0");
  bad("levels", "0");
  bad("iter_tol", "0");
  PipelineConfig cfg;
  cfg.layer_index = 11;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  CHECK_NOTHROW(validate(PipelineConfig{}));
}

TEST_CASE("bad rho fails before any work") {
  test::TempDir tmp;
  PipelineConfig cfg;
  cfg.input_dir = tmp / "missing";
  cfg.output_dir = tmp / "out";
  cfg.rho_lab = 0.0;
  CHECK_THROWS_AS(run_pipeline(cfg), ConfigError);
  CHECK_FALSE(fs::exists(tmp / "out"));
}

TEST_CASE("run_pipeline on a synthetic clip") {
  test::TempDir tmp;
  const auto cfg = small_config(tmp);
  const auto m = run_pipeline(cfg);

  CHECK(m.mode == "lab-only");
  CHECK(std::find(m.notes.begin(), m.notes.end(), "lab-only mode") != m.notes.end());
  CHECK(m.unit_counts.size() == 6);
  for (const char* stage : {"segment", "features", "graph", "propagate", "fuse", "evaluate"})
    CHECK(std::any_of(m.timings.begin(), m.timings.end(),
                      [&](const StageTiming& t) { return t.stage == stage; }));
  REQUIRE(m.metrics);
  CHECK(m.metrics->auc > 0.9);

  const fs::path out = cfg.output_dir;
  for (std::size_t i = 1; i <= 6; ++i) CHECK(fs::exists(layer_path(out, i)));
  CHECK(read_lvol(selected_layer_path(out)) == read_lvol(layer_path(out, 3)));
  CHECK(fs::exists(out / "features" / "lab.fvol"));
  CHECK(fs::exists(out / "saliency" / "map.fvol"));
  CHECK(fs::exists(out / "saliency" / "frame_00008.png"));
  CHECK(fs::exists(out / "overlay" / "frame_00001.png"));
  CHECK(fs::exists(out / "metrics.csv"));
  CHECK(fs::exists(out / "roc.csv"));
  CHECK(fs::exists(out / "roc.dat"));
  CHECK_FALSE(has_partial(out));

  const auto j = nlohmann::json::parse(test::slurp(out / "manifest.json"));
  CHECK(j["version"] == kVersion);
  CHECK(j["mode"] == "lab-only");
  CHECK(j["unit_counts"].size() == 6);
  CHECK(j["config"]["mu"] == "0.1");
  CHECK(j["metrics"]["auc"].get<double>() == doctest::Approx(m.metrics->auc));

  const auto csv = read_metrics_csv(out / "metrics.csv");
  REQUIRE(csv.size() == 1);
  CHECK(csv[0].sequence == "frames");
}

TEST_CASE("fused mode with a synthetic deep tensor") {
  test::TempDir tmp;
  auto cfg = small_config(tmp);
  const auto clip = moving_square_clip({16, 16, 8}, 4);

  // Two channels: the ground truth and a constant.
  FeatureTensor deep(clip.gt.dims, 2);
  for (std::size_t v = 0; v < clip.gt.mask.size(); ++v) {
    deep.values()[2 * v] = clip.gt.mask[v] ? 1.0f : 0.0f;
    deep.values()[2 * v + 1] = 0.5f;
  }
  write_fvol(tmp / "deep.fvol", deep);
  cfg.feature_tensor_path = tmp / "deep.fvol";

  const auto m = run_pipeline(cfg);
  CHECK(m.mode == "fused");
  REQUIRE(m.metrics);
  CHECK(m.metrics->auc > 0.9);

  SUBCASE("beta = 1 gives the deep map") {
    cfg.fusion.beta = 1.0;
    const auto lab = rgb_to_lab(clip.rgb);
    const auto labels = read_lvol(selected_layer_path(cfg.output_dir));
    const auto s = compute_saliency(lab, labels, &deep, cfg);
    REQUIRE(s.fcn_map);
    CHECK(s.map == normalize_map(*s.fcn_map));
  }
}

TEST_CASE("deep tensor with the wrong size is a data error tagged with the stage") {
  test::TempDir tmp;
  auto cfg = small_config(tmp);
  write_fvol(tmp / "deep.fvol", FeatureTensor({16, 16, 7}, 2));
  cfg.feature_tensor_path = tmp / "deep.fvol";
  CHECK_THROWS_WITH_AS(run_pipeline(cfg), doctest::Contains("[features]"), DataError);
  // The failed run leaves staged artifacts under their partial names.
  CHECK(has_partial(cfg.output_dir));
  CHECK_FALSE(fs::exists(cfg.output_dir / "manifest.json"));
}

TEST_CASE("static video is flagged as an empty seed") {
  test::TempDir tmp;
  fs::create_directories(tmp / "frames");
  for (int f = 1; f <= 3; ++f)
    test::write_rgb_png(tmp / "frames" / ("f" + std::to_string(f) + ".png"), 8, 8,
                        std::vector<std::uint8_t>(8 * 8 * 3, 90));
  PipelineConfig cfg;
  cfg.input_dir = tmp / "frames";
  cfg.output_dir = tmp / "out";
  cfg.levels = 2;
  const auto m = run_pipeline(cfg);
  CHECK(std::any_of(m.notes.begin(), m.notes.end(),
                    [](const std::string& n) { return n.rfind("empty seed", 0) == 0; }));
}

TEST_CASE("debug dumps") {
  test::TempDir tmp;
  auto cfg = small_config(tmp);
  cfg.debug_dumps = true;
  cfg.write_overlay = false;
  run_pipeline(cfg);
  CHECK(fs::exists(cfg.output_dir / "debug" / "seed.txt"));
  CHECK(fs::exists(cfg.output_dir / "debug" / "g_lab.txt"));
  CHECK(fs::exists(cfg.output_dir / "debug" / "w_lab.txt"));
  CHECK_FALSE(fs::exists(cfg.output_dir / "overlay"));
}

TEST_CASE("run_stage keeps the category and tags once") {
  try {
    run_stage("outer", [] { run_stage("inner", [] { throw DataError("boom"); }); });
    FAIL("expected throw");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()) == "[inner] boom");
  }
  CHECK_THROWS_AS(run_stage("x", [] { throw std::out_of_range("oops"); }), RuntimeFailure);
}
