// salgraph: video saliency by manifold ranking over a supervoxel graph.
//
//   salgraph run -c config.toml
//   salgraph segment --input frames/ --output out/
//   salgraph features --input frames/ --output out/ [--deep fcn.fvol]
//   salgraph saliency --input frames/ --output out/ [--labels out/segmentation/selected.lvol]
//   salgraph eval --map out/saliency/map.fvol --gt gt/
//   salgraph render-overlay --map out/saliency/map.fvol --input frames/ --output out/
//
// Exit codes: 0 ok, 2 config error, 3 data-contract error, 4 runtime failure.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "salgraph/error.hpp"
#include "salgraph/pipeline.hpp"

namespace fs = std::filesystem;
using namespace salgraph;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

// Options shared by the stages that need a PipelineConfig.
struct CommonOptions {
  std::string config_file;
  std::string input;
  std::string output;
  std::vector<std::string> overrides;  // key=value

  void attach(CLI::App* app, bool needs_input) {
    app->add_option("-c,--config", config_file, "flat key = value config file");
    auto* in = app->add_option("-i,--input", input, "directory of input frames");
    if (needs_input) in->check(CLI::ExistingDirectory);
    app->add_option("-o,--output", output, "output directory");
    app->add_option("--set", overrides, "override a config key, e.g. --set mu=0.2");
  }

  // Precedence: flags > file > defaults.
  PipelineConfig resolve() const {
    ConfigPairs pairs;
    if (!config_file.empty()) pairs = read_config_file(config_file);
    if (!input.empty()) pairs.emplace_back("input_dir", input);
    if (!output.empty()) pairs.emplace_back("output_dir", output);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      pairs.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    PipelineConfig cfg = apply_config(PipelineConfig{}, pairs);
    validate(cfg);
    if (cfg.input_dir.empty()) throw ConfigError("no input directory (use --input or input_dir)");
    return cfg;
  }
};

void print_manifest_summary(const RunManifest& m) {
  std::printf("mode: %s\n", m.mode.c_str());
  std::printf("units per layer:");
  for (auto n : m.unit_counts) std::printf(" %zu", n);
  std::printf("  (selected layer %zu)\n", m.selected_layer);
  for (const auto& t : m.timings) std::printf("  %-10s %8.3f s\n", t.stage.c_str(), t.seconds);
  for (const auto& n : m.notes) std::printf("note: %s\n", n.c_str());
  if (m.metrics) std::printf("AUC %.4f  NSS %.4f\n", m.metrics->auc, m.metrics->nss);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Video saliency by manifold ranking over a spatiotemporal supervoxel graph"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CommonOptions run_opts;
  std::string run_gt, run_features;
  auto* run = app.add_subcommand("run", "full pipeline: segment, pool, graph, propagate, fuse");
  run_opts.attach(run, false);
  run->add_option("--gt", run_gt, "ground-truth mask directory");
  run->add_option("--features", run_features, "deep feature tensor (FVOL)");

  CommonOptions seg_opts;
  auto* segment = app.add_subcommand("segment", "hierarchical supervoxel segmentation");
  seg_opts.attach(segment, true);

  CommonOptions feat_opts;
  std::string deep_check;
  auto* features = app.add_subcommand("features", "write the LAB feature tensor");
  feat_opts.attach(features, true);
  features->add_option("--deep", deep_check, "validate a deep feature tensor against the video");

  CommonOptions sal_opts;
  std::string sal_labels, sal_features;
  auto* saliency = app.add_subcommand("saliency", "propagate and fuse saliency for a labeling");
  sal_opts.attach(saliency, true);
  saliency->add_option("--labels", sal_labels, "LVOL labels (default OUT/segmentation/selected.lvol)");
  saliency->add_option("--features", sal_features, "deep feature tensor (FVOL)");

  std::string eval_map, eval_gt, eval_out, eval_name, eval_pattern = "*.png";
  auto* eval = app.add_subcommand("eval", "ROC/AUC and NSS against ground truth");
  eval->add_option("--map", eval_map, "saliency map FVOL")->required()->check(CLI::ExistingFile);
  eval->add_option("--gt", eval_gt, "ground-truth mask directory")->required();
  eval->add_option("-o,--output", eval_out, "directory for metrics.csv and roc files");
  eval->add_option("--name", eval_name, "sequence name for metrics.csv");
  eval->add_option("--gt-pattern", eval_pattern, "mask filename glob");

  std::string ov_map, ov_input, ov_output, ov_pattern = "*.png";
  auto* overlay = app.add_subcommand("render-overlay", "blend a stored map onto the input frames");
  overlay->add_option("--map", ov_map, "saliency map FVOL")->required()->check(CLI::ExistingFile);
  overlay->add_option("-i,--input", ov_input, "input frames")->required();
  overlay->add_option("-o,--output", ov_output, "output directory")->required();
  overlay->add_option("--pattern", ov_pattern, "frame filename glob");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (run->parsed()) {
      PipelineConfig cfg = run_opts.resolve();
      if (!run_gt.empty()) cfg.gt_dir = run_gt;
      if (!run_features.empty()) cfg.feature_tensor_path = run_features;
      const RunManifest m = run_pipeline(cfg);
      print_manifest_summary(m);
    } else if (segment->parsed()) {
      const PipelineConfig cfg = seg_opts.resolve();
      ArtifactSet artifacts;
      const auto lab = run_stage("load", [&] {
        return rgb_to_lab(load_frame_sequence(cfg.input_dir, cfg.frame_pattern));
      });
      run_stage("segment", [&] {
        const auto h = segment_video(lab, cfg.segmentation, cfg.levels, cfg.connectivity);
        write_segmentation(h, cfg.selected_layer(), cfg.output_dir, artifacts);
        artifacts.commit();
        std::printf("units per layer:");
        for (const auto& l : h.layers()) std::printf(" %zu", l.unit_count());
        std::printf("\n");
      });
    } else if (features->parsed()) {
      const PipelineConfig cfg = feat_opts.resolve();
      ArtifactSet artifacts;
      run_stage("features", [&] {
        const auto lab = rgb_to_lab(load_frame_sequence(cfg.input_dir, cfg.frame_pattern));
        fs::create_directories(cfg.output_dir / "features");
        write_fvol(artifacts.stage(cfg.output_dir / "features" / "lab.fvol"),
                   lab_feature_tensor(lab));
        if (!deep_check.empty()) {
          const auto deep = read_feature_tensor(deep_check, lab.dims());
          std::printf("deep tensor ok: %s x %zu channels\n", to_string(deep.dims()).c_str(),
                      deep.channels());
        }
        artifacts.commit();
      });
    } else if (saliency->parsed()) {
      const PipelineConfig cfg = sal_opts.resolve();
      ArtifactSet artifacts;
      const auto rgb = run_stage("load", [&] {
        return load_frame_sequence(cfg.input_dir, cfg.frame_pattern);
      });
      const auto lab = rgb_to_lab(rgb);
      const fs::path labels_path =
          sal_labels.empty() ? selected_layer_path(cfg.output_dir) : fs::path(sal_labels);
      const auto labels = run_stage("load", [&] { return read_lvol(labels_path); });
      std::optional<FeatureTensor> deep;
      std::string deep_path = sal_features;
      if (deep_path.empty() && cfg.feature_tensor_path) deep_path = cfg.feature_tensor_path->string();
      if (!deep_path.empty())
        deep = run_stage("features", [&] { return read_feature_tensor(deep_path, lab.dims()); });
      const auto out = compute_saliency(lab, labels, deep ? &*deep : nullptr, cfg);
      run_stage("render", [&] {
        write_saliency(out, &rgb, cfg, artifacts);
        artifacts.commit();
      });
      for (const auto& n : out.notes) std::printf("note: %s\n", n.c_str());
    } else if (eval->parsed()) {
      run_stage("evaluate", [&] {
        const auto map = read_map(eval_map);
        const auto gt = load_ground_truth(eval_gt, map.dims, eval_pattern);
        fs::path out_dir = eval_out;
        if (out_dir.empty()) out_dir = fs::path(eval_map).parent_path().parent_path();
        if (out_dir.empty()) out_dir = ".";
        std::string name = eval_name;
        if (name.empty()) name = fs::path(eval_gt).filename().string();
        const auto report = evaluate_sequence(name, map, gt);
        ArtifactSet artifacts;
        write_evaluation(report, out_dir, artifacts);
        artifacts.commit();
        std::printf("AUC %.4f  NSS %.4f  (pos %zu, neg %zu)\n", report.auc, report.nss,
                    report.n_pos, report.n_neg);
      });
    } else if (overlay->parsed()) {
      run_stage("render", [&] {
        const auto map = read_map(ov_map);
        const auto rgb = load_frame_sequence(ov_input, ov_pattern);
        if (rgb.dims() != map.dims)
          throw DataError("map " + to_string(map.dims) + " does not match frames " +
                          to_string(rgb.dims()));
        ArtifactSet artifacts;
        artifacts.adopt(write_overlay(map, rgb, fs::path(ov_output) / "overlay", kPartialSuffix));
        artifacts.commit();
      });
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
