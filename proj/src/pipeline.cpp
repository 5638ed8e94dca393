#include "salgraph/pipeline.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "salgraph/error.hpp"

namespace salgraph {

namespace fs = std::filesystem;

std::string PipelineConfig::name() const {
  if (!sequence_name.empty()) return sequence_name;
  auto p = input_dir;
  if (p.filename().empty()) p = p.parent_path();
  return p.filename().string().empty() ? "sequence" : p.filename().string();
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return s.substr(1, s.size() - 2);
  return s;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
}

std::size_t to_count(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    const unsigned long long n = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("'" + key + "' expects a boolean, got '" + v + "'");
}

// Shortest of %.15g / %.17g that reads back to the same double.
std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  if (std::strtod(buf, nullptr) != v) std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

ConfigPairs parse_config_text(const std::string& text) {
  ConfigPairs pairs;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // Strip comments outside quotes.
    bool quoted = false;
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == quote) quoted = false;
      } else if (c == '"' || c == '\'') {
        quoted = true;
        quote = c;
      } else if (c == '#') {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    pairs.emplace_back(trim(line.substr(0, eq)), unquote(trim(line.substr(eq + 1))));
  }
  return pairs;
}

ConfigPairs read_config_file(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

PipelineConfig apply_config(PipelineConfig cfg, const ConfigPairs& pairs) {
  for (const auto& [key, v] : pairs) {
    if (key == "input_dir") cfg.input_dir = v;
    else if (key == "frame_pattern") cfg.frame_pattern = v;
    else if (key == "gt_dir") cfg.gt_dir = v.empty() ? std::nullopt : std::optional<fs::path>(v);
    else if (key == "gt_pattern") cfg.gt_pattern = v;
    else if (key == "feature_tensor")
      cfg.feature_tensor_path = v.empty() ? std::nullopt : std::optional<fs::path>(v);
    else if (key == "output_dir") cfg.output_dir = v;
    else if (key == "sequence") cfg.sequence_name = v;
    else if (key == "rho") cfg.rho_lab = cfg.rho_fcn = to_double(key, v);
    else if (key == "rho_lab") cfg.rho_lab = to_double(key, v);
    else if (key == "rho_fcn") cfg.rho_fcn = to_double(key, v);
    else if (key == "per_channel_distance_lab") cfg.per_channel_distance_lab = to_bool(key, v);
    else if (key == "per_channel_distance_fcn") cfg.per_channel_distance_fcn = to_bool(key, v);
    else if (key == "mu") cfg.propagation.mu = to_double(key, v);
    else if (key == "solver") {
      if (v == "direct") cfg.propagation.solver = SolverKind::kDirect;
      else if (v == "iterative") cfg.propagation.solver = SolverKind::kIterative;
      else throw ConfigError("solver must be 'direct' or 'iterative', got '" + v + "'");
    } else if (key == "iter_tol") cfg.propagation.iter_tol = to_double(key, v);
    else if (key == "max_iter") cfg.propagation.max_iter = to_count(key, v);
    else if (key == "beta") cfg.fusion.beta = to_double(key, v);
    else if (key == "k") cfg.segmentation.k = to_double(key, v);
    else if (key == "min_size") cfg.segmentation.min_size = to_count(key, v);
    else if (key == "levels") cfg.levels = to_count(key, v);
    else if (key == "layer_index" || key == "layer") cfg.layer_index = to_count(key, v);
    else if (key == "connectivity")
      cfg.connectivity = connectivity_from_int(static_cast<int>(to_count(key, v)));
    else if (key == "write_overlay") cfg.write_overlay = to_bool(key, v);
    else if (key == "debug_dumps") cfg.debug_dumps = to_bool(key, v);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  return cfg;
}

void validate(const PipelineConfig& cfg) {
  if (!(cfg.rho_lab > 0.0) || !(cfg.rho_fcn > 0.0)) throw ConfigError("rho must be > 0");
  validate(cfg.propagation);
  if (!(cfg.fusion.beta >= 0.0 && cfg.fusion.beta <= 1.0))
    throw ConfigError("beta must lie in [0, 1]");
  if (!(cfg.segmentation.k > 0.0)) throw ConfigError("k must be > 0");
  if (cfg.segmentation.min_size < 1) throw ConfigError("min_size must be >= 1");
  if (cfg.levels < 1) throw ConfigError("levels must be >= 1");
  if (cfg.selected_layer() > cfg.levels)
    throw ConfigError("layer_index " + std::to_string(cfg.layer_index) + " exceeds levels " +
                      std::to_string(cfg.levels));
}

ConfigPairs config_snapshot(const PipelineConfig& cfg) {
  ConfigPairs p;
  p.emplace_back("input_dir", cfg.input_dir.string());
  p.emplace_back("frame_pattern", cfg.frame_pattern);
  p.emplace_back("gt_dir", cfg.gt_dir ? cfg.gt_dir->string() : "");
  p.emplace_back("gt_pattern", cfg.gt_pattern);
  p.emplace_back("feature_tensor", cfg.feature_tensor_path ? cfg.feature_tensor_path->string() : "");
  p.emplace_back("output_dir", cfg.output_dir.string());
  p.emplace_back("sequence", cfg.name());
  p.emplace_back("rho_lab", num(cfg.rho_lab));
  p.emplace_back("rho_fcn", num(cfg.rho_fcn));
  p.emplace_back("per_channel_distance_lab", cfg.per_channel_distance_lab ? "true" : "false");
  p.emplace_back("per_channel_distance_fcn", cfg.per_channel_distance_fcn ? "true" : "false");
  p.emplace_back("mu", num(cfg.propagation.mu));
  p.emplace_back("solver", cfg.propagation.solver == SolverKind::kDirect ? "direct" : "iterative");
  p.emplace_back("iter_tol", num(cfg.propagation.iter_tol));
  p.emplace_back("max_iter", std::to_string(cfg.propagation.max_iter));
  p.emplace_back("beta", num(cfg.fusion.beta));
  p.emplace_back("k", num(cfg.segmentation.k));
  p.emplace_back("min_size", std::to_string(cfg.segmentation.min_size));
  p.emplace_back("levels", std::to_string(cfg.levels));
  p.emplace_back("layer_index", std::to_string(cfg.selected_layer()));
  p.emplace_back("connectivity", std::to_string(static_cast<int>(cfg.connectivity)));
  p.emplace_back("write_overlay", cfg.write_overlay ? "true" : "false");
  p.emplace_back("debug_dumps", cfg.debug_dumps ? "true" : "false");
  return p;
}

fs::path ArtifactSet::stage(const fs::path& final_path) {
  paths_.push_back(final_path);
  return final_path.string() + kPartialSuffix;
}

void ArtifactSet::adopt(const std::vector<fs::path>& final_paths) {
  paths_.insert(paths_.end(), final_paths.begin(), final_paths.end());
}

void ArtifactSet::commit() {
  for (const auto& p : paths_) {
    std::error_code ec;
    fs::rename(p.string() + kPartialSuffix, p, ec);
    if (ec) throw RuntimeFailure("cannot finalize " + p.string() + ": " + ec.message());
  }
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["tool"] = "salgraph";
  j["version"] = version;
  nlohmann::ordered_json c = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config) c[k] = v;
  j["config"] = c;
  j["mode"] = mode;
  nlohmann::ordered_json t = nlohmann::ordered_json::array();
  for (const auto& s : timings) t.push_back({{"stage", s.stage}, {"seconds", s.seconds}});
  j["timings"] = t;
  j["unit_counts"] = unit_counts;
  j["selected_layer"] = selected_layer;
  j["notes"] = notes;
  std::vector<std::string> a;
  for (const auto& p : artifacts) a.push_back(p.string());
  j["artifacts"] = a;
  if (metrics) {
    j["metrics"] = {{"sequence", metrics->sequence},
                    {"auc", metrics->auc},
                    {"nss", metrics->nss},
                    {"n_pos", metrics->n_pos},
                    {"n_neg", metrics->n_neg}};
  }
  return j.dump(2) + "\n";
}

void write_manifest(const RunManifest& manifest, const fs::path& path) {
  const fs::path tmp = path.string() + kPartialSuffix;
  {
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) throw RuntimeFailure("cannot open " + tmp.string());
    os << manifest.to_json();
    if (!os) throw RuntimeFailure("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw RuntimeFailure("cannot finalize " + path.string() + ": " + ec.message());
}

SaliencyOutputs compute_saliency(const VideoVolume& lab, const LabelVolume& labels,
                                 const FeatureTensor* deep, const PipelineConfig& cfg) {
  if (lab.dims() != labels.dims())
    throw DataError("labels " + to_string(labels.dims()) + " do not match video " +
                    to_string(lab.dims()));
  SaliencyOutputs out;

  auto t0 = Clock::now();
  const auto lab_table = run_stage("features", [&] {
    return pool_unit_features(lab_feature_tensor(lab), labels);
  });
  std::optional<UnitFeatureTable> deep_table;
  if (deep) deep_table = run_stage("features", [&] { return pool_unit_features(*deep, labels); });
  out.timings.push_back({"features", seconds_since(t0)});

  t0 = Clock::now();
  std::optional<SaliencyGraph> fcn_graph;
  run_stage("graph", [&] {
    const auto edges = compute_adjacency(labels, cfg.connectivity);
    out.edge_count = edges.size();
    out.lab_graph = build_affinity(lab_table, edges, {cfg.rho_lab, cfg.per_channel_distance_lab});
    if (deep_table)
      fcn_graph = build_affinity(*deep_table, edges, {cfg.rho_fcn, cfg.per_channel_distance_fcn});
  });
  out.timings.push_back({"graph", seconds_since(t0)});

  t0 = Clock::now();
  run_stage("propagate", [&] {
    out.seed = compute_seed(lab, labels);
    if (out.seed.empty) out.notes.push_back("empty seed: no foreground detected");
    if (out.seed.single_frame) out.notes.push_back("single frame: uniform seed");
    out.lab_scores = normalize_scores(solve_closed_form(out.lab_graph, out.seed.q, cfg.propagation));
    if (out.lab_scores.constant) out.notes.push_back("constant LAB scores");
    if (fcn_graph) {
      out.fcn_scores = normalize_scores(solve_closed_form(*fcn_graph, out.seed.q, cfg.propagation));
      if (out.fcn_scores->constant) out.notes.push_back("constant deep-feature scores");
    }
  });
  out.timings.push_back({"propagate", seconds_since(t0)});

  t0 = Clock::now();
  run_stage("fuse", [&] {
    out.lab_map = render_map(out.lab_scores, labels);
    if (out.fcn_scores) {
      out.fcn_map = render_map(*out.fcn_scores, labels);
      out.map = fuse_maps(normalize_map(out.lab_map), normalize_map(*out.fcn_map), cfg.fusion);
    } else {
      out.map = normalize_map(out.lab_map);
      out.notes.push_back("lab-only mode");
    }
  });
  out.timings.push_back({"fuse", seconds_since(t0)});
  return out;
}

fs::path layer_path(const fs::path& out_dir, std::size_t layer) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "layer_%02zu.lvol", layer);
  return out_dir / "segmentation" / buf;
}

fs::path selected_layer_path(const fs::path& out_dir) {
  return out_dir / "segmentation" / "selected.lvol";
}

namespace {

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw RuntimeFailure("cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace

void write_segmentation(const SupervoxelHierarchy& h, std::size_t selected, const fs::path& out_dir,
                        ArtifactSet& artifacts) {
  make_dir(out_dir / "segmentation");
  for (std::size_t i = 1; i <= h.layer_count(); ++i)
    write_lvol(artifacts.stage(layer_path(out_dir, i)), h.select_layer(i));
  write_lvol(artifacts.stage(selected_layer_path(out_dir)), h.select_layer(selected));
}

void write_saliency(const SaliencyOutputs& s, const VideoVolume* rgb, const PipelineConfig& cfg,
                    ArtifactSet& artifacts) {
  artifacts.adopt(write_map(s.map, cfg.output_dir / "saliency", kPartialSuffix));
  if (rgb && cfg.write_overlay)
    artifacts.adopt(write_overlay(s.map, *rgb, cfg.output_dir / "overlay", kPartialSuffix));
  if (cfg.debug_dumps) {
    const auto dir = cfg.output_dir / "debug";
    make_dir(dir);
    dump_vector(artifacts.stage(dir / "seed.txt"), s.seed.q);
    dump_vector(artifacts.stage(dir / "g_lab.txt"), s.lab_scores.g);
    if (s.fcn_scores) dump_vector(artifacts.stage(dir / "g_fcn.txt"), s.fcn_scores->g);
    dump_affinity(artifacts.stage(dir / "w_lab.txt"), s.lab_graph);
  }
}

void write_evaluation(const SequenceReport& report, const fs::path& out_dir,
                      ArtifactSet& artifacts) {
  make_dir(out_dir);
  write_metrics_csv(artifacts.stage(out_dir / "metrics.csv"), {report});
  write_roc_csv(artifacts.stage(out_dir / "roc.csv"), report.roc);
  write_roc_points(artifacts.stage(out_dir / "roc.dat"), report.roc);
  write_frame_auc_csv(artifacts.stage(out_dir / "frame_auc.csv"), report);
}

RunManifest run_pipeline(const PipelineConfig& cfg) {
  run_stage("config", [&] { validate(cfg); });
  make_dir(cfg.output_dir);

  RunManifest manifest;
  manifest.config = config_snapshot(cfg);
  manifest.selected_layer = cfg.selected_layer();
  ArtifactSet artifacts;

  auto t0 = Clock::now();
  const VideoVolume rgb =
      run_stage("load", [&] { return load_frame_sequence(cfg.input_dir, cfg.frame_pattern); });
  const VideoVolume lab = run_stage("load", [&] { return rgb_to_lab(rgb); });
  const auto hierarchy = run_stage("segment", [&] {
    auto h = segment_video(lab, cfg.segmentation, cfg.levels, cfg.connectivity);
    write_segmentation(h, cfg.selected_layer(), cfg.output_dir, artifacts);
    return h;
  });
  for (const auto& layer : hierarchy.layers()) manifest.unit_counts.push_back(layer.unit_count());
  manifest.timings.push_back({"segment", seconds_since(t0)});

  std::optional<FeatureTensor> deep;
  t0 = Clock::now();
  run_stage("features", [&] {
    make_dir(cfg.output_dir / "features");
    write_fvol(artifacts.stage(cfg.output_dir / "features" / "lab.fvol"), lab_feature_tensor(lab));
    if (cfg.feature_tensor_path) deep = read_feature_tensor(*cfg.feature_tensor_path, lab.dims());
  });

  const auto& labels = hierarchy.select_layer(cfg.selected_layer());
  const double load_features = seconds_since(t0);
  auto sal = compute_saliency(lab, labels, deep ? &*deep : nullptr, cfg);
  sal.timings.front().seconds += load_features;
  for (const auto& t : sal.timings) manifest.timings.push_back(t);
  manifest.mode = deep ? "fused" : "lab-only";
  manifest.notes = sal.notes;
  run_stage("render", [&] { write_saliency(sal, &rgb, cfg, artifacts); });

  if (cfg.gt_dir) {
    t0 = Clock::now();
    manifest.metrics = run_stage("evaluate", [&] {
      const auto gt = load_ground_truth(*cfg.gt_dir, lab.dims(), cfg.gt_pattern);
      auto report = evaluate_sequence(cfg.name(), sal.map, gt);
      write_evaluation(report, cfg.output_dir, artifacts);
      return report;
    });
    manifest.timings.push_back({"evaluate", seconds_since(t0)});
  }

  run_stage("commit", [&] { artifacts.commit(); });
  manifest.artifacts = artifacts.paths();
  write_manifest(manifest, cfg.output_dir / "manifest.json");
  return manifest;
}

}  // namespace salgraph
