#ifndef SALGRAPH_PIPELINE_HPP_
#define SALGRAPH_PIPELINE_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "salgraph/evaluation.hpp"
#include "salgraph/features.hpp"
#include "salgraph/fusion.hpp"
#include "salgraph/propagation.hpp"
#include "salgraph/saliency_graph.hpp"
#include "salgraph/supervoxel.hpp"
#include "salgraph/video_volume.hpp"

namespace salgraph {

inline constexpr const char* kVersion = "0.1.0";

struct PipelineConfig {
  std::filesystem::path input_dir;
  std::string frame_pattern = "*.png";
  std::optional<std::filesystem::path> gt_dir;
  std::string gt_pattern = "*.png";
  std::optional<std::filesystem::path> feature_tensor_path;
  std::filesystem::path output_dir = "out";
  std::string sequence_name;  // defaults to the input directory name

  // Graph kernel, per feature space.
  double rho_lab = 0.1;
  double rho_fcn = 0.1;
  bool per_channel_distance_lab = false;
  bool per_channel_distance_fcn = true;

  PropagationConfig propagation;  // mu = 0.1
  FusionConfig fusion;            // beta = 0.7

  FhParams segmentation;  // k = 8, min_size = 100
  std::size_t levels = 10;
  std::size_t layer_index = 0;  // 0 -> ceil(levels / 2)
  Connectivity connectivity = Connectivity::k6;

  bool write_overlay = true;
  bool debug_dumps = false;

  std::size_t selected_layer() const { return layer_index ? layer_index : (levels + 1) / 2; }
  std::string name() const;
};

using ConfigPairs = std::vector<std::pair<std::string, std::string>>;

// Flat "key = value" lines; '#' starts a comment; [section] headers and
// surrounding quotes on values are ignored.
ConfigPairs parse_config_text(const std::string& text);
ConfigPairs read_config_file(const std::filesystem::path& path);

// Applies pairs in order on top of `base`. Unknown keys or malformed values
// raise ConfigError. "rho" sets both rho_lab and rho_fcn.
PipelineConfig apply_config(PipelineConfig base, const ConfigPairs& pairs);

// Range checks from every owning module; throws ConfigError.
void validate(const PipelineConfig& cfg);

// Flat key/value snapshot accepted back by apply_config.
ConfigPairs config_snapshot(const PipelineConfig& cfg);

// Files are first written with this suffix and renamed once the run succeeds;
// a failed run leaves them behind.
inline constexpr const char* kPartialSuffix = ".partial";

class ArtifactSet {
 public:
  // Path to write to for the artifact that will finally live at `final_path`.
  std::filesystem::path stage(const std::filesystem::path& final_path);
  void adopt(const std::vector<std::filesystem::path>& final_paths);
  // Renames every staged file to its final name.
  void commit();
  const std::vector<std::filesystem::path>& paths() const { return paths_; }

 private:
  std::vector<std::filesystem::path> paths_;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct RunManifest {
  ConfigPairs config;
  std::vector<StageTiming> timings;
  std::vector<std::size_t> unit_counts;  // per layer, finest first
  std::size_t selected_layer = 0;
  std::string mode;  // "fused" or "lab-only"
  std::vector<std::string> notes;
  std::vector<std::filesystem::path> artifacts;
  std::optional<SequenceReport> metrics;
  std::string version = kVersion;

  std::string to_json() const;
};

// Output of the saliency stage for one labeling.
struct SaliencyOutputs {
  SeedVector seed;
  SaliencyScores lab_scores;
  std::optional<SaliencyScores> fcn_scores;
  SaliencyMap lab_map;
  std::optional<SaliencyMap> fcn_map;
  SaliencyMap map;  // final, normalized
  std::size_t edge_count = 0;
  std::vector<StageTiming> timings;  // features, graph, propagate, fuse
  std::vector<std::string> notes;
  SaliencyGraph lab_graph;
};

// Pools features, builds both graphs, propagates and fuses. `deep` may be null
// (lab-only mode).
SaliencyOutputs compute_saliency(const VideoVolume& lab, const LabelVolume& labels,
                                 const FeatureTensor* deep, const PipelineConfig& cfg);

// Layer files as written by the segment stage.
std::filesystem::path layer_path(const std::filesystem::path& out_dir, std::size_t layer);
std::filesystem::path selected_layer_path(const std::filesystem::path& out_dir);

// Stage writers shared by run_pipeline and the CLI subcommands.
void write_segmentation(const SupervoxelHierarchy& h, std::size_t selected,
                        const std::filesystem::path& out_dir, ArtifactSet& artifacts);
void write_saliency(const SaliencyOutputs& s, const VideoVolume* rgb, const PipelineConfig& cfg,
                    ArtifactSet& artifacts);
void write_evaluation(const SequenceReport& report, const std::filesystem::path& out_dir,
                      ArtifactSet& artifacts);
void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

// The full segment -> pool -> graph -> propagate -> fuse -> render chain, plus
// evaluation when gt_dir is set. Errors are re-thrown tagged with the stage.
RunManifest run_pipeline(const PipelineConfig& cfg);

// Runs `fn`, prefixing any salgraph error message with "[stage] " while
// keeping its category.
template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn) -> decltype(fn());

}  // namespace salgraph

#include "salgraph/pipeline_inl.hpp"

#endif  // SALGRAPH_PIPELINE_HPP_
