#ifndef SALGRAPH_EVALUATION_HPP_
#define SALGRAPH_EVALUATION_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "salgraph/fusion.hpp"
#include "salgraph/video_volume.hpp"

namespace salgraph {

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

// Points ordered by descending threshold, so both rates are non-decreasing
// from (0,0) to (1,1).
struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

// Number of sweep thresholds k/256, k = 0..256.
inline constexpr std::size_t kRocThresholds = 257;

// Sweeps the 257 thresholds over the whole volume (a voxel is predicted
// salient when map >= threshold) plus a final 257/256 anchor at (0,0), and
// integrates with the trapezoid rule.
RocCurve roc_auc(const SaliencyMap& map, const GroundTruthMasks& gt);

// Same sweep over an arbitrary subset [begin, end) of voxels.
RocCurve roc_auc(const SaliencyMap& map, const GroundTruthMasks& gt, std::size_t begin,
                 std::size_t end);

// Mean z-scored saliency over ground-truth positives (population std).
double nss(const SaliencyMap& map, const GroundTruthMasks& gt);

struct SequenceReport {
  std::string sequence;
  double auc = 0.0;
  double nss = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  RocCurve roc;
  std::vector<double> frame_auc;  // NaN where a frame lacks positives or negatives
};

SequenceReport evaluate_sequence(const std::string& name, const SaliencyMap& map,
                                 const GroundTruthMasks& gt);

// metrics.csv: sequence,auc,nss,n_pos,n_neg
void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<SequenceReport>& reports);
std::vector<SequenceReport> read_metrics_csv(const std::filesystem::path& path);

// roc.csv: threshold,fpr,tpr
void write_roc_csv(const std::filesystem::path& path, const RocCurve& roc);

// Whitespace-separated "fpr tpr" lines with a comment header, for gnuplot.
void write_roc_points(const std::filesystem::path& path, const RocCurve& roc);

// frame_auc.csv: frame,auc (1-based frames; "nan" when undefined)
void write_frame_auc_csv(const std::filesystem::path& path, const SequenceReport& report);

}  // namespace salgraph

#endif  // SALGRAPH_EVALUATION_HPP_
