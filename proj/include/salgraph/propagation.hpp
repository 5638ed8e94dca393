#ifndef SALGRAPH_PROPAGATION_HPP_
#define SALGRAPH_PROPAGATION_HPP_

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "salgraph/saliency_graph.hpp"
#include "salgraph/supervoxel.hpp"
#include "salgraph/video_volume.hpp"

namespace salgraph {

// Initial per-unit saliency q in [0,1].
struct SeedVector {
  Eigen::VectorXd q;
  bool empty = false;          // no foreground found; q is all zero
  bool single_frame = false;   // no temporal support; q is uniform 1/N
};

// Source of coarse foreground seeds. The default is MedianOtsuSeed; object
// detector seeds can be plugged in by implementing this.
class SeedProvider {
 public:
  virtual ~SeedProvider() = default;
  virtual SeedVector seed(const VideoVolume& lab, const LabelVolume& labels) const = 0;
};

// Background = per-pixel temporal median of LAB. A voxel is foreground when its
// LAB distance to the background exceeds the Otsu threshold computed over the
// whole volume. q_i is the foreground fraction of unit i.
class MedianOtsuSeed final : public SeedProvider {
 public:
  SeedVector seed(const VideoVolume& lab, const LabelVolume& labels) const override;
};

SeedVector compute_seed(const VideoVolume& lab, const LabelVolume& labels);

// |LAB - temporal median LAB| per voxel. For even frame counts the lower
// median is used.
std::vector<float> background_distance(const VideoVolume& lab);

// Otsu over a 256-bin histogram spanning [0, max(values)]. Returns the
// threshold t such that values > t are foreground; +inf when max is 0.
double otsu_threshold(std::span<const float> values);

// Per-voxel foreground mask from background_distance and otsu_threshold.
std::vector<std::uint8_t> foreground_mask(const VideoVolume& lab);

enum class SolverKind { kDirect, kIterative };

struct PropagationConfig {
  double mu = 0.1;
  SolverKind solver = SolverKind::kDirect;
  double iter_tol = 1e-9;
  std::size_t max_iter = 10000;
};

void validate(const PropagationConfig& cfg);

struct SaliencyScores {
  Eigen::VectorXd g;
  std::size_t iterations = 0;  // 0 for the direct solver
  bool constant = false;       // set by normalize_scores for flat input
};

// S = D^-1/2 W D^-1/2 with d^-1/2 := 0 for isolated nodes.
SparseMatrix normalized_affinity(const SaliencyGraph& graph);

// g = (I - S / (1 + mu))^-1 q.
SaliencyScores solve_closed_form(const SaliencyGraph& graph, const Eigen::VectorXd& q,
                                 const PropagationConfig& cfg);

// Gradient of the ranking energy
//   E(h) = 1/2 ( sum_{edges ij} w_ij (h_i/sqrt(d_i) - h_j/sqrt(d_j))^2 + mu |h - q|^2 )
// which is (1 + mu) h - S h - mu q. Each undirected edge is counted once.
Eigen::VectorXd energy_gradient(const SaliencyGraph& graph, const Eigen::VectorXd& q, double mu,
                                const Eigen::VectorXd& h);

// Energy value for the same functional; isolated nodes contribute only the
// fit term.
double ranking_energy(const SaliencyGraph& graph, const Eigen::VectorXd& q, double mu,
                      const Eigen::VectorXd& h);

// |grad E(h)|_inf at h = mu/(1+mu) g, the true minimizer for a closed-form g.
// Isolated nodes are skipped: their energy terms have no smoothness part and
// the solver pins them to q_i by convention.
double verify_stationarity(const SaliencyGraph& graph, const Eigen::VectorXd& q,
                           const PropagationConfig& cfg, const SaliencyScores& g);

// Gradient infinity norm at an arbitrary point, over non-isolated nodes.
double stationarity_residual_at(const SaliencyGraph& graph, const Eigen::VectorXd& q, double mu,
                                const Eigen::VectorXd& h);

// Min-max rescale to [0,1]. A constant vector maps to 0.5 and sets `constant`.
SaliencyScores normalize_scores(const SaliencyScores& scores);

// One value per line, %.17g.
void dump_vector(const std::filesystem::path& path, const Eigen::VectorXd& v);

}  // namespace salgraph

#endif  // SALGRAPH_PROPAGATION_HPP_
