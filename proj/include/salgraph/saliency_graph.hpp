#ifndef SALGRAPH_SALIENCY_GRAPH_HPP_
#define SALGRAPH_SALIENCY_GRAPH_HPP_

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "salgraph/features.hpp"
#include "salgraph/supervoxel.hpp"

namespace salgraph {

using UnitEdge = std::pair<std::uint32_t, std::uint32_t>;  // first < second
using SparseMatrix = Eigen::SparseMatrix<double>;

struct KernelParams {
  double rho = 0.1;
  // Divide squared distances by the descriptor length before the kernel, so
  // 512-dim deep features and 3-dim LAB produce comparable responses.
  bool per_channel_distance = false;
};

// Spatiotemporal adjacency graph over units with RBF affinities on its edges.
struct SaliencyGraph {
  std::size_t node_count = 0;
  std::vector<UnitEdge> edges;
  // Symmetric, zero diagonal. Every adjacency pair is stored explicitly, even
  // when the kernel underflows to 0.
  SparseMatrix affinity;
  Eigen::VectorXd degrees;
};

// Pairs of units with at least one pair of lattice-neighboring voxels.
std::vector<UnitEdge> compute_adjacency(const LabelVolume& labels,
                                        Connectivity conn = Connectivity::k6);

// exp(-|x - y|^2 / rho).
double rbf_affinity(std::span<const double> x, std::span<const double> y,
                    const KernelParams& params);

SaliencyGraph build_affinity(const UnitFeatureTable& features, const std::vector<UnitEdge>& edges,
                             const KernelParams& params);

// Builds a graph from explicit weights (edge i gets weights[i]). Used by tests
// and the Python bindings.
SaliencyGraph graph_from_weights(std::size_t node_count, const std::vector<UnitEdge>& edges,
                                 const std::vector<double>& weights);

// "i j w" per stored upper-triangle entry.
void dump_affinity(const std::filesystem::path& path, const SaliencyGraph& graph);

}  // namespace salgraph

#endif  // SALGRAPH_SALIENCY_GRAPH_HPP_
