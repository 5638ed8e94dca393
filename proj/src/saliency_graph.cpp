#include "salgraph/saliency_graph.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "parallel.hpp"
#include "salgraph/error.hpp"

namespace salgraph {

std::vector<UnitEdge> compute_adjacency(const LabelVolume& labels, Connectivity conn) {
  return region_adjacency(labels, conn);
}

double rbf_affinity(std::span<const double> x, std::span<const double> y,
                    const KernelParams& params) {
  if (x.size() != y.size())
    throw DataError("descriptor length mismatch: " + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()));
  if (!(params.rho > 0.0)) throw ConfigError("rho must be > 0");
  double dist2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    dist2 += d * d;
  }
  if (params.per_channel_distance && !x.empty()) dist2 /= static_cast<double>(x.size());
  return std::exp(-dist2 / params.rho);
}

SaliencyGraph graph_from_weights(std::size_t node_count, const std::vector<UnitEdge>& edges,
                                 const std::vector<double>& weights) {
  if (edges.size() != weights.size()) throw DataError("edge and weight counts differ");
  SaliencyGraph g;
  g.node_count = node_count;
  g.edges = edges;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [i, j] = edges[e];
    if (i >= node_count || j >= node_count)
      throw DataError("edge references node outside [0, " + std::to_string(node_count) + ")");
    if (i == j) throw DataError("self loops are not allowed in the saliency graph");
    if (!(weights[e] >= 0.0) || !std::isfinite(weights[e]))
      throw DataError("affinities must be finite and non-negative");
    triplets.emplace_back(i, j, weights[e]);
    triplets.emplace_back(j, i, weights[e]);
  }
  const auto n = static_cast<Eigen::Index>(node_count);
  g.affinity.resize(n, n);
  // Duplicates would be summed by setFromTriplets; edges are expected unique.
  g.affinity.setFromTriplets(triplets.begin(), triplets.end());
  g.affinity.makeCompressed();
  g.degrees = Eigen::VectorXd::Zero(n);
  for (Eigen::Index col = 0; col < g.affinity.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(g.affinity, col); it; ++it) g.degrees[it.row()] += it.value();
  return g;
}

SaliencyGraph build_affinity(const UnitFeatureTable& features, const std::vector<UnitEdge>& edges,
                             const KernelParams& params) {
  if (!(params.rho > 0.0)) throw ConfigError("rho must be > 0");
  for (const auto& [i, j] : edges)
    if (i >= features.units || j >= features.units)
      throw DataError("edge (" + std::to_string(i) + ", " + std::to_string(j) +
                      ") references a unit without a descriptor");
  std::vector<double> weights(edges.size());
  detail::parallel_for(edges.size(), [&](std::size_t e) {
    weights[e] = rbf_affinity(features.row(edges[e].first), features.row(edges[e].second), params);
  });
  return graph_from_weights(features.units, edges, weights);
}

void dump_affinity(const std::filesystem::path& path, const SaliencyGraph& graph) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw RuntimeFailure("cannot open " + path.string());
  char line[96];
  for (Eigen::Index col = 0; col < graph.affinity.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(graph.affinity, col); it; ++it) {
      if (it.row() >= it.col()) continue;
      std::snprintf(line, sizeof line, "%ld %ld %.17g\n", static_cast<long>(it.row()),
                    static_cast<long>(it.col()), it.value());
      os << line;
    }
}

}  // namespace salgraph
