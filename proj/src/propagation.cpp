#include "salgraph/propagation.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "parallel.hpp"
#include "salgraph/error.hpp"

namespace salgraph {

std::vector<float> background_distance(const VideoVolume& lab) {
  const Dims& d = lab.dims();
  const std::size_t C = lab.channels(), T = d.frames, P = d.frame_size();
  std::vector<float> dist(d.voxels(), 0.0f);
  detail::parallel_for(P, [&](std::size_t p) {
    std::vector<float> series(T);
    std::vector<float> median(C);
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t f = 0; f < T; ++f) series[f] = lab.at(f * P + p, c);
      auto mid = series.begin() + static_cast<std::ptrdiff_t>((T - 1) / 2);
      std::nth_element(series.begin(), mid, series.end());
      median[c] = *mid;
    }
    for (std::size_t f = 0; f < T; ++f) {
      double s = 0.0;
      for (std::size_t c = 0; c < C; ++c) {
        const double diff = static_cast<double>(lab.at(f * P + p, c)) - median[c];
        s += diff * diff;
      }
      dist[f * P + p] = static_cast<float>(std::sqrt(s));
    }
  });
  return dist;
}

double otsu_threshold(std::span<const float> values) {
  constexpr std::size_t kBins = 256;
  double vmax = 0.0;
  for (float v : values) vmax = std::max(vmax, static_cast<double>(v));
  if (!(vmax > 0.0)) return std::numeric_limits<double>::infinity();

  std::vector<double> count(kBins, 0.0), sum(kBins, 0.0);
  for (float v : values) {
    const auto bin = std::min<std::size_t>(
        kBins - 1, static_cast<std::size_t>(static_cast<double>(v) / vmax * kBins));
    count[bin] += 1.0;
    sum[bin] += v;
  }
  double total_n = 0.0, total_s = 0.0;
  for (std::size_t b = 0; b < kBins; ++b) {
    total_n += count[b];
    total_s += sum[b];
  }
  double best = -1.0;
  std::size_t best_bin = 0;
  double n0 = 0.0, s0 = 0.0;
  for (std::size_t k = 0; k + 1 < kBins; ++k) {
    n0 += count[k];
    s0 += sum[k];
    const double n1 = total_n - n0;
    if (n0 == 0.0 || n1 == 0.0) continue;
    const double diff = s0 / n0 - (total_s - s0) / n1;
    const double between = n0 * n1 * diff * diff;
    if (between > best) {
      best = between;
      best_bin = k;
    }
  }
  return static_cast<double>(best_bin + 1) * vmax / kBins;
}

std::vector<std::uint8_t> foreground_mask(const VideoVolume& lab) {
  const auto dist = background_distance(lab);
  const double t = otsu_threshold(dist);
  std::vector<std::uint8_t> mask(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) mask[i] = dist[i] >= t ? 1 : 0;
  return mask;
}

SeedVector MedianOtsuSeed::seed(const VideoVolume& lab, const LabelVolume& labels) const {
  if (lab.dims() != labels.dims()) throw DataError("seed: labels do not match the video");
  const std::size_t N = labels.unit_count();
  SeedVector out;
  if (lab.dims().frames < 2) {
    std::fprintf(stderr, "warning: single-frame input, using uniform seed\n");
    out.q = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(N), 1.0 / static_cast<double>(N));
    out.single_frame = true;
    return out;
  }
  const auto mask = foreground_mask(lab);
  Eigen::VectorXd fg = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N));
  Eigen::VectorXd size = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N));
  for (std::size_t v = 0; v < mask.size(); ++v) {
    size[labels[v]] += 1.0;
    fg[labels[v]] += mask[v];
  }
  out.q = fg.cwiseQuotient(size);
  out.empty = !(out.q.maxCoeff() > 0.0);
  return out;
}

SeedVector compute_seed(const VideoVolume& lab, const LabelVolume& labels) {
  return MedianOtsuSeed{}.seed(lab, labels);
}

void validate(const PropagationConfig& cfg) {
  if (!(cfg.mu > 0.0)) throw ConfigError("mu must be > 0");
  if (!(cfg.iter_tol > 0.0)) throw ConfigError("iter_tol must be > 0");
  if (cfg.max_iter < 1) throw ConfigError("max_iter must be >= 1");
}

namespace {

Eigen::VectorXd inv_sqrt_degrees(const SaliencyGraph& graph) {
  Eigen::VectorXd s(graph.degrees.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    s[i] = graph.degrees[i] > 0.0 ? 1.0 / std::sqrt(graph.degrees[i]) : 0.0;
  return s;
}

void check_sizes(const SaliencyGraph& graph, const Eigen::VectorXd& v, const char* what) {
  if (static_cast<std::size_t>(v.size()) != graph.node_count)
    throw DataError(std::string(what) + " has length " + std::to_string(v.size()) +
                    ", graph has " + std::to_string(graph.node_count) + " nodes");
}

}  // namespace

SparseMatrix normalized_affinity(const SaliencyGraph& graph) {
  const Eigen::VectorXd s = inv_sqrt_degrees(graph);
  SparseMatrix out = graph.affinity;
  // Scale by each factor separately: the product d_i * d_j may underflow.
  for (Eigen::Index col = 0; col < out.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(out, col); it; ++it)
      it.valueRef() = it.value() * s[it.row()] * s[it.col()];
  return out;
}

SaliencyScores solve_closed_form(const SaliencyGraph& graph, const Eigen::VectorXd& q,
                                 const PropagationConfig& cfg) {
  validate(cfg);
  if (graph.node_count == 0) throw DataError("cannot propagate on an empty graph");
  check_sizes(graph, q, "seed vector");

  const double alpha = 1.0 / (1.0 + cfg.mu);
  const SparseMatrix S = normalized_affinity(graph);
  SaliencyScores out;

  if (cfg.solver == SolverKind::kDirect) {
    SparseMatrix A(S.rows(), S.cols());
    A.setIdentity();
    A -= alpha * S;
    // A is symmetric positive definite: eig(S) lies in [-1, 1] and alpha < 1.
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw RuntimeFailure("LDLT factorization failed");
    out.g = ldlt.solve(q);
    if (ldlt.info() != Eigen::Success) throw RuntimeFailure("LDLT solve failed");
    return out;
  }

  // Fixed point g <- alpha S g + q contracts with factor alpha in the 2-norm,
  // so |g* - g_k+1| <= alpha / (1 - alpha) |g_k+1 - g_k|.
  const double step_tol = cfg.iter_tol * (1.0 - alpha) / alpha;
  Eigen::VectorXd g = q;
  for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
    Eigen::VectorXd next = alpha * (S * g) + q;
    const double step = (next - g).norm();
    g.swap(next);
    if (step <= step_tol) {
      out.g = std::move(g);
      out.iterations = it;
      return out;
    }
  }
  throw RuntimeFailure("iterative solver did not converge in " + std::to_string(cfg.max_iter) +
                       " iterations");
}

Eigen::VectorXd energy_gradient(const SaliencyGraph& graph, const Eigen::VectorXd& q, double mu,
                                const Eigen::VectorXd& h) {
  check_sizes(graph, q, "seed vector");
  check_sizes(graph, h, "point");
  const SparseMatrix S = normalized_affinity(graph);
  Eigen::VectorXd grad = -(S * h) + mu * (h - q);
  for (Eigen::Index i = 0; i < h.size(); ++i)
    if (graph.degrees[i] > 0.0) grad[i] += h[i];
  return grad;
}

double ranking_energy(const SaliencyGraph& graph, const Eigen::VectorXd& q, double mu,
                      const Eigen::VectorXd& h) {
  check_sizes(graph, q, "seed vector");
  check_sizes(graph, h, "point");
  const Eigen::VectorXd s = inv_sqrt_degrees(graph);
  double smooth = 0.0;
  for (Eigen::Index col = 0; col < graph.affinity.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(graph.affinity, col); it; ++it) {
      if (it.row() >= it.col()) continue;
      const double diff = h[it.row()] * s[it.row()] - h[it.col()] * s[it.col()];
      smooth += it.value() * diff * diff;
    }
  return 0.5 * (smooth + mu * (h - q).squaredNorm());
}

double stationarity_residual_at(const SaliencyGraph& graph, const Eigen::VectorXd& q, double mu,
                                const Eigen::VectorXd& h) {
  const Eigen::VectorXd grad = energy_gradient(graph, q, mu, h);
  double r = 0.0;
  for (Eigen::Index i = 0; i < grad.size(); ++i)
    if (graph.degrees[i] > 0.0) r = std::max(r, std::abs(grad[i]));
  return r;
}

double verify_stationarity(const SaliencyGraph& graph, const Eigen::VectorXd& q,
                           const PropagationConfig& cfg, const SaliencyScores& g) {
  validate(cfg);
  const Eigen::VectorXd h = (cfg.mu / (1.0 + cfg.mu)) * g.g;
  return stationarity_residual_at(graph, q, cfg.mu, h);
}

SaliencyScores normalize_scores(const SaliencyScores& scores) {
  const auto& g = scores.g;
  if (!g.allFinite()) throw DataError("non-finite saliency scores");
  SaliencyScores out;
  out.iterations = scores.iterations;
  if (g.size() == 0) return out;
  const double lo = g.minCoeff(), hi = g.maxCoeff();
  if (!(hi > lo)) {
    out.g = Eigen::VectorXd::Constant(g.size(), 0.5);
    out.constant = true;
    return out;
  }
  out.g = ((g.array() - lo) / (hi - lo)).matrix();
  return out;
}

void dump_vector(const std::filesystem::path& path, const Eigen::VectorXd& v) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw RuntimeFailure("cannot open " + path.string());
  char line[40];
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::snprintf(line, sizeof line, "%.17g\n", v[i]);
    os << line;
  }
}

}  // namespace salgraph
