#ifndef SALGRAPH_TESTS_SUPPORT_HPP_
#define SALGRAPH_TESTS_SUPPORT_HPP_

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "image_io.hpp"
#include "salgraph/saliency_graph.hpp"
#include "salgraph/video_volume.hpp"

namespace test {

// Unique scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "salgraph") {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            (tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

inline void write_rgb_png(const std::filesystem::path& p, int rows, int cols,
                          const std::vector<std::uint8_t>& px) {
  salgraph::detail::write_png8(p, {rows, cols, 3, px});
}

inline void write_gray_png(const std::filesystem::path& p, int rows, int cols,
                           const std::vector<std::uint8_t>& px) {
  salgraph::detail::write_png8(p, {rows, cols, 1, px});
}

// Random symmetric sparse graph; each node gets at least one edge when
// `no_isolated` is set.
struct RandomGraph {
  std::size_t n = 0;
  std::vector<salgraph::UnitEdge> edges;
  std::vector<double> weights;
};

inline RandomGraph random_graph(std::mt19937& rng, std::size_t n, double density,
                                bool no_isolated) {
  RandomGraph g;
  g.n = n;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<char>> has(n, std::vector<char>(n, 0));
  auto add = [&](std::uint32_t i, std::uint32_t j) {
    if (i == j || has[i][j]) return;
    if (j < i) std::swap(i, j);
    has[i][j] = has[j][i] = 1;
    g.edges.emplace_back(i, j);
    g.weights.push_back(0.05 + 0.95 * u(rng));
  };
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j)
      if (u(rng) < density) add(i, j);
  if (no_isolated && n > 1) {
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(n - 1));
    for (std::uint32_t i = 0; i < n; ++i) {
      bool any = false;
      for (std::size_t j = 0; j < n; ++j) any = any || has[i][j];
      while (!any) {
        const auto j = pick(rng);
        if (j != i) {
          add(i, j);
          any = true;
        }
      }
    }
  }
  return g;
}

inline std::vector<std::vector<double>> dense(const RandomGraph& g) {
  std::vector<std::vector<double>> w(g.n, std::vector<double>(g.n, 0.0));
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    w[g.edges[e].first][g.edges[e].second] = g.weights[e];
    w[g.edges[e].second][g.edges[e].first] = g.weights[e];
  }
  return w;
}

}  // namespace test

#endif  // SALGRAPH_TESTS_SUPPORT_HPP_
