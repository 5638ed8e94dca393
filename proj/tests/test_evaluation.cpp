#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "salgraph/error.hpp"
#include "salgraph/evaluation.hpp"
#include "support.hpp"

using namespace salgraph;

namespace {

GroundTruthMasks masks(Dims d, std::vector<std::uint8_t> m) { return {d, std::move(m)}; }

// Map values quantized to the sweep grid so the trapezoid is exact.
SaliencyMap grid_map(std::mt19937& rng, Dims d) {
  std::uniform_int_distribution<int> k(0, 256);
  SaliencyMap m{d, std::vector<float>(d.voxels())};
  for (float& x : m.values) x = static_cast<float>(k(rng)) / 256.0f;
  return m;
}

GroundTruthMasks random_gt(std::mt19937& rng, Dims d) {
  std::bernoulli_distribution b(0.3);
  GroundTruthMasks gt{d, std::vector<std::uint8_t>(d.voxels())};
  for (auto& x : gt.mask) x = b(rng);
  gt.mask[0] = 1;
  gt.mask[1] = 0;
  return gt;
}

}  // namespace

TEST_CASE("roc_auc examples") {
  const Dims d{2, 3, 2};
  const std::vector<std::uint8_t> m{1, 0, 0, 1, 1, 0, 0, 0, 1, 1, 0, 0};
  const auto gt = masks(d, m);

  SUBCASE("map equal to gt") {
    SaliencyMap s{d, std::vector<float>(m.begin(), m.end())};
    CHECK(roc_auc(s, gt).auc == 1.0);
  }
  SUBCASE("inverted map") {
    SaliencyMap s{d, {}};
    for (auto x : m) s.values.push_back(1.0f - x);
    CHECK(roc_auc(s, gt).auc == 0.0);
  }
  SUBCASE("constant map is exactly 0.5") {
    for (float c : {0.0f, 0.3f, 1.0f}) {
      SaliencyMap s{d, std::vector<float>(d.voxels(), c)};
      CHECK(roc_auc(s, gt).auc == 0.5);
    }
  }
  SUBCASE("curve is monotone from (0,0) to (1,1)") {
    std::mt19937 rng(1);
    const auto s = grid_map(rng, d);
    const auto roc = roc_auc(s, gt);
    CHECK(roc.points.size() == kRocThresholds + 1);
    CHECK(roc.points.front().fpr == 0.0);
    CHECK(roc.points.front().tpr == 0.0);
    CHECK(roc.points.back().fpr == 1.0);
    CHECK(roc.points.back().tpr == 1.0);
    for (std::size_t i = 1; i < roc.points.size(); ++i) {
      CHECK(roc.points[i].fpr >= roc.points[i - 1].fpr);
      CHECK(roc.points[i].tpr >= roc.points[i - 1].tpr);
    }
  }
  SUBCASE("degenerate ground truth") {
    SaliencyMap s{d, std::vector<float>(d.voxels(), 0.5f)};
    CHECK_THROWS_AS(roc_auc(s, masks(d, std::vector<std::uint8_t>(d.voxels(), 1))), DataError);
    CHECK_THROWS_AS(roc_auc(s, masks(d, std::vector<std::uint8_t>(d.voxels(), 0))), DataError);
  }
  SUBCASE("size mismatch") {
    SaliencyMap s{{1, 1, 1}, {0.5f}};
    CHECK_THROWS_AS(roc_auc(s, gt), DataError);
  }
}

TEST_CASE("threshold sweep counts at exact grid values") {
  // One positive at 0.5 and one negative just below it: separated by the
  // k=128 threshold.
  const Dims d{1, 2, 1};
  const auto gt = masks(d, {1, 0});
  SaliencyMap s{d, {0.5f, std::nextafter(0.5f, 0.0f)}};
  CHECK(roc_auc(s, gt).auc == 1.0);
  s.values = {0.5f, 0.5f};
  CHECK(roc_auc(s, gt).auc == 0.5);
}

TEST_CASE("trapezoid AUC matches Mann-Whitney") {
  std::mt19937 rng(99);
  const Dims d{6, 7, 3};
  for (int trial = 0; trial < 30; ++trial) {
    const auto gt = random_gt(rng, d);
    SUBCASE("grid-valued maps agree to rounding") {
      const auto s = grid_map(rng, d);
      CHECK(roc_auc(s, gt).auc == doctest::Approx(oracle::mann_whitney_auc(s.values, gt.mask)).epsilon(1e-12));
    }
    SUBCASE("continuous maps within 1/256") {
      std::uniform_real_distribution<float> u(0.0f, 1.0f);
      SaliencyMap s{d, std::vector<float>(d.voxels())};
      for (float& x : s.values) x = u(rng);
      CHECK(std::abs(roc_auc(s, gt).auc - oracle::mann_whitney_auc(s.values, gt.mask)) <= 1.0 / 256);
    }
  }
}

TEST_CASE("AUC invariant under strictly monotone transforms") {
  std::mt19937 rng(5);
  const Dims d{5, 5, 2};
  const auto gt = random_gt(rng, d);
  // Values on a 1/128 grid so an order-preserving transform that keeps
  // distinct values in distinct sweep bins exists.
  std::uniform_int_distribution<int> k(0, 128);
  SaliencyMap s{d, std::vector<float>(d.voxels())};
  for (float& x : s.values) x = static_cast<float>(k(rng)) / 128.0f;

  SaliencyMap affine = s;
  for (float& x : affine.values) x = 0.5f * x + 0.25f;
  CHECK(roc_auc(s, gt).auc == roc_auc(affine, gt).auc);

  SaliencyMap squared = s;
  for (float& x : squared.values) x = x * x;
  CHECK(oracle::mann_whitney_auc(s.values, gt.mask) ==
        oracle::mann_whitney_auc(squared.values, gt.mask));
}

TEST_CASE("nss") {
  SUBCASE("50/50 split, map = gt") {
    const Dims d{1, 2, 1};
    const SaliencyMap s{d, {1.0f, 0.0f}};
    CHECK(nss(s, masks(d, {1, 0})) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("positives at the global mean") {
    const Dims d{1, 3, 1};
    const SaliencyMap s{d, {0.0f, 0.5f, 1.0f}};
    CHECK(nss(s, masks(d, {0, 1, 0})) == doctest::Approx(0.0));
  }
  SUBCASE("zero variance") {
    const Dims d{1, 2, 1};
    const SaliencyMap s{d, {0.3f, 0.3f}};
    CHECK_THROWS_WITH_AS(nss(s, masks(d, {1, 0})), doctest::Contains("undefined NSS"), DataError);
  }
  SUBCASE("empty ground truth") {
    const Dims d{1, 2, 1};
    const SaliencyMap s{d, {0.3f, 0.6f}};
    CHECK_THROWS_AS(nss(s, masks(d, {0, 0})), DataError);
  }
  SUBCASE("affine invariance") {
    std::mt19937 rng(12);
    const Dims d{4, 4, 4};
    const auto gt = random_gt(rng, d);
    const auto s = grid_map(rng, d);
    SaliencyMap t = s;
    for (float& x : t.values) x = 0.5f * x + 0.25f;  // exact in binary
    CHECK(nss(s, gt) == doctest::Approx(nss(t, gt)).epsilon(1e-12));
  }
}

TEST_CASE("evaluate_sequence and CSV files") {
  test::TempDir tmp;
  const Dims d{2, 2, 3};
  // Frame 3 has no positives.
  const auto gt = masks(d, {1, 0, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0});
  const SaliencyMap s{d, std::vector<float>(gt.mask.begin(), gt.mask.end())};
  const auto r = evaluate_sequence("clip", s, gt);
  CHECK(r.auc == 1.0);
  CHECK(r.nss > 0.0);
  CHECK(r.n_pos == 3);
  CHECK(r.n_neg == 9);
  REQUIRE(r.frame_auc.size() == 3);
  CHECK(r.frame_auc[0] == 1.0);
  CHECK(std::isnan(r.frame_auc[2]));

  auto r2 = r;
  r2.sequence = "other";
  r2.auc = 0.123456789;
  write_metrics_csv(tmp / "m.csv", {r, r2});
  const auto back = read_metrics_csv(tmp / "m.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[0].sequence == "clip");
  CHECK(back[1].auc == doctest::Approx(0.123456789).epsilon(1e-7));
  CHECK(std::abs(back[0].nss - r.nss) < 1e-6);
  CHECK(back[1].n_pos == 3);

  write_roc_csv(tmp / "roc.csv", r.roc);
  const auto roc_text = test::slurp(tmp / "roc.csv");
  CHECK(roc_text.rfind("threshold,fpr,tpr\n", 0) == 0);
  CHECK(std::count(roc_text.begin(), roc_text.end(), '\n') == 1 + kRocThresholds + 1);

  write_roc_points(tmp / "roc.dat", r.roc);
  CHECK(test::slurp(tmp / "roc.dat").front() == '#');

  write_frame_auc_csv(tmp / "f.csv", r);
  const auto f = test::slurp(tmp / "f.csv");
  CHECK(f.find("3,nan") != std::string::npos);
  CHECK(f.find("mean,1.00000000") != std::string::npos);
}
