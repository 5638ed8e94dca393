#include <doctest.h>

#include <cmath>
#include <limits>

#include "salgraph/error.hpp"
#include "salgraph/features.hpp"
#include "support.hpp"

using namespace salgraph;

namespace {

std::string fvol_bytes(std::uint32_t m, std::uint32_t n, std::uint32_t t, std::uint32_t c,
                       std::uint8_t dtype, const std::vector<float>& vals) {
  std::string s = "FVOL";
  auto u32 = [&](std::uint32_t x) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
  };
  u32(1);
  u32(m);
  u32(n);
  u32(t);
  u32(c);
  s.push_back(static_cast<char>(dtype));
  for (float f : vals) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    u32(bits);
  }
  return s;
}

}  // namespace

TEST_CASE("pooling: max within a frame, mean across frames") {
  // One unit over two frames of 1x2 pixels, one channel.
  const Dims d{1, 2, 2};
  const FeatureTensor t(d, 1, {1.0f, 3.0f, 5.0f, 2.0f});
  const LabelVolume lv(d, {0, 0, 0, 0});
  const auto table = pool_unit_features(t, lv);
  REQUIRE(table.units == 1);
  CHECK(table.row(0)[0] == doctest::Approx((3.0 + 5.0) / 2.0));
}

TEST_CASE("pooling: frames where a unit is absent are skipped") {
  const Dims d{1, 2, 3};
  const FeatureTensor t(d, 2, {1, 10, 2, 20, 3, 30, 4, 40, 5, 50, 6, 60});
  // unit 1 only in frame 2
  const LabelVolume lv(d, {0, 0, 1, 0, 0, 0});
  const auto table = pool_unit_features(t, lv);
  CHECK(table.row(1)[0] == doctest::Approx(3.0));
  CHECK(table.row(1)[1] == doctest::Approx(30.0));
  CHECK(table.row(0)[0] == doctest::Approx((2.0 + 4.0 + 6.0) / 3.0));
  CHECK(table.row(0)[1] == doctest::Approx((20.0 + 40.0 + 60.0) / 3.0));
}

TEST_CASE("pooling: per-channel max is taken independently") {
  const Dims d{1, 2, 1};
  const FeatureTensor t(d, 2, {9, 0, 0, 7});
  const auto table = pool_unit_features(t, LabelVolume(d, {0, 0}));
  CHECK(table.row(0)[0] == 9.0);
  CHECK(table.row(0)[1] == 7.0);
}

TEST_CASE("pooling: random volumes against a direct loop") {
  std::mt19937 rng(21);
  std::uniform_real_distribution<float> u(-3.0f, 3.0f);
  for (int trial = 0; trial < 5; ++trial) {
    const Dims d{3, 4, 5};
    const std::size_t C = 3;
    FeatureTensor t(d, C);
    for (float& x : t.values()) x = u(rng);
    std::uniform_int_distribution<std::uint32_t> lab(0, 5);
    std::vector<std::uint32_t> raw(d.voxels());
    for (auto& l : raw) l = lab(rng);
    const auto lv = make_dense(d, raw);
    const auto table = pool_unit_features(t, lv);
    for (std::uint32_t unit = 0; unit < lv.unit_count(); ++unit)
      for (std::size_t c = 0; c < C; ++c) {
        double sum = 0.0;
        int frames = 0;
        for (std::size_t f = 0; f < d.frames; ++f) {
          double best = -std::numeric_limits<double>::infinity();
          for (std::size_t p = 0; p < d.frame_size(); ++p)
            if (lv[f * d.frame_size() + p] == unit)
              best = std::max(best, static_cast<double>(t.voxel(f * d.frame_size() + p)[c]));
          if (std::isfinite(best)) {
            sum += best;
            ++frames;
          }
        }
        CHECK(table.row(unit)[c] == doctest::Approx(sum / frames));
      }
  }
}

TEST_CASE("pooling rejects mismatched dims") {
  const FeatureTensor t(Dims{2, 2, 1}, 1);
  CHECK_THROWS_AS(pool_unit_features(t, LabelVolume(Dims{2, 2, 2}, std::vector<std::uint32_t>(8, 0))),
                  DataError);
}

TEST_CASE("lab feature tensor") {
  VideoVolume lab(Dims{1, 1, 1}, 3, ColorSpace::kLab);
  lab.at(0, 0) = 50.0f;
  lab.at(0, 1) = -3.0f;
  lab.at(0, 2) = 4.0f;
  const auto t = lab_feature_tensor(lab);
  CHECK(t.channels() == 3);
  CHECK(t.values() == std::vector<float>{50.0f, -3.0f, 4.0f});

  lab.at(0, 1) = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(lab_feature_tensor(lab), DataError);
}

TEST_CASE("FVOL format") {
  test::TempDir tmp;

  SUBCASE("round trip preserves every bit") {
    std::mt19937 rng(5);
    std::normal_distribution<float> n(0.0f, 10.0f);
    FeatureTensor t(Dims{3, 5, 2}, 4);
    for (float& x : t.values()) x = n(rng);
    write_fvol(tmp / "t.fvol", t);
    CHECK(read_fvol(tmp / "t.fvol") == t);
  }

  SUBCASE("byte layout matches a hand-built file") {
    const FeatureTensor t(Dims{1, 2, 1}, 1, {1.5f, -2.0f});
    write_fvol(tmp / "t.fvol", t);
    CHECK(test::slurp(tmp / "t.fvol") == fvol_bytes(1, 2, 1, 1, 1, {1.5f, -2.0f}));
  }

  SUBCASE("hand-built file from an external writer reads back") {
    std::ofstream(tmp / "ext.fvol", std::ios::binary) << fvol_bytes(2, 1, 1, 2, 1, {1, 2, 3, 4});
    const auto t = read_feature_tensor(tmp / "ext.fvol", Dims{2, 1, 1});
    CHECK(t.channels() == 2);
    CHECK(t.voxel(1)[0] == 3.0f);
  }

  SUBCASE("dimension mismatch") {
    write_fvol(tmp / "t.fvol", FeatureTensor(Dims{2, 2, 2}, 1));
    CHECK_THROWS_WITH_AS(read_feature_tensor(tmp / "t.fvol", Dims{2, 2, 3}),
                         doctest::Contains("dimension mismatch"), DataError);
  }

  SUBCASE("bad magic") {
    auto bytes = fvol_bytes(1, 1, 1, 1, 1, {0.0f});
    bytes[0] = 'X';
    std::ofstream(tmp / "m.fvol", std::ios::binary) << bytes;
    CHECK_THROWS_WITH_AS(read_fvol(tmp / "m.fvol"), doctest::Contains("bad magic"), DataError);
  }

  SUBCASE("unsupported dtype") {
    std::ofstream(tmp / "d.fvol", std::ios::binary) << fvol_bytes(1, 1, 1, 1, 2, {0.0f});
    CHECK_THROWS_AS(read_fvol(tmp / "d.fvol"), DataError);
  }

  SUBCASE("truncated payload") {
    auto bytes = fvol_bytes(2, 2, 1, 1, 1, {1, 2, 3, 4});
    bytes.resize(bytes.size() - 2);
    std::ofstream(tmp / "s.fvol", std::ios::binary) << bytes;
    CHECK_THROWS_WITH_AS(read_fvol(tmp / "s.fvol"), doctest::Contains("truncated"), DataError);
  }

  SUBCASE("non-finite values") {
    std::ofstream(tmp / "n.fvol", std::ios::binary)
        << fvol_bytes(1, 1, 1, 1, 1, {std::numeric_limits<float>::infinity()});
    CHECK_THROWS_AS(read_fvol(tmp / "n.fvol"), DataError);
  }

  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_fvol(tmp / "absent.fvol"), DataError);
  }
}
