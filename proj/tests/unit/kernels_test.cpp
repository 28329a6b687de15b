#include "cutscore/kernels.hpp"

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

namespace cutscore::kernels {
namespace {

std::vector<const KernelTable*> simd_tables() {
  std::vector<const KernelTable*> out;
  if (const KernelTable* t = avx2_kernels()) out.push_back(t);
  if (const KernelTable* t = neon_kernels()) out.push_back(t);
  return out;
}

std::vector<std::uint8_t> random_bytes(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng());
  return out;
}

// Floating-point hexagonal HSV, rescaled to 0..255 and rounded half up.
// Returns -1 for the hue when the value sits too close to a rounding
// boundary for double arithmetic to decide.
struct RefHsv {
  int h, s, v;
};

RefHsv reference_hsv(int r, int g, int b) {
  const int mx = std::max({r, g, b});
  const int mn = std::min({r, g, b});
  const double delta = mx - mn;
  RefHsv out{0, 0, mx};
  if (mx == 0) return out;
  out.s = static_cast<int>(std::floor(255.0 * delta / mx + 0.5));
  if (delta == 0) return out;
  double deg;
  if (mx == r) {
    deg = 60.0 * std::fmod((g - b) / delta + 6.0, 6.0);
  } else if (mx == g) {
    deg = 60.0 * ((b - r) / delta + 2.0);
  } else {
    deg = 60.0 * ((r - g) / delta + 4.0);
  }
  const double scaled = deg / 360.0 * 256.0;
  const double frac = scaled - std::floor(scaled);
  if (std::abs(frac - 0.5) < 1e-9) {
    out.h = -1;
  } else {
    out.h = static_cast<int>(std::floor(scaled + 0.5)) & 0xff;
  }
  return out;
}

TEST(HsvConvention, SpecExamples) {
  EXPECT_EQ(rgb_to_hsv8(0, 0, 0), (Hsv8{0, 0, 0}));
  EXPECT_EQ(rgb_to_hsv8(255, 0, 0), (Hsv8{0, 255, 255}));
  EXPECT_EQ(rgb_to_hsv8(255, 255, 255), (Hsv8{0, 0, 255}));
}

TEST(HsvConvention, MatchesFloatingPointModelOnGrid) {
  int undecided = 0;
  for (int r = 0; r < 256; r += 3) {
    for (int g = 0; g < 256; g += 5) {
      for (int b = 0; b < 256; b += 7) {
        const Hsv8 got = rgb_to_hsv8(r, g, b);
        const RefHsv want = reference_hsv(r, g, b);
        ASSERT_EQ(got.v, want.v);
        ASSERT_EQ(got.s, want.s) << r << "," << g << "," << b;
        if (want.h < 0) {
          ++undecided;
          continue;
        }
        ASSERT_EQ(got.h, want.h) << r << "," << g << "," << b;
      }
    }
  }
  EXPECT_LT(undecided, 100);
}

TEST(HsvConvention, HueDistanceIsShorterArc) {
  EXPECT_EQ(hue_distance(0, 255), 1);
  EXPECT_EQ(hue_distance(10, 138), 128);
  EXPECT_EQ(hue_distance(10, 139), 127);
  EXPECT_EQ(hue_distance(200, 200), 0);
}

// Every one of the 2^24 colors through each SIMD conversion.
TEST(KernelEquivalence, HsvPlanesExhaustive) {
  const auto tables = simd_tables();
  if (tables.empty()) GTEST_SKIP() << "no SIMD variant on this CPU";
  constexpr std::size_t kBlock = 1u << 20;
  std::vector<std::uint8_t> rgb(3 * kBlock);
  std::vector<std::uint8_t> h0(kBlock), s0(kBlock), v0(kBlock);
  std::vector<std::uint8_t> h1(kBlock), s1(kBlock), v1(kBlock);
  for (std::uint32_t base = 0; base < (1u << 24); base += kBlock) {
    for (std::uint32_t i = 0; i < kBlock; ++i) {
      const std::uint32_t c = base + i;
      rgb[3 * i] = static_cast<std::uint8_t>(c >> 16);
      rgb[3 * i + 1] = static_cast<std::uint8_t>(c >> 8);
      rgb[3 * i + 2] = static_cast<std::uint8_t>(c);
    }
    scalar_kernels().rgb_to_hsv_planes(rgb.data(), kBlock, h0.data(), s0.data(), v0.data());
    for (const KernelTable* t : tables) {
      t->rgb_to_hsv_planes(rgb.data(), kBlock, h1.data(), s1.data(), v1.data());
      for (std::uint32_t i = 0; i < kBlock; ++i) {
        if (h0[i] != h1[i] || s0[i] != s1[i] || v0[i] != v1[i]) {
          FAIL() << t->name << " differs at color 0x" << std::hex << base + i;
        }
      }
    }
  }
}

TEST(KernelEquivalence, ScalarPlanesMatchPerPixelReference) {
  const auto rgb = random_bytes(3 * 1001, 7);
  std::vector<std::uint8_t> h(1001), s(1001), v(1001);
  scalar_kernels().rgb_to_hsv_planes(rgb.data(), 1001, h.data(), s.data(), v.data());
  for (std::size_t i = 0; i < 1001; ++i) {
    const Hsv8 want = rgb_to_hsv8(rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]);
    ASSERT_EQ(h[i], want.h);
    ASSERT_EQ(s[i], want.s);
    ASSERT_EQ(v[i], want.v);
  }
}

// Lengths straddle every vector width and tail case.
class LengthSweep : public ::testing::TestWithParam<std::size_t> {};

TEST_P(LengthSweep, SumBytes) {
  const std::size_t n = GetParam();
  const auto data = random_bytes(n + 1, n);
  std::uint64_t want = 0;
  for (std::size_t i = 0; i < n; ++i) want += data[i + 1];
  EXPECT_EQ(scalar_kernels().sum_bytes(data.data() + 1, n), want);
  for (const KernelTable* t : simd_tables()) {
    EXPECT_EQ(t->sum_bytes(data.data() + 1, n), want) << t->name;
  }
}

TEST_P(LengthSweep, HsvDiffSums) {
  const std::size_t n = GetParam();
  const auto a = random_bytes(3 * n + 3, 11 + n);
  const auto b = random_bytes(3 * n + 3, 99 + n);
  HsvSums want;
  for (std::size_t i = 0; i < n; ++i) {
    want.hue += static_cast<std::uint64_t>(hue_distance(a[i], b[i]));
    want.sat += static_cast<std::uint64_t>(std::abs(a[n + i] - b[n + i]));
    want.val += static_cast<std::uint64_t>(std::abs(a[2 * n + i] - b[2 * n + i]));
  }
  const auto run = [&](const KernelTable& t) {
    return t.hsv_diff_sums(a.data(), a.data() + n, a.data() + 2 * n, b.data(), b.data() + n,
                           b.data() + 2 * n, n);
  };
  EXPECT_EQ(run(scalar_kernels()), want);
  for (const KernelTable* t : simd_tables()) EXPECT_EQ(run(*t), want) << t->name;
}

TEST_P(LengthSweep, HsvPlanes) {
  const std::size_t n = GetParam();
  const auto rgb = random_bytes(3 * n, 5 + n);
  std::vector<std::uint8_t> h0(n), s0(n), v0(n), h1(n), s1(n), v1(n);
  scalar_kernels().rgb_to_hsv_planes(rgb.data(), n, h0.data(), s0.data(), v0.data());
  for (const KernelTable* t : simd_tables()) {
    t->rgb_to_hsv_planes(rgb.data(), n, h1.data(), s1.data(), v1.data());
    EXPECT_EQ(h0, h1) << t->name;
    EXPECT_EQ(s0, s1) << t->name;
    EXPECT_EQ(v0, v1) << t->name;
  }
}

TEST_P(LengthSweep, AccumulateAndPeak) {
  const std::size_t n = GetParam();
  std::mt19937_64 rng(n);
  std::vector<std::int16_t> src(n);
  for (auto& s : src) s = static_cast<std::int16_t>(rng());
  if (n > 0) src[n / 2] = -32768;
  std::vector<std::int32_t> base(n);
  for (auto& a : base) a = static_cast<std::int32_t>(rng() % 2000001) - 1000000;

  std::vector<std::int32_t> want = base;
  scalar_kernels().accumulate_i16(src.data(), want.data(), n);
  for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(want[i], base[i] + src[i]);
  std::uint32_t peak = 0;
  for (std::int32_t x : want) peak = std::max<std::uint32_t>(peak, static_cast<std::uint32_t>(std::abs(x)));
  EXPECT_EQ(scalar_kernels().peak_abs_i32(want.data(), n), peak);

  for (const KernelTable* t : simd_tables()) {
    std::vector<std::int32_t> got = base;
    t->accumulate_i16(src.data(), got.data(), n);
    EXPECT_EQ(got, want) << t->name;
    EXPECT_EQ(t->peak_abs_i32(want.data(), n), peak) << t->name;
  }
}

INSTANTIATE_TEST_SUITE_P(Lengths, LengthSweep,
                         ::testing::Values(0, 1, 7, 8, 15, 16, 17, 31, 32, 33, 63, 64, 65, 100,
                                           255, 1000, 4099));

TEST(Dispatch, ForcedScalarIsHonored) {
  const char* forced = std::getenv("CUTSCORE_SIMD");
  if (forced != nullptr && std::string_view(forced) == "scalar") {
    EXPECT_EQ(active_kernels().name, scalar_kernels().name);
  } else if (avx2_kernels() != nullptr) {
    EXPECT_EQ(active_kernels().name, avx2_kernels()->name);
  }
}

}  // namespace
}  // namespace cutscore::kernels
