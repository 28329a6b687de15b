#pragma once

// Data-parallel inner loops shared by frame statistics and stem mixing.
//
// Every kernel has a scalar reference implementation and optional SIMD
// variants. The variants are required to be bit-identical to the reference
// (all pixel kernels work on exact integer sums; the HSV conversion is
// defined by integer rounding rules that the float SIMD path reproduces
// exactly). The active table is chosen once at startup from CPU features
// and can be forced with CUTSCORE_SIMD=scalar|avx2|neon.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace cutscore::kernels {

struct HsvSums {
  std::uint64_t hue = 0;  // shorter circular arc, per pixel in [0,128]
  std::uint64_t sat = 0;
  std::uint64_t val = 0;

  friend bool operator==(const HsvSums&, const HsvSums&) = default;
};

struct KernelTable {
  std::string_view name;

  // Sum of all bytes in [data, data + n).
  std::uint64_t (*sum_bytes)(const std::uint8_t* data, std::size_t n);

  // Converts `pixels` interleaved RGB24 pixels to planar 8-bit HSV.
  void (*rgb_to_hsv_planes)(const std::uint8_t* rgb, std::size_t pixels,
                            std::uint8_t* h, std::uint8_t* s, std::uint8_t* v);

  // Per-channel sums of absolute plane differences; hue wraps at 256.
  HsvSums (*hsv_diff_sums)(const std::uint8_t* h0, const std::uint8_t* s0,
                           const std::uint8_t* v0, const std::uint8_t* h1,
                           const std::uint8_t* s1, const std::uint8_t* v1,
                           std::size_t pixels);

  // acc[i] += src[i]
  void (*accumulate_i16)(const std::int16_t* src, std::int32_t* acc,
                         std::size_t n);

  // max |acc[i]|, 0 for n == 0.
  std::uint32_t (*peak_abs_i32)(const std::int32_t* acc, std::size_t n);
};

const KernelTable& scalar_kernels();

// nullptr when the variant was not compiled in or the CPU lacks support.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

// Table selected for this process.
const KernelTable& active_kernels();

// Scalar reference for one pixel; the single definition of the HSV
// convention (all channels 0..255, hue of achromatic pixels 0).
struct Hsv8 {
  std::uint8_t h;
  std::uint8_t s;
  std::uint8_t v;

  friend bool operator==(const Hsv8&, const Hsv8&) = default;
};

constexpr Hsv8 rgb_to_hsv8(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const int max = r > g ? (r > b ? r : b) : (g > b ? g : b);
  const int min = r < g ? (r < b ? r : b) : (g < b ? g : b);
  const int delta = max - min;
  if (max == 0) return {0, 0, 0};
  // S = round_half_up(255 * delta / max)
  const int s = (2 * 255 * delta + max) / (2 * max);
  if (delta == 0) return {0, static_cast<std::uint8_t>(s), static_cast<std::uint8_t>(max)};

  // Hexagonal hue in sixths, rescaled so a full turn is 256.
  int sixths_num;  // hue * delta, in [0, 6 * delta)
  if (max == r) {
    sixths_num = g - b;
    if (sixths_num < 0) sixths_num += 6 * delta;
  } else if (max == g) {
    sixths_num = 2 * delta + (b - r);
  } else {
    sixths_num = 4 * delta + (r - g);
  }
  const int num = 256 * sixths_num;
  const int den = 6 * delta;
  const int h = ((2 * num + den) / (2 * den)) & 0xff;
  return {static_cast<std::uint8_t>(h), static_cast<std::uint8_t>(s),
          static_cast<std::uint8_t>(max)};
}

constexpr int hue_distance(std::uint8_t a, std::uint8_t b) {
  const int d = a > b ? a - b : b - a;
  return d > 128 ? 256 - d : d;
}

}  // namespace cutscore::kernels
