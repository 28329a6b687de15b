#include <cstdlib>

#include "cutscore/kernels.hpp"

namespace cutscore::kernels {
namespace {

std::uint64_t sum_bytes(const std::uint8_t* data, std::size_t n) {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < n; ++i) total += data[i];
  return total;
}

void rgb_to_hsv_planes(const std::uint8_t* rgb, std::size_t pixels,
                       std::uint8_t* h, std::uint8_t* s, std::uint8_t* v) {
  for (std::size_t i = 0; i < pixels; ++i) {
    const Hsv8 px = rgb_to_hsv8(rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]);
    h[i] = px.h;
    s[i] = px.s;
    v[i] = px.v;
  }
}

HsvSums hsv_diff_sums(const std::uint8_t* h0, const std::uint8_t* s0,
                      const std::uint8_t* v0, const std::uint8_t* h1,
                      const std::uint8_t* s1, const std::uint8_t* v1,
                      std::size_t pixels) {
  HsvSums sums;
  for (std::size_t i = 0; i < pixels; ++i) {
    sums.hue += static_cast<std::uint64_t>(hue_distance(h0[i], h1[i]));
    sums.sat += static_cast<std::uint64_t>(std::abs(int{s0[i]} - int{s1[i]}));
    sums.val += static_cast<std::uint64_t>(std::abs(int{v0[i]} - int{v1[i]}));
  }
  return sums;
}

void accumulate_i16(const std::int16_t* src, std::int32_t* acc, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += src[i];
}

std::uint32_t peak_abs_i32(const std::int32_t* acc, std::size_t n) {
  std::uint32_t peak = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t x = acc[i];
    const auto mag = static_cast<std::uint32_t>(x < 0 ? -x : x);
    if (mag > peak) peak = mag;
  }
  return peak;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar",        &sum_bytes,      &rgb_to_hsv_planes,
                                 &hsv_diff_sums, &accumulate_i16, &peak_abs_i32};
  return table;
}

}  // namespace cutscore::kernels
