// NEON variants (AArch64, where Advanced SIMD is always present).

#include "cutscore/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>
#endif

namespace cutscore::kernels {

#if defined(__aarch64__)
namespace {

std::uint64_t sum_bytes(const std::uint8_t* data, std::size_t n) {
  uint64x2_t acc = vdupq_n_u64(0);
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc = vpadalq_u32(acc, vpaddlq_u16(vpaddlq_u8(vld1q_u8(data + i))));
  }
  std::uint64_t total = vaddvq_u64(acc);
  for (; i < n; ++i) total += data[i];
  return total;
}

// floor(num / den + 1/2); exact for num < 2^24, den <= 1530 (see avx2.cpp).
inline int32x4_t round_div(int32x4_t num, int32x4_t den) {
  const float32x4_t q = vdivq_f32(vcvtq_f32_s32(num), vcvtq_f32_s32(den));
  return vcvtq_s32_f32(vrndmq_f32(vaddq_f32(q, vdupq_n_f32(0.5f))));
}

struct Hsv4 {
  int32x4_t h, s, v;
};

inline Hsv4 hsv4(int32x4_t r, int32x4_t g, int32x4_t b) {
  const int32x4_t zero = vdupq_n_s32(0);
  const int32x4_t one = vdupq_n_s32(1);
  const int32x4_t max = vmaxq_s32(vmaxq_s32(r, g), b);
  const int32x4_t min = vminq_s32(vminq_s32(r, g), b);
  const int32x4_t delta = vsubq_s32(max, min);
  const uint32x4_t max_zero = vceqq_s32(max, zero);
  const uint32x4_t delta_zero = vceqq_s32(delta, zero);

  int32x4_t s = round_div(vmulq_n_s32(delta, 255), vbslq_s32(max_zero, one, max));
  s = vbicq_s32(s, vreinterpretq_s32_u32(max_zero));

  const uint32x4_t is_r = vceqq_s32(max, r);
  const uint32x4_t is_g = vandq_u32(vmvnq_u32(is_r), vceqq_s32(max, g));
  const int32x4_t six_delta = vmulq_n_s32(delta, 6);

  int32x4_t r_num = vsubq_s32(g, b);
  r_num = vaddq_s32(r_num, vandq_s32(six_delta, vreinterpretq_s32_u32(vcltq_s32(r_num, zero))));
  const int32x4_t g_num = vaddq_s32(vshlq_n_s32(delta, 1), vsubq_s32(b, r));
  const int32x4_t b_num = vaddq_s32(vshlq_n_s32(delta, 2), vsubq_s32(r, g));
  int32x4_t sixths = vbslq_s32(is_g, g_num, b_num);
  sixths = vbslq_s32(is_r, r_num, sixths);

  int32x4_t h = round_div(vshlq_n_s32(sixths, 8), vbslq_s32(delta_zero, one, six_delta));
  h = vandq_s32(h, vdupq_n_s32(0xff));
  h = vbicq_s32(h, vreinterpretq_s32_u32(delta_zero));
  return {h, s, max};
}

inline int32x4_t widen(uint16x4_t x) { return vreinterpretq_s32_u32(vmovl_u16(x)); }

inline uint8x16_t narrow(int32x4_t a, int32x4_t b, int32x4_t c, int32x4_t d) {
  const uint16x8_t lo = vcombine_u16(vmovn_u32(vreinterpretq_u32_s32(a)),
                                     vmovn_u32(vreinterpretq_u32_s32(b)));
  const uint16x8_t hi = vcombine_u16(vmovn_u32(vreinterpretq_u32_s32(c)),
                                     vmovn_u32(vreinterpretq_u32_s32(d)));
  return vcombine_u8(vmovn_u16(lo), vmovn_u16(hi));
}

void rgb_to_hsv_planes(const std::uint8_t* rgb, std::size_t pixels,
                       std::uint8_t* h, std::uint8_t* s, std::uint8_t* v) {
  std::size_t i = 0;
  for (; i + 16 <= pixels; i += 16) {
    const uint8x16x3_t px = vld3q_u8(rgb + 3 * i);
    const uint16x8_t r_lo = vmovl_u8(vget_low_u8(px.val[0]));
    const uint16x8_t r_hi = vmovl_u8(vget_high_u8(px.val[0]));
    const uint16x8_t g_lo = vmovl_u8(vget_low_u8(px.val[1]));
    const uint16x8_t g_hi = vmovl_u8(vget_high_u8(px.val[1]));
    const uint16x8_t b_lo = vmovl_u8(vget_low_u8(px.val[2]));
    const uint16x8_t b_hi = vmovl_u8(vget_high_u8(px.val[2]));

    const Hsv4 q0 = hsv4(widen(vget_low_u16(r_lo)), widen(vget_low_u16(g_lo)),
                         widen(vget_low_u16(b_lo)));
    const Hsv4 q1 = hsv4(widen(vget_high_u16(r_lo)), widen(vget_high_u16(g_lo)),
                         widen(vget_high_u16(b_lo)));
    const Hsv4 q2 = hsv4(widen(vget_low_u16(r_hi)), widen(vget_low_u16(g_hi)),
                         widen(vget_low_u16(b_hi)));
    const Hsv4 q3 = hsv4(widen(vget_high_u16(r_hi)), widen(vget_high_u16(g_hi)),
                         widen(vget_high_u16(b_hi)));
    vst1q_u8(h + i, narrow(q0.h, q1.h, q2.h, q3.h));
    vst1q_u8(s + i, narrow(q0.s, q1.s, q2.s, q3.s));
    vst1q_u8(v + i, narrow(q0.v, q1.v, q2.v, q3.v));
  }
  if (i < pixels) {
    scalar_kernels().rgb_to_hsv_planes(rgb + 3 * i, pixels - i, h + i, s + i, v + i);
  }
}

inline uint64x2_t add_bytes(uint64x2_t acc, uint8x16_t x) {
  return vpadalq_u32(acc, vpaddlq_u16(vpaddlq_u8(x)));
}

HsvSums hsv_diff_sums(const std::uint8_t* h0, const std::uint8_t* s0, const std::uint8_t* v0,
                      const std::uint8_t* h1, const std::uint8_t* s1, const std::uint8_t* v1,
                      std::size_t pixels) {
  const uint8x16_t zero = vdupq_n_u8(0);
  uint64x2_t acc_h = vdupq_n_u64(0);
  uint64x2_t acc_s = vdupq_n_u64(0);
  uint64x2_t acc_v = vdupq_n_u64(0);
  std::size_t i = 0;
  for (; i + 16 <= pixels; i += 16) {
    const uint8x16_t d = vabdq_u8(vld1q_u8(h0 + i), vld1q_u8(h1 + i));
    acc_h = add_bytes(acc_h, vminq_u8(d, vsubq_u8(zero, d)));
    acc_s = add_bytes(acc_s, vabdq_u8(vld1q_u8(s0 + i), vld1q_u8(s1 + i)));
    acc_v = add_bytes(acc_v, vabdq_u8(vld1q_u8(v0 + i), vld1q_u8(v1 + i)));
  }
  HsvSums sums{vaddvq_u64(acc_h), vaddvq_u64(acc_s), vaddvq_u64(acc_v)};
  if (i < pixels) {
    const HsvSums tail = scalar_kernels().hsv_diff_sums(h0 + i, s0 + i, v0 + i, h1 + i, s1 + i,
                                                        v1 + i, pixels - i);
    sums.hue += tail.hue;
    sums.sat += tail.sat;
    sums.val += tail.val;
  }
  return sums;
}

void accumulate_i16(const std::int16_t* src, std::int32_t* acc, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const int16x8_t x = vld1q_s16(src + i);
    vst1q_s32(acc + i, vaddq_s32(vld1q_s32(acc + i), vmovl_s16(vget_low_s16(x))));
    vst1q_s32(acc + i + 4, vaddq_s32(vld1q_s32(acc + i + 4), vmovl_s16(vget_high_s16(x))));
  }
  for (; i < n; ++i) acc[i] += src[i];
}

std::uint32_t peak_abs_i32(const std::int32_t* acc, std::size_t n) {
  uint32x4_t peak = vdupq_n_u32(0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    peak = vmaxq_u32(peak, vreinterpretq_u32_s32(vabsq_s32(vld1q_s32(acc + i))));
  }
  const std::uint32_t best = vmaxvq_u32(peak);
  const std::uint32_t tail = scalar_kernels().peak_abs_i32(acc + i, n - i);
  return tail > best ? tail : best;
}

}  // namespace

const KernelTable* neon_kernels() {
  static const KernelTable table{"neon",         &sum_bytes,      &rgb_to_hsv_planes,
                                 &hsv_diff_sums, &accumulate_i16, &peak_abs_i32};
  return &table;
}

#else

const KernelTable* neon_kernels() { return nullptr; }

#endif

}  // namespace cutscore::kernels
