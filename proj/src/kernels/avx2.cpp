// AVX2 variants. Functions carry target attributes instead of the whole file
// being built with -mavx2, so no AVX2 code can leak into shared inline
// functions picked by the linker for the scalar path.

#include "cutscore/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define CUTSCORE_HAVE_AVX2_VARIANT 1
#endif

namespace cutscore::kernels {

#ifdef CUTSCORE_HAVE_AVX2_VARIANT
namespace {

#define AVX2_FN __attribute__((target("avx2")))

AVX2_FN inline std::uint64_t hsum_epi64(__m256i x) {
  const __m128i lo = _mm256_castsi256_si128(x);
  const __m128i hi = _mm256_extracti128_si256(x, 1);
  const __m128i s = _mm_add_epi64(lo, hi);
  return static_cast<std::uint64_t>(_mm_cvtsi128_si64(s)) +
         static_cast<std::uint64_t>(_mm_extract_epi64(s, 1));
}

AVX2_FN std::uint64_t sum_bytes(const std::uint8_t* data, std::size_t n) {
  const __m256i zero = _mm256_setzero_si256();
  __m256i acc = zero;
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(data + i));
    acc = _mm256_add_epi64(acc, _mm256_sad_epu8(x, zero));
  }
  std::uint64_t total = hsum_epi64(acc);
  for (; i < n; ++i) total += data[i];
  return total;
}

// Exact float reproduction of floor(num / den + 1/2) for the operand ranges
// used here (num < 2^24, den <= 1530): the correctly rounded quotient never
// crosses a half-integer boundary that the exact quotient does not.
AVX2_FN inline __m256i round_div(__m256i num, __m256i den) {
  const __m256 q = _mm256_div_ps(_mm256_cvtepi32_ps(num), _mm256_cvtepi32_ps(den));
  return _mm256_cvttps_epi32(_mm256_floor_ps(_mm256_add_ps(q, _mm256_set1_ps(0.5f))));
}

struct Hsv8x8 {
  __m256i h, s, v;
};

AVX2_FN inline Hsv8x8 hsv8(__m256i r, __m256i g, __m256i b) {
  const __m256i zero = _mm256_setzero_si256();
  const __m256i max = _mm256_max_epi32(_mm256_max_epi32(r, g), b);
  const __m256i min = _mm256_min_epi32(_mm256_min_epi32(r, g), b);
  const __m256i delta = _mm256_sub_epi32(max, min);
  const __m256i max_zero = _mm256_cmpeq_epi32(max, zero);
  const __m256i delta_zero = _mm256_cmpeq_epi32(delta, zero);

  // Division by zero lanes are masked off below.
  const __m256i safe_max = _mm256_blendv_epi8(max, _mm256_set1_epi32(1), max_zero);
  __m256i s = round_div(_mm256_mullo_epi32(delta, _mm256_set1_epi32(255)), safe_max);
  s = _mm256_andnot_si256(max_zero, s);

  const __m256i is_r = _mm256_cmpeq_epi32(max, r);
  const __m256i is_g = _mm256_andnot_si256(is_r, _mm256_cmpeq_epi32(max, g));
  const __m256i six_delta = _mm256_mullo_epi32(delta, _mm256_set1_epi32(6));

  __m256i r_num = _mm256_sub_epi32(g, b);
  r_num = _mm256_add_epi32(
      r_num, _mm256_and_si256(_mm256_cmpgt_epi32(zero, r_num), six_delta));
  const __m256i g_num = _mm256_add_epi32(_mm256_slli_epi32(delta, 1), _mm256_sub_epi32(b, r));
  const __m256i b_num = _mm256_add_epi32(_mm256_slli_epi32(delta, 2), _mm256_sub_epi32(r, g));
  __m256i sixths = _mm256_blendv_epi8(b_num, g_num, is_g);
  sixths = _mm256_blendv_epi8(sixths, r_num, is_r);

  const __m256i safe_den = _mm256_blendv_epi8(six_delta, _mm256_set1_epi32(1), delta_zero);
  __m256i h = round_div(_mm256_slli_epi32(sixths, 8), safe_den);
  h = _mm256_and_si256(h, _mm256_set1_epi32(0xff));
  h = _mm256_andnot_si256(delta_zero, h);
  return {h, s, max};
}

// Two 8 x i32 vectors (values 0..255) to 16 ordered bytes.
AVX2_FN inline __m128i narrow16(__m256i lo, __m256i hi) {
  const __m256i w = _mm256_permute4x64_epi64(_mm256_packus_epi32(lo, hi), 0xD8);
  return _mm_packus_epi16(_mm256_castsi256_si128(w), _mm256_extracti128_si256(w, 1));
}

AVX2_FN void rgb_to_hsv_planes(const std::uint8_t* rgb, std::size_t pixels,
                               std::uint8_t* h, std::uint8_t* s, std::uint8_t* v) {
  // Deinterleave masks for 16 pixels spread over three 16-byte loads.
  const __m128i r0 = _mm_setr_epi8(0, 3, 6, 9, 12, 15, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1);
  const __m128i r1 = _mm_setr_epi8(-1, -1, -1, -1, -1, -1, 2, 5, 8, 11, 14, -1, -1, -1, -1, -1);
  const __m128i r2 = _mm_setr_epi8(-1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, 1, 4, 7, 10, 13);
  const __m128i g0 = _mm_setr_epi8(1, 4, 7, 10, 13, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1);
  const __m128i g1 = _mm_setr_epi8(-1, -1, -1, -1, -1, 0, 3, 6, 9, 12, 15, -1, -1, -1, -1, -1);
  const __m128i g2 = _mm_setr_epi8(-1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, 2, 5, 8, 11, 14);
  const __m128i b0 = _mm_setr_epi8(2, 5, 8, 11, 14, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1);
  const __m128i b1 = _mm_setr_epi8(-1, -1, -1, -1, -1, 1, 4, 7, 10, 13, -1, -1, -1, -1, -1, -1);
  const __m128i b2 = _mm_setr_epi8(-1, -1, -1, -1, -1, -1, -1, -1, -1, -1, 0, 3, 6, 9, 12, 15);

  std::size_t i = 0;
  for (; i + 16 <= pixels; i += 16) {
    const std::uint8_t* p = rgb + 3 * i;
    const __m128i a0 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(p));
    const __m128i a1 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(p + 16));
    const __m128i a2 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(p + 32));
    const __m128i rr = _mm_or_si128(_mm_or_si128(_mm_shuffle_epi8(a0, r0), _mm_shuffle_epi8(a1, r1)),
                                    _mm_shuffle_epi8(a2, r2));
    const __m128i gg = _mm_or_si128(_mm_or_si128(_mm_shuffle_epi8(a0, g0), _mm_shuffle_epi8(a1, g1)),
                                    _mm_shuffle_epi8(a2, g2));
    const __m128i bb = _mm_or_si128(_mm_or_si128(_mm_shuffle_epi8(a0, b0), _mm_shuffle_epi8(a1, b1)),
                                    _mm_shuffle_epi8(a2, b2));

    const Hsv8x8 lo = hsv8(_mm256_cvtepu8_epi32(rr), _mm256_cvtepu8_epi32(gg),
                           _mm256_cvtepu8_epi32(bb));
    const Hsv8x8 hi = hsv8(_mm256_cvtepu8_epi32(_mm_srli_si128(rr, 8)),
                           _mm256_cvtepu8_epi32(_mm_srli_si128(gg, 8)),
                           _mm256_cvtepu8_epi32(_mm_srli_si128(bb, 8)));
    _mm_storeu_si128(reinterpret_cast<__m128i*>(h + i), narrow16(lo.h, hi.h));
    _mm_storeu_si128(reinterpret_cast<__m128i*>(s + i), narrow16(lo.s, hi.s));
    _mm_storeu_si128(reinterpret_cast<__m128i*>(v + i), narrow16(lo.v, hi.v));
  }
  if (i < pixels) {
    scalar_kernels().rgb_to_hsv_planes(rgb + 3 * i, pixels - i, h + i, s + i, v + i);
  }
}

AVX2_FN inline __m256i load32(const std::uint8_t* p) {
  return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p));
}

AVX2_FN HsvSums hsv_diff_sums(const std::uint8_t* h0, const std::uint8_t* s0,
                              const std::uint8_t* v0, const std::uint8_t* h1,
                              const std::uint8_t* s1, const std::uint8_t* v1,
                              std::size_t pixels) {
  const __m256i zero = _mm256_setzero_si256();
  __m256i acc_h = zero;
  __m256i acc_s = zero;
  __m256i acc_v = zero;
  std::size_t i = 0;
  for (; i + 32 <= pixels; i += 32) {
    const __m256i ha = load32(h0 + i);
    const __m256i hb = load32(h1 + i);
    const __m256i d = _mm256_sub_epi8(_mm256_max_epu8(ha, hb), _mm256_min_epu8(ha, hb));
    const __m256i circ = _mm256_min_epu8(d, _mm256_sub_epi8(zero, d));
    acc_h = _mm256_add_epi64(acc_h, _mm256_sad_epu8(circ, zero));
    acc_s = _mm256_add_epi64(acc_s, _mm256_sad_epu8(load32(s0 + i), load32(s1 + i)));
    acc_v = _mm256_add_epi64(acc_v, _mm256_sad_epu8(load32(v0 + i), load32(v1 + i)));
  }
  HsvSums sums{hsum_epi64(acc_h), hsum_epi64(acc_s), hsum_epi64(acc_v)};
  if (i < pixels) {
    const HsvSums tail = scalar_kernels().hsv_diff_sums(h0 + i, s0 + i, v0 + i, h1 + i,
                                                        s1 + i, v1 + i, pixels - i);
    sums.hue += tail.hue;
    sums.sat += tail.sat;
    sums.val += tail.val;
  }
  return sums;
}

AVX2_FN void accumulate_i16(const std::int16_t* src, std::int32_t* acc, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256i wide =
        _mm256_cvtepi16_epi32(_mm_loadu_si128(reinterpret_cast<const __m128i*>(src + i)));
    __m256i* dst = reinterpret_cast<__m256i*>(acc + i);
    _mm256_storeu_si256(dst, _mm256_add_epi32(_mm256_loadu_si256(dst), wide));
  }
  for (; i < n; ++i) acc[i] += src[i];
}

AVX2_FN std::uint32_t peak_abs_i32(const std::int32_t* acc, std::size_t n) {
  // abs(INT32_MIN) stays 0x80000000, which is the right magnitude unsigned.
  __m256i peak = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(acc + i));
    peak = _mm256_max_epu32(peak, _mm256_abs_epi32(x));
  }
  alignas(32) std::uint32_t lanes[8];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), peak);
  std::uint32_t best = 0;
  for (std::uint32_t lane : lanes) best = lane > best ? lane : best;
  const std::uint32_t tail = scalar_kernels().peak_abs_i32(acc + i, n - i);
  return tail > best ? tail : best;
}

#undef AVX2_FN

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{"avx2",         &sum_bytes,      &rgb_to_hsv_planes,
                                 &hsv_diff_sums, &accumulate_i16, &peak_abs_i32};
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &table : nullptr;
}

#else

const KernelTable* avx2_kernels() { return nullptr; }

#endif

}  // namespace cutscore::kernels
