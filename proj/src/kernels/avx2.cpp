// Compiled with -mavx2 -mfma. Only reached through the dispatch table after a
// runtime CPU check.

#include <immintrin.h>

#include "inband/kernels/kernels.hpp"

namespace inband::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

Dot3 dot3_avx2(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  const double* px = x.data();
  const double* py = y.data();
  __m256d xy0 = _mm256_setzero_pd(), xy1 = _mm256_setzero_pd();
  __m256d xx0 = _mm256_setzero_pd(), xx1 = _mm256_setzero_pd();
  __m256d yy0 = _mm256_setzero_pd(), yy1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d a0 = _mm256_loadu_pd(px + i), a1 = _mm256_loadu_pd(px + i + 4);
    const __m256d b0 = _mm256_loadu_pd(py + i), b1 = _mm256_loadu_pd(py + i + 4);
    xy0 = _mm256_fmadd_pd(a0, b0, xy0);
    xy1 = _mm256_fmadd_pd(a1, b1, xy1);
    xx0 = _mm256_fmadd_pd(a0, a0, xx0);
    xx1 = _mm256_fmadd_pd(a1, a1, xx1);
    yy0 = _mm256_fmadd_pd(b0, b0, yy0);
    yy1 = _mm256_fmadd_pd(b1, b1, yy1);
  }
  Dot3 r{hsum(_mm256_add_pd(xy0, xy1)), hsum(_mm256_add_pd(xx0, xx1)), hsum(_mm256_add_pd(yy0, yy1))};
  for (; i < n; ++i) {
    r.xy += px[i] * py[i];
    r.xx += px[i] * px[i];
    r.yy += py[i] * py[i];
  }
  return r;
}

double sum_avx2(std::span<const double> x) {
  const std::size_t n = x.size();
  const double* p = x.data();
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_add_pd(s0, _mm256_loadu_pd(p + i));
    s1 = _mm256_add_pd(s1, _mm256_loadu_pd(p + i + 4));
  }
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s += p[i];
  return s;
}

double sq_diff_avx2(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  const double* px = x.data();
  const double* py = y.data();
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(px + i), _mm256_loadu_pd(py + i));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(px + i + 4), _mm256_loadu_pd(py + i + 4));
    s0 = _mm256_fmadd_pd(d0, d0, s0);
    s1 = _mm256_fmadd_pd(d1, d1, s1);
  }
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) {
    const double d = px[i] - py[i];
    s += d * d;
  }
  return s;
}

// unpacklo/unpackhi leave lanes in (0, 2, 1, 3) order; 0xD8 restores it.
constexpr int kLaneFix = 0xD8;

void haar_analyze_row_avx2(const double* top, const double* bottom, std::size_t n, double* approx, double* horiz,
                           double* vert, double* diag) {
  const __m256d quarter = _mm256_set1_pd(0.25);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d t0 = _mm256_loadu_pd(top + 2 * j), t1 = _mm256_loadu_pd(top + 2 * j + 4);
    const __m256d b0 = _mm256_loadu_pd(bottom + 2 * j), b1 = _mm256_loadu_pd(bottom + 2 * j + 4);
    const __m256d p00 = _mm256_unpacklo_pd(t0, t1), p01 = _mm256_unpackhi_pd(t0, t1);
    const __m256d p10 = _mm256_unpacklo_pd(b0, b1), p11 = _mm256_unpackhi_pd(b0, b1);
    const __m256d ts = _mm256_add_pd(p00, p01), td = _mm256_sub_pd(p00, p01);
    const __m256d bs = _mm256_add_pd(p10, p11), bd = _mm256_sub_pd(p10, p11);
    _mm256_storeu_pd(approx + j, _mm256_permute4x64_pd(_mm256_mul_pd(_mm256_add_pd(ts, bs), quarter), kLaneFix));
    _mm256_storeu_pd(horiz + j, _mm256_permute4x64_pd(_mm256_mul_pd(_mm256_add_pd(td, bd), quarter), kLaneFix));
    _mm256_storeu_pd(vert + j, _mm256_permute4x64_pd(_mm256_mul_pd(_mm256_sub_pd(ts, bs), quarter), kLaneFix));
    _mm256_storeu_pd(diag + j, _mm256_permute4x64_pd(_mm256_mul_pd(_mm256_sub_pd(td, bd), quarter), kLaneFix));
  }
  for (; j < n; ++j) {
    const double p00 = top[2 * j], p01 = top[2 * j + 1];
    const double p10 = bottom[2 * j], p11 = bottom[2 * j + 1];
    approx[j] = ((p00 + p01) + (p10 + p11)) * 0.25;
    horiz[j] = ((p00 - p01) + (p10 - p11)) * 0.25;
    vert[j] = ((p00 + p01) - (p10 + p11)) * 0.25;
    diag[j] = ((p00 - p01) - (p10 - p11)) * 0.25;
  }
}

void haar_synthesize_row_avx2(const double* approx, const double* horiz, const double* vert, const double* diag,
                              std::size_t n, double* top, double* bottom) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d A = _mm256_loadu_pd(approx + j), a = _mm256_loadu_pd(horiz + j);
    const __m256d b = _mm256_loadu_pd(vert + j), c = _mm256_loadu_pd(diag + j);
    const __m256d s = _mm256_add_pd(A, a), d = _mm256_sub_pd(A, a);
    const __m256d u = _mm256_add_pd(b, c), v = _mm256_sub_pd(b, c);
    const __m256d e_top = _mm256_add_pd(s, u), o_top = _mm256_add_pd(d, v);
    const __m256d e_bot = _mm256_sub_pd(s, u), o_bot = _mm256_sub_pd(d, v);
    const __m256d lo_t = _mm256_unpacklo_pd(e_top, o_top), hi_t = _mm256_unpackhi_pd(e_top, o_top);
    const __m256d lo_b = _mm256_unpacklo_pd(e_bot, o_bot), hi_b = _mm256_unpackhi_pd(e_bot, o_bot);
    _mm256_storeu_pd(top + 2 * j, _mm256_permute2f128_pd(lo_t, hi_t, 0x20));
    _mm256_storeu_pd(top + 2 * j + 4, _mm256_permute2f128_pd(lo_t, hi_t, 0x31));
    _mm256_storeu_pd(bottom + 2 * j, _mm256_permute2f128_pd(lo_b, hi_b, 0x20));
    _mm256_storeu_pd(bottom + 2 * j + 4, _mm256_permute2f128_pd(lo_b, hi_b, 0x31));
  }
  for (; j < n; ++j) {
    const double s = approx[j] + horiz[j];
    const double d = approx[j] - horiz[j];
    const double u = vert[j] + diag[j];
    const double v = vert[j] - diag[j];
    top[2 * j] = s + u;
    top[2 * j + 1] = d + v;
    bottom[2 * j] = s - u;
    bottom[2 * j + 1] = d - v;
  }
}

constexpr KernelTable kAvx2{"avx2",         dot3_avx2, sum_avx2, sq_diff_avx2, haar_analyze_row_avx2,
                            haar_synthesize_row_avx2};

}  // namespace

const KernelTable* avx2_table() { return &kAvx2; }

}  // namespace inband::kernels
