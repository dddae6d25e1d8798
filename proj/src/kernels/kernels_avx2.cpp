// AVX2 variants. This translation unit is compiled with -mavx2 and must only
// be entered after dispatch.cpp has confirmed CPU support.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "rdslab/kernels.hpp"

namespace rdslab::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double hmax(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d m = _mm_max_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_max_sd(m, _mm_unpackhi_pd(m, m)));
}

inline __m256d abs_pd(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1,
                         _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_avx2(const double* a, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(a + i + 4));
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i];
  return s;
}

double sum_abs_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, abs_pd(_mm256_loadu_pd(a + i)));
  double s = hsum(acc);
  for (; i < n; ++i) s += std::fabs(a[i]);
  return s;
}

double sum_sq_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(a + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(v, v));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * a[i];
  return s;
}

double max_abs_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, abs_pd(_mm256_loadu_pd(a + i)));
  double m = hmax(acc);
  for (; i < n; ++i) m = std::max(m, std::fabs(a[i]));
  return m;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, r);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void xpay_avx2(const double* x, double alpha, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_mul_pd(va, _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(y + i, r);
  }
  for (; i < n; ++i) y[i] = x[i] + alpha * y[i];
}

void mul_avx2(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_mul_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) y[i] *= x[i];
}

// ((l - c) + (r - c)) * s, same operation order as the scalar stencil.
inline __m256d second_difference(__m256d l, __m256d c, __m256d r, __m256d s) {
  return _mm256_mul_pd(_mm256_add_pd(_mm256_sub_pd(l, c), _mm256_sub_pd(r, c)), s);
}

void laplacian_1d_avx2(const double* in, double* out, std::size_t n, double inv_h2) {
  if (n < 6) {
    scalar_table().laplacian_1d(in, out, n, inv_h2);
    return;
  }
  out[0] = ((in[0] - in[0]) + (in[1] - in[0])) * inv_h2;
  const __m256d s = _mm256_set1_pd(inv_h2);
  std::size_t i = 1;
  for (; i + 4 <= n - 1; i += 4) {
    const __m256d l = _mm256_loadu_pd(in + i - 1);
    const __m256d c = _mm256_loadu_pd(in + i);
    const __m256d r = _mm256_loadu_pd(in + i + 1);
    _mm256_storeu_pd(out + i, second_difference(l, c, r, s));
  }
  for (; i < n - 1; ++i) out[i] = ((in[i - 1] - in[i]) + (in[i + 1] - in[i])) * inv_h2;
  out[n - 1] = ((in[n - 2] - in[n - 1]) + (in[n - 1] - in[n - 1])) * inv_h2;
}

void laplacian_2d_avx2(const double* in, double* out, std::size_t nx, std::size_t ny,
                       double inv_hx2, double inv_hy2) {
  if (nx < 6) {
    scalar_table().laplacian_2d(in, out, nx, ny, inv_hx2, inv_hy2);
    return;
  }
  const __m256d sx = _mm256_set1_pd(inv_hx2);
  const __m256d sy = _mm256_set1_pd(inv_hy2);
  for (std::size_t iy = 0; iy < ny; ++iy) {
    const double* row = in + iy * nx;
    const double* down = in + (iy == 0 ? iy : iy - 1) * nx;
    const double* up = in + (iy + 1 == ny ? iy : iy + 1) * nx;
    double* dst = out + iy * nx;

    auto point = [&](std::size_t ix) {
      const double c = row[ix];
      const double l = row[ix == 0 ? 0 : ix - 1];
      const double r = row[ix + 1 == nx ? ix : ix + 1];
      dst[ix] = ((l - c) + (r - c)) * inv_hx2 + ((down[ix] - c) + (up[ix] - c)) * inv_hy2;
    };

    point(0);
    std::size_t ix = 1;
    for (; ix + 4 <= nx - 1; ix += 4) {
      const __m256d c = _mm256_loadu_pd(row + ix);
      const __m256d xs = second_difference(_mm256_loadu_pd(row + ix - 1), c,
                                           _mm256_loadu_pd(row + ix + 1), sx);
      const __m256d ys = second_difference(_mm256_loadu_pd(down + ix), c,
                                           _mm256_loadu_pd(up + ix), sy);
      _mm256_storeu_pd(dst + ix, _mm256_add_pd(xs, ys));
    }
    for (; ix < nx; ++ix) point(ix);
  }
}

}  // namespace

const KernelTable& avx2_table_unchecked() {
  static const KernelTable table{
      "avx2",          dot_avx2,  sum_avx2,  sum_abs_avx2,      sum_sq_avx2,
      max_abs_avx2,    axpy_avx2, xpay_avx2, mul_avx2,          laplacian_1d_avx2,
      laplacian_2d_avx2,
  };
  return table;
}

}  // namespace rdslab::kernels
