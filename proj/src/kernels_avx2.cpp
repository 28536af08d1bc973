// SPDX-License-Identifier: Apache-2.0
#include "npd/kernels.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define NPD_HAVE_AVX2_VARIANT 1
#include <immintrin.h>

#include <cmath>
#include <limits>
#endif

namespace npd::kernels {

#if NPD_HAVE_AVX2_VARIANT

// Functions are compiled for AVX2+FMA individually so the rest of the
// translation unit (and any inline library code) stays baseline x86-64.
#define NPD_AVX2 __attribute__((target("avx2,fma")))

namespace {

// [m0, m0, m1, m1] from two consecutive per-mode multipliers.
NPD_AVX2 inline __m256d pair_broadcast(const double* m) {
  const __m128d mm = _mm_loadu_pd(m);
  return _mm256_permute4x64_pd(_mm256_castpd128_pd256(mm), _MM_SHUFFLE(1, 1, 0, 0));
}

NPD_AVX2 inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

NPD_AVX2 void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

NPD_AVX2 void mul(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) out[i] = x[i] * y[i];
}

NPD_AVX2 void lincomb(double a, const double* x, double b, const double* y, double* out,
                      std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), t));
  }
  for (; i < n; ++i) out[i] = std::fma(a, x[i], b * y[i]);
}

NPD_AVX2 void scale(double a, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

NPD_AVX2 void cmul_real(const double* m, const double* z, double* out, std::size_t modes) {
  std::size_t k = 0;
  for (; k + 2 <= modes; k += 2) {
    _mm256_storeu_pd(out + 2 * k, _mm256_mul_pd(pair_broadcast(m + k), _mm256_loadu_pd(z + 2 * k)));
  }
  for (; k < modes; ++k) {
    out[2 * k] = m[k] * z[2 * k];
    out[2 * k + 1] = m[k] * z[2 * k + 1];
  }
}

// i * m * (re, im) = (-m im, m re)
NPD_AVX2 inline __m256d times_i(__m256d mw, __m256d z) {
  const __m256d sign = _mm256_setr_pd(-1.0, 1.0, -1.0, 1.0);
  return _mm256_mul_pd(_mm256_mul_pd(mw, sign), _mm256_permute_pd(z, 0b0101));
}

NPD_AVX2 void cmul_imag(const double* m, const double* z, double* out, std::size_t modes) {
  std::size_t k = 0;
  for (; k + 2 <= modes; k += 2) {
    _mm256_storeu_pd(out + 2 * k, times_i(pair_broadcast(m + k), _mm256_loadu_pd(z + 2 * k)));
  }
  for (; k < modes; ++k) {
    const double re = z[2 * k];
    const double im = z[2 * k + 1];
    out[2 * k] = -m[k] * im;
    out[2 * k + 1] = m[k] * re;
  }
}

NPD_AVX2 void cmul_imag_acc(const double* m, const double* z, double* out, std::size_t modes) {
  std::size_t k = 0;
  for (; k + 2 <= modes; k += 2) {
    const __m256d t = times_i(pair_broadcast(m + k), _mm256_loadu_pd(z + 2 * k));
    _mm256_storeu_pd(out + 2 * k, _mm256_add_pd(_mm256_loadu_pd(out + 2 * k), t));
  }
  for (; k < modes; ++k) {
    const double re = z[2 * k];
    const double im = z[2 * k + 1];
    out[2 * k] -= m[k] * im;
    out[2 * k + 1] += m[k] * re;
  }
}

NPD_AVX2 void if_predictor(const double* e, double dt, const double* c, const double* nl,
                           double* out, std::size_t modes) {
  const __m256d vdt = _mm256_set1_pd(dt);
  std::size_t k = 0;
  for (; k + 2 <= modes; k += 2) {
    const __m256d s = _mm256_fmadd_pd(vdt, _mm256_loadu_pd(nl + 2 * k), _mm256_loadu_pd(c + 2 * k));
    _mm256_storeu_pd(out + 2 * k, _mm256_mul_pd(pair_broadcast(e + k), s));
  }
  for (; k < modes; ++k) {
    out[2 * k] = e[k] * std::fma(dt, nl[2 * k], c[2 * k]);
    out[2 * k + 1] = e[k] * std::fma(dt, nl[2 * k + 1], c[2 * k + 1]);
  }
}

NPD_AVX2 void if_corrector(const double* e, double dt, const double* c, const double* nl0,
                           const double* nl1, double* out, std::size_t modes) {
  const double h = 0.5 * dt;
  const __m256d vh = _mm256_set1_pd(h);
  std::size_t k = 0;
  for (; k + 2 <= modes; k += 2) {
    const __m256d ew = pair_broadcast(e + k);
    const __m256d inner = _mm256_fmadd_pd(ew, _mm256_loadu_pd(nl0 + 2 * k), _mm256_loadu_pd(nl1 + 2 * k));
    const __m256d ec = _mm256_mul_pd(ew, _mm256_loadu_pd(c + 2 * k));
    _mm256_storeu_pd(out + 2 * k, _mm256_fmadd_pd(vh, inner, ec));
  }
  for (; k < modes; ++k) {
    for (std::size_t p = 2 * k; p < 2 * k + 2; ++p) {
      out[p] = std::fma(h, std::fma(e[k], nl0[p], nl1[p]), e[k] * c[p]);
    }
  }
}

NPD_AVX2 void leray2(const double* kx, const double* ky, const double* inv_k2, double* vx,
                     double* vy, std::size_t modes) {
  std::size_t k = 0;
  for (; k + 2 <= modes; k += 2) {
    const __m256d ax = pair_broadcast(kx + k);
    const __m256d ay = pair_broadcast(ky + k);
    const __m256d x = _mm256_loadu_pd(vx + 2 * k);
    const __m256d y = _mm256_loadu_pd(vy + 2 * k);
    const __m256d s = _mm256_mul_pd(_mm256_fmadd_pd(ax, x, _mm256_mul_pd(ay, y)),
                                    pair_broadcast(inv_k2 + k));
    _mm256_storeu_pd(vx + 2 * k, _mm256_fnmadd_pd(ax, s, x));
    _mm256_storeu_pd(vy + 2 * k, _mm256_fnmadd_pd(ay, s, y));
  }
  for (; k < modes; ++k) {
    for (std::size_t p = 2 * k; p < 2 * k + 2; ++p) {
      const double s = std::fma(kx[k], vx[p], ky[k] * vy[p]) * inv_k2[k];
      vx[p] = std::fma(-kx[k], s, vx[p]);
      vy[p] = std::fma(-ky[k], s, vy[p]);
    }
  }
}

NPD_AVX2 void leray3(const double* kx, const double* ky, const double* kz, const double* inv_k2,
                     double* vx, double* vy, double* vz, std::size_t modes) {
  std::size_t k = 0;
  for (; k + 2 <= modes; k += 2) {
    const __m256d ax = pair_broadcast(kx + k);
    const __m256d ay = pair_broadcast(ky + k);
    const __m256d az = pair_broadcast(kz + k);
    const __m256d x = _mm256_loadu_pd(vx + 2 * k);
    const __m256d y = _mm256_loadu_pd(vy + 2 * k);
    const __m256d z = _mm256_loadu_pd(vz + 2 * k);
    const __m256d proj = _mm256_fmadd_pd(ax, x, _mm256_fmadd_pd(ay, y, _mm256_mul_pd(az, z)));
    const __m256d s = _mm256_mul_pd(proj, pair_broadcast(inv_k2 + k));
    _mm256_storeu_pd(vx + 2 * k, _mm256_fnmadd_pd(ax, s, x));
    _mm256_storeu_pd(vy + 2 * k, _mm256_fnmadd_pd(ay, s, y));
    _mm256_storeu_pd(vz + 2 * k, _mm256_fnmadd_pd(az, s, z));
  }
  for (; k < modes; ++k) {
    for (std::size_t p = 2 * k; p < 2 * k + 2; ++p) {
      const double s = std::fma(kx[k], vx[p], std::fma(ky[k], vy[p], kz[k] * vz[p])) * inv_k2[k];
      vx[p] = std::fma(-kx[k], s, vx[p]);
      vy[p] = std::fma(-ky[k], s, vy[p]);
      vz[p] = std::fma(-kz[k], s, vz[p]);
    }
  }
}

NPD_AVX2 double sum(const double* x, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_add_pd(a0, _mm256_loadu_pd(x + i));
    a1 = _mm256_add_pd(a1, _mm256_loadu_pd(x + i + 4));
  }
  double acc = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) acc += x[i];
  return acc;
}

NPD_AVX2 double dot(const double* x, const double* y, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), a1);
  }
  double acc = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) acc = std::fma(x[i], y[i], acc);
  return acc;
}

NPD_AVX2 double weighted_norm2(const double* w, const double* z, std::size_t modes) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 2 <= modes; k += 2) {
    const __m256d v = _mm256_loadu_pd(z + 2 * k);
    acc = _mm256_fmadd_pd(pair_broadcast(w + k), _mm256_mul_pd(v, v), acc);
  }
  double r = hsum(acc);
  for (; k < modes; ++k) r += w[k] * (z[2 * k] * z[2 * k] + z[2 * k + 1] * z[2 * k + 1]);
  return r;
}

NPD_AVX2 double weighted_dot(const double* w, const double* a, const double* b, std::size_t modes) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 2 <= modes; k += 2) {
    const __m256d p = _mm256_mul_pd(_mm256_loadu_pd(a + 2 * k), _mm256_loadu_pd(b + 2 * k));
    acc = _mm256_fmadd_pd(pair_broadcast(w + k), p, acc);
  }
  double r = hsum(acc);
  for (; k < modes; ++k) r += w[k] * (a[2 * k] * b[2 * k] + a[2 * k + 1] * b[2 * k + 1]);
  return r;
}

NPD_AVX2 double min(const double* x, std::size_t n) {
  double m = std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  if (n >= 4) {
    __m256d vm = _mm256_set1_pd(m);
    for (; i + 4 <= n; i += 4) vm = _mm256_min_pd(vm, _mm256_loadu_pd(x + i));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, vm);
    for (double l : lanes) m = l < m ? l : m;
  }
  for (; i < n; ++i) m = x[i] < m ? x[i] : m;
  return m;
}

NPD_AVX2 double max_abs(const double* x, std::size_t n) {
  double m = 0.0;
  std::size_t i = 0;
  if (n >= 4) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d vm = _mm256_setzero_pd();
    for (; i + 4 <= n; i += 4) vm = _mm256_max_pd(vm, _mm256_andnot_pd(sign, _mm256_loadu_pd(x + i)));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, vm);
    for (double l : lanes) m = l > m ? l : m;
  }
  for (; i < n; ++i) {
    const double a = std::abs(x[i]);
    m = a > m ? a : m;
  }
  return m;
}

NPD_AVX2 double sum_abs_pow(const double* x, double shift, int p, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  const __m256d vs = _mm256_set1_pd(shift);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_andnot_pd(sign, _mm256_sub_pd(_mm256_loadu_pd(x + i), vs));
    __m256d v = a;
    for (int j = 1; j < p; ++j) v = _mm256_mul_pd(v, a);
    acc = _mm256_add_pd(acc, v);
  }
  double r = hsum(acc);
  for (; i < n; ++i) {
    const double a = std::abs(x[i] - shift);
    double v = a;
    for (int j = 1; j < p; ++j) v *= a;
    r += v;
  }
  return r;
}

}  // namespace

const Table* avx2_table() {
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  static const Table table{
      "avx2",       axpy,         mul,         lincomb,        scale,
      cmul_real,    cmul_imag,    cmul_imag_acc, if_predictor, if_corrector,
      leray2,       leray3,       sum,         dot,            weighted_norm2,
      weighted_dot, min,          max_abs,     sum_abs_pow,
  };
  return supported ? &table : nullptr;
}

#else

const Table* avx2_table() { return nullptr; }

#endif

}  // namespace npd::kernels
