// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string_view>

// Elementwise and reduction kernels used by every inner loop of the solver.
//
// Real arrays are plain `double` runs of length `n`. Spectral arrays are
// interleaved complex values (re, im, re, im, ...) of `modes` entries, paired
// with one real multiplier per mode. Two implementations exist: a portable
// scalar reference and an AVX2/FMA variant; `active()` picks one at runtime.
namespace npd::kernels {

struct Table {
  std::string_view name;

  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // out = x * y
  void (*mul)(const double* x, const double* y, double* out, std::size_t n);
  // out = a * x + b * y
  void (*lincomb)(double a, const double* x, double b, const double* y, double* out,
                  std::size_t n);
  // x *= a
  void (*scale)(double a, double* x, std::size_t n);

  // out_k = m_k * z_k
  void (*cmul_real)(const double* m, const double* z, double* out, std::size_t modes);
  // out_k = i * m_k * z_k
  void (*cmul_imag)(const double* m, const double* z, double* out, std::size_t modes);
  // out_k += i * m_k * z_k
  void (*cmul_imag_acc)(const double* m, const double* z, double* out, std::size_t modes);

  // Integrating-factor Heun stages with real per-mode factor e:
  //   predictor: out = e * (c + dt * nl)
  //   corrector: out = e * c + dt/2 * (e * nl0 + nl1)
  void (*if_predictor)(const double* e, double dt, const double* c, const double* nl,
                       double* out, std::size_t modes);
  void (*if_corrector)(const double* e, double dt, const double* c, const double* nl0,
                       const double* nl1, double* out, std::size_t modes);

  // Modewise v -= k (k . v) * inv_k2 for 2 or 3 complex components.
  void (*leray2)(const double* kx, const double* ky, const double* inv_k2, double* vx,
                 double* vy, std::size_t modes);
  void (*leray3)(const double* kx, const double* ky, const double* kz, const double* inv_k2,
                 double* vx, double* vy, double* vz, std::size_t modes);

  double (*sum)(const double* x, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // sum_k w_k |z_k|^2
  double (*weighted_norm2)(const double* w, const double* z, std::size_t modes);
  // sum_k w_k Re(a_k conj(b_k))
  double (*weighted_dot)(const double* w, const double* a, const double* b,
                         std::size_t modes);
  double (*min)(const double* x, std::size_t n);
  double (*max_abs)(const double* x, std::size_t n);
  // sum |x - shift|^p for integer p >= 1
  double (*sum_abs_pow)(const double* x, double shift, int p, std::size_t n);
};

const Table& scalar_table();

// nullptr when the build has no AVX2 variant or the CPU lacks AVX2/FMA.
const Table* avx2_table();

// Table used by the library. Defaults to the best supported variant; the
// environment variable NPD_SIMD=scalar|avx2 overrides the choice.
const Table& active();

// Replace the active table (tests use this to compare variants end to end).
void set_active(const Table& table);

class ScopedTable {
 public:
  explicit ScopedTable(const Table& table) : previous_(&active()) { set_active(table); }
  ~ScopedTable() { set_active(*previous_); }
  ScopedTable(const ScopedTable&) = delete;
  ScopedTable& operator=(const ScopedTable&) = delete;

 private:
  const Table* previous_;
};

}  // namespace npd::kernels
