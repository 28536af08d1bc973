// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>

#include "npd/kernels.hpp"

namespace npd::kernels {
namespace {

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void mul(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

void lincomb(double a, const double* x, double b, const double* y, double* out,
             std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void scale(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void cmul_real(const double* m, const double* z, double* out, std::size_t modes) {
  for (std::size_t k = 0; k < modes; ++k) {
    out[2 * k] = m[k] * z[2 * k];
    out[2 * k + 1] = m[k] * z[2 * k + 1];
  }
}

void cmul_imag(const double* m, const double* z, double* out, std::size_t modes) {
  for (std::size_t k = 0; k < modes; ++k) {
    const double re = z[2 * k];
    const double im = z[2 * k + 1];
    out[2 * k] = -m[k] * im;
    out[2 * k + 1] = m[k] * re;
  }
}

void cmul_imag_acc(const double* m, const double* z, double* out, std::size_t modes) {
  for (std::size_t k = 0; k < modes; ++k) {
    const double re = z[2 * k];
    const double im = z[2 * k + 1];
    out[2 * k] -= m[k] * im;
    out[2 * k + 1] += m[k] * re;
  }
}

void if_predictor(const double* e, double dt, const double* c, const double* nl, double* out,
                  std::size_t modes) {
  for (std::size_t k = 0; k < modes; ++k) {
    out[2 * k] = e[k] * (c[2 * k] + dt * nl[2 * k]);
    out[2 * k + 1] = e[k] * (c[2 * k + 1] + dt * nl[2 * k + 1]);
  }
}

void if_corrector(const double* e, double dt, const double* c, const double* nl0,
                  const double* nl1, double* out, std::size_t modes) {
  const double h = 0.5 * dt;
  for (std::size_t k = 0; k < modes; ++k) {
    for (std::size_t p = 2 * k; p < 2 * k + 2; ++p) {
      out[p] = e[k] * c[p] + h * (e[k] * nl0[p] + nl1[p]);
    }
  }
}

void leray2(const double* kx, const double* ky, const double* inv_k2, double* vx, double* vy,
            std::size_t modes) {
  for (std::size_t k = 0; k < modes; ++k) {
    for (std::size_t p = 2 * k; p < 2 * k + 2; ++p) {
      const double s = (kx[k] * vx[p] + ky[k] * vy[p]) * inv_k2[k];
      vx[p] -= kx[k] * s;
      vy[p] -= ky[k] * s;
    }
  }
}

void leray3(const double* kx, const double* ky, const double* kz, const double* inv_k2,
            double* vx, double* vy, double* vz, std::size_t modes) {
  for (std::size_t k = 0; k < modes; ++k) {
    for (std::size_t p = 2 * k; p < 2 * k + 2; ++p) {
      const double s = (kx[k] * vx[p] + ky[k] * vy[p] + kz[k] * vz[p]) * inv_k2[k];
      vx[p] -= kx[k] * s;
      vy[p] -= ky[k] * s;
      vz[p] -= kz[k] * s;
    }
  }
}

double sum(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double dot(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double weighted_norm2(const double* w, const double* z, std::size_t modes) {
  double acc = 0.0;
  for (std::size_t k = 0; k < modes; ++k) {
    acc += w[k] * (z[2 * k] * z[2 * k] + z[2 * k + 1] * z[2 * k + 1]);
  }
  return acc;
}

double weighted_dot(const double* w, const double* a, const double* b, std::size_t modes) {
  double acc = 0.0;
  for (std::size_t k = 0; k < modes; ++k) {
    acc += w[k] * (a[2 * k] * b[2 * k] + a[2 * k + 1] * b[2 * k + 1]);
  }
  return acc;
}

double min(const double* x, std::size_t n) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) m = std::min(m, x[i]);
  return m;
}

double max_abs(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(x[i]));
  return m;
}

double sum_abs_pow(const double* x, double shift, int p, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::abs(x[i] - shift);
    double v = a;
    for (int j = 1; j < p; ++j) v *= a;
    acc += v;
  }
  return acc;
}

}  // namespace

const Table& scalar_table() {
  static const Table table{
      "scalar",     axpy,         mul,         lincomb,        scale,
      cmul_real,    cmul_imag,    cmul_imag_acc, if_predictor, if_corrector,
      leray2,       leray3,       sum,         dot,            weighted_norm2,
      weighted_dot, min,          max_abs,     sum_abs_pow,
  };
  return table;
}

}  // namespace npd::kernels
