// SPDX-License-Identifier: Apache-2.0
#include "npd/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdlib>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "npd/errors.hpp"
#include "npd/field.hpp"
#include "npd/kernels.hpp"

namespace npd {
namespace {

// FFTW planning is not thread-safe; execution on distinct arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

int read_thread_cap() {
  const char* env = std::getenv("NPD_THREADS");
  if (env == nullptr) return 1;
  const int value = std::atoi(env);
  return value > 0 ? value : 1;
}

void init_fftw_threads() {
  static const bool done = [] {
    fftw_init_threads();
    fftw_plan_with_nthreads(read_thread_cap());
    return true;
  }();
  (void)done;
}

int signed_index(int j, int n) { return j <= n / 2 ? j : j - n; }

}  // namespace

int configured_threads() {
  static const int threads = read_thread_cap();
  return threads;
}

struct SpectralGrid::Impl {
  int dim = 3;
  int n = 0;
  int h = 0;
  std::size_t points = 0;
  std::size_t modes = 0;
  std::array<std::vector<double>, 3> k_deriv;
  std::vector<double> k_squared, inv_k_squared, leray_inv, dealias_mask, hermitian_weight;
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (r2c != nullptr) fftw_destroy_plan(r2c);
    if (c2r != nullptr) fftw_destroy_plan(c2r);
  }

  std::array<int, 3> wavevector(std::size_t mode) const {
    std::array<int, 3> k{0, 0, 0};
    const std::size_t hh = static_cast<std::size_t>(h);
    const std::size_t nn = static_cast<std::size_t>(n);
    k[0] = static_cast<int>(mode % hh);
    std::size_t rest = mode / hh;
    k[1] = signed_index(static_cast<int>(rest % nn), n);
    if (dim == 3) k[2] = signed_index(static_cast<int>(rest / nn), n);
    return k;
  }
};

SpectralGrid SpectralGrid::make(int dim, int n_per_axis) {
  if (dim != 2 && dim != 3) {
    throw Error(ErrorKind::InvalidArgument, "grid dimension must be 2 or 3, got " + std::to_string(dim));
  }
  const bool power_of_two = n_per_axis > 0 && (n_per_axis & (n_per_axis - 1)) == 0;
  if (!power_of_two || n_per_axis < 8) {
    throw Error(ErrorKind::InvalidArgument,
                "points per axis must be a power of two >= 8, got " + std::to_string(n_per_axis));
  }
  init_fftw_threads();

  auto impl = std::make_shared<Impl>();
  impl->dim = dim;
  impl->n = n_per_axis;
  impl->h = n_per_axis / 2 + 1;
  impl->points = 1;
  for (int d = 0; d < dim; ++d) impl->points *= static_cast<std::size_t>(n_per_axis);
  impl->modes = impl->points / static_cast<std::size_t>(n_per_axis) * static_cast<std::size_t>(impl->h);

  const int nyquist = n_per_axis / 2;
  const int cutoff = n_per_axis / 3;
  const std::size_t modes = impl->modes;
  for (auto& kd : impl->k_deriv) kd.assign(modes, 0.0);
  impl->k_squared.assign(modes, 0.0);
  impl->inv_k_squared.assign(modes, 0.0);
  impl->leray_inv.assign(modes, 0.0);
  impl->dealias_mask.assign(modes, 0.0);
  impl->hermitian_weight.assign(modes, 0.0);
  for (std::size_t m = 0; m < modes; ++m) {
    const auto k = impl->wavevector(m);
    double k2 = 0.0;
    double kd2 = 0.0;
    bool kept = true;
    for (int a = 0; a < dim; ++a) {
      const double ka = k[a];
      k2 += ka * ka;
      const double kd = std::abs(k[a]) == nyquist ? 0.0 : ka;
      impl->k_deriv[a][m] = kd;
      kd2 += kd * kd;
      if (std::abs(k[a]) > cutoff) kept = false;
    }
    impl->k_squared[m] = k2;
    impl->inv_k_squared[m] = k2 > 0.0 ? 1.0 / k2 : 0.0;
    impl->leray_inv[m] = kd2 > 0.0 ? 1.0 / kd2 : 0.0;
    impl->dealias_mask[m] = kept ? 1.0 : 0.0;
    impl->hermitian_weight[m] = (k[0] == 0 || k[0] == nyquist) ? 1.0 : 2.0;
  }

  {
    std::lock_guard lock(planner_mutex());
    RealBuffer real(impl->points);
    ComplexBuffer spec(impl->modes);
    const int dims[3] = {n_per_axis, n_per_axis, n_per_axis};
    impl->r2c = fftw_plan_dft_r2c(dim, dims, real.data(),
                                  reinterpret_cast<fftw_complex*>(spec.data()), FFTW_ESTIMATE);
    impl->c2r = fftw_plan_dft_c2r(dim, dims, reinterpret_cast<fftw_complex*>(spec.data()),
                                  real.data(), FFTW_ESTIMATE);
  }
  return SpectralGrid(std::move(impl));
}

int SpectralGrid::dim() const { return impl_->dim; }
int SpectralGrid::n() const { return impl_->n; }
int SpectralGrid::dealias_cutoff() const { return impl_->n / 3; }
std::size_t SpectralGrid::points() const { return impl_->points; }
std::size_t SpectralGrid::modes() const { return impl_->modes; }
int SpectralGrid::half() const { return impl_->h; }
double SpectralGrid::spacing() const { return 2.0 * std::numbers::pi / impl_->n; }
double SpectralGrid::cell_volume() const { return std::pow(spacing(), impl_->dim); }
double SpectralGrid::volume() const { return std::pow(2.0 * std::numbers::pi, impl_->dim); }

std::array<double, 3> SpectralGrid::point(std::size_t index) const {
  const std::size_t n = static_cast<std::size_t>(impl_->n);
  const double h = spacing();
  std::array<double, 3> x{0.0, 0.0, 0.0};
  x[0] = h * static_cast<double>(index % n);
  x[1] = h * static_cast<double>((index / n) % n);
  if (impl_->dim == 3) x[2] = h * static_cast<double>(index / (n * n));
  return x;
}

std::array<int, 3> SpectralGrid::wavevector(std::size_t mode) const { return impl_->wavevector(mode); }

std::size_t SpectralGrid::mode_index(std::array<int, 3> k) const {
  const int n = impl_->n;
  const int nyq = n / 2;
  if (k[0] < 0 || k[0] > nyq) throw Error(ErrorKind::InvalidArgument, "k1 outside half spectrum");
  auto wrap = [&](int kj) {
    if (kj > nyq || kj < -nyq) throw Error(ErrorKind::InvalidArgument, "wavenumber beyond Nyquist");
    return static_cast<std::size_t>(kj < 0 ? kj + n : kj);
  };
  const std::size_t h = static_cast<std::size_t>(impl_->h);
  std::size_t rest = wrap(k[1]);
  if (impl_->dim == 3) rest += static_cast<std::size_t>(n) * wrap(k[2]);
  else if (k[2] != 0) throw Error(ErrorKind::InvalidArgument, "k3 must be zero on a 2D grid");
  return static_cast<std::size_t>(k[0]) + h * rest;
}

std::span<const double> SpectralGrid::k_deriv(int axis) const { return impl_->k_deriv.at(axis); }
std::span<const double> SpectralGrid::k_squared() const { return impl_->k_squared; }
std::span<const double> SpectralGrid::inv_k_squared() const { return impl_->inv_k_squared; }
std::span<const double> SpectralGrid::leray_inv() const { return impl_->leray_inv; }
std::span<const double> SpectralGrid::dealias_mask() const { return impl_->dealias_mask; }
std::span<const double> SpectralGrid::hermitian_weight() const { return impl_->hermitian_weight; }

void SpectralGrid::forward(const double* in, std::complex<double>* out) const {
  // r2c preserves its input; the const_cast only satisfies the C signature.
  const auto* self = impl_.get();
  if (fftw_alignment_of(const_cast<double*>(in)) == 0 &&
      fftw_alignment_of(reinterpret_cast<double*>(out)) == 0) {
    fftw_execute_dft_r2c(self->r2c, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
  } else {
    RealBuffer tmp(in, in + self->points);
    ComplexBuffer spec(self->modes);
    fftw_execute_dft_r2c(self->r2c, tmp.data(), reinterpret_cast<fftw_complex*>(spec.data()));
    std::copy(spec.begin(), spec.end(), out);
  }
  kernels::active().scale(1.0 / static_cast<double>(self->points), reinterpret_cast<double*>(out),
                          2 * self->modes);
}

void SpectralGrid::inverse(const std::complex<double>* in, double* out) const {
  const auto* self = impl_.get();
  // c2r overwrites its input.
  ComplexBuffer scratch(in, in + self->modes);
  if (fftw_alignment_of(out) == 0) {
    fftw_execute_dft_c2r(self->c2r, reinterpret_cast<fftw_complex*>(scratch.data()), out);
  } else {
    RealBuffer tmp(self->points);
    fftw_execute_dft_c2r(self->c2r, reinterpret_cast<fftw_complex*>(scratch.data()), tmp.data());
    std::copy(tmp.begin(), tmp.end(), out);
  }
}

bool SpectralGrid::operator==(const SpectralGrid& other) const {
  return impl_ == other.impl_ || (impl_->dim == other.impl_->dim && impl_->n == other.impl_->n);
}

}  // namespace npd
