// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace npd {

// Uniform periodic grid on [0, 2*pi]^dim together with its Fourier lattice.
//
// Real layout: index = i1 + n * (i2 + n * i3), x1 fastest.
// Spectral layout (real-to-complex half spectrum along x1):
//   mode = j1 + h * (j2 + n * j3), h = n/2 + 1, j1 in [0, n/2].
// Coefficients follow f(x) = sum_k fhat(k) exp(i k.x), so forward() divides
// by the point count and Parseval reads |f|^2_{L2} = (2 pi)^d sum |fhat|^2.
//
// A grid is an immutable shared handle; copies are cheap and thread-safe.
class SpectralGrid {
 public:
  static SpectralGrid make(int dim, int n_per_axis);

  int dim() const;
  int n() const;
  // floor(n/3): modes with any |k_j| above this are removed by dealiasing.
  int dealias_cutoff() const;

  std::size_t points() const;
  std::size_t modes() const;
  // Half-spectrum length along x1.
  int half() const;

  double spacing() const;      // 2 pi / n
  double cell_volume() const;  // spacing^dim
  double volume() const;       // (2 pi)^dim

  std::array<double, 3> point(std::size_t index) const;
  // Integer wavevector of a spectral mode; the Nyquist entry is +n/2.
  std::array<int, 3> wavevector(std::size_t mode) const;
  // Spectral index of k; requires k1 >= 0 and all |k_j| <= n/2.
  std::size_t mode_index(std::array<int, 3> k) const;

  // Per-mode multiplier tables, each of length modes().
  std::span<const double> k_deriv(int axis) const;   // k_j, zero at Nyquist
  std::span<const double> k_squared() const;         // |k|^2
  std::span<const double> inv_k_squared() const;     // 1/|k|^2, zero at k = 0
  std::span<const double> leray_inv() const;         // 1/|k_deriv|^2, zero where k_deriv = 0
  std::span<const double> dealias_mask() const;      // 1 kept, 0 removed
  std::span<const double> hermitian_weight() const;  // multiplicity of the mode pair (1 or 2)

  // Normalized transforms on raw aligned buffers of points() doubles and
  // modes() complex values. inverse() leaves its input untouched.
  void forward(const double* in, std::complex<double>* out) const;
  void inverse(const std::complex<double>* in, double* out) const;

  bool operator==(const SpectralGrid& other) const;

 private:
  struct Impl;
  explicit SpectralGrid(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

// Caps FFT worker threads (reads NPD_THREADS once on first grid creation).
int configured_threads();

}  // namespace npd
