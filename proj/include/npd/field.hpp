// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <new>
#include <span>
#include <vector>

#include "npd/grid.hpp"

namespace npd {

template <class T, std::size_t Alignment = 64>
struct AlignedAllocator {
  using value_type = T;

  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U, Alignment>&) noexcept {}

  template <class U>
  struct rebind {
    using other = AlignedAllocator<U, Alignment>;
  };

  T* allocate(std::size_t count) {
    return static_cast<T*>(::operator new(count * sizeof(T), std::align_val_t{Alignment}));
  }
  void deallocate(T* ptr, std::size_t) noexcept {
    ::operator delete(ptr, std::align_val_t{Alignment});
  }

  friend bool operator==(const AlignedAllocator&, const AlignedAllocator&) { return true; }
};

using RealBuffer = std::vector<double, AlignedAllocator<double>>;
using ComplexBuffer = std::vector<std::complex<double>, AlignedAllocator<std::complex<double>>>;

// Point values of a real periodic field.
class RealField {
 public:
  explicit RealField(SpectralGrid grid, double value = 0.0)
      : grid_(std::move(grid)), values_(grid_.points(), value) {}

  template <class Fn>
  static RealField from_function(const SpectralGrid& grid, Fn&& fn) {
    RealField f(grid);
    for (std::size_t i = 0; i < f.size(); ++i) f.values_[i] = fn(grid.point(i));
    return f;
  }

  const SpectralGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  // Grid-quadrature mean (1/|T|) int f dx.
  double mean() const;
  double min() const;
  double max_abs() const;
  bool all_finite() const;

  RealField& operator+=(const RealField& other);
  RealField& operator-=(const RealField& other);
  RealField& operator*=(double a);

 private:
  SpectralGrid grid_;
  RealBuffer values_;
};

// Half-spectrum Fourier coefficients of a real periodic field.
class SpectralField {
 public:
  explicit SpectralField(SpectralGrid grid) : grid_(std::move(grid)), coeffs_(grid_.modes()) {}

  const SpectralGrid& grid() const { return grid_; }
  std::size_t size() const { return coeffs_.size(); }
  std::complex<double>* data() { return coeffs_.data(); }
  const std::complex<double>* data() const { return coeffs_.data(); }
  // Interleaved (re, im) view for the kernels.
  double* raw() { return reinterpret_cast<double*>(coeffs_.data()); }
  const double* raw() const { return reinterpret_cast<const double*>(coeffs_.data()); }
  std::complex<double>& operator[](std::size_t m) { return coeffs_[m]; }
  const std::complex<double>& operator[](std::size_t m) const { return coeffs_[m]; }

  // Coefficient for any wavevector (negative k1 read through conjugate symmetry).
  std::complex<double> at(std::array<int, 3> k) const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(double a);

 private:
  SpectralGrid grid_;
  ComplexBuffer coeffs_;
};

using VectorField = std::vector<RealField>;
using SpectralVector = std::vector<SpectralField>;
// One field per ionic species.
using SpeciesFields = std::vector<RealField>;
using SpeciesSpectra = std::vector<SpectralField>;

}  // namespace npd
