// SPDX-License-Identifier: Apache-2.0
#include "npd/field.hpp"

#include <cmath>

#include "npd/errors.hpp"
#include "npd/kernels.hpp"

namespace npd {
namespace {

void require_same_grid(const SpectralGrid& a, const SpectralGrid& b) {
  if (!(a == b)) throw Error(ErrorKind::InvalidArgument, "fields live on different grids");
}

}  // namespace

double RealField::mean() const {
  return kernels::active().sum(data(), size()) / static_cast<double>(size());
}

double RealField::min() const { return kernels::active().min(data(), size()); }

double RealField::max_abs() const { return kernels::active().max_abs(data(), size()); }

bool RealField::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

RealField& RealField::operator+=(const RealField& other) {
  require_same_grid(grid_, other.grid_);
  kernels::active().axpy(1.0, other.data(), data(), size());
  return *this;
}

RealField& RealField::operator-=(const RealField& other) {
  require_same_grid(grid_, other.grid_);
  kernels::active().axpy(-1.0, other.data(), data(), size());
  return *this;
}

RealField& RealField::operator*=(double a) {
  kernels::active().scale(a, data(), size());
  return *this;
}

std::complex<double> SpectralField::at(std::array<int, 3> k) const {
  if (k[0] >= 0) return coeffs_[grid_.mode_index(k)];
  return std::conj(coeffs_[grid_.mode_index({-k[0], -k[1], -k[2]})]);
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  require_same_grid(grid_, other.grid_);
  kernels::active().axpy(1.0, other.raw(), raw(), 2 * size());
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  require_same_grid(grid_, other.grid_);
  kernels::active().axpy(-1.0, other.raw(), raw(), 2 * size());
  return *this;
}

SpectralField& SpectralField::operator*=(double a) {
  kernels::active().scale(a, raw(), 2 * size());
  return *this;
}

}  // namespace npd
