// SPDX-License-Identifier: Apache-2.0
#include "npd/spectral.hpp"

#include <cmath>
#include <cstdlib>
#include <vector>

#include "npd/errors.hpp"
#include "npd/kernels.hpp"

namespace npd::spectral {

SpectralField forward(const RealField& f) {
  SpectralField out(f.grid());
  f.grid().forward(f.data(), out.data());
  return out;
}

RealField inverse(const SpectralField& f) {
  RealField out(f.grid());
  f.grid().inverse(f.data(), out.data());
  return out;
}

SpectralVector forward(const VectorField& v) {
  SpectralVector out;
  out.reserve(v.size());
  for (const auto& c : v) out.push_back(forward(c));
  return out;
}

VectorField inverse(const SpectralVector& v) {
  VectorField out;
  out.reserve(v.size());
  for (const auto& c : v) out.push_back(inverse(c));
  return out;
}

SpectralVector gradient(const SpectralField& f) {
  const auto& grid = f.grid();
  const auto& kt = kernels::active();
  SpectralVector out;
  out.reserve(static_cast<std::size_t>(grid.dim()));
  for (int a = 0; a < grid.dim(); ++a) {
    SpectralField g(grid);
    kt.cmul_imag(grid.k_deriv(a).data(), f.raw(), g.raw(), f.size());
    out.push_back(std::move(g));
  }
  return out;
}

SpectralField divergence(const SpectralVector& v) {
  if (v.empty()) throw Error(ErrorKind::InvalidArgument, "divergence of an empty vector field");
  const auto& grid = v.front().grid();
  if (static_cast<int>(v.size()) != grid.dim()) {
    throw Error(ErrorKind::InvalidArgument, "vector field has the wrong number of components");
  }
  const auto& kt = kernels::active();
  SpectralField out(grid);
  for (int a = 0; a < grid.dim(); ++a) {
    kt.cmul_imag_acc(grid.k_deriv(a).data(), v[a].raw(), out.raw(), out.size());
  }
  return out;
}

SpectralField laplacian(const SpectralField& f) {
  const auto& grid = f.grid();
  std::vector<double> m(grid.k_squared().begin(), grid.k_squared().end());
  for (double& x : m) x = -x;
  SpectralField out(grid);
  kernels::active().cmul_real(m.data(), f.raw(), out.raw(), f.size());
  return out;
}

SpectralField inverse_laplacian(const SpectralField& f) {
  const double mean = std::abs(f[0]);
  const double norm = l2_norm(f);
  if (mean > 1e-10 * norm) {
    throw Error(ErrorKind::NonNeutralSource,
                "Poisson source has nonzero mean " + std::to_string(f[0].real()));
  }
  SpectralField out(f.grid());
  kernels::active().cmul_real(f.grid().inv_k_squared().data(), f.raw(), out.raw(), f.size());
  return out;
}

SpectralField dealias(const SpectralField& f) {
  SpectralField out(f.grid());
  kernels::active().cmul_real(f.grid().dealias_mask().data(), f.raw(), out.raw(), f.size());
  return out;
}

void dealias_in_place(SpectralField& f) {
  kernels::active().cmul_real(f.grid().dealias_mask().data(), f.raw(), f.raw(), f.size());
}

void hermitian_symmetrize(SpectralField& f) {
  const auto& grid = f.grid();
  const int nyq = grid.n() / 2;
  for (std::size_t m = 0; m < f.size(); ++m) {
    const auto k = grid.wavevector(m);
    if (k[0] != 0 && k[0] != nyq) continue;
    auto neg = [nyq](int kj) { return std::abs(kj) == nyq ? kj : -kj; };
    const std::size_t partner = grid.mode_index({k[0], neg(k[1]), neg(k[2])});
    if (partner < m) continue;
    const std::complex<double> avg = 0.5 * (f[m] + std::conj(f[partner]));
    f[m] = avg;
    f[partner] = std::conj(avg);
  }
}

double sobolev_norm(const SpectralField& f, double s, SobolevKind kind) {
  const auto& grid = f.grid();
  const auto k2 = grid.k_squared();
  const auto hw = grid.hermitian_weight();
  std::vector<double> w(f.size());
  for (std::size_t m = 0; m < w.size(); ++m) {
    const double base = kind == SobolevKind::Homogeneous ? k2[m] : 1.0 + k2[m];
    w[m] = hw[m] * (s == 0.0 ? 1.0 : std::pow(base, s));
  }
  return std::sqrt(grid.volume() * kernels::active().weighted_norm2(w.data(), f.raw(), f.size()));
}

double l2_norm(const SpectralField& f) {
  const auto& grid = f.grid();
  return std::sqrt(grid.volume() *
                   kernels::active().weighted_norm2(grid.hermitian_weight().data(), f.raw(), f.size()));
}

double lp_norm(const RealField& f, int p, double shift) {
  if (p < 1) throw Error(ErrorKind::InvalidArgument, "Lp exponent must be >= 1");
  const double s = kernels::active().sum_abs_pow(f.data(), shift, p, f.size());
  return std::pow(f.grid().cell_volume() * s, 1.0 / p);
}

double v_inner(std::span<const SpectralField> a, std::span<const SpectralField> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::InvalidArgument, "species count mismatch");
  if (a.empty()) return 0.0;
  const auto& grid = a.front().grid();
  const auto k2 = grid.k_squared();
  const auto hw = grid.hermitian_weight();
  std::vector<double> w(grid.modes());
  for (std::size_t m = 0; m < w.size(); ++m) w[m] = hw[m] * (1.0 + k2[m]);
  const auto& kt = kernels::active();
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i].grid() == grid) || !(b[i].grid() == grid)) {
      throw Error(ErrorKind::InvalidArgument, "species fields live on different grids");
    }
    acc += kt.weighted_dot(w.data(), a[i].raw(), b[i].raw(), grid.modes());
  }
  return grid.volume() * acc;
}

double v_norm(std::span<const SpectralField> a) { return std::sqrt(std::max(0.0, v_inner(a, a))); }

SpectralField resample(const SpectralField& f, const SpectralGrid& target) {
  const auto& source = f.grid();
  if (source.dim() != target.dim()) {
    throw Error(ErrorKind::InvalidArgument, "resample requires grids of equal dimension");
  }
  const int limit = std::min(source.n(), target.n()) / 2;
  SpectralField out(target);
  for (std::size_t m = 0; m < f.size(); ++m) {
    const auto k = source.wavevector(m);
    bool inside = true;
    for (int a = 0; a < source.dim(); ++a) inside = inside && std::abs(k[a]) < limit;
    if (inside) out[target.mode_index(k)] = f[m];
  }
  return out;
}

}  // namespace npd::spectral
