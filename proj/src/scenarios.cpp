// SPDX-License-Identifier: Apache-2.0
#include "npd/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "npd/errors.hpp"
#include "npd/spectral.hpp"

namespace npd {

SpectralField random_band_limited_spectrum(const SpectralGrid& grid, int k_max, std::mt19937_64& rng) {
  if (k_max < 1 || 2 * k_max >= grid.n()) {
    throw Error(ErrorKind::InvalidArgument, "k_max must satisfy 1 <= k_max < n/2");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  SpectralField f(grid);
  const int k3_max = grid.dim() == 3 ? k_max : 0;
  for (int k3 = -k3_max; k3 <= k3_max; ++k3) {
    for (int k2 = -k_max; k2 <= k_max; ++k2) {
      for (int k1 = 0; k1 <= k_max; ++k1) {
        if (k1 == 0 && k2 == 0 && k3 == 0) continue;
        const double re = normal(rng);
        const double im = normal(rng);
        const double k2sum = static_cast<double>(k1 * k1 + k2 * k2 + k3 * k3);
        f[grid.mode_index({k1, k2, k3})] = std::complex<double>(re, im) / (1.0 + k2sum);
      }
    }
  }
  spectral::hermitian_symmetrize(f);
  return f;
}

RealField band_limited_noise(const SpectralGrid& grid, int k_max, std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::mt19937_64 rng(seq);
  RealField g = spectral::inverse(random_band_limited_spectrum(grid, k_max, rng));
  const double m = g.max_abs();
  if (m > 0.0) g *= 1.0 / m;
  return g;
}

void ScenarioSpec::validate() const {
  if (dim != 2 && dim != 3) throw Error(ErrorKind::InvalidArgument, "dim must be 2 or 3");
  if (n < 8 || (n & (n - 1)) != 0) throw Error(ErrorKind::InvalidArgument, "n must be a power of two >= 8");
  SpeciesParams::make(diffusivity, valences);
  if (means.size() != valences.size()) {
    throw Error(ErrorKind::InvalidArgument, "means and valences must have the same length");
  }
  for (double m : means) {
    if (!(m > 0.0) || !std::isfinite(m)) throw Error(ErrorKind::InvalidArgument, "species means must be positive");
  }
  const double min_mean = *std::min_element(means.begin(), means.end());
  if (!(epsilon >= 0.0 && epsilon < min_mean)) {
    throw Error(ErrorKind::InvalidArgument, "epsilon must satisfy 0 <= epsilon < min_i mean_i");
  }
  const int cutoff = n / 3;
  if (k_max < 0 || k_max > cutoff) {
    throw Error(ErrorKind::InvalidArgument, "k_max must lie in [0, " + std::to_string(cutoff) + "]");
  }
  if (body_k_max < 0 || body_k_max > cutoff) {
    throw Error(ErrorKind::InvalidArgument, "body_k_max must lie in [0, " + std::to_string(cutoff) + "]");
  }
  if (!(body_amplitude >= 0.0) || !std::isfinite(body_amplitude)) {
    throw Error(ErrorKind::InvalidArgument, "body amplitude must be non-negative");
  }
}

SpectralGrid ScenarioSpec::grid() const { return SpectralGrid::make(dim, n); }

SpeciesParams ScenarioSpec::params() const { return SpeciesParams::make(diffusivity, valences); }

int ScenarioSpec::band() const { return k_max > 0 ? k_max : n / 4; }

NpdState random_state(const ScenarioSpec& spec) {
  spec.validate();
  const SpectralGrid grid = spec.grid();
  SpeciesFields c;
  for (std::size_t i = 0; i < spec.means.size(); ++i) {
    RealField ci = band_limited_noise(grid, spec.band(), spec.seed, i);
    ci *= spec.epsilon;
    ci += RealField(grid, spec.means[i]);
    c.push_back(std::move(ci));
  }
  return NpdState(0.0, std::move(c));
}

BodyCharge neutral_body_charge(const ScenarioSpec& spec, const NpdState& state) {
  const SpectralGrid& grid = state.grid();
  if (spec.body == BodyRecipe::None) return BodyCharge::none(grid);
  const int band = spec.body_k_max > 0 ? spec.body_k_max : spec.band();
  RealField body = band_limited_noise(grid, band, spec.body_seed, 0);
  body *= spec.body_amplitude;
  const RealField rho = charge_density(state.concentrations(), spec.params());
  body += RealField(grid, -(rho.mean() + body.mean()));
  return BodyCharge(std::move(body));
}

NpdState gaussian_blob_state(const ScenarioSpec& spec, const std::vector<GaussianBlob>& blobs) {
  spec.validate();
  const SpectralGrid grid = spec.grid();
  const double period = 2.0 * std::numbers::pi;
  SpeciesFields c;
  for (double m : spec.means) c.emplace_back(grid, m);
  for (const auto& b : blobs) {
    if (b.species >= c.size()) throw Error(ErrorKind::InvalidArgument, "blob species index out of range");
    if (!(b.width > 0.0)) throw Error(ErrorKind::InvalidArgument, "blob width must be positive");
    const int images3 = grid.dim() == 3 ? 1 : 0;
    RealField bump = RealField::from_function(grid, [&](const std::array<double, 3>& x) {
      double acc = 0.0;
      for (int m3 = -images3; m3 <= images3; ++m3) {
        for (int m2 = -1; m2 <= 1; ++m2) {
          for (int m1 = -1; m1 <= 1; ++m1) {
            const double d1 = x[0] - b.center[0] - m1 * period;
            const double d2 = x[1] - b.center[1] - m2 * period;
            const double d3 = grid.dim() == 3 ? x[2] - b.center[2] - m3 * period : 0.0;
            acc += std::exp(-(d1 * d1 + d2 * d2 + d3 * d3) / (2.0 * b.width * b.width));
          }
        }
      }
      return acc;
    });
    if (!(b.amplitude >= 0.0)) throw Error(ErrorKind::InvalidArgument, "blob amplitude must be non-negative");
    bump *= b.amplitude;
    c[b.species] += bump;
  }
  return NpdState(0.0, std::move(c));
}

Scenario build_scenario(const ScenarioSpec& spec) {
  NpdState state = random_state(spec);
  BodyCharge body = neutral_body_charge(spec, state);
  const ValidationReport report = Model(spec.params(), body).validate(state);
  if (report.non_neutral) {
    throw Error(ErrorKind::NonNeutralSource, "initial state is not charge neutral (use a body charge or neutral means)");
  }
  return Scenario{spec.params(), std::move(body), std::move(state)};
}

}  // namespace npd
