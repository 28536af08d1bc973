// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "npd/model.hpp"

namespace npd {

// Mean-free random spectrum on all modes with |k_j| <= k_max, amplitudes
// N(0,1) / (1 + |k|^2), conjugate-symmetric. Coefficients are drawn in a fixed
// lattice order, so a given generator state yields the same function on every
// grid with n > 2 k_max.
SpectralField random_band_limited_spectrum(const SpectralGrid& grid, int k_max, std::mt19937_64& rng);

// Mean-free band-limited field scaled to max |g| = 1. `stream` separates
// independent draws from one seed.
RealField band_limited_noise(const SpectralGrid& grid, int k_max, std::uint64_t seed, std::uint64_t stream);

enum class BodyRecipe { None, BandLimited };

struct ScenarioSpec {
  int dim = 3;
  int n = 32;
  double diffusivity = 1.0;
  std::vector<double> valences{1.0, -1.0};
  std::vector<double> means{1.0, 1.0};
  double epsilon = 0.1;  // perturbation amplitude, below every mean
  int k_max = 0;         // 0: n/4
  std::uint64_t seed = 1;
  BodyRecipe body = BodyRecipe::None;
  double body_amplitude = 0.0;
  int body_k_max = 0;  // 0: same as k_max
  std::uint64_t body_seed = 2;

  // Throws InvalidArgument on inconsistent sizes or out-of-range values.
  void validate() const;
  SpectralGrid grid() const;
  SpeciesParams params() const;
  int band() const;
};

// c_i = m_i + epsilon g_i with independent mean-free g_i, |g_i|_inf = 1.
NpdState random_state(const ScenarioSpec& spec);

// Body charge amplitude * g plus the constant that makes int(rho_0 + rho_tilde) = 0.
BodyCharge neutral_body_charge(const ScenarioSpec& spec, const NpdState& state);

struct GaussianBlob {
  std::size_t species = 0;
  std::array<double, 3> center{};
  double width = 0.5;
  double amplitude = 1.0;
};

// spec.means plus non-negative periodized Gaussian bumps. A blob of mass m
// raises its species mean by m / (2 pi)^d.
NpdState gaussian_blob_state(const ScenarioSpec& spec, const std::vector<GaussianBlob>& blobs);

struct Scenario {
  SpeciesParams params;
  BodyCharge body;
  NpdState state;
};

Scenario build_scenario(const ScenarioSpec& spec);

}  // namespace npd
