// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "npd/field.hpp"
#include "npd/model.hpp"
#include "npd/scenarios.hpp"

namespace npd::test {

template <class Fn>
RealField field(const SpectralGrid& g, Fn&& fn) {
  return RealField::from_function(g, [&](const std::array<double, 3>& x) { return fn(x[0], x[1], x[2]); });
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

inline double max_abs_diff(const SpectralField& a, const SpectralField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline SpectralField minus(SpectralField a, const SpectralField& b) {
  a -= b;
  return a;
}

// Small random state with an optional band-limited body charge.
inline Scenario random_scenario(int dim, int n, std::uint64_t seed, int k_max, std::vector<double> valences,
                                std::vector<double> means, double epsilon, double body_amplitude = 0.0) {
  ScenarioSpec s;
  s.dim = dim;
  s.n = n;
  s.valences = std::move(valences);
  s.means = std::move(means);
  s.epsilon = epsilon;
  s.k_max = k_max;
  s.seed = seed;
  if (body_amplitude > 0.0) {
    s.body = BodyRecipe::BandLimited;
    s.body_amplitude = body_amplitude;
    s.body_k_max = k_max;
    s.body_seed = seed + 1000;
  }
  return build_scenario(s);
}

}  // namespace npd::test
