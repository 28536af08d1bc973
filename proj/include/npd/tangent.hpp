// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "npd/timestepper.hpp"

namespace npd {

// Perturbation of all species concentrations, stored spectrally.
using TangentVector = SpeciesSpectra;

// Linearized NPD flow about a base trajectory. With R = sum_i z_i xi_i,
// -Delta Psi = R and du = -P(R grad Phi + q grad Psi):
//   L_i xi = D Lap xi_i - div(xi_i (u - D z_i grad Phi) + c_i (du - D z_i grad Psi)).
class TangentFlow {
 public:
  explicit TangentFlow(const Model& model);

  const Model& model() const { return model_; }

  // Dealiased transport part of L(c) xi (everything except D Lap xi).
  TangentVector nonlinear(const NpdState& base, const TangentVector& xi) const;
  // Full L(c) xi.
  TangentVector apply(const NpdState& base, const TangentVector& xi) const;

  // One step of the integrating-factor Heun scheme: the predictor uses the
  // base at t, the corrector the base at t + dt.
  TangentVector step(const NpdState& base, const NpdState& base_next, const TangentVector& xi, double dt) const;

 private:
  const Model& model_;
};

TangentVector tangent_tendency(const Model& model, const NpdState& base, const TangentVector& xi);

// Advances every vector of the set by one frozen-base step. Throws NonFinite
// on overflow.
std::vector<TangentVector> step_tangents(const Model& model, const NpdState& base, const NpdState& base_next,
                                         std::vector<TangentVector> set, double dt);

// Projection onto the charge-free tangent space sum_i z_i xi_i = 0.
void project_charge_free(TangentVector& xi, std::span<const double> valences);

// Modified Gram-Schmidt in the V inner product. Returns log |r_jj| for each
// vector. Throws UnderResolved when a vector loses more than 1 - 1e-12 of its
// squared norm to the preceding ones.
std::vector<double> orthonormalize(std::vector<TangentVector>& set);

// Gram matrix G_jl = (xi_j, xi_l)_V of the leading `count` vectors.
std::vector<double> gram_matrix(std::span<const TangentVector> set, std::size_t count);

// log det(G)^{1/2} of the leading `count` vectors, empty when G is singular
// (reciprocal condition estimate below 1e-12).
std::optional<double> log_gram_volume(std::span<const TangentVector> set, std::size_t count);
// det(G)^{1/2}; 0 for singular sets.
double gram_volume(std::span<const TangentVector> set);

// V-orthonormal random band-limited tangent vectors.
std::vector<TangentVector> random_tangents(const SpectralGrid& grid, std::size_t species, std::size_t count,
                                           std::uint64_t seed, int k_max, bool charge_free,
                                           std::span<const double> valences);

struct VolumeDecayOptions {
  std::vector<int> n_list{1, 2, 4, 8};
  double t0 = 0.0;  // fit window
  double t1 = 1.0;
  int reorth_every = 10;
  bool charge_free = false;
  std::uint64_t seed = 7;
  int k_max = 0;  // 0: dealias cutoff
};

struct VolumeRate {
  int n = 0;
  double rate = 0.0;  // -d/dt log V_n
  double rate_over_n2 = 0.0;
  double fit_r2 = 0.0;
  double t0 = 0.0;
  double t1 = 0.0;
};

struct VolumeDecayResult {
  std::vector<double> times;
  std::vector<std::vector<double>> log_volumes;  // [n_list index][time index]
  std::vector<VolumeRate> rates;
};

// Advances the base state to t1 together with max(n_list) tangent vectors and
// records log V_n for every n in n_list after each step. Volumes of nested
// leading subsets come from the same vectors. `base_observers` see the base
// trajectory as a normal integration to t1 would.
VolumeDecayResult volume_decay_experiment(const Stepper& stepper, const NpdState& w0, const VolumeDecayOptions& options,
                                          const Observers& base_observers = {});

// Least-squares slopes of log V_n over [t0, t1].
std::vector<VolumeRate> fit_volume_rates(std::span<const double> times,
                                         const std::vector<std::vector<double>>& log_volumes,
                                         std::span<const int> n_list, double t0, double t1);

}  // namespace npd
