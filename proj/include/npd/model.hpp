// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <memory>
#include <vector>

#include "npd/field.hpp"

namespace npd {

// N species with a common diffusivity and valences of equal magnitude.
struct SpeciesParams {
  double diffusivity = 1.0;
  std::vector<double> valences;

  // Throws InvalidArgument unless D > 0, N >= 1 and |z_1| = ... = |z_N| > 0.
  static SpeciesParams make(double diffusivity, std::vector<double> valences);

  std::size_t count() const { return valences.size(); }
  double valence_magnitude() const { return valences.empty() ? 0.0 : std::abs(valences.front()); }
};

// Fixed background charge added to the ionic charge in the Poisson equation.
struct BodyCharge {
  RealField rho_tilde;
  double mean = 0.0;

  explicit BodyCharge(RealField field);
  static BodyCharge none(const SpectralGrid& grid) { return BodyCharge(RealField(grid)); }
  bool is_zero() const;
};

// Fields derived from the concentrations by one Poisson solve and one
// projection.
struct DerivedFields {
  RealField rho;           // sum_i z_i c_i
  RealField total_charge;  // rho + rho_tilde
  RealField phi;           // zero-mean potential
  VectorField grad_phi;
  VectorField velocity;    // divergence-free Darcy velocity
};

// Concentrations at one time instant. The derived-field cache is dropped on
// every write access to the concentrations.
class NpdState {
 public:
  NpdState(double time, SpeciesFields concentrations);

  double time() const { return time_; }
  void set_time(double t) { time_ = t; }

  std::size_t species() const { return c_.size(); }
  const SpectralGrid& grid() const { return c_.front().grid(); }
  const SpeciesFields& concentrations() const { return c_; }
  const RealField& concentration(std::size_t i) const { return c_.at(i); }
  SpeciesFields& mutable_concentrations() {
    derived_.reset();
    return c_;
  }
  bool has_cached_fields() const { return derived_ != nullptr; }

 private:
  friend class Model;
  double time_ = 0.0;
  SpeciesFields c_;
  mutable std::shared_ptr<const DerivedFields> derived_;
  mutable std::uint64_t derived_owner_ = 0;  // id of the Model that filled the cache
};

struct ValidationReport {
  double min_concentration = 0.0;
  double negativity_tolerance = 0.0;
  double neutrality_residual = 0.0;  // |int(rho + rho_tilde)| / scale
  double divergence_residual = 0.0;  // |div u|_L2 / |u|_H1
  std::vector<double> means;
  double rho_mean = 0.0;
  double sigma_mean = 0.0;

  bool negative = false;
  bool non_neutral = false;
  bool divergent = false;

  bool ok() const { return !negative && !non_neutral && !divergent; }
};

RealField charge_density(const SpeciesFields& c, const SpeciesParams& params);
RealField total_concentration(const SpeciesFields& c);

// Neutrality scale 1e-8 (|rho| + |rho_tilde| + eps), where eps is 1e-4 of the
// valence-weighted concentration norms so round-off in the means of O(1)
// concentrations never trips the check.
double neutrality_tolerance(double rho_l2, double body_l2, double charge_scale);

// Phi = (-Delta)^{-1}(rho + rho_tilde) in the zero-mean gauge. Throws
// NonNeutralSource when |int(rho + rho_tilde)| exceeds neutrality_tolerance.
RealField solve_potential(const RealField& rho, const BodyCharge& body, double charge_scale = 0.0);

// vhat - k (k . vhat) / |k|^2 per mode; the mean mode passes through.
SpectralVector leray_project(const SpectralVector& v);

// u = -P dealias((rho + rho_tilde) grad Phi).
VectorField darcy_velocity(const RealField& rho, const BodyCharge& body, const RealField& phi);

class Model {
 public:
  Model(SpeciesParams params, BodyCharge body);

  const SpeciesParams& params() const { return params_; }
  const BodyCharge& body() const { return body_; }
  const SpectralGrid& grid() const { return body_.rho_tilde.grid(); }

  // Cached on the state; computed at most once per concentration snapshot and
  // recomputed when the cache was filled by a different model.
  const DerivedFields& derived(const NpdState& state) const;

  // Dealiased nonlinear part -div(c_i (u - D z_i grad Phi)) of each species.
  SpeciesSpectra nonlinear_spectra(const NpdState& state) const;

  // Full right-hand side F_i = -u.grad c_i + D Lap c_i + D z_i div(c_i grad Phi).
  SpeciesFields tendency(const NpdState& state) const;

  ValidationReport validate(const NpdState& state) const;

  // Divergence multipliers -k_j * dealias_mask shared with the tangent flow.
  std::span<const double> flux_divergence(int axis) const { return flux_div_.at(axis); }

 private:
  void check_state(const NpdState& state) const;

  SpeciesParams params_;
  BodyCharge body_;
  std::array<std::vector<double>, 3> flux_div_;
  std::uint64_t id_;
};

}  // namespace npd
