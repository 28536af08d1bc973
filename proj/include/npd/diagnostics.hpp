// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "npd/model.hpp"

namespace npd {

inline constexpr std::array<int, 4> kLpExponents{2, 3, 4, 6};

struct DiagnosticsRecord {
  double time = 0.0;
  std::vector<double> means;
  double min_c = 0.0;
  std::vector<double> grad_l2;            // |grad c_i|_L2
  std::array<double, 4> rho_dev{};        // |rho - rhobar|_Lp, p in kLpExponents
  std::array<double, 4> sigma_dev{};      // |sigma - sigmabar|_Lp
  std::array<double, 3> h_norms{};        // sum_i |(-Delta)^{k/2} c_i|_L2^2, k = 1, 2, 3
  double energy_residual = 0.0;
};

DiagnosticsRecord observe(const Model& model, const NpdState& state, double energy_residual = 0.0);

// Column order of the diagnostics CSV.
std::vector<std::string> diagnostics_header(std::size_t species);
std::vector<double> diagnostics_row(const DiagnosticsRecord& record);

// Terms of the charge/total-concentration energy balance
//   d/dt E + D (|grad rho|^2 + z^2 |grad sigma|^2 + z^2 |rho sqrt(sigma)|^2)
//       = -D z^2 int rho rho_tilde sigma,     E = (|rho|^2 + z^2 |sigma|^2) / 2.
struct EnergyTerms {
  double energy = 0.0;
  double dissipation = 0.0;
  double body_work = 0.0;        // D z^2 int rho rho_tilde sigma
  double clamped_fraction = 0.0; // share of |sigma| mass removed by clamping sigma at 0
  double loss_rate() const { return dissipation + body_work; }
};

EnergyTerms energy_terms(const Model& model, const NpdState& state);

// |(E(b) - E(a)) / dt + (Q(a) + Q(b)) / 2| / ((E(a) + E(b)) / 2), Q = loss_rate.
// Returns NaN when clamping sigma removed more than 0.1% of its mass.
double energy_balance_residual(const Model& model, const NpdState& a, const NpdState& b);

// Fit of y(t) ~ C1 exp(-rate t) + C2 on t in [t0, t1].
struct DecayFit {
  double rate = 0.0;
  double offset = 0.0;  // C2
  double r2 = 0.0;
  bool degenerate = false;
  bool plateau = false;  // C2 taken from the tail median
  std::size_t points_used = 0;
};

// The offset is the tail median when the window's tail has levelled off
// (tail log-slope below 10% of the head log-slope); otherwise the series is
// still decaying and C2 = 0. The rate is then a least-squares fit of
// log(y - C2), restricted to points standing clear of the tail noise.
// Flat windows return a degenerate fit (rate 0, r2 0).
DecayFit fit_decay_rate(std::span<const double> t, std::span<const double> y, double t0, double t1);

// Terms of |f - fbar|_p^p <= C p^2 | |f - fbar|^{(p-2)/2} grad f |_2^2 + 2/|T| |f - fbar|_{p/2}^p.
struct PoincareTerms {
  double lhs = 0.0;
  double gradient_term = 0.0;
  double lower_order_term = 0.0;
  int p = 2;

  // lhs / (p^2 gradient_term + lower_order_term), 0 for constant f.
  double ratio() const;
  // lhs / gradient_term; for p = 2 this is the Rayleigh quotient, bounded by 1.
  double gradient_ratio() const;
};

PoincareTerms poincare_terms(const RealField& f, int p);
double poincare_ratio(const RealField& f, int p);

// V-norm distance of two states.
double v_distance(const NpdState& a, const NpdState& b);

struct SeparationPoint {
  double time = 0.0;
  double distance = 0.0;
  double ratio = 0.0;         // distance / initial distance
  double log_distance = 0.0;  // -inf only if the trajectories coincide
};

// Throws MismatchedTrajectories unless both sequences share output times.
std::vector<SeparationPoint> twin_separation(std::span<const NpdState> a, std::span<const NpdState> b);

}  // namespace npd
