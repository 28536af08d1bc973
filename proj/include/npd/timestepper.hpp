// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "npd/model.hpp"

namespace npd {

struct StepperConfig {
  std::optional<double> dt;  // empty: stability-driven step size
  double cfl = 0.4;
  double dt_max = 0.01;
  double t_end = 1.0;
  double output_every = 0.1;
  long max_steps = 10'000'000;
  int dt_refresh = 10;  // steps between step-size updates
};

// Callbacks receive read-only snapshots. A single trajectory is an ensemble
// of one.
struct EnsembleObservers {
  std::function<void(std::span<const NpdState>)> on_output;
  std::function<void(std::span<const NpdState> before, std::span<const NpdState> after, double dt)> on_step;
  bool emit_initial = true;
};

struct Observers {
  std::function<void(const NpdState&)> on_output;
  std::function<void(const NpdState& before, const NpdState& after, double dt)> on_step;
  bool emit_initial = true;
};

// Integrating-factor Heun scheme: diffusion is applied exactly through
// E(dt) = exp(-D |k|^2 dt), the nonlinear part N by the trapezoidal corrector
//   c*      = E (c + dt N(c))
//   c(t+dt) = E c + dt/2 (E N(c) + N(c*)).
class Stepper {
 public:
  Stepper(const Model& model, StepperConfig config);

  const Model& model() const { return model_; }
  const StepperConfig& config() const { return config_; }

  // Throws NonFinite, or NegativityBreach when some c_i < -negativity_floor.
  // Without an explicit floor it is 1e-6 max_i |c_i|_inf of the input state.
  NpdState step(const NpdState& state, double dt, std::optional<double> negativity_floor = {}) const;

  // cfl * (2 pi / n) / max_x (|u| + D max|z_i| |grad Phi|), capped at dt_max.
  double stable_dt(const NpdState& state) const;

  // Advances to t_end with output times on multiples of output_every. Each
  // output interval is split into equal steps so the trajectory lands on the
  // output times exactly; this also makes restarts from an output time
  // reproduce the uninterrupted run.
  NpdState integrate(NpdState state, const Observers& observers = {}) const;

  // Several trajectories advanced in lockstep with the step size chosen from
  // the first member.
  std::vector<NpdState> integrate_ensemble(std::vector<NpdState> states,
                                           const EnsembleObservers& observers = {}) const;

 private:
  const Model& model_;
  StepperConfig config_;
};

double negativity_floor_of(const NpdState& state);

}  // namespace npd
