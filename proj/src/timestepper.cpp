// SPDX-License-Identifier: Apache-2.0
#include "npd/timestepper.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "npd/errors.hpp"
#include "npd/kernels.hpp"
#include "npd/spectral.hpp"

namespace npd {

double negativity_floor_of(const NpdState& state) {
  double m = 0.0;
  for (const auto& c : state.concentrations()) m = std::max(m, c.max_abs());
  return 1e-6 * m;
}

Stepper::Stepper(const Model& model, StepperConfig config) : model_(model), config_(config) {
  if (config_.dt && !(*config_.dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
  if (!(config_.cfl > 0.0 && config_.cfl <= 1.0)) throw Error(ErrorKind::InvalidArgument, "cfl must lie in (0, 1]");
  if (!(config_.dt_max > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt_max must be positive");
  if (!(config_.output_every > 0.0)) throw Error(ErrorKind::InvalidArgument, "output_every must be positive");
  if (config_.dt_refresh < 1) throw Error(ErrorKind::InvalidArgument, "dt_refresh must be >= 1");
}

NpdState Stepper::step(const NpdState& state, double dt, std::optional<double> negativity_floor) const {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
  const auto& g = model_.grid();
  const auto& kt = kernels::active();
  const std::size_t modes = g.modes();
  const std::size_t ns = state.species();

  std::vector<double> e(modes);
  const auto k2 = g.k_squared();
  const double D = model_.params().diffusivity;
  for (std::size_t m = 0; m < modes; ++m) e[m] = std::exp(-D * k2[m] * dt);

  SpeciesSpectra ch;
  ch.reserve(ns);
  for (const auto& c : state.concentrations()) ch.push_back(spectral::forward(c));
  const SpeciesSpectra n0 = model_.nonlinear_spectra(state);

  SpeciesFields predicted;
  predicted.reserve(ns);
  SpectralField work(g);
  for (std::size_t i = 0; i < ns; ++i) {
    kt.if_predictor(e.data(), dt, ch[i].raw(), n0[i].raw(), work.raw(), modes);
    predicted.push_back(spectral::inverse(work));
  }
  const NpdState mid(state.time() + dt, std::move(predicted));
  const SpeciesSpectra n1 = model_.nonlinear_spectra(mid);

  SpeciesFields next;
  next.reserve(ns);
  const double floor = negativity_floor.value_or(negativity_floor_of(state));
  for (std::size_t i = 0; i < ns; ++i) {
    kt.if_corrector(e.data(), dt, ch[i].raw(), n0[i].raw(), n1[i].raw(), work.raw(), modes);
    RealField c = spectral::inverse(work);
    if (!c.all_finite()) {
      throw Error(ErrorKind::NonFinite, "species " + std::to_string(i + 1) + " became non-finite at t = " +
                                            std::to_string(state.time() + dt));
    }
    const double lo = c.min();
    if (lo < -floor) {
      throw Error(ErrorKind::NegativityBreach, "species " + std::to_string(i + 1) + " reached " +
                                                   std::to_string(lo) + " at t = " +
                                                   std::to_string(state.time() + dt));
    }
    next.push_back(std::move(c));
  }
  return NpdState(state.time() + dt, std::move(next));
}

double Stepper::stable_dt(const NpdState& state) const {
  const DerivedFields& d = model_.derived(state);
  const double drift = model_.params().diffusivity * model_.params().valence_magnitude();
  const std::size_t pts = model_.grid().points();
  double vmax = 0.0;
  for (std::size_t p = 0; p < pts; ++p) {
    double u2 = 0.0;
    double g2 = 0.0;
    for (std::size_t a = 0; a < d.velocity.size(); ++a) {
      u2 += d.velocity[a][p] * d.velocity[a][p];
      g2 += d.grad_phi[a][p] * d.grad_phi[a][p];
    }
    vmax = std::max(vmax, std::sqrt(u2) + drift * std::sqrt(g2));
  }
  if (!(vmax > 0.0)) return config_.dt_max;
  return std::min(config_.cfl * model_.grid().spacing() / vmax, config_.dt_max);
}

NpdState Stepper::integrate(NpdState state, const Observers& observers) const {
  EnsembleObservers wrapped;
  wrapped.emit_initial = observers.emit_initial;
  if (observers.on_output) {
    wrapped.on_output = [&](std::span<const NpdState> s) { observers.on_output(s.front()); };
  }
  if (observers.on_step) {
    wrapped.on_step = [&](std::span<const NpdState> b, std::span<const NpdState> a, double dt) {
      observers.on_step(b.front(), a.front(), dt);
    };
  }
  std::vector<NpdState> states;
  states.push_back(std::move(state));
  auto out = integrate_ensemble(std::move(states), wrapped);
  return std::move(out.front());
}

std::vector<NpdState> Stepper::integrate_ensemble(std::vector<NpdState> states,
                                                  const EnsembleObservers& observers) const {
  if (states.empty()) return states;
  for (const auto& s : states) {
    if (s.time() != states.front().time()) {
      throw Error(ErrorKind::InvalidArgument, "ensemble members must start at the same time");
    }
  }
  std::vector<double> floors;
  for (const auto& s : states) floors.push_back(negativity_floor_of(s));

  const double every = config_.output_every;
  const double t_end = config_.t_end;
  double t = states.front().time();
  if (observers.emit_initial && observers.on_output) observers.on_output(states);
  if (!(t_end > t)) return states;

  long k = static_cast<long>(std::floor(t / every * (1.0 + 1e-12) + 1e-12));
  long total_steps = 0;
  while (t < t_end) {
    ++k;
    double target = static_cast<double>(k) * every;
    if (target >= t_end * (1.0 - 1e-12)) target = t_end;

    long done_in_interval = 0;
    long steps_left = 0;
    double dt = 0.0;
    while (t < target) {
      if (done_in_interval % config_.dt_refresh == 0 || steps_left == 0) {
        const double dt_wanted = config_.dt ? *config_.dt : stable_dt(states.front());
        const double remaining = target - t;
        steps_left = std::max<long>(1, static_cast<long>(std::ceil(remaining / dt_wanted * (1.0 - 1e-12))));
        dt = remaining / static_cast<double>(steps_left);
      }
      if (total_steps >= config_.max_steps) {
        throw Error(ErrorKind::TimeoutIncomplete, "reached max_steps = " + std::to_string(config_.max_steps) +
                                                      " at t = " + std::to_string(t));
      }
      std::vector<NpdState> next;
      next.reserve(states.size());
      for (std::size_t j = 0; j < states.size(); ++j) next.push_back(step(states[j], dt, floors[j]));
      --steps_left;
      if (steps_left == 0) {
        for (auto& s : next) s.set_time(target);
      }
      if (observers.on_step) observers.on_step(states, next, dt);
      states = std::move(next);
      t = states.front().time();
      ++done_in_interval;
      ++total_steps;
    }
    if (observers.on_output) observers.on_output(states);
  }
  return states;
}

}  // namespace npd
