// SPDX-License-Identifier: Apache-2.0
#include "npd/tangent.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "npd/errors.hpp"
#include "npd/kernels.hpp"
#include "npd/scenarios.hpp"
#include "npd/spectral.hpp"

namespace npd {
namespace {

std::vector<double> diffusion_factors(const SpectralGrid& g, double D, double dt) {
  std::vector<double> e(g.modes());
  const auto k2 = g.k_squared();
  for (std::size_t m = 0; m < e.size(); ++m) e[m] = std::exp(-D * k2[m] * dt);
  return e;
}

Eigen::MatrixXd gram_of(std::span<const TangentVector> set, std::size_t count) {
  Eigen::MatrixXd g(count, count);
  for (std::size_t j = 0; j < count; ++j) {
    for (std::size_t l = 0; l <= j; ++l) {
      g(j, l) = spectral::v_inner(set[j], set[l]);
      g(l, j) = g(j, l);
    }
  }
  return g;
}

}  // namespace

TangentFlow::TangentFlow(const Model& model) : model_(model) {}

TangentVector TangentFlow::nonlinear(const NpdState& base, const TangentVector& xi) const {
  const auto& params = model_.params();
  if (xi.size() != params.count()) throw Error(ErrorKind::InvalidArgument, "tangent species count mismatch");
  const DerivedFields& d = model_.derived(base);
  const auto& g = model_.grid();
  const auto& kt = kernels::active();
  const std::size_t pts = g.points();
  const std::size_t modes = g.modes();
  const int dim = g.dim();
  const double D = params.diffusivity;

  SpectralField rh(g);
  for (std::size_t i = 0; i < xi.size(); ++i) kt.axpy(params.valences[i], xi[i].raw(), rh.raw(), 2 * modes);
  rh[0] = 0.0;
  const RealField r = spectral::inverse(rh);
  const VectorField grad_psi = spectral::inverse(spectral::gradient(spectral::inverse_laplacian(rh)));

  // du = -P dealias(R grad Phi + q grad Psi)
  SpectralVector force;
  RealField work(g);
  RealField tmp(g);
  for (int a = 0; a < dim; ++a) {
    kt.mul(r.data(), d.grad_phi[a].data(), work.data(), pts);
    kt.mul(d.total_charge.data(), grad_psi[a].data(), tmp.data(), pts);
    kt.axpy(1.0, tmp.data(), work.data(), pts);
    SpectralField fh = spectral::forward(work);
    spectral::dealias_in_place(fh);
    fh *= -1.0;
    force.push_back(std::move(fh));
  }
  const VectorField du = spectral::inverse(leray_project(force));

  TangentVector out;
  out.reserve(xi.size());
  SpectralField flux_hat(g);
  for (std::size_t i = 0; i < xi.size(); ++i) {
    const RealField xi_i = spectral::inverse(xi[i]);
    const RealField& ci = base.concentration(i);
    const double dz = -D * params.valences[i];
    SpectralField acc(g);
    for (int a = 0; a < dim; ++a) {
      // xi_i (u - D z_i grad Phi) + c_i (du - D z_i grad Psi)
      kt.lincomb(1.0, d.velocity[a].data(), dz, d.grad_phi[a].data(), tmp.data(), pts);
      kt.mul(xi_i.data(), tmp.data(), work.data(), pts);
      kt.lincomb(1.0, du[a].data(), dz, grad_psi[a].data(), tmp.data(), pts);
      kt.mul(ci.data(), tmp.data(), tmp.data(), pts);
      kt.axpy(1.0, tmp.data(), work.data(), pts);
      g.forward(work.data(), flux_hat.data());
      kt.cmul_imag_acc(model_.flux_divergence(a).data(), flux_hat.raw(), acc.raw(), modes);
    }
    out.push_back(std::move(acc));
  }
  return out;
}

TangentVector TangentFlow::apply(const NpdState& base, const TangentVector& xi) const {
  TangentVector out = nonlinear(base, xi);
  const auto& g = model_.grid();
  std::vector<double> lap(g.k_squared().begin(), g.k_squared().end());
  for (double& x : lap) x *= -model_.params().diffusivity;
  SpectralField term(g);
  for (std::size_t i = 0; i < out.size(); ++i) {
    kernels::active().cmul_real(lap.data(), xi[i].raw(), term.raw(), g.modes());
    out[i] += term;
  }
  return out;
}

TangentVector TangentFlow::step(const NpdState& base, const NpdState& base_next, const TangentVector& xi,
                                double dt) const {
  const auto& g = model_.grid();
  const auto& kt = kernels::active();
  const std::size_t modes = g.modes();
  const std::vector<double> e = diffusion_factors(g, model_.params().diffusivity, dt);

  const TangentVector n0 = nonlinear(base, xi);
  TangentVector predicted;
  predicted.reserve(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) {
    SpectralField p(g);
    kt.if_predictor(e.data(), dt, xi[i].raw(), n0[i].raw(), p.raw(), modes);
    predicted.push_back(std::move(p));
  }
  const TangentVector n1 = nonlinear(base_next, predicted);
  TangentVector out;
  out.reserve(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) {
    SpectralField c(g);
    kt.if_corrector(e.data(), dt, xi[i].raw(), n0[i].raw(), n1[i].raw(), c.raw(), modes);
    out.push_back(std::move(c));
  }
  return out;
}

TangentVector tangent_tendency(const Model& model, const NpdState& base, const TangentVector& xi) {
  return TangentFlow(model).apply(base, xi);
}

std::vector<TangentVector> step_tangents(const Model& model, const NpdState& base, const NpdState& base_next,
                                         std::vector<TangentVector> set, double dt) {
  const TangentFlow flow(model);
  for (auto& xi : set) {
    xi = flow.step(base, base_next, xi, dt);
    for (const auto& f : xi) {
      const double* p = f.raw();
      for (std::size_t m = 0; m < 2 * f.size(); ++m) {
        if (!std::isfinite(p[m])) {
          throw Error(ErrorKind::NonFinite, "tangent vector overflowed at t = " + std::to_string(base_next.time()));
        }
      }
    }
  }
  return set;
}

void project_charge_free(TangentVector& xi, std::span<const double> valences) {
  if (xi.size() != valences.size()) throw Error(ErrorKind::InvalidArgument, "tangent species count mismatch");
  const auto& g = xi.front().grid();
  const auto& kt = kernels::active();
  const std::size_t len = 2 * g.modes();
  double z2 = 0.0;
  for (double z : valences) z2 += z * z;
  SpectralField r(g);
  for (std::size_t i = 0; i < xi.size(); ++i) kt.axpy(valences[i], xi[i].raw(), r.raw(), len);
  for (std::size_t i = 0; i < xi.size(); ++i) kt.axpy(-valences[i] / z2, r.raw(), xi[i].raw(), len);
}

std::vector<double> orthonormalize(std::vector<TangentVector>& set) {
  std::vector<double> logs;
  logs.reserve(set.size());
  const auto& kt = kernels::active();
  for (std::size_t j = 0; j < set.size(); ++j) {
    const double before = spectral::v_norm(set[j]);
    for (std::size_t l = 0; l < j; ++l) {
      const double proj = spectral::v_inner(set[j], set[l]);
      for (std::size_t i = 0; i < set[j].size(); ++i) {
        kt.axpy(-proj, set[l][i].raw(), set[j][i].raw(), 2 * set[j][i].size());
      }
    }
    const double norm = spectral::v_norm(set[j]);
    if (!(before > 0.0) || !(norm * norm > 1e-12 * before * before)) {
      throw Error(ErrorKind::UnderResolved,
                  "tangent vector " + std::to_string(j + 1) + " became linearly dependent on its predecessors");
    }
    for (auto& f : set[j]) f *= 1.0 / norm;
    logs.push_back(std::log(norm));
  }
  return logs;
}

std::vector<double> gram_matrix(std::span<const TangentVector> set, std::size_t count) {
  const Eigen::MatrixXd g = gram_of(set, count);
  return std::vector<double>(g.data(), g.data() + g.size());
}

std::optional<double> log_gram_volume(std::span<const TangentVector> set, std::size_t count) {
  if (count > set.size()) throw Error(ErrorKind::InvalidArgument, "gram volume of more vectors than available");
  if (count == 0) return 0.0;
  const Eigen::MatrixXd g = gram_of(set, count);
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() >= 1e-12)) return std::nullopt;
  const auto diag = ldlt.vectorD();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < diag.size(); ++j) {
    if (!(diag[j] > 0.0)) return std::nullopt;
    acc += std::log(diag[j]);
  }
  return 0.5 * acc;
}

double gram_volume(std::span<const TangentVector> set) {
  const auto lv = log_gram_volume(set, set.size());
  return lv ? std::exp(*lv) : 0.0;
}

std::vector<TangentVector> random_tangents(const SpectralGrid& grid, std::size_t species, std::size_t count,
                                           std::uint64_t seed, int k_max, bool charge_free,
                                           std::span<const double> valences) {
  const int band = k_max > 0 ? std::min(k_max, grid.dealias_cutoff()) : grid.dealias_cutoff();
  std::mt19937_64 rng(seed);
  std::vector<TangentVector> set;
  set.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    TangentVector xi;
    for (std::size_t i = 0; i < species; ++i) xi.push_back(random_band_limited_spectrum(grid, band, rng));
    if (charge_free) project_charge_free(xi, valences);
    set.push_back(std::move(xi));
  }
  orthonormalize(set);
  return set;
}

std::vector<VolumeRate> fit_volume_rates(std::span<const double> times,
                                         const std::vector<std::vector<double>>& log_volumes,
                                         std::span<const int> n_list, double t0, double t1) {
  std::vector<VolumeRate> rates;
  for (std::size_t q = 0; q < n_list.size(); ++q) {
    double st = 0.0, sy = 0.0, count = 0.0;
    for (std::size_t j = 0; j < times.size(); ++j) {
      if (times[j] < t0 || times[j] > t1) continue;
      st += times[j];
      sy += log_volumes[q][j];
      count += 1.0;
    }
    if (count < 2.0) throw Error(ErrorKind::InvalidArgument, "fit window holds fewer than two samples");
    const double mt = st / count;
    const double my = sy / count;
    double stt = 0.0, sty = 0.0, syy = 0.0;
    for (std::size_t j = 0; j < times.size(); ++j) {
      if (times[j] < t0 || times[j] > t1) continue;
      const double dt = times[j] - mt;
      const double dy = log_volumes[q][j] - my;
      stt += dt * dt;
      sty += dt * dy;
      syy += dy * dy;
    }
    const double slope = stt > 0.0 ? sty / stt : 0.0;
    VolumeRate r;
    r.n = n_list[q];
    r.rate = -slope;
    r.rate_over_n2 = r.rate / (static_cast<double>(r.n) * r.n);
    r.fit_r2 = syy > 0.0 ? slope * sty / syy : 0.0;
    r.t0 = t0;
    r.t1 = t1;
    rates.push_back(r);
  }
  return rates;
}

VolumeDecayResult volume_decay_experiment(const Stepper& stepper, const NpdState& w0,
                                          const VolumeDecayOptions& options, const Observers& base_observers) {
  if (options.n_list.empty()) throw Error(ErrorKind::InvalidArgument, "n_list is empty");
  if (!(options.t1 > options.t0)) throw Error(ErrorKind::InvalidArgument, "fit window must satisfy t0 < t1");
  if (options.reorth_every < 1) throw Error(ErrorKind::InvalidArgument, "reorth_every must be >= 1");
  for (int n : options.n_list) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "n_list entries must be positive");
  }
  const Model& model = stepper.model();
  const auto& params = model.params();
  const std::size_t n_max = static_cast<std::size_t>(*std::max_element(options.n_list.begin(), options.n_list.end()));

  std::vector<TangentVector> set = random_tangents(model.grid(), params.count(), n_max, options.seed, options.k_max,
                                                   options.charge_free, params.valences);
  std::vector<double> log_acc(n_max, 0.0);
  VolumeDecayResult result;
  result.log_volumes.resize(options.n_list.size());
  auto record = [&](double t) {
    result.times.push_back(t);
    const Eigen::MatrixXd g = gram_of(set, n_max);
    for (std::size_t q = 0; q < options.n_list.size(); ++q) {
      const auto n = static_cast<Eigen::Index>(options.n_list[q]);
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(g.topLeftCorner(n, n));
      if (ldlt.info() != Eigen::Success || !(ldlt.rcond() >= 1e-12)) {
        throw Error(ErrorKind::UnderResolved, "tangent set of size " + std::to_string(n) + " became singular");
      }
      double lv = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) lv += log_acc[static_cast<std::size_t>(j)] + 0.5 * std::log(ldlt.vectorD()[j]);
      result.log_volumes[q].push_back(lv);
    }
  };

  StepperConfig cfg = stepper.config();
  cfg.t_end = options.t1;
  const Stepper base_stepper(model, cfg);

  long steps = 0;
  record(w0.time());
  Observers obs = base_observers;
  obs.on_step = [&](const NpdState& before, const NpdState& after, double dt) {
    if (base_observers.on_step) base_observers.on_step(before, after, dt);
    set = step_tangents(model, before, after, std::move(set), dt);
    if (options.charge_free) {
      for (auto& xi : set) project_charge_free(xi, params.valences);
    }
    if (++steps % options.reorth_every == 0) {
      const std::vector<double> logs = orthonormalize(set);
      for (std::size_t j = 0; j < n_max; ++j) log_acc[j] += logs[j];
    }
    record(after.time());
  };
  base_stepper.integrate(w0, obs);

  result.rates = fit_volume_rates(result.times, result.log_volumes, options.n_list, options.t0, options.t1);
  return result;
}

}  // namespace npd
