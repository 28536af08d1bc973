// SPDX-License-Identifier: Apache-2.0
#include "npd/model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "npd/errors.hpp"
#include "npd/kernels.hpp"
#include "npd/spectral.hpp"

namespace npd {
namespace {

std::uint64_t next_model_id() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

// u = -P dealias(q grad Phi) from physical q and grad Phi.
VectorField velocity_from(const RealField& q, const VectorField& grad_phi) {
  const auto& grid = q.grid();
  const auto& kt = kernels::active();
  SpectralVector force;
  force.reserve(grad_phi.size());
  RealField product(grid);
  for (const auto& g : grad_phi) {
    kt.mul(q.data(), g.data(), product.data(), product.size());
    SpectralField fh = spectral::forward(product);
    spectral::dealias_in_place(fh);
    fh *= -1.0;
    force.push_back(std::move(fh));
  }
  return spectral::inverse(leray_project(force));
}

double charge_scale_of(const SpeciesFields& c, const SpeciesParams& params) {
  double scale = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    scale += std::abs(params.valences[i]) * spectral::lp_norm(c[i], 2);
  }
  return scale;
}

}  // namespace

SpeciesParams SpeciesParams::make(double diffusivity, std::vector<double> valences) {
  if (!(diffusivity > 0.0) || !std::isfinite(diffusivity)) {
    throw Error(ErrorKind::InvalidArgument, "diffusivity must be positive");
  }
  if (valences.empty()) throw Error(ErrorKind::InvalidArgument, "at least one species is required");
  const double z = std::abs(valences.front());
  if (!(z > 0.0)) throw Error(ErrorKind::InvalidArgument, "valences must be nonzero");
  for (double zi : valences) {
    if (std::abs(std::abs(zi) - z) > 1e-14 * z) {
      throw Error(ErrorKind::InvalidArgument, "valences must share one magnitude |z_i| = |z_1|");
    }
  }
  return SpeciesParams{diffusivity, std::move(valences)};
}

BodyCharge::BodyCharge(RealField field) : rho_tilde(std::move(field)) {
  if (!rho_tilde.all_finite()) throw Error(ErrorKind::InvalidArgument, "body charge is not finite");
  mean = rho_tilde.mean();
}

bool BodyCharge::is_zero() const { return rho_tilde.max_abs() == 0.0; }

NpdState::NpdState(double time, SpeciesFields concentrations)
    : time_(time), c_(std::move(concentrations)) {
  if (c_.empty()) throw Error(ErrorKind::InvalidArgument, "state needs at least one species");
  for (const auto& f : c_) {
    if (!(f.grid() == c_.front().grid())) {
      throw Error(ErrorKind::InvalidArgument, "species fields live on different grids");
    }
  }
}

RealField charge_density(const SpeciesFields& c, const SpeciesParams& params) {
  if (c.size() != params.count()) throw Error(ErrorKind::InvalidArgument, "species count mismatch");
  RealField rho(c.front().grid());
  const auto& kt = kernels::active();
  for (std::size_t i = 0; i < c.size(); ++i) kt.axpy(params.valences[i], c[i].data(), rho.data(), rho.size());
  return rho;
}

RealField total_concentration(const SpeciesFields& c) {
  RealField sigma(c.front().grid());
  for (const auto& ci : c) sigma += ci;
  return sigma;
}

double neutrality_tolerance(double rho_l2, double body_l2, double charge_scale) {
  return 1e-8 * (rho_l2 + body_l2 + 1e-4 * charge_scale);
}

RealField solve_potential(const RealField& rho, const BodyCharge& body, double charge_scale) {
  RealField q = rho;
  q += body.rho_tilde;
  SpectralField qh = spectral::forward(q);
  const double integral = qh[0].real() * q.grid().volume();
  const double tol =
      neutrality_tolerance(spectral::lp_norm(rho, 2), spectral::lp_norm(body.rho_tilde, 2), charge_scale);
  if (!(std::abs(integral) <= tol)) {
    throw Error(ErrorKind::NonNeutralSource,
                "int(rho + rho_tilde) = " + std::to_string(integral) + " violates neutrality");
  }
  qh[0] = 0.0;
  return spectral::inverse(spectral::inverse_laplacian(qh));
}

SpectralVector leray_project(const SpectralVector& v) {
  if (v.empty()) return {};
  const auto& grid = v.front().grid();
  if (static_cast<int>(v.size()) != grid.dim()) {
    throw Error(ErrorKind::InvalidArgument, "vector field has the wrong number of components");
  }
  SpectralVector out = v;
  const auto& kt = kernels::active();
  const std::size_t modes = grid.modes();
  if (grid.dim() == 2) {
    kt.leray2(grid.k_deriv(0).data(), grid.k_deriv(1).data(), grid.leray_inv().data(), out[0].raw(),
              out[1].raw(), modes);
  } else {
    kt.leray3(grid.k_deriv(0).data(), grid.k_deriv(1).data(), grid.k_deriv(2).data(),
              grid.leray_inv().data(), out[0].raw(), out[1].raw(), out[2].raw(), modes);
  }
  return out;
}

VectorField darcy_velocity(const RealField& rho, const BodyCharge& body, const RealField& phi) {
  RealField q = rho;
  q += body.rho_tilde;
  const VectorField grad_phi = spectral::inverse(spectral::gradient(spectral::forward(phi)));
  return velocity_from(q, grad_phi);
}

Model::Model(SpeciesParams params, BodyCharge body)
    : params_(std::move(params)), body_(std::move(body)), id_(next_model_id()) {
  const auto& g = grid();
  const auto mask = g.dealias_mask();
  for (int a = 0; a < g.dim(); ++a) {
    const auto k = g.k_deriv(a);
    flux_div_[a].resize(g.modes());
    for (std::size_t m = 0; m < g.modes(); ++m) flux_div_[a][m] = -k[m] * mask[m];
  }
}

void Model::check_state(const NpdState& state) const {
  if (state.species() != params_.count()) {
    throw Error(ErrorKind::InvalidArgument, "state has " + std::to_string(state.species()) +
                                                " species, parameters have " +
                                                std::to_string(params_.count()));
  }
  if (!(state.grid() == grid())) throw Error(ErrorKind::InvalidArgument, "state and body charge grids differ");
}

const DerivedFields& Model::derived(const NpdState& state) const {
  if (state.derived_ && state.derived_owner_ == id_) return *state.derived_;
  check_state(state);
  const auto& c = state.concentrations();
  RealField rho = charge_density(c, params_);
  RealField q = rho;
  q += body_.rho_tilde;

  SpectralField qh = spectral::forward(q);
  const double integral = qh[0].real() * grid().volume();
  const double tol = neutrality_tolerance(spectral::lp_norm(rho, 2), spectral::lp_norm(body_.rho_tilde, 2),
                                          charge_scale_of(c, params_));
  if (!(std::abs(integral) <= tol)) {
    throw Error(ErrorKind::NonNeutralSource,
                "int(rho + rho_tilde) = " + std::to_string(integral) + " violates neutrality");
  }
  qh[0] = 0.0;
  const SpectralField phi_hat = spectral::inverse_laplacian(qh);
  VectorField grad_phi = spectral::inverse(spectral::gradient(phi_hat));
  VectorField velocity = velocity_from(q, grad_phi);

  auto fields = std::make_shared<DerivedFields>(DerivedFields{
      std::move(rho), std::move(q), spectral::inverse(phi_hat), std::move(grad_phi), std::move(velocity)});
  state.derived_ = std::move(fields);
  state.derived_owner_ = id_;
  return *state.derived_;
}

SpeciesSpectra Model::nonlinear_spectra(const NpdState& state) const {
  const DerivedFields& d = derived(state);
  const auto& g = grid();
  const auto& kt = kernels::active();
  const double D = params_.diffusivity;
  const std::size_t pts = g.points();

  SpeciesSpectra out;
  out.reserve(state.species());
  RealField drift(g);
  RealField flux(g);
  SpectralField flux_hat(g);
  for (std::size_t i = 0; i < state.species(); ++i) {
    const RealField& ci = state.concentration(i);
    SpectralField acc(g);
    for (int a = 0; a < g.dim(); ++a) {
      // flux_a = c_i (u_a - D z_i d_a Phi)
      kt.lincomb(1.0, d.velocity[a].data(), -D * params_.valences[i], d.grad_phi[a].data(), drift.data(), pts);
      kt.mul(ci.data(), drift.data(), flux.data(), pts);
      g.forward(flux.data(), flux_hat.data());
      kt.cmul_imag_acc(flux_div_[a].data(), flux_hat.raw(), acc.raw(), g.modes());
    }
    out.push_back(std::move(acc));
  }
  return out;
}

SpeciesFields Model::tendency(const NpdState& state) const {
  SpeciesSpectra nl = nonlinear_spectra(state);
  const auto& g = grid();
  std::vector<double> diffusion(g.k_squared().begin(), g.k_squared().end());
  for (double& x : diffusion) x *= -params_.diffusivity;
  const auto& kt = kernels::active();
  SpeciesFields out;
  out.reserve(nl.size());
  SpectralField lap(g);
  for (std::size_t i = 0; i < nl.size(); ++i) {
    const SpectralField ch = spectral::forward(state.concentration(i));
    kt.cmul_real(diffusion.data(), ch.raw(), lap.raw(), g.modes());
    nl[i] += lap;
    out.push_back(spectral::inverse(nl[i]));
  }
  return out;
}

ValidationReport Model::validate(const NpdState& state) const {
  check_state(state);
  ValidationReport r;
  const auto& c = state.concentrations();
  double max_inf = 0.0;
  r.min_concentration = c.front().min();
  for (const auto& ci : c) {
    r.min_concentration = std::min(r.min_concentration, ci.min());
    max_inf = std::max(max_inf, ci.max_abs());
    r.means.push_back(ci.mean());
  }
  r.negativity_tolerance = 1e-6 * max_inf;
  r.negative = r.min_concentration < -r.negativity_tolerance;

  const RealField rho = charge_density(c, params_);
  r.rho_mean = rho.mean();
  r.sigma_mean = total_concentration(c).mean();
  const double integral = (r.rho_mean + body_.mean) * grid().volume();
  const double scale = neutrality_tolerance(spectral::lp_norm(rho, 2), spectral::lp_norm(body_.rho_tilde, 2),
                                            charge_scale_of(c, params_)) /
                       1e-8;
  r.neutrality_residual = scale > 0.0 ? std::abs(integral) / scale : std::abs(integral);
  r.non_neutral = !(r.neutrality_residual <= 1e-8);

  if (!r.non_neutral) {
    const DerivedFields& d = derived(state);
    const SpectralVector uh = spectral::forward(d.velocity);
    const double div = spectral::l2_norm(spectral::divergence(uh));
    double h1 = 0.0;
    for (const auto& comp : uh) h1 += std::pow(spectral::sobolev_norm(comp, 1.0, spectral::SobolevKind::Full), 2);
    h1 = std::sqrt(h1);
    r.divergence_residual = h1 > 0.0 ? div / h1 : 0.0;
    r.divergent = r.divergence_residual > 1e-10;
  }
  return r;
}

}  // namespace npd
