// SPDX-License-Identifier: Apache-2.0
#include "npd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "npd/errors.hpp"
#include "npd/kernels.hpp"
#include "npd/spectral.hpp"

namespace npd {
namespace {

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    ssr += e * e;
  }
  f.r2 = syy > 0.0 ? 1.0 - ssr / syy : 0.0;
  return f;
}

double log_slope(std::span<const double> t, std::span<const double> y) {
  std::vector<double> ly(y.size());
  std::transform(y.begin(), y.end(), ly.begin(), [](double v) { return std::log(v); });
  return least_squares(t, ly).slope;
}

double sum_abs_pow_real(const RealField& f, double shift, double p) {
  double acc = 0.0;
  for (double v : f.values()) acc += std::pow(std::abs(v - shift), p);
  return acc;
}

}  // namespace

DiagnosticsRecord observe(const Model& model, const NpdState& state, double energy_residual) {
  DiagnosticsRecord r;
  r.time = state.time();
  r.energy_residual = energy_residual;
  const auto& c = state.concentrations();
  r.min_c = std::numeric_limits<double>::infinity();
  for (const auto& ci : c) {
    r.means.push_back(ci.mean());
    r.min_c = std::min(r.min_c, ci.min());
    const SpectralField ch = spectral::forward(ci);
    r.grad_l2.push_back(spectral::sobolev_norm(ch, 1.0));
    for (int k = 1; k <= 3; ++k) {
      const double s = spectral::sobolev_norm(ch, static_cast<double>(k));
      r.h_norms[k - 1] += s * s;
    }
  }
  const RealField rho = charge_density(c, model.params());
  const RealField sigma = total_concentration(c);
  const double rho_bar = rho.mean();
  const double sigma_bar = sigma.mean();
  for (std::size_t j = 0; j < kLpExponents.size(); ++j) {
    r.rho_dev[j] = spectral::lp_norm(rho, kLpExponents[j], rho_bar);
    r.sigma_dev[j] = spectral::lp_norm(sigma, kLpExponents[j], sigma_bar);
  }
  return r;
}

std::vector<std::string> diagnostics_header(std::size_t species) {
  std::vector<std::string> h{"t"};
  for (std::size_t i = 1; i <= species; ++i) h.push_back("mean_c" + std::to_string(i));
  h.push_back("min_c");
  for (std::size_t i = 1; i <= species; ++i) h.push_back("gradL2_c" + std::to_string(i));
  for (const char* name : {"L2_rho_dev", "L3_rho_dev", "L4_rho_dev", "L6_rho_dev", "L2_sigma_dev", "H1", "H2",
                           "H3", "energy_residual"}) {
    h.emplace_back(name);
  }
  return h;
}

std::vector<double> diagnostics_row(const DiagnosticsRecord& r) {
  std::vector<double> row{r.time};
  row.insert(row.end(), r.means.begin(), r.means.end());
  row.push_back(r.min_c);
  row.insert(row.end(), r.grad_l2.begin(), r.grad_l2.end());
  row.insert(row.end(), r.rho_dev.begin(), r.rho_dev.end());
  row.push_back(r.sigma_dev[0]);
  row.insert(row.end(), r.h_norms.begin(), r.h_norms.end());
  row.push_back(r.energy_residual);
  return row;
}

EnergyTerms energy_terms(const Model& model, const NpdState& state) {
  const auto& c = state.concentrations();
  const auto& kt = kernels::active();
  const double D = model.params().diffusivity;
  const double z2 = std::pow(model.params().valence_magnitude(), 2);
  const RealField rho = charge_density(c, model.params());
  const RealField sigma = total_concentration(c);
  const double dv = rho.grid().cell_volume();
  const std::size_t pts = rho.size();

  RealField sigma_plus = sigma;
  double removed = 0.0;
  double mass = 0.0;
  for (std::size_t p = 0; p < pts; ++p) {
    mass += std::abs(sigma[p]);
    if (sigma_plus[p] < 0.0) {
      removed -= sigma_plus[p];
      sigma_plus[p] = 0.0;
    }
  }

  RealField rho2(rho.grid());
  kt.mul(rho.data(), rho.data(), rho2.data(), pts);
  RealField rho_sigma(rho.grid());
  kt.mul(rho.data(), sigma.data(), rho_sigma.data(), pts);

  const double grad_rho = spectral::sobolev_norm(spectral::forward(rho), 1.0);
  const double grad_sigma = spectral::sobolev_norm(spectral::forward(sigma), 1.0);

  EnergyTerms e;
  e.energy = 0.5 * dv * (kt.dot(rho.data(), rho.data(), pts) + z2 * kt.dot(sigma.data(), sigma.data(), pts));
  e.dissipation = D * (grad_rho * grad_rho + z2 * grad_sigma * grad_sigma +
                       z2 * dv * kt.dot(rho2.data(), sigma_plus.data(), pts));
  e.body_work = D * z2 * dv * kt.dot(rho_sigma.data(), model.body().rho_tilde.data(), pts);
  e.clamped_fraction = mass > 0.0 ? removed / mass : 0.0;
  return e;
}

double energy_balance_residual(const Model& model, const NpdState& a, const NpdState& b) {
  const double dt = b.time() - a.time();
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "energy balance needs increasing snapshot times");
  const EnergyTerms ea = energy_terms(model, a);
  const EnergyTerms eb = energy_terms(model, b);
  if (ea.clamped_fraction > 1e-3 || eb.clamped_fraction > 1e-3) return std::numeric_limits<double>::quiet_NaN();
  const double scale = 0.5 * (ea.energy + eb.energy);
  const double mismatch = (eb.energy - ea.energy) / dt + 0.5 * (ea.loss_rate() + eb.loss_rate());
  return scale > 0.0 ? std::abs(mismatch) / scale : std::abs(mismatch);
}

DecayFit fit_decay_rate(std::span<const double> t, std::span<const double> y, double t0, double t1) {
  if (t.size() != y.size()) throw Error(ErrorKind::InvalidArgument, "series lengths differ");
  std::vector<double> tw, yw;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= t0 && t[i] <= t1) {
      tw.push_back(t[i]);
      yw.push_back(y[i]);
    }
  }
  if (tw.size() < 10) throw Error(ErrorKind::InvalidArgument, "decay fit needs at least 10 points in the window");
  for (double v : yw) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "decay fit needs positive data");
  }

  DecayFit fit;
  const auto [lo, hi] = std::minmax_element(yw.begin(), yw.end());
  const std::size_t n = tw.size();
  const std::size_t edge = std::max<std::size_t>(3, n / 5);
  const std::vector<double> tail(yw.end() - static_cast<std::ptrdiff_t>(edge), yw.end());
  if (*hi - *lo <= 1e-12 * *hi) {
    fit.degenerate = true;
    fit.offset = median(tail);
    return fit;
  }

  const std::span<const double> tspan(tw), yspan(yw);
  const double head_slope = log_slope(tspan.first(edge), yspan.first(edge));
  const double tail_slope = log_slope(tspan.last(edge), yspan.last(edge));
  fit.plateau = std::abs(tail_slope) < 0.1 * std::abs(head_slope);

  double noise = 0.0;
  if (fit.plateau) {
    fit.offset = median(tail);
    std::vector<double> dev(tail.size());
    std::transform(tail.begin(), tail.end(), dev.begin(), [&](double v) { return std::abs(v - fit.offset); });
    noise = 1.4826 * median(dev) + 1e-15 * std::abs(fit.offset);
  }

  std::vector<double> ts, ls;
  for (std::size_t i = 0; i < n; ++i) {
    const double excess = yw[i] - fit.offset;
    if (excess > 1e3 * noise && excess > 0.0) {
      ts.push_back(tw[i]);
      ls.push_back(std::log(excess));
    }
  }
  fit.points_used = ts.size();
  if (ts.size() < 3) {
    fit.degenerate = true;
    return fit;
  }
  const LineFit line = least_squares(ts, ls);
  fit.rate = -line.slope;
  fit.r2 = line.r2;
  return fit;
}

double PoincareTerms::ratio() const {
  const double denom = p * p * gradient_term + lower_order_term;
  return denom < 1e-30 ? 0.0 : lhs / denom;
}

double PoincareTerms::gradient_ratio() const { return gradient_term < 1e-30 ? 0.0 : lhs / gradient_term; }

PoincareTerms poincare_terms(const RealField& f, int p) {
  if (p != 2 && p != 3 && p != 4 && p != 6) {
    throw Error(ErrorKind::InvalidArgument, "Poincare exponent must be one of 2, 3, 4, 6");
  }
  const auto& grid = f.grid();
  const double dv = grid.cell_volume();
  const double fbar = f.mean();
  const auto& kt = kernels::active();

  PoincareTerms t;
  t.p = p;
  t.lhs = dv * kt.sum_abs_pow(f.data(), fbar, p, f.size());

  const VectorField grad = spectral::inverse(spectral::gradient(spectral::forward(f)));
  double g = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double g2 = 0.0;
    for (const auto& comp : grad) g2 += comp[i] * comp[i];
    const double w = p == 2 ? 1.0 : std::pow(std::abs(f[i] - fbar), p - 2);
    g += w * g2;
  }
  t.gradient_term = dv * g;

  const double half = 0.5 * p;
  const double s = (p % 2 == 0) ? kt.sum_abs_pow(f.data(), fbar, p / 2, f.size()) : sum_abs_pow_real(f, fbar, half);
  t.lower_order_term = 2.0 / grid.volume() * std::pow(dv * s, 2.0);
  return t;
}

double poincare_ratio(const RealField& f, int p) { return poincare_terms(f, p).ratio(); }

double v_distance(const NpdState& a, const NpdState& b) {
  if (a.species() != b.species()) throw Error(ErrorKind::InvalidArgument, "species count mismatch");
  SpeciesSpectra diff;
  for (std::size_t i = 0; i < a.species(); ++i) {
    RealField d = a.concentration(i);
    d -= b.concentration(i);
    diff.push_back(spectral::forward(d));
  }
  return spectral::v_norm(diff);
}

std::vector<SeparationPoint> twin_separation(std::span<const NpdState> a, std::span<const NpdState> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::MismatchedTrajectories, "trajectories have different lengths");
  }
  std::vector<SeparationPoint> out;
  out.reserve(a.size());
  double d0 = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double ta = a[j].time();
    const double tb = b[j].time();
    if (std::abs(ta - tb) > 1e-12 * std::max(1.0, std::abs(ta))) {
      throw Error(ErrorKind::MismatchedTrajectories, "output times differ at index " + std::to_string(j));
    }
    SeparationPoint p;
    p.time = ta;
    p.distance = v_distance(a[j], b[j]);
    if (j == 0) d0 = p.distance;
    p.ratio = d0 > 0.0 ? p.distance / d0 : 0.0;
    p.log_distance = p.distance > 0.0 ? std::log(p.distance) : -std::numeric_limits<double>::infinity();
    out.push_back(p);
  }
  return out;
}

}  // namespace npd
