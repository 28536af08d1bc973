// SPDX-License-Identifier: Apache-2.0
#include "npd/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "npd/checkpoint.hpp"
#include "npd/diagnostics.hpp"
#include "npd/errors.hpp"
#include "npd/grid.hpp"
#include "npd/kernels.hpp"
#include "npd/spectral.hpp"
#include "npd/tangent.hpp"

namespace npd {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string fmt(double v) { return format_double(v); }

bool on_multiple(double t, double every) {
  const double r = t / every;
  return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, r);
}

struct Window {
  std::vector<double> t;
  std::vector<double> y;
};

Window window(const NumericTable& table, const std::string& column, double t0, double t1) {
  const auto t = table.column("t");
  const auto y = table.column(column);
  Window w;
  for (std::size_t j = 0; j < t.size(); ++j) {
    if (t[j] >= t0 && t[j] <= t1) {
      w.t.push_back(t[j]);
      w.y.push_back(y[j]);
    }
  }
  return w;
}

std::vector<std::string> decay_series(std::size_t species) {
  std::vector<std::string> s;
  for (std::size_t i = 1; i <= species; ++i) s.push_back("gradL2_c" + std::to_string(i));
  for (const char* name : {"L2_rho_dev", "L3_rho_dev", "L4_rho_dev", "L6_rho_dev", "L2_sigma_dev", "H1", "H2", "H3"}) {
    s.emplace_back(name);
  }
  return s;
}

void write_error(const fs::path& dir, const Error& e, double last_time) {
  json j;
  j["kind"] = std::string(to_string(e.kind()));
  j["message"] = e.what();
  j["last_output_time"] = last_time;
  std::ofstream(dir / "error.json") << j.dump(2) << "\n";
}

json metadata(const RunConfig& config, const NpdState& state, const BodyCharge& body) {
  json j;
  j["schema_version"] = config.schema_version;
  j["experiment"] = std::string(to_string(config.experiment));
  j["dim"] = config.scenario.dim;
  j["n"] = config.scenario.n;
  j["species"] = state.species();
  double mass = 0.0;
  for (const auto& c : state.concentrations()) mass += c.mean() * state.grid().volume();
  j["total_mass_M"] = mass;
  j["body_charge_integral"] = body.mean * state.grid().volume();
  j["kernels"] = std::string(kernels::active().name);
  j["fft_threads"] = configured_threads();
  if (config.scenario.dim == 2) {
    j["note"] = "two-dimensional run: the underlying estimates are stated on the three-torus";
  }
  j["config"] = render_config(config);
  return j;
}

// Writes the rows of one trajectory's diagnostics at output times. The
// energy residual of an output row is taken over the step that reached it.
class DiagnosticsSink {
 public:
  DiagnosticsSink(const Model& model, const RunConfig& config, const fs::path& csv, bool append)
      : model_(model), config_(config), writer_(csv, diagnostics_header(model.params().count()), append) {}

  void on_step(const NpdState& before, const NpdState& after) {
    if (on_multiple(after.time(), config_.stepper.output_every) || after.time() == config_.stepper.t_end) {
      residual_ = energy_balance_residual(model_, before, after);
    }
  }

  void on_output(const NpdState& s) {
    writer_.row(diagnostics_row(observe(model_, s, residual_)));
    residual_ = 0.0;
    last_time_ = s.time();
  }

  double last_time() const { return last_time_; }

 private:
  const Model& model_;
  const RunConfig& config_;
  CsvWriter writer_;
  double residual_ = 0.0;
  double last_time_ = 0.0;
};

class CheckpointSink {
 public:
  CheckpointSink(const RunConfig& config, const Model& model, const fs::path& dir)
      : config_(config), model_(model), dir_(dir) {}

  void on_output(const NpdState& s) {
    if (config_.checkpoint_every <= 0.0 || !on_multiple(s.time(), config_.checkpoint_every)) return;
    const long k = std::lround(s.time() / config_.stepper.output_every);
    checkpoint_save(dir_ / ("ckpt_" + std::to_string(k) + ".npd"), s, model_.params(), model_.body());
  }

 private:
  const RunConfig& config_;
  const Model& model_;
  fs::path dir_;
};

// Unit V-norm perturbation direction, mean-free and band-limited.
TangentVector perturbation(const RunConfig& config, const NpdState& base, const SpeciesParams& params) {
  auto set = random_tangents(base.grid(), params.count(), 1, config.options.perturbation_seed,
                             config.options.tangent_k_max, false, params.valences);
  return std::move(set.front());
}

NpdState perturbed(const NpdState& base, const TangentVector& dir, double amplitude) {
  SpeciesFields c = base.concentrations();
  for (std::size_t i = 0; i < c.size(); ++i) {
    SpectralField d = dir[i];
    d *= amplitude;
    c[i] += spectral::inverse(d);
  }
  return NpdState(base.time(), std::move(c));
}

void write_reports(const RunConfig& config, const fs::path& dir, std::ostream& log, int& status) {
  const Experiment e = config.experiment;
  const auto& o = config.options;
  TextTable report;
  if (e == Experiment::TwinLipschitz || e == Experiment::BackwardUniquenessProbe) {
    report = analyze_csv(dir / "separation.csv", e, o.fit_t0, o.fit_t1, o.energy_tolerance);
  } else if (e == Experiment::VolumeDecay) {
    report = analyze_csv(dir / "volumes.csv", e, o.fit_t0, o.fit_t1, o.energy_tolerance);
  } else {
    report = analyze_csv(dir / "diagnostics.csv", e, o.fit_t0, o.fit_t1, o.energy_tolerance);
  }
  report.write(dir / "report.csv");
  if (e == Experiment::InvariantSuite) {
    for (const auto& row : report.rows) log << row.back() << " " << row[0] << " = " << row[1] << " (limit " << row[2] << ")\n";
    const bool ok = report_passed(report);
    log << "invariant_suite: " << (ok ? "PASS" : "FAIL") << "\n";
    if (!ok) status = kExitChecks;
  }
}

struct Prepared {
  Scenario scenario;
  Model model;
};

Prepared prepare(const RunConfig& config) {
  Scenario sc = build_scenario(config.scenario);
  Model model(sc.params, sc.body);
  const ValidationReport v = model.validate(sc.state);
  if (!v.ok()) {
    throw Error(ErrorKind::ConfigError,
                v.non_neutral ? "scenario is not charge neutral: set scenario.means so sum z_i m_i = 0 or use body = "
                                "band_limited"
                              : "scenario produced an invalid initial state");
  }
  return Prepared{std::move(sc), std::move(model)};
}

int integrate_single(const RunConfig& config, const Model& model, NpdState state, const fs::path& dir, bool append,
                     std::ostream& log) {
  const Stepper stepper(model, config.stepper);
  DiagnosticsSink diag(model, config, dir / "diagnostics.csv", append);
  CheckpointSink ckpt(config, model, dir / "checkpoints");
  std::optional<CsvWriter> validation;
  if (config.experiment == Experiment::InvariantSuite) {
    validation.emplace(dir / "validation.csv",
                       std::vector<std::string>{"t", "neutrality_residual", "divergence_residual", "min_c"},
                       append && fs::exists(dir / "validation.csv"));
  }
  Observers obs;
  obs.emit_initial = !append;
  obs.on_step = [&](const NpdState& b, const NpdState& a, double) { diag.on_step(b, a); };
  obs.on_output = [&](const NpdState& s) {
    diag.on_output(s);
    if (validation) {
      const ValidationReport v = model.validate(s);
      const std::vector<double> row{s.time(), v.neutrality_residual, v.divergence_residual, v.min_concentration};
      validation->row(row);
    }
    ckpt.on_output(s);
  };
  try {
    const NpdState final = stepper.integrate(std::move(state), obs);
    checkpoint_save(dir / "checkpoints" / "final.npd", final, model.params(), model.body());
  } catch (const Error& e) {
    write_error(dir, e, diag.last_time());
    log << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return kExitRuntime;
  }
  int status = kExitOk;
  write_reports(config, dir, log, status);
  return status;
}

int integrate_twins(const RunConfig& config, const Model& model, const NpdState& base, const fs::path& dir,
                    std::ostream& log) {
  const TangentVector dir_v = perturbation(config, base, model.params());
  const double delta = config.options.delta;
  std::vector<NpdState> states;
  states.push_back(base);
  states.push_back(perturbed(base, dir_v, delta));
  const bool twin = config.experiment == Experiment::TwinLipschitz;
  if (twin) states.push_back(perturbed(base, dir_v, 0.5 * delta));

  const Stepper stepper(model, config.stepper);
  DiagnosticsSink diag(model, config, dir / "diagnostics.csv", false);
  const std::vector<std::string> header =
      twin ? std::vector<std::string>{"t", "distance", "distance_half", "ratio", "ratio_half", "lipschitz_ratio",
                                      "log_distance"}
           : std::vector<std::string>{"t", "distance", "ratio", "log_distance"};
  CsvWriter sep(dir / "separation.csv", header);
  double d0 = 0.0, h0 = 0.0;
  EnsembleObservers obs;
  obs.on_step = [&](std::span<const NpdState> b, std::span<const NpdState> a, double) { diag.on_step(b[0], a[0]); };
  obs.on_output = [&](std::span<const NpdState> s) {
    diag.on_output(s[0]);
    const double d = v_distance(s[0], s[1]);
    if (s[0].time() == base.time()) d0 = d;
    const double log_d = d > 0.0 ? std::log(d) : -std::numeric_limits<double>::infinity();
    if (twin) {
      const double h = v_distance(s[0], s[2]);
      if (s[0].time() == base.time()) h0 = h;
      const std::vector<double> row{s[0].time(), d, h, d / d0, h / h0, h > 0.0 ? d / h : 0.0, log_d};
      sep.row(row);
    } else {
      const std::vector<double> row{s[0].time(), d, d / d0, log_d};
      sep.row(row);
    }
  };
  try {
    stepper.integrate_ensemble(std::move(states), obs);
  } catch (const Error& e) {
    write_error(dir, e, diag.last_time());
    log << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return kExitRuntime;
  }
  int status = kExitOk;
  write_reports(config, dir, log, status);
  return status;
}

int integrate_volume(const RunConfig& config, const Model& model, const NpdState& base, const fs::path& dir,
                     std::ostream& log) {
  StepperConfig sc = config.stepper;
  const Stepper stepper(model, sc);
  DiagnosticsSink diag(model, config, dir / "diagnostics.csv", false);
  Observers obs;
  obs.on_step = [&](const NpdState& b, const NpdState& a, double) { diag.on_step(b, a); };
  obs.on_output = [&](const NpdState& s) { diag.on_output(s); };
  VolumeDecayOptions vo;
  vo.n_list = config.options.n_list;
  vo.t0 = config.options.fit_t0;
  vo.t1 = config.options.fit_t1;
  vo.reorth_every = config.options.reorth_every;
  vo.charge_free = config.options.charge_free;
  vo.seed = config.options.tangent_seed;
  vo.k_max = config.options.tangent_k_max;
  try {
    const VolumeDecayResult r = volume_decay_experiment(stepper, base, vo, obs);
    std::vector<std::string> header{"t"};
    for (int n : vo.n_list) header.push_back("logV_" + std::to_string(n));
    CsvWriter out(dir / "volumes.csv", header);
    for (std::size_t j = 0; j < r.times.size(); ++j) {
      std::vector<double> row{r.times[j]};
      for (const auto& series : r.log_volumes) row.push_back(series[j]);
      out.row(row);
    }
  } catch (const Error& e) {
    write_error(dir, e, diag.last_time());
    log << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return kExitRuntime;
  }
  int status = kExitOk;
  write_reports(config, dir, log, status);
  return status;
}

double max_over(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  return m;
}

}  // namespace

void TextTable::write(const fs::path& path) const {
  CsvWriter w(path, header);
  for (const auto& r : rows) w.row(r);
}

std::size_t diagnostics_species(const NumericTable& d) {
  std::size_t n = 0;
  while (n + 1 < d.header.size() && d.header[n + 1] == "mean_c" + std::to_string(n + 1)) ++n;
  if (n == 0 || d.header != diagnostics_header(n)) {
    throw Error(ErrorKind::SchemaError, "CSV header does not match the diagnostics schema");
  }
  if (d.rows.empty()) throw Error(ErrorKind::SchemaError, "diagnostics CSV has no data rows");
  return n;
}

TextTable decay_report(const NumericTable& d, double t0, double t1) {
  const std::size_t species = diagnostics_species(d);
  TextTable t;
  t.header = {"series", "rate", "offset", "r2", "degenerate", "plateau", "points", "t0", "t1"};
  for (const auto& name : decay_series(species)) {
    const Window w = window(d, name, t0, t1);
    DecayFit fit;
    const bool positive = std::all_of(w.y.begin(), w.y.end(), [](double v) { return v > 0.0; });
    if (positive && w.t.size() >= 10) {
      fit = fit_decay_rate(w.t, w.y, t0, t1);
    } else {
      fit.degenerate = true;
    }
    t.rows.push_back({name, fmt(fit.rate), fmt(fit.offset), fmt(fit.r2), fit.degenerate ? "1" : "0",
                      fit.plateau ? "1" : "0", std::to_string(fit.points_used), fmt(t0), fmt(t1)});
  }
  return t;
}

TextTable attractor_report(const NumericTable& d, double t0, double t1) {
  diagnostics_species(d);
  TextTable t;
  t.header = {"series", "sup", "mean", "final", "t0", "t1"};
  for (const char* name : {"H1", "H2", "H3", "L2_rho_dev", "L2_sigma_dev"}) {
    const Window w = window(d, name, t0, t1);
    if (w.y.empty()) throw Error(ErrorKind::SchemaError, "no diagnostics rows inside the analysis window");
    double sum = 0.0;
    for (double v : w.y) sum += v;
    t.rows.push_back({name, fmt(max_over(w.y)), fmt(sum / static_cast<double>(w.y.size())), fmt(w.y.back()), fmt(t0),
                      fmt(t1)});
  }
  return t;
}

TextTable invariant_report(const NumericTable& d, const std::optional<NumericTable>& validation,
                           double energy_tolerance) {
  const std::size_t species = diagnostics_species(d);
  TextTable t;
  t.header = {"check", "value", "limit", "status"};
  auto add = [&](const std::string& name, double value, double limit) {
    t.rows.push_back({name, fmt(value), fmt(limit), value <= limit ? "PASS" : "FAIL"});
  };

  double drift = 0.0;
  double max_mean = 0.0;
  for (std::size_t i = 1; i <= species; ++i) {
    const auto m = d.column("mean_c" + std::to_string(i));
    max_mean = std::max(max_mean, std::abs(m.front()));
    for (double v : m) drift = std::max(drift, std::abs(v - m.front()) / std::abs(m.front()));
  }
  add("mean_drift", drift, 1e-11);

  const auto min_c = d.column("min_c");
  const double lowest = *std::min_element(min_c.begin(), min_c.end());
  add("negativity", std::max(0.0, -lowest) / max_mean, 1e-6);

  double energy = 0.0;
  double flagged = 0.0;
  for (double v : d.column("energy_residual")) {
    if (std::isnan(v)) {
      flagged += 1.0;
    } else {
      energy = std::max(energy, v);
    }
  }
  add("energy_residual", energy, energy_tolerance);
  add("energy_clamp_flags", flagged, 0.0);

  double non_finite = 0.0;
  for (const auto& row : d.rows) {
    for (std::size_t j = 0; j + 1 < row.size(); ++j) non_finite += std::isfinite(row[j]) ? 0.0 : 1.0;
  }
  add("non_finite_entries", non_finite, 0.0);

  if (validation) {
    add("neutrality_residual", max_over(validation->column("neutrality_residual")), 1e-8);
    add("divergence_residual", max_over(validation->column("divergence_residual")), 1e-10);
  }
  return t;
}

bool report_passed(const TextTable& r) {
  return std::all_of(r.rows.begin(), r.rows.end(), [](const auto& row) { return row.back() == "PASS"; });
}

TextTable twin_report(const NumericTable& s) {
  if (s.rows.empty()) throw Error(ErrorKind::SchemaError, "separation CSV has no data rows");
  const auto lip = s.column("lipschitz_ratio");
  const auto ratio = s.column("ratio");
  TextTable t;
  t.header = {"metric", "value"};
  t.rows.push_back({"min_lipschitz_ratio", fmt(*std::min_element(lip.begin(), lip.end()))});
  t.rows.push_back({"max_lipschitz_ratio", fmt(max_over(lip))});
  t.rows.push_back({"max_growth", fmt(max_over(ratio))});
  t.rows.push_back({"final_distance", fmt(s.column("distance").back())});
  return t;
}

TextTable backward_report(const NumericTable& s) {
  if (s.rows.empty()) throw Error(ErrorKind::SchemaError, "separation CSV has no data rows");
  const auto dist = s.column("distance");
  const auto logd = s.column("log_distance");
  TextTable t;
  t.header = {"metric", "value"};
  t.rows.push_back({"initial_distance", fmt(dist.front())});
  t.rows.push_back({"min_distance", fmt(*std::min_element(dist.begin(), dist.end()))});
  t.rows.push_back({"min_log_distance", fmt(*std::min_element(logd.begin(), logd.end()))});
  t.rows.push_back({"final_distance", fmt(dist.back())});
  return t;
}

TextTable volume_report(const NumericTable& v, double t0, double t1) {
  if (v.header.size() < 2 || v.header.front() != "t") {
    throw Error(ErrorKind::SchemaError, "volume CSV must start with t followed by logV_n columns");
  }
  std::vector<int> n_list;
  std::vector<std::vector<double>> series;
  for (std::size_t j = 1; j < v.header.size(); ++j) {
    const std::string& h = v.header[j];
    if (h.rfind("logV_", 0) != 0) throw Error(ErrorKind::SchemaError, "unexpected volume column '" + h + "'");
    n_list.push_back(std::stoi(h.substr(5)));
    series.push_back(v.column(h));
  }
  const auto times = v.column("t");
  TextTable t;
  t.header = {"n", "rate", "rate_over_n2", "fit_r2", "t0", "t1"};
  for (const auto& r : fit_volume_rates(times, series, n_list, t0, t1)) {
    t.rows.push_back({std::to_string(r.n), fmt(r.rate), fmt(r.rate_over_n2), fmt(r.fit_r2), fmt(r.t0), fmt(r.t1)});
  }
  return t;
}

TextTable analyze_csv(const fs::path& csv, Experiment e, double t0, double t1, double energy_tolerance) {
  const NumericTable table = read_numeric_csv(csv);
  switch (e) {
    case Experiment::DecayNoBodyCharge:
      return decay_report(table, t0, t1);
    case Experiment::AttractorWithBodyCharge:
      return attractor_report(table, t0, t1);
    case Experiment::InvariantSuite: {
      std::optional<NumericTable> validation;
      const fs::path sibling = csv.parent_path() / "validation.csv";
      if (fs::exists(sibling)) validation = read_numeric_csv(sibling);
      return invariant_report(table, validation, energy_tolerance);
    }
    case Experiment::TwinLipschitz:
      return twin_report(table);
    case Experiment::BackwardUniquenessProbe:
      return backward_report(table);
    case Experiment::VolumeDecay:
      return volume_report(table, t0, t1);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown experiment");
}

int run_experiment(const RunConfig& config, std::ostream& log) {
  const Prepared p = prepare(config);
  const fs::path dir = config.output_dir;
  fs::create_directories(dir / "checkpoints");
  fs::remove(dir / "error.json");
  std::ofstream(dir / "run.json") << metadata(config, p.scenario.state, p.scenario.body).dump(2) << "\n";
  log << "running " << to_string(config.experiment) << " on " << config.scenario.n << "^" << config.scenario.dim
      << " to t = " << config.stepper.t_end << " (kernels: " << kernels::active().name << ")\n";

  switch (config.experiment) {
    case Experiment::TwinLipschitz:
    case Experiment::BackwardUniquenessProbe:
      return integrate_twins(config, p.model, p.scenario.state, dir, log);
    case Experiment::VolumeDecay:
      return integrate_volume(config, p.model, p.scenario.state, dir, log);
    default:
      return integrate_single(config, p.model, p.scenario.state, dir, false, log);
  }
}

int resume_experiment(const RunConfig& config, const fs::path& checkpoint, std::ostream& log) {
  const Experiment e = config.experiment;
  if (e == Experiment::TwinLipschitz || e == Experiment::BackwardUniquenessProbe || e == Experiment::VolumeDecay) {
    throw Error(ErrorKind::ConfigError, "resume supports single-trajectory experiments only");
  }
  Checkpoint ck = checkpoint_load(checkpoint);
  const auto& s = config.scenario;
  if (ck.state.grid().dim() != s.dim || ck.state.grid().n() != s.n || ck.params.valences != s.valences ||
      ck.params.diffusivity != s.diffusivity) {
    throw Error(ErrorKind::CheckpointError, "checkpoint does not match the configured grid or species");
  }
  if (!on_multiple(ck.state.time(), config.stepper.output_every)) {
    throw Error(ErrorKind::CheckpointError, "checkpoint time is not an output time of this config");
  }
  const fs::path dir = config.output_dir;
  fs::create_directories(dir / "checkpoints");
  fs::remove(dir / "error.json");

  const double t_ck = ck.state.time();
  bool append = false;
  for (const char* name : {"diagnostics.csv", "validation.csv"}) {
    const fs::path path = dir / name;
    if (!fs::exists(path)) continue;
    const NumericTable old = read_numeric_csv(path);
    CsvWriter w(path, old.header);
    for (const auto& row : old.rows) {
      if (row.front() <= t_ck) w.row(row);
    }
    if (std::string(name) == "diagnostics.csv") append = true;
  }
  log << "resuming " << to_string(e) << " from t = " << t_ck << "\n";
  const Model model(ck.params, ck.body);
  return integrate_single(config, model, std::move(ck.state), dir, append, log);
}

}  // namespace npd
