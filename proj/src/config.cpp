// SPDX-License-Identifier: Apache-2.0
#include "npd/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "npd/csv.hpp"
#include "npd/errors.hpp"

namespace npd {
namespace {

namespace pt = boost::property_tree;

constexpr std::array<std::pair<Experiment, std::string_view>, 6> kExperimentNames{{
    {Experiment::DecayNoBodyCharge, "decay_no_body_charge"},
    {Experiment::AttractorWithBodyCharge, "attractor_with_body_charge"},
    {Experiment::TwinLipschitz, "twin_lipschitz"},
    {Experiment::BackwardUniquenessProbe, "backward_uniqueness_probe"},
    {Experiment::VolumeDecay, "volume_decay"},
    {Experiment::InvariantSuite, "invariant_suite"},
}};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

// Source lines of every "section.key" so field errors can point at them.
std::map<std::string, int> key_lines(const std::string& text) {
  std::map<std::string, int> lines;
  std::istringstream in(text);
  std::string line, section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = trim(t.substr(0, eq));
    lines.emplace(section.empty() ? key : section + "." + key, number);
  }
  return lines;
}

class Reader {
 public:
  Reader(const pt::ptree& tree, std::map<std::string, int> lines, std::string source)
      : tree_(tree), lines_(std::move(lines)), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& key, const std::string& reason) const {
    const auto it = lines_.find(key);
    const std::string where = it == lines_.end() ? source_ : source_ + ":" + std::to_string(it->second);
    throw Error(ErrorKind::ConfigError, where + ": " + key + ": " + reason);
  }

  std::optional<std::string> raw(const std::string& key) {
    seen_.insert(key);
    const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (!v) return std::nullopt;
    return trim(*v);
  }

  std::string text(const std::string& key, std::string fallback) {
    auto v = raw(key);
    return v ? *v : fallback;
  }

  double real(const std::string& key, double fallback) {
    const auto v = raw(key);
    return v ? parse_real(key, *v) : fallback;
  }

  std::optional<double> optional_real(const std::string& key) {
    const auto v = raw(key);
    if (!v || v->empty()) return std::nullopt;
    return parse_real(key, *v);
  }

  long integer(const std::string& key, long fallback) {
    const auto v = raw(key);
    return v ? parse_integer(key, *v) : fallback;
  }

  bool boolean(const std::string& key, bool fallback) {
    const auto v = raw(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    fail(key, "expected true or false, got '" + *v + "'");
  }

  std::vector<double> reals(const std::string& key, std::vector<double> fallback) {
    const auto v = raw(key);
    if (!v) return fallback;
    std::vector<double> out;
    for (const auto& item : split_list(key, *v)) out.push_back(parse_real(key, item));
    return out;
  }

  std::vector<int> integers(const std::string& key, std::vector<int> fallback) {
    const auto v = raw(key);
    if (!v) return fallback;
    std::vector<int> out;
    for (const auto& item : split_list(key, *v)) out.push_back(static_cast<int>(parse_integer(key, item)));
    return out;
  }

  // Rejects keys that no reader asked for.
  void check_unknown(const pt::ptree& node, const std::string& prefix) const {
    for (const auto& [name, child] : node) {
      const std::string key = prefix.empty() ? name : prefix + "." + name;
      if (!child.empty()) {
        check_unknown(child, key);
      } else if (!seen_.count(key)) {
        fail(key, "unknown key");
      }
    }
  }

 private:
  double parse_real(const std::string& key, const std::string& s) const {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) fail(key, "expected a number, got '" + s + "'");
    return v;
  }

  long parse_integer(const std::string& key, const std::string& s) const {
    long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) fail(key, "expected an integer, got '" + s + "'");
    return v;
  }

  std::vector<std::string> split_list(const std::string& key, const std::string& s) const {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) fail(key, "empty list entry");
      out.push_back(item);
    }
    if (out.empty()) fail(key, "empty list");
    return out;
  }

  const pt::ptree& tree_;
  std::map<std::string, int> lines_;
  std::string source_;
  std::set<std::string> seen_;
};

template <class Fn>
void guard(Reader& r, const std::string& key, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigError) throw;
    r.fail(key, e.what());
  }
}

std::string join(const auto& values) {
  std::string out;
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (j) out += ", ";
    if constexpr (std::is_floating_point_v<std::decay_t<decltype(values[j])>>) {
      out += format_double(values[j]);
    } else {
      out += std::to_string(values[j]);
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(Experiment e) {
  for (const auto& [k, name] : kExperimentNames) {
    if (k == e) return name;
  }
  return "unknown";
}

std::optional<Experiment> parse_experiment(std::string_view name) {
  for (const auto& [k, n] : kExperimentNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::ConfigError, source + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  Reader r(tree, key_lines(text), source);
  RunConfig c;

  if (!r.raw("schema_version")) r.fail("schema_version", "missing (expected " + std::to_string(kSchemaVersion) + ")");
  c.schema_version = static_cast<int>(r.integer("schema_version", kSchemaVersion));
  if (c.schema_version != kSchemaVersion) {
    r.fail("schema_version", "unsupported version " + std::to_string(c.schema_version));
  }
  const std::string exp = r.text("experiment", "");
  const auto parsed = parse_experiment(exp);
  if (!parsed) r.fail("experiment", "unknown experiment '" + exp + "'");
  c.experiment = *parsed;
  c.output_dir = r.text("output_dir", "out");
  if (c.output_dir.empty()) r.fail("output_dir", "must not be empty");
  c.checkpoint_every = r.real("checkpoint_every", 0.0);
  if (c.checkpoint_every < 0.0) r.fail("checkpoint_every", "must be >= 0");
  const auto multiple_of = [](double a, double b) {
    const double q = a / b;
    return q >= 1.0 - 1e-9 && std::abs(q - std::round(q)) <= 1e-9 * q;
  };

  auto& s = c.scenario;
  s.dim = static_cast<int>(r.integer("scenario.dim", s.dim));
  s.n = static_cast<int>(r.integer("scenario.n", s.n));
  s.diffusivity = r.real("scenario.diffusivity", s.diffusivity);
  s.valences = r.reals("scenario.valences", s.valences);
  s.means = r.reals("scenario.means", s.means);
  s.epsilon = r.real("scenario.epsilon", s.epsilon);
  s.k_max = static_cast<int>(r.integer("scenario.k_max", s.k_max));
  s.seed = static_cast<std::uint64_t>(r.integer("scenario.seed", static_cast<long>(s.seed)));
  const std::string body = r.text("scenario.body", "none");
  if (body == "none") {
    s.body = BodyRecipe::None;
  } else if (body == "band_limited") {
    s.body = BodyRecipe::BandLimited;
  } else {
    r.fail("scenario.body", "expected none or band_limited, got '" + body + "'");
  }
  s.body_amplitude = r.real("scenario.body_amplitude", s.body_amplitude);
  s.body_k_max = static_cast<int>(r.integer("scenario.body_k_max", s.body_k_max));
  s.body_seed = static_cast<std::uint64_t>(r.integer("scenario.body_seed", static_cast<long>(s.body_seed)));
  if (s.dim != 2 && s.dim != 3) r.fail("scenario.dim", "must be 2 or 3");
  if (s.n < 8 || (s.n & (s.n - 1)) != 0) r.fail("scenario.n", "must be a power of two >= 8");
  if (s.means.size() != s.valences.size()) r.fail("scenario.means", "needs one entry per valence");
  if (!s.means.empty() && !(s.epsilon >= 0.0 && s.epsilon < *std::min_element(s.means.begin(), s.means.end()))) {
    r.fail("scenario.epsilon", "must satisfy 0 <= epsilon < min mean");
  }
  if (s.k_max < 0 || s.k_max > s.n / 3) r.fail("scenario.k_max", "must lie in [0, n/3]");
  guard(r, "scenario", [&] { s.validate(); });

  auto& st = c.stepper;
  st.dt = r.optional_real("stepper.dt");
  st.cfl = r.real("stepper.cfl", st.cfl);
  st.dt_max = r.real("stepper.dt_max", st.dt_max);
  st.t_end = r.real("stepper.t_end", st.t_end);
  st.output_every = r.real("stepper.output_every", st.output_every);
  st.max_steps = r.integer("stepper.max_steps", st.max_steps);
  st.dt_refresh = static_cast<int>(r.integer("stepper.dt_refresh", st.dt_refresh));
  if (!(st.t_end > 0.0)) r.fail("stepper.t_end", "must be positive");
  if (st.max_steps < 1) r.fail("stepper.max_steps", "must be >= 1");
  if (st.dt && !(*st.dt > 0.0)) r.fail("stepper.dt", "must be positive");
  if (!(st.cfl > 0.0 && st.cfl <= 1.0)) r.fail("stepper.cfl", "must lie in (0, 1]");
  if (!(st.dt_max > 0.0)) r.fail("stepper.dt_max", "must be positive");
  if (!(st.output_every > 0.0)) r.fail("stepper.output_every", "must be positive");
  if (st.dt_refresh < 1) r.fail("stepper.dt_refresh", "must be >= 1");
  if (c.checkpoint_every > 0.0 && !multiple_of(c.checkpoint_every, st.output_every)) {
    r.fail("checkpoint_every", "must be a multiple of stepper.output_every");
  }

  auto& o = c.options;
  o.fit_t0 = r.real("options.fit_t0", o.fit_t0);
  o.fit_t1 = r.real("options.fit_t1", o.fit_t1);
  o.delta = r.real("options.delta", o.delta);
  o.perturbation_seed =
      static_cast<std::uint64_t>(r.integer("options.perturbation_seed", static_cast<long>(o.perturbation_seed)));
  o.n_list = r.integers("options.n_list", o.n_list);
  o.reorth_every = static_cast<int>(r.integer("options.reorth_every", o.reorth_every));
  o.charge_free = r.boolean("options.charge_free", o.charge_free);
  o.tangent_seed = static_cast<std::uint64_t>(r.integer("options.tangent_seed", static_cast<long>(o.tangent_seed)));
  o.tangent_k_max = static_cast<int>(r.integer("options.tangent_k_max", o.tangent_k_max));
  o.energy_tolerance = r.real("options.energy_tolerance", o.energy_tolerance);
  if (!(o.fit_t1 > o.fit_t0) || o.fit_t0 < 0.0) r.fail("options.fit_t1", "fit window needs 0 <= fit_t0 < fit_t1");
  if (o.fit_t1 > st.t_end * (1.0 + 1e-12)) r.fail("options.fit_t1", "fit window ends after stepper.t_end");
  if (!(o.delta > 0.0)) r.fail("options.delta", "must be positive");
  for (int n : o.n_list) {
    if (n < 1) r.fail("options.n_list", "entries must be >= 1");
  }
  if (o.reorth_every < 1) r.fail("options.reorth_every", "must be >= 1");
  if (o.tangent_k_max < 0 || o.tangent_k_max > s.n / 3) r.fail("options.tangent_k_max", "must lie in [0, n/3]");
  if (!(o.energy_tolerance > 0.0)) r.fail("options.energy_tolerance", "must be positive");

  r.check_unknown(tree, "");
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, path.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string render_config(const RunConfig& c) {
  std::ostringstream out;
  const auto& s = c.scenario;
  const auto& st = c.stepper;
  const auto& o = c.options;
  out << "schema_version = " << c.schema_version << "\n"
      << "experiment = " << to_string(c.experiment) << "\n"
      << "output_dir = " << c.output_dir.string() << "\n"
      << "checkpoint_every = " << format_double(c.checkpoint_every) << "\n\n"
      << "[scenario]\n"
      << "dim = " << s.dim << "\n"
      << "n = " << s.n << "\n"
      << "diffusivity = " << format_double(s.diffusivity) << "\n"
      << "valences = " << join(s.valences) << "\n"
      << "means = " << join(s.means) << "\n"
      << "epsilon = " << format_double(s.epsilon) << "\n"
      << "k_max = " << s.k_max << "\n"
      << "seed = " << s.seed << "\n"
      << "body = " << (s.body == BodyRecipe::None ? "none" : "band_limited") << "\n"
      << "body_amplitude = " << format_double(s.body_amplitude) << "\n"
      << "body_k_max = " << s.body_k_max << "\n"
      << "body_seed = " << s.body_seed << "\n\n"
      << "[stepper]\n";
  if (st.dt) out << "dt = " << format_double(*st.dt) << "\n";
  out << "cfl = " << format_double(st.cfl) << "\n"
      << "dt_max = " << format_double(st.dt_max) << "\n"
      << "t_end = " << format_double(st.t_end) << "\n"
      << "output_every = " << format_double(st.output_every) << "\n"
      << "max_steps = " << st.max_steps << "\n"
      << "dt_refresh = " << st.dt_refresh << "\n\n"
      << "[options]\n"
      << "fit_t0 = " << format_double(o.fit_t0) << "\n"
      << "fit_t1 = " << format_double(o.fit_t1) << "\n"
      << "delta = " << format_double(o.delta) << "\n"
      << "perturbation_seed = " << o.perturbation_seed << "\n"
      << "n_list = " << join(o.n_list) << "\n"
      << "reorth_every = " << o.reorth_every << "\n"
      << "charge_free = " << (o.charge_free ? "true" : "false") << "\n"
      << "tangent_seed = " << o.tangent_seed << "\n"
      << "tangent_k_max = " << o.tangent_k_max << "\n"
      << "energy_tolerance = " << format_double(o.energy_tolerance) << "\n";
  return out.str();
}

}  // namespace npd
