// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "npd/scenarios.hpp"
#include "npd/timestepper.hpp"

namespace npd {

inline constexpr int kSchemaVersion = 1;

enum class Experiment {
  DecayNoBodyCharge,
  AttractorWithBodyCharge,
  TwinLipschitz,
  BackwardUniquenessProbe,
  VolumeDecay,
  InvariantSuite,
};

std::string_view to_string(Experiment e);
std::optional<Experiment> parse_experiment(std::string_view name);

struct ExperimentOptions {
  double fit_t0 = 1.0;
  double fit_t1 = 5.0;
  double delta = 1e-4;  // V-norm of the twin perturbation
  std::uint64_t perturbation_seed = 11;
  std::vector<int> n_list{1, 2, 4, 8};
  int reorth_every = 10;
  bool charge_free = false;
  std::uint64_t tangent_seed = 7;
  int tangent_k_max = 0;
  double energy_tolerance = 1e-3;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  Experiment experiment = Experiment::DecayNoBodyCharge;
  std::filesystem::path output_dir = "out";
  double checkpoint_every = 0.0;  // 0: final checkpoint only
  ScenarioSpec scenario;
  StepperConfig stepper;
  ExperimentOptions options;
};

// INI text with top-level keys and [scenario], [stepper], [options]
// sections. Errors are ConfigError with "source:line: key: reason".
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

// Canonical INI rendering; parse_config(render_config(c)) reproduces c.
std::string render_config(const RunConfig& config);

}  // namespace npd
