// SPDX-License-Identifier: Apache-2.0
// npd: command-line driver for the Nernst-Planck-Darcy simulator.
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "npd/config.hpp"
#include "npd/errors.hpp"
#include "npd/experiments.hpp"

namespace {

int report_error(const npd::Error& e) {
  std::cerr << "npd: " << e.what() << "\n";
  return npd::kExitUsage;
}

npd::RunConfig load(const std::string& path, const std::optional<std::string>& output_dir) {
  npd::RunConfig c = npd::load_config(path);
  if (output_dir) c.output_dir = *output_dir;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-spectral Nernst-Planck-Darcy simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> output_dir;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "INI config")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output-dir", output_dir, "Override output_dir");

  std::string checkpoint;
  auto* resume = app.add_subcommand("resume", "Continue a run from a checkpoint");
  resume->add_option("config", config_path, "INI config")->required()->check(CLI::ExistingFile);
  resume->add_option("checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  resume->add_option("-o,--output-dir", output_dir, "Override output_dir");

  auto* validate = app.add_subcommand("validate-config", "Parse and check a config without running it");
  validate->add_option("config", config_path, "INI config")->required()->check(CLI::ExistingFile);

  std::string csv_path;
  std::string experiment;
  double t0 = 1.0;
  double t1 = 5.0;
  double energy_tolerance = npd::ExperimentOptions{}.energy_tolerance;
  std::optional<std::string> report_path;
  auto* analyze = app.add_subcommand("analyze", "Recompute an experiment report from a stored CSV");
  analyze->add_option("csv", csv_path, "diagnostics.csv, separation.csv or volumes.csv")->required();
  analyze->add_option("-e,--experiment", experiment, "Experiment name")->required();
  analyze->add_option("--t0", t0, "Window start");
  analyze->add_option("--t1", t1, "Window end");
  analyze->add_option("--energy-tolerance", energy_tolerance, "invariant_suite energy residual limit");
  analyze->add_option("-o,--output", report_path, "Report path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return npd::run_experiment(load(config_path, output_dir), std::cout);
    if (*resume) return npd::resume_experiment(load(config_path, output_dir), checkpoint, std::cout);
    if (*validate) {
      const npd::RunConfig c = npd::load_config(config_path);
      std::cout << "config OK: " << npd::to_string(c.experiment) << ", " << c.scenario.n << "^" << c.scenario.dim
                << ", " << c.scenario.valences.size() << " species\n";
      return npd::kExitOk;
    }
    if (*analyze) {
      const auto e = npd::parse_experiment(experiment);
      if (!e) throw npd::Error(npd::ErrorKind::InvalidArgument, "unknown experiment '" + experiment + "'");
      const npd::TextTable report = npd::analyze_csv(csv_path, *e, t0, t1, energy_tolerance);
      if (report_path) {
        report.write(*report_path);
      } else {
        npd::CsvWriter::write_stream(std::cout, report.header, report.rows);
      }
      return npd::kExitOk;
    }
  } catch (const npd::Error& e) {
    return report_error(e);
  } catch (const std::exception& e) {
    std::cerr << "npd: " << e.what() << "\n";
    return npd::kExitUsage;
  }
  return npd::kExitUsage;
}
