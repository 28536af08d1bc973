// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "npd/config.hpp"
#include "npd/csv.hpp"

namespace npd {

// Exit codes of run/resume.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;    // bad config, bad input files
inline constexpr int kExitRuntime = 2;  // numerical failure, error.json written
inline constexpr int kExitChecks = 3;   // invariant_suite check failed

struct TextTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void write(const std::filesystem::path& path) const;
};

// Reports built from stored series. Run and analyze share these, so an
// offline analysis of a run's CSV reproduces its inline report.
TextTable decay_report(const NumericTable& diagnostics, double t0, double t1);
TextTable attractor_report(const NumericTable& diagnostics, double t0, double t1);
TextTable invariant_report(const NumericTable& diagnostics, const std::optional<NumericTable>& validation,
                           double energy_tolerance);
TextTable twin_report(const NumericTable& separation);
TextTable backward_report(const NumericTable& separation);
TextTable volume_report(const NumericTable& volumes, double t0, double t1);

// Number of species implied by a diagnostics CSV header; SchemaError when
// the header deviates from the diagnostics schema.
std::size_t diagnostics_species(const NumericTable& diagnostics);

bool report_passed(const TextTable& invariant_report);

// Creates config.output_dir and writes diagnostics.csv, report.csv, run.json,
// checkpoints/ and any experiment-specific series. The scenario is built and
// checked before anything touches the file system.
int run_experiment(const RunConfig& config, std::ostream& log);

// Continues a single-trajectory run from a checkpoint taken at an output
// time. Rows of an existing diagnostics.csv after the checkpoint time are
// replaced, so the result matches an uninterrupted run.
int resume_experiment(const RunConfig& config, const std::filesystem::path& checkpoint, std::ostream& log);

// Offline report for a stored CSV (diagnostics, separation or volumes).
TextTable analyze_csv(const std::filesystem::path& csv, Experiment experiment, double t0, double t1,
                      double energy_tolerance = 1e-3);

}  // namespace npd
