#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"

namespace windgen::cli {

/// Exit codes.
inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_config = 2;
inline constexpr int exit_numerical = 3;

/// Parses `args` (without the program name) and runs one subcommand.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Fits the generator and writes the bundle plus fit_report.json to paths.out.
void cmd_fit(const RunConfig& cfg, std::ostream& log);
/// Writes series.csv and manifest.json to paths.out from the bundle in paths.bundle.
void cmd_simulate(const RunConfig& cfg, std::ostream& log);
/// Writes acf.csv, qq.csv and excursions.csv comparing reference and simulated series.
void cmd_validate(const RunConfig& cfg, std::ostream& log);
/// Writes wpd_stats.csv and wpd_meta.json.
void cmd_wpd(const RunConfig& cfg, std::ostream& log);
/// Writes a known-truth dataset: grid.csv, series.csv and, except for the
/// unstable kind, the truth bundle under truth/.
void cmd_synth(const RunConfig& cfg, std::ostream& log);

}  // namespace windgen::cli
