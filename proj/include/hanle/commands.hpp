// Subcommands of the hanle command-line tool. Each builds its complete
// output in memory first, so a failure never leaves partial files behind.

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hanle/config.hpp"

namespace hanle {

enum ExitCode { exit_ok = 0, exit_config = 2, exit_numerical = 3 };

struct TransientOutput {
  std::string trace_csv;
  std::optional<std::string> fit_json;  // set when a fit was requested
};

/// Switched transient for the configured schedule. With fit.model != "none"
/// the requested phase of the first period is fitted; the JSON goes to
/// output.fit, or into the trace header when no fit path is configured.
TransientOutput cmd_transient(const RunConfig& config);

/// Sweep table; observable group-1 modes only unless sweep.all_modes.
/// Throws ConfigError for an empty intensity grid.
std::string cmd_spectrum(const RunConfig& config);

struct FitWindow {
  std::optional<double> t0, t1;
};
/// Fits a trace file; JSON with a trailing newline.
std::string cmd_fit(const std::string& trace_path, const FitModel& model,
                    const FitWindow& window = {}, int max_iterations = 200);

/// Hanle scan: columns b, w over a symmetric grid.
std::string cmd_steady(const RunConfig& config);

/// Transit time in seconds and microseconds as a JSON object.
std::string cmd_transit(double diameter_m, double temperature_k, const std::string& isotope);

/// CSV listing: name, command, description.
std::string cmd_presets();

/// Full command-line entry point. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hanle
