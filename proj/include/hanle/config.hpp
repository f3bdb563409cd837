// Run configuration: one JSON document, built up in layers.
//
//   built-in defaults < preset < config file < command-line flags
//
// A preset named in the file applies before the file's own values; a preset
// given on the command line replaces the file's preset.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hanle/dynamics.hpp"
#include "hanle/fit.hpp"

namespace hanle {

using Json = nlohmann::ordered_json;

struct Preset {
  std::string name;
  std::string command;  // subcommand the preset is meant for
  std::string description;
  Json patch;
};

/// Every built-in preset, in listing order.
const std::vector<Preset>& presets();
/// Throws ConfigError for an unknown name.
const Preset& find_preset(const std::string& name);

/// The full default document (every recognised key present).
Json default_config();

/// Rejects unknown keys and wrongly typed values (ConfigError naming the key).
void validate_config_json(const Json& doc);

struct RunConfig {
  std::string preset;
  TransitionSpec spec;  // field is set per use; rabi already from omega2
  double omega2 = 0.0;  // intensity on the Omega^2/Gamma^2 axis
  RabiConvention convention = RabiConvention::clebsch_gordan;
  SwitchSchedule schedule;
  Propagator propagator = Propagator::modal;
  double dt = 0.01;

  std::vector<double> intensities;  // sweep grid
  bool all_modes = false;

  double b_max = 0.1;
  int b_points = 201;

  std::string fit_model = "auto";  // "none", "auto", or a FitModel name
  std::string fit_phase = "b1";    // "b0" or "b1" (first period)

  std::string trace_out, fit_out, spectrum_out, steady_out;
};

/// Applies the layers and converts. `file` may be empty (no config file).
/// Throws ConfigError on any invalid or inconsistent value.
RunConfig resolve_config(const std::string& file, const std::optional<std::string>& preset,
                         const Json& flags);
RunConfig config_from_json(const Json& doc);

/// Field grid -b_max .. b_max with `points` values, symmetric about zero.
std::vector<double> field_grid(double b_max, int points);

}  // namespace hanle
