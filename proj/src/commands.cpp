#include "hanle/commands.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "hanle/errors.hpp"
#include "hanle/spectral.hpp"
#include "hanle/trace_io.hpp"

namespace hanle {

namespace {

const char* convention_name(RabiConvention c) {
  return c == RabiConvention::clebsch_gordan ? "clebsch-gordan" : "sum-rule";
}

Metadata spec_metadata(const char* command, const RunConfig& c) {
  const TransitionSpec& s = c.spec;
  return {
      {"command", command},
      {"preset", c.preset.empty() ? "none" : c.preset},
      {"fg", format12(s.fg.value())},
      {"fe", format12(s.fe.value())},
      {"dipole_scale", format12(s.dipole_scale)},
      {"omega2", format12(c.omega2)},
      {"rabi_convention", convention_name(c.convention)},
      {"rabi", format12(s.rabi)},
      {"delta", format12(s.detuning)},
      {"gamma", format12(s.gamma)},
      {"beta_g", format12(s.beta_g)},
      {"beta_e", format12(s.beta_e)},
      {"polarization", s.pol.name()},
  };
}

void append(Metadata& m, const Metadata& more) { m.insert(m.end(), more.begin(), more.end()); }

void write_meta(std::ostream& os, const Metadata& meta) {
  for (const auto& [k, v] : meta) os << "# " << k << " = " << v << '\n';
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open '" + path + "' for writing");
  os << text;
  if (!os) throw ConfigError("failed writing '" + path + "'");
}

FitModel auto_model(const RunConfig& c) {
  const bool eia = c.spec.fe.twice() > c.spec.fg.twice();
  if (c.fit_model == "auto")
    return c.fit_phase == "b0" ? FitModel::single_exp() : FitModel::damped_sine(eia);
  return FitModel::from_name(c.fit_model, eia);
}

}  // namespace

TransientOutput cmd_transient(const RunConfig& c) {
  if (auto w = c.spec.warning()) std::cerr << "warning: " << *w << '\n';
  const TransientTrace trace = switched_transient(c.spec, c.schedule, c.propagator, c.dt);

  TransientOutput out;
  Metadata meta = spec_metadata("transient", c);
  append(meta, {{"b0", format12(c.schedule.b0)},
                {"b1", format12(c.schedule.b1)},
                {"period", format12(c.schedule.period)},
                {"duty", format12(c.schedule.duty)},
                {"n_periods", std::to_string(c.schedule.n_periods)},
                {"samples_per_period", std::to_string(c.schedule.samples_per_period)},
                {"settling_time", format12(c.schedule.settling_time)},
                {"propagator", c.propagator == Propagator::modal ? "modal" : "integrated"},
                {"used_integrator", trace.used_integrator ? "true" : "false"}});

  if (c.fit_model != "none") {
    const double b0_len = c.schedule.b0_duration();
    const TransientTrace phase = c.fit_phase == "b0" ? trace.slice(0.0, b0_len)
                                                     : trace.slice(b0_len, c.schedule.period);
    const FitResult r = fit(phase, auto_model(c));
    const std::string json = to_json(r).dump();
    out.fit_json = json + "\n";
    if (c.fit_out.empty()) {
      meta.emplace_back("fit_phase", c.fit_phase);
      meta.emplace_back("fit", json);
    }
  }
  std::ostringstream os;
  write_trace_csv(os, trace, meta);
  out.trace_csv = os.str();
  return out;
}

std::string cmd_spectrum(const RunConfig& c) {
  if (c.intensities.empty()) throw ConfigError("empty intensity grid");
  const std::vector<SweepRow> all =
      intensity_sweep(c.spec, c.intensities, c.schedule.b1, c.convention);
  const std::vector<SweepRow> rows = c.all_modes ? all : observable_group1(all);

  std::ostringstream os;
  Metadata meta = spec_metadata("spectrum", c);
  append(meta, {{"b1", format12(c.schedule.b1)},
                {"points", std::to_string(c.intensities.size())},
                {"rows", c.all_modes ? "all modes" : "observable group-1 modes"}});
  write_meta(os, meta);
  os << "intensity,b_case,re_lambda,im_lambda,group,observable,w_mode\n";
  for (const auto& r : rows) {
    os << format12(r.intensity) << ',' << (r.b_case == FieldCase::zero ? "B0" : "B1") << ','
       << format12(r.lambda.real()) << ',' << format12(r.lambda.imag()) << ',' << r.group << ','
       << (r.observable ? 1 : 0) << ',' << format12(r.w_mode) << '\n';
  }
  return os.str();
}

std::string cmd_fit(const std::string& trace_path, const FitModel& model, const FitWindow& window,
                    int max_iterations) {
  TransientTrace trace = load_trace(trace_path);
  if (window.t0 || window.t1) {
    const double t0 = window.t0.value_or(trace.times.front());
    const double t1 = window.t1.value_or(trace.times.back() + 1.0);
    if (!(t1 > t0)) throw ConfigError("fit window needs t1 > t0");
    trace = trace.slice(t0, t1);
  }
  try {
    FitOptions opt;
    opt.max_iterations = max_iterations;
    return to_json(fit(trace, model, opt)).dump() + "\n";
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::string cmd_steady(const RunConfig& c) {
  const std::vector<double> grid = field_grid(c.b_max, c.b_points);
  const std::vector<double> w = hanle_scan(c.spec, grid);
  std::ostringstream os;
  Metadata meta = spec_metadata("steady", c);
  append(meta, {{"b_max", format12(c.b_max)}, {"points", std::to_string(c.b_points)}});
  write_meta(os, meta);
  os << "b,w\n";
  for (std::size_t i = 0; i < grid.size(); ++i) os << format12(grid[i]) << ',' << format12(w[i]) << '\n';
  return os.str();
}

std::string cmd_transit(double diameter_m, double temperature_k, const std::string& isotope) {
  double mass = 0.0, tau = 0.0;
  try {
    mass = isotope_mass(isotope);
    tau = transit_time(diameter_m, temperature_k, mass);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  Json j;
  j["diameter_m"] = round12(diameter_m);
  j["temperature_k"] = round12(temperature_k);
  j["isotope"] = isotope;
  j["mass_kg"] = round12(mass);
  j["tau_s"] = round12(tau);
  j["tau_us"] = round12(tau * 1e6);
  return j.dump() + "\n";
}

std::string cmd_presets() {
  std::ostringstream os;
  os << "name,command,description\n";
  for (const auto& p : presets()) os << p.name << ',' << p.command << ',' << p.description << '\n';
  return os.str();
}

namespace {

// Comma-separated numbers; empty items are skipped, so "" is an empty grid.
std::vector<double> parse_grid(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& item : items) {
    if (item.empty()) continue;
    double v = 0.0;
    const char* end = item.data() + item.size();
    const auto [ptr, ec] = std::from_chars(item.data(), end, v);
    if (ec != std::errc() || ptr != end)
      throw ConfigError("--intensities: '" + item + "' is not a number");
    out.push_back(v);
  }
  return out;
}

// Model-parameter flags shared by transient, spectrum and steady.
struct SharedFlags {
  std::string config;
  std::optional<std::string> preset;
  std::optional<double> fg, fe, dipole_scale, omega2, delta, gamma, beta_g, beta_e, b0, b1;
  std::optional<std::string> polarization, rabi_convention;
  std::optional<double> period, duty, settling_time, dt;
  std::optional<int> n_periods, samples;
  std::optional<std::string> propagator;
  std::vector<std::string> intensities;
  std::optional<double> sweep_min, sweep_max;
  std::optional<int> sweep_points;
  bool all_modes = false;
  std::optional<double> b_max;
  std::optional<int> b_points;
  std::optional<std::string> fit_model, fit_phase, fit_json;
  std::optional<std::string> output;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON configuration file");
    app->add_option("--preset", preset, "named figure preset (see 'presets')");
    app->add_option("--fg", fg, "ground angular momentum");
    app->add_option("--fe", fe, "excited angular momentum");
    app->add_option("--dipole-scale", dipole_scale, "factor applied to Omega^2");
    app->add_option("--omega2", omega2, "intensity Omega^2/Gamma^2");
    app->add_option("--rabi-convention", rabi_convention, "clebsch-gordan or sum-rule");
    app->add_option("--delta", delta, "detuning in Gamma");
    app->add_option("--gamma", gamma, "transit relaxation rate in Gamma");
    app->add_option("--beta-g", beta_g, "ground Zeeman factor");
    app->add_option("--beta-e", beta_e, "excited Zeeman factor");
    app->add_option("--b0", b0, "field of the first phase");
    app->add_option("--b1", b1, "field of the second phase");
    app->add_option("--polarization", polarization, "linear-x, linear-y, sigma+ or sigma-");
    app->add_option("--period", period, "switching period in 1/Gamma");
    app->add_option("--duty", duty, "fraction of the period spent at b0");
    app->add_option("--periods", n_periods, "number of periods");
    app->add_option("--samples", samples, "samples per period");
    app->add_option("--settling-time", settling_time, "field settling time (integrator only)");
    app->add_option("--propagator", propagator, "modal or integrated");
    app->add_option("--dt", dt, "integrator step");
    app->add_option("--intensities", intensities, "explicit sweep grid")->delimiter(',');
    app->add_option("--min", sweep_min, "sweep grid minimum");
    app->add_option("--max", sweep_max, "sweep grid maximum");
    app->add_option("--points", sweep_points, "sweep grid points");
    app->add_flag("--all-modes", all_modes, "emit every mode, not only observable group 1");
    app->add_option("--b-max", b_max, "Hanle scan half width");
    app->add_option("--b-points", b_points, "Hanle scan points");
    app->add_option("--fit-model", fit_model, "none, auto, single_exp or exp_plus_damped_sine");
    app->add_option("--fit-phase", fit_phase, "b0 or b1");
    app->add_option("--fit-json", fit_json, "write the fit result here");
    app->add_option("-o,--output", output, "output file (default: standard output)");
  }

  Json patch(const char* output_key, bool intensities_given) const {
    Json j = Json::object();
    auto set = [&j](const char* sec, const char* key, const auto& opt) {
      if (opt) j[sec][key] = *opt;
    };
    set("transition", "fg", fg);
    set("transition", "fe", fe);
    set("transition", "dipole_scale", dipole_scale);
    set("fields", "omega2", omega2);
    set("fields", "rabi_convention", rabi_convention);
    set("fields", "delta", delta);
    set("fields", "gamma", gamma);
    set("fields", "beta_g", beta_g);
    set("fields", "beta_e", beta_e);
    set("fields", "b0", b0);
    set("fields", "b1", b1);
    set("fields", "polarization", polarization);
    set("schedule", "period", period);
    set("schedule", "duty", duty);
    set("schedule", "n_periods", n_periods);
    set("schedule", "samples", samples);
    set("schedule", "settling_time", settling_time);
    set("schedule", "propagator", propagator);
    set("schedule", "dt", dt);
    if (intensities_given) j["sweep"]["intensities"] = parse_grid(intensities);
    set("sweep", "min", sweep_min);
    set("sweep", "max", sweep_max);
    set("sweep", "points", sweep_points);
    if (all_modes) j["sweep"]["all_modes"] = true;
    set("steady", "b_max", b_max);
    set("steady", "points", b_points);
    set("fit", "model", fit_model);
    set("fit", "phase", fit_phase);
    set("output", "fit", fit_json);
    if (output) j["output"][output_key] = *output;
    return j;
  }
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Transient Hanle EIT/EIA simulator"};
  app.require_subcommand(1);

  SharedFlags tf, sf, hf;
  CLI::App* transient = app.add_subcommand("transient", "switched-field transient trace (CSV)");
  tf.attach(transient);
  CLI::App* spectrum = app.add_subcommand("spectrum", "observable eigenvalues vs intensity (CSV)");
  sf.attach(spectrum);
  CLI::App* steady = app.add_subcommand("steady", "steady-state Hanle scan (CSV)");
  hf.attach(steady);

  std::string trace_path, model_name = "exp_plus_damped_sine";
  std::optional<std::string> fit_output;
  std::optional<double> t0, t1;
  bool force_c_zero = false;
  int max_iterations = 200;
  CLI::App* fitcmd = app.add_subcommand("fit", "fit a trace file (JSON)");
  fitcmd->add_option("trace", trace_path, "trace CSV")->required();
  fitcmd->add_option("--model", model_name, "single_exp (y1) or exp_plus_damped_sine (y2)");
  fitcmd->add_flag("--force-c-zero", force_c_zero, "drop the non-oscillating term of y2");
  fitcmd->add_option("--t0", t0, "window start");
  fitcmd->add_option("--t1", t1, "window end (exclusive)");
  fitcmd->add_option("--max-iterations", max_iterations, "Levenberg-Marquardt iteration cap");
  fitcmd->add_option("-o,--output", fit_output, "output file (default: standard output)");

  double diameter = 0.0, temperature = 0.0;
  std::string isotope = "Rb87";
  CLI::App* transit = app.add_subcommand("transit", "mean transverse transit time (JSON)");
  transit->add_option("--diameter", diameter, "beam diameter in metres")->required();
  transit->add_option("--temperature", temperature, "temperature in kelvin")->required();
  transit->add_option("--isotope", isotope, "Rb87, Rb85 or Cs133");

  CLI::App* list = app.add_subcommand("presets", "list figure presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    if (*transient) {
      const RunConfig c = resolve_config(tf.config, tf.preset,
                                         tf.patch("trace", transient->count("--intensities") > 0));
      const TransientOutput res = cmd_transient(c);
      if (res.fit_json && !c.fit_out.empty()) emit(c.fit_out, *res.fit_json, out);
      emit(c.trace_out, res.trace_csv, out);
    } else if (*spectrum) {
      const RunConfig c = resolve_config(
          sf.config, sf.preset, sf.patch("spectrum", spectrum->count("--intensities") > 0));
      emit(c.spectrum_out, cmd_spectrum(c), out);
    } else if (*steady) {
      const RunConfig c = resolve_config(hf.config, hf.preset,
                                         hf.patch("steady", steady->count("--intensities") > 0));
      emit(c.steady_out, cmd_steady(c), out);
    } else if (*fitcmd) {
      const FitModel model = FitModel::from_name(model_name, force_c_zero);
      emit(fit_output.value_or(""), cmd_fit(trace_path, model, {t0, t1}, max_iterations), out);
    } else if (*transit) {
      emit("", cmd_transit(diameter, temperature, isotope), out);
    } else if (*list) {
      emit("", cmd_presets(), out);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return exit_config;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return exit_numerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return exit_numerical;
  }
  return exit_ok;
}

}  // namespace hanle
