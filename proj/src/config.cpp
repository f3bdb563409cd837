#include "hanle/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "hanle/errors.hpp"
#include "hanle/spectral.hpp"
#include "hanle/trace_io.hpp"

namespace hanle {

namespace {

Json transient_patch(int fe, double omega2) {
  return {{"transition", {{"fg", 1}, {"fe", fe}, {"dipole_scale", 1.0}}},
          {"fields", {{"omega2", omega2}, {"delta", 0.0}, {"gamma", 0.002}, {"beta_g", 1.0},
                      {"b0", 0.0}, {"b1", 0.03}, {"polarization", "linear-x"}}}};
}

Json sweep_patch(int fe, double dipole_scale) {
  return {{"transition", {{"fg", 1}, {"fe", fe}, {"dipole_scale", dipole_scale}}},
          {"fields", {{"delta", 0.0}, {"gamma", 0.002}, {"beta_g", 1.0}, {"b0", 0.0},
                      {"b1", 0.03}, {"polarization", "linear-x"}}},
          {"sweep", {{"min", 1e-3}, {"max", 4.0}, {"points", 37}}}};
}

std::vector<Preset> build_presets() {
  std::vector<Preset> out;
  const double levels[] = {2e-3, 6e-3, 0.02, 0.06, 2.0};
  const char panels[] = {'a', 'b', 'c', 'd', 'e'};
  for (int fig = 5; fig <= 6; ++fig) {
    for (int k = 0; k < 5; ++k) {
      const int fe = fig == 5 ? 0 : 2;
      Preset p;
      p.name = "fig" + std::to_string(fig) + panels[k];
      p.command = "transient";
      p.description = std::string(fig == 5 ? "EIT 1->0" : "EIA 1->2") +
                      " switched transient at Omega^2 = " + format12(levels[k]);
      p.patch = transient_patch(fe, levels[k]);
      out.push_back(std::move(p));
    }
  }
  out.push_back({"fig7a", "spectrum", "EIT 1->0 observable group-1 eigenvalues vs intensity",
                 sweep_patch(0, 1.0)});
  out.push_back({"fig7b", "spectrum",
                 "EIA 1->2 observable group-1 eigenvalues vs intensity with dipole scale 2.5",
                 sweep_patch(2, 2.5)});
  return out;
}

enum class Kind { number, integer, string, boolean, number_array, object };

struct KeySpec {
  const char* section;
  const char* key;
  Kind kind;
};

constexpr KeySpec kSchema[] = {
    {"transition", "fg", Kind::number},
    {"transition", "fe", Kind::number},
    {"transition", "dipole_scale", Kind::number},
    {"fields", "omega2", Kind::number},
    {"fields", "rabi_convention", Kind::string},
    {"fields", "delta", Kind::number},
    {"fields", "gamma", Kind::number},
    {"fields", "beta_g", Kind::number},
    {"fields", "beta_e", Kind::number},
    {"fields", "b0", Kind::number},
    {"fields", "b1", Kind::number},
    {"fields", "polarization", Kind::string},
    {"schedule", "period", Kind::number},
    {"schedule", "duty", Kind::number},
    {"schedule", "n_periods", Kind::integer},
    {"schedule", "samples", Kind::integer},
    {"schedule", "settling_time", Kind::number},
    {"schedule", "propagator", Kind::string},
    {"schedule", "dt", Kind::number},
    {"sweep", "intensities", Kind::number_array},
    {"sweep", "min", Kind::number},
    {"sweep", "max", Kind::number},
    {"sweep", "points", Kind::integer},
    {"sweep", "all_modes", Kind::boolean},
    {"steady", "b_max", Kind::number},
    {"steady", "points", Kind::integer},
    {"fit", "model", Kind::string},
    {"fit", "phase", Kind::string},
    {"output", "trace", Kind::string},
    {"output", "fit", Kind::string},
    {"output", "spectrum", Kind::string},
    {"output", "steady", Kind::string},
};

bool kind_matches(const Json& v, Kind k) {
  switch (k) {
    case Kind::number: return v.is_number();
    case Kind::integer: return v.is_number_integer();
    case Kind::string: return v.is_string();
    case Kind::boolean: return v.is_boolean();
    case Kind::number_array:
      if (!v.is_array()) return false;
      for (const auto& e : v)
        if (!e.is_number()) return false;
      return true;
    case Kind::object: return v.is_object();
  }
  return false;
}

const KeySpec* lookup(const std::string& section, const std::string& key) {
  for (const auto& s : kSchema)
    if (section == s.section && key == s.key) return &s;
  return nullptr;
}

bool known_section(const std::string& section) {
  for (const auto& s : kSchema)
    if (section == s.section) return true;
  return false;
}

Json read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return Json::parse(is);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = build_presets();
  return all;
}

const Preset& find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  throw ConfigError("unknown preset '" + name + "' (see the presets subcommand)");
}

Json default_config() {
  return {
      {"preset", ""},
      {"transition", {{"fg", 1}, {"fe", 0}, {"dipole_scale", 1.0}}},
      {"fields",
       {{"omega2", 0.06}, {"rabi_convention", "clebsch-gordan"}, {"delta", 0.0},
        {"gamma", 0.002}, {"beta_g", 1.0}, {"beta_e", 0.0}, {"b0", 0.0}, {"b1", 0.03},
        {"polarization", "linear-x"}}},
      {"schedule",
       {{"period", 5000.0}, {"duty", 0.5}, {"n_periods", 1}, {"samples", 4000},
        {"settling_time", 0.0}, {"propagator", "modal"}, {"dt", 0.01}}},
      {"sweep",
       {{"min", 1e-3}, {"max", 4.0}, {"points", 37},
        {"all_modes", false}}},
      {"steady", {{"b_max", 0.1}, {"points", 201}}},
      {"fit", {{"model", "auto"}, {"phase", "b1"}}},
      {"output", {{"trace", ""}, {"fit", ""}, {"spectrum", ""}, {"steady", ""}}},
  };
}

void validate_config_json(const Json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [section, body] : doc.items()) {
    if (section == "preset") {
      if (!body.is_string()) throw ConfigError("'preset' must be a string");
      continue;
    }
    if (!known_section(section)) throw ConfigError("unknown config section '" + section + "'");
    if (!body.is_object()) throw ConfigError("config section '" + section + "' must be an object");
    for (const auto& [key, value] : body.items()) {
      const KeySpec* spec = lookup(section, key);
      if (!spec) throw ConfigError("unknown config key '" + section + "." + key + "'");
      if (!kind_matches(value, spec->kind))
        throw ConfigError("config key '" + section + "." + key + "' has the wrong type");
    }
  }
}

RunConfig resolve_config(const std::string& file, const std::optional<std::string>& preset,
                         const Json& flags) {
  Json from_file = Json::object();
  if (!file.empty()) {
    from_file = read_file(file);
    validate_config_json(from_file);
  }
  validate_config_json(flags);

  std::string preset_name = preset.value_or(from_file.value("preset", std::string()));
  Json doc = default_config();
  if (!preset_name.empty()) doc.merge_patch(find_preset(preset_name).patch);
  doc.merge_patch(from_file);
  doc.merge_patch(flags);
  doc["preset"] = preset_name;
  return config_from_json(doc);
}

RunConfig config_from_json(const Json& doc) {
  validate_config_json(doc);
  RunConfig c;
  try {
    c.preset = doc.at("preset").get<std::string>();
    const Json& tr = doc.at("transition");
    const Json& f = doc.at("fields");
    const Json& s = doc.at("schedule");
    const Json& sw = doc.at("sweep");
    const Json& st = doc.at("steady");
    const Json& fi = doc.at("fit");
    const Json& out = doc.at("output");

    c.spec.fg = AngMom(tr.at("fg").get<double>());
    c.spec.fe = AngMom(tr.at("fe").get<double>());
    c.spec.dipole_scale = tr.at("dipole_scale").get<double>();
    const std::string conv = f.at("rabi_convention").get<std::string>();
    if (conv == "clebsch-gordan") c.convention = RabiConvention::clebsch_gordan;
    else if (conv == "sum-rule") c.convention = RabiConvention::sum_rule;
    else throw ConfigError("fields.rabi_convention must be 'clebsch-gordan' or 'sum-rule'");
    c.omega2 = f.at("omega2").get<double>();
    if (!(c.omega2 >= 0.0)) throw ConfigError("fields.omega2 must be >= 0");
    c.spec.detuning = f.at("delta").get<double>();
    c.spec.gamma = f.at("gamma").get<double>();
    c.spec.beta_g = f.at("beta_g").get<double>();
    c.spec.beta_e = f.at("beta_e").get<double>();
    c.spec.pol = Polarization::from_name(f.at("polarization").get<std::string>());
    c.spec = c.spec.with_intensity(c.omega2, c.convention);
    c.spec.validate();

    c.schedule.b0 = f.at("b0").get<double>();
    c.schedule.b1 = f.at("b1").get<double>();
    c.schedule.period = s.at("period").get<double>();
    c.schedule.duty = s.at("duty").get<double>();
    c.schedule.n_periods = s.at("n_periods").get<int>();
    c.schedule.samples_per_period = s.at("samples").get<int>();
    c.schedule.settling_time = s.at("settling_time").get<double>();
    c.schedule.validate();
    const std::string prop = s.at("propagator").get<std::string>();
    if (prop == "modal") c.propagator = Propagator::modal;
    else if (prop == "integrated") c.propagator = Propagator::integrated;
    else throw ConfigError("schedule.propagator must be 'modal' or 'integrated'");
    c.dt = s.at("dt").get<double>();
    if (!(c.dt > 0.0 && c.dt <= 0.05)) throw ConfigError("schedule.dt must lie in (0, 0.05]");

    // An explicit list wins over the log grid.
    if (sw.contains("intensities")) {
      c.intensities = sw.at("intensities").get<std::vector<double>>();
    } else if (sw.at("points").get<int>() > 0) {
      c.intensities = log_grid(sw.at("min").get<double>(), sw.at("max").get<double>(),
                               sw.at("points").get<int>());
    }
    for (double v : c.intensities)
      if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("sweep intensities must be >= 0");
    c.all_modes = sw.at("all_modes").get<bool>();

    c.b_max = st.at("b_max").get<double>();
    c.b_points = st.at("points").get<int>();
    if (!(c.b_max > 0.0)) throw ConfigError("steady.b_max must be > 0");
    if (c.b_points < 2) throw ConfigError("steady.points must be >= 2");

    c.fit_model = fi.at("model").get<std::string>();
    if (c.fit_model != "none" && c.fit_model != "auto") FitModel::from_name(c.fit_model);
    c.fit_phase = fi.at("phase").get<std::string>();
    if (c.fit_phase != "b0" && c.fit_phase != "b1")
      throw ConfigError("fit.phase must be 'b0' or 'b1'");

    c.trace_out = out.at("trace").get<std::string>();
    c.fit_out = out.at("fit").get<std::string>();
    c.spectrum_out = out.at("spectrum").get<std::string>();
    c.steady_out = out.at("steady").get<std::string>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

std::vector<double> field_grid(double b_max, int points) {
  if (!(b_max > 0.0) || points < 2) throw ConfigError("field grid needs b_max > 0, points >= 2");
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    // Mirror pairs are computed from the same expression so the grid is
    // exactly symmetric.
    const int j = points - 1 - i;
    const double v = b_max * static_cast<double>(std::min(i, j) * 2 - (points - 1)) /
                     static_cast<double>(points - 1);
    out[static_cast<std::size_t>(i)] = i <= j ? v : -v;
  }
  return out;
}

}  // namespace hanle
