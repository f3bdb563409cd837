#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "hanle/config.hpp"
#include "hanle/errors.hpp"

using namespace hanle;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path.string();
}

}  // namespace

TEST_CASE("defaults resolve to the reference configuration") {
  const RunConfig c = resolve_config("", std::nullopt, Json::object());
  CHECK(c.spec.fg == AngMom(1.0));
  CHECK(c.spec.fe == AngMom(0.0));
  CHECK(c.omega2 == 0.06);
  CHECK(c.spec.rabi * c.spec.rabi == doctest::Approx(0.18));
  CHECK(c.spec.gamma == 0.002);
  CHECK(c.schedule.b1 == 0.03);
  CHECK(c.schedule.period == 5000.0);
  CHECK(c.intensities.size() == 37);
  CHECK(c.intensities.front() == doctest::Approx(1e-3));
  CHECK(c.intensities.back() == doctest::Approx(4.0));
  CHECK(c.propagator == Propagator::modal);
  CHECK(c.fit_model == "auto");
  validate_config_json(default_config());
}

TEST_CASE("layers apply in order: defaults, preset, file, flags") {
  const std::string file =
      write_temp("hanle_layers.json", R"({"preset": "fig6a", "fields": {"gamma": 0.004}})");
  RunConfig c = resolve_config(file, std::nullopt, Json::object());
  CHECK(c.preset == "fig6a");
  CHECK(c.spec.fe == AngMom(2.0));
  CHECK(c.omega2 == 2e-3);
  CHECK(c.spec.gamma == 0.004);

  Json flags = {{"fields", {{"gamma", 0.001}}}};
  c = resolve_config(file, std::string("fig5e"), flags);
  CHECK(c.preset == "fig5e");
  CHECK(c.spec.fe == AngMom(0.0));
  CHECK(c.omega2 == 2.0);
  CHECK(c.spec.gamma == 0.001);
  std::filesystem::remove(file);
}

TEST_CASE("schema violations are rejected") {
  CHECK_THROWS_AS(validate_config_json(Json{{"fields", {{"omgea2", 1.0}}}}), ConfigError);
  CHECK_THROWS_AS(validate_config_json(Json{{"field", Json::object()}}), ConfigError);
  CHECK_THROWS_AS(validate_config_json(Json{{"fields", {{"omega2", "big"}}}}), ConfigError);
  CHECK_THROWS_AS(validate_config_json(Json{{"sweep", {{"intensities", {1.0, "x"}}}}}), ConfigError);
  CHECK_THROWS_AS(validate_config_json(Json::array()), ConfigError);
  CHECK_THROWS_AS(resolve_config("/nonexistent/config.json", std::nullopt, Json::object()),
                  ConfigError);
  const std::string bad = write_temp("hanle_bad.json", "{ not json");
  CHECK_THROWS_AS(resolve_config(bad, std::nullopt, Json::object()), ConfigError);
  std::filesystem::remove(bad);
}

TEST_CASE("inconsistent values are rejected") {
  auto reject = [](const Json& flags) {
    CHECK_THROWS_AS(resolve_config("", std::nullopt, flags), ConfigError);
  };
  reject({{"fields", {{"omega2", -1.0}}}});
  reject({{"fields", {{"gamma", 0.0}}}});
  reject({{"fields", {{"polarization", "circular"}}}});
  reject({{"fields", {{"rabi_convention", "other"}}}});
  reject({{"transition", {{"fg", 1}, {"fe", 3}}}});
  reject({{"transition", {{"fg", 0.7}}}});
  reject({{"schedule", {{"duty", 1.2}}}});
  reject({{"schedule", {{"dt", 0.1}}}});
  reject({{"schedule", {{"propagator", "euler"}}}});
  reject({{"steady", {{"points", 1}}}});
  reject({{"fit", {{"phase", "b2"}}}});
  CHECK_THROWS_AS(resolve_config("", std::string("fig9"), Json::object()), ConfigError);
}

TEST_CASE("explicit intensity list overrides the generated grid") {
  RunConfig c = resolve_config("", std::nullopt, Json{{"sweep", {{"intensities", {0.1, 0.2}}}}});
  CHECK(c.intensities == std::vector<double>{0.1, 0.2});
  c = resolve_config("", std::nullopt, Json{{"sweep", {{"intensities", Json::array()}}}});
  CHECK(c.intensities.empty());
  c = resolve_config("", std::nullopt, Json{{"sweep", {{"min", 0.01}, {"max", 1.0}, {"points", 3}}}});
  REQUIRE(c.intensities.size() == 3);
  CHECK(c.intensities[1] == doctest::Approx(0.1));
}

TEST_CASE("presets") {
  CHECK(presets().size() == 12);
  for (const Preset& p : presets()) {
    CAPTURE(p.name);
    const RunConfig c = resolve_config("", p.name, Json::object());
    CHECK(c.spec.gamma == 0.002);
    CHECK(c.schedule.b0 == 0.0);
    CHECK(c.schedule.b1 == 0.03);
    CHECK(c.spec.pol.kind() == Polarization::Kind::linear_x);
  }
  const double omega2[] = {2e-3, 6e-3, 0.02, 0.06, 2.0};
  const char letters[] = "abcde";
  for (int k = 0; k < 5; ++k) {
    const std::string suffix(1, letters[k]);
    const RunConfig eit = resolve_config("", "fig5" + suffix, Json::object());
    const RunConfig eia = resolve_config("", "fig6" + suffix, Json::object());
    CHECK(eit.omega2 == omega2[k]);
    CHECK(eia.omega2 == omega2[k]);
    CHECK(eit.spec.fe == AngMom(0.0));
    CHECK(eia.spec.fe == AngMom(2.0));
  }
  CHECK(resolve_config("", std::string("fig7b"), Json::object()).spec.dipole_scale == 2.5);
  CHECK(find_preset("fig7a").command == "spectrum");
}

TEST_CASE("field grid is symmetric") {
  const auto g = field_grid(0.1, 201);
  REQUIRE(g.size() == 201);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == -g[g.size() - 1 - i]);
  CHECK(g[100] == 0.0);
  CHECK(g.front() == -0.1);
  CHECK_THROWS_AS(field_grid(0.1, 1), ConfigError);
}
