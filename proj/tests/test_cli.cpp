#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "hanle/commands.hpp"

using namespace hanle;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "hanle");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "hanle_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::vector<std::pair<double, double>> csv_pairs(const std::string& text) {
  std::vector<std::pair<double, double>> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#' || !(std::isdigit(line[0]) || line[0] == '-')) continue;
    const auto comma = line.find(',');
    out.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
  }
  return out;
}

}  // namespace

TEST_CASE("presets listing") {
  const Run r = run({"presets"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("name,command,description\n", 0) == 0);
  for (const char* name : {"fig5a", "fig5e", "fig6c", "fig7a", "fig7b"})
    CHECK(r.out.find(std::string(name) + ",") != std::string::npos);
}

TEST_CASE("transient with a preset writes trace and fit") {
  const fs::path trace = scratch("fig5e.csv"), fit = scratch("fig5e.json");
  const Run r = run({"transient", "--preset", "fig5e", "-o", trace.string(), "--fit-json", fit.string()});
  REQUIRE(r.code == 0);
  const std::string csv = slurp(trace);
  CHECK(csv.find("# preset = fig5e\n") != std::string::npos);
  CHECK(csv.find("time,w,B\n") != std::string::npos);
  const auto j = nlohmann::json::parse(slurp(fit));
  const double eta1 = j["params"]["eta1"].get<double>();
  CHECK(eta1 >= 0.001);
  CHECK(eta1 <= 0.004);
}

TEST_CASE("transient without a fit path embeds the fit in the header") {
  const Run r = run({"transient", "--preset", "fig6a", "--samples", "2000"});
  REQUIRE(r.code == 0);
  const auto pos = r.out.find("# fit = ");
  REQUIRE(pos != std::string::npos);
  const auto end = r.out.find('\n', pos);
  const auto j = nlohmann::json::parse(r.out.substr(pos + 8, end - pos - 8));
  CHECK(j["params"]["beta"].get<double>() == doctest::Approx(0.06).epsilon(0.05));
  CHECK(j["params"]["C"].get<double>() == 0.0);
}

TEST_CASE("spectrum emits observable group-1 rows") {
  const Run r = run({"spectrum", "--preset", "fig7a", "--intensities", "0.002,0.1,2"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("intensity,b_case,re_lambda,im_lambda,group,observable,w_mode\n") !=
        std::string::npos);
  CHECK(r.out.find(",2,") == std::string::npos);
  CHECK(r.out.find("0.1,B1,") != std::string::npos);
  const Run all = run({"spectrum", "--intensities", "0.1", "--all-modes"});
  REQUIRE(all.code == 0);
  CHECK(all.out.size() > r.out.size());
}

TEST_CASE("steady scan is symmetric with the expected resonance sign") {
  const Run eit = run({"steady", "--b-points", "41"});
  const Run eia = run({"steady", "--fe", "2", "--b-points", "41"});
  REQUIRE(eit.code == 0);
  REQUIRE(eia.code == 0);
  for (const Run* r : {&eit, &eia}) {
    const auto rows = csv_pairs(r->out);
    REQUIRE(rows.size() == 41);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].first == -rows[rows.size() - 1 - i].first);
      CHECK(rows[i].second == doctest::Approx(rows[rows.size() - 1 - i].second).epsilon(1e-10));
    }
  }
  const auto a = csv_pairs(eit.out), b = csv_pairs(eia.out);
  CHECK(a[20].second < a[0].second);
  CHECK(b[20].second > b[0].second);
}

TEST_CASE("fit subcommand") {
  const fs::path trace = scratch("fit_input.csv");
  REQUIRE(run({"transient", "--preset", "fig5a", "--fit-model", "none", "-o", trace.string()}).code == 0);
  const Run ok = run({"fit", trace.string(), "--t0", "2500"});
  REQUIRE(ok.code == 0);
  const auto j = nlohmann::json::parse(ok.out);
  CHECK(j["converged"] == true);
  CHECK(j["params"]["beta"].get<double>() == doctest::Approx(0.06).epsilon(0.05));

  const Run capped = run({"fit", trace.string(), "--t0", "2500", "--max-iterations", "0"});
  CHECK(capped.code == 0);
  CHECK(nlohmann::json::parse(capped.out)["converged"] == false);

  const Run y1 = run({"fit", trace.string(), "--t1", "2500", "--model", "y1"});
  CHECK(y1.code == 0);
  CHECK(nlohmann::json::parse(y1.out)["model"] == "single_exp");
}

TEST_CASE("user errors exit with code 2") {
  const fs::path out = scratch("never_written.csv");
  fs::remove(out);
  Run r = run({"transient", "--config", "/nonexistent/config.json", "-o", out.string()});
  CHECK(r.code == 2);
  CHECK_FALSE(fs::exists(out));
  CHECK(r.err.find("cannot open config file") != std::string::npos);

  CHECK(run({"spectrum", "--intensities", ""}).code == 2);
  CHECK(run({"spectrum", "--points", "0"}).code == 2);
  const fs::path empty = scratch("empty_grid.json");
  write(empty, R"({"sweep": {"intensities": []}})");
  CHECK(run({"spectrum", "--config", empty.string()}).code == 2);
  CHECK(run({"spectrum", "--intensities", "0.1,abc"}).code == 2);

  const fs::path unknown = scratch("unknown_key.json");
  write(unknown, R"({"fields": {"omgea2": 1}})");
  r = run({"steady", "--config", unknown.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("fields.omgea2") != std::string::npos);

  CHECK(run({"transit", "--diameter", "-0.01", "--temperature", "300"}).code == 2);
  CHECK(run({"transit", "--diameter", "0.01", "--temperature", "300", "--isotope", "K39"}).code == 2);
  CHECK(run({"transient", "--preset", "fig9z"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({}).code == 2);

  const fs::path bad = scratch("bad_trace.csv");
  write(bad, "time,w\n0,1\n2,1\n1,1\n");
  r = run({"fit", bad.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("line 4") != std::string::npos);
  CHECK(run({"fit", "/nonexistent/trace.csv"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("transit subcommand") {
  const Run r = run({"transit", "--diameter", "0.01", "--temperature", "330"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["tau_us"].get<double>() == doctest::Approx(40.0).epsilon(0.1));
  CHECK(j["isotope"] == "Rb87");
}

TEST_CASE("repeated runs are byte-identical") {
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"transient", "--preset", "fig6c"},
        std::vector<std::string>{"spectrum", "--preset", "fig7a"},
        std::vector<std::string>{"steady", "--preset", "fig5b"}}) {
    const Run a = run(args), b = run(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
  }
}
