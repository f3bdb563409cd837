#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <sstream>

#include "hanle/dynamics.hpp"
#include "hanle/errors.hpp"
#include "hanle/fit.hpp"
#include "hanle/trace_io.hpp"

using namespace hanle;

namespace {

TransientTrace read(const std::string& text) {
  std::istringstream is(text);
  return read_trace_csv(is);
}

int error_line(const std::string& text) {
  try {
    read(text);
  } catch (const TraceFormatError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("simulated trace survives a write and reload") {
  SwitchSchedule sch;
  sch.samples_per_period = 500;
  const TransientTrace tr = switched_transient(TransitionSpec::eia().with_intensity(0.06), sch);
  const auto path = std::filesystem::temp_directory_path() / "hanle_roundtrip.csv";
  write_trace_csv(path.string(), tr, {{"note", "round trip"}});
  const TransientTrace back = load_trace(path.string());
  std::filesystem::remove(path);
  REQUIRE(back.size() == tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i) {
    CHECK(back.times[i] == round12(tr.times[i]));
    CHECK(back.w[i] == round12(tr.w[i]));
    CHECK(back.b[i] == round12(tr.b[i]));
  }
}

TEST_CASE("writer layout") {
  TransientTrace tr;
  tr.times = {0.0, 0.5};
  tr.w = {1.0 / 3.0, 2.0};
  tr.b = {0.0, 0.03};
  std::ostringstream os;
  write_trace_csv(os, tr, {{"gamma", "0.002"}});
  const std::string s = os.str();
  CHECK(s.rfind("# units:", 0) == 0);
  CHECK(s.find("# gamma = 0.002\n") != std::string::npos);
  CHECK(s.find("time,w,B\n0,0.333333333333,0\n0.5,2,0.03\n") != std::string::npos);
  CHECK(s.find('\r') == std::string::npos);
  CHECK(format12(1e-20) == "1e-20");
}

TEST_CASE("header variants and optional field column") {
  const TransientTrace a = read("# comment\nsignal,t\n1.5,0\n2.5,1\n");
  CHECK(a.times == std::vector<double>{0.0, 1.0});
  CHECK(a.w == std::vector<double>{1.5, 2.5});
  const TransientTrace b = read("time,w,B\n0,1,0\n1,2,0.03\n");
  CHECK(b.b == std::vector<double>{0.0, 0.03});
  const TransientTrace c = read("0,1\n1,2\n2,3\n");
  CHECK(c.size() == 3);
  CHECK(c.w[2] == 3.0);
  const TransientTrace d = read("0,1,0.5\n1,2,0.5\n");
  CHECK(d.b == std::vector<double>{0.5, 0.5});
}

TEST_CASE("malformed traces name the offending line") {
  CHECK(error_line("time,w\n0,1\n2,1\n1,1\n") == 4);
  CHECK(error_line("time,w\n0,1\n1,1\n1,1\n") == 4);
  CHECK(error_line("# c\ntime,w\n0,1\n1,nan\n") == 4);
  CHECK(error_line("time,w\n0,1\n1,abc\n") == 3);
  CHECK(error_line("time,w\n0,1\n1\n") == 3);
  CHECK_THROWS_AS(read("time,B\n0,1\n"), ConfigError);
  CHECK_THROWS_AS(read(""), ConfigError);
  CHECK_THROWS_AS(read("# only comments\n"), ConfigError);
  CHECK_THROWS_AS(load_trace("/nonexistent/trace.csv"), ConfigError);
}
