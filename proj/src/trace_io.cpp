#include "hanle/trace_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

namespace hanle {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

}  // namespace

TraceFormatError::TraceFormatError(const std::string& what, int line)
    : ConfigError("line " + std::to_string(line) + ": " + what), line_(line) {}

std::string format12(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void write_trace_csv(std::ostream& os, const TransientTrace& trace, const Metadata& meta) {
  trace.validate();
  os << "# units: time in 1/Gamma, w in units of the reduced coupling, B as beta_g*B in Gamma\n";
  for (const auto& [k, v] : meta) os << "# " << k << " = " << v << '\n';
  os << "time,w,B\n";
  for (std::size_t i = 0; i < trace.size(); ++i)
    os << format12(trace.times[i]) << ',' << format12(trace.w[i]) << ',' << format12(trace.b[i])
       << '\n';
}

void write_trace_csv(const std::string& path, const TransientTrace& trace, const Metadata& meta) {
  std::ostringstream buf;
  write_trace_csv(buf, trace, meta);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open '" + path + "' for writing");
  os << buf.str();
  if (!os) throw ConfigError("failed writing '" + path + "'");
}

TransientTrace read_trace_csv(std::istream& is) {
  TransientTrace out;
  int col_t = 0, col_w = 1, col_b = -1;
  bool columns_known = false;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    const auto cells = split(s);
    if (!columns_known) {
      columns_known = true;
      if (!parse_number(cells.front())) {
        col_t = col_w = col_b = -1;
        for (std::size_t c = 0; c < cells.size(); ++c) {
          const std::string& name = cells[c];
          if (name == "time" || name == "t") col_t = static_cast<int>(c);
          else if (name == "w" || name == "signal") col_w = static_cast<int>(c);
          else if (name == "B" || name == "b") col_b = static_cast<int>(c);
        }
        if (col_t < 0) throw TraceFormatError("header has no 'time' column", lineno);
        if (col_w < 0) throw TraceFormatError("header has no 'w' or 'signal' column", lineno);
        continue;
      }
      if (cells.size() >= 3) col_b = 2;
    }
    const int needed = std::max({col_t, col_w, col_b}) + 1;
    if (static_cast<int>(cells.size()) < needed)
      throw TraceFormatError("expected " + std::to_string(needed) + " columns, found " +
                                 std::to_string(cells.size()),
                             lineno);
    auto value = [&](int c, const char* what) {
      const auto v = parse_number(cells[static_cast<std::size_t>(c)]);
      if (!v) throw TraceFormatError(std::string("cannot parse ") + what + " '" +
                                         cells[static_cast<std::size_t>(c)] + "'",
                                     lineno);
      if (!std::isfinite(*v)) throw TraceFormatError(std::string("non-finite ") + what, lineno);
      return *v;
    };
    const double t = value(col_t, "time");
    if (!out.times.empty() && !(t > out.times.back()))
      throw TraceFormatError("time " + format12(t) + " does not increase", lineno);
    out.times.push_back(t);
    out.w.push_back(value(col_w, "signal"));
    out.b.push_back(col_b >= 0 ? value(col_b, "B") : 0.0);
  }
  if (out.times.empty()) throw TraceFormatError("no samples", lineno);
  return out;
}

TransientTrace load_trace(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open trace file '" + path + "'");
  return read_trace_csv(is);
}

}  // namespace hanle
