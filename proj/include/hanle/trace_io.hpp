// Trace CSV: '#' metadata lines, a header row "time,w,B", then one sample per
// line. Numbers carry 12 significant digits and lines end in LF.

#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "hanle/dynamics.hpp"
#include "hanle/errors.hpp"

namespace hanle {

/// Malformed trace file; the message names the offending line.
class TraceFormatError : public ConfigError {
 public:
  TraceFormatError(const std::string& what, int line);
  int line() const { return line_; }

 private:
  int line_;
};

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// "%.12g" formatting used for every number this library writes.
std::string format12(double x);

void write_trace_csv(std::ostream& os, const TransientTrace& trace, const Metadata& meta = {});
void write_trace_csv(const std::string& path, const TransientTrace& trace,
                     const Metadata& meta = {});

/// Accepts a header naming "time" and "w" (or "signal") and optionally "B", in
/// any order, or headerless numeric rows read as time, signal[, B]. Rejects
/// descending time, non-numeric or non-finite entries and missing columns.
TransientTrace read_trace_csv(std::istream& is);
/// Throws ConfigError if the file cannot be opened.
TransientTrace load_trace(const std::string& path);

}  // namespace hanle
