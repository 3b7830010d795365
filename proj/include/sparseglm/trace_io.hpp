#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "sparseglm/solver.hpp"

namespace sparseglm {

enum class TraceFormat { csv, json };
TraceFormat parse_trace_format(std::string_view name);  // throws std::invalid_argument

inline constexpr std::string_view kTraceSchema = "sparseglm-trace v1";

/// Streams trace records as CSV (with a header row) or JSON Lines. The first
/// line is a comment "# sparseglm-trace v1 ..." followed by `note`. Each
/// record is flushed when written, so a truncated file stays parseable.
class TraceWriter {
 public:
  TraceWriter(std::ostream& out, TraceFormat format, std::string_view note = {});
  void write(const TraceRecord& record);
  int records_written() const { return count_; }

 private:
  std::ostream& out_;
  TraceFormat format_;
  int count_ = 0;
};

/// Parses a trace produced by TraceWriter (either format). Comment lines and
/// a trailing partial line are skipped. Throws ParseError on malformed rows.
std::vector<TraceRecord> read_trace(std::istream& in);

}  // namespace sparseglm
