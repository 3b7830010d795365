#include "sparseglm/trace_io.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "sparseglm/dataset.hpp"

namespace sparseglm {

namespace {

constexpr const char* kColumns =
    "time_s,epoch,objective,kkt_violation,duality_gap,ws_size,gsupp_size,anderson_accepted";

std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

double parse_double(const std::string& field, int line) {
  if (field.empty()) throw ParseError("empty numeric field", line);
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    throw ParseError("invalid number '" + field + "'", line);
  }
  if (used != field.size()) throw ParseError("invalid number '" + field + "'", line);
  return v;
}

int parse_int(const std::string& field, int line) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw ParseError("invalid integer '" + field + "'", line);
  return v;
}

TraceRecord parse_csv_row(const std::string& row, int line) {
  std::vector<std::string> f;
  std::stringstream ss(row);
  std::string cell;
  while (std::getline(ss, cell, ',')) f.push_back(cell);
  if (!row.empty() && row.back() == ',') f.emplace_back();
  if (f.size() != 8) throw ParseError("expected 8 columns, got " + std::to_string(f.size()), line);
  TraceRecord r;
  r.time_s = parse_double(f[0], line);
  r.epoch = parse_int(f[1], line);
  r.objective = parse_double(f[2], line);
  r.kkt_violation = parse_double(f[3], line);
  if (!f[4].empty()) r.duality_gap = parse_double(f[4], line);
  r.ws_size = parse_int(f[5], line);
  r.gsupp_size = parse_int(f[6], line);
  r.anderson_accepted = parse_int(f[7], line) != 0;
  return r;
}

TraceRecord parse_json_row(const std::string& row, int line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(row);
    TraceRecord r;
    r.time_s = j.at("time_s").get<double>();
    r.epoch = j.at("epoch").get<int>();
    r.objective = j.at("objective").get<double>();
    r.kkt_violation = j.at("kkt_violation").get<double>();
    if (!j.at("duality_gap").is_null()) r.duality_gap = j.at("duality_gap").get<double>();
    r.ws_size = j.at("ws_size").get<int>();
    r.gsupp_size = j.at("gsupp_size").get<int>();
    r.anderson_accepted = j.at("anderson_accepted").get<bool>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON record: ") + e.what(), line);
  }
}

}  // namespace

TraceFormat parse_trace_format(std::string_view name) {
  if (name == "csv") return TraceFormat::csv;
  if (name == "json") return TraceFormat::json;
  throw std::invalid_argument("unknown trace format '" + std::string(name) + "' (expected csv or json)");
}

TraceWriter::TraceWriter(std::ostream& out, TraceFormat format, std::string_view note)
    : out_(out), format_(format) {
  out_ << "# " << kTraceSchema << " format=" << (format == TraceFormat::csv ? "csv" : "json");
  if (!note.empty()) out_ << ' ' << note;
  out_ << '\n';
  if (format_ == TraceFormat::csv) out_ << kColumns << '\n';
  out_.flush();
}

void TraceWriter::write(const TraceRecord& r) {
  if (format_ == TraceFormat::csv) {
    out_ << format_double(r.time_s) << ',' << r.epoch << ',' << format_double(r.objective) << ','
         << format_double(r.kkt_violation) << ',' << (r.duality_gap ? format_double(*r.duality_gap) : "")
         << ',' << r.ws_size << ',' << r.gsupp_size << ',' << (r.anderson_accepted ? 1 : 0) << '\n';
  } else {
    nlohmann::ordered_json j;
    j["time_s"] = r.time_s;
    j["epoch"] = r.epoch;
    j["objective"] = r.objective;
    j["kkt_violation"] = r.kkt_violation;
    j["duality_gap"] = r.duality_gap ? nlohmann::ordered_json(*r.duality_gap) : nlohmann::ordered_json();
    j["ws_size"] = r.ws_size;
    j["gsupp_size"] = r.gsupp_size;
    j["anderson_accepted"] = r.anderson_accepted;
    out_ << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
  out_.flush();
  ++count_;
}

std::vector<TraceRecord> read_trace(std::istream& in) {
  std::vector<TraceRecord> out;
  std::string row;
  int line = 0;
  while (std::getline(in, row)) {
    ++line;
    const bool complete = !in.eof();
    if (row.empty() || row[0] == '#' || row.rfind("time_s,", 0) == 0) continue;
    if (!complete) break;  // partial final line from an interrupted run
    out.push_back(row[0] == '{' ? parse_json_row(row, line) : parse_csv_row(row, line));
  }
  return out;
}

}  // namespace sparseglm
