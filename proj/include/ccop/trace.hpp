#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ccop/json_io.hpp"
#include "ccop/oracle.hpp"
#include "ccop/salm.hpp"

namespace ccop {

/// Line-delimited JSON trace: one header line, one line per outer iteration,
/// one footer line. Timestamps and wall time live in the header only, so the
/// remaining lines (the body) are reproducible byte for byte.
struct TraceFile {
  json_io::json header;
  std::vector<IterationRecord> rows;
  std::vector<int> row_runs;  // which run each row belongs to (multistart)
  json_io::json footer;
};

json_io::ordered_json to_json(const IterationRecord& row);
IterationRecord record_from_json(const json_io::json& j);

json_io::ordered_json to_json(const FeasibilityReport& f);
json_io::ordered_json to_json(const Certificate& cert);
json_io::ordered_json to_json(const OracleResult& oracle, bool include_supports = true);
json_io::ordered_json to_json(const SalmConfig& cfg);

class TraceWriter {
 public:
  explicit TraceWriter(json_io::ordered_json header);
  void add_rows(const RunTrace& trace, int run = 0);
  void set_footer(json_io::ordered_json footer);
  /// Header line plus body.
  std::string render() const;
  /// Everything after the header line.
  std::string body() const;
  void write(const std::filesystem::path& path) const;

 private:
  json_io::ordered_json header_;
  std::vector<std::string> lines_;
  json_io::ordered_json footer_;
};

TraceFile read_trace(const std::filesystem::path& path);
TraceFile parse_trace(const std::string& text);

}  // namespace ccop
