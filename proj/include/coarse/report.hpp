#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace coarse {

inline constexpr const char* kToolVersion = "0.1.0";

// One verified inequality instance inside a pipeline run.
struct Verdict {
  std::string name;        // which instance (space/operator/stage)
  std::string operation;   // the operation that produced the numbers
  std::string inequality;  // the inequality that was checked, with values
  bool pass = false;
  std::string note;        // e.g. "vacuous" when nothing was tested
};

// A deterministic result table plus its verdicts. Everything that lands in
// a report file must be reproducible byte-for-byte from the seed; wall-clock
// data stays on the log stream, never in here.
struct Report {
  std::uint64_t seed = 0;
  std::string tool_version = kToolVersion;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<Verdict> verdicts;

  void addRow(std::vector<std::string> row);
  bool allPass() const;
};

std::string toCsv(const Report& r);   // header + rows, RFC-style quoting
std::string toJson(const Report& r);  // full report including verdicts

void writeCsv(const Report& r, const std::string& path);
void writeJson(const Report& r, const std::string& path);

}  // namespace coarse
