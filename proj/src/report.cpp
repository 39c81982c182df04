#include "coarse/report.hpp"

#include <json.hpp>

#include "coarse/errors.hpp"
#include "coarse/io.hpp"

namespace coarse {

void Report::addRow(std::vector<std::string> row) {
  if (row.size() != columns.size())
    throw UsageError("report row width does not match the column count");
  rows.push_back(std::move(row));
}

bool Report::allPass() const {
  for (const Verdict& v : verdicts)
    if (!v.pass) return false;
  return true;
}

namespace {
void appendCsvCell(const std::string& cell, std::string& out) {
  if (cell.find_first_of(",\"\n") == std::string::npos) {
    out += cell;
    return;
  }
  out += '"';
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

void appendCsvRow(const std::vector<std::string>& row, std::string& out) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ',';
    appendCsvCell(row[i], out);
  }
  out += '\n';
}
}  // namespace

std::string toCsv(const Report& r) {
  std::string out;
  appendCsvRow(r.columns, out);
  for (const auto& row : r.rows) appendCsvRow(row, out);
  return out;
}

std::string toJson(const Report& r) {
  nlohmann::ordered_json j;
  j["tool_version"] = r.tool_version;
  j["seed"] = r.seed;
  j["columns"] = r.columns;
  j["rows"] = r.rows;
  nlohmann::ordered_json verdicts = nlohmann::ordered_json::array();
  for (const Verdict& v : r.verdicts) {
    nlohmann::ordered_json jv;
    jv["name"] = v.name;
    jv["operation"] = v.operation;
    jv["inequality"] = v.inequality;
    jv["pass"] = v.pass;
    if (!v.note.empty()) jv["note"] = v.note;
    verdicts.push_back(std::move(jv));
  }
  j["verdicts"] = std::move(verdicts);
  j["all_pass"] = r.allPass();
  return io::jsonDump(j);
}

void writeCsv(const Report& r, const std::string& path) {
  io::writeTextFile(path, toCsv(r));
}

void writeJson(const Report& r, const std::string& path) {
  io::writeTextFile(path, toJson(r));
}

}  // namespace coarse
