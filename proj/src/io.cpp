#include "coarse/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace coarse::io {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void schemaFail(const std::string& path, const std::string& msg) {
  throw SchemaError(path.empty() ? "/" : path, msg);
}

const json& field(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) schemaFail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) schemaFail(path + "/" + key, "missing field");
  return *it;
}

std::string expectString(const json& j, const std::string& path) {
  if (!j.is_string()) schemaFail(path, "expected a string");
  return j.get<std::string>();
}

std::int64_t expectInt(const json& j, const std::string& path) {
  if (!j.is_number_integer()) schemaFail(path, "expected an integer");
  return j.get<std::int64_t>();
}

double expectNumber(const json& j, const std::string& path) {
  if (!j.is_number()) schemaFail(path, "expected a number");
  return j.get<double>();
}

Complex expectComplex(const json& j, const std::string& path) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2)
    return Complex(expectNumber(j[0], path + "/0"),
                   expectNumber(j[1], path + "/1"));
  schemaFail(path, "expected a number or a [re, im] pair");
}

const json& expectArray(const json& j, const std::string& path) {
  if (!j.is_array()) schemaFail(path, "expected an array");
  return j;
}

int pointId(const Space& space, const std::string& label,
            const std::string& path) {
  auto id = space.find(label);
  if (!id) schemaFail(path, "unknown point label '" + label + "'");
  return *id;
}

void escapeJsonString(const std::string& s, std::string& out) {
  out += json(s).dump();
}

void dumpValue(const ordered_json& j, std::string& out, int indent) {
  switch (j.type()) {
    case ordered_json::value_t::null:
      out += "null";
      return;
    case ordered_json::value_t::boolean:
      out += j.get<bool>() ? "true" : "false";
      return;
    case ordered_json::value_t::string:
      escapeJsonString(j.get<std::string>(), out);
      return;
    case ordered_json::value_t::number_integer:
    case ordered_json::value_t::number_unsigned:
      out += j.dump();
      return;
    case ordered_json::value_t::number_float: {
      double v = j.get<double>();
      if (!std::isfinite(v))
        throw NumericalError("cannot serialize a non-finite float");
      out += formatDouble(v);
      return;
    }
    case ordered_json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      std::string pad(indent + 2, ' ');
      for (std::size_t i = 0; i < j.size(); ++i) {
        out += pad;
        dumpValue(j[i], out, indent + 2);
        if (i + 1 < j.size()) out += ",";
        out += "\n";
      }
      out += std::string(indent, ' ') + "]";
      return;
    }
    case ordered_json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      std::string pad(indent + 2, ' ');
      std::size_t i = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++i) {
        out += pad;
        escapeJsonString(it.key(), out);
        out += ": ";
        dumpValue(it.value(), out, indent + 2);
        if (i + 1 < j.size()) out += ",";
        out += "\n";
      }
      out += std::string(indent, ' ') + "}";
      return;
    }
    default:
      throw NumericalError("cannot serialize this JSON value type");
  }
}

}  // namespace

std::string formatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string jsonDump(const ordered_json& j) {
  std::string out;
  dumpValue(j, out, 0);
  out += "\n";
  return out;
}

std::string readTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void writeTextFile(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write file '" + path + "'");
  out << content;
  if (!out) throw UsageError("write failed for '" + path + "'");
}

json parseJsonFile(const std::string& path) {
  const std::string text = readTextFile(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("/", std::string("invalid JSON in '") + path + "': " + e.what());
  }
}

EntouragePtr SpaceBundle::find(const std::string& name) const {
  for (const auto& [n, t] : entourages)
    if (n == name) return t;
  return nullptr;
}

EntouragePtr SpaceBundle::require(const std::string& name) const {
  EntouragePtr t = find(name);
  if (!t) throw UsageError("unknown entourage '" + name + "'");
  return t;
}

void SpaceBundle::add(const std::string& name, EntouragePtr t) {
  if (EntouragePtr existing = find(name)) {
    if (!existing->samePairs(*t))
      throw UsageError("entourage name '" + name +
                       "' already tracks a different relation");
    return;
  }
  entourages.push_back({name, std::move(t)});
}

ordered_json spaceToJson(const SpaceBundle& b) {
  ordered_json j;
  j["points"] = b.space->labels();
  ordered_json ents = ordered_json::array();
  for (const auto& [name, t] : b.entourages) {
    ordered_json e;
    e["name"] = name;
    ordered_json pairs = ordered_json::array();
    for (const auto& [x, y] : t->pairs())
      pairs.push_back({b.space->label(x), b.space->label(y)});
    e["pairs"] = std::move(pairs);
    ents.push_back(std::move(e));
  }
  j["entourages"] = std::move(ents);
  return j;
}

SpaceBundle spaceFromJson(const json& j) {
  const json& points = expectArray(field(j, "points", ""), "/points");
  std::vector<std::string> labels;
  labels.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    labels.push_back(expectString(points[i], "/points/" + std::to_string(i)));
  SpacePtr space;
  try {
    space = Space::make(std::move(labels));
  } catch (const UsageError& e) {
    schemaFail("/points", e.what());
  }

  SpaceBundle bundle{space, {}};
  const json& ents = expectArray(field(j, "entourages", ""), "/entourages");
  for (std::size_t i = 0; i < ents.size(); ++i) {
    std::string base = "/entourages/" + std::to_string(i);
    std::string name = expectString(field(ents[i], "name", base), base + "/name");
    if (bundle.find(name))
      schemaFail(base + "/name", "duplicate entourage name '" + name + "'");
    const json& pairs = expectArray(field(ents[i], "pairs", base), base + "/pairs");
    std::vector<PointPair> pp;
    pp.reserve(pairs.size());
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      std::string ppath = base + "/pairs/" + std::to_string(k);
      const json& pair = expectArray(pairs[k], ppath);
      if (pair.size() != 2) schemaFail(ppath, "expected a [x, y] pair");
      pp.push_back({pointId(*space, expectString(pair[0], ppath + "/0"), ppath + "/0"),
                    pointId(*space, expectString(pair[1], ppath + "/1"), ppath + "/1")});
    }
    bundle.entourages.push_back({name, makeEntourage(space, std::move(pp))});
  }
  return bundle;
}

SpaceBundle loadSpace(const std::string& path) {
  return spaceFromJson(parseJsonFile(path));
}

void saveSpace(const SpaceBundle& b, const std::string& path) {
  writeTextFile(path, jsonDump(spaceToJson(b)));
}

ordered_json groupToJson(const FiniteGroup& g) {
  ordered_json j;
  j["elements"] = g.elements();
  j["table"] = g.table();
  j["generators"] = g.generators();
  return j;
}

FiniteGroup groupFromJson(const json& j) {
  const json& elements = expectArray(field(j, "elements", ""), "/elements");
  std::vector<std::string> els;
  for (std::size_t i = 0; i < elements.size(); ++i)
    els.push_back(expectString(elements[i], "/elements/" + std::to_string(i)));
  const json& table = expectArray(field(j, "table", ""), "/table");
  std::vector<std::vector<int>> rows;
  for (std::size_t i = 0; i < table.size(); ++i) {
    std::string rpath = "/table/" + std::to_string(i);
    const json& row = expectArray(table[i], rpath);
    std::vector<int> r;
    for (std::size_t k = 0; k < row.size(); ++k)
      r.push_back(static_cast<int>(
          expectInt(row[k], rpath + "/" + std::to_string(k))));
    rows.push_back(std::move(r));
  }
  const json& gens = expectArray(field(j, "generators", ""), "/generators");
  std::vector<int> gg;
  for (std::size_t i = 0; i < gens.size(); ++i)
    gg.push_back(static_cast<int>(
        expectInt(gens[i], "/generators/" + std::to_string(i))));
  return FiniteGroup(std::move(els), std::move(rows), std::move(gg));
}

FiniteGroup loadGroup(const std::string& path) {
  return groupFromJson(parseJsonFile(path));
}

SpaceWithEntourage loadEdgeList(const std::string& path) {
  std::istringstream in(readTextFile(path));
  std::string line;
  std::vector<PointPair> edges;
  long long max_vertex = -1;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv(line);
    if (auto pos = sv.find('#'); pos != std::string_view::npos)
      sv = sv.substr(0, pos);
    std::istringstream ls{std::string(sv)};
    long long u, v;
    if (!(ls >> u)) continue;  // blank or comment-only line
    if (!(ls >> v))
      throw UsageError("edge list line " + std::to_string(line_no) +
                       " needs two vertices");
    std::string extra;
    if (ls >> extra)
      throw UsageError("edge list line " + std::to_string(line_no) +
                       " has trailing tokens");
    if (u < 0 || v < 0)
      throw UsageError("edge list line " + std::to_string(line_no) +
                       " has a negative vertex");
    max_vertex = std::max({max_vertex, u, v});
    edges.push_back({static_cast<int>(u), static_cast<int>(v)});
  }
  if (max_vertex < 0) throw UsageError("edge list '" + path + "' has no edges");
  SpacePtr space = Space::numbered(static_cast<int>(max_vertex) + 1);
  std::vector<PointPair> pairs;
  for (int x = 0; x < space->size(); ++x) pairs.push_back({x, x});
  for (const auto& [u, v] : edges) {
    pairs.push_back({u, v});
    pairs.push_back({v, u});
  }
  return {space, makeEntourage(space, std::move(pairs))};
}

std::string witnessTypeOf(const json& j) {
  return expectString(field(j, "type", ""), "/type");
}

namespace {

EntouragePtr supportFromEnvelope(const json& j, const SpaceBundle& b,
                                 const char* expected_type) {
  std::string type = witnessTypeOf(j);
  if (type != expected_type)
    schemaFail("/type", std::string("expected type '") + expected_type +
                            "', found '" + type + "'");
  std::string name = expectString(field(j, "support", ""), "/support");
  EntouragePtr t = b.find(name);
  if (!t) schemaFail("/support", "unknown entourage '" + name + "'");
  return t;
}

}  // namespace

ordered_json folnerToJson(const FolnerWitness& w,
                          const std::string& support_name) {
  const Space& space = *w.support()->space();
  ordered_json sections = ordered_json::object();
  for (int x = 0; x < space.size(); ++x) {
    if (w.counts()[x].empty()) continue;
    ordered_json row = ordered_json::object();
    for (const auto& [y, c] : w.counts()[x]) row[space.label(y)] = c;
    sections[space.label(x)] = std::move(row);
  }
  ordered_json j;
  j["type"] = "folner";
  j["support"] = support_name;
  j["data"] = {
      {"variant",
       w.variant() == FolnerVariant::kDiagonal ? "diagonal" : "nonempty"},
      {"max_index", w.maxIndex()},
      {"sections", std::move(sections)}};
  return j;
}

FolnerWitness folnerFromJson(const json& j, const SpaceBundle& b) {
  EntouragePtr support = supportFromEnvelope(j, b, "folner");
  const json& data = field(j, "data", "");
  std::string variant =
      expectString(field(data, "variant", "/data"), "/data/variant");
  if (variant != "diagonal" && variant != "nonempty")
    schemaFail("/data/variant", "expected 'diagonal' or 'nonempty'");
  std::int64_t max_index =
      expectInt(field(data, "max_index", "/data"), "/data/max_index");
  if (max_index < 0) schemaFail("/data/max_index", "must be nonnegative");
  const json& sections = field(data, "sections", "/data");
  if (!sections.is_object()) schemaFail("/data/sections", "expected an object");
  SparseRows<std::int64_t> counts(b.space->size());
  for (auto it = sections.begin(); it != sections.end(); ++it) {
    std::string xpath = "/data/sections/" + it.key();
    int x = pointId(*b.space, it.key(), xpath);
    if (!it.value().is_object()) schemaFail(xpath, "expected an object");
    for (auto jt = it.value().begin(); jt != it.value().end(); ++jt) {
      std::string ypath = xpath + "/" + jt.key();
      int y = pointId(*b.space, jt.key(), ypath);
      std::int64_t c = expectInt(jt.value(), ypath);
      if (c < 1) schemaFail(ypath, "section counts must be positive");
      counts[x].push_back({y, c});
    }
    std::sort(counts[x].begin(), counts[x].end());
  }
  return FolnerWitness(support, std::move(counts), max_index,
                       variant == "diagonal" ? FolnerVariant::kDiagonal
                                             : FolnerVariant::kNonempty);
}

ordered_json l1ToJson(const L1Profile& p, const std::string& support_name) {
  const Space& space = *p.support()->space();
  ordered_json rows = ordered_json::object();
  for (int x = 0; x < space.size(); ++x) {
    ordered_json row = ordered_json::object();
    for (const auto& [y, v] : p.rows()[x]) row[space.label(y)] = v;
    rows[space.label(x)] = std::move(row);
  }
  ordered_json j;
  j["type"] = "l1";
  j["support"] = support_name;
  j["data"] = {{"rows", std::move(rows)}};
  return j;
}

L1Profile l1FromJson(const json& j, const SpaceBundle& b) {
  EntouragePtr support = supportFromEnvelope(j, b, "l1");
  const json& rows = field(field(j, "data", ""), "rows", "/data");
  if (!rows.is_object()) schemaFail("/data/rows", "expected an object");
  SparseRows<double> out(b.space->size());
  for (auto it = rows.begin(); it != rows.end(); ++it) {
    std::string xpath = "/data/rows/" + it.key();
    int x = pointId(*b.space, it.key(), xpath);
    if (!it.value().is_object()) schemaFail(xpath, "expected an object");
    for (auto jt = it.value().begin(); jt != it.value().end(); ++jt) {
      std::string ypath = xpath + "/" + jt.key();
      int y = pointId(*b.space, jt.key(), ypath);
      out[x].push_back({y, expectNumber(jt.value(), ypath)});
    }
    std::sort(out[x].begin(), out[x].end());
  }
  return L1Profile(support, std::move(out));
}

ordered_json l2ToJson(const L2Profile& p, const std::string& support_name) {
  const Space& space = *p.support()->space();
  ordered_json rows = ordered_json::object();
  for (int x = 0; x < space.size(); ++x) {
    ordered_json row = ordered_json::object();
    for (const auto& [y, v] : p.vectors()[x]) {
      if (v.imag() == 0.0)
        row[space.label(y)] = v.real();
      else
        row[space.label(y)] = {v.real(), v.imag()};
    }
    rows[space.label(x)] = std::move(row);
  }
  ordered_json j;
  j["type"] = "l2";
  j["support"] = support_name;
  j["data"] = {{"vectors", std::move(rows)}};
  return j;
}

L2Profile l2FromJson(const json& j, const SpaceBundle& b) {
  EntouragePtr support = supportFromEnvelope(j, b, "l2");
  const json& rows = field(field(j, "data", ""), "vectors", "/data");
  if (!rows.is_object()) schemaFail("/data/vectors", "expected an object");
  SparseRows<Complex> out(b.space->size());
  for (auto it = rows.begin(); it != rows.end(); ++it) {
    std::string xpath = "/data/vectors/" + it.key();
    int x = pointId(*b.space, it.key(), xpath);
    if (!it.value().is_object()) schemaFail(xpath, "expected an object");
    for (auto jt = it.value().begin(); jt != it.value().end(); ++jt) {
      std::string ypath = xpath + "/" + jt.key();
      int y = pointId(*b.space, jt.key(), ypath);
      out[x].push_back({y, expectComplex(jt.value(), ypath)});
    }
    std::sort(out[x].begin(), out[x].end(),
              [](const auto& a, const auto& c) { return a.first < c.first; });
  }
  return L2Profile(support, std::move(out));
}

ordered_json kernelToJson(const KernelMatrix& k,
                          const std::string& support_name) {
  const Space& space = *k.support()->space();
  ordered_json triples = ordered_json::array();
  for (std::size_t i = 0; i < k.support()->size(); ++i) {
    const Complex& v = k.values()[i];
    if (v == Complex(0.0)) continue;
    auto [x, y] = k.support()->pairs()[i];
    triples.push_back({space.label(x), space.label(y), v.real(), v.imag()});
  }
  ordered_json j;
  j["type"] = "kernel";
  j["support"] = support_name;
  j["data"] = {{"triples", std::move(triples)}};
  return j;
}

KernelMatrix kernelFromJson(const json& j, const SpaceBundle& b) {
  EntouragePtr support = supportFromEnvelope(j, b, "kernel");
  const json& triples = expectArray(
      field(field(j, "data", ""), "triples", "/data"), "/data/triples");
  std::vector<Complex> values(support->size(), Complex(0.0));
  std::vector<char> seen(support->size(), 0);
  for (std::size_t i = 0; i < triples.size(); ++i) {
    std::string tpath = "/data/triples/" + std::to_string(i);
    const json& t = expectArray(triples[i], tpath);
    if (t.size() != 4) schemaFail(tpath, "expected [x, y, re, im]");
    int x = pointId(*b.space, expectString(t[0], tpath + "/0"), tpath + "/0");
    int y = pointId(*b.space, expectString(t[1], tpath + "/1"), tpath + "/1");
    auto idx = support->pairIndex(x, y);
    if (!idx) schemaFail(tpath, "pair lies outside the support relation");
    if (seen[*idx]) schemaFail(tpath, "duplicate kernel entry");
    seen[*idx] = 1;
    values[*idx] = Complex(expectNumber(t[2], tpath + "/2"),
                           expectNumber(t[3], tpath + "/3"));
  }
  return KernelMatrix(support, std::move(values));
}

ordered_json operatorToJson(const BandedOperator& a,
                            const std::string& band_name) {
  const Space& space = *a.band()->space();
  ordered_json triples = ordered_json::array();
  for (std::size_t i = 0; i < a.band()->size(); ++i) {
    const Complex& v = a.values()[i];
    if (v == Complex(0.0)) continue;
    auto [x, y] = a.band()->pairs()[i];
    triples.push_back({space.label(x), space.label(y), v.real(), v.imag()});
  }
  ordered_json j;
  j["band"] = band_name;
  j["triples"] = std::move(triples);
  return j;
}

BandedOperator operatorFromJson(const json& j, const SpaceBundle& b) {
  std::string name = expectString(field(j, "band", ""), "/band");
  EntouragePtr band = b.find(name);
  if (!band) schemaFail("/band", "unknown entourage '" + name + "'");
  const json& triples = expectArray(field(j, "triples", ""), "/triples");
  std::vector<std::tuple<int, int, Complex>> tt;
  tt.reserve(triples.size());
  for (std::size_t i = 0; i < triples.size(); ++i) {
    std::string tpath = "/triples/" + std::to_string(i);
    const json& t = expectArray(triples[i], tpath);
    if (t.size() != 4) schemaFail(tpath, "expected [x, y, re, im]");
    int x = pointId(*b.space, expectString(t[0], tpath + "/0"), tpath + "/0");
    int y = pointId(*b.space, expectString(t[1], tpath + "/1"), tpath + "/1");
    if (!band->contains(x, y))
      schemaFail(tpath, "pair lies outside the band relation");
    tt.push_back({x, y, Complex(expectNumber(t[2], tpath + "/2"),
                                expectNumber(t[3], tpath + "/3"))});
  }
  return BandedOperator::fromTriples(band, tt);
}

}  // namespace coarse::io
