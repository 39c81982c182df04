#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "coarse/gallery.hpp"
#include "coarse/io.hpp"
#include "coarse/report.hpp"
#include "coarse/roe.hpp"

using namespace coarse;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string tempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

io::SpaceBundle cycleBundle(int n) {
  auto [space, t] = metricSpace(MetricTable::cycleGraph(n), 1.0);
  io::SpaceBundle b;
  b.space = space;
  b.add("r1", t);
  b.add("r2", power(*t, 2));
  return b;
}

FolnerWitness ballWitness(const io::SpaceBundle& b) {
  BallWitnessSearch s =
      folnerFromBalls(*b.require("r1"), *b.require("r1"), 0.3, 8);
  REQUIRE(s.witness.has_value());
  return *s.witness;
}

}  // namespace

TEST_CASE("doubles print with full precision and read back exactly") {
  for (double v : {1.0 / 3.0, 0.1, 1e-300, 1e308, 123456789.123456789,
                   3.141592653589793, -0.0, 42.0, 2.0 / 7.0}) {
    std::string s = io::formatDouble(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(io::formatDouble(42.0) == "42");
  CHECK(io::formatDouble(0.5) == "0.5");
}

TEST_CASE("the JSON emitter is deterministic and rejects non-finite values") {
  ordered_json j;
  j["b"] = 1.0 / 3.0;
  j["a"] = {1, 2, 3};
  j["s"] = "quote \" and \\ backslash";
  j["nested"] = ordered_json{{"x", true}, {"y", nullptr}};
  std::string out = io::jsonDump(j);
  // Insertion order is preserved and floats carry 17 significant digits.
  CHECK(out.find("\"b\"") < out.find("\"a\""));
  CHECK(out.find("0.33333333333333331") != std::string::npos);
  CHECK(out.back() == '\n');
  CHECK(io::jsonDump(j) == out);

  ordered_json bad;
  bad["v"] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(io::jsonDump(bad), NumericalError);
}

TEST_CASE("space bundles round-trip byte-identically") {
  io::SpaceBundle b = cycleBundle(12);
  std::string first = io::jsonDump(io::spaceToJson(b));
  io::SpaceBundle back = io::spaceFromJson(json::parse(first));
  CHECK(back.space->sameAs(*b.space));
  REQUIRE(back.entourages.size() == 2);
  CHECK(back.entourages[0].first == "r1");
  CHECK(back.require("r1")->samePairs(*b.require("r1")));
  CHECK(back.require("r2")->samePairs(*b.require("r2")));
  CHECK(io::jsonDump(io::spaceToJson(back)) == first);

  std::string path = tempPath("coarse_io_space.json");
  io::saveSpace(b, path);
  io::SpaceBundle loaded = io::loadSpace(path);
  CHECK(io::jsonDump(io::spaceToJson(loaded)) == first);
}

TEST_CASE("bundle registration reuses identical relations and rejects clashes") {
  io::SpaceBundle b = cycleBundle(6);
  std::size_t count = b.entourages.size();
  b.add("r1", b.require("r1"));  // same pairs: reused silently
  CHECK(b.entourages.size() == count);
  CHECK_THROWS_AS(b.add("r1", power(*b.require("r1"), 3)), UsageError);
  CHECK(b.find("nope") == nullptr);
  CHECK_THROWS_AS(b.require("nope"), UsageError);
}

TEST_CASE("space schemas report precise locations") {
  io::SpaceBundle b;  // only needed for witness parsing below
  CHECK_THROWS_AS(io::spaceFromJson(json::parse("[]")), SchemaError);
  try {
    io::spaceFromJson(json::parse(R"({"points": ["a"], "entourages":
      [{"name": "t", "pairs": [["a", "b"]]}]})"));
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(e.pointer() == "/entourages/0/pairs/0/1");
  }
  try {
    io::spaceFromJson(json::parse(R"({"points": ["a", "a"]})"));
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(e.pointer() == "/points");
  }
}

TEST_CASE("witness envelopes round-trip through their JSON forms") {
  io::SpaceBundle b = cycleBundle(24);
  FolnerWitness w = ballWitness(b);
  b.add("balls", w.support());

  SUBCASE("folner") {
    std::string first = io::jsonDump(io::folnerToJson(w, "balls"));
    FolnerWitness back = io::folnerFromJson(json::parse(first), b);
    CHECK(back.variant() == w.variant());
    CHECK(back.maxIndex() == w.maxIndex());
    CHECK(back.counts() == w.counts());
    CHECK(io::jsonDump(io::folnerToJson(back, "balls")) == first);
    CHECK(io::witnessTypeOf(json::parse(first)) == "folner");
  }

  SUBCASE("l1 and l2") {
    ProfilePair p = folnerToL2(w);
    std::string l1 = io::jsonDump(io::l1ToJson(p.l1, "balls"));
    L1Profile l1_back = io::l1FromJson(json::parse(l1), b);
    CHECK(io::jsonDump(io::l1ToJson(l1_back, "balls")) == l1);
    CHECK(l1_back.value(0, 1) == p.l1.value(0, 1));

    std::string l2 = io::jsonDump(io::l2ToJson(p.l2, "balls"));
    L2Profile l2_back = io::l2FromJson(json::parse(l2), b);
    CHECK(io::jsonDump(io::l2ToJson(l2_back, "balls")) == l2);
    CHECK(l2_back.value(0, 1) == p.l2.value(0, 1));
  }

  SUBCASE("complex l2 entries serialize as [re, im]") {
    SparseRows<Complex> rows(24);
    for (int x = 0; x < 24; ++x) rows[x].push_back({x, Complex(0.6, 0.8)});
    L2Profile p(diagonal(b.space), rows);
    b.add("diag", p.support());
    std::string out = io::jsonDump(io::l2ToJson(p, "diag"));
    CHECK(out.find("[") != std::string::npos);
    L2Profile back = io::l2FromJson(json::parse(out), b);
    CHECK(back.value(3, 3) == Complex(0.6, 0.8));
  }

  SUBCASE("kernel") {
    KernelMatrix k = l2ToKernel(folnerToL2(w).l2);
    b.add("overlap", k.support());
    std::string first = io::jsonDump(io::kernelToJson(k, "overlap"));
    KernelMatrix back = io::kernelFromJson(json::parse(first), b);
    CHECK(back.values() == k.values());
    CHECK(io::jsonDump(io::kernelToJson(back, "overlap")) == first);
  }

  SUBCASE("operator") {
    BandedOperator a = BandedOperator::fromTriples(
        b.require("r1"),
        {{0, 1, Complex(0.5, -0.25)}, {3, 3, Complex(2.0)}});
    std::string first = io::jsonDump(io::operatorToJson(a, "r1"));
    BandedOperator back = io::operatorFromJson(json::parse(first), b);
    CHECK(back.band()->samePairs(*a.band()));
    CHECK(back.values() == a.values());
    CHECK(io::jsonDump(io::operatorToJson(back, "r1")) == first);
  }
}

TEST_CASE("witness schemas catch malformed payloads") {
  io::SpaceBundle b = cycleBundle(6);
  FolnerWitness w = ballWitness(cycleBundle(24));

  // Unknown support name.
  ordered_json env = io::folnerToJson(w, "balls");
  CHECK_THROWS_AS(io::folnerFromJson(json::parse(io::jsonDump(env)), b),
                  SchemaError);

  // Nonpositive counts carry a pointer into the sections object.
  json j = json::parse(R"({"type": "folner", "support": "r1", "data":
    {"variant": "nonempty", "max_index": 1, "sections":
      {"0": {"1": 0}}}})");
  try {
    io::folnerFromJson(j, b);
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(e.pointer().find("/data/sections") == 0);
  }

  json wrong_type = json::parse(R"({"type": 7})");
  CHECK_THROWS_AS(io::witnessTypeOf(wrong_type), SchemaError);

  // Kernel triples must stay on the support.
  json k = json::parse(R"({"type": "kernel", "support": "r1", "data":
    {"triples": [["0", "3", 1.0, 0.0]]}})");
  CHECK_THROWS_AS(io::kernelFromJson(k, b), SchemaError);

  // Operator triples must not repeat.
  json op = json::parse(R"({"band": "r1", "triples":
    [["0", "1", 1.0, 0.0], ["0", "1", 2.0, 0.0]]})");
  CHECK_THROWS_AS(io::operatorFromJson(op, b), UsageError);
}

TEST_CASE("edge lists accept comments and reject junk") {
  std::string path = tempPath("coarse_io_edges.txt");
  io::writeTextFile(path, "# a square\n0 1\n1 2\n\n2 3\n3 0\n");
  auto [space, t] = io::loadEdgeList(path);
  CHECK(space->size() == 4);
  CHECK(t->containsDiagonal());
  CHECK(t->isSymmetric());
  CHECK(t->size() == 4 + 8);

  io::writeTextFile(path, "0 1 2\n");
  try {
    (void)io::loadEdgeList(path);
    FAIL("expected a usage error");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
  io::writeTextFile(path, "0 -1\n");
  CHECK_THROWS_AS((void)io::loadEdgeList(path), UsageError);
  io::writeTextFile(path, "# nothing\n");
  CHECK_THROWS_AS((void)io::loadEdgeList(path), UsageError);
  CHECK_THROWS_AS((void)io::loadEdgeList(tempPath("missing_edges.txt")),
                  UsageError);
}

TEST_CASE("groups round-trip through JSON") {
  FiniteGroup g = FiniteGroup::dihedral(3);
  std::string first = io::jsonDump(io::groupToJson(g));
  FiniteGroup back = io::groupFromJson(json::parse(first));
  CHECK(back.order() == 6);
  CHECK(back.table() == g.table());
  CHECK(back.generators() == g.generators());
  CHECK(io::jsonDump(io::groupToJson(back)) == first);
}

TEST_CASE("malformed JSON files surface as schema errors") {
  std::string path = tempPath("coarse_io_broken.json");
  io::writeTextFile(path, "{ not json");
  CHECK_THROWS_AS(io::parseJsonFile(path), SchemaError);
  CHECK_THROWS_AS(io::parseJsonFile(tempPath("missing.json")), UsageError);
}

TEST_CASE("reports serialize with quoting and stable keys") {
  Report r;
  r.seed = 9;
  r.columns = {"name", "value"};
  r.addRow({"plain", "1"});
  r.addRow({"with, comma", "quote \" inside"});
  r.addRow({"multi\nline", "x"});
  Verdict v;
  v.name = "check";
  v.operation = "op";
  v.inequality = "0 < 1";
  v.pass = true;
  r.verdicts.push_back(v);
  Verdict bad = v;
  bad.name = "fails";
  bad.pass = false;
  bad.note = "expected";
  r.verdicts.push_back(bad);

  std::string csv = toCsv(r);
  CHECK(csv.find("\"with, comma\"") != std::string::npos);
  CHECK(csv.find("\"quote \"\" inside\"") != std::string::npos);
  CHECK(csv.find("\"multi\nline\"") != std::string::npos);
  CHECK(csv.rfind("name,value\n", 0) == 0);

  std::string js = toJson(r);
  json parsed = json::parse(js);
  CHECK(parsed["seed"] == 9);
  CHECK(parsed["all_pass"] == false);
  CHECK(parsed["verdicts"].size() == 2);
  CHECK(!parsed["verdicts"][0].contains("note"));  // empty notes are omitted
  CHECK(parsed["verdicts"][1]["note"] == "expected");
  CHECK(!r.allPass());

  CHECK_THROWS_AS(r.addRow({"too", "many", "cells"}), UsageError);

  std::string cpath = tempPath("coarse_io_report.csv");
  std::string jpath = tempPath("coarse_io_report.json");
  writeCsv(r, cpath);
  writeJson(r, jpath);
  CHECK(io::readTextFile(cpath) == csv);
  CHECK(io::readTextFile(jpath) == js);
}
