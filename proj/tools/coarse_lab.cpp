// coarse_lab: command-line front end for the coarse-space truncation toolkit.
//
// Exit codes: 0 success / all verdicts pass, 1 a checked verdict failed,
// 2 usage or malformed input, 3 numerical failure.

#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "coarse/gallery.hpp"
#include "coarse/io.hpp"
#include "coarse/onl.hpp"
#include "coarse/parallel.hpp"
#include "coarse/report.hpp"
#include "coarse/roe.hpp"
#include "coarse/witness.hpp"

namespace {

using namespace coarse;
using nlohmann::json;

// ---------------------------------------------------------------- spaces

struct SpaceSpec {
  std::string file;
  std::string edges;
  std::string family;  // cycle | path | random-regular | group | box
  int n = 0;
  int degree = 0;
  std::uint64_t graph_seed = 0;
  std::string group_family;  // cyclic | dihedral | symmetric
  int group_n = 0;
  std::string group_file;
  std::vector<int> orders;
  std::vector<int> radii;
  std::string display_name;
};

FiniteGroup makeGroup(const std::string& family, int n,
                      const std::string& file) {
  if (!file.empty()) return io::loadGroup(file);
  if (family == "cyclic") return FiniteGroup::cyclic(n);
  if (family == "dihedral") return FiniteGroup::dihedral(n);
  if (family == "symmetric") return FiniteGroup::symmetric(n);
  throw UsageError("unknown group family '" + family + "'");
}

io::SpaceBundle buildSpace(SpaceSpec& spec) {
  if (!spec.file.empty()) {
    if (spec.display_name.empty()) spec.display_name = spec.file;
    return io::loadSpace(spec.file);
  }
  io::SpaceBundle bundle;
  std::vector<int> radii = spec.radii.empty() ? std::vector<int>{1} : spec.radii;
  for (int r : radii)
    if (r < 1) throw UsageError("entourage radii must be positive");

  if (!spec.edges.empty()) {
    auto [space, adj] = io::loadEdgeList(spec.edges);
    bundle.space = space;
    bundle.add("adj", adj);
    for (int r : radii) bundle.add("r" + std::to_string(r), power(*adj, r));
    if (spec.display_name.empty()) spec.display_name = spec.edges;
    return bundle;
  }

  if (spec.family == "cycle" || spec.family == "path") {
    if (spec.n < 1) throw UsageError("--n must be positive");
    MetricTable m = spec.family == "cycle" ? MetricTable::cycleGraph(spec.n)
                                           : MetricTable::pathGraph(spec.n);
    bool first = true;
    for (int r : radii) {
      auto [space, t] = metricSpace(m, r);
      if (first) {
        bundle.space = space;
        first = false;
      }
      bundle.add("r" + std::to_string(r), makeEntourage(bundle.space, t->pairs()));
    }
    if (spec.display_name.empty())
      spec.display_name = spec.family + ":" + std::to_string(spec.n);
    return bundle;
  }
  if (spec.family == "random-regular") {
    if (spec.n < 1) throw UsageError("--n must be positive");
    auto [space, adj] = randomRegularGraph(spec.n, spec.degree, spec.graph_seed);
    bundle.space = space;
    bundle.add("adj", adj);
    for (int r : radii) bundle.add("r" + std::to_string(r), power(*adj, r));
    if (spec.display_name.empty())
      spec.display_name = "random-regular:" + std::to_string(spec.n) + "x" +
                          std::to_string(spec.degree) + ":" +
                          std::to_string(spec.graph_seed);
    return bundle;
  }
  if (spec.family == "group") {
    FiniteGroup g = makeGroup(spec.group_family, spec.group_n, spec.group_file);
    bundle.space = groupAsSpace(g);
    auto action = leftTranslationAction(g);
    std::vector<int> k;
    k.push_back(g.identity());
    for (int gen : g.generators()) {
      k.push_back(gen);
      k.push_back(g.inverse(gen));
    }
    EntouragePtr t1 = groupActionEntourage(g, bundle.space, action, k);
    for (int r : radii) bundle.add("r" + std::to_string(r), power(*t1, r));
    if (spec.display_name.empty())
      spec.display_name = "group:" + spec.group_family + ":" +
                          std::to_string(spec.group_n);
    return bundle;
  }
  if (spec.family == "box") {
    if (spec.orders.empty()) throw UsageError("box spaces need --orders");
    std::vector<FiniteGroup> seq;
    for (int o : spec.orders) seq.push_back(FiniteGroup::cyclic(o));
    bool first = true;
    for (int r : radii) {
      auto [space, t] = boxSpace(seq, r);
      if (first) {
        bundle.space = space;
        first = false;
      }
      bundle.add("r" + std::to_string(r), makeEntourage(bundle.space, t->pairs()));
    }
    if (spec.display_name.empty()) {
      spec.display_name = "box:";
      for (std::size_t i = 0; i < spec.orders.size(); ++i)
        spec.display_name +=
            (i ? "," : "") + std::to_string(spec.orders[i]);
    }
    return bundle;
  }
  throw UsageError("no space source given (need --space, --edges or --family)");
}

BandedOperator adjacencyOperator(const io::SpaceBundle& b,
                                 const std::string& name) {
  EntouragePtr t = b.require(name);
  std::vector<PointPair> off;
  for (const auto& [x, y] : t->pairs())
    if (x != y) off.push_back({x, y});
  return BandedOperator::onesOn(makeEntourage(b.space, std::move(off)));
}

const char* methodName(NormMethod m) {
  return m == NormMethod::kDenseEig ? "dense" : "power";
}

// ------------------------------------------------------------ onl profile

Report onlProfileReport(const io::SpaceBundle& bundle,
                        const std::string& space_name,
                        const BandedOperator& op, const std::string& op_name,
                        const Entourage& base, std::vector<int> windows,
                        std::uint64_t seed) {
  if (windows.empty()) throw UsageError("profile needs at least one window radius");
  std::sort(windows.begin(), windows.end());
  for (int w : windows)
    if (w < 1) throw UsageError("window radii must be positive");

  Report rep;
  rep.seed = seed;
  rep.columns = {"space", "operator", "window_name", "window_radius",
                 "best_ratio", "center", "norm", "method"};
  EntouragePtr step = symmetrize(base);
  EntouragePtr window = diagonal(bundle.space);
  int built = 0;
  double prev_ratio = -1.0;
  for (int w : windows) {
    for (; built < w; ++built) window = compose(*window, *step);
    BetaScan scan = betaCheck(op, window, 0.5);
    std::string wname = "S" + std::to_string(w);
    rep.addRow({space_name, op_name, wname, std::to_string(w),
                io::formatDouble(scan.best_block_ratio),
                scan.best_center >= 0 ? bundle.space->label(scan.best_center)
                                      : "-",
                io::formatDouble(scan.norm.value), methodName(scan.norm.method)});
    Verdict bound;
    bound.name = space_name + "/" + wname;
    bound.operation = "window scan";
    bound.inequality = "best block ratio " +
                       io::formatDouble(scan.best_block_ratio) + " <= 1 + 1e-9";
    bound.pass = scan.best_block_ratio <= 1.0 + 1e-9;
    rep.verdicts.push_back(std::move(bound));
    if (prev_ratio >= 0.0) {
      Verdict mono;
      mono.name = space_name + "/" + wname;
      mono.operation = "window scan";
      mono.inequality = "ratio " + io::formatDouble(scan.best_block_ratio) +
                        " >= previous " + io::formatDouble(prev_ratio) +
                        " - 1e-12 (windows are nested)";
      mono.pass = scan.best_block_ratio >= prev_ratio - 1e-12;
      rep.verdicts.push_back(std::move(mono));
    }
    prev_ratio = scan.best_block_ratio;
  }
  return rep;
}

// ------------------------------------------------------- witness roundtrip

Report witnessRoundtripReport(const io::SpaceBundle& bundle,
                              const std::string& space_name,
                              const Entourage& t, double eps,
                              const std::optional<FolnerWitness>& given,
                              const std::string& gens_name, int r_max,
                              std::uint64_t seed) {
  Report rep;
  rep.seed = seed;
  rep.columns = {"stage", "metric", "value"};
  const std::string vac_note = t.size() == 0 ? "vacuous" : "";

  auto addVerdict = [&rep, &vac_note](const std::string& name,
                                      const std::string& op,
                                      const std::string& ineq, bool pass) {
    Verdict v;
    v.name = name;
    v.operation = op;
    v.inequality = ineq;
    v.pass = pass;
    v.note = vac_note;
    rep.verdicts.push_back(std::move(v));
  };

  // Stage 1: obtain the witness.
  std::optional<FolnerWitness> witness = given;
  if (!witness) {
    BallWitnessSearch search =
        folnerFromBalls(*bundle.require(gens_name), t, eps, r_max);
    if (!search.witness) {
      addVerdict(space_name + "/search", "ball witness search",
                 "no passing radius r <= " + std::to_string(r_max), false);
      return rep;
    }
    rep.addRow({"search", "radius", std::to_string(search.radius)});
    witness = std::move(search.witness);
  }

  // Stage 2: ratio condition.
  FolnerReport fr = verifyFolner(*witness, t, eps);
  rep.addRow({"input", "max_ratio", io::formatDouble(fr.max_ratio)});
  addVerdict(space_name + "/ratio", "set witness check",
             "max symmetric-difference ratio " + io::formatDouble(fr.max_ratio) +
                 " < " + io::formatDouble(eps),
             fr.pass);
  if (!fr.pass) return rep;

  // Stage 3: l1/l2 profiles and the sqrt(2 eps) displacement bound.
  ProfilePair profiles = folnerToL2(*witness);
  L2Quality q = verifyL2(profiles.l2, t);
  double disp_bound = std::sqrt(2.0 * eps);
  rep.addRow({"l2", "displacement", io::formatDouble(q.displacement)});
  addVerdict(space_name + "/l2", "normalized sqrt profile",
             "displacement " + io::formatDouble(q.displacement) + " < sqrt(2*" +
                 io::formatDouble(eps) + ") = " + io::formatDouble(disp_bound),
             q.displacement < disp_bound);

  // Stage 4: Gram kernel.
  KernelMatrix kernel = l2ToKernel(profiles.l2);
  KernelReport kr = verifyKernel(kernel, t);
  rep.addRow({"kernel", "min_eigenvalue", io::formatDouble(kr.min_eigenvalue)});
  rep.addRow({"kernel", "sup_one_minus_k", io::formatDouble(kr.sup_one_minus_k)});
  double psd_tol = 1e-9 * bundle.space->size() * std::max(1.0, kernel.maxAbs());
  addVerdict(space_name + "/kernel-psd", "Gram kernel",
             "min eigenvalue " + io::formatDouble(kr.min_eigenvalue) +
                 " >= -" + io::formatDouble(psd_tol),
             kr.min_eigenvalue >= -psd_tol);
  addVerdict(space_name + "/kernel-defect", "Gram kernel",
             "sup |1 - k| = " + io::formatDouble(kr.sup_one_minus_k) +
                 " <= displacement " + io::formatDouble(q.displacement),
             kr.sup_one_minus_k <= q.displacement);

  // Stage 5: factor the kernel back through l2.
  KernelFactorization fact = kernelToL2(kernel, eps);
  rep.addRow({"factorization", "band_power", std::to_string(fact.band_power)});
  rep.addRow({"factorization", "residual", io::formatDouble(fact.residual)});
  rep.addRow({"factorization", "displacement_bound",
              io::formatDouble(fact.displacement_bound)});
  addVerdict(space_name + "/factorization", "kernel square-root truncation",
             "residual " + io::formatDouble(fact.residual) + " < " +
                 io::formatDouble(eps),
             fact.residual < eps);
  L2Quality q2 = verifyL2(fact.profile, t);
  rep.addRow({"factorization", "displacement", io::formatDouble(q2.displacement)});
  bool premise = kr.sup_one_minus_k <= eps;
  Verdict vb;
  vb.name = space_name + "/factored-displacement";
  vb.operation = "kernel square-root truncation";
  vb.inequality = "displacement " + io::formatDouble(q2.displacement) +
                  " <= a-priori bound " +
                  io::formatDouble(fact.displacement_bound) +
                  " (premise: kernel defect <= eps)";
  vb.pass = !premise || q2.displacement <= fact.displacement_bound;
  vb.note = premise ? vac_note : "premise not met; informational";
  rep.verdicts.push_back(std::move(vb));

  // Stage 6: round back to a set witness at the measured displacement.
  double eps2 = std::max(q2.displacement * (1.0 + 1e-9), 1e-12);
  if (eps2 >= 1.0) {
    addVerdict(space_name + "/rounding", "grid rounding",
               "measured displacement " + io::formatDouble(q2.displacement) +
                   " leaves no rounding budget (needs < 1)",
               false);
    return rep;
  }
  FolnerDiscretization disc = l2ToFolner(fact.profile, t, eps2);
  double threshold = 2.0 * eps2 / (1.0 - eps2);
  rep.addRow({"rounding", "grid", std::to_string(disc.grid)});
  rep.addRow({"rounding", "max_ratio", io::formatDouble(disc.achieved_ratio)});
  addVerdict(space_name + "/rounding", "grid rounding",
             "max ratio " + io::formatDouble(disc.achieved_ratio) + " < 2e/(1-e) = " +
                 io::formatDouble(threshold),
             disc.achieved_ratio < threshold);
  return rep;
}

// ------------------------------------------------------------- pipelines

SpaceSpec spaceSpecFromJson(const json& j) {
  SpaceSpec spec;
  if (!j.is_object()) throw SchemaError("/space", "expected an object");
  auto getInt = [&j](const char* key, int def) {
    auto it = j.find(key);
    if (it == j.end()) return def;
    if (!it->is_number_integer())
      throw SchemaError(std::string("/space/") + key, "expected an integer");
    return it->get<int>();
  };
  if (auto it = j.find("file"); it != j.end()) {
    if (!it->is_string()) throw SchemaError("/space/file", "expected a string");
    spec.file = it->get<std::string>();
    return spec;
  }
  if (auto it = j.find("edges"); it != j.end()) {
    if (!it->is_string()) throw SchemaError("/space/edges", "expected a string");
    spec.edges = it->get<std::string>();
  }
  if (auto it = j.find("family"); it != j.end()) {
    if (!it->is_string()) throw SchemaError("/space/family", "expected a string");
    spec.family = it->get<std::string>();
  }
  spec.n = getInt("n", 0);
  spec.degree = getInt("degree", 0);
  spec.graph_seed = static_cast<std::uint64_t>(getInt("graph_seed", 0));
  if (auto it = j.find("group_family"); it != j.end())
    spec.group_family = it->get<std::string>();
  spec.group_n = getInt("group_n", 0);
  if (auto it = j.find("group_file"); it != j.end())
    spec.group_file = it->get<std::string>();
  if (auto it = j.find("orders"); it != j.end()) {
    if (!it->is_array()) throw SchemaError("/space/orders", "expected an array");
    for (const auto& v : *it) spec.orders.push_back(v.get<int>());
  }
  if (auto it = j.find("radii"); it != j.end()) {
    if (!it->is_array()) throw SchemaError("/space/radii", "expected an array");
    for (const auto& v : *it) spec.radii.push_back(v.get<int>());
  }
  return spec;
}

int runPipeline(const std::string& config_path) {
  json cfg = io::parseJsonFile(config_path);
  if (!cfg.is_object()) throw SchemaError("/", "expected an object");

  std::uint64_t seed = 0;
  if (auto it = cfg.find("seed"); it != cfg.end()) {
    if (!it->is_number_integer() || it->get<std::int64_t>() < 0)
      throw SchemaError("/seed", "expected a nonnegative integer");
    seed = it->get<std::uint64_t>();
  }
  if (cfg.find("space") == cfg.end())
    throw SchemaError("/space", "missing field");
  SpaceSpec spec = spaceSpecFromJson(cfg["space"]);
  io::SpaceBundle bundle = buildSpace(spec);

  auto it_ent = cfg.find("entourage");
  if (it_ent == cfg.end() || !it_ent->is_string())
    throw SchemaError("/entourage", "expected an entourage name");
  EntouragePtr tested = bundle.find(it_ent->get<std::string>());
  if (!tested)
    throw SchemaError("/entourage",
                      "unknown entourage '" + it_ent->get<std::string>() + "'");

  auto it_chain = cfg.find("chain");
  if (it_chain == cfg.end() || !it_chain->is_string())
    throw SchemaError("/chain", "expected a chain name");
  std::string chain = it_chain->get<std::string>();

  Report rep;
  if (chain == "witness-roundtrip") {
    auto it_eps = cfg.find("epsilon");
    if (it_eps == cfg.end() || !it_eps->is_number())
      throw SchemaError("/epsilon", "expected a number");
    double eps = it_eps->get<double>();
    std::optional<FolnerWitness> given;
    std::string gens_name;
    int r_max = 0;
    auto it_w = cfg.find("witness");
    if (it_w == cfg.end()) throw SchemaError("/witness", "missing field");
    if (auto f = it_w->find("file"); f != it_w->end()) {
      given = io::folnerFromJson(io::parseJsonFile(f->get<std::string>()), bundle);
    } else if (auto bsearch = it_w->find("balls"); bsearch != it_w->end()) {
      auto g = bsearch->find("gens");
      if (g == bsearch->end() || !g->is_string())
        throw SchemaError("/witness/balls/gens", "expected an entourage name");
      gens_name = g->get<std::string>();
      auto r = bsearch->find("r_max");
      if (r == bsearch->end() || !r->is_number_integer())
        throw SchemaError("/witness/balls/r_max", "expected an integer");
      r_max = r->get<int>();
    } else {
      throw SchemaError("/witness", "expected 'file' or 'balls'");
    }
    rep = witnessRoundtripReport(bundle, spec.display_name, *tested, eps, given,
                                 gens_name, r_max, seed);
  } else if (chain == "onl-profile") {
    auto it_win = cfg.find("windows");
    if (it_win == cfg.end() || !it_win->is_array())
      throw SchemaError("/windows", "expected an array of radii");
    std::vector<int> windows;
    for (const auto& v : *it_win) windows.push_back(v.get<int>());
    auto it_op = cfg.find("operator");
    if (it_op == cfg.end()) throw SchemaError("/operator", "missing field");
    std::optional<BandedOperator> op;
    std::string op_name;
    if (it_op->is_string() && it_op->get<std::string>() == "adjacency") {
      op = adjacencyOperator(bundle, it_ent->get<std::string>());
      op_name = "adjacency:" + it_ent->get<std::string>();
    } else if (it_op->is_object() && it_op->find("file") != it_op->end()) {
      std::string path = (*it_op)["file"].get<std::string>();
      op = io::operatorFromJson(io::parseJsonFile(path), bundle);
      op_name = path;
    } else {
      throw SchemaError("/operator", "expected \"adjacency\" or {\"file\": ...}");
    }
    rep = onlProfileReport(bundle, spec.display_name, *op, op_name, *tested,
                           windows, seed);
  } else {
    throw SchemaError("/chain",
                      "unknown chain '" + chain +
                          "' (expected witness-roundtrip or onl-profile)");
  }

  if (auto it_out = cfg.find("output"); it_out != cfg.end()) {
    if (!it_out->is_object()) throw SchemaError("/output", "expected an object");
    if (auto c = it_out->find("csv"); c != it_out->end())
      writeCsv(rep, c->get<std::string>());
    if (auto c = it_out->find("json"); c != it_out->end())
      writeJson(rep, c->get<std::string>());
  }
  for (const Verdict& v : rep.verdicts)
    std::cout << (v.pass ? "[pass] " : "[FAIL] ") << v.name << ": "
              << v.inequality
              << (v.note.empty() ? "" : " (" + v.note + ")") << "\n";
  std::cout << (rep.allPass() ? "all verdicts pass" : "verdict failure") << "\n";
  return rep.allPass() ? 0 : 1;
}

// ---------------------------------------------------------------- helpers

L2Profile loadL2(const std::string& path, const io::SpaceBundle& bundle) {
  return io::l2FromJson(io::parseJsonFile(path), bundle);
}

std::vector<Complex> xiFromFile(const std::string& path, const Space& space) {
  json j = io::parseJsonFile(path);
  if (!j.is_object()) throw SchemaError("/", "expected an object of label: value");
  std::vector<Complex> v(space.size(), Complex(0.0));
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto id = space.find(it.key());
    if (!id) throw SchemaError("/" + it.key(), "unknown point label");
    if (it.value().is_number())
      v[*id] = Complex(it.value().get<double>(), 0.0);
    else if (it.value().is_array() && it.value().size() == 2)
      v[*id] = Complex(it.value()[0].get<double>(), it.value()[1].get<double>());
    else
      throw SchemaError("/" + it.key(), "expected a number or [re, im]");
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite truncations of uniformly locally finite coarse spaces"};
  app.require_subcommand(1);
  std::function<int()> action;

  // ------------------------------------------------------------- space
  auto* sp = app.add_subcommand("space", "build or inspect spaces");
  sp->require_subcommand(1);
  {
    auto spec = std::make_shared<SpaceSpec>();
    auto out = std::make_shared<std::string>();
    auto* build = sp->add_subcommand("build", "construct a space with entourages");
    build->add_option("--space", spec->file, "existing space JSON to re-emit");
    build->add_option("--edges", spec->edges, "edge list file");
    build->add_option("--family", spec->family,
                      "cycle | path | random-regular | group | box");
    build->add_option("--n", spec->n, "point count for cycle/path/graph");
    build->add_option("--degree", spec->degree, "regular graph degree");
    build->add_option("--graph-seed", spec->graph_seed, "pairing model seed");
    build->add_option("--group-family", spec->group_family,
                      "cyclic | dihedral | symmetric");
    build->add_option("--group-n", spec->group_n, "group family parameter");
    build->add_option("--group-file", spec->group_file, "group JSON file");
    build->add_option("--orders", spec->orders, "cyclic orders for box spaces")
        ->delimiter(',');
    build->add_option("--radii", spec->radii, "entourage radii")->delimiter(',');
    build->add_option("--out", *out, "output space JSON")->required();
    build->callback([spec, out, &action] {
      action = [spec, out]() {
        io::SpaceBundle bundle = buildSpace(*spec);
        io::saveSpace(bundle, *out);
        std::cout << "wrote " << *out << " (" << bundle.space->size()
                  << " points, " << bundle.entourages.size()
                  << " entourages)\n";
        return 0;
      };
    });
  }
  {
    auto file = std::make_shared<std::string>();
    auto name = std::make_shared<std::string>();
    auto* show = sp->add_subcommand("show", "summarize a space file");
    show->add_option("--space", *file, "space JSON")->required();
    show->add_option("--entourage", *name, "restrict to one entourage");
    show->callback([file, name, &action] {
      action = [file, name]() {
        io::SpaceBundle b = io::loadSpace(*file);
        std::cout << "points: " << b.space->size() << "\n";
        for (const auto& [n, t] : b.entourages) {
          if (!name->empty() && n != *name) continue;
          std::cout << n << ": pairs=" << t->size()
                    << " deg_fwd=" << t->degree().fwd
                    << " deg_bwd=" << t->degree().bwd
                    << (t->isSymmetric() ? " symmetric" : "")
                    << (t->containsDiagonal() ? " reflexive" : "") << "\n";
        }
        if (!name->empty() && !b.find(*name))
          throw UsageError("unknown entourage '" + *name + "'");
        return 0;
      };
    });
  }

  // ----------------------------------------------------------- witness
  auto* wit = app.add_subcommand("witness", "set witnesses and their conversions");
  wit->require_subcommand(1);
  {
    struct P {
      std::string space, gens, test, out, out_space;
      double eps = 0.0;
      int r_max = 0;
    };
    auto p = std::make_shared<P>();
    auto* make = wit->add_subcommand("make", "search ball witnesses");
    make->add_option("--space", p->space)->required();
    make->add_option("--gens", p->gens, "generating entourage name")->required();
    make->add_option("--test", p->test, "tested entourage name")->required();
    make->add_option("--eps", p->eps)->required();
    make->add_option("--r-max", p->r_max)->required();
    make->add_option("--out", p->out, "witness JSON output")->required();
    make->add_option("--out-space", p->out_space,
                     "augmented space JSON (default <out>.space.json)");
    make->callback([p, &action] {
      action = [p]() {
        io::SpaceBundle b = io::loadSpace(p->space);
        BallWitnessSearch s =
            folnerFromBalls(*b.require(p->gens), *b.require(p->test), p->eps,
                            p->r_max);
        if (!s.witness) {
          std::cout << "no ball witness up to radius " << p->r_max << "\n";
          return 1;
        }
        std::string support_name = "ball_r" + std::to_string(s.radius);
        b.add(support_name, s.witness->support());
        std::string out_space =
            p->out_space.empty() ? p->out + ".space.json" : p->out_space;
        io::saveSpace(b, out_space);
        io::writeTextFile(p->out,
                          io::jsonDump(io::folnerToJson(*s.witness, support_name)));
        std::cout << "found radius " << s.radius << "; wrote " << p->out
                  << " and " << out_space << "\n";
        return 0;
      };
    });
  }
  {
    struct P {
      std::string space, in, to, out, out_space, test, support_name;
      double eps = 0.0;
    };
    auto p = std::make_shared<P>();
    auto* conv = wit->add_subcommand("convert", "convert between witness forms");
    conv->add_option("--space", p->space)->required();
    conv->add_option("--in", p->in, "input witness JSON")->required();
    conv->add_option("--to", p->to, "l1 | l2 | kernel | folner")->required();
    conv->add_option("--out", p->out)->required();
    conv->add_option("--out-space", p->out_space,
                     "augmented space JSON when a new support arises");
    conv->add_option("--test", p->test, "tested entourage (for --to folner)");
    conv->add_option("--support-name", p->support_name,
                     "name for a newly created support relation");
    conv->add_option("--eps", p->eps, "tolerance (kernel->l2, l2->folner)");
    conv->callback([p, &action] {
      action = [p]() {
        io::SpaceBundle b = io::loadSpace(p->space);
        json in = io::parseJsonFile(p->in);
        std::string type = io::witnessTypeOf(in);
        std::string in_support =
            in.contains("support") && in["support"].is_string()
                ? in["support"].get<std::string>()
                : "";
        auto writeWithSpace = [&](const nlohmann::ordered_json& artifact,
                                  bool new_support) {
          if (new_support) {
            std::string out_space =
                p->out_space.empty() ? p->out + ".space.json" : p->out_space;
            io::saveSpace(b, out_space);
            std::cout << "wrote " << out_space << "\n";
          }
          io::writeTextFile(p->out, io::jsonDump(artifact));
          std::cout << "wrote " << p->out << "\n";
        };
        if (type == "folner" && (p->to == "l1" || p->to == "l2")) {
          FolnerWitness w = io::folnerFromJson(in, b);
          ProfilePair pp = folnerToL2(w);
          writeWithSpace(p->to == "l1" ? io::l1ToJson(pp.l1, in_support)
                                       : io::l2ToJson(pp.l2, in_support),
                         false);
          return 0;
        }
        if (type == "l2" && p->to == "kernel") {
          L2Profile prof = io::l2FromJson(in, b);
          KernelMatrix k = l2ToKernel(prof);
          std::string name =
              p->support_name.empty() ? "gram_" + in_support : p->support_name;
          b.add(name, k.support());
          writeWithSpace(io::kernelToJson(k, name), true);
          return 0;
        }
        if (type == "kernel" && p->to == "l2") {
          if (!(p->eps > 0.0))
            throw UsageError("kernel factorization needs --eps > 0");
          KernelMatrix k = io::kernelFromJson(in, b);
          KernelFactorization f = kernelToL2(k, p->eps);
          std::string name = p->support_name.empty() ? "factored_" + in_support
                                                     : p->support_name;
          b.add(name, f.profile.support());
          std::cout << "band_power=" << f.band_power
                    << " residual=" << io::formatDouble(f.residual)
                    << " displacement_bound="
                    << io::formatDouble(f.displacement_bound) << "\n";
          writeWithSpace(io::l2ToJson(f.profile, name), true);
          return 0;
        }
        if (type == "l2" && p->to == "folner") {
          if (!(p->eps > 0.0)) throw UsageError("rounding needs --eps > 0");
          if (p->test.empty()) throw UsageError("rounding needs --test");
          L2Profile prof = io::l2FromJson(in, b);
          FolnerDiscretization d = l2ToFolner(prof, *b.require(p->test), p->eps);
          std::string name = p->support_name.empty() ? "rounded_" + in_support
                                                     : p->support_name;
          b.add(name, d.witness.support());
          std::cout << "grid=" << d.grid
                    << " max_ratio=" << io::formatDouble(d.achieved_ratio)
                    << "\n";
          writeWithSpace(io::folnerToJson(d.witness, name), true);
          return 0;
        }
        throw UsageError("unsupported conversion " + type + " -> " + p->to);
      };
    });
  }
  {
    struct P {
      std::string space, in, test;
      double eps = 0.0;
      bool has_eps = false;
    };
    auto p = std::make_shared<P>();
    auto* verify = wit->add_subcommand("verify", "check a witness on a relation");
    verify->add_option("--space", p->space)->required();
    verify->add_option("--in", p->in)->required();
    verify->add_option("--test", p->test)->required();
    auto* eps_opt = verify->add_option("--eps", p->eps, "threshold");
    verify->callback([p, eps_opt, &action] {
      p->has_eps = eps_opt->count() > 0;
      action = [p]() {
        io::SpaceBundle b = io::loadSpace(p->space);
        json in = io::parseJsonFile(p->in);
        EntouragePtr t = b.require(p->test);
        std::string type = io::witnessTypeOf(in);
        if (type == "folner") {
          if (!p->has_eps) throw UsageError("folner verification needs --eps");
          FolnerWitness w = io::folnerFromJson(in, b);
          FolnerReport r = verifyFolner(w, *t, p->eps);
          std::cout << "max_ratio=" << io::formatDouble(r.max_ratio)
                    << (r.vacuous ? " (vacuous)" : "") << "\n";
          for (const auto& v : r.violations) std::cout << "violation: " << v << "\n";
          std::cout << (r.pass ? "pass" : "fail") << "\n";
          return r.pass ? 0 : 1;
        }
        if (type == "l2") {
          L2Profile prof = io::l2FromJson(in, b);
          L2Quality q = verifyL2(prof, *t);
          std::cout << "displacement=" << io::formatDouble(q.displacement)
                    << (q.vacuous ? " (vacuous)" : "") << "\n";
          if (p->has_eps) {
            bool ok = q.displacement < p->eps;
            std::cout << (ok ? "pass" : "fail") << "\n";
            return ok ? 0 : 1;
          }
          return 0;
        }
        if (type == "kernel") {
          KernelMatrix k = io::kernelFromJson(in, b);
          KernelReport r = verifyKernel(k, *t);
          double tol = 1e-9 * b.space->size() * std::max(1.0, k.maxAbs());
          std::cout << "min_eigenvalue=" << io::formatDouble(r.min_eigenvalue)
                    << " sup_one_minus_k=" << io::formatDouble(r.sup_one_minus_k)
                    << (r.vacuous ? " (vacuous)" : "") << "\n";
          bool psd = r.min_eigenvalue >= -tol;
          bool ok = psd && (!p->has_eps || r.sup_one_minus_k < p->eps);
          if (!psd) std::cout << "kernel is not positive semidefinite\n";
          std::cout << (ok ? "pass" : "fail") << "\n";
          return ok ? 0 : 1;
        }
        throw UsageError("cannot verify witness type '" + type + "'");
      };
    });
  }

  // --------------------------------------------------------------- roe
  auto* roe = app.add_subcommand("roe", "band operators");
  roe->require_subcommand(1);
  {
    struct P {
      std::string space, op, method;
    };
    auto p = std::make_shared<P>();
    auto* norm = roe->add_subcommand("norm", "operator norm and Schur bound");
    norm->add_option("--space", p->space)->required();
    norm->add_option("--op", p->op)->required();
    norm->add_option("--method", p->method, "dense | power");
    norm->callback([p, &action] {
      action = [p]() {
        io::SpaceBundle b = io::loadSpace(p->space);
        BandedOperator a = io::operatorFromJson(io::parseJsonFile(p->op), b);
        std::optional<NormMethod> force;
        if (p->method == "dense") force = NormMethod::kDenseEig;
        else if (p->method == "power") force = NormMethod::kPowerIteration;
        else if (!p->method.empty())
          throw UsageError("unknown method '" + p->method + "'");
        NormReport r = operatorNorm(a, force);
        std::cout << "norm=" << io::formatDouble(r.value)
                  << " method=" << methodName(r.method)
                  << " iterations=" << r.iterations
                  << " schur_bound=" << io::formatDouble(schurBound(a)) << "\n";
        return 0;
      };
    });
  }
  {
    struct P {
      std::string space, op, profile, test;
      double eps = 0.0;
    };
    auto p = std::make_shared<P>();
    auto* defect = roe->add_subcommand("defect", "block-factorization defect");
    defect->add_option("--space", p->space)->required();
    defect->add_option("--op", p->op)->required();
    defect->add_option("--profile", p->profile, "l2 witness JSON")->required();
    defect->add_option("--test", p->test)->required();
    defect->add_option("--eps", p->eps)->required();
    defect->callback([p, &action] {
      action = [p]() {
        io::SpaceBundle b = io::loadSpace(p->space);
        BandedOperator a = io::operatorFromJson(io::parseJsonFile(p->op), b);
        L2Profile prof = loadL2(p->profile, b);
        DefectReport r = nuclearityDefect(a, prof, *b.require(p->test), p->eps);
        std::cout << "defect=" << io::formatDouble(r.defect)
                  << " schur_estimate=" << io::formatDouble(r.schur_estimate)
                  << " eps=" << io::formatDouble(r.epsilon) << "\n";
        return 0;
      };
    });
  }

  // --------------------------------------------------------------- onl
  auto* onl = app.add_subcommand("onl", "operator-norm localization");
  onl->require_subcommand(1);
  {
    struct P {
      std::string space, op, adjacency, out, json_out;
      std::vector<int> windows;
      std::uint64_t seed = 0;
    };
    auto p = std::make_shared<P>();
    auto* prof = onl->add_subcommand("profile", "localization ratios per window");
    prof->add_option("--space", p->space)->required();
    prof->add_option("--op", p->op, "operator JSON");
    prof->add_option("--adjacency", p->adjacency,
                     "use the off-diagonal indicator of this entourage");
    prof->add_option("--windows", p->windows)->required()->delimiter(',');
    prof->add_option("--out", p->out, "CSV output")->required();
    prof->add_option("--json", p->json_out, "JSON report output");
    prof->add_option("--seed", p->seed);
    prof->callback([p, &action] {
      action = [p]() {
        io::SpaceBundle b = io::loadSpace(p->space);
        std::optional<BandedOperator> a;
        std::string op_name;
        EntouragePtr base;
        if (!p->op.empty()) {
          a = io::operatorFromJson(io::parseJsonFile(p->op), b);
          op_name = p->op;
          base = (*a).band();
        } else if (!p->adjacency.empty()) {
          a = adjacencyOperator(b, p->adjacency);
          op_name = "adjacency:" + p->adjacency;
          base = b.require(p->adjacency);
        } else {
          throw UsageError("profile needs --op or --adjacency");
        }
        Report rep = onlProfileReport(b, p->space, *a, op_name, *base,
                                      p->windows, p->seed);
        writeCsv(rep, p->out);
        if (!p->json_out.empty()) writeJson(rep, p->json_out);
        for (const Verdict& v : rep.verdicts)
          if (!v.pass) std::cout << "[FAIL] " << v.name << ": " << v.inequality << "\n";
        std::cout << (rep.allPass() ? "all verdicts pass" : "verdict failure")
                  << "\n";
        return rep.allPass() ? 0 : 1;
      };
    });
  }
  {
    struct P {
      std::string space, op, propagation, window, center, xi_file;
      double kappa = 0.0;
      int n = 0;
    };
    auto p = std::make_shared<P>();
    auto* amp = onl->add_subcommand("amplify", "norm amplification certificate");
    amp->add_option("--space", p->space)->required();
    amp->add_option("--op", p->op)->required();
    amp->add_option("--propagation", p->propagation,
                    "symmetric reflexive entourage containing the band")
        ->required();
    amp->add_option("--window", p->window, "support window entourage")->required();
    amp->add_option("--center", p->center, "start from the delta at this point");
    amp->add_option("--xi-file", p->xi_file, "start vector JSON {label: value}");
    amp->add_option("--kappa", p->kappa)->required();
    amp->add_option("--n", p->n, "amplification exponent")->required();
    amp->callback([p, &action] {
      action = [p]() {
        io::SpaceBundle b = io::loadSpace(p->space);
        BandedOperator a = io::operatorFromJson(io::parseJsonFile(p->op), b);
        std::vector<Complex> xi;
        if (!p->xi_file.empty()) {
          xi = xiFromFile(p->xi_file, *b.space);
        } else if (!p->center.empty()) {
          xi.assign(b.space->size(), Complex(0.0));
          xi[b.space->id(p->center)] = Complex(1.0);
        } else {
          throw UsageError("amplify needs --center or --xi-file");
        }
        BetaCertificate cert = amplify(a, *b.require(p->propagation),
                                       b.require(p->window), xi, p->kappa, p->n);
        std::cout << "ratio=" << io::formatDouble(cert.ratio)
                  << " center=" << b.space->label(cert.center)
                  << " support=" << cert.vector.size()
                  << " window_pairs=" << cert.window->size() << "\n";
        return 0;
      };
    });
  }
  {
    struct P {
      std::string space, band, window;
      int trials = 0;
      std::uint64_t seed = 0;
    };
    auto p = std::make_shared<P>();
    auto* inv = onl->add_subcommand("invnorm",
                                    "inverse-compression norm lower bound");
    inv->add_option("--space", p->space)->required();
    inv->add_option("--band", p->band)->required();
    inv->add_option("--window", p->window)->required();
    inv->add_option("--trials", p->trials)->required();
    inv->add_option("--seed", p->seed);
    inv->callback([p, &action] {
      action = [p]() {
        io::SpaceBundle b = io::loadSpace(p->space);
        InverseNormEstimate e = inverseCompressionNorm(
            b.require(p->band), b.require(p->window), p->trials, p->seed);
        std::cout << "lower_bound=" << io::formatDouble(e.lower_bound)
                  << " samples=" << e.samples << "\n";
        return 0;
      };
    });
  }

  // ----------------------------------------------------------- pipeline
  auto* pipe = app.add_subcommand("pipeline", "scripted verification chains");
  pipe->require_subcommand(1);
  {
    auto cfg = std::make_shared<std::string>();
    auto* run = pipe->add_subcommand("run", "execute a pipeline config");
    run->add_option("--config", *cfg)->required();
    run->callback([cfg, &action] { action = [cfg]() { return runPipeline(*cfg); }; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return action ? action() : 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 3;
  }
}
