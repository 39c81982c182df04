#include "coarse/gallery.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace coarse {

FiniteGroup::FiniteGroup(std::vector<std::string> elements,
                         std::vector<std::vector<int>> table,
                         std::vector<int> generators)
    : elements_(std::move(elements)),
      table_(std::move(table)),
      generators_(std::move(generators)) {
  const int n = static_cast<int>(elements_.size());
  if (n == 0) throw UsageError("group must have at least one element");
  if (static_cast<int>(table_.size()) != n)
    throw UsageError("multiplication table must have one row per element");
  for (const auto& row : table_) {
    if (static_cast<int>(row.size()) != n)
      throw UsageError("multiplication table row of wrong length");
    for (int v : row)
      if (v < 0 || v >= n)
        throw UsageError("multiplication table entry out of range");
  }
  for (int e = 0; e < n; ++e) {
    bool ok = true;
    for (int x = 0; x < n && ok; ++x)
      ok = table_[e][x] == x && table_[x][e] == x;
    if (ok) {
      identity_ = e;
      break;
    }
  }
  if (identity_ < 0) throw UsageError("multiplication table has no identity");
  inverse_.assign(n, -1);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (table_[a][b] == identity_ && table_[b][a] == identity_) {
        inverse_[a] = b;
        break;
      }
    }
    if (inverse_[a] < 0)
      throw UsageError("element '" + elements_[a] + "' has no inverse");
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        if (table_[table_[a][b]][c] != table_[a][table_[b][c]])
          throw UsageError("multiplication table is not associative");
  for (int g : generators_)
    if (g < 0 || g >= n) throw UsageError("generator id out of range");
}

int FiniteGroup::mul(int a, int b) const {
  if (a < 0 || a >= order() || b < 0 || b >= order())
    throw UsageError("group element id out of range");
  return table_[a][b];
}

FiniteGroup FiniteGroup::cyclic(int n) {
  if (n < 1) throw UsageError("cyclic group order must be positive");
  std::vector<std::string> elements;
  std::vector<std::vector<int>> table(n, std::vector<int>(n));
  for (int i = 0; i < n; ++i) {
    elements.push_back(std::to_string(i));
    for (int j = 0; j < n; ++j) table[i][j] = (i + j) % n;
  }
  std::vector<int> gens = n > 1 ? std::vector<int>{1} : std::vector<int>{0};
  return FiniteGroup(std::move(elements), std::move(table), std::move(gens));
}

FiniteGroup FiniteGroup::dihedral(int n) {
  if (n < 1) throw UsageError("dihedral parameter must be positive");
  // Element (f, r) = s^f rho^r with s rho s = rho^{-1}; id = f*n + r.
  const int order = 2 * n;
  std::vector<std::string> elements(order);
  std::vector<std::vector<int>> table(order, std::vector<int>(order));
  for (int f = 0; f < 2; ++f)
    for (int r = 0; r < n; ++r)
      elements[f * n + r] = (f ? "sr" : "r") + std::to_string(r);
  for (int f1 = 0; f1 < 2; ++f1)
    for (int r1 = 0; r1 < n; ++r1)
      for (int f2 = 0; f2 < 2; ++f2)
        for (int r2 = 0; r2 < n; ++r2) {
          int f = f1 ^ f2;
          int r = ((f2 ? n - r1 : r1) + r2) % n;
          table[f1 * n + r1][f2 * n + r2] = f * n + r;
        }
  std::vector<int> gens;
  if (n > 1) gens.push_back(1);  // rho
  gens.push_back(n);             // s
  return FiniteGroup(std::move(elements), std::move(table), std::move(gens));
}

FiniteGroup FiniteGroup::symmetric(int k) {
  if (k < 1 || k > 5)
    throw UsageError("symmetric group supported for 1 <= k <= 5");
  std::vector<std::vector<int>> perms;
  std::vector<int> p(k);
  std::iota(p.begin(), p.end(), 0);
  do {
    perms.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  std::map<std::vector<int>, int> rank;
  std::vector<std::string> elements;
  for (int i = 0; i < static_cast<int>(perms.size()); ++i) {
    rank[perms[i]] = i;
    std::string label;
    for (int v : perms[i]) label += static_cast<char>('0' + v);
    elements.push_back(label);
  }
  const int order = static_cast<int>(perms.size());
  std::vector<std::vector<int>> table(order, std::vector<int>(order));
  std::vector<int> comp(k);
  for (int a = 0; a < order; ++a)
    for (int b = 0; b < order; ++b) {
      for (int i = 0; i < k; ++i) comp[i] = perms[a][perms[b][i]];
      table[a][b] = rank.at(comp);
    }
  std::vector<int> gens;
  if (k == 1) {
    gens.push_back(0);
  } else {
    std::vector<int> swap01(k), cycle(k);
    std::iota(swap01.begin(), swap01.end(), 0);
    std::swap(swap01[0], swap01[1]);
    for (int i = 0; i < k; ++i) cycle[i] = (i + 1) % k;
    gens.push_back(rank.at(swap01));
    if (cycle != swap01) gens.push_back(rank.at(cycle));
  }
  return FiniteGroup(std::move(elements), std::move(table), std::move(gens));
}

MetricTable::MetricTable(std::vector<std::vector<double>> dist,
                         std::vector<std::string> labels)
    : dist_(std::move(dist)), labels_(std::move(labels)) {
  const int n = static_cast<int>(dist_.size());
  for (const auto& row : dist_)
    if (static_cast<int>(row.size()) != n)
      throw UsageError("distance matrix must be square");
  if (!labels_.empty() && static_cast<int>(labels_.size()) != n)
    throw UsageError("distance matrix label count mismatch");
  constexpr double kSlack = 1e-12;
  for (int i = 0; i < n; ++i) {
    if (dist_[i][i] != 0.0)
      throw UsageError("distance matrix diagonal must be zero");
    for (int j = 0; j < n; ++j) {
      if (!(dist_[i][j] >= 0.0))
        throw UsageError("distances must be nonnegative");
      if (std::abs(dist_[i][j] - dist_[j][i]) > kSlack)
        throw UsageError("distance matrix must be symmetric");
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (dist_[i][j] > dist_[i][k] + dist_[k][j] + kSlack)
          throw UsageError(
              "triangle inequality fails at (" + std::to_string(i) + "," +
              std::to_string(j) + "," + std::to_string(k) + ")");
}

MetricTable MetricTable::cycleGraph(int n) {
  if (n < 1) throw UsageError("cycle size must be positive");
  std::vector<std::vector<double>> d(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      int a = std::abs(i - j);
      d[i][j] = std::min(a, n - a);
    }
  return MetricTable(std::move(d));
}

MetricTable MetricTable::pathGraph(int n) {
  if (n < 1) throw UsageError("path size must be positive");
  std::vector<std::vector<double>> d(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) d[i][j] = std::abs(i - j);
  return MetricTable(std::move(d));
}

SpaceWithEntourage metricSpace(const MetricTable& m, double threshold) {
  if (!(threshold >= 0.0))
    throw UsageError("metric entourage threshold must be nonnegative");
  SpacePtr space = m.labels().empty() ? Space::numbered(m.size())
                                      : Space::make(m.labels());
  std::vector<PointPair> pairs;
  for (int i = 0; i < m.size(); ++i)
    for (int j = 0; j < m.size(); ++j)
      if (m.dist(i, j) <= threshold) pairs.push_back({i, j});
  return {space, makeEntourage(space, std::move(pairs))};
}

SpacePtr groupAsSpace(const FiniteGroup& g) {
  return Space::make(g.elements());
}

void validateAction(const FiniteGroup& g,
                    const std::vector<std::vector<int>>& action, int points) {
  if (static_cast<int>(action.size()) != g.order())
    throw UsageError("action table must have one row per group element");
  for (const auto& row : action) {
    if (static_cast<int>(row.size()) != points)
      throw UsageError("action table row of wrong length");
    for (int v : row)
      if (v < 0 || v >= points)
        throw UsageError("action table entry out of range");
  }
  for (int x = 0; x < points; ++x)
    if (action[g.identity()][x] != x)
      throw UsageError("identity must act trivially");
  for (int a = 0; a < g.order(); ++a)
    for (int b = 0; b < g.order(); ++b)
      for (int x = 0; x < points; ++x)
        if (action[a][action[b][x]] != action[g.mul(a, b)][x])
          throw UsageError("table is not a group action");
}

EntouragePtr groupActionEntourage(const FiniteGroup& g, const SpacePtr& space,
                                  const std::vector<std::vector<int>>& action,
                                  std::span<const int> k) {
  validateAction(g, action, space->size());
  std::vector<PointPair> pairs;
  for (int el : k) {
    if (el < 0 || el >= g.order())
      throw UsageError("orbit set contains an unknown element id");
    for (int x = 0; x < space->size(); ++x) pairs.push_back({action[el][x], x});
  }
  return makeEntourage(space, std::move(pairs));
}

std::vector<std::vector<int>> leftTranslationAction(const FiniteGroup& g) {
  std::vector<std::vector<int>> action(g.order(), std::vector<int>(g.order()));
  for (int a = 0; a < g.order(); ++a)
    for (int x = 0; x < g.order(); ++x) action[a][x] = g.mul(a, x);
  return action;
}

std::int64_t freeBallSize(int k, int r) {
  if (k < 1 || r < 0) throw UsageError("freeBallSize requires k >= 1, r >= 0");
  if (k == 1) return 2 * static_cast<std::int64_t>(r) + 1;
  std::int64_t count = 1, layer = 2 * k;
  for (int i = 1; i <= r; ++i) {
    count += layer;
    if (layer > (1LL << 40)) throw UsageError("word radius too large");
    layer *= (2 * k - 1);
  }
  return count;
}

SpaceWithEntourage boxSpace(const std::vector<FiniteGroup>& seq, int radius) {
  if (seq.empty()) throw UsageError("box space needs at least one group");
  if (radius < 0) throw UsageError("box space radius must be nonnegative");
  const int k = static_cast<int>(seq.front().generators().size());
  if (k < 1) throw UsageError("box space groups need at least one generator");
  for (const auto& g : seq)
    if (static_cast<int>(g.generators().size()) != k)
      throw UsageError("box space groups must share the generator count");
  if (freeBallSize(k, radius) > 2'000'000)
    throw UsageError("box space word ball too large");

  const int comps = static_cast<int>(seq.size());
  std::vector<int> offset(comps + 1, 0);
  std::vector<std::string> labels;
  for (int m = 0; m < comps; ++m) {
    offset[m + 1] = offset[m] + seq[m].order();
    for (const auto& el : seq[m].elements())
      labels.push_back(std::to_string(m) + ":" + el);
  }
  SpacePtr space = Space::make(std::move(labels));

  // Letters 0..k-1 are the generators, k..2k-1 their inverses; a reduced
  // word never follows a letter with its partner.
  auto partner = [k](int letter) { return letter < k ? letter + k : letter - k; };
  std::vector<std::vector<int>> letterImage(comps,
                                            std::vector<int>(2 * k));
  for (int m = 0; m < comps; ++m)
    for (int j = 0; j < k; ++j) {
      int g = seq[m].generators()[j];
      letterImage[m][j] = g;
      letterImage[m][k + j] = seq[m].inverse(g);
    }

  // Per component, mark every image of a reduced word of length <= radius.
  std::vector<std::vector<char>> reached(comps);
  for (int m = 0; m < comps; ++m) {
    reached[m].assign(seq[m].order(), 0);
    reached[m][seq[m].identity()] = 1;
  }
  struct WordState {
    int last_letter;
    std::vector<int> image;  // per component
  };
  std::vector<WordState> frontier;
  {
    WordState root;
    root.last_letter = -1;
    root.image.resize(comps);
    for (int m = 0; m < comps; ++m) root.image[m] = seq[m].identity();
    frontier.push_back(std::move(root));
  }
  for (int len = 1; len <= radius; ++len) {
    std::vector<WordState> next;
    for (const auto& w : frontier)
      for (int letter = 0; letter < 2 * k; ++letter) {
        if (w.last_letter >= 0 && letter == partner(w.last_letter)) continue;
        WordState ext;
        ext.last_letter = letter;
        ext.image.resize(comps);
        for (int m = 0; m < comps; ++m) {
          ext.image[m] = seq[m].mul(w.image[m], letterImage[m][letter]);
          reached[m][ext.image[m]] = 1;
        }
        next.push_back(std::move(ext));
      }
    frontier = std::move(next);
  }

  std::vector<PointPair> pairs;
  for (int m = 0; m < comps; ++m)
    for (int h = 0; h < seq[m].order(); ++h) {
      if (!reached[m][h]) continue;
      for (int g = 0; g < seq[m].order(); ++g)
        pairs.push_back({offset[m] + seq[m].mul(h, g), offset[m] + g});
    }
  return {space, makeEntourage(space, std::move(pairs))};
}

namespace {
// Unbiased bounded draw with a fixed, implementation-independent sequence.
std::uint64_t boundedDraw(std::mt19937_64& rng, std::uint64_t m) {
  std::uint64_t limit = (0 - m) % m;  // 2^64 mod m
  for (;;) {
    std::uint64_t r = rng();
    if (r >= limit) return r % m;
  }
}
}  // namespace

SpaceWithEntourage randomRegularGraph(int n, int d, std::uint64_t seed) {
  if (n < 1) throw UsageError("graph needs at least one vertex");
  if (d < 0 || d >= n) throw UsageError("degree must satisfy 0 <= d < n");
  if ((static_cast<std::int64_t>(n) * d) % 2 != 0)
    throw UsageError("n*d must be even for a d-regular graph");
  SpacePtr space = Space::numbered(n);
  std::vector<PointPair> pairs;
  for (int x = 0; x < n; ++x) pairs.push_back({x, x});
  if (d == 0) return {space, makeEntourage(space, std::move(pairs))};

  std::mt19937_64 rng(seed);
  const std::size_t stubs_n = static_cast<std::size_t>(n) * d;
  std::vector<int> stubs(stubs_n);
  std::vector<PointPair> edges;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    for (std::size_t i = 0; i < stubs_n; ++i)
      stubs[i] = static_cast<int>(i / d);
    for (std::size_t i = stubs_n - 1; i > 0; --i)
      std::swap(stubs[i], stubs[boundedDraw(rng, i + 1)]);
    edges.clear();
    bool ok = true;
    for (std::size_t i = 0; i + 1 < stubs_n; i += 2) {
      int u = stubs[i], v = stubs[i + 1];
      if (u == v) {
        ok = false;
        break;
      }
      edges.push_back({std::min(u, v), std::max(u, v)});
    }
    if (!ok) continue;
    std::sort(edges.begin(), edges.end());
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
      continue;
    for (const auto& [u, v] : edges) {
      pairs.push_back({u, v});
      pairs.push_back({v, u});
    }
    return {space, makeEntourage(space, std::move(pairs))};
  }
  throw NumericalError("pairing model failed to produce a simple graph after 10000 attempts");
}

}  // namespace coarse
