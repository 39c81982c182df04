#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "coarse/space.hpp"

namespace coarse {

// A finite group given by its complete multiplication table.
// table[a][b] is the id of a*b. Validation: closure, identity, inverses,
// associativity, generator ids in range.
class FiniteGroup {
 public:
  FiniteGroup(std::vector<std::string> elements,
              std::vector<std::vector<int>> table,
              std::vector<int> generators);

  int order() const { return static_cast<int>(elements_.size()); }
  const std::vector<std::string>& elements() const { return elements_; }
  int mul(int a, int b) const;
  int inverse(int a) const { return inverse_[a]; }
  int identity() const { return identity_; }
  const std::vector<int>& generators() const { return generators_; }
  const std::vector<std::vector<int>>& table() const { return table_; }

  static FiniteGroup cyclic(int n);
  static FiniteGroup dihedral(int n);   // order 2n, n >= 1
  static FiniteGroup symmetric(int k);  // 1 <= k <= 5

 private:
  std::vector<std::string> elements_;
  std::vector<std::vector<int>> table_;
  std::vector<int> generators_;
  std::vector<int> inverse_;
  int identity_ = -1;
};

// Symmetric distance matrix with zero diagonal; the triangle inequality is
// checked on construction (allowing a 1e-12 slack for rounded data).
class MetricTable {
 public:
  explicit MetricTable(std::vector<std::vector<double>> dist,
                       std::vector<std::string> labels = {});

  int size() const { return static_cast<int>(dist_.size()); }
  double dist(int i, int j) const { return dist_[i][j]; }
  const std::vector<std::string>& labels() const { return labels_; }

  static MetricTable cycleGraph(int n);  // graph metric of the n-cycle
  static MetricTable pathGraph(int n);   // graph metric of the n-path

 private:
  std::vector<std::vector<double>> dist_;
  std::vector<std::string> labels_;
};

struct SpaceWithEntourage {
  SpacePtr space;
  EntouragePtr entourage;
};

// E_S = {(x, y) : d(x, y) <= threshold}. Contains the diagonal and is
// symmetric for every threshold >= 0.
SpaceWithEntourage metricSpace(const MetricTable& m, double threshold);

// The group as a space: one point per element.
SpacePtr groupAsSpace(const FiniteGroup& g);

// action[g][x] = g·x. Checked: identity acts trivially and
// g·(h·x) = (gh)·x for all g, h, x.
void validateAction(const FiniteGroup& g,
                    const std::vector<std::vector<int>>& action, int points);

// Orbit entourage T_K = {(k·x, x) : k in K, x in X} of a validated action.
EntouragePtr groupActionEntourage(const FiniteGroup& g, const SpacePtr& space,
                                  const std::vector<std::vector<int>>& action,
                                  std::span<const int> k);

// Left translation action of the group on itself.
std::vector<std::vector<int>> leftTranslationAction(const FiniteGroup& g);

// Disjoint union of finite quotients of a common free group on k letters:
// every group must list exactly k generators. Points "m:label". The radius-r
// entourage relates g to w·g inside each component, where w runs over images
// of freely reduced words of length <= radius.
SpaceWithEntourage boxSpace(const std::vector<FiniteGroup>& seq, int radius);

// Number of freely reduced words of length <= r over k letters:
// 1 + 2k * ((2k-1)^r - 1) / (2k-2) for k >= 2, 2r + 1 for k = 1.
std::int64_t freeBallSize(int k, int r);

// Simple d-regular graph on n vertices sampled by the pairing model with a
// deterministic generator: resample on loops or doubled edges, up to 10000
// attempts. Entourage = diagonal ∪ edge relation (both directions).
SpaceWithEntourage randomRegularGraph(int n, int d, std::uint64_t seed);

}  // namespace coarse
