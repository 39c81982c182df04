#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "coarse/errors.hpp"

namespace coarse {

class Space;
using SpacePtr = std::shared_ptr<const Space>;

// A finite ground set: an ordered list of distinct opaque labels.
// Points are addressed by dense integer ids (the position in the list).
class Space {
 public:
  explicit Space(std::vector<std::string> labels);

  int size() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(int id) const;
  int id(const std::string& label) const;  // throws UsageError on unknown label
  std::optional<int> find(const std::string& label) const;

  // Same object, or identical label lists.
  bool sameAs(const Space& other) const;

  static SpacePtr make(std::vector<std::string> labels);
  static SpacePtr numbered(int n);  // labels "0".."n-1"

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> index_;
};

using PointPair = std::pair<int, int>;

// Degree data of a relation: fwd = sup_x #T[x], bwd = sup_x #T^{-1}[x].
// Finiteness is automatic here; these are the quantitative bounds that the
// estimates consume.
struct DegreeBound {
  int fwd = 0;
  int bwd = 0;
  int max() const { return fwd > bwd ? fwd : bwd; }
};

class Entourage;
using EntouragePtr = std::shared_ptr<const Entourage>;

// A relation T on a Space, stored as a sorted, deduplicated pair list.
// Convention used throughout: the ball T[x] is {z : (z, x) in T}, i.e. the
// set of first coordinates paired with x. Operators banded by T then have
// column supports supp(b delta_x) inside T[x], and balls compose as
// (T1 o T2)[Y] = T1[T2[Y]].
class Entourage {
 public:
  Entourage(SpacePtr space, std::vector<PointPair> pairs);

  const SpacePtr& space() const { return space_; }
  const std::vector<PointPair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }

  std::span<const int> ball(int x) const;         // T[x]
  std::span<const int> inverseBall(int x) const;  // T^{-1}[x]
  bool contains(int x, int y) const;
  // Index of (x, y) in pairs(), if present.
  std::optional<std::size_t> pairIndex(int x, int y) const;
  // pairs() index of the k-th entry of the concatenated ball lists
  // (balls are stored grouped by the second coordinate).
  std::size_t ballEntryPairIndex(std::size_t k) const { return ball_pair_index_[k]; }
  std::size_t ballOffset(int x) const { return ball_offsets_[x]; }
  // Inverse balls are grouped by first coordinate, matching pair order: the
  // j-th entry of inverseBall(x) corresponds to pairs()[inverseBallOffset(x)+j].
  std::size_t inverseBallOffset(int x) const { return inv_ball_offsets_[x]; }

  const DegreeBound& degree() const { return degree_; }
  bool containsDiagonal() const;
  bool isSymmetric() const;
  bool subsetOf(const Entourage& other) const;
  bool samePairs(const Entourage& other) const;

 private:
  SpacePtr space_;
  std::vector<PointPair> pairs_;  // sorted by (first, second)
  // Balls grouped by second coordinate; entries ascending.
  std::vector<int> ball_data_;
  std::vector<std::size_t> ball_offsets_;
  std::vector<std::size_t> ball_pair_index_;
  // Inverse balls grouped by first coordinate. Grouping by first coordinate
  // coincides with pair order, so entry k corresponds to pairs()[k].
  std::vector<int> inv_ball_data_;
  std::vector<std::size_t> inv_ball_offsets_;
  DegreeBound degree_;
};

EntouragePtr makeEntourage(SpacePtr space, std::vector<PointPair> pairs);
EntouragePtr diagonal(const SpacePtr& space);
EntouragePtr fullRelation(const SpacePtr& space);
EntouragePtr emptyRelation(const SpacePtr& space);

// {(x, y) : exists z with (x, z) in t1 and (z, y) in t2}
EntouragePtr compose(const Entourage& t1, const Entourage& t2);
EntouragePtr inverse(const Entourage& t);
EntouragePtr unite(const Entourage& t1, const Entourage& t2);
// n-fold composition; n = 0 yields the diagonal.
EntouragePtr power(const Entourage& t, int n);
// Diagonal ∪ T ∪ T^{-1}: the smallest symmetric reflexive relation over T.
EntouragePtr symmetrize(const Entourage& t);

// T[Y] for a set of points (ids or labels); result sorted, deduplicated.
std::vector<int> ballOf(const Entourage& t, std::span<const int> ys);
std::vector<int> ballOfLabels(const Entourage& t,
                              std::span<const std::string> ys);

// Smallest id x with Y ⊆ T[x], if any (the certificate that Y is
// T-bounded). The empty set is bounded by the smallest point.
std::optional<int> boundedWitness(const Entourage& t, std::span<const int> ys);

}  // namespace coarse
