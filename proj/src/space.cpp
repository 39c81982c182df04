#include "coarse/space.hpp"

#include <algorithm>

namespace coarse {

Space::Space(std::vector<std::string> labels) : labels_(std::move(labels)) {
  index_.reserve(labels_.size());
  for (int i = 0; i < static_cast<int>(labels_.size()); ++i) {
    auto [it, inserted] = index_.emplace(labels_[i], i);
    (void)it;
    if (!inserted)
      throw UsageError("duplicate point label '" + labels_[i] + "'");
  }
}

const std::string& Space::label(int id) const {
  if (id < 0 || id >= size())
    throw UsageError("point id " + std::to_string(id) + " out of range");
  return labels_[id];
}

int Space::id(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) throw UsageError("unknown point label '" + label + "'");
  return it->second;
}

std::optional<int> Space::find(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool Space::sameAs(const Space& other) const {
  return this == &other || labels_ == other.labels_;
}

SpacePtr Space::make(std::vector<std::string> labels) {
  return std::make_shared<const Space>(std::move(labels));
}

SpacePtr Space::numbered(int n) {
  if (n < 0) throw UsageError("space size must be nonnegative");
  std::vector<std::string> labels;
  labels.reserve(n);
  for (int i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  return make(std::move(labels));
}

Entourage::Entourage(SpacePtr space, std::vector<PointPair> pairs)
    : space_(std::move(space)), pairs_(std::move(pairs)) {
  if (!space_) throw UsageError("entourage requires a space");
  const int n = space_->size();
  for (const auto& [x, y] : pairs_) {
    if (x < 0 || x >= n || y < 0 || y >= n)
      throw UsageError("entourage pair (" + std::to_string(x) + "," +
                       std::to_string(y) + ") out of range for a space of " +
                       std::to_string(n) + " points");
  }
  std::sort(pairs_.begin(), pairs_.end());
  pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());

  // Inverse balls grouped by first coordinate: this is exactly pair order.
  inv_ball_offsets_.assign(n + 1, 0);
  inv_ball_data_.resize(pairs_.size());
  for (std::size_t k = 0; k < pairs_.size(); ++k) {
    ++inv_ball_offsets_[pairs_[k].first + 1];
    inv_ball_data_[k] = pairs_[k].second;
  }
  for (int x = 0; x < n; ++x) inv_ball_offsets_[x + 1] += inv_ball_offsets_[x];

  // Balls grouped by second coordinate via a counting pass; stability of the
  // pass keeps each ball sorted ascending.
  ball_offsets_.assign(n + 1, 0);
  for (const auto& p : pairs_) ++ball_offsets_[p.second + 1];
  for (int x = 0; x < n; ++x) ball_offsets_[x + 1] += ball_offsets_[x];
  ball_data_.resize(pairs_.size());
  ball_pair_index_.resize(pairs_.size());
  {
    std::vector<std::size_t> cursor(ball_offsets_.begin(), ball_offsets_.end() - 1);
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      std::size_t slot = cursor[pairs_[k].second]++;
      ball_data_[slot] = pairs_[k].first;
      ball_pair_index_[slot] = k;
    }
  }

  for (int x = 0; x < n; ++x) {
    int fwd = static_cast<int>(ball_offsets_[x + 1] - ball_offsets_[x]);
    int bwd = static_cast<int>(inv_ball_offsets_[x + 1] - inv_ball_offsets_[x]);
    degree_.fwd = std::max(degree_.fwd, fwd);
    degree_.bwd = std::max(degree_.bwd, bwd);
  }
}

std::span<const int> Entourage::ball(int x) const {
  if (x < 0 || x >= space_->size())
    throw UsageError("ball center " + std::to_string(x) + " out of range");
  return {ball_data_.data() + ball_offsets_[x],
          ball_offsets_[x + 1] - ball_offsets_[x]};
}

std::span<const int> Entourage::inverseBall(int x) const {
  if (x < 0 || x >= space_->size())
    throw UsageError("ball center " + std::to_string(x) + " out of range");
  return {inv_ball_data_.data() + inv_ball_offsets_[x],
          inv_ball_offsets_[x + 1] - inv_ball_offsets_[x]};
}

bool Entourage::contains(int x, int y) const {
  return std::binary_search(pairs_.begin(), pairs_.end(), PointPair{x, y});
}

std::optional<std::size_t> Entourage::pairIndex(int x, int y) const {
  auto it = std::lower_bound(pairs_.begin(), pairs_.end(), PointPair{x, y});
  if (it == pairs_.end() || *it != PointPair{x, y}) return std::nullopt;
  return static_cast<std::size_t>(it - pairs_.begin());
}

bool Entourage::containsDiagonal() const {
  for (int x = 0; x < space_->size(); ++x)
    if (!contains(x, x)) return false;
  return true;
}

bool Entourage::isSymmetric() const {
  for (const auto& [x, y] : pairs_)
    if (!contains(y, x)) return false;
  return true;
}

bool Entourage::subsetOf(const Entourage& other) const {
  if (!space_->sameAs(*other.space_)) return false;
  return std::includes(other.pairs_.begin(), other.pairs_.end(),
                       pairs_.begin(), pairs_.end());
}

bool Entourage::samePairs(const Entourage& other) const {
  return space_->sameAs(*other.space_) && pairs_ == other.pairs_;
}

EntouragePtr makeEntourage(SpacePtr space, std::vector<PointPair> pairs) {
  return std::make_shared<const Entourage>(std::move(space), std::move(pairs));
}

EntouragePtr diagonal(const SpacePtr& space) {
  std::vector<PointPair> pairs;
  pairs.reserve(space->size());
  for (int x = 0; x < space->size(); ++x) pairs.push_back({x, x});
  return makeEntourage(space, std::move(pairs));
}

EntouragePtr fullRelation(const SpacePtr& space) {
  std::vector<PointPair> pairs;
  pairs.reserve(static_cast<std::size_t>(space->size()) * space->size());
  for (int x = 0; x < space->size(); ++x)
    for (int y = 0; y < space->size(); ++y) pairs.push_back({x, y});
  return makeEntourage(space, std::move(pairs));
}

EntouragePtr emptyRelation(const SpacePtr& space) {
  return makeEntourage(space, {});
}

namespace {
void requireSameSpace(const Entourage& a, const Entourage& b,
                      const char* what) {
  if (!a.space()->sameAs(*b.space()))
    throw UsageError(std::string(what) + " requires entourages over the same space");
}
}  // namespace

EntouragePtr compose(const Entourage& t1, const Entourage& t2) {
  requireSameSpace(t1, t2, "compose");
  std::vector<PointPair> out;
  const int n = t1.space()->size();
  for (int z = 0; z < n; ++z) {
    auto xs = t1.ball(z);          // (x, z) in t1
    auto ys = t2.inverseBall(z);   // (z, y) in t2
    for (int x : xs)
      for (int y : ys) out.push_back({x, y});
  }
  return makeEntourage(t1.space(), std::move(out));
}

EntouragePtr inverse(const Entourage& t) {
  std::vector<PointPair> out;
  out.reserve(t.size());
  for (const auto& [x, y] : t.pairs()) out.push_back({y, x});
  return makeEntourage(t.space(), std::move(out));
}

EntouragePtr unite(const Entourage& t1, const Entourage& t2) {
  requireSameSpace(t1, t2, "union");
  std::vector<PointPair> out;
  out.reserve(t1.size() + t2.size());
  std::merge(t1.pairs().begin(), t1.pairs().end(), t2.pairs().begin(),
             t2.pairs().end(), std::back_inserter(out));
  return makeEntourage(t1.space(), std::move(out));
}

EntouragePtr power(const Entourage& t, int n) {
  if (n < 0) throw UsageError("relation power must be nonnegative");
  EntouragePtr acc = diagonal(t.space());
  for (int i = 0; i < n; ++i) acc = compose(*acc, t);
  return acc;
}

EntouragePtr symmetrize(const Entourage& t) {
  return unite(*unite(*diagonal(t.space()), t), *inverse(t));
}

std::vector<int> ballOf(const Entourage& t, std::span<const int> ys) {
  const int n = t.space()->size();
  std::vector<char> seen(n, 0);
  for (int y : ys) {
    if (y < 0 || y >= n)
      throw UsageError("ball argument " + std::to_string(y) + " out of range");
    for (int x : t.ball(y)) seen[x] = 1;
  }
  std::vector<int> out;
  for (int x = 0; x < n; ++x)
    if (seen[x]) out.push_back(x);
  return out;
}

std::vector<int> ballOfLabels(const Entourage& t,
                              std::span<const std::string> ys) {
  std::vector<int> ids;
  ids.reserve(ys.size());
  for (const auto& label : ys) ids.push_back(t.space()->id(label));
  return ballOf(t, ids);
}

std::optional<int> boundedWitness(const Entourage& t, std::span<const int> ys) {
  const int n = t.space()->size();
  std::vector<int> want(ys.begin(), ys.end());
  for (int y : want)
    if (y < 0 || y >= n)
      throw UsageError("bounded-set point " + std::to_string(y) + " out of range");
  std::sort(want.begin(), want.end());
  want.erase(std::unique(want.begin(), want.end()), want.end());
  for (int x = 0; x < n; ++x) {
    auto b = t.ball(x);
    if (std::includes(b.begin(), b.end(), want.begin(), want.end())) return x;
  }
  return std::nullopt;
}

}  // namespace coarse
