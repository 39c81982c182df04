#include "coarse/witness.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace coarse {

namespace {

constexpr int kDenseLimit = 4096;

template <typename T>
const T* rowFind(const std::vector<std::pair<int, T>>& row, int y) {
  auto it = std::lower_bound(
      row.begin(), row.end(), y,
      [](const std::pair<int, T>& e, int key) { return e.first < key; });
  if (it == row.end() || it->first != y) return nullptr;
  return &it->second;
}

template <typename T>
void validateRow(const std::vector<std::pair<int, T>>& row, int x,
                 const Entourage& support) {
  int prev = -1;
  for (const auto& [y, v] : row) {
    (void)v;
    if (y <= prev) throw UsageError("sparse row must be strictly increasing");
    prev = y;
    if (y < 0 || y >= support.space()->size())
      throw UsageError("sparse row id out of range");
    if (!support.contains(x, y))
      throw UsageError("entry (" + support.space()->label(x) + ", " +
                       support.space()->label(y) +
                       ") lies outside the tracked support relation");
  }
}

std::string pairLabel(const Space& s, int x, int y) {
  return "(" + s.label(x) + ", " + s.label(y) + ")";
}

}  // namespace

FolnerWitness::FolnerWitness(EntouragePtr support,
                             SparseRows<std::int64_t> counts,
                             std::int64_t max_index, FolnerVariant variant)
    : support_(std::move(support)),
      counts_(std::move(counts)),
      max_index_(max_index),
      variant_(variant) {
  if (!support_) throw UsageError("witness requires a support relation");
  const int n = support_->space()->size();
  if (static_cast<int>(counts_.size()) != n)
    throw UsageError("witness needs one section per point");
  std::int64_t biggest = 0;
  for (int x = 0; x < n; ++x) {
    validateRow(counts_[x], x, *support_);
    for (const auto& [y, c] : counts_[x]) {
      (void)y;
      if (c <= 0) throw UsageError("section counts must be positive");
      biggest = std::max(biggest, c);
    }
  }
  max_index_ = std::max(max_index_, biggest);
}

std::int64_t FolnerWitness::count(int x, int y) const {
  const std::int64_t* v = rowFind(counts_[x], y);
  return v ? *v : 0;
}

std::int64_t FolnerWitness::sectionSize(int x) const {
  std::int64_t total = 0;
  for (const auto& [y, c] : counts_[x]) {
    (void)y;
    total += c;
  }
  return total;
}

L1Profile::L1Profile(EntouragePtr support, SparseRows<double> rows)
    : support_(std::move(support)), rows_(std::move(rows)) {
  if (!support_) throw UsageError("profile requires a support relation");
  const int n = support_->space()->size();
  if (static_cast<int>(rows_.size()) != n)
    throw UsageError("profile needs one row per point");
  for (int x = 0; x < n; ++x) {
    validateRow(rows_[x], x, *support_);
    double sum = 0.0;
    for (const auto& [y, v] : rows_[x]) {
      (void)y;
      if (!(v >= 0.0) || !std::isfinite(v))
        throw UsageError("l1 rows must be nonnegative and finite");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw UsageError("l1 row at " + support_->space()->label(x) +
                       " is not normalized");
  }
}

double L1Profile::value(int x, int y) const {
  const double* v = rowFind(rows_[x], y);
  return v ? *v : 0.0;
}

double L1Profile::rowSum(int x) const {
  double s = 0.0;
  for (const auto& [y, v] : rows_[x]) {
    (void)y;
    s += v;
  }
  return s;
}

double L1Profile::l1Distance(int x, int y) const {
  const auto& a = rows_[x];
  const auto& b = rows_[y];
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j >= b.size() || (i < a.size() && a[i].first < b[j].first))
      d += std::abs(a[i++].second);
    else if (i >= a.size() || b[j].first < a[i].first)
      d += std::abs(b[j++].second);
    else {
      d += std::abs(a[i].second - b[j].second);
      ++i, ++j;
    }
  }
  return d;
}

L2Profile::L2Profile(EntouragePtr support, SparseRows<Complex> vectors)
    : support_(std::move(support)), vectors_(std::move(vectors)) {
  if (!support_) throw UsageError("profile requires a support relation");
  const int n = support_->space()->size();
  if (static_cast<int>(vectors_.size()) != n)
    throw UsageError("profile needs one vector per point");
  for (int x = 0; x < n; ++x) {
    validateRow(vectors_[x], x, *support_);
    bool nonzero = false;
    for (const auto& [y, v] : vectors_[x]) {
      (void)y;
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw UsageError("l2 entries must be finite");
      if (v != Complex(0.0)) nonzero = true;
    }
    if (!nonzero)
      throw UsageError("l2 vector at " + support_->space()->label(x) +
                       " is zero");
  }
}

Complex L2Profile::value(int x, int y) const {
  const Complex* v = rowFind(vectors_[x], y);
  return v ? *v : Complex(0.0);
}

double L2Profile::norm(int x) const {
  double s = 0.0;
  for (const auto& [y, v] : vectors_[x]) {
    (void)y;
    s += std::norm(v);
  }
  return std::sqrt(s);
}

double L2Profile::displacement(int x, int y) const {
  const auto& a = vectors_[x];
  const auto& b = vectors_[y];
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j >= b.size() || (i < a.size() && a[i].first < b[j].first))
      s += std::norm(a[i++].second);
    else if (i >= a.size() || b[j].first < a[i].first)
      s += std::norm(b[j++].second);
    else {
      s += std::norm(a[i].second - b[j].second);
      ++i, ++j;
    }
  }
  return std::sqrt(s);
}

Complex L2Profile::gram(int x, int y) const {
  const auto& a = vectors_[x];
  const auto& b = vectors_[y];
  Complex s(0.0);
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first < b[j].first)
      ++i;
    else if (b[j].first < a[i].first)
      ++j;
    else {
      s += b[j].second * std::conj(a[i].second);
      ++i, ++j;
    }
  }
  return s;
}

KernelMatrix::KernelMatrix(EntouragePtr support, std::vector<Complex> values)
    : support_(std::move(support)), values_(std::move(values)) {
  if (!support_) throw UsageError("kernel requires a support relation");
  if (values_.size() != support_->size())
    throw UsageError("kernel needs one value per support pair");
  for (const Complex& v : values_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw UsageError("kernel values must be finite");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    auto [x, y] = support_->pairs()[i];
    auto mirror = support_->pairIndex(y, x);
    Complex other = mirror ? values_[*mirror] : Complex(0.0);
    if (std::abs(values_[i] - std::conj(other)) > 1e-12)
      throw NumericalError("kernel is not Hermitian at " +
                           pairLabel(*support_->space(), x, y));
  }
}

Complex KernelMatrix::value(int x, int y) const {
  auto idx = support_->pairIndex(x, y);
  return idx ? values_[*idx] : Complex(0.0);
}

double KernelMatrix::maxAbs() const {
  double m = 0.0;
  for (const Complex& v : values_) m = std::max(m, std::abs(v));
  return m;
}

FolnerReport verifyFolner(const FolnerWitness& w, const Entourage& t,
                          double eps) {
  if (!(eps > 0.0)) throw UsageError("ratio threshold must be positive");
  if (!w.support()->space()->sameAs(*t.space()))
    throw UsageError("witness and tested relation live on different spaces");
  const Space& sp = *t.space();
  FolnerReport report;
  report.vacuous = t.size() == 0;

  auto addViolation = [&report](std::string msg) {
    if (report.violations.size() < 16) report.violations.push_back(std::move(msg));
  };
  std::size_t violation_count = 0;

  for (int x = 0; x < sp.size(); ++x) {
    if (w.variant() == FolnerVariant::kDiagonal) {
      if (w.count(x, x) < 1) {
        ++violation_count;
        addViolation("diagonal marker missing in the section at " + sp.label(x));
      }
    } else if (w.counts()[x].empty()) {
      ++violation_count;
      addViolation("empty section at " + sp.label(x));
    }
  }

  for (const auto& [x, y] : t.pairs()) {
    const auto& a = w.counts()[x];
    const auto& b = w.counts()[y];
    std::int64_t sym = 0, inter = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
      if (j >= b.size() || (i < a.size() && a[i].first < b[j].first))
        sym += a[i++].second;
      else if (i >= a.size() || b[j].first < a[i].first)
        sym += b[j++].second;
      else {
        sym += std::abs(a[i].second - b[j].second);
        inter += std::min(a[i].second, b[j].second);
        ++i, ++j;
      }
    }
    double ratio = inter == 0
                       ? std::numeric_limits<double>::infinity()
                       : static_cast<double>(sym) / static_cast<double>(inter);
    if (inter > 0 && ratio > report.max_ratio) {
      report.max_ratio = ratio;
      report.worst = PointPair{x, y};
    }
    bool ok = inter > 0 &&
              static_cast<double>(sym) < eps * static_cast<double>(inter);
    if (!ok) {
      ++violation_count;
      if (inter == 0) {
        addViolation("empty intersection of sections at " + pairLabel(sp, x, y));
        report.max_ratio = std::numeric_limits<double>::infinity();
        report.worst = PointPair{x, y};
      } else {
        addViolation("ratio " + std::to_string(ratio) + " not below " +
                     std::to_string(eps) + " at " + pairLabel(sp, x, y));
      }
    }
  }
  if (violation_count > report.violations.size())
    report.violations.push_back(
        "... and " +
        std::to_string(violation_count - report.violations.size()) +
        " further violations");
  report.pass = violation_count == 0;
  return report;
}

ProfilePair folnerToL2(const FolnerWitness& w) {
  const int n = w.support()->space()->size();
  SparseRows<double> l1(n);
  SparseRows<Complex> l2(n);
  for (int x = 0; x < n; ++x) {
    const auto& row = w.counts()[x];
    if (row.empty())
      throw UsageError("cannot normalize the empty section at " +
                       w.support()->space()->label(x));
    double total = 0.0;
    for (const auto& [y, c] : row) {
      (void)y;
      total += static_cast<double>(c);
    }
    double sq = 0.0;
    l1[x].reserve(row.size());
    l2[x].reserve(row.size());
    for (const auto& [y, c] : row) {
      double xi = static_cast<double>(c) / total;
      l1[x].push_back({y, xi});
      double eta = std::sqrt(xi);
      sq += eta * eta;
      l2[x].push_back({y, Complex(eta, 0.0)});
    }
    double nrm = std::sqrt(sq);
    for (auto& [y, v] : l2[x]) {
      (void)y;
      v /= nrm;
    }
  }
  return {L1Profile(w.support(), std::move(l1)),
          L2Profile(w.support(), std::move(l2))};
}

KernelMatrix l2ToKernel(const L2Profile& p) {
  EntouragePtr out = compose(*p.support(), *inverse(*p.support()));
  std::vector<Complex> values(out->size());
  for (std::size_t i = 0; i < out->size(); ++i) {
    auto [x, y] = out->pairs()[i];
    // <eta_y, eta_x> with the first-argument-linear inner product, matching
    // L2Profile::gram and the square-root reconstruction in kernelToL2.
    const auto& a = p.vectors()[x];
    const auto& b = p.vectors()[y];
    Complex s(0.0);
    std::size_t ia = 0, ib = 0;
    while (ia < a.size() && ib < b.size()) {
      if (a[ia].first < b[ib].first)
        ++ia;
      else if (b[ib].first < a[ia].first)
        ++ib;
      else {
        s += std::conj(a[ia].second) * b[ib].second;
        ++ia, ++ib;
      }
    }
    values[i] = s;
  }
  return KernelMatrix(out, std::move(values));
}

namespace {

Eigen::MatrixXcd denseKernel(const KernelMatrix& k) {
  const int n = k.support()->space()->size();
  if (n > kDenseLimit)
    throw NumericalError("kernel eigendecomposition capped at " +
                         std::to_string(kDenseLimit) + " points");
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
  for (std::size_t i = 0; i < k.support()->size(); ++i) {
    auto [x, y] = k.support()->pairs()[i];
    a(x, y) = k.values()[i];
  }
  return a;
}

double hermitianSpectralNorm(const Eigen::MatrixXcd& h) {
  if (h.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h,
                                                     Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

}  // namespace

KernelFactorization kernelToL2(const KernelMatrix& k, double eps) {
  if (!(eps > 0.0)) throw UsageError("factorization tolerance must be positive");
  const SpacePtr& space = k.support()->space();
  const int n = space->size();
  Eigen::MatrixXcd a = denseKernel(k);
  for (int x = 0; x < n; ++x)
    if (std::abs(Complex(1.0, 0.0) - a(x, x)) > eps)
      throw UsageError("kernel diagonal at " + space->label(x) +
                       " is not within the tolerance of 1");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
  double min_eig = n > 0 ? es.eigenvalues()(0) : 0.0;
  double tol = 1e-9 * n * std::max(1.0, k.maxAbs());
  if (min_eig < -tol)
    throw NumericalError("kernel is not positive semidefinite (min eigenvalue " +
                         std::to_string(min_eig) + ")");
  Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXcd root =
      es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();

  EntouragePtr step = symmetrize(*k.support());
  EntouragePtr band = step;
  double residual = 0.0;
  int band_power = 0;
  for (int m = 1;; ++m) {
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& [x, y] : band->pairs()) b(x, y) = root(x, y);
    residual = hermitianSpectralNorm(a - b.adjoint() * b);
    if (residual < eps) {
      band_power = m;
      root = std::move(b);
      break;
    }
    EntouragePtr bigger = compose(*band, *step);
    if (bigger->size() == band->size())
      throw NumericalError(
          "band truncation stabilized at residual " + std::to_string(residual) +
          " and cannot reach the requested tolerance " + std::to_string(eps));
    band = bigger;
  }

  SparseRows<Complex> rows(n);
  for (int x = 0; x < n; ++x) {
    double nrm = root.col(x).norm();
    if (nrm == 0.0)
      throw NumericalError("truncated square root vanished at " +
                           space->label(x));
    for (int z = 0; z < n; ++z) {
      Complex v = root(z, x);
      if (v != Complex(0.0)) rows[x].push_back({z, v / nrm});
    }
  }
  double bound = eps < 1.0 ? (2.0 * std::sqrt(eps) + 2.0 * eps) / std::sqrt(1.0 - eps)
                           : std::numeric_limits<double>::infinity();
  return {L2Profile(band, std::move(rows)), band_power, residual, bound};
}

FolnerDiscretization l2ToFolner(const L2Profile& p, const Entourage& t,
                                double eps) {
  if (!(eps > 0.0) || !(eps < 1.0))
    throw UsageError("discretization tolerance must lie in (0, 1)");
  if (!p.support()->space()->sameAs(*t.space()))
    throw UsageError("profile and tested relation live on different spaces");
  const SpacePtr& space = p.support()->space();
  const int n = space->size();

  for (const auto& [x, y] : t.pairs())
    if (!(p.displacement(x, y) < eps))
      throw UsageError("profile displacement at " +
                       pairLabel(*space, x, y) +
                       " is not below the requested tolerance");

  // xi_x(y) = |eta_x(y)|^2, exact sums and pairwise l1 distances.
  SparseRows<double> xi(n);
  std::vector<double> exact_sum(n, 0.0);
  for (int x = 0; x < n; ++x) {
    xi[x].reserve(p.vectors()[x].size());
    for (const auto& [y, v] : p.vectors()[x]) {
      double w = std::norm(v);
      xi[x].push_back({y, w});
      exact_sum[x] += w;
    }
  }
  auto l1dist = [](const std::vector<std::pair<int, double>>& a,
                   const std::vector<std::pair<int, double>>& b) {
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
      if (j >= b.size() || (i < a.size() && a[i].first < b[j].first))
        d += std::abs(a[i++].second);
      else if (i >= a.size() || b[j].first < a[i].first)
        d += std::abs(b[j++].second);
      else {
        d += std::abs(a[i].second - b[j].second);
        ++i, ++j;
      }
    }
    return d;
  };
  std::vector<double> exact_dist;
  exact_dist.reserve(t.size());
  for (const auto& [x, y] : t.pairs()) exact_dist.push_back(l1dist(xi[x], xi[y]));

  EntouragePtr support = unite(*p.support(), *diagonal(space));
  constexpr std::int64_t kGridCap = 1'000'000'000;
  for (std::int64_t m = 1; m <= kGridCap; m *= 2) {
    SparseRows<std::int64_t> counts(n);
    for (int x = 0; x < n; ++x) {
      bool saw_diag = false;
      for (const auto& [y, w] : xi[x]) {
        std::int64_t c = static_cast<std::int64_t>(
            std::floor(static_cast<double>(m) * w));
        if (y == x) {
          saw_diag = true;
          c = std::max<std::int64_t>(1, c);
        }
        if (c > 0) counts[x].push_back({y, c});
      }
      if (!saw_diag) {
        counts[x].push_back({x, 1});
        std::sort(counts[x].begin(), counts[x].end());
      }
    }
    bool ok = true;
    for (int x = 0; x < n && ok; ++x) {
      std::int64_t total = 0;
      for (const auto& [y, c] : counts[x]) {
        (void)y;
        total += c;
      }
      double rounded = static_cast<double>(total) / static_cast<double>(m);
      if (!(std::abs(rounded - exact_sum[x]) < eps / 4.0)) ok = false;
    }
    for (std::size_t i = 0; i < t.size() && ok; ++i) {
      auto [x, y] = t.pairs()[i];
      const auto& a = counts[x];
      const auto& b = counts[y];
      std::int64_t sym = 0;
      std::size_t ia = 0, ib = 0;
      while (ia < a.size() || ib < b.size()) {
        if (ib >= b.size() || (ia < a.size() && a[ia].first < b[ib].first))
          sym += a[ia++].second;
        else if (ia >= a.size() || b[ib].first < a[ia].first)
          sym += b[ib++].second;
        else {
          sym += std::abs(a[ia].second - b[ib].second);
          ++ia, ++ib;
        }
      }
      double rounded = static_cast<double>(sym) / static_cast<double>(m);
      if (!(std::abs(rounded - exact_dist[i]) < eps / 2.0)) ok = false;
    }
    if (!ok) continue;

    FolnerWitness w(support, std::move(counts), m, FolnerVariant::kNonempty);
    double bound = 2.0 * eps / (1.0 - eps);
    FolnerReport check = verifyFolner(w, t, bound);
    if (!check.pass) {
      std::string detail = check.violations.empty() ? "" : ": " + check.violations.front();
      throw NumericalError(
          "discretized witness misses the contracted ratio bound " +
          std::to_string(bound) + detail);
    }
    return {std::move(w), m, check.max_ratio};
  }
  // The doubling loop only exhausts when eps is adversarially small relative
  // to the 1e9 grid cap; report a point with a forced diagonal entry.
  for (int x = 0; x < n; ++x)
    if (std::abs(p.value(x, x)) == 0.0)
      throw NumericalError("no grid below 1e9 absorbs the forced diagonal at " +
                           space->label(x));
  throw NumericalError("no grid below 1e9 meets the rounding tolerances");
}

L2Quality verifyL2(const L2Profile& p, const Entourage& t) {
  if (!p.support()->space()->sameAs(*t.space()))
    throw UsageError("profile and tested relation live on different spaces");
  const int n = p.support()->space()->size();
  for (int x = 0; x < n; ++x)
    if (std::abs(p.norm(x) - 1.0) > 1e-12)
      throw NumericalError("l2 vector at " + p.support()->space()->label(x) +
                           " is not a unit vector");
  L2Quality q;
  q.vacuous = t.size() == 0;
  for (const auto& [x, y] : t.pairs()) {
    double d = p.displacement(x, y);
    if (d > q.displacement) {
      q.displacement = d;
      q.worst = PointPair{x, y};
    }
  }
  return q;
}

KernelReport verifyKernel(const KernelMatrix& k, const Entourage& t) {
  if (!k.support()->space()->sameAs(*t.space()))
    throw UsageError("kernel and tested relation live on different spaces");
  Eigen::MatrixXcd a = denseKernel(k);
  KernelReport report;
  report.vacuous = t.size() == 0;
  if (a.rows() > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a,
                                                       Eigen::EigenvaluesOnly);
    report.min_eigenvalue = es.eigenvalues()(0);
  }
  for (const auto& [x, y] : t.pairs()) {
    double d = std::abs(Complex(1.0, 0.0) - k.value(x, y));
    if (d > report.sup_one_minus_k) {
      report.sup_one_minus_k = d;
      report.worst = PointPair{x, y};
    }
  }
  return report;
}

BallWitnessSearch folnerFromBalls(const Entourage& gens, const Entourage& t,
                                  double eps, int r_max) {
  if (!gens.isSymmetric() || !gens.containsDiagonal())
    throw UsageError("ball search needs a symmetric generating relation containing the diagonal");
  if (!gens.space()->sameAs(*t.space()))
    throw UsageError("generating and tested relations live on different spaces");
  if (r_max < 1) throw UsageError("ball search radius bound must be at least 1");
  const int n = gens.space()->size();
  EntouragePtr ball = nullptr;
  for (int r = 1; r <= r_max; ++r) {
    ball = r == 1 ? makeEntourage(gens.space(), gens.pairs())
                  : compose(*ball, gens);
    SparseRows<std::int64_t> counts(n);
    for (int x = 0; x < n; ++x) {
      auto b = ball->ball(x);
      counts[x].reserve(b.size());
      for (int z : b) counts[x].push_back({z, 1});
    }
    FolnerWitness w(ball, std::move(counts), 1, FolnerVariant::kDiagonal);
    if (verifyFolner(w, t, eps).pass) return {std::move(w), r};
  }
  return {std::nullopt, 0};
}

}  // namespace coarse
