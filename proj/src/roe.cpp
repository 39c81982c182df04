#include "coarse/roe.hpp"

#include <algorithm>
#include <cmath>

#include "coarse/parallel.hpp"

namespace coarse {

namespace {
constexpr int kDensePointLimit = 2000;  // dense eigensolve up to here
constexpr int kDenseHardLimit = 4096;   // refuse dense matrices beyond this
constexpr double kPowerRelTol = 1e-10;
constexpr int kPowerMaxIter = 100000;

void requireDense(int n, const char* what) {
  if (n > kDenseHardLimit)
    throw NumericalError(std::string(what) + " needs a dense matrix; capped at " +
                         std::to_string(kDenseHardLimit) + " points");
}
}  // namespace

BandedOperator::BandedOperator(EntouragePtr band, std::vector<Complex> values)
    : band_(std::move(band)), values_(std::move(values)) {
  if (!band_) throw UsageError("operator requires a band relation");
  if (values_.size() != band_->size())
    throw UsageError("operator needs one value per band pair");
  for (const Complex& v : values_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw UsageError("operator entries must be finite");
}

BandedOperator BandedOperator::fromTriples(
    EntouragePtr band,
    const std::vector<std::tuple<int, int, Complex>>& triples) {
  std::vector<Complex> values(band->size(), Complex(0.0));
  std::vector<char> seen(band->size(), 0);
  for (const auto& [x, y, v] : triples) {
    auto idx = band->pairIndex(x, y);
    if (!idx)
      throw UsageError("triple (" + std::to_string(x) + "," +
                       std::to_string(y) + ") lies outside the band");
    if (seen[*idx])
      throw UsageError("duplicate triple (" + std::to_string(x) + "," +
                       std::to_string(y) + ")");
    seen[*idx] = 1;
    values[*idx] = v;
  }
  return BandedOperator(band, std::move(values));
}

BandedOperator BandedOperator::identity(const SpacePtr& space) {
  EntouragePtr d = diagonal(space);
  return BandedOperator(d, std::vector<Complex>(d->size(), Complex(1.0)));
}

BandedOperator BandedOperator::onesOn(EntouragePtr band) {
  std::vector<Complex> values(band->size(), Complex(1.0));
  return BandedOperator(std::move(band), std::move(values));
}

Complex BandedOperator::entry(int x, int y) const {
  auto idx = band_->pairIndex(x, y);
  return idx ? values_[*idx] : Complex(0.0);
}

double BandedOperator::maxAbsEntry() const {
  double m = 0.0;
  for (const Complex& v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool BandedOperator::isZero() const {
  for (const Complex& v : values_)
    if (v != Complex(0.0)) return false;
  return true;
}

void BandedOperator::apply(std::span<const Complex> in,
                           std::span<Complex> out) const {
  const std::size_t n = band_->space()->size();
  if (in.size() != n || out.size() != n)
    throw UsageError("vector length does not match the space");
  std::fill(out.begin(), out.end(), Complex(0.0));
  const auto& pairs = band_->pairs();
  for (std::size_t k = 0; k < pairs.size(); ++k)
    out[pairs[k].first] += values_[k] * in[pairs[k].second];
}

void BandedOperator::applyAdjoint(std::span<const Complex> in,
                                  std::span<Complex> out) const {
  const std::size_t n = band_->space()->size();
  if (in.size() != n || out.size() != n)
    throw UsageError("vector length does not match the space");
  std::fill(out.begin(), out.end(), Complex(0.0));
  const auto& pairs = band_->pairs();
  for (std::size_t k = 0; k < pairs.size(); ++k)
    out[pairs[k].second] += std::conj(values_[k]) * in[pairs[k].first];
}

Eigen::MatrixXcd BandedOperator::dense() const {
  const int n = band_->space()->size();
  requireDense(n, "materializing an operator");
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  const auto& pairs = band_->pairs();
  for (std::size_t k = 0; k < pairs.size(); ++k)
    m(pairs[k].first, pairs[k].second) = values_[k];
  return m;
}

BandedOperator bandProduct(const BandedOperator& a, const BandedOperator& b) {
  const Entourage& ta = *a.band();
  const Entourage& tb = *b.band();
  if (!ta.space()->sameAs(*tb.space()))
    throw UsageError("product requires operators over the same space");
  EntouragePtr band = compose(ta, tb);
  std::vector<Complex> values(band->size(), Complex(0.0));
  const int n = ta.space()->size();
  for (int z = 0; z < n; ++z) {
    auto xs = ta.ball(z);          // entries (x, z) of a
    auto ys = tb.inverseBall(z);   // entries (z, y) of b
    for (std::size_t i = 0; i < xs.size(); ++i) {
      Complex va = a.values()[ta.ballEntryPairIndex(ta.ballOffset(z) + i)];
      for (std::size_t j = 0; j < ys.size(); ++j) {
        Complex vb = b.values()[tb.inverseBallOffset(z) + j];
        values[*band->pairIndex(xs[i], ys[j])] += va * vb;
      }
    }
  }
  return BandedOperator(std::move(band), std::move(values));
}

BandedOperator bandAdjoint(const BandedOperator& a) {
  EntouragePtr band = inverse(*a.band());
  std::vector<Complex> values(band->size());
  for (std::size_t k = 0; k < band->size(); ++k) {
    auto [x, y] = band->pairs()[k];
    values[k] = std::conj(a.entry(y, x));
  }
  return BandedOperator(std::move(band), std::move(values));
}

BandedOperator bandSum(const BandedOperator& a, const BandedOperator& b,
                       Complex scale_b) {
  if (!a.band()->space()->sameAs(*b.band()->space()))
    throw UsageError("sum requires operators over the same space");
  EntouragePtr band = unite(*a.band(), *b.band());
  std::vector<Complex> values(band->size());
  for (std::size_t k = 0; k < band->size(); ++k) {
    auto [x, y] = band->pairs()[k];
    values[k] = a.entry(x, y) + scale_b * b.entry(x, y);
  }
  return BandedOperator(std::move(band), std::move(values));
}

BandedOperator scaled(const BandedOperator& a, Complex s) {
  std::vector<Complex> values = a.values();
  for (Complex& v : values) v *= s;
  return BandedOperator(a.band(), std::move(values));
}

double spectralNorm(const Eigen::MatrixXcd& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Eigen::MatrixXcd gram = m.adjoint() * m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram,
                                                     Eigen::EigenvaluesOnly);
  double top = es.eigenvalues()(es.eigenvalues().size() - 1);
  return std::sqrt(std::max(top, 0.0));
}

NormReport operatorNorm(const BandedOperator& a,
                        std::optional<NormMethod> force) {
  const int n = a.band()->space()->size();
  if (a.isZero() || n == 0) return {0.0, NormMethod::kDenseEig, 0, 0.0};
  NormMethod method = force.value_or(n <= kDensePointLimit
                                         ? NormMethod::kDenseEig
                                         : NormMethod::kPowerIteration);
  if (method == NormMethod::kDenseEig) {
    return {spectralNorm(a.dense()), NormMethod::kDenseEig, 0, 0.0};
  }

  // Power iteration on a*a from the all-ones start; deterministic restarts
  // from basis vectors if the start happens to lie in ker(a).
  std::vector<Complex> v(n, Complex(1.0 / std::sqrt(static_cast<double>(n)))),
      w(n), u(n);
  auto norm2 = [](const std::vector<Complex>& vec) {
    double s = 0.0;
    for (const Complex& c : vec) s += std::norm(c);
    return std::sqrt(s);
  };
  int restart = 0;
  int iterations = 0;
  double lambda = 0.0, residual = 0.0;
  while (iterations < kPowerMaxIter) {
    ++iterations;
    a.apply(v, w);
    a.applyAdjoint(w, u);
    double wn = norm2(w);
    lambda = wn * wn;  // Rayleigh quotient of a*a at the unit vector v
    if (lambda == 0.0) {
      if (restart >= n)
        throw NumericalError("power iteration found no usable start vector");
      std::fill(v.begin(), v.end(), Complex(0.0));
      v[restart++] = Complex(1.0);
      continue;
    }
    residual = 0.0;
    for (int i = 0; i < n; ++i) residual += std::norm(u[i] - lambda * v[i]);
    residual = std::sqrt(residual) / lambda;
    double un = norm2(u);
    for (int i = 0; i < n; ++i) v[i] = u[i] / un;
    if (iterations >= 2 && residual <= kPowerRelTol)
      return {std::sqrt(lambda), NormMethod::kPowerIteration, iterations,
              residual};
  }
  throw NumericalError("power iteration did not converge within " +
                       std::to_string(kPowerMaxIter) +
                       " iterations (relative residual " +
                       std::to_string(residual) + ")");
}

double schurBound(const BandedOperator& a) {
  return a.band()->degree().max() * a.maxAbsEntry();
}

BlockFamily::BlockFamily(EntouragePtr window,
                         std::vector<Eigen::MatrixXcd> blocks)
    : window_(std::move(window)), blocks_(std::move(blocks)) {
  if (!window_) throw UsageError("block family requires a window relation");
  const int n = window_->space()->size();
  if (static_cast<int>(blocks_.size()) != n)
    throw UsageError("block family needs one block per point");
  for (int z = 0; z < n; ++z) {
    auto sz = static_cast<Eigen::Index>(window_->ball(z).size());
    if (blocks_[z].rows() != sz || blocks_[z].cols() != sz)
      throw UsageError("block at point " + window_->space()->label(z) +
                       " has the wrong shape");
  }
}

std::vector<double> BlockFamily::blockNorms() const {
  std::vector<double> norms(blocks_.size(), 0.0);
  parallelFor(blocks_.size(),
              [&](std::size_t z) { norms[z] = spectralNorm(blocks_[z]); });
  return norms;
}

double BlockFamily::familyNorm() const {
  double best = 0.0;
  for (double v : blockNorms()) best = std::max(best, v);
  return best;
}

BlockFamily compress(const BandedOperator& a, EntouragePtr window) {
  if (!a.band()->space()->sameAs(*window->space()))
    throw UsageError("compression window must live on the operator's space");
  const int n = window->space()->size();
  std::vector<Eigen::MatrixXcd> blocks(n);
  parallelFor(n, [&](std::size_t z) {
    auto idx = window->ball(static_cast<int>(z));
    Eigen::MatrixXcd b(idx.size(), idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < idx.size(); ++j)
        b(i, j) = a.entry(idx[i], idx[j]);
    blocks[z] = std::move(b);
  });
  return BlockFamily(std::move(window), std::move(blocks));
}

BandedOperator schurReconstruct(const BlockFamily& c, const L2Profile& p) {
  if (!p.support()->samePairs(*c.window()))
    throw UsageError("profile support must equal the compression window");
  const Entourage& s = *c.window();
  EntouragePtr band = compose(s, *inverse(s));
  std::vector<Complex> values(band->size(), Complex(0.0));
  const int n = s.space()->size();
  for (int z = 0; z < n; ++z) {
    auto idx = s.ball(z);
    std::vector<Complex> eta(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
      eta[i] = p.value(idx[i], z);
    const Eigen::MatrixXcd& block = c.block(z);
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < idx.size(); ++j) {
        Complex term = std::conj(eta[i]) * block(i, j) * eta[j];
        values[*band->pairIndex(idx[i], idx[j])] += term;
      }
  }
  return BandedOperator(std::move(band), std::move(values));
}

DefectReport nuclearityDefect(const BandedOperator& b, const L2Profile& p,
                              const Entourage& t, double eps) {
  if (!(eps > 0.0)) throw UsageError("defect target must be positive");
  if (!b.band()->space()->sameAs(*t.space()) ||
      !p.support()->space()->sameAs(*t.space()))
    throw UsageError("operator, profile and relation must share a space");
  if (!b.band()->subsetOf(t))
    throw UsageError("operator band must lie inside the tested relation");

  double norm_b = operatorNorm(b).value;
  if (norm_b == 0.0) return {0.0, 0.0, eps};
  int deg = t.degree().max();
  double delta = eps / (norm_b * deg);
  for (const auto& [x, y] : t.pairs())
    if (!(p.displacement(x, y) < delta))
      throw UsageError("profile displacement at (" + t.space()->label(x) +
                       ", " + t.space()->label(y) + ") is " +
                       std::to_string(p.displacement(x, y)) +
                       ", not below the required " + std::to_string(delta));

  BlockFamily family = compress(b, p.support());
  BandedOperator rebuilt = schurReconstruct(family, p);
  BandedOperator diff = bandSum(rebuilt, b, Complex(-1.0));
  double defect = operatorNorm(diff).value;

  double gram_defect = 0.0;
  for (const auto& [x, y] : t.pairs())
    gram_defect =
        std::max(gram_defect, std::abs(Complex(1.0) - p.gram(x, y)));
  double estimate = deg * gram_defect * b.maxAbsEntry();

  if (defect > estimate + 1e-9 * (1.0 + norm_b))
    throw NumericalError("computed defect " + std::to_string(defect) +
                         " exceeds its own Schur estimate " +
                         std::to_string(estimate));
  if (!(estimate < eps))
    throw NumericalError("Schur estimate " + std::to_string(estimate) +
                         " missed the defect target " + std::to_string(eps));
  return {defect, estimate, eps};
}

}  // namespace coarse
