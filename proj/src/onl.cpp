#include "coarse/onl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "coarse/parallel.hpp"

namespace coarse {

namespace {

double vecNorm(std::span<const Complex> v) {
  double s = 0.0;
  for (const Complex& c : v) s += std::norm(c);
  return std::sqrt(s);
}

std::vector<std::pair<int, Complex>> sparsify(std::span<const Complex> v) {
  std::vector<std::pair<int, Complex>> out;
  for (int i = 0; i < static_cast<int>(v.size()); ++i)
    if (v[i] != Complex(0.0)) out.push_back({i, v[i]});
  return out;
}

}  // namespace

BetaScan betaCheck(const BandedOperator& a, EntouragePtr window, double c) {
  if (!a.band()->space()->sameAs(*window->space()))
    throw UsageError("window must live on the operator's space");
  if (!(c > 0.0) || !(c < 1.0))
    throw UsageError("localization constant must lie in (0, 1)");
  if (a.isZero()) throw UsageError("localization scan needs a nonzero operator");

  BetaScan scan;
  scan.norm = operatorNorm(a);
  const int n = window->space()->size();
  BlockFamily family = compress(a, window);
  std::vector<double> norms = family.blockNorms();
  double best = -1.0;
  for (int z = 0; z < n; ++z)
    if (norms[z] > best) {
      best = norms[z];
      scan.best_center = z;
    }
  scan.best_block_ratio = best / scan.norm.value;
  if (best < c * scan.norm.value) return scan;

  // Top right-singular vector of the best block, embedded at its ball.
  auto idx = window->ball(scan.best_center);
  const Eigen::MatrixXcd& block = family.block(scan.best_center);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(block.adjoint() * block);
  Eigen::VectorXcd top = es.eigenvectors().col(es.eigenvalues().size() - 1);
  top /= top.norm();
  std::vector<Complex> full(n, Complex(0.0));
  for (std::size_t i = 0; i < idx.size(); ++i) full[idx[i]] = top(i);
  std::vector<Complex> image(n);
  a.apply(full, image);

  BetaCertificate cert;
  cert.constant = c;
  cert.window = window;
  cert.vector = sparsify(full);
  cert.center = scan.best_center;
  cert.ratio = vecNorm(image) / scan.norm.value;
  cert.block_ratio = scan.best_block_ratio;
  scan.certificate = std::move(cert);
  return scan;
}

BetaCertificate amplify(const BandedOperator& a, const Entourage& t,
                        const EntouragePtr& s, std::span<const Complex> xi,
                        double kappa, int n_steps) {
  const SpacePtr& space = a.band()->space();
  if (!space->sameAs(*t.space()) || !space->sameAs(*s->space()))
    throw UsageError("operator, propagation and window relations must share a space");
  if (!t.isSymmetric() || !t.containsDiagonal())
    throw UsageError("amplification needs a symmetric relation containing the diagonal");
  if (!a.band()->subsetOf(t))
    throw UsageError("operator band must lie inside the propagation relation");
  if (!(kappa > 0.0) || !(kappa < 1.0))
    throw UsageError("amplification constant must lie in (0, 1)");
  if (n_steps < 1) throw UsageError("amplification exponent must be positive");
  const int n = space->size();
  if (static_cast<int>(xi.size()) != n)
    throw UsageError("start vector length does not match the space");
  if (std::abs(vecNorm(xi) - 1.0) > 1e-12)
    throw UsageError("start vector must be a unit vector");
  double norm_a = operatorNorm(a).value;
  if (std::abs(norm_a - 1.0) > 1e-9)
    throw UsageError("amplification expects a normalized operator (||a|| = 1)");

  std::vector<int> supp;
  for (int i = 0; i < n; ++i)
    if (xi[i] != Complex(0.0)) supp.push_back(i);
  std::optional<int> center = boundedWitness(*s, supp);
  if (!center)
    throw UsageError("start vector support is not bounded by the window relation");

  // Telescoping chain u_j = (a a*)^j xi; keep the w_j = a* u_j stage whose
  // ratio ||u_{j+1}|| / ||u_j|| first exceeds kappa.
  std::vector<Complex> u(xi.begin(), xi.end()), w(n), best_w;
  std::vector<double> tau;  // tau[j] = ||u_j||
  tau.push_back(1.0);
  int best_j = -1;
  std::vector<std::vector<Complex>> stages;
  for (int j = 0; j < n_steps; ++j) {
    a.applyAdjoint(u, w);
    if (vecNorm(w) == 0.0)
      throw NumericalError("amplification degenerated: a*(a a*)^" +
                           std::to_string(j) + " xi vanished");
    stages.push_back(w);
    a.apply(w, u);
    tau.push_back(vecNorm(u));
  }
  if (!(tau[n_steps] > std::pow(kappa, n_steps)))
    throw UsageError("amplification precondition fails: ||(a a*)^n xi|| = " +
                     std::to_string(tau[n_steps]) + " is not above kappa^n");
  for (int j = 0; j < n_steps; ++j)
    if (tau[j + 1] > kappa * tau[j]) {
      best_j = j;
      break;
    }
  if (best_j < 0)
    throw NumericalError("telescoping failed to locate an amplified step");
  best_w = std::move(stages[best_j]);
  double wn = vecNorm(best_w);
  for (Complex& v : best_w) v /= wn;

  EntouragePtr win = compose(*power(t, 2 * n_steps - 1), *s);
  auto ball = win->ball(*center);
  for (int i = 0; i < n; ++i)
    if (best_w[i] != Complex(0.0) &&
        !std::binary_search(ball.begin(), ball.end(), i))
      throw NumericalError("amplified vector escaped its window ball");

  std::vector<Complex> image(n);
  a.apply(best_w, image);
  double achieved = vecNorm(image);
  if (!(achieved > kappa))
    throw NumericalError("amplified vector missed the kappa bound");

  BetaCertificate cert;
  cert.constant = kappa;
  cert.window = win;
  cert.vector = sparsify(best_w);
  cert.center = *center;
  cert.ratio = achieved;
  cert.block_ratio = achieved;
  return cert;
}

namespace {

// Deterministic top singular pair of a dense matrix by power iteration on
// m* m; accuracy only steers the sampling walk, soundness of the reported
// ratios never depends on it.
void topSingularPair(const Eigen::MatrixXcd& m, Eigen::VectorXcd& u,
                     Eigen::VectorXcd& v) {
  v = Eigen::VectorXcd::Constant(m.cols(), Complex(1.0));
  v /= v.norm();
  for (int it = 0; it < 200; ++it) {
    Eigen::VectorXcd next = m.adjoint() * (m * v);
    double nn = next.norm();
    if (nn == 0.0) break;
    next /= nn;
    double drift = (next - v).norm();
    v = next;
    if (drift < 1e-12) break;
  }
  u = m * v;
  double un = u.norm();
  if (un > 0.0) u /= un;
}

}  // namespace

InverseNormEstimate inverseCompressionNorm(EntouragePtr band,
                                           EntouragePtr window, int trials,
                                           std::uint64_t seed) {
  if (!band->space()->sameAs(*window->space()))
    throw UsageError("band and window must live on the same space");
  if (trials < 1) throw UsageError("sampling needs at least one trial");
  if (band->size() == 0)
    throw UsageError("inverse-compression sampling needs a nonempty band");

  InverseNormEstimate est;
  est.band = band;
  est.window = window;

  std::mt19937_64 rng(seed);
  auto uniform = [&rng]() {
    return 2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0;  // [-1, 1)
  };

  std::vector<BandedOperator> candidates;
  candidates.push_back(BandedOperator::onesOn(band));
  if (band->containsDiagonal()) {
    // Graph Laplacian of the band: off-diagonal -1, diagonal = row degree.
    std::vector<Complex> vals(band->size());
    for (std::size_t k = 0; k < band->size(); ++k) {
      auto [x, y] = band->pairs()[k];
      if (x == y)
        vals[k] = Complex(static_cast<double>(
            band->inverseBall(x).size() - 1));
      else
        vals[k] = Complex(-1.0);
    }
    candidates.push_back(BandedOperator(band, std::move(vals)));
  }
  for (int t = 0; t < trials; ++t) {
    std::vector<Complex> vals(band->size());
    for (Complex& v : vals) v = Complex(uniform());
    candidates.push_back(BandedOperator(band, std::move(vals)));
  }
  for (int t = 0; t < trials; ++t) {
    std::vector<Complex> vals(band->size());
    for (Complex& v : vals) v = Complex(rng() & 1 ? 1.0 : -1.0);
    candidates.push_back(BandedOperator(band, std::move(vals)));
  }

  std::optional<BandedOperator> current;
  auto consider = [&](const BandedOperator& a) -> bool {
    if (a.isZero()) return false;
    ++est.samples;
    double na = operatorNorm(a).value;
    double fn = compress(a, window).familyNorm();
    if (fn == 0.0) {
      est.lower_bound = std::numeric_limits<double>::infinity();
      est.argmax = a;
      return true;
    }
    double ratio = na / fn;
    if (ratio > est.lower_bound) {
      est.lower_bound = ratio;
      est.argmax = a;
    }
    return false;
  };

  for (const auto& a : candidates)
    if (consider(a)) return est;

  if (!est.argmax) return est;
  current = est.argmax;
  for (int step = 0; step < 100; ++step) {
    Eigen::MatrixXcd m = current->dense();
    Eigen::VectorXcd u, v;
    topSingularPair(m, u, v);
    std::vector<Complex> vals(band->size());
    bool nonzero = false;
    for (std::size_t k = 0; k < band->size(); ++k) {
      auto [x, y] = band->pairs()[k];
      vals[k] = u(x) * std::conj(v(y));
      if (vals[k] != Complex(0.0)) nonzero = true;
    }
    if (!nonzero) break;
    BandedOperator next(band, std::move(vals));
    if (consider(next)) return est;
    current = std::move(next);
  }
  return est;
}

AmplifiedCompression matrixAmplifyCompress(
    const std::vector<std::vector<BandedOperator>>& blocks,
    std::span<const Complex> xi, std::span<const Complex> eta,
    const EntouragePtr& window) {
  const int n = static_cast<int>(blocks.size());
  if (n < 1) throw UsageError("amplification needs at least one block row");
  for (const auto& row : blocks)
    if (static_cast<int>(row.size()) != n)
      throw UsageError("block matrix must be square");
  const EntouragePtr& band = blocks[0][0].band();
  for (const auto& row : blocks)
    for (const auto& op : row)
      if (!op.band()->samePairs(*band))
        throw UsageError("all blocks must share one band relation");
  const int points = band->space()->size();
  const std::size_t total = static_cast<std::size_t>(points) * n;
  if (xi.size() != total || eta.size() != total)
    throw UsageError("amplified vectors must have length points * block_dim");
  if (std::abs(vecNorm(xi) - 1.0) > 1e-12 ||
      std::abs(vecNorm(eta) - 1.0) > 1e-12)
    throw UsageError("amplified vectors must be unit vectors");

  // Per-point unit slices; the first basis vector replaces vanished slices.
  auto slices = [n, points](std::span<const Complex> v) {
    std::vector<Eigen::VectorXcd> out(points);
    for (int x = 0; x < points; ++x) {
      Eigen::VectorXcd s(n);
      for (int i = 0; i < n; ++i) s(i) = v[static_cast<std::size_t>(x) * n + i];
      double nrm = s.norm();
      if (nrm > 0.0)
        s /= nrm;
      else
        s = Eigen::VectorXcd::Unit(n, 0);
      out[x] = std::move(s);
    }
    return out;
  };
  std::vector<Eigen::VectorXcd> xs = slices(xi), ws = slices(eta);

  std::vector<Complex> vals(band->size(), Complex(0.0));
  for (std::size_t k = 0; k < band->size(); ++k) {
    auto [x, y] = band->pairs()[k];
    Complex acc(0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        acc += std::conj(ws[x](i)) * blocks[i][j].values()[k] * xs[y](j);
    vals[k] = acc;
  }
  BandedOperator compressed(band, std::move(vals));

  if (total > 4096)
    throw NumericalError("amplified norm needs a dense matrix; capped at 4096");
  Eigen::MatrixXcd big = Eigen::MatrixXcd::Zero(total, total);
  for (std::size_t k = 0; k < band->size(); ++k) {
    auto [x, y] = band->pairs()[k];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        big(static_cast<Eigen::Index>(x) * n + i,
            static_cast<Eigen::Index>(y) * n + j) = blocks[i][j].values()[k];
  }

  AmplifiedCompression out{std::move(compressed), spectralNorm(big),
                           0.0, std::nullopt, std::nullopt};
  out.compressed_norm = operatorNorm(out.compressed).value;
  if (out.compressed_norm > out.amplified_norm + 1e-9)
    throw NumericalError("compression increased the operator norm");

  if (window) {
    if (!window->space()->sameAs(*band->space()))
      throw UsageError("window must live on the operators' space");
    std::vector<double> norms(points, 0.0);
    parallelFor(points, [&](std::size_t z) {
      auto idx = window->ball(static_cast<int>(z));
      Eigen::MatrixXcd blk(idx.size() * n, idx.size() * n);
      for (std::size_t u = 0; u < idx.size(); ++u)
        for (std::size_t v = 0; v < idx.size(); ++v)
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              blk(u * n + i, v * n + j) = blocks[i][j].entry(idx[u], idx[v]);
      norms[z] = spectralNorm(blk);
    });
    double amp = 0.0;
    for (double v : norms) amp = std::max(amp, v);
    out.window_norm_amplified = amp;
    out.window_norm_compressed = compress(out.compressed, window).familyNorm();
    if (*out.window_norm_compressed > *out.window_norm_amplified + 1e-9)
      throw NumericalError("compression increased the window block norms");
  }
  return out;
}

UcpKernel kernelFromUcp(const Entourage& t, const EntouragePtr& s,
                        const L2Profile& p) {
  if (!t.space()->sameAs(*s->space()))
    throw UsageError("tested and window relations must share a space");
  if (!p.support()->samePairs(*s))
    throw UsageError("profile support must equal the compression window");
  EntouragePtr support = compose(*s, *inverse(*s));
  std::vector<Complex> values(support->size(), Complex(0.0));
  const int n = s->space()->size();
  for (int z = 0; z < n; ++z) {
    auto idx = s->ball(z);
    std::vector<Complex> eta(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
      eta[i] = p.value(idx[i], z);
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < idx.size(); ++j)
        values[*support->pairIndex(idx[i], idx[j])] +=
            std::conj(eta[i]) * eta[j];
  }
  KernelMatrix kernel(support, std::move(values));

  UcpKernel out{std::move(kernel), 0.0, 0.0};
  const int pts = s->space()->size();
  if (pts > 0) {
    Eigen::MatrixXcd dense = Eigen::MatrixXcd::Zero(pts, pts);
    for (std::size_t k = 0; k < out.kernel.support()->size(); ++k) {
      auto [x, y] = out.kernel.support()->pairs()[k];
      dense(x, y) = out.kernel.values()[k];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense,
                                                       Eigen::EigenvaluesOnly);
    out.min_eigenvalue = es.eigenvalues()(0);
    if (out.min_eigenvalue < -1e-9)
      throw NumericalError("unital completely positive composite produced a kernel with eigenvalue " +
                           std::to_string(out.min_eigenvalue));
  }
  for (const auto& [x, y] : t.pairs())
    out.sup_one_minus_k = std::max(
        out.sup_one_minus_k, std::abs(Complex(1.0) - out.kernel.value(x, y)));
  return out;
}

}  // namespace coarse
