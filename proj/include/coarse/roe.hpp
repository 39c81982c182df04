#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "coarse/witness.hpp"

namespace coarse {

// A finite-truncation band operator: matrix entries b_{x,y} = <b delta_y,
// delta_x> stored aligned to the pair list of the band relation, zero
// elsewhere. Column supports satisfy supp(b delta_y) ⊆ band[y].
class BandedOperator {
 public:
  BandedOperator(EntouragePtr band, std::vector<Complex> values);
  static BandedOperator fromTriples(
      EntouragePtr band, const std::vector<std::tuple<int, int, Complex>>& triples);
  static BandedOperator identity(const SpacePtr& space);
  static BandedOperator onesOn(EntouragePtr band);  // all band entries 1

  const EntouragePtr& band() const { return band_; }
  const std::vector<Complex>& values() const { return values_; }
  Complex entry(int x, int y) const;
  double maxAbsEntry() const;
  bool isZero() const;

  void apply(std::span<const Complex> in, std::span<Complex> out) const;
  void applyAdjoint(std::span<const Complex> in, std::span<Complex> out) const;
  Eigen::MatrixXcd dense() const;

 private:
  EntouragePtr band_;
  std::vector<Complex> values_;
};

// b1 b2 lives on the composed band; b1 + s*b2 on the union; b* on the
// inverse. Band bookkeeping is exact, not inflated.
BandedOperator bandProduct(const BandedOperator& a, const BandedOperator& b);
BandedOperator bandAdjoint(const BandedOperator& a);
BandedOperator bandSum(const BandedOperator& a, const BandedOperator& b,
                       Complex scale_b = Complex(1.0));
BandedOperator scaled(const BandedOperator& a, Complex s);

enum class NormMethod { kDenseEig, kPowerIteration };

struct NormReport {
  double value = 0.0;
  NormMethod method = NormMethod::kDenseEig;
  int iterations = 0;
  double residual = 0.0;
};

// Spectral norm: dense Hermitian eigendecomposition of a*a up to 2000
// points, power iteration beyond (all-ones start, relative tolerance 1e-10,
// at most 1e5 iterations; non-convergence is a numerical error).
NormReport operatorNorm(const BandedOperator& a,
                        std::optional<NormMethod> force = std::nullopt);

// Row/column Schur bound: max(deg_fwd, deg_bwd) * max |b_{x,y}| >= ||b||.
double schurBound(const BandedOperator& a);

// Spectral norm of a dense rectangular matrix (largest singular value).
double spectralNorm(const Eigen::MatrixXcd& m);

// The image of the block compression Phi_S: one matrix per point z, indexed
// by the ball S[z] (rows and columns in ascending point order).
class BlockFamily {
 public:
  BlockFamily(EntouragePtr window, std::vector<Eigen::MatrixXcd> blocks);
  const EntouragePtr& window() const { return window_; }
  const std::vector<Eigen::MatrixXcd>& blocks() const { return blocks_; }
  const Eigen::MatrixXcd& block(int z) const { return blocks_[z]; }
  double familyNorm() const;  // sup_z ||block(z)||
  std::vector<double> blockNorms() const;

 private:
  EntouragePtr window_;
  std::vector<Eigen::MatrixXcd> blocks_;
};

// Phi_S(a): the family of two-sided restrictions a|_{S[z] x S[z]}.
// Unital and completely positive; never increases norms.
BlockFamily compress(const BandedOperator& a, EntouragePtr window);

// Psi(c)_{x,y} = sum_z conj(eta_x(z)) c^{(z)}_{x,y} eta_y(z), summed over
// the z whose window ball contains both x and y. Requires the profile
// support to coincide with the compression window; the result lives on
// window ∘ window^{-1}. For c = Phi_S(b) this is the Schur multiplication
// of b by the Gram kernel of eta.
BandedOperator schurReconstruct(const BlockFamily& c, const L2Profile& p);

struct DefectReport {
  double defect = 0.0;          // ||Psi(Phi_S(b)) - b||
  double schur_estimate = 0.0;  // deg(t) * sup_t |1 - gram| * max |b|
  double epsilon = 0.0;         // target the estimate was requested against
};

// Quantitative factorization defect. Preconditions: band(b) ⊆ t and the
// profile displacement on t below eps / (||b|| * deg(t)). Guarantees
// defect <= schur_estimate < eps.
DefectReport nuclearityDefect(const BandedOperator& b, const L2Profile& p,
                              const Entourage& t, double eps);

}  // namespace coarse
