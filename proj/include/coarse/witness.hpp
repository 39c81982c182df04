#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coarse/space.hpp"

namespace coarse {

using Complex = std::complex<double>;

// Per-point sparse rows: rows[x] lists (point id, value) sorted by id.
template <typename T>
using SparseRows = std::vector<std::vector<std::pair<int, T>>>;

enum class FolnerVariant { kDiagonal, kNonempty };

// A finite Folner-type set A ⊆ X × X × N, stored per point x as the section
// sizes: count(x, y) = #{n : (y, n) in A_x}, with indices normalized to the
// prefix {0, .., count-1}. The support relation is {(x, y) : count(x,y) > 0}.
// Variant records the structural claim the witness makes: kDiagonal means
// every section carries the marker (x, 0); kNonempty only that sections are
// nonempty. The claim is *checked* by verifyFolner, not by the constructor.
class FolnerWitness {
 public:
  FolnerWitness(EntouragePtr support, SparseRows<std::int64_t> counts,
                std::int64_t max_index, FolnerVariant variant);

  const EntouragePtr& support() const { return support_; }
  const SparseRows<std::int64_t>& counts() const { return counts_; }
  std::int64_t count(int x, int y) const;
  std::int64_t sectionSize(int x) const;  // #A_x
  std::int64_t maxIndex() const { return max_index_; }
  FolnerVariant variant() const { return variant_; }

 private:
  EntouragePtr support_;
  SparseRows<std::int64_t> counts_;
  std::int64_t max_index_;
  FolnerVariant variant_;
};

// Normalized nonnegative l1 rows xi_x with sum 1, supported in a tracked
// relation: xi_x(y) != 0 implies (x, y) in support.
class L1Profile {
 public:
  L1Profile(EntouragePtr support, SparseRows<double> rows);
  const EntouragePtr& support() const { return support_; }
  const SparseRows<double>& rows() const { return rows_; }
  double value(int x, int y) const;
  double rowSum(int x) const;
  double l1Distance(int x, int y) const;  // ||xi_x - xi_y||_1

 private:
  EntouragePtr support_;
  SparseRows<double> rows_;
};

// Unit l2 rows eta_x supported in a tracked relation.
class L2Profile {
 public:
  L2Profile(EntouragePtr support, SparseRows<Complex> vectors);
  const EntouragePtr& support() const { return support_; }
  const SparseRows<Complex>& vectors() const { return vectors_; }
  Complex value(int x, int y) const;
  double norm(int x) const;
  double displacement(int x, int y) const;  // ||eta_x - eta_y||_2
  // <eta_y, eta_x> with the inner product linear in its first argument:
  // sum_z eta_y(z) * conj(eta_x(z)).
  Complex gram(int x, int y) const;

 private:
  EntouragePtr support_;
  SparseRows<Complex> vectors_;
};

// Hermitian kernel aligned to a symmetric support relation: values[i]
// belongs to support->pairs()[i]; k(x, y) = 0 off the support. The
// constructor enforces Hermitian symmetry to 1e-12; positivity is measured
// by the verification and factorization routines.
class KernelMatrix {
 public:
  KernelMatrix(EntouragePtr support, std::vector<Complex> values);
  const EntouragePtr& support() const { return support_; }
  const std::vector<Complex>& values() const { return values_; }
  Complex value(int x, int y) const;
  double maxAbs() const;

 private:
  EntouragePtr support_;
  std::vector<Complex> values_;
};

// --- verification reports ---------------------------------------------

struct FolnerReport {
  bool pass = false;
  // sup over tested pairs of #(A_x \triangle A_y) / #(A_x \cap A_y);
  // +inf when an intersection is empty, 0 when nothing was tested.
  double max_ratio = 0.0;
  std::optional<PointPair> worst;
  std::vector<std::string> violations;
  bool vacuous = false;  // tested relation had no pairs
};

struct L2Quality {
  double displacement = 0.0;  // sup over tested pairs of ||eta_x - eta_y||_2
  std::optional<PointPair> worst;
  bool vacuous = false;
};

struct KernelReport {
  double min_eigenvalue = 0.0;
  double sup_one_minus_k = 0.0;  // over tested pairs, |1 - k(x,y)|
  std::optional<PointPair> worst;
  bool vacuous = false;
};

// --- operations --------------------------------------------------------

// Checks the variant claim and the strict ratio condition
// #(A_x \triangle A_y) < eps * #(A_x \cap A_y) on every pair of t.
// Ties and empty intersections are violations.
FolnerReport verifyFolner(const FolnerWitness& w, const Entourage& t,
                          double eps);

struct ProfilePair {
  L1Profile l1;
  L2Profile l2;
};

// xi_x = zeta_x / ||zeta_x||_1 with zeta_x(y) = count(x, y), and
// eta_x = sqrt(xi_x) renormalized to unit l2 norm. If the witness passes
// verifyFolner at eps, then ||xi_x - xi_y||_1 < 2 eps and
// ||eta_x - eta_y||_2 < sqrt(2 eps) on the tested relation.
ProfilePair folnerToL2(const FolnerWitness& w);

// Gram kernel k(x, y) = <eta_y, eta_x>, supported on support ∘ support^{-1}.
KernelMatrix l2ToKernel(const L2Profile& p);

struct KernelFactorization {
  L2Profile profile;
  int band_power = 0;        // power m of the symmetrized support used
  double residual = 0.0;     // achieved ||a - b* b|| (spectral)
  double displacement_bound = 0.0;  // a-priori (2 sqrt(eps) + 2 eps)/sqrt(1-eps)
};

// Factor a PSD kernel with near-unit diagonal through l2: take the PSD
// square root, truncate it to growing powers of the symmetrized support
// until ||a - b* b|| < eps, and normalize the columns of the truncation.
KernelFactorization kernelToL2(const KernelMatrix& k, double eps);

struct FolnerDiscretization {
  FolnerWitness witness;
  std::int64_t grid = 0;        // denominator m of the rounding grid
  double achieved_ratio = 0.0;  // max ratio of the result on the tested relation
};

// Round xi_x(y) = |eta_x(y)|^2 onto a grid of denominator m (doubling m,
// capped at 1e9) until the rounded vectors track the exact ones to eps/4 in
// norm and eps/2 in pairwise l1 distance; diagonal entries are forced to at
// least 1. Requires displacement of p on t strictly below eps (eps < 1). The
// result is revalidated at ratio 2 eps/(1 - eps); failure is an error.
FolnerDiscretization l2ToFolner(const L2Profile& p, const Entourage& t,
                                double eps);

// Unit norms to 1e-12 (else error), then the displacement sup over t.
L2Quality verifyL2(const L2Profile& p, const Entourage& t);

// Min eigenvalue of the dense kernel and sup |1 - k| over t.
KernelReport verifyKernel(const KernelMatrix& k, const Entourage& t);

// Search r = 1..r_max for ball sections A_x = gens^r[x] x {0} passing
// verifyFolner on (t, eps); gens must be symmetric and contain the diagonal.
struct BallWitnessSearch {
  std::optional<FolnerWitness> witness;
  int radius = 0;  // first passing radius, 0 if none
};
BallWitnessSearch folnerFromBalls(const Entourage& gens, const Entourage& t,
                                  double eps, int r_max);

}  // namespace coarse
