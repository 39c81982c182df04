#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "coarse/roe.hpp"

namespace coarse {

// A localization certificate: a unit vector eta supported in window[center]
// with ||a eta|| >= ratio * ||a||. block_ratio is the certified lower bound
// obtained from the two-sided window block (||a|_{S[center]}|| / ||a||);
// ratio is what the vector actually achieves (ratio >= block_ratio). For
// certificates produced by amplification the two coincide.
struct BetaCertificate {
  double constant = 0.0;  // the requested localization constant
  EntouragePtr window;
  std::vector<std::pair<int, Complex>> vector;  // sparse unit vector
  int center = -1;
  double ratio = 0.0;
  double block_ratio = 0.0;
};

struct BetaScan {
  std::optional<BetaCertificate> certificate;
  double best_block_ratio = 0.0;  // max_z ||a|_{S[z]}|| / ||a||
  int best_center = -1;
  NormReport norm;  // of the scanned operator
};

// Scan every center z, certify via the two-sided block a|_{S[z] x S[z]}:
// its top singular vector eta satisfies ||a eta|| >= ||a|_{S[z]}||. Emits a
// certificate when the best block reaches c * ||a||. Requires c in (0,1)
// and a nonzero operator.
BetaScan betaCheck(const BandedOperator& a, EntouragePtr window, double c);

// Norm amplification: for a contraction a (||a|| = 1) banded inside a
// symmetric reflexive t, a unit xi with S-bounded support and
// ||(a a*)^n xi|| > kappa^n, the telescoping product yields a first index j
// with ||(a a*)^{j+1} xi|| > kappa ||(a a*)^j xi||; eta = a*(a a*)^j xi
// normalized then satisfies ||a eta|| > kappa, supported in
// (t^{2n-1} ∘ s)[center].
BetaCertificate amplify(const BandedOperator& a, const Entourage& t,
                        const EntouragePtr& s, std::span<const Complex> xi,
                        double kappa, int n);

struct InverseNormEstimate {
  EntouragePtr band;
  EntouragePtr window;
  // max sampled ||a|| / ||Phi_S(a)|| over band operators; +inf if the
  // compression annihilates a nonzero sampled operator.
  double lower_bound = 0.0;
  int samples = 0;
  std::optional<BandedOperator> argmax;
};

// Monte-Carlo lower bound for the inverse-compression norm on E_band:
// structured candidates (all-ones, graph Laplacian when the diagonal is
// present), `trials` uniform [-1,1] fills, `trials` sign fills, then 100
// alternating top-singular-pair / band-projection refinement steps from the
// best candidate. Deterministic per seed.
InverseNormEstimate inverseCompressionNorm(EntouragePtr band,
                                           EntouragePtr window, int trials,
                                           std::uint64_t seed);

struct AmplifiedCompression {
  BandedOperator compressed;  // W* a V on the shared band
  double amplified_norm = 0.0;
  double compressed_norm = 0.0;
  std::optional<double> window_norm_amplified;
  std::optional<double> window_norm_compressed;
};

// Amplified operator a = [a_{ij}] acting on l2(X) ⊗ C^n (index layout
// x*n + i), compressed back to l2(X) by the isometries V, W built from unit
// vectors xi, eta: V delta_x = delta_x ⊗ xi_x/||xi_x|| (first basis vector
// when the slice vanishes), likewise W from eta. The compression never
// increases the norm, and commutes with window compressions up to the same
// inequality; both facts are checked numerically.
AmplifiedCompression matrixAmplifyCompress(
    const std::vector<std::vector<BandedOperator>>& blocks,
    std::span<const Complex> xi, std::span<const Complex> eta,
    const EntouragePtr& window);

struct UcpKernel {
  KernelMatrix kernel;
  double min_eigenvalue = 0.0;
  double sup_one_minus_k = 0.0;  // over the tested relation
};

// Kernel read off the unital completely positive composite Psi ∘ Phi_S on
// matrix units: k(x, y) = <Psi(Phi_S(e_{x,y})) delta_y, delta_x>
// = <eta_y, eta_x> summed over shared window balls; support window ∘
// window^{-1}. Positive semidefiniteness below -1e-9 is an error.
UcpKernel kernelFromUcp(const Entourage& t, const EntouragePtr& s,
                        const L2Profile& p);

}  // namespace coarse
