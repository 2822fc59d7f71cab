#pragma once

#include <string>
#include <vector>

#include "attfuse/linalg.hpp"

namespace attfuse {

// Gain vector gamma = (gamma_1, ..., gamma_n) for the filter polynomial
// P(s) = s^n + gamma_1 s^(n-1) + ... + gamma_n.
using GainVector = VecX;

enum class StabilityStatus {
  kHurwitz,
  kNotHurwitz,
  kIndeterminate,  // a Routh pivot too small to sign reliably
};

// Monic coefficient list [1, gamma_1, ..., gamma_n]. Rejects empty gamma.
VecX char_poly_coeffs(const GainVector& gamma);

// n x n companion matrix: superdiagonal ones, last row (-gamma_n ... -gamma_1).
MatX companion_matrix(const GainVector& gamma);

// Drops the last component: (gamma_1, ..., gamma_{n-1}). Rejects n = 1.
GainVector project_gamma(const GainVector& gamma);

// Routh-array test for all roots strictly in the open left half-plane.
// Exact-zero pivots (structurally marginal polynomials) are kNotHurwitz;
// pivots with 0 < |pivot| < 1e-12 are kIndeterminate.
StabilityStatus is_hurwitz(const GainVector& gamma);

// gamma in Hbar_n: gamma Hurwitz and project_gamma(gamma) Hurwitz.
// For n = 1 there is no projection and the test reduces to is_hurwitz.
StabilityStatus in_hbar(const GainVector& gamma);

// gamma_l = C(n,l) alpha^l, so P(s) = (s + alpha)^n. Requires alpha > 0.
GainVector binomial_gains(int n, double alpha);

// E (x) I_k; spectrum of the result is sigma(E) with multiplicity k.
MatX kron_with_identity(const MatX& e, int k);

// Plain-text gain file: order, per-vector gamma lists, alpha if binomial.
struct GainFile {
  int order = 1;
  std::vector<GainVector> gammas;
  double alpha = 0.0;  // > 0 when the gains came from binomial_gains
};

void save_gain_file(const std::string& path, const GainFile& gf);
GainFile load_gain_file(const std::string& path);

}  // namespace attfuse
