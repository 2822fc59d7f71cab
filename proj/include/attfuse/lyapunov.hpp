#pragma once

#include "attfuse/linalg.hpp"

namespace attfuse {

struct LyapunovSolution {
  MatX P;               // symmetric positive definite
  double residual_norm; // ||A^T P + P A + Q||_F
};

// Solves A^T P + P A = -Q for Hurwitz A and symmetric positive definite Q by
// vectorization: (I (x) A^T + A^T (x) I) vec(P) = -vec(Q). Dimensions here are
// small (<= 12), so the dense direct solve is fine. The result is symmetrized
// and checked: throws std::invalid_argument for asymmetric Q and
// std::runtime_error when P fails to be SPD or the residual is large (both of
// which indicate a non-Hurwitz A).
LyapunovSolution solve_lyapunov(const MatX& a, const MatX& q);

}  // namespace attfuse
