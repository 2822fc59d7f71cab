#include <gtest/gtest.h>

#include "attfuse/gains.hpp"
#include "attfuse/lyapunov.hpp"
#include "oracles.hpp"

using namespace attfuse;

TEST(Lyapunov, DiagonalBalance) {
  const LyapunovSolution s = solve_lyapunov(-MatX::Identity(3, 3), 2.0 * MatX::Identity(3, 3));
  EXPECT_TRUE(s.P.isApprox(MatX::Identity(3, 3), 1e-12));
  EXPECT_LT(s.residual_norm, 1e-12);
}

TEST(Lyapunov, ScalarClosedForm) {
  MatX a(1, 1), q(1, 1);
  a << -2.5;
  q << 3.0;
  const LyapunovSolution s = solve_lyapunov(a, q);
  EXPECT_NEAR(s.P(0, 0), 3.0 / (2.0 * 2.5), 1e-14);
}

TEST(Lyapunov, CompanionKroneckerCase) {
  GainVector g(2);
  g << 2, 1;
  const MatX a = kron_with_identity(companion_matrix(g), 3);
  const LyapunovSolution s = solve_lyapunov(a, MatX::Identity(6, 6));
  EXPECT_LT(s.residual_norm, 1e-10);
  Eigen::SelfAdjointEigenSolver<MatX> es(s.P);
  EXPECT_GT(es.eigenvalues().minCoeff(), 1e-10);
}

TEST(Lyapunov, RejectsBadInputs) {
  MatX q_asym(2, 2);
  q_asym << 1, 0.5, -0.5, 1;
  EXPECT_THROW(solve_lyapunov(-MatX::Identity(2, 2), q_asym), std::invalid_argument);

  // A with a positive spectrum: P solves but is negative definite.
  EXPECT_THROW(solve_lyapunov(MatX::Identity(2, 2), MatX::Identity(2, 2)),
               std::runtime_error);
  // Eigenvalue pair summing to zero: the Kronecker-sum system is singular.
  MatX a(2, 2);
  a << 1, 0, 0, -1;
  EXPECT_THROW(solve_lyapunov(a, MatX::Identity(2, 2)), std::runtime_error);
}

TEST(Lyapunov, RandomDesignsSolveAndAgreeWithOdeRoute) {
  Rng rng(99);
  for (int it = 0; it < 20; ++it) {
    const int n = 1 + static_cast<int>(rng.next_u64() % 3);
    const double alpha = rng.uniform(0.5, 2.5);
    const MatX a = kron_with_identity(companion_matrix(binomial_gains(n, alpha)), 3);
    // random SPD Q = M M^T + I
    MatX m0 = MatX::Zero(3 * n, 3 * n);
    for (Eigen::Index i = 0; i < m0.rows(); ++i)
      for (Eigen::Index j = 0; j < m0.cols(); ++j) m0(i, j) = 0.3 * rng.gaussian();
    const MatX q = m0 * m0.transpose() + MatX::Identity(3 * n, 3 * n);

    const LyapunovSolution s = solve_lyapunov(a, q);
    EXPECT_LE(s.residual_norm, 1e-9 * q.norm());
    EXPECT_LT((s.P - s.P.transpose()).cwiseAbs().maxCoeff(), 1e-10);
    Eigen::SelfAdjointEigenSolver<MatX> es(s.P);
    EXPECT_GT(es.eigenvalues().minCoeff(), 1e-10);

    const MatX p_ode = oracles::lyapunov_by_ode(a, q, 80.0 / alpha, 2e-3 / alpha);
    EXPECT_LT((s.P - p_ode).cwiseAbs().maxCoeff(), 1e-8 * std::max(1.0, s.P.norm()));
  }
}
