#include "attfuse/lyapunov.hpp"

#include <stdexcept>

namespace attfuse {

LyapunovSolution solve_lyapunov(const MatX& a, const MatX& q) {
  const Eigen::Index d = a.rows();
  if (a.cols() != d) throw std::invalid_argument("solve_lyapunov: A must be square");
  if (q.rows() != d || q.cols() != d)
    throw std::invalid_argument("solve_lyapunov: Q dimension mismatch");
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + q.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("solve_lyapunov: Q must be symmetric");

  // vec(A^T P) = (I (x) A^T) vec(P), vec(P A) = (A^T (x) I) vec(P)
  const MatX at = a.transpose();
  MatX m = MatX::Zero(d * d, d * d);
  for (Eigen::Index j = 0; j < d; ++j)
    m.block(j * d, j * d, d, d) = at;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index r = 0; r < d; ++r)
        m(j * d + r, i * d + r) += at(j, i);

  VecX rhs(d * d);
  for (Eigen::Index j = 0; j < d; ++j) rhs.segment(j * d, d) = -q.col(j);

  Eigen::PartialPivLU<MatX> lu(m);
  const VecX p_vec = lu.solve(rhs);
  MatX p(d, d);
  for (Eigen::Index j = 0; j < d; ++j) p.col(j) = p_vec.segment(j * d, d);
  p = 0.5 * (p + p.transpose());  // kill round-off asymmetry

  LyapunovSolution sol;
  sol.P = p;
  sol.residual_norm = (at * p + p * a + q).norm();
  if (!p.allFinite() || sol.residual_norm > 1e-9 * q.norm())
    throw std::runtime_error("solve_lyapunov: no reliable solution; A is likely not Hurwitz");
  Eigen::SelfAdjointEigenSolver<MatX> es(p);
  if (es.eigenvalues().minCoeff() <= 1e-10)
    throw std::runtime_error("solve_lyapunov: P not positive definite; A is not Hurwitz");
  return sol;
}

}  // namespace attfuse
