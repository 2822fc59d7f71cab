#include "attfuse/controller.hpp"

#include <cmath>

namespace attfuse {

InertiaMatrix make_inertia(const Mat3& j) {
  if ((j - j.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + j.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("make_inertia: J must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat3> es(j);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::invalid_argument("make_inertia: J must be positive definite");
  return {j, j.inverse()};
}

WMatrixResult w_matrix(const ControllerGains& gains, const std::vector<Vec3>& r_list) {
  if (r_list.size() < 2 || gains.rho.size() != r_list.size())
    throw std::invalid_argument("w_matrix: need >= 2 reference vectors with matching rho");
  Mat3 w = Mat3::Zero();
  for (size_t i = 0; i < r_list.size(); ++i) {
    const Mat3 s = skew(r_list[i]);
    w -= gains.rho[i] * s * s;
  }
  w = 0.5 * (w + w.transpose());
  Eigen::SelfAdjointEigenSolver<Mat3> es(w);
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin <= 1e-12)
    throw WNotPositiveDefinite("w_matrix: W not positive definite (collinear references)");
  return {w, lmin};
}

DesiredState make_desired(const Mat3& r_d, const Vec3& omega_d,
                          const Vec3& omega_d_dot, const std::vector<Vec3>& r_list) {
  DesiredState d;
  d.R_d = r_d;
  d.omega_d = omega_d;
  d.omega_d_dot = omega_d_dot;
  d.b_d.reserve(r_list.size());
  for (const auto& r : r_list) d.b_d.push_back(r_d.transpose() * r);
  return d;
}

void SampledTrajectory::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("SampledTrajectory: dt must be > 0");
  if (R_d.size() != omega_d.size() || R_d.size() != omega_d_dot.size() || R_d.size() < 2)
    throw std::invalid_argument("SampledTrajectory: inconsistent sample counts");
  for (size_t k = 1; k + 1 < R_d.size(); ++k) {
    // central difference of R_d against R_d S(omega_d)
    const Mat3 fd = (R_d[k + 1] - R_d[k - 1]) / (2.0 * dt);
    const Mat3 expected = R_d[k] * skew(omega_d[k]);
    const double tol = 1e-6 + dt * dt * (1.0 + omega_d[k].squaredNorm());
    if ((fd - expected).cwiseAbs().maxCoeff() > tol)
      throw std::invalid_argument(
          "SampledTrajectory: attitude samples disagree with omega_d at sample " +
          std::to_string(k));
  }
}

DesiredState SampledTrajectory::at(size_t k, const std::vector<Vec3>& r_list) const {
  if (k >= R_d.size()) throw std::out_of_range("SampledTrajectory::at");
  return make_desired(R_d[k], omega_d[k], omega_d_dot[k], r_list);
}

std::vector<Vec3> tracking_filter_derivative(const ControllerGains& gains,
                                             const std::vector<Vec3>& b_hat,
                                             const std::vector<Vec3>& b,
                                             const Vec3& omega,
                                             const DesiredState& desired) {
  const Vec3 omega_tilde = omega - desired.omega_d;
  std::vector<Vec3> out(b.size());
  for (size_t i = 0; i < b.size(); ++i) {
    const Vec3 bt = b[i] - b_hat[i];
    out[i] = -omega.cross(b[i]) + gains.alpha[i] * bt + desired.omega_d.cross(bt) +
             gains.delta[i] * desired.b_d[i].cross(omega_tilde);
  }
  return out;
}

Vec3 control_torque(const ControllerGains& gains, const InertiaMatrix& inertia,
                    const Vec3& omega, const DesiredState& desired,
                    const std::vector<Vec3>& b_hat) {
  const Mat3& J = inertia.J;
  const Vec3 omega_tilde = omega - desired.omega_d;
  Vec3 correction = Vec3::Zero();
  for (size_t i = 0; i < b_hat.size(); ++i)
    correction += gains.rho[i] * desired.b_d[i].cross(b_hat[i]);
  return omega.cross(J * omega) - J * desired.omega_d.cross(omega) +
         J * desired.omega_d_dot + J * correction - gains.k * (J * omega_tilde);
}

std::vector<Vec3> stabilization_filter_derivative(const ControllerGains& gains,
                                                  const std::vector<Vec3>& b_hat,
                                                  const std::vector<Vec3>& b,
                                                  const Vec3& omega,
                                                  const std::vector<Vec3>& b_d) {
  std::vector<Vec3> out(b.size());
  for (size_t i = 0; i < b.size(); ++i) {
    out[i] = gains.alpha[i] * (b[i] - b_hat[i]) - omega.cross(b[i]) +
             gains.delta[i] * b_d[i].cross(omega);
  }
  return out;
}

Vec3 stabilization_torque(const ControllerGains& gains, const Vec3& omega,
                          const std::vector<Vec3>& b_d,
                          const std::vector<Vec3>& b_hat) {
  Vec3 tau = -gains.k * omega;
  for (size_t i = 0; i < b_hat.size(); ++i)
    tau += gains.rho[i] * b_d[i].cross(b_hat[i]);
  return tau;
}

namespace {

// W without the positive-definiteness check; cheap enough for inner loops.
Mat3 w_matrix_raw(const ControllerGains& gains, const std::vector<Vec3>& r_list) {
  Mat3 w = Mat3::Zero();
  for (size_t i = 0; i < r_list.size(); ++i) {
    const Mat3 s = skew(r_list[i]);
    w -= gains.rho[i] * (s * s);
  }
  return w;
}

}  // namespace

ClosedLoopDerivative closed_loop_derivative(const ControllerGains& gains,
                                            const ClosedLoopState& state,
                                            const std::vector<Vec3>& r_list) {
  const Mat3 w = w_matrix_raw(gains, r_list);
  const double q0 = state.Q_bar.q0;
  const Vec3& q = state.Q_bar.q;
  const Vec3& wb = state.omega_bar;
  ClosedLoopDerivative out;
  out.b_bar_dot.resize(state.b_bar.size());
  Vec3 coupling = Vec3::Zero();
  for (size_t i = 0; i < state.b_bar.size(); ++i) {
    out.b_bar_dot[i] =
        -gains.alpha[i] * state.b_bar[i] - gains.delta[i] * r_list[i].cross(wb);
    coupling += gains.rho[i] * r_list[i].cross(state.b_bar[i]);
  }
  out.Q_bar_dot(0) = -0.5 * q.dot(wb);
  out.Q_bar_dot.segment<3>(1) = 0.5 * (q0 * wb + q.cross(wb));
  out.omega_bar_dot =
      -2.0 * (q0 * Mat3::Identity() - skew(q)) * (w * q) - coupling - gains.k * wb;
  return out;
}

namespace {

ClosedLoopState cl_axpy(const ClosedLoopState& s, const ClosedLoopDerivative& d,
                        double h) {
  ClosedLoopState out = s;
  for (size_t i = 0; i < s.b_bar.size(); ++i) out.b_bar[i] += h * d.b_bar_dot[i];
  out.Q_bar.q0 += h * d.Q_bar_dot(0);
  out.Q_bar.q += h * d.Q_bar_dot.segment<3>(1);
  out.omega_bar += h * d.omega_bar_dot;
  return out;
}

}  // namespace

ClosedLoopState closed_loop_rk4_step(const ControllerGains& gains,
                                     const ClosedLoopState& state,
                                     const std::vector<Vec3>& r_list, double dt) {
  const ClosedLoopDerivative k1 = closed_loop_derivative(gains, state, r_list);
  const ClosedLoopDerivative k2 =
      closed_loop_derivative(gains, cl_axpy(state, k1, dt / 2), r_list);
  const ClosedLoopDerivative k3 =
      closed_loop_derivative(gains, cl_axpy(state, k2, dt / 2), r_list);
  const ClosedLoopDerivative k4 =
      closed_loop_derivative(gains, cl_axpy(state, k3, dt), r_list);
  ClosedLoopState out = state;
  for (size_t i = 0; i < out.b_bar.size(); ++i)
    out.b_bar[i] += dt / 6.0 *
                    (k1.b_bar_dot[i] + 2 * k2.b_bar_dot[i] + 2 * k3.b_bar_dot[i] +
                     k4.b_bar_dot[i]);
  const Vec4 qd = dt / 6.0 *
                  (k1.Q_bar_dot + 2 * k2.Q_bar_dot + 2 * k3.Q_bar_dot + k4.Q_bar_dot);
  out.Q_bar.q0 += qd(0);
  out.Q_bar.q += qd.segment<3>(1);
  out.omega_bar += dt / 6.0 *
                   (k1.omega_bar_dot + 2 * k2.omega_bar_dot + 2 * k3.omega_bar_dot +
                    k4.omega_bar_dot);
  out.Q_bar = out.Q_bar.normalized();
  return out;
}

EquilibriaResult equilibria_of(const Mat3& w, int m) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(w);
  EquilibriaResult res;
  const Vec3 evals = es.eigenvalues();
  const double scale = std::max(1.0, evals.cwiseAbs().maxCoeff());
  res.degenerate_eigenvalues = (evals(1) - evals(0) < 1e-9 * scale) ||
                               (evals(2) - evals(1) < 1e-9 * scale);
  auto zero_state = [m](const Quaternion& qb) {
    ClosedLoopState s;
    s.b_bar.assign(static_cast<size_t>(m), Vec3::Zero());
    s.Q_bar = qb;
    return s;
  };
  res.states.push_back(zero_state(Quaternion(1.0, Vec3::Zero())));
  res.states.push_back(zero_state(Quaternion(-1.0, Vec3::Zero())));
  for (int j = 0; j < 3; ++j) {
    const Vec3 v = es.eigenvectors().col(j);
    res.eigenvalues.push_back(evals(j));
    res.states.push_back(zero_state(Quaternion(0.0, v)));
    res.states.push_back(zero_state(Quaternion(0.0, -v)));
  }
  return res;
}

double v3_value(const ControllerGains& gains, const ClosedLoopState& state,
                const std::vector<Vec3>& r_list) {
  const Mat3 w = w_matrix_raw(gains, r_list);
  double v = 0.0;
  for (size_t i = 0; i < state.b_bar.size(); ++i)
    v += gains.rho[i] / gains.delta[i] * state.b_bar[i].squaredNorm();
  v += 4.0 * state.Q_bar.q.dot(w * state.Q_bar.q);
  v += state.omega_bar.squaredNorm();
  return v;
}

double v3_dot(const ControllerGains& gains, const ClosedLoopState& state) {
  double v = -2.0 * gains.k * state.omega_bar.squaredNorm();
  for (size_t i = 0; i < state.b_bar.size(); ++i)
    v -= 2.0 * gains.alpha[i] * gains.rho[i] / gains.delta[i] *
         state.b_bar[i].squaredNorm();
  return v;
}

namespace {

double cl_distance(const ClosedLoopState& a, const ClosedLoopState& b) {
  double d2 = std::pow(a.Q_bar.q0 - b.Q_bar.q0, 2) + (a.Q_bar.q - b.Q_bar.q).squaredNorm() +
              (a.omega_bar - b.omega_bar).squaredNorm();
  for (size_t i = 0; i < a.b_bar.size(); ++i)
    d2 += (a.b_bar[i] - b.b_bar[i]).squaredNorm();
  return std::sqrt(d2);
}

}  // namespace

InstabilityProbeResult instability_probe(const ControllerGains& gains,
                                         const std::vector<Vec3>& r_list,
                                         int eigen_index, double eps,
                                         const std::vector<Vec3>& b_bar_star,
                                         const Vec3& omega_bar_star, double horizon_s,
                                         double dt) {
  if (!(eps > 0.0) || eps >= 0.5)
    throw std::invalid_argument("instability_probe: need 0 < eps < 0.5");
  const WMatrixResult wr = w_matrix(gains, r_list);
  Eigen::SelfAdjointEigenSolver<Mat3> es(wr.W);
  const Vec3 evals = es.eigenvalues();
  const double scale = std::max(1.0, evals.cwiseAbs().maxCoeff());
  if (evals(1) - evals(0) < 1e-9 * scale || evals(2) - evals(1) < 1e-9 * scale)
    throw DegenerateSpectrum("instability_probe: repeated eigenvalues of W");
  if (eigen_index < 0 || eigen_index > 2)
    throw std::invalid_argument("instability_probe: eigen_index in {0,1,2}");

  const int m = static_cast<int>(r_list.size());
  const Vec3 v = es.eigenvectors().col(eigen_index);
  const double lambda = evals(eigen_index);

  ClosedLoopState eq;
  eq.b_bar.assign(static_cast<size_t>(m), Vec3::Zero());
  eq.Q_bar = Quaternion(0.0, v);

  // Qbar* = (0, v) * (x0, eps v) = (-eps, x0 v): a slight rotation back along
  // the same axis, which is the direction in which the V3 drop is exactly
  // 4 lambda eps^2.
  const double x0 = std::sqrt(1.0 - eps * eps);
  ClosedLoopState pert;
  pert.b_bar = b_bar_star.empty() ? eq.b_bar : b_bar_star;
  pert.Q_bar = quat_mul(Quaternion(0.0, v), Quaternion(x0, eps * v));
  pert.omega_bar = omega_bar_star;

  InstabilityProbeResult res;
  res.v3_at_equilibrium = v3_value(gains, eq, r_list);
  res.v3_at_perturbed = v3_value(gains, pert, r_list);
  double residual = omega_bar_star.squaredNorm();
  for (size_t i = 0; i < pert.b_bar.size(); ++i)
    residual += gains.rho[i] / gains.delta[i] * pert.b_bar[i].squaredNorm();
  res.epsilon_sq_bound = residual / (4.0 * lambda);

  ClosedLoopState s = pert;
  const int steps = static_cast<int>(horizon_s / dt);
  for (int i = 0; i < steps; ++i) s = closed_loop_rk4_step(gains, s, r_list, dt);
  res.escaped = cl_distance(s, eq) > 0.1;
  return res;
}

}  // namespace attfuse
