#pragma once

#include <stdexcept>
#include <vector>

#include "attfuse/linalg.hpp"
#include "attfuse/quaternion.hpp"

namespace attfuse {

// Measurement-driven attitude tracking: the control-side complementary filter,
// the torque law, and the closed-loop dynamics in the error coordinates
// Theta = (bbar_1..m, Qbar, omegabar) used for the stability analysis.

struct ControllerGains {
  std::vector<double> rho;    // > 0, one per reference vector
  std::vector<double> alpha;  // filter bandwidth, 1/s
  std::vector<double> delta;  // filter coupling
  double k = 1.0;             // damping, 1/s
};

struct InertiaMatrix {
  Mat3 J;
  Mat3 J_inv;
};

// Validates symmetry and positive definiteness.
InertiaMatrix make_inertia(const Mat3& j);

struct WMatrixResult {
  Mat3 W;             // -sum rho_i S(r_i)^2, symmetric
  double lambda_min;  // smallest eigenvalue
};

struct WNotPositiveDefinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateSpectrum : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Throws WNotPositiveDefinite when the reference set is collinear.
WMatrixResult w_matrix(const ControllerGains& gains, const std::vector<Vec3>& r_list);

// Desired trajectory sample: attitude, rates, and the desired body-frame
// directions b_i^d = R_d^T r_i.
struct DesiredState {
  Mat3 R_d = Mat3::Identity();
  Vec3 omega_d = Vec3::Zero();
  Vec3 omega_d_dot = Vec3::Zero();
  std::vector<Vec3> b_d;
};

DesiredState make_desired(const Mat3& r_d, const Vec3& omega_d,
                          const Vec3& omega_d_dot, const std::vector<Vec3>& r_list);

// A uniformly-sampled desired trajectory. Samples must satisfy the rotation
// kinematics R_d' = R_d S(omega_d): validate() finite-differences consecutive
// attitudes and rejects the set when the implied rate disagrees with the
// stored omega_d by more than 1e-6 (plus the O(dt^2) differencing error).
struct SampledTrajectory {
  double dt = 0.0;
  std::vector<Mat3> R_d;
  std::vector<Vec3> omega_d;
  std::vector<Vec3> omega_d_dot;

  void validate() const;  // throws std::invalid_argument on inconsistency
  DesiredState at(size_t k, const std::vector<Vec3>& r_list) const;
};

// Control filter: bhat_i' = -S(omega) b_i + alpha_i (b_i - bhat_i)
//                 + S(omega_d)(b_i - bhat_i) + delta_i S(b_i^d)(omega - omega_d).
std::vector<Vec3> tracking_filter_derivative(const ControllerGains& gains,
                                             const std::vector<Vec3>& b_hat,
                                             const std::vector<Vec3>& b,
                                             const Vec3& omega,
                                             const DesiredState& desired);

// tau = S(w)Jw - J S(w_d) w + J w_d' + J sum rho_i S(b_i^d) bhat_i - k J (w - w_d).
Vec3 control_torque(const ControllerGains& gains, const InertiaMatrix& inertia,
                    const Vec3& omega, const DesiredState& desired,
                    const std::vector<Vec3>& b_hat);

// Stabilization special case (omega_d = 0), the inertia-free law used on the
// bench: bhat_si' = alpha_i(b_i - bhat_si) - S(w) b_i + delta_i S(b_i^d) w and
// tau_s = sum rho_i S(b_i^d) bhat_si - k w.
std::vector<Vec3> stabilization_filter_derivative(const ControllerGains& gains,
                                                  const std::vector<Vec3>& b_hat,
                                                  const std::vector<Vec3>& b,
                                                  const Vec3& omega,
                                                  const std::vector<Vec3>& b_d);
Vec3 stabilization_torque(const ControllerGains& gains, const Vec3& omega,
                          const std::vector<Vec3>& b_d,
                          const std::vector<Vec3>& b_hat);

// Error coordinates: bbar_i = R_d (b_i - bhat_i), Qbar = Q * Q_d^-1,
// omegabar = R_d (omega - omega_d).
struct ClosedLoopState {
  std::vector<Vec3> b_bar;
  Quaternion Q_bar;
  Vec3 omega_bar = Vec3::Zero();
};

struct ClosedLoopDerivative {
  std::vector<Vec3> b_bar_dot;
  Vec4 Q_bar_dot = Vec4::Zero();
  Vec3 omega_bar_dot = Vec3::Zero();
};

ClosedLoopDerivative closed_loop_derivative(const ControllerGains& gains,
                                            const ClosedLoopState& state,
                                            const std::vector<Vec3>& r_list);

// One RK4 step of the closed-loop dynamics; Qbar renormalized after the step.
ClosedLoopState closed_loop_rk4_step(const ControllerGains& gains,
                                     const ClosedLoopState& state,
                                     const std::vector<Vec3>& r_list, double dt);

// The eight equilibria: Theta_1^+- = (0, (+-1, 0), 0) and
// Theta_{2,3,4}^+- = (0, (0, +-v_j), 0) with v_j the unit eigenvectors of W.
struct EquilibriaResult {
  std::vector<ClosedLoopState> states;  // ordered: +1, -1, then (v_j, -v_j) by eigenvalue
  std::vector<double> eigenvalues;      // ascending, one per v_j
  bool degenerate_eigenvalues = false;  // eigenvector basis not unique
};

EquilibriaResult equilibria_of(const Mat3& w, int m);

// V3 = sum (rho_i/delta_i) |bbar_i|^2 + 4 qbar^T W qbar + |omegabar|^2.
// The quaternion coefficient 4 is the one that makes V3 decrease along the
// closed loop and matches the 4*lambda_min(W) domain-of-attraction level.
double v3_value(const ControllerGains& gains, const ClosedLoopState& state,
                const std::vector<Vec3>& r_list);

// Analytic V3 rate along the closed loop:
// -2 k |omegabar|^2 - 2 sum alpha_i (rho_i/delta_i) |bbar_i|^2.
double v3_dot(const ControllerGains& gains, const ClosedLoopState& state);

struct InstabilityProbeResult {
  double v3_at_equilibrium;
  double v3_at_perturbed;
  double epsilon_sq_bound;  // drop requires eps^2 > bound
  bool escaped;             // left the 0.1-ball around the equilibrium
};

// Perturbs the unstable equilibrium (0, v_j) by Qbar* = (0, v_j) * (x0, eps v_j),
// x0 = sqrt(1 - eps^2), optionally with residual bbar*/omegabar* energy, then
// simulates forward and reports whether the trajectory leaves a 0.1-ball.
// Requires distinct eigenvalues of W (throws DegenerateSpectrum otherwise).
InstabilityProbeResult instability_probe(const ControllerGains& gains,
                                         const std::vector<Vec3>& r_list,
                                         int eigen_index, double eps,
                                         const std::vector<Vec3>& b_bar_star = {},
                                         const Vec3& omega_bar_star = Vec3::Zero(),
                                         double horizon_s = 30.0, double dt = 1e-3);

}  // namespace attfuse
