#pragma once

#include <stdexcept>
#include <vector>

#include "attfuse/gains.hpp"
#include "attfuse/linalg.hpp"
#include "attfuse/quaternion.hpp"

namespace attfuse {

// n-order direct and passive complementary filters with gyro-bias estimation.
//
// Runtime form of the direct filter, per reference vector i:
//   x_i^(n-1) = -sum_{k=1..n-1} gamma_ik x_i^(n-1-k) + gamma_in (b_i - bhat_i)
//   bhat_i'   = -S(omega_m - etahat) b_i + x_i
//   etahat'   = +Gamma sum_i S(b_i) v_i,   v_i = B_i^T P_i z_i
// The chain [x, x', ..., x^(n-2)] is the integrated state; the top derivative
// is the algebraic relation above, so z_i in R^(3n) is assembled on demand
// from the chain and the current measurement.
//
// Passive filter:
//   X_i'    = A_i X_i + B_i (b_i - bhat_i)         (X_i in R^(3(n-1)))
//   bhat_i' = -S(omega_m - etahat) bhat_i + B_i^T P_i X_i
//   etahat' = -Gamma sum_i S(b_i) bhat_i
// For n = 1 there is no X state and the output injection is gamma_i1 (b_i - bhat_i).

enum class FilterVariant { kDirect, kPassive };
enum class Integrator { kEuler, kRk4 };

struct FilterDesignError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GainNotAdmissible : FilterDesignError {
  using FilterDesignError::FilterDesignError;
};
struct CollinearReferences : FilterDesignError {
  using FilterDesignError::FilterDesignError;
};
struct BadBiasGain : FilterDesignError {
  using FilterDesignError::FilterDesignError;
};

struct FilterDivergence : std::runtime_error {
  double t;
  explicit FilterDivergence(double t_)
      : std::runtime_error("filter state diverged (non-finite)"), t(t_) {}
};

struct MeasurementFrame {
  double t = 0.0;
  std::vector<Vec3> b;  // normalized body-frame direction measurements
  Vec3 omega_m = Vec3::Zero();
};

struct FilterDesign {
  FilterVariant variant = FilterVariant::kDirect;
  int order = 1;                   // n
  std::vector<GainVector> gammas;  // one per reference vector, each length n
  Mat3 Gamma = Mat3::Identity();   // bias gain (positive definite diagonal)
  std::vector<Vec3> r;             // normalized inertial reference vectors
  // Companion-form realization per vector. Direct: 3n x 3n; passive:
  // 3(n-1) x 3(n-1), empty at n = 1.
  std::vector<MatX> A, B, P;
  std::vector<MatX> BtP;  // cached B^T P

  int m() const { return static_cast<int>(r.size()); }
  // Dimension of the per-vector integrated chain/X state.
  int chain_dim() const { return 3 * (order - 1); }
};

// Builds and validates a design. Direct gains must be Hurwitz, passive gains
// must be in Hbar_n; Gamma must be diagonal with positive entries; at least
// two reference vectors must be non-collinear (||r_i x r_j|| > 1e-3).
// q_list supplies the Lyapunov right-hand sides Q_i (defaults to identity).
FilterDesign make_filter_design(FilterVariant variant, int order,
                                const std::vector<GainVector>& gammas,
                                const Mat3& Gamma,
                                const std::vector<MatX>& q_list,
                                const std::vector<Vec3>& r_list);

struct DirectFilterState {
  std::vector<VecX> chain;  // per vector: [x; x'; ...; x^(n-2)], 3(n-1)
  std::vector<Vec3> b_hat;
  Vec3 eta_hat = Vec3::Zero();
};

struct PassiveFilterState {
  std::vector<VecX> X;  // per vector, 3(n-1); zero-length when n = 1
  std::vector<Vec3> b_hat;
  Vec3 eta_hat = Vec3::Zero();
};

DirectFilterState make_direct_state(const FilterDesign& design,
                                    const std::vector<Vec3>& b_hat0);
PassiveFilterState make_passive_state(const FilterDesign& design,
                                      const std::vector<Vec3>& b_hat0);

// z_i in R^(3n): integrated chain plus the algebraic top block
// x^(n-1) = gamma_n (b_i - bhat_i) - sum_k gamma_k x^(n-1-k).
VecX z_full(const FilterDesign& design, const DirectFilterState& state,
            const std::vector<Vec3>& b, int i);

struct DirectDerivative {
  std::vector<VecX> chain_dot;
  std::vector<Vec3> b_hat_dot;
  Vec3 eta_hat_dot = Vec3::Zero();
};

struct PassiveDerivative {
  std::vector<VecX> x_dot;
  std::vector<Vec3> b_hat_dot;
  Vec3 eta_hat_dot = Vec3::Zero();
};

DirectDerivative direct_derivative(const FilterDesign& design,
                                   const DirectFilterState& state,
                                   const MeasurementFrame& meas);

PassiveDerivative passive_derivative(const FilterDesign& design,
                                     const PassiveFilterState& state,
                                     const MeasurementFrame& meas);

// Advances the state by one step (measurement held across RK4 stages).
// Requires 0 < dt <= 0.1. bhat is deliberately not renormalized. Throws
// FilterDivergence on a non-finite result; the caller's input state is the
// last good state.
DirectFilterState integrate_filter_step(const FilterDesign& design,
                                        const DirectFilterState& state,
                                        const MeasurementFrame& meas, double dt,
                                        Integrator integrator = Integrator::kEuler);
PassiveFilterState integrate_filter_step(const FilterDesign& design,
                                         const PassiveFilterState& state,
                                         const MeasurementFrame& meas, double dt,
                                         Integrator integrator = Integrator::kEuler);

// Ground truth for error evaluation (test/simulation side).
struct TruthFrame {
  std::vector<Vec3> b;  // true body-frame directions R^T r_i
  Vec3 eta = Vec3::Zero();
  Quaternion q;         // true attitude (for logging/attitude error)
  Vec3 omega = Vec3::Zero();
};

struct EstimationErrors {
  std::vector<Vec3> b_tilde;  // b_i - bhat_i
  Vec3 eta_tilde = Vec3::Zero();
  double max_b_tilde_norm() const {
    double m = 0.0;
    for (const auto& bt : b_tilde) m = std::max(m, bt.norm());
    return m;
  }
};

EstimationErrors estimation_errors(const std::vector<Vec3>& b_hat,
                                   const Vec3& eta_hat, const TruthFrame& truth);

// V1 = sum z_i^T P_i z_i + etatilde^T Gamma^-1 etatilde (direct filter).
double lyapunov_v1(const FilterDesign& design, const DirectFilterState& state,
                   const TruthFrame& truth);

// V2 = sum X_i^T P_i X_i + sum btilde_i^T btilde_i + etatilde^T Gamma^-1 etatilde.
double lyapunov_v2(const FilterDesign& design, const PassiveFilterState& state,
                   const TruthFrame& truth);

}  // namespace attfuse
