#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "attfuse/controller.hpp"
#include "attfuse/filters.hpp"
#include "attfuse/linalg.hpp"
#include "attfuse/quaternion.hpp"
#include "attfuse/rng.hpp"

namespace attfuse {

// Ground-truth rigid-body plant with torque input and a biased, noisy sensor
// channel. Everything is deterministic under a fixed seed.

struct RigidBodyState {
  Quaternion Q;  // true attitude (body -> inertial)
  Vec3 omega = Vec3::Zero();
};

struct BodyDerivative {
  Vec4 Q_dot = Vec4::Zero();
  Vec3 omega_dot = Vec3::Zero();
};

struct SimDivergence : std::runtime_error {
  double t;
  explicit SimDivergence(double t_)
      : std::runtime_error("rigid-body state diverged"), t(t_) {}
};

// omega' = J^-1 (-S(omega) J omega + tau); Q' from the quaternion kinematics.
BodyDerivative body_dynamics_derivative(const InertiaMatrix& inertia,
                                        const RigidBodyState& state, const Vec3& tau);

// Classical RK4 with quaternion renormalization after the full step (torque
// held constant across stages).
RigidBodyState rk4_step(const InertiaMatrix& inertia, const RigidBodyState& state,
                        const Vec3& tau, double dt, double t = 0.0);

struct SensorModel {
  Vec3 eta = Vec3::Zero();    // constant gyro bias, rad/s
  double sigma_gyro = 0.0;    // Gaussian noise std per axis
  double sigma_acc = 0.0;     // vector channel 0
  double sigma_mag = 0.0;     // vector channels >= 1
  double rate_gyro_hz = 100.0;
  double rate_acc_hz = 100.0;
  double rate_mag_hz = 100.0;  // set to 10 to mirror the held magnetometer
  uint64_t seed = 1;
  double bias_ramp_per_s = 0.0;  // slow-ramp bias probe, default off
};

// Stateful sampler: channels below their rate hold the last sample
// (zero-order hold). Call sense() with strictly increasing t.
class SensorRig {
 public:
  SensorRig(const SensorModel& model, std::vector<Vec3> r_list);

  MeasurementFrame sense(const RigidBodyState& truth, double t);

  const SensorModel& model() const { return model_; }
  // Bias actually applied at time t (equals model.eta unless ramping).
  Vec3 bias_at(double t) const { return model_.eta + model_.bias_ramp_per_s * t * Vec3::Ones(); }

 private:
  SensorModel model_;
  std::vector<Vec3> r_;
  Rng rng_;
  Vec3 held_gyro_ = Vec3::Zero();
  std::vector<Vec3> held_b_;
  double next_gyro_t_ = 0.0;
  std::vector<double> next_b_t_;
};

// Torque sources for run_scenario.
enum class TorqueSource { kZero, kOpenLoop, kCallback };

struct ScenarioConfig {
  double duration_s = 10.0;
  double dt = 1e-3;
  InertiaMatrix inertia;
  RigidBodyState initial;
  std::vector<Vec3> r_list;
  SensorModel sensors;
  TorqueSource torque_source = TorqueSource::kZero;
  // kOpenLoop: tau(t); kCallback: tau(t, truth) — evaluated once per plant step.
  std::function<Vec3(double)> open_loop_tau;
  std::function<Vec3(double, const RigidBodyState&)> tau_callback;
};

// Time-indexed record of one simulation step.
struct ScenarioSample {
  double t;
  RigidBodyState truth;
  MeasurementFrame meas;
  Vec3 tau;
};

// Runs the plant at config.dt, sampling sensors per their rates. The observer
// callback (optional) sees every sample and may drive filters/controllers.
// Divergence is reported with its timestamp. Deterministic under a fixed seed.
std::vector<ScenarioSample> run_scenario(
    const ScenarioConfig& config,
    const std::function<void(const ScenarioSample&)>& observer = nullptr);

}  // namespace attfuse
