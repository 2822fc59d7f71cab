#include "attfuse/simulator.hpp"

#include <cmath>

namespace attfuse {

BodyDerivative body_dynamics_derivative(const InertiaMatrix& inertia,
                                        const RigidBodyState& state, const Vec3& tau) {
  BodyDerivative d;
  d.Q_dot = quat_derivative(state.Q, state.omega);
  d.omega_dot = inertia.J_inv * (-state.omega.cross(inertia.J * state.omega) + tau);
  return d;
}

namespace {

RigidBodyState rb_axpy(const RigidBodyState& s, const BodyDerivative& d, double h) {
  RigidBodyState out;
  out.Q = Quaternion::from_vec4(s.Q.as_vec4() + h * d.Q_dot);
  out.omega = s.omega + h * d.omega_dot;
  return out;
}

}  // namespace

RigidBodyState rk4_step(const InertiaMatrix& inertia, const RigidBodyState& state,
                        const Vec3& tau, double dt, double t) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be > 0");
  const BodyDerivative k1 = body_dynamics_derivative(inertia, state, tau);
  const BodyDerivative k2 = body_dynamics_derivative(inertia, rb_axpy(state, k1, dt / 2), tau);
  const BodyDerivative k3 = body_dynamics_derivative(inertia, rb_axpy(state, k2, dt / 2), tau);
  const BodyDerivative k4 = body_dynamics_derivative(inertia, rb_axpy(state, k3, dt), tau);
  RigidBodyState out;
  out.Q = Quaternion::from_vec4(state.Q.as_vec4() +
                                dt / 6.0 *
                                    (k1.Q_dot + 2 * k2.Q_dot + 2 * k3.Q_dot + k4.Q_dot));
  out.omega = state.omega + dt / 6.0 *
                                (k1.omega_dot + 2 * k2.omega_dot + 2 * k3.omega_dot +
                                 k4.omega_dot);
  out.Q = out.Q.normalized();  // renormalize once per full step
  if (!out.Q.as_vec4().allFinite() || !out.omega.allFinite()) throw SimDivergence(t);
  return out;
}

SensorRig::SensorRig(const SensorModel& model, std::vector<Vec3> r_list)
    : model_(model), r_(std::move(r_list)), rng_(model.seed) {
  held_b_.assign(r_.size(), Vec3::Zero());
  next_b_t_.assign(r_.size(), 0.0);
}

MeasurementFrame SensorRig::sense(const RigidBodyState& truth, double t) {
  const Mat3 rt = quat_to_rot(truth.Q).transpose();
  constexpr double kEps = 1e-9;  // absorb accumulated period round-off
  if (t >= next_gyro_t_ - kEps) {
    Vec3 noise = Vec3::Zero();
    if (model_.sigma_gyro > 0.0)
      noise = model_.sigma_gyro * Vec3(rng_.gaussian(), rng_.gaussian(), rng_.gaussian());
    held_gyro_ = truth.omega + bias_at(t) + noise;
    next_gyro_t_ += 1.0 / model_.rate_gyro_hz;
  }
  for (size_t i = 0; i < r_.size(); ++i) {
    const double rate = i == 0 ? model_.rate_acc_hz : model_.rate_mag_hz;
    const double sigma = i == 0 ? model_.sigma_acc : model_.sigma_mag;
    if (t >= next_b_t_[i] - kEps) {
      Vec3 b = rt * r_[i];
      if (sigma > 0.0)
        b += sigma * Vec3(rng_.gaussian(), rng_.gaussian(), rng_.gaussian());
      held_b_[i] = b.normalized();
      next_b_t_[i] += 1.0 / rate;
    }
  }
  MeasurementFrame f;
  f.t = t;
  f.omega_m = held_gyro_;
  f.b = held_b_;
  return f;
}

namespace {

void check_rate_divides(double rate_hz, double dt, const char* name) {
  const double period = 1.0 / rate_hz;
  const double ratio = period / dt;
  if (ratio < 1.0 - 1e-9 || std::abs(ratio - std::llround(ratio)) > 1e-9)
    throw std::invalid_argument(std::string("run_scenario: dt must divide the ") + name +
                                " sample period");
}

}  // namespace

std::vector<ScenarioSample> run_scenario(
    const ScenarioConfig& config,
    const std::function<void(const ScenarioSample&)>& observer) {
  const int steps = static_cast<int>(std::llround(config.duration_s / config.dt));
  check_rate_divides(config.sensors.rate_gyro_hz, config.dt, "gyro");
  check_rate_divides(config.sensors.rate_acc_hz, config.dt, "accelerometer");
  check_rate_divides(config.sensors.rate_mag_hz, config.dt, "magnetometer");
  SensorRig rig(config.sensors, config.r_list);
  RigidBodyState state = config.initial;
  std::vector<ScenarioSample> log;
  log.reserve(static_cast<size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) {
    const double t = k * config.dt;
    ScenarioSample sample;
    sample.t = t;
    sample.truth = state;
    sample.meas = rig.sense(state, t);
    switch (config.torque_source) {
      case TorqueSource::kZero:
        sample.tau = Vec3::Zero();
        break;
      case TorqueSource::kOpenLoop:
        sample.tau = config.open_loop_tau(t);
        break;
      case TorqueSource::kCallback:
        sample.tau = config.tau_callback(t, state);
        break;
    }
    if (observer) observer(sample);
    log.push_back(sample);
    if (k < steps) state = rk4_step(config.inertia, state, sample.tau, config.dt, t);
  }
  return log;
}

}  // namespace attfuse
