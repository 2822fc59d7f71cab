#include "attfuse/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>
#include <utility>

#include "attfuse/triad.hpp"

namespace attfuse {

std::string RunMetrics::to_text() const {
  std::ostringstream os;
  os << "samples = " << samples << "\n";
  if (has_truth) {
    os << "final_attitude_err_deg = " << CsvWriter::format(final_attitude_err_deg) << "\n"
       << "peak_attitude_err_deg = " << CsvWriter::format(peak_attitude_err_deg) << "\n"
       << "final_eta_tilde = " << CsvWriter::format(final_eta_tilde) << "\n"
       << "max_eta_tilde = " << CsvWriter::format(max_eta_tilde) << "\n"
       << "final_max_b_tilde = " << CsvWriter::format(final_max_b_tilde) << "\n"
       << "settle_threshold_deg = " << CsvWriter::format(settle_threshold_deg) << "\n"
       << "settling_time_s = " << CsvWriter::format(settling_time_s) << "\n"
       << "settled = " << (settled() ? 1 : 0) << "\n"
       << "v_violation_count = " << v_violation_count << "\n";
  }
  return os.str();
}

InertiaMatrix default_inertia() {
  Mat3 j = Mat3::Zero();
  j.diagonal() << 0.0082, 0.0082, 0.0149;
  return make_inertia(j);
}

std::vector<Vec3> bench_references() {
  return {Vec3(0.0, 0.0, 1.0), Vec3(0.434, -0.04, 0.899).normalized()};
}

Vec3 RateProfile::omega(double t) const {
  return {amp.x() * std::sin(freq.x() * t + phase.x()),
          amp.y() * std::sin(freq.y() * t + phase.y()),
          amp.z() * std::sin(freq.z() * t + phase.z())};
}

Vec3 RateProfile::omega_dot(double t) const {
  return {amp.x() * freq.x() * std::cos(freq.x() * t + phase.x()),
          amp.y() * freq.y() * std::cos(freq.y() * t + phase.y()),
          amp.z() * freq.z() * std::cos(freq.z() * t + phase.z())};
}

namespace {

std::vector<std::string> estimation_columns(const EstimationSetup& setup, bool truth,
                                            bool tau) {
  const int m = static_cast<int>(setup.r_list.size());
  const int chain_blocks = setup.order - 1;
  std::vector<std::string> cols{"t"};
  auto push3 = [&cols](const std::string& base) {
    cols.push_back(base + "_x");
    cols.push_back(base + "_y");
    cols.push_back(base + "_z");
  };
  if (truth) {
    cols.insert(cols.end(), {"q0", "q1", "q2", "q3"});
    push3("w");
  }
  for (int i = 0; i < m; ++i) push3("b" + std::to_string(i + 1) + "m");
  push3("wm");
  for (int i = 0; i < m; ++i) push3("bhat" + std::to_string(i + 1));
  push3("etahat");
  for (int i = 0; i < m; ++i)
    for (int blk = 0; blk < chain_blocks; ++blk)
      push3("s" + std::to_string(i + 1) + "_" + std::to_string(blk));
  cols.insert(cols.end(), {"qhat0", "qhat1", "qhat2", "qhat3"});
  if (truth) {
    cols.insert(cols.end(),
                {"att_err_rad", "eta_tilde_norm", "b_tilde_max", "V"});
  }
  if (tau) push3("tau");
  return cols;
}

void append3(std::vector<double>& row, const Vec3& v) {
  row.push_back(v.x());
  row.push_back(v.y());
  row.push_back(v.z());
}

}  // namespace

EstimationOutput run_estimation_stream(const EstimationSetup& setup,
                                       const std::vector<MeasurementFrame>& stream,
                                       const std::vector<TruthFrame>* truth) {
  return run_estimation_stream_tau(setup, stream, truth, nullptr);
}

EstimationOutput run_estimation_stream_tau(const EstimationSetup& setup,
                                           const std::vector<MeasurementFrame>& stream,
                                           const std::vector<TruthFrame>* truth,
                                           const std::vector<Vec3>* tau) {
  if (stream.empty()) throw std::invalid_argument("run_estimation_stream: empty stream");
  if (truth && truth->size() != stream.size())
    throw std::invalid_argument("run_estimation_stream: truth/stream size mismatch");

  const FilterDesign design = make_filter_design(
      setup.variant, setup.order, setup.gammas, setup.Gamma, {}, setup.r_list);
  const int m = design.m();

  DirectFilterState ds;
  PassiveFilterState ps;
  const bool direct = setup.variant == FilterVariant::kDirect;
  if (direct)
    ds = make_direct_state(design, stream.front().b);
  else
    ps = make_passive_state(design, stream.front().b);

  EstimationOutput out;
  CsvWriter csv(estimation_columns(setup, truth != nullptr, tau != nullptr));
  Quaternion q_hat;  // last good TRIAD estimate
  double prev_v = 0.0;

  for (size_t k = 0; k < stream.size(); ++k) {
    const MeasurementFrame& meas = stream[k];
    const std::vector<Vec3>& b_hat = direct ? ds.b_hat : ps.b_hat;
    const Vec3& eta_hat = direct ? ds.eta_hat : ps.eta_hat;

    std::vector<Vec3> b_hat_n(b_hat.size());
    for (size_t i = 0; i < b_hat.size(); ++i) b_hat_n[i] = b_hat[i].normalized();
    try {
      const Mat3 r_est = triad_estimate({b_hat_n[0], design.r[0]},
                                        {b_hat_n[1], design.r[1]});
      q_hat = rot_to_quat(r_est);
    } catch (const TriadDegenerate&) {
      // hold the previous estimate through a transiently collinear pair
    }

    std::vector<double> row{meas.t};
    double v = 0.0;
    if (truth) {
      const TruthFrame& tf = (*truth)[k];
      const Quaternion q_true = tf.q;
      row.insert(row.end(), {q_true.q0, q_true.q.x(), q_true.q.y(), q_true.q.z()});
      append3(row, tf.omega);
    }
    for (int i = 0; i < m; ++i) append3(row, meas.b[static_cast<size_t>(i)]);
    append3(row, meas.omega_m);
    for (int i = 0; i < m; ++i) append3(row, b_hat[static_cast<size_t>(i)]);
    append3(row, eta_hat);
    for (int i = 0; i < m; ++i) {
      const VecX& c = direct ? ds.chain[static_cast<size_t>(i)] : ps.X[static_cast<size_t>(i)];
      for (Eigen::Index j = 0; j < c.size(); ++j) row.push_back(c(j));
    }
    row.insert(row.end(), {q_hat.q0, q_hat.q.x(), q_hat.q.y(), q_hat.q.z()});

    if (truth) {
      const TruthFrame& tf = (*truth)[k];
      const double att_err = attitude_angle_error(q_hat, tf.q);
      double bt_max = 0.0;
      for (int i = 0; i < m; ++i)
        bt_max = std::max(bt_max, (tf.b[static_cast<size_t>(i)] - b_hat_n[static_cast<size_t>(i)]).norm());
      const Vec3 eta_tilde = tf.eta - eta_hat;
      v = direct ? lyapunov_v1(design, ds, tf) : lyapunov_v2(design, ps, tf);
      row.insert(row.end(), {att_err, eta_tilde.norm(), bt_max, v});

      out.att_err_rad.push_back(att_err);
      out.eta_tilde_norm.push_back(eta_tilde.norm());
      out.max_b_tilde_norm.push_back(bt_max);
      out.v_lyap.push_back(v);
      if (k > 0 && v > prev_v * (1.0 + 1e-8)) ++out.metrics.v_violation_count;
      prev_v = v;
    }
    if (tau) append3(row, (*tau)[k]);
    csv.add_row(row);
    out.t.push_back(meas.t);

    std::vector<double> frow;
    for (int i = 0; i < m; ++i) append3(frow, b_hat[static_cast<size_t>(i)]);
    append3(frow, eta_hat);
    for (int i = 0; i < m; ++i) {
      const VecX& c = direct ? ds.chain[static_cast<size_t>(i)] : ps.X[static_cast<size_t>(i)];
      for (Eigen::Index j = 0; j < c.size(); ++j) frow.push_back(c(j));
    }
    out.filter_rows.push_back(std::move(frow));

    if (k + 1 < stream.size()) {
      const double dt = stream[k + 1].t - meas.t;
      if (direct)
        ds = integrate_filter_step(design, ds, meas, dt, setup.integrator);
      else
        ps = integrate_filter_step(design, ps, meas, dt, setup.integrator);
    }
  }

  out.csv = csv.text();
  out.metrics.samples = static_cast<int>(stream.size());
  out.metrics.has_truth = truth != nullptr;
  if (truth) {
    out.metrics.final_attitude_err_deg = out.att_err_rad.back() * 180.0 / M_PI;
    out.metrics.peak_attitude_err_deg =
        *std::max_element(out.att_err_rad.begin(), out.att_err_rad.end()) * 180.0 / M_PI;
    out.metrics.final_eta_tilde = out.eta_tilde_norm.back();
    out.metrics.max_eta_tilde =
        *std::max_element(out.eta_tilde_norm.begin(), out.eta_tilde_norm.end());
    out.metrics.final_max_b_tilde = out.max_b_tilde_norm.back();
    // settling: earliest time after which the error stays below threshold
    const double thr = out.metrics.settle_threshold_deg * M_PI / 180.0;
    double settle = -1.0;
    for (size_t k = 0; k < out.att_err_rad.size(); ++k) {
      if (out.att_err_rad[k] >= thr)
        settle = -1.0;
      else if (settle < 0.0)
        settle = out.t[k];
    }
    out.metrics.settling_time_s = settle;
  }
  return out;
}

std::vector<ImuLogRecord> simulate_imu_log(const SimEstimationScenario& scenario) {
  std::vector<ImuLogRecord> records;
  const auto [stream, truth] = simulate_measurements(scenario);
  records.reserve(stream.size());
  for (const auto& f : stream) {
    ImuLogRecord r;
    r.t = f.t;
    r.acc = f.b[0];  // unit-norm gravity direction
    r.mag = f.b[1];
    r.gyro = f.omega_m;
    records.push_back(r);
  }
  return records;
}

std::pair<std::vector<MeasurementFrame>, std::vector<TruthFrame>> simulate_measurements(
    const SimEstimationScenario& scenario) {
  const double stride_f = scenario.dt_filter / scenario.dt_plant;
  const int stride = static_cast<int>(std::llround(stride_f));
  if (std::abs(stride_f - stride) > 1e-9 || stride < 1)
    throw std::invalid_argument("dt_filter must be an integer multiple of dt_plant");

  ScenarioConfig cfg;
  cfg.duration_s = scenario.duration_s;
  cfg.dt = scenario.dt_plant;
  cfg.inertia = scenario.inertia;
  cfg.initial.Q = scenario.Q0.normalized();
  cfg.initial.omega = scenario.profile.omega(0.0);
  cfg.r_list = scenario.setup.r_list;
  cfg.sensors = scenario.sensors;
  cfg.torque_source = TorqueSource::kOpenLoop;
  const InertiaMatrix inertia = scenario.inertia;
  const RateProfile profile = scenario.profile;
  cfg.open_loop_tau = [inertia, profile](double t) {
    const Vec3 w = profile.omega(t);
    return Vec3(inertia.J * profile.omega_dot(t) + w.cross(inertia.J * w));
  };

  std::vector<MeasurementFrame> stream;
  std::vector<TruthFrame> truth;
  const auto samples = run_scenario(cfg);
  for (size_t k = 0; k < samples.size(); k += static_cast<size_t>(stride)) {
    const ScenarioSample& s = samples[k];
    stream.push_back(s.meas);
    TruthFrame tf;
    tf.q = s.truth.Q;
    tf.omega = s.truth.omega;
    const Mat3 rt = quat_to_rot(s.truth.Q).transpose();
    for (const auto& r : cfg.r_list) tf.b.push_back(rt * r);
    tf.eta = scenario.sensors.eta + scenario.sensors.bias_ramp_per_s * s.t * Vec3::Ones();
    truth.push_back(tf);
  }
  return {stream, truth};
}

EstimationOutput run_estimation_sim(const SimEstimationScenario& scenario) {
  const auto [stream, truth] = simulate_measurements(scenario);
  std::vector<Vec3> tau(stream.size());
  for (size_t k = 0; k < stream.size(); ++k) {
    const double t = stream[k].t;
    const Vec3 w = scenario.profile.omega(t);
    tau[k] = scenario.inertia.J * scenario.profile.omega_dot(t) +
             w.cross(scenario.inertia.J * w);
  }
  return run_estimation_stream_tau(scenario.setup, stream, &truth, &tau);
}

EstimationOutput run_estimation_replay(const EstimationSetup& setup,
                                       const std::vector<ImuLogRecord>& records) {
  std::vector<MeasurementFrame> stream;
  stream.reserve(records.size());
  for (const auto& r : records) {
    MeasurementFrame f;
    f.t = r.t;
    f.b = {r.acc, r.mag};
    f.omega_m = r.gyro;
    stream.push_back(f);
  }
  return run_estimation_stream(setup, stream, nullptr);
}

SimEstimationScenario acceptance_estimation_scenario(FilterVariant variant, int order,
                                                     double gamma_bias) {
  SimEstimationScenario s;
  s.setup.variant = variant;
  s.setup.order = order;
  s.setup.r_list = bench_references();
  const GainVector g = binomial_gains(order, 1.0);
  s.setup.gammas = {g, g};
  s.setup.Gamma = gamma_bias * Mat3::Identity();
  s.setup.integrator = Integrator::kEuler;
  s.duration_s = 60.0;
  s.dt_plant = 1e-3;
  s.dt_filter = 0.01;
  s.Q0 = Quaternion::identity();
  s.sensors.eta = Vec3(0.02, -0.01, 0.03);
  s.sensors.seed = 42;
  return s;
}

ControlScenario bench_regression_scenario() {
  ControlScenario c;
  c.gains.rho = {1.66, 0.1161};
  c.gains.alpha = {6.0, 10.0};
  c.gains.delta = {1.0, 1.0};
  c.gains.k = 0.2621;
  c.r_list = bench_references();
  EulerAngles e;
  e.roll_deg = -18.478;
  e.pitch_deg = 41.192;
  e.yaw_deg = 2.847;
  c.Q0 = euler_to_quat(e);
  c.duration_s = 30.0;
  c.sensors.seed = 7;
  return c;
}

ControlOutput run_control(const ControlScenario& scenario) {
  const int m = static_cast<int>(scenario.r_list.size());
  const double dt_c = 1.0 / scenario.control_rate_hz;
  const DesiredState desired =
      make_desired(Mat3::Identity(), Vec3::Zero(), Vec3::Zero(), scenario.r_list);
  w_matrix(scenario.gains, scenario.r_list);  // validates positive definiteness

  SensorModel ctrl_sensors = scenario.sensors;
  ctrl_sensors.rate_gyro_hz = scenario.control_rate_hz;
  ctrl_sensors.rate_acc_hz = std::min(ctrl_sensors.rate_acc_hz, scenario.control_rate_hz);
  ctrl_sensors.rate_mag_hz = std::min(ctrl_sensors.rate_mag_hz, scenario.control_rate_hz);
  SensorRig rig(ctrl_sensors, scenario.r_list);

  struct CtrlState {
    std::vector<Vec3> b_hat;
    bool initialized = false;
    Vec3 tau = Vec3::Zero();
    double next_t = 0.0;
  };
  CtrlState ctrl;
  ctrl.b_hat.assign(static_cast<size_t>(m), Vec3::Zero());

  ControlOutput out;
  std::vector<std::string> cols{"t", "q0", "q1", "q2", "q3", "w_x", "w_y", "w_z"};
  for (int i = 0; i < m; ++i) {
    const std::string b = "b" + std::to_string(i + 1);
    cols.insert(cols.end(), {b + "m_x", b + "m_y", b + "m_z"});
  }
  for (int i = 0; i < m; ++i) {
    const std::string b = "bhat" + std::to_string(i + 1);
    cols.insert(cols.end(), {b + "_x", b + "_y", b + "_z"});
  }
  for (int i = 0; i < m; ++i) {
    const std::string b = "bbar" + std::to_string(i + 1);
    cols.insert(cols.end(), {b + "_x", b + "_y", b + "_z"});
  }
  cols.insert(cols.end(), {"roll_deg", "pitch_deg", "yaw_deg", "att_err_rad", "V3",
                           "tau_x", "tau_y", "tau_z"});
  CsvWriter csv(cols);

  ScenarioConfig cfg;
  cfg.duration_s = scenario.duration_s;
  cfg.dt = scenario.dt_plant;
  cfg.inertia = scenario.inertia;
  cfg.initial.Q = scenario.Q0.normalized();
  cfg.initial.omega = scenario.omega0;
  cfg.r_list = scenario.r_list;
  cfg.sensors = scenario.sensors;  // plant-level log sensors unused here
  cfg.torque_source = TorqueSource::kCallback;

  const ControllerGains gains = scenario.gains;
  const InertiaMatrix inertia = scenario.inertia;
  const bool stab_law = scenario.use_stabilization_law;

  const bool raw_vectors = scenario.use_raw_vectors;
  cfg.tau_callback = [&, dt_c](double t, const RigidBodyState& truth) -> Vec3 {
    if (t >= ctrl.next_t - 1e-9) {
      const MeasurementFrame meas = rig.sense(truth, t);
      if (!ctrl.initialized) {
        ctrl.b_hat = meas.b;
        ctrl.initialized = true;
      }
      if (raw_vectors) ctrl.b_hat = meas.b;  // comparison baseline: no filtering
      ctrl.tau = stab_law
                     ? stabilization_torque(gains, meas.omega_m, desired.b_d, ctrl.b_hat)
                     : control_torque(gains, inertia, meas.omega_m, desired, ctrl.b_hat);
      const std::vector<Vec3> db =
          stab_law ? stabilization_filter_derivative(gains, ctrl.b_hat, meas.b,
                                                     meas.omega_m, desired.b_d)
                   : tracking_filter_derivative(gains, ctrl.b_hat, meas.b, meas.omega_m,
                                                desired);
      // log at the control rate, with the pre-update filter state
      const EulerAngles e = quat_to_euler(truth.Q);
      ClosedLoopState theta;
      theta.Q_bar = truth.Q;
      theta.omega_bar = truth.omega;
      const Mat3 rt = quat_to_rot(truth.Q).transpose();
      for (int i = 0; i < m; ++i)
        theta.b_bar.push_back(rt * scenario.r_list[static_cast<size_t>(i)] -
                              ctrl.b_hat[static_cast<size_t>(i)]);
      const double v3 = v3_value(gains, theta, scenario.r_list);
      const double att = attitude_angle_error(truth.Q, Quaternion::identity());
      std::vector<double> row{t, truth.Q.q0, truth.Q.q.x(), truth.Q.q.y(), truth.Q.q.z()};
      append3(row, truth.omega);
      for (int i = 0; i < m; ++i) append3(row, meas.b[static_cast<size_t>(i)]);
      for (int i = 0; i < m; ++i) append3(row, ctrl.b_hat[static_cast<size_t>(i)]);
      for (int i = 0; i < m; ++i) append3(row, theta.b_bar[static_cast<size_t>(i)]);
      row.insert(row.end(), {e.roll_deg, e.pitch_deg, e.yaw_deg, att, v3});
      append3(row, ctrl.tau);
      csv.add_row(row);
      out.t.push_back(t);
      out.roll_deg.push_back(e.roll_deg);
      out.pitch_deg.push_back(e.pitch_deg);
      out.yaw_deg.push_back(e.yaw_deg);
      out.v3.push_back(v3);
      out.tau.push_back(ctrl.tau);
      out.att_err_rad.push_back(att);

      for (size_t i = 0; i < ctrl.b_hat.size(); ++i) ctrl.b_hat[i] += dt_c * db[i];
      ctrl.next_t += dt_c;
    }
    return ctrl.tau;
  };

  run_scenario(cfg);

  out.csv = csv.text();
  out.metrics.has_truth = true;
  out.metrics.samples = static_cast<int>(out.t.size());
  out.metrics.final_attitude_err_deg = out.att_err_rad.back() * 180.0 / M_PI;
  out.metrics.peak_attitude_err_deg =
      *std::max_element(out.att_err_rad.begin(), out.att_err_rad.end()) * 180.0 / M_PI;
  for (size_t k = 1; k < out.v3.size(); ++k)
    if (out.v3[k] > out.v3[k - 1] * (1.0 + 1e-8)) ++out.metrics.v_violation_count;
  const double thr = out.metrics.settle_threshold_deg * M_PI / 180.0;
  double settle = -1.0;
  for (size_t k = 0; k < out.att_err_rad.size(); ++k) {
    if (out.att_err_rad[k] >= thr)
      settle = -1.0;
    else if (settle < 0.0)
      settle = out.t[k];
  }
  out.metrics.settling_time_s = settle;
  for (size_t i = 0; i < ctrl.b_hat.size(); ++i)
    out.b_hat_final_normalized.push_back(ctrl.b_hat[i].normalized());
  return out;
}

ControllerGains default_sweep_gains() {
  ControllerGains g;
  g.rho = {8.5, 8.5};
  g.alpha = {5.0, 5.0};
  g.delta = {1.0, 1.0};
  g.k = 1.2;
  return g;
}

ClosedLoopState random_closed_loop_state(Rng& rng, int m) {
  ClosedLoopState s;
  Vec4 q(rng.gaussian(), rng.gaussian(), rng.gaussian(), rng.gaussian());
  q.normalize();
  s.Q_bar = Quaternion::from_vec4(q);
  for (int a = 0; a < 3; ++a) s.omega_bar(a) = rng.uniform(-1.0, 1.0);
  for (int i = 0; i < m; ++i) {
    Vec3 b;
    for (int a = 0; a < 3; ++a) b(a) = rng.uniform(-0.2, 0.2);
    s.b_bar.push_back(b);
  }
  return s;
}

SweepResult run_basin_sweep(const SweepScenario& scenario) {
  const int m = static_cast<int>(scenario.r_list.size());
  w_matrix(scenario.gains, scenario.r_list);  // validate PD before sweeping
  SweepResult res;
  res.runs.resize(static_cast<size_t>(scenario.count));
  const int steps = static_cast<int>(std::llround(scenario.horizon_s / scenario.dt));

  // Independent trajectories with per-run RNG streams; results land in their
  // run slot, so the aggregate is identical however many workers run.
  auto simulate_run = [&](int run) {
    Rng rng(scenario.seed + 0x9e3779b97f4a7c15ULL * static_cast<uint64_t>(run + 1));
    ClosedLoopState s = random_closed_loop_state(rng, m);
    bool diverged = false;
    for (int k = 0; k < steps; ++k) {
      s = closed_loop_rk4_step(scenario.gains, s, scenario.r_list, scenario.dt);
      if (!s.omega_bar.allFinite()) {
        diverged = true;
        break;
      }
    }
    SweepRun r;
    r.final_att_err_rad =
        diverged ? M_PI : attitude_angle_error(s.Q_bar, Quaternion::identity());
    r.final_omega_norm = diverged ? 1e9 : s.omega_bar.norm();
    r.final_q0 = s.Q_bar.q0;
    r.converged = !diverged && r.final_att_err_rad < scenario.att_tol_rad &&
                  r.final_omega_norm < scenario.omega_tol;
    res.runs[static_cast<size_t>(run)] = r;
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int workers = static_cast<int>(std::min<unsigned>(hw, 8u));
  if (workers <= 1 || scenario.count < 4) {
    for (int run = 0; run < scenario.count; ++run) simulate_run(run);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int run = next.fetch_add(1); run < scenario.count; run = next.fetch_add(1))
          simulate_run(run);
      });
    for (auto& th : pool) th.join();
  }

  CsvWriter csv({"run", "final_att_err_rad", "final_omega_norm", "final_q0", "converged"});
  for (int run = 0; run < scenario.count; ++run) {
    const SweepRun& r = res.runs[static_cast<size_t>(run)];
    if (r.converged) ++res.converged;
    csv.add_row({static_cast<double>(run), r.final_att_err_rad, r.final_omega_norm,
                 r.final_q0, r.converged ? 1.0 : 0.0});
  }
  res.csv = csv.text();
  return res;
}

}  // namespace attfuse
