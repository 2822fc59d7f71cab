#include "attfuse/quaternion.hpp"

#include <algorithm>
#include <cmath>

namespace attfuse {

Quaternion quat_mul(const Quaternion& p, const Quaternion& q) {
  Quaternion out(p.q0 * q.q0 - p.q.dot(q.q),
                 p.q0 * q.q + q.q0 * p.q + p.q.cross(q.q));
  return out.normalized();
}

Mat3 quat_to_rot(const Quaternion& quat) {
  const Mat3 s = skew(quat.q);
  return Mat3::Identity() + 2.0 * quat.q0 * s + 2.0 * s * s;
}

Quaternion rot_to_quat(const Mat3& r) {
  // Shepperd: pick the largest of {trace, r00, r11, r22} to avoid cancellation.
  const double tr = r.trace();
  double q0, qx, qy, qz;
  if (tr >= r(0, 0) && tr >= r(1, 1) && tr >= r(2, 2)) {
    const double s = std::sqrt(1.0 + tr) * 2.0;
    q0 = 0.25 * s;
    qx = (r(2, 1) - r(1, 2)) / s;
    qy = (r(0, 2) - r(2, 0)) / s;
    qz = (r(1, 0) - r(0, 1)) / s;
  } else if (r(0, 0) >= r(1, 1) && r(0, 0) >= r(2, 2)) {
    const double s = std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2)) * 2.0;
    q0 = (r(2, 1) - r(1, 2)) / s;
    qx = 0.25 * s;
    qy = (r(0, 1) + r(1, 0)) / s;
    qz = (r(0, 2) + r(2, 0)) / s;
  } else if (r(1, 1) >= r(2, 2)) {
    const double s = std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2)) * 2.0;
    q0 = (r(0, 2) - r(2, 0)) / s;
    qx = (r(0, 1) + r(1, 0)) / s;
    qy = 0.25 * s;
    qz = (r(1, 2) + r(2, 1)) / s;
  } else {
    const double s = std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1)) * 2.0;
    q0 = (r(1, 0) - r(0, 1)) / s;
    qx = (r(0, 2) + r(2, 0)) / s;
    qy = (r(1, 2) + r(2, 1)) / s;
    qz = 0.25 * s;
  }
  Quaternion out(q0, qx, qy, qz);
  if (out.q0 < 0.0) {
    out.q0 = -out.q0;
    out.q = -out.q;
  }
  return out.normalized();
}

Vec4 quat_derivative(const Quaternion& quat, const Vec3& omega) {
  Vec4 d;
  d(0) = -0.5 * quat.q.dot(omega);
  d.segment<3>(1) = 0.5 * (quat.q0 * Mat3::Identity() + skew(quat.q)) * omega;
  return d;
}

Vec3 body_vector_derivative(const Vec3& b, const Vec3& omega) {
  return -skew(omega) * b;
}

double attitude_angle_error(const Quaternion& qa, const Quaternion& qb) {
  const Quaternion rel = quat_mul(qa, qb.inverse());
  const double c = std::min(1.0, std::abs(rel.q0));
  return 2.0 * std::acos(c);
}

EulerAngles quat_to_euler(const Quaternion& quat) {
  const Mat3 r = quat_to_rot(quat.normalized());
  EulerAngles e;
  const double s_pitch = std::clamp(-r(2, 0), -1.0, 1.0);
  const double pitch = std::asin(s_pitch);
  constexpr double kHalfPi = 1.5707963267948966;
  if (kHalfPi - std::abs(pitch) < 1e-6) {
    e.gimbal_lock = true;
    e.pitch_deg = s_pitch > 0 ? 90.0 : -90.0;
    // Only roll+yaw combined is observable here; report yaw, zero roll.
    e.roll_deg = 0.0;
    e.yaw_deg = std::atan2(-r(0, 1), r(1, 1)) * 180.0 / M_PI;
    return e;
  }
  e.roll_deg = std::atan2(r(2, 1), r(2, 2)) * 180.0 / M_PI;
  e.pitch_deg = pitch * 180.0 / M_PI;
  e.yaw_deg = std::atan2(r(1, 0), r(0, 0)) * 180.0 / M_PI;
  return e;
}

Quaternion euler_to_quat(const EulerAngles& e) {
  const double hr = 0.5 * e.roll_deg * M_PI / 180.0;
  const double hp = 0.5 * e.pitch_deg * M_PI / 180.0;
  const double hy = 0.5 * e.yaw_deg * M_PI / 180.0;
  const Quaternion qz(std::cos(hy), 0.0, 0.0, std::sin(hy));
  const Quaternion qy(std::cos(hp), 0.0, std::sin(hp), 0.0);
  const Quaternion qx(std::cos(hr), std::sin(hr), 0.0, 0.0);
  return quat_mul(quat_mul(qz, qy), qx);
}

}  // namespace attfuse
