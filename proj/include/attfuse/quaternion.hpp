#pragma once

#include "attfuse/linalg.hpp"

namespace attfuse {

// Unit quaternion in (scalar, vector) order. The rotation matrix R(Q) maps
// body coordinates to inertial coordinates; a constant inertial direction r
// is seen in the body frame as b = R(Q)^T r.
struct Quaternion {
  double q0 = 1.0;
  Vec3 q = Vec3::Zero();

  Quaternion() = default;
  Quaternion(double w, const Vec3& v) : q0(w), q(v) {}
  Quaternion(double w, double x, double y, double z) : q0(w), q(x, y, z) {}

  static Quaternion identity() { return {}; }

  double norm() const { return std::sqrt(q0 * q0 + q.squaredNorm()); }

  Quaternion normalized() const {
    const double n = norm();
    return {q0 / n, q / n};
  }

  Quaternion inverse() const { return {q0, -q}; }

  Vec4 as_vec4() const { return {q0, q.x(), q.y(), q.z()}; }
  static Quaternion from_vec4(const Vec4& v) { return {v(0), v.segment<3>(1)}; }
};

// Hamilton product, renormalized.
Quaternion quat_mul(const Quaternion& p, const Quaternion& q);

// Euler-Rodriguez map: R(Q) = I + 2 q0 S(q) + 2 S(q)^2.
Mat3 quat_to_rot(const Quaternion& quat);

// Inverse of quat_to_rot (Shepperd branch selection), sign fixed to q0 >= 0.
Quaternion rot_to_quat(const Mat3& rot);

// Qdot for body rate omega: (-q^T w / 2, (q0 I + S(q)) w / 2).
Vec4 quat_derivative(const Quaternion& quat, const Vec3& omega);

// bdot = -S(omega) b for a body-frame direction of a constant inertial vector.
Vec3 body_vector_derivative(const Vec3& b, const Vec3& omega);

// Rotation angle between two attitudes: 2 acos(|scalar(Qa * Qb^-1)|), in [0, pi].
double attitude_angle_error(const Quaternion& qa, const Quaternion& qb);

// Aerospace Z-Y-X convention (NED): R = Rz(yaw) Ry(pitch) Rx(roll). Degrees,
// reporting only. pitch in [-90, 90], roll/yaw in (-180, 180].
struct EulerAngles {
  double roll_deg = 0.0;
  double pitch_deg = 0.0;
  double yaw_deg = 0.0;
  bool gimbal_lock = false;  // |pitch - +/-90 deg| < 1e-6 rad; roll/yaw unreliable
};

EulerAngles quat_to_euler(const Quaternion& quat);
Quaternion euler_to_quat(const EulerAngles& e);

}  // namespace attfuse
