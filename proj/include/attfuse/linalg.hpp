#pragma once

#include <Eigen/Dense>

namespace attfuse {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// S(x) such that S(x)y = x cross y.
inline Mat3 skew(const Vec3& x) {
  Mat3 s;
  s <<    0.0, -x.z(),  x.y(),
        x.z(),    0.0, -x.x(),
       -x.y(),  x.x(),    0.0;
  return s;
}

inline bool is_finite(const Eigen::Ref<const VecX>& v) {
  return v.allFinite();
}

}  // namespace attfuse
