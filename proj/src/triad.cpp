#include "attfuse/triad.hpp"

namespace attfuse {

namespace {

// Orthonormal triad {v1_hat, v1 x v2 / |v1 x v2|, t1 x t2} as columns.
Mat3 triad_frame(const Vec3& v1, const Vec3& v2, const char* which) {
  const Vec3 c = v1.cross(v2);
  if (c.norm() <= 1e-3)
    throw TriadDegenerate(std::string("triad_estimate: collinear ") + which + " vectors");
  Mat3 t;
  t.col(0) = v1.normalized();
  t.col(1) = c.normalized();
  t.col(2) = t.col(0).cross(t.col(1));
  return t;
}

}  // namespace

Mat3 triad_estimate(const VectorPair& primary, const VectorPair& secondary) {
  const Mat3 t_ref = triad_frame(primary.reference, secondary.reference, "reference");
  const Mat3 t_body = triad_frame(primary.body, secondary.body, "body");
  // R^T maps reference to body, so R = [t_ref] [t_body]^T.
  return t_ref * t_body.transpose();
}

}  // namespace attfuse
