#include <gtest/gtest.h>

#include "attfuse/triad.hpp"
#include "attfuse/quaternion.hpp"
#include "oracles.hpp"

using namespace attfuse;

namespace {
const Vec3 kR1(0.0, 0.0, 1.0);
const Vec3 kR2 = Vec3(0.434, -0.04, 0.899).normalized();
}  // namespace

TEST(Triad, IdentityWhenFramesAgree) {
  const Mat3 r = triad_estimate({kR1, kR1}, {kR2, kR2});
  EXPECT_TRUE(r.isIdentity(1e-14));
}

TEST(Triad, RecoversRandomRotationsExactly) {
  Rng rng(101);
  double worst = 0.0;
  for (int it = 0; it < 1000; ++it) {
    const Quaternion q = oracles::random_unit_quaternion(rng);
    const Mat3 r_true = quat_to_rot(q);
    const Vec3 b1 = r_true.transpose() * kR1;
    const Vec3 b2 = r_true.transpose() * kR2;
    const Mat3 r_est = triad_estimate({b1, kR1}, {b2, kR2});
    worst = std::max(worst, attitude_angle_error(rot_to_quat(r_est), q));
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(Triad, CollinearInputsRejected) {
  EXPECT_THROW(triad_estimate({Vec3(0, 0, 1), Vec3(0, 0, 1)},
                              {Vec3(0, 0, -1), Vec3(0, 0, -1)}),
               TriadDegenerate);
  // degenerate body side only
  EXPECT_THROW(triad_estimate({Vec3(0, 0, 1), kR1}, {Vec3(0, 0, 1.0 + 1e-9), kR2}),
               TriadDegenerate);
}

TEST(Triad, NoisyInputsStillGiveValidRotation) {
  Rng rng(103);
  for (int it = 0; it < 200; ++it) {
    const Quaternion q = oracles::random_unit_quaternion(rng);
    const Mat3 r_true = quat_to_rot(q);
    const Vec3 b1 = (r_true.transpose() * kR1 + 0.05 * oracles::random_vec3(rng)).normalized();
    const Vec3 b2 = (r_true.transpose() * kR2 + 0.05 * oracles::random_vec3(rng)).normalized();
    const Mat3 r_est = triad_estimate({b1, kR1}, {b2, kR2});
    EXPECT_LT((r_est.transpose() * r_est - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(r_est.determinant(), 1.0, 1e-12);
  }
}

TEST(Triad, PrimaryVectorAnchoredExactly) {
  Rng rng(107);
  for (int it = 0; it < 200; ++it) {
    const Quaternion q = oracles::random_unit_quaternion(rng);
    const Mat3 r_true = quat_to_rot(q);
    const Vec3 b1 = (r_true.transpose() * kR1).normalized();
    // secondary heavily corrupted: the primary must still be matched exactly
    const Vec3 b2 = (r_true.transpose() * kR2 + 0.2 * oracles::random_vec3(rng)).normalized();
    const Mat3 r_est = triad_estimate({b1, kR1}, {b2, kR2});
    EXPECT_LT((r_est.transpose() * kR1 - b1).norm(), 1e-13);
  }
}

TEST(Triad, EquivariantUnderBodyFrameRotation) {
  Rng rng(109);
  for (int it = 0; it < 100; ++it) {
    const Mat3 r_true = quat_to_rot(oracles::random_unit_quaternion(rng));
    const Mat3 g = quat_to_rot(oracles::random_unit_quaternion(rng));
    const Vec3 b1 = r_true.transpose() * kR1;
    const Vec3 b2 = r_true.transpose() * kR2;
    const Mat3 r_a = triad_estimate({b1, kR1}, {b2, kR2});
    // rotating the body-side inputs by g^T composes the estimate with g
    const Mat3 r_b = triad_estimate({g.transpose() * b1, kR1}, {g.transpose() * b2, kR2});
    EXPECT_LT((r_b - r_a * g).cwiseAbs().maxCoeff(), 1e-12);
  }
}
