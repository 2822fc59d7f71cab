#pragma once

#include <stdexcept>

#include "attfuse/linalg.hpp"

namespace attfuse {

// One observed direction: body-frame measurement of a known inertial vector.
struct VectorPair {
  Vec3 body;
  Vec3 reference;
};

struct TriadDegenerate : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic two-vector attitude determination. Returns R such that
// R^T * primary.reference == primary.body exactly (primary anchored) and the
// secondary is matched in the plane; for consistent inputs b_i = R^T r_i the
// true R is recovered. Throws TriadDegenerate when either vector pair is
// collinear (cross-product norm <= 1e-3).
Mat3 triad_estimate(const VectorPair& primary, const VectorPair& secondary);

}  // namespace attfuse
