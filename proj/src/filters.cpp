#include "attfuse/filters.hpp"

#include <cmath>

#include "attfuse/lyapunov.hpp"
#include "attfuse/quaternion.hpp"

namespace attfuse {

namespace {

bool any_noncollinear_pair(const std::vector<Vec3>& r) {
  for (size_t i = 0; i < r.size(); ++i)
    for (size_t j = i + 1; j < r.size(); ++j)
      if (r[i].cross(r[j]).norm() > 1e-3) return true;
  return false;
}

MatX kron_e_last(double scale, int blocks) {
  // scale * (e_blocks (x) I_3): 3*blocks x 3 with scale*I_3 in the last block row.
  MatX b = MatX::Zero(3 * blocks, 3);
  b.bottomRows<3>() = scale * Mat3::Identity();
  return b;
}

}  // namespace

FilterDesign make_filter_design(FilterVariant variant, int order,
                                const std::vector<GainVector>& gammas,
                                const Mat3& Gamma,
                                const std::vector<MatX>& q_list,
                                const std::vector<Vec3>& r_list) {
  if (order < 1) throw FilterDesignError("filter order must be >= 1");
  if (r_list.size() < 2) throw CollinearReferences("need at least two reference vectors");
  if (gammas.size() != r_list.size())
    throw FilterDesignError("one gain vector per reference vector required");
  if (!q_list.empty() && q_list.size() != r_list.size())
    throw FilterDesignError("q_list must be empty or match the reference count");

  if (!any_noncollinear_pair(r_list))
    throw CollinearReferences("all reference vectors are collinear");

  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      if (a == b) {
        if (!(Gamma(a, b) > 0.0)) throw BadBiasGain("Gamma diagonal must be positive");
      } else if (Gamma(a, b) != 0.0) {
        throw BadBiasGain("Gamma must be diagonal");
      }
    }
  }

  FilterDesign d;
  d.variant = variant;
  d.order = order;
  d.Gamma = Gamma;
  d.r.reserve(r_list.size());
  for (const auto& r : r_list) d.r.push_back(r.normalized());

  for (size_t i = 0; i < gammas.size(); ++i) {
    const GainVector& g = gammas[i];
    if (g.size() != order) throw FilterDesignError("gain vector length disagrees with order");
    const StabilityStatus st =
        variant == FilterVariant::kDirect ? is_hurwitz(g) : in_hbar(g);
    if (st != StabilityStatus::kHurwitz)
      throw GainNotAdmissible(
          st == StabilityStatus::kIndeterminate
              ? "gain vector marginally stable (indeterminate Routh pivot)"
              : (variant == FilterVariant::kDirect ? "gamma not Hurwitz"
                                                   : "gamma not in Hbar_n"));
    d.gammas.push_back(g);

    if (variant == FilterVariant::kDirect) {
      const MatX a = kron_with_identity(companion_matrix(g), 3);
      const MatX b = kron_e_last(g(order - 1), order);
      const MatX q = q_list.empty() ? MatX::Identity(3 * order, 3 * order) : q_list[i];
      const LyapunovSolution sol = solve_lyapunov(a, q);
      d.A.push_back(a);
      d.B.push_back(b);
      d.P.push_back(sol.P);
      d.BtP.push_back(b.transpose() * sol.P);
    } else if (order == 1) {
      d.A.emplace_back(0, 0);
      d.B.emplace_back(0, 3);
      d.P.emplace_back(0, 0);
      d.BtP.emplace_back(3, 0);
    } else {
      const MatX a = kron_with_identity(companion_matrix(project_gamma(g)), 3);
      const MatX b = kron_e_last(g(order - 1), order - 1);
      const MatX q = q_list.empty() ? MatX::Identity(3 * (order - 1), 3 * (order - 1))
                                    : q_list[i];
      const LyapunovSolution sol = solve_lyapunov(a, q);
      d.A.push_back(a);
      d.B.push_back(b);
      d.P.push_back(sol.P);
      d.BtP.push_back(b.transpose() * sol.P);
    }
  }
  return d;
}

DirectFilterState make_direct_state(const FilterDesign& design,
                                    const std::vector<Vec3>& b_hat0) {
  DirectFilterState s;
  s.chain.assign(design.m(), VecX::Zero(design.chain_dim()));
  s.b_hat = b_hat0;
  return s;
}

PassiveFilterState make_passive_state(const FilterDesign& design,
                                      const std::vector<Vec3>& b_hat0) {
  PassiveFilterState s;
  s.X.assign(design.m(), VecX::Zero(design.chain_dim()));
  s.b_hat = b_hat0;
  return s;
}

namespace {

// Algebraic top block x^(n-1) of the direct-filter chain.
Vec3 chain_top(const FilterDesign& design, const VecX& chain, const Vec3& b_tilde,
               int i) {
  const int n = design.order;
  const GainVector& g = design.gammas[static_cast<size_t>(i)];
  Vec3 top = g(n - 1) * b_tilde;
  for (int k = 1; k <= n - 1; ++k)
    top -= g(k - 1) * chain.segment<3>(3 * (n - 1 - k));
  return top;
}

}  // namespace

VecX z_full(const FilterDesign& design, const DirectFilterState& state,
            const std::vector<Vec3>& b, int i) {
  const Vec3 bt = b[static_cast<size_t>(i)] - state.b_hat[static_cast<size_t>(i)];
  VecX z(3 * design.order);
  z.head(design.chain_dim()) = state.chain[static_cast<size_t>(i)];
  z.tail<3>() = chain_top(design, state.chain[static_cast<size_t>(i)], bt, i);
  return z;
}

DirectDerivative direct_derivative(const FilterDesign& design,
                                   const DirectFilterState& state,
                                   const MeasurementFrame& meas) {
  if (static_cast<int>(meas.b.size()) != design.m() ||
      static_cast<int>(state.b_hat.size()) != design.m())
    throw FilterDesignError("direct_derivative: dimension mismatch");
  const int n = design.order;
  const int m = design.m();
  DirectDerivative out;
  out.chain_dot.resize(static_cast<size_t>(m));
  out.b_hat_dot.resize(static_cast<size_t>(m));
  const Mat3 s_omega = skew(meas.omega_m - state.eta_hat);
  for (int i = 0; i < m; ++i) {
    const size_t ui = static_cast<size_t>(i);
    const Vec3 bt = meas.b[ui] - state.b_hat[ui];
    const VecX& c = state.chain[ui];
    const Vec3 top = chain_top(design, c, bt, i);
    VecX cd(design.chain_dim());
    if (n >= 2) {
      if (n >= 3) cd.head(3 * (n - 2)) = c.tail(3 * (n - 2));
      cd.tail<3>() = top;
    }
    out.chain_dot[ui] = cd;
    const Vec3 x = n >= 2 ? Vec3(c.head<3>()) : top;
    out.b_hat_dot[ui] = -s_omega * meas.b[ui] + x;
    VecX z(3 * n);
    z.head(design.chain_dim()) = c;
    z.tail<3>() = top;
    const Vec3 upsilon = design.BtP[ui] * z;
    out.eta_hat_dot += design.Gamma * meas.b[ui].cross(upsilon);
  }
  return out;
}

PassiveDerivative passive_derivative(const FilterDesign& design,
                                     const PassiveFilterState& state,
                                     const MeasurementFrame& meas) {
  if (static_cast<int>(meas.b.size()) != design.m() ||
      static_cast<int>(state.b_hat.size()) != design.m())
    throw FilterDesignError("passive_derivative: dimension mismatch");
  const int n = design.order;
  const int m = design.m();
  PassiveDerivative out;
  out.x_dot.resize(static_cast<size_t>(m));
  out.b_hat_dot.resize(static_cast<size_t>(m));
  const Mat3 s_omega = skew(meas.omega_m - state.eta_hat);
  for (int i = 0; i < m; ++i) {
    const size_t ui = static_cast<size_t>(i);
    const Vec3 bt = meas.b[ui] - state.b_hat[ui];
    Vec3 w;
    if (n == 1) {
      out.x_dot[ui] = VecX(0);
      w = design.gammas[ui](0) * bt;
    } else {
      out.x_dot[ui] = design.A[ui] * state.X[ui] + design.B[ui] * bt;
      w = design.BtP[ui] * state.X[ui];
    }
    out.b_hat_dot[ui] = -s_omega * state.b_hat[ui] + w;
    out.eta_hat_dot -= design.Gamma * meas.b[ui].cross(state.b_hat[ui]);
  }
  return out;
}

namespace {

template <typename State, typename Deriv>
State axpy(const State& s, const Deriv& d, double h) {
  State out = s;
  for (size_t i = 0; i < s.b_hat.size(); ++i) out.b_hat[i] += h * d.b_hat_dot[i];
  out.eta_hat += h * d.eta_hat_dot;
  return out;
}

template <typename State>
bool state_finite(const State& s) {
  if (!s.eta_hat.allFinite()) return false;
  for (const auto& b : s.b_hat)
    if (!b.allFinite()) return false;
  return true;
}

void add_chain(std::vector<VecX>& dst, const std::vector<VecX>& d, double h) {
  for (size_t i = 0; i < dst.size(); ++i)
    if (dst[i].size() > 0) dst[i] += h * d[i];
}

}  // namespace

DirectFilterState integrate_filter_step(const FilterDesign& design,
                                        const DirectFilterState& state,
                                        const MeasurementFrame& meas, double dt,
                                        Integrator integrator) {
  if (!(dt > 0.0) || dt > 0.1)
    throw std::invalid_argument("integrate_filter_step: need 0 < dt <= 0.1");
  DirectFilterState out;
  if (integrator == Integrator::kEuler) {
    const DirectDerivative k1 = direct_derivative(design, state, meas);
    out = axpy(state, k1, dt);
    add_chain(out.chain, k1.chain_dot, dt);
  } else {
    const DirectDerivative k1 = direct_derivative(design, state, meas);
    DirectFilterState s2 = axpy(state, k1, dt / 2);
    add_chain(s2.chain, k1.chain_dot, dt / 2);
    const DirectDerivative k2 = direct_derivative(design, s2, meas);
    DirectFilterState s3 = axpy(state, k2, dt / 2);
    add_chain(s3.chain, k2.chain_dot, dt / 2);
    const DirectDerivative k3 = direct_derivative(design, s3, meas);
    DirectFilterState s4 = axpy(state, k3, dt);
    add_chain(s4.chain, k3.chain_dot, dt);
    const DirectDerivative k4 = direct_derivative(design, s4, meas);
    out = state;
    for (size_t i = 0; i < out.b_hat.size(); ++i) {
      out.b_hat[i] += dt / 6.0 *
                      (k1.b_hat_dot[i] + 2 * k2.b_hat_dot[i] + 2 * k3.b_hat_dot[i] +
                       k4.b_hat_dot[i]);
      if (out.chain[i].size() > 0)
        out.chain[i] += dt / 6.0 *
                        (k1.chain_dot[i] + 2 * k2.chain_dot[i] + 2 * k3.chain_dot[i] +
                         k4.chain_dot[i]);
    }
    out.eta_hat += dt / 6.0 *
                   (k1.eta_hat_dot + 2 * k2.eta_hat_dot + 2 * k3.eta_hat_dot +
                    k4.eta_hat_dot);
  }
  for (const auto& c : out.chain)
    if (c.size() > 0 && !c.allFinite()) throw FilterDivergence(meas.t);
  if (!state_finite(out)) throw FilterDivergence(meas.t);
  return out;
}

PassiveFilterState integrate_filter_step(const FilterDesign& design,
                                         const PassiveFilterState& state,
                                         const MeasurementFrame& meas, double dt,
                                         Integrator integrator) {
  if (!(dt > 0.0) || dt > 0.1)
    throw std::invalid_argument("integrate_filter_step: need 0 < dt <= 0.1");
  PassiveFilterState out;
  if (integrator == Integrator::kEuler) {
    const PassiveDerivative k1 = passive_derivative(design, state, meas);
    out = axpy(state, k1, dt);
    add_chain(out.X, k1.x_dot, dt);
  } else {
    const PassiveDerivative k1 = passive_derivative(design, state, meas);
    PassiveFilterState s2 = axpy(state, k1, dt / 2);
    add_chain(s2.X, k1.x_dot, dt / 2);
    const PassiveDerivative k2 = passive_derivative(design, s2, meas);
    PassiveFilterState s3 = axpy(state, k2, dt / 2);
    add_chain(s3.X, k2.x_dot, dt / 2);
    const PassiveDerivative k3 = passive_derivative(design, s3, meas);
    PassiveFilterState s4 = axpy(state, k3, dt);
    add_chain(s4.X, k3.x_dot, dt);
    const PassiveDerivative k4 = passive_derivative(design, s4, meas);
    out = state;
    for (size_t i = 0; i < out.b_hat.size(); ++i) {
      out.b_hat[i] += dt / 6.0 *
                      (k1.b_hat_dot[i] + 2 * k2.b_hat_dot[i] + 2 * k3.b_hat_dot[i] +
                       k4.b_hat_dot[i]);
      if (out.X[i].size() > 0)
        out.X[i] += dt / 6.0 *
                    (k1.x_dot[i] + 2 * k2.x_dot[i] + 2 * k3.x_dot[i] + k4.x_dot[i]);
    }
    out.eta_hat += dt / 6.0 *
                   (k1.eta_hat_dot + 2 * k2.eta_hat_dot + 2 * k3.eta_hat_dot +
                    k4.eta_hat_dot);
  }
  for (const auto& x : out.X)
    if (x.size() > 0 && !x.allFinite()) throw FilterDivergence(meas.t);
  if (!state_finite(out)) throw FilterDivergence(meas.t);
  return out;
}

EstimationErrors estimation_errors(const std::vector<Vec3>& b_hat,
                                   const Vec3& eta_hat, const TruthFrame& truth) {
  if (b_hat.size() != truth.b.size())
    throw std::invalid_argument("estimation_errors: dimension mismatch");
  EstimationErrors e;
  e.b_tilde.reserve(b_hat.size());
  for (size_t i = 0; i < b_hat.size(); ++i) e.b_tilde.push_back(truth.b[i] - b_hat[i]);
  e.eta_tilde = truth.eta - eta_hat;
  return e;
}

double lyapunov_v1(const FilterDesign& design, const DirectFilterState& state,
                   const TruthFrame& truth) {
  double v = 0.0;
  for (int i = 0; i < design.m(); ++i) {
    const VecX z = z_full(design, state, truth.b, i);
    v += z.dot(design.P[static_cast<size_t>(i)] * z);
  }
  const Vec3 et = truth.eta - state.eta_hat;
  for (int a = 0; a < 3; ++a) v += et(a) * et(a) / design.Gamma(a, a);
  return v;
}

double lyapunov_v2(const FilterDesign& design, const PassiveFilterState& state,
                   const TruthFrame& truth) {
  double v = 0.0;
  for (int i = 0; i < design.m(); ++i) {
    const size_t ui = static_cast<size_t>(i);
    if (state.X[ui].size() > 0) v += state.X[ui].dot(design.P[ui] * state.X[ui]);
    const Vec3 bt = truth.b[ui] - state.b_hat[ui];
    v += bt.squaredNorm();
  }
  const Vec3 et = truth.eta - state.eta_hat;
  for (int a = 0; a < 3; ++a) v += et(a) * et(a) / design.Gamma(a, a);
  return v;
}

}  // namespace attfuse
