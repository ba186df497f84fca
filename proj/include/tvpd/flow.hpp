/*
 Copyright 2026 The tvpd Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef TVPD_FLOW_HPP_
#define TVPD_FLOW_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

#include "tvpd/saddle.hpp"

namespace tvpd {

enum class FlowKind { asymptotic, fixed_time, finite_time };

// Sign of the complementarity correction G_d lambda in the dual block.
// `published` keeps +G_d lambda, which makes lambda_i g_i grow like e^t;
// `stabilized` uses -G_d lambda so lambda_i g_i decays.
enum class DualCorrection { published, stabilized };

template <typename Scalar>
struct FlowParams {
  FlowKind kind = FlowKind::asymptotic;
  Scalar alpha = Scalar(2);
  Scalar c1 = Scalar(1);
  Scalar c2 = Scalar(1);
  Scalar gamma1 = Scalar(0.2);
  Scalar gamma2 = Scalar(-2);
  Scalar eps_grad = Scalar(1e-12);
  Scalar eps_lambda = Scalar(1e-9);
  Scalar coeff_cap = Scalar(1e8);
  // Fixed/finite-time top correction is switched off when V drops below this.
  Scalar freeze_v = Scalar(1e-16);
  DualCorrection dual_correction = DualCorrection::stabilized;

  static FlowParams asymptotic(Scalar alpha) {
    FlowParams p;
    p.kind = FlowKind::asymptotic;
    p.alpha = alpha;
    return p;
  }
  static FlowParams fixed_time(Scalar c1, Scalar c2, Scalar gamma1, Scalar gamma2) {
    FlowParams p;
    p.kind = FlowKind::fixed_time;
    p.c1 = c1;
    p.c2 = c2;
    p.gamma1 = gamma1;
    p.gamma2 = gamma2;
    return p;
  }
  static FlowParams finite_time(Scalar c1, Scalar gamma1) {
    FlowParams p;
    p.kind = FlowKind::finite_time;
    p.c1 = c1;
    p.c2 = Scalar(0);
    p.gamma1 = gamma1;
    return p;
  }
};

inline const char* flow_kind_name(FlowKind k) {
  switch (k) {
    case FlowKind::asymptotic: return "asymptotic";
    case FlowKind::fixed_time: return "fixed";
    case FlowKind::finite_time: return "finite";
  }
  return "?";
}

template <typename Scalar>
void validate(const FlowParams<Scalar>& p) {
  if (!(p.eps_grad > 0) || !(p.eps_lambda > 0) || !(p.coeff_cap > 0))
    throw InvalidArgument("eps_grad, eps_lambda and coeff_cap must be positive");
  switch (p.kind) {
    case FlowKind::asymptotic:
      if (!(p.alpha > 0)) throw InvalidArgument("asymptotic flow needs alpha > 0");
      break;
    case FlowKind::fixed_time:
      if (!(p.c1 > 0) || !(p.c2 > 0)) throw InvalidArgument("fixed-time flow needs c1 > 0 and c2 > 0");
      if (!(p.gamma1 > 0 && p.gamma1 < 1)) throw InvalidArgument("gamma1 must lie in (0,1)");
      if (!(p.gamma2 < 0)) throw InvalidArgument("gamma2 must be negative");
      break;
    case FlowKind::finite_time:
      if (!(p.c1 > 0)) throw InvalidArgument("finite-time flow needs c1 > 0");
      if (p.c2 != 0) throw InvalidArgument("finite-time flow needs c2 = 0");
      if (!(p.gamma1 > 0 && p.gamma1 < 1)) throw InvalidArgument("gamma1 must lie in (0,1)");
      break;
  }
}

/// [-grad_xt_f - grad_xt_G lambda ; -lambda o grad_t_G]
template <typename Scalar>
VectorX<Scalar> h_pred(const EvalBundle<Scalar>& b, const VectorX<Scalar>& lambda) {
  const Index n = b.n(), m = b.m();
  VectorX<Scalar> h(n + m);
  h.head(n) = -b.grad_xt_f;
  if (m > 0) h.head(n).noalias() -= b.grad_xt_G * lambda;
  h.tail(m) = -lambda.cwiseProduct(b.grad_t_G);
  return h;
}

/// [-alpha grad_x_L ; g o lambda]
template <typename Scalar>
VectorX<Scalar> h_corr_asymptotic(const EvalBundle<Scalar>& b, const VectorX<Scalar>& lambda, Scalar alpha) {
  const Index n = b.n(), m = b.m();
  VectorX<Scalar> h(n + m);
  h.head(n) = -alpha * b.grad_x_L;
  h.tail(m) = b.g_vals.cwiseProduct(lambda);
  return h;
}

/// Scalar k(||grad_x_L||) with top block = -k grad_x_L. The c2 part is capped
/// at params.coeff_cap; `capped` reports whether the cap was hit.
template <typename Scalar>
Scalar fixed_time_coefficient(Scalar grad_norm, const FlowParams<Scalar>& params, bool* capped = nullptr) {
  using std::pow;
  if (capped) *capped = false;
  if (grad_norm < params.eps_grad) return Scalar(0);
  Scalar k = params.c1 * pow(grad_norm, -params.gamma1);
  if (params.c2 != Scalar(0)) {
    Scalar k2 = params.c2 * pow(grad_norm, -params.gamma2);
    if (!(k2 <= params.coeff_cap)) {
      k2 = params.coeff_cap;
      if (capped) *capped = true;
    }
    k += k2;
  }
  return k;
}

/// [-(c1 ||dL||^-g1 + c2 ||dL||^-g2) grad_x_L ; g o lambda], top zero when
/// ||grad_x_L|| < eps_grad.
template <typename Scalar>
VectorX<Scalar> h_corr_fixed(const EvalBundle<Scalar>& b, const VectorX<Scalar>& lambda,
                             const FlowParams<Scalar>& params) {
  if (params.kind == FlowKind::asymptotic) throw InvalidArgument("h_corr_fixed needs a fixed or finite-time kind");
  const Index n = b.n(), m = b.m();
  VectorX<Scalar> h(n + m);
  h.head(n) = -fixed_time_coefficient(b.grad_x_L.norm(), params) * b.grad_x_L;
  h.tail(m) = b.g_vals.cwiseProduct(lambda);
  return h;
}

/// w = grad_x_G^T grad_x_L;  [-hess_xx_L^{-1} grad_x_G w ; w]
template <typename Scalar>
VectorX<Scalar> h_aug(const EvalBundle<Scalar>& b, const HessianFactor<Scalar>& H) {
  const Index n = b.n(), m = b.m();
  VectorX<Scalar> h = VectorX<Scalar>::Zero(n + m);
  if (m == 0) return h;
  const VectorX<Scalar> w = b.grad_x_G.transpose() * b.grad_x_L;
  h.head(n) = -H.solve_vec(b.grad_x_G * w);
  h.tail(m) = w;
  return h;
}

template <typename Scalar>
VectorX<Scalar> h_aug(const EvalBundle<Scalar>& b) {
  return h_aug(b, HessianFactor<Scalar>(b.hess_xx_L));
}

/// [b]^+_a: b when a > eps, max(0, b) otherwise.
template <typename Scalar>
Scalar project_plus(Scalar a, Scalar b, Scalar eps = Scalar(1e-9)) {
  if (a < Scalar(0)) throw InvalidArgument("project_plus: negative multiplier");
  if (a > eps) return b;
  return std::max(Scalar(0), b);
}

template <typename Scalar>
struct FlowEval {
  VectorX<Scalar> velocity;     // projected (x_dot, lambda_dot)
  VectorX<Scalar> unprojected;  // J~^{-1}(H_pred + H_corr) + H_aug
  EvalBundle<Scalar> bundle;
  Scalar correction_coeff = Scalar(0);  // alpha, or the fixed-time coefficient
  bool ridge_applied = false;
  bool cap_bound = false;
  bool frozen = false;
};

template <typename Scalar>
FlowEval<Scalar> evaluate_flow(const TimeVaryingProblem<Scalar>& p, const PrimalDualState<Scalar>& s,
                               const FlowParams<Scalar>& params, const SlackSchedule<Scalar>& sched) {
  validate(params);
  FlowEval<Scalar> out;
  out.bundle = assemble_bundle(p, s);
  const EvalBundle<Scalar>& b = out.bundle;
  const Index n = b.n(), m = b.m();

  VectorX<Scalar> corr;
  if (params.kind == FlowKind::asymptotic) {
    out.correction_coeff = params.alpha;
    corr = h_corr_asymptotic(b, s.lambda, params.alpha);
  } else {
    out.frozen = lyapunov_value(b) < params.freeze_v;
    out.correction_coeff = out.frozen ? Scalar(0) : fixed_time_coefficient(b.grad_x_L.norm(), params, &out.cap_bound);
    corr.resize(n + m);
    corr.head(n) = -out.correction_coeff * b.grad_x_L;
    corr.tail(m) = b.g_vals.cwiseProduct(s.lambda);
  }
  if (params.dual_correction == DualCorrection::stabilized) corr.tail(m) = -corr.tail(m);

  const HessianFactor<Scalar> H(b.hess_xx_L);
  const ApproxSchur<Scalar> mt = approx_schur(b, sched, s.t, H);
  out.ridge_applied = mt.ridge_applied;
  const MatrixX<Scalar> Jinv = block_inverse(b, mt.m_tilde, H);
  out.unprojected = Jinv * (h_pred(b, s.lambda) + corr) + h_aug(b, H);

  out.velocity = out.unprojected;
  for (Index i = 0; i < m; ++i)
    out.velocity[n + i] = project_plus(s.lambda[i], out.unprojected[n + i], params.eps_lambda);

  if (!out.velocity.allFinite()) {
    std::ostringstream os;
    os << "non-finite flow at t=" << s.t << " x=[" << s.x.transpose() << "] lambda=[" << s.lambda.transpose()
       << "]";
    throw NumericalDomainError(os.str());
  }
  return out;
}

/// (x_dot, [lambda_dot]^+).
template <typename Scalar>
VectorX<Scalar> rhs(const TimeVaryingProblem<Scalar>& p, const PrimalDualState<Scalar>& s,
                    const FlowParams<Scalar>& params, const SlackSchedule<Scalar>& sched) {
  return evaluate_flow(p, s, params, sched).velocity;
}

/// dV/dt along (x_dot, lambda_dot) for V = ||grad_x_L||^2 / 2.
template <typename Scalar>
Scalar lyapunov_derivative(const EvalBundle<Scalar>& b, const VectorX<Scalar>& velocity) {
  const Index n = b.n(), m = b.m();
  VectorX<Scalar> d = b.hess_xx_L * velocity.head(n) + b.grad_xt_f;
  if (m > 0) d.noalias() += b.grad_x_G * velocity.tail(m) + b.grad_xt_G * b.lambda;
  return b.grad_x_L.dot(d);
}

/// V_dot + 2 alpha V (asymptotic) or V_dot + a1 V^(1-g1/2) + a2 V^(1-g2/2)
/// with a_j = c_j 2^(1-g_j/2). Nonpositive when the flow meets its bound.
template <typename Scalar>
Scalar decay_residual(const FlowParams<Scalar>& params, Scalar V, Scalar V_dot) {
  using std::pow;
  if (params.kind == FlowKind::asymptotic) return V_dot + Scalar(2) * params.alpha * V;
  if (!(V > Scalar(0))) return V_dot;
  const Scalar a1 = params.c1 * pow(Scalar(2), Scalar(1) - params.gamma1 / 2);
  Scalar r = V_dot + a1 * pow(V, Scalar(1) - params.gamma1 / 2);
  if (params.c2 != Scalar(0)) {
    const Scalar a2 = params.c2 * pow(Scalar(2), Scalar(1) - params.gamma2 / 2);
    r += a2 * pow(V, Scalar(1) - params.gamma2 / 2);
  }
  return r;
}

/// 2^(g1/2)/(c1 g1) - 2^(g2/2)/(c2 g2).
template <typename Scalar>
Scalar settling_time_bound(const FlowParams<Scalar>& params) {
  using std::pow;
  if (params.kind == FlowKind::finite_time)
    throw UnsupportedError("finite-time flow has no uniform settling bound; use finite_time_bound");
  if (params.kind != FlowKind::fixed_time) throw InvalidArgument("settling_time_bound needs a fixed-time flow");
  validate(params);
  return pow(Scalar(2), params.gamma1 / 2) / (params.c1 * params.gamma1) -
         pow(Scalar(2), params.gamma2 / 2) / (params.c2 * params.gamma2);
}

/// ||grad_x_L(s0)||^g1 / (c1 g1).
template <typename Scalar>
Scalar finite_time_bound(const FlowParams<Scalar>& params, const PrimalDualState<Scalar>& s0,
                         const TimeVaryingProblem<Scalar>& p) {
  using std::pow;
  if (params.kind != FlowKind::finite_time) throw InvalidArgument("finite_time_bound needs a finite-time flow");
  validate(params);
  const Scalar r = grad_x_lagrangian(p, s0).norm();
  if (r == Scalar(0)) return Scalar(0);
  return pow(r, params.gamma1) / (params.c1 * params.gamma1);
}

}  // namespace tvpd

#endif  // TVPD_FLOW_HPP_
