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

#ifndef TVPD_INTEGRATOR_HPP_
#define TVPD_INTEGRATOR_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tvpd/flow.hpp"

namespace tvpd {

template <typename Scalar>
struct IntegratorConfig {
  Scalar step = Scalar(1e-3);
  Scalar horizon = Scalar(20);
  Index record_every = 100;
  Scalar eps_lambda = Scalar(1e-9);
  Scalar active_tol = Scalar(1e-6);
};

template <typename Scalar>
void validate(const IntegratorConfig<Scalar>& cfg) {
  if (!(cfg.step > 0)) throw InvalidArgument("step must be positive");
  if (!(cfg.horizon >= 0)) throw InvalidArgument("horizon must be nonnegative");
  if (cfg.record_every < 1) throw InvalidArgument("record_every must be at least 1");
  if (!(cfg.eps_lambda > 0)) throw InvalidArgument("eps_lambda must be positive");
  if (cfg.horizon / cfg.step > Scalar(1e8)) throw InvalidArgument("horizon/step exceeds 1e8");
}

template <typename Scalar>
struct TrajectorySample {
  PrimalDualState<Scalar> state;
  Scalar V = Scalar(0);
  Scalar decay_residual = Scalar(0);
  std::vector<bool> active;  // g_i >= -active_tol
};

template <typename Scalar>
struct Trajectory {
  std::vector<TrajectorySample<Scalar>> samples;
  FlowParams<Scalar> params;
  SlackSchedule<Scalar> slack;
  IntegratorConfig<Scalar> config;
  std::string problem;
  Index steps = 0;
  Index ridge_events = 0;  // flow evaluations that needed the Schur ridge
  Index cap_events = 0;    // flow evaluations where the c2 coefficient was capped

  Scalar min_lambda() const {
    Scalar v = std::numeric_limits<Scalar>::infinity();
    for (const auto& s : samples)
      if (s.state.lambda.size() > 0) v = std::min(v, s.state.lambda.minCoeff());
    return v;
  }
};

template <typename Scalar>
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, PrimalDualState<Scalar> last, Index step, Trajectory<Scalar> partial)
      : Error(what), last_(std::move(last)), step_(step), partial_(std::move(partial)) {}
  const PrimalDualState<Scalar>& last_state() const noexcept { return last_; }
  Index step_index() const noexcept { return step_; }
  const Trajectory<Scalar>& partial() const noexcept { return partial_; }

 private:
  PrimalDualState<Scalar> last_;
  Index step_;
  Trajectory<Scalar> partial_;
};

namespace detail {

template <typename Scalar>
struct StepCounters {
  Index ridge = 0;
  Index cap = 0;
};

template <typename Scalar>
VectorX<Scalar> stage(const TimeVaryingProblem<Scalar>& p, const PrimalDualState<Scalar>& s,
                      const FlowParams<Scalar>& params, const SlackSchedule<Scalar>& sched,
                      StepCounters<Scalar>* counters) {
  const FlowEval<Scalar> fe = evaluate_flow(p, s, params, sched);
  if (counters) {
    counters->ridge += fe.ridge_applied;
    counters->cap += fe.cap_bound;
  }
  return fe.velocity;
}

// Intermediate stages can leave lambda slightly negative; the projection and
// the bundle both require lambda >= 0, so stage states are clamped.
template <typename Scalar>
PrimalDualState<Scalar> offset(const PrimalDualState<Scalar>& s, const VectorX<Scalar>& k, Scalar c) {
  const Index n = s.x.size(), m = s.lambda.size();
  PrimalDualState<Scalar> r;
  r.x = s.x + c * k.head(n);
  r.lambda = (s.lambda + c * k.tail(m)).cwiseMax(Scalar(0));
  r.t = s.t + c;
  return r;
}

template <typename Scalar>
PrimalDualState<Scalar> rk4(const TimeVaryingProblem<Scalar>& p, const PrimalDualState<Scalar>& s,
                            const FlowParams<Scalar>& params, const SlackSchedule<Scalar>& sched, Scalar h,
                            StepCounters<Scalar>* counters) {
  const Index n = s.x.size(), m = s.lambda.size();
  const VectorX<Scalar> k1 = stage(p, s, params, sched, counters);
  const VectorX<Scalar> k2 = stage(p, offset(s, k1, h / 2), params, sched, counters);
  const VectorX<Scalar> k3 = stage(p, offset(s, k2, h / 2), params, sched, counters);
  const VectorX<Scalar> k4 = stage(p, offset(s, k3, h), params, sched, counters);
  const VectorX<Scalar> dz = (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
  PrimalDualState<Scalar> out;
  out.x = s.x + dz.head(n);
  out.lambda = (s.lambda + dz.tail(m)).cwiseMax(Scalar(0));
  out.t = s.t + h;
  return out;
}

}  // namespace detail

/// One classical Runge-Kutta step on the projected field, then lambda := max(lambda, 0).
template <typename Scalar>
PrimalDualState<Scalar> step_once(const TimeVaryingProblem<Scalar>& p, const PrimalDualState<Scalar>& s,
                                  FlowParams<Scalar> params, const SlackSchedule<Scalar>& sched,
                                  const IntegratorConfig<Scalar>& cfg) {
  validate(cfg);
  params.eps_lambda = cfg.eps_lambda;
  PrimalDualState<Scalar> next;
  try {
    next = detail::rk4<Scalar>(p, s, params, sched, cfg.step, nullptr);
  } catch (const NumericalDomainError& e) {
    throw DivergenceError<Scalar>(e.what(), s, 0, {});
  }
  if (!next.finite()) throw DivergenceError<Scalar>("state left the finite range", s, 0, {});
  return next;
}

template <typename Scalar>
TrajectorySample<Scalar> diagnose(const TimeVaryingProblem<Scalar>& p, const PrimalDualState<Scalar>& s,
                                  const FlowParams<Scalar>& params, const SlackSchedule<Scalar>& sched,
                                  Scalar active_tol = Scalar(1e-6)) {
  TrajectorySample<Scalar> out;
  out.state = s;
  const FlowEval<Scalar> fe = evaluate_flow(p, s, params, sched);
  out.V = lyapunov_value(fe.bundle);
  out.decay_residual = decay_residual(params, out.V, lyapunov_derivative(fe.bundle, fe.velocity));
  out.active.resize(static_cast<std::size_t>(p.m));
  for (Index i = 0; i < p.m; ++i) out.active[static_cast<std::size_t>(i)] = fe.bundle.g_vals[i] >= -active_tol;
  return out;
}

/// Integrates over [s0.t, s0.t + horizon], recording every cfg.record_every steps
/// (and the final state).
template <typename Scalar>
Trajectory<Scalar> integrate(const TimeVaryingProblem<Scalar>& p, const PrimalDualState<Scalar>& s0,
                             FlowParams<Scalar> params, const SlackSchedule<Scalar>& sched,
                             const IntegratorConfig<Scalar>& cfg) {
  using std::llround;
  validate(cfg);
  validate(params);
  params.eps_lambda = cfg.eps_lambda;
  detail::check_state(p, s0);

  Trajectory<Scalar> traj;
  traj.params = params;
  traj.slack = sched;
  traj.config = cfg;
  traj.problem = p.name;

  const Index steps = static_cast<Index>(llround(cfg.horizon / cfg.step));
  traj.samples.reserve(static_cast<std::size_t>(steps / cfg.record_every + 2));
  detail::StepCounters<Scalar> counters;
  PrimalDualState<Scalar> s = s0;
  Index k = 0;
  try {
    traj.samples.push_back(diagnose(p, s, params, sched, cfg.active_tol));
    for (k = 1; k <= steps; ++k) {
      PrimalDualState<Scalar> next = detail::rk4<Scalar>(p, s, params, sched, cfg.step, &counters);
      next.t = s0.t + static_cast<Scalar>(k) * cfg.step;
      if (!next.finite()) throw NumericalDomainError("state left the finite range");
      s = std::move(next);
      if (k % cfg.record_every == 0 || k == steps) traj.samples.push_back(diagnose(p, s, params, sched, cfg.active_tol));
    }
  } catch (const Error& e) {
    traj.steps = k;
    traj.ridge_events = counters.ridge;
    traj.cap_events = counters.cap;
    throw DivergenceError<Scalar>(std::string("divergence at step ") + std::to_string(k) + ": " + e.what(), s, k,
                                  std::move(traj));
  }
  traj.steps = steps;
  traj.ridge_events = counters.ridge;
  traj.cap_events = counters.cap;
  return traj;
}

struct SwitchEvent {
  double t = 0;
  Index constraint = 0;
  bool activated = false;
};

template <typename Scalar>
std::vector<SwitchEvent> detect_active_switches(const Trajectory<Scalar>& traj) {
  if (traj.samples.empty()) throw InvalidArgument("empty trajectory");
  std::vector<SwitchEvent> out;
  for (std::size_t k = 1; k < traj.samples.size(); ++k) {
    const auto& prev = traj.samples[k - 1].active;
    const auto& cur = traj.samples[k].active;
    for (std::size_t i = 0; i < cur.size() && i < prev.size(); ++i)
      if (cur[i] != prev[i])
        out.push_back({static_cast<double>(traj.samples[k].state.t), static_cast<Index>(i), static_cast<bool>(cur[i])});
  }
  return out;
}

}  // namespace tvpd

#endif  // TVPD_INTEGRATOR_HPP_
