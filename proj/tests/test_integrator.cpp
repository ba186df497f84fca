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

#include <doctest.h>

#include <cmath>

#include "helpers.hpp"

using namespace tvpd;
using namespace testing;

namespace {

IntegratorConfig<double> config(double step, double horizon, Index every) {
  IntegratorConfig<double> c;
  c.step = step;
  c.horizon = horizon;
  c.record_every = every;
  return c;
}

}  // namespace

TEST_CASE("a step from an equilibrium leaves the state unchanged") {
  const Mat Q = (Mat(2, 2) << 2, 0.5, 0.5, 1).finished();
  const Problem p = static_qp(Q, Vec(Eigen::Vector2d(-1, -1)), Mat(Eigen::RowVector2d(1, 1)), Vec::Constant(1, 0.5));
  const auto sol = solve_sampled(p, 0.0);
  const State s{sol.x_star, sol.lambda_star, 0.0};
  const State next =
      step_once(p, s, FlowParams<double>::asymptotic(2), SlackSchedule<double>::asymptotic(0.01), config(1e-3, 1, 1));
  CHECK((next.x - s.x).norm() <= 1e-12);
  CHECK((next.lambda - s.lambda).norm() <= 1e-12);
  CHECK(next.t == doctest::Approx(1e-3));
}

TEST_CASE("one step decreases V on the numerical example") {
  const Problem p = numex_problem();
  const auto fp = FlowParams<double>::asymptotic(2);
  const auto sl = SlackSchedule<double>::asymptotic(0.01);
  const State next = step_once(p, numex_start(), fp, sl, config(1e-3, 1, 1));
  CHECK(lyapunov_value(assemble_bundle(p, next)) < lyapunov_value(assemble_bundle(p, numex_start())));
}

TEST_CASE("a zero multiplier with inward velocity stays exactly zero") {
  const Problem p = numex_problem();
  const auto fp = FlowParams<double>::asymptotic(2);
  const auto sl = SlackSchedule<double>::asymptotic(0.01);
  for (double x1 = -3; x1 <= 3; x1 += 0.25) {
    const State s = state({x1, -2}, {0}, 0.4);
    if (evaluate_flow(p, s, fp, sl).unprojected[2] >= 0) continue;
    CHECK(step_once(p, s, fp, sl, config(1e-3, 1, 1)).lambda[0] == 0.0);
  }
}

TEST_CASE("zero horizon records only the initial state") {
  const auto sc = numex_scenario();
  const auto traj = integrate(sc.problem, *sc.initial, sc.asymptotic, sc.asymptotic_slack, config(1e-3, 0, 10));
  REQUIRE(traj.samples.size() == 1);
  CHECK((traj.samples[0].state.x - sc.initial->x).norm() == 0.0);
  CHECK(traj.samples[0].V == doctest::Approx(52.0));
}

TEST_CASE("asymptotic flow on the numerical example") {
  const auto sc = numex_scenario();
  const auto traj = integrate(sc.problem, *sc.initial, sc.asymptotic, sc.asymptotic_slack, config(1e-3, 20, 100));
  CHECK(traj.min_lambda() >= 0.0);
  CHECK(traj.samples.back().state.t == doctest::Approx(20.0));
  CHECK(traj.samples.back().V < 1e-4);
  for (std::size_t k = 1; k < traj.samples.size(); ++k)
    CHECK(traj.samples[k].state.t - traj.samples[k - 1].state.t == doctest::Approx(0.1).epsilon(1e-9));
  for (const auto& s : traj.samples) CHECK(s.decay_residual <= 1e-8 * (1 + s.V));
}

TEST_CASE("step halving shows fourth-order accuracy") {
  const auto sc = numex_scenario();
  const double h = 1e-2;
  const auto a = integrate(sc.problem, *sc.initial, sc.asymptotic, sc.asymptotic_slack, config(h, 5, 500));
  const auto b = integrate(sc.problem, *sc.initial, sc.asymptotic, sc.asymptotic_slack, config(h / 2, 5, 1000));
  REQUIRE(a.min_lambda() > 0.1);  // no projection events on [0, 5]
  const double diff = (a.samples.back().state.x - b.samples.back().state.x).norm();
  CHECK(diff <= 50 * std::pow(h, 4));
}

TEST_CASE("Lyapunov envelope of the asymptotic flow") {
  for (const auto& name : builtin_names()) {
    const auto sc = builtin(name);
    const State s0 = resolve_initial(RunConfig{}, sc);
    const double horizon = std::min(sc.horizon, 10.0);
    const auto traj = integrate(sc.problem, s0, sc.asymptotic, sc.asymptotic_slack, config(1e-3, horizon, 10));
    const double V0 = traj.samples.front().V;
    CAPTURE(name);
    for (const auto& s : traj.samples) CHECK(s.V <= V0 * std::exp(-2 * sc.asymptotic.alpha * s.state.t) + 1e-6);
    CHECK(traj.min_lambda() >= 0.0);
  }
}

TEST_CASE("dual feasibility under the fixed-time flow") {
  for (const auto& name : builtin_names()) {
    const auto sc = builtin(name);
    const State s0 = resolve_initial(RunConfig{}, sc);
    const auto traj = integrate(sc.problem, s0, sc.fixed, sc.fixed_slack, config(1e-3, std::min(sc.horizon, 10.0), 10));
    CHECK(traj.min_lambda() >= 0.0);
  }
}

TEST_CASE("divergence carries the step index and the partial trajectory") {
  Problem p = numex_problem();
  const auto good = p.grad_x_f;
  p.grad_x_f = [good](const Vec& x, double t) -> Vec {
    if (t > 0.05) return Vec::Constant(2, NAN);
    return good(x, t);
  };
  try {
    integrate(p, numex_start(), FlowParams<double>::asymptotic(2), SlackSchedule<double>::asymptotic(0.01),
              config(1e-2, 1, 1));
    FAIL("expected divergence");
  } catch (const DivergenceError<double>& e) {
    CHECK(e.step_index() >= 5);
    CHECK(e.step_index() <= 7);
    CHECK(e.last_state().finite());
    CHECK(e.partial().samples.size() >= 5);
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
}

TEST_CASE("configuration validation") {
  const auto sc = numex_scenario();
  CHECK_THROWS_AS(integrate(sc.problem, *sc.initial, sc.asymptotic, sc.asymptotic_slack, config(0, 1, 1)),
                  InvalidArgument);
  CHECK_THROWS_AS(integrate(sc.problem, *sc.initial, sc.asymptotic, sc.asymptotic_slack, config(1e-3, 1, 0)),
                  InvalidArgument);
  CHECK_THROWS_AS(integrate(sc.problem, state({2, 1}, {-1}), sc.asymptotic, sc.asymptotic_slack, config(1e-3, 1, 1)),
                  InvalidArgument);
}

TEST_CASE("active-set switch detection") {
  Trajectory<double> traj;
  for (int k = 0; k < 10; ++k) {
    TrajectorySample<double> s;
    s.state.t = k * 0.1;
    s.active = {false, k >= 4};
    traj.samples.push_back(s);
  }
  const auto ev = detect_active_switches(traj);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].constraint == 1);
  CHECK(ev[0].activated);
  CHECK(ev[0].t == doctest::Approx(0.4));

  for (auto& s : traj.samples) s.active = {false, false};
  CHECK(detect_active_switches(traj).empty());
  CHECK_THROWS_AS(detect_active_switches(Trajectory<double>{}), InvalidArgument);
}
