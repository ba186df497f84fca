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
#include <numbers>

#include "helpers.hpp"

using namespace tvpd;
using namespace testing;

namespace {

// Literal expansion of the primal and dual vector fields, written out term by
// term without the block inverse. `k` is the correction gain (alpha, or the
// fixed-time coefficient) and `sign` multiplies every G_d lambda term.
Vec explicit_field(const EvalBundle<double>& b, const Mat& m_tilde, double k, double sign) {
  const Index n = b.n(), m = b.m();
  const Vec& lam = b.lambda;
  const Mat Hinv = b.hess_xx_L.inverse();
  const Mat Minv = m_tilde.inverse();
  const Mat& G = b.grad_x_G;
  const Mat LG = lam.asDiagonal() * G.transpose();
  const Vec P = k * b.grad_x_L + b.grad_xt_f + b.grad_xt_G * lam;
  const Vec Gdl = sign * b.g_vals.cwiseProduct(lam);

  Vec out(n + m);
  out.head(n) = -Hinv * (P + G * G.transpose() * b.grad_x_L + G * Minv * LG * Hinv * P -
                         G * Minv * (lam.cwiseProduct(b.grad_t_G) - Gdl));
  out.tail(m) = Minv * (lam.cwiseProduct(G.transpose() * Hinv * P - b.grad_t_G)) + Minv * Gdl +
                G.transpose() * b.grad_x_L;
  return out;
}

}  // namespace

TEST_CASE("prediction term") {
  const auto b = assemble_bundle(numex_problem(), numex_start());
  const Vec h = h_pred(b, b.lambda);
  CHECK(h[0] == doctest::Approx(-1.0));
  CHECK(h[1] == doctest::Approx(0.0));
  CHECK(h[2] == doctest::Approx(0.0));

  const Problem qp = static_qp(Mat::Identity(2, 2), Vec::Ones(2), Mat::Ones(1, 2), Vec::Ones(1));
  CHECK(h_pred(assemble_bundle(qp, state({1, 2}, {3}, 0.4)), Vec(Vec::Constant(1, 3))).norm() == 0.0);

  const auto bt = assemble_bundle(numex_problem(), state({1, 2}, {0}, 1.0));
  REQUIRE(bt.grad_t_G[0] != 0);
  CHECK(h_pred(bt, bt.lambda)[2] == 0.0);
}

TEST_CASE("asymptotic correction term") {
  const auto b = assemble_bundle(numex_problem(), numex_start());
  const Vec h = h_corr_asymptotic(b, b.lambda, 2.0);
  CHECK(h[0] == doctest::Approx(4.0));
  CHECK(h[1] == doctest::Approx(-20.0));
  CHECK(h[2] == doctest::Approx(-8.0));

  EvalBundle<double> u;
  u.grad_x_L = Eigen::Vector2d(1, 0);
  u.g_vals = Vec::Constant(1, -1);
  const Vec hu = h_corr_asymptotic(u, Vec(Vec::Zero(1)), 1.0);
  CHECK((hu - Vec(Eigen::Vector3d(-1, 0, 0))).norm() == 0.0);
}

TEST_CASE("fixed-time correction term") {
  const auto fp = FlowParams<double>::fixed_time(1, 1, 0.2, -2);
  EvalBundle<double> z;
  z.grad_x_L = Vec::Zero(2);
  z.g_vals = Vec::Constant(1, -1);
  CHECK(h_corr_fixed(z, Vec(Vec::Ones(1)), fp).head(2).norm() == 0.0);

  z.grad_x_L = Eigen::Vector2d(0.6, 0.8);
  const auto fp2 = FlowParams<double>::fixed_time(1.5, 0.7, 0.3, -1.2);
  CHECK((h_corr_fixed(z, Vec(Vec::Ones(1)), fp2).head(2) + 2.2 * z.grad_x_L).norm() < 1e-15);

  const auto b = assemble_bundle(numex_problem(), numex_start());
  const double r = std::sqrt(104.0);
  const double coeff = std::pow(r, -0.2) + std::pow(r, 2.0);
  CHECK(std::pow(r, -0.2) == doctest::Approx(0.6284).epsilon(1e-4));
  const Vec h = h_corr_fixed(b, b.lambda, fp);
  CHECK(h[0] == doctest::Approx(coeff * 2));
  CHECK(h[1] == doctest::Approx(-coeff * 10));
  CHECK(h[2] == doctest::Approx(-8.0));
  CHECK_THROWS_AS(h_corr_fixed(b, b.lambda, FlowParams<double>::asymptotic(1)), InvalidArgument);
}

TEST_CASE("fixed-time coefficient cap") {
  auto fp = FlowParams<double>::fixed_time(1, 1, 0.2, -2);
  bool capped = false;
  fixed_time_coefficient(1e3, fp, &capped);
  CHECK_FALSE(capped);
  const double k = fixed_time_coefficient(1e5, fp, &capped);
  CHECK(capped);
  CHECK(k == doctest::Approx(1e8 + std::pow(1e5, -0.2)));
}

TEST_CASE("augmented term") {
  const auto b = assemble_bundle(numex_problem(), numex_start());
  const Vec h = h_aug(b);
  CHECK(h[0] == doctest::Approx(12.0));
  CHECK(h[1] == doctest::Approx(-4.0));
  CHECK(h[2] == doctest::Approx(12.0));

  for (const auto& name : {"numex", "eftp_example1", "eftp_example2"}) {
    const auto sc = builtin(name);
    for (double t : {0.0, 2.5, sc.horizon * 0.7}) {
      const auto sol = solve_sampled(sc.problem, t);
      CHECK(h_aug(assemble_bundle(sc.problem, State{sol.x_star, sol.lambda_star, t})).norm() <= 1e-8);
    }
  }

  Problem flat = numex_problem();
  flat.grad_x_g = [](const Vec&, double) -> Mat { return Mat::Zero(2, 1); };
  CHECK(h_aug(assemble_bundle(flat, numex_start())).norm() == 0.0);
}

TEST_CASE("augmented term is nonzero away from the optimizer") {
  const Problem p = numex_problem();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-5, 5), ut(0, 20);
  for (int k = 0; k < 1000; ++k) {
    const State s = state({u(rng), u(rng)}, {0}, ut(rng));
    const auto b = assemble_bundle(p, s);
    if (b.grad_x_L.norm() < 1e-8 || !some_constraint_not_orthogonal(p, s.x, s.t, 1e-8)) continue;
    CHECK(h_aug(b).tail(1).norm() > 0);
  }
}

TEST_CASE("componentwise projection") {
  CHECK(project_plus(0.5, -2.0) == -2.0);
  CHECK(project_plus(0.0, -2.0) == 0.0);
  CHECK(project_plus(0.0, 3.0) == 3.0);
  CHECK(project_plus(1e-10, -1.0) == 0.0);
  CHECK_THROWS_AS(project_plus(-0.1, 1.0), InvalidArgument);
}

TEST_CASE("flow field at the numerical example start") {
  const Problem p = numex_problem();
  const auto fp = FlowParams<double>::asymptotic(2);
  const auto sl = SlackSchedule<double>::asymptotic(0.01);
  const auto fe = evaluate_flow(p, numex_start(), fp, sl);
  CHECK(fe.velocity.allFinite());
  CHECK(fe.velocity.size() == 3);
  CHECK(fe.velocity[2] == fe.unprojected[2]);
  CHECK((rhs(p, numex_start(), fp, sl) - fe.velocity).norm() == 0.0);
}

TEST_CASE("flow field matches the expanded vector fields") {
  for (const auto& name : {"numex", "eftp_example1", "eftp_example2"}) {
    const auto sc = builtin(name);
    const auto states = sample_states(sc, 200, 31);
    for (auto dc : {DualCorrection::published, DualCorrection::stabilized}) {
      for (const auto* fp0 : {&sc.asymptotic, &sc.fixed}) {
        FlowParams<double> fp = *fp0;
        fp.dual_correction = dc;
        const auto& sl = fp0 == &sc.asymptotic ? sc.asymptotic_slack : sc.fixed_slack;
        for (const auto& s : states) {
          const auto fe = evaluate_flow(sc.problem, s, fp, sl);
          const auto& b = fe.bundle;
          const Mat mt = approx_schur(b, sl, s.t).m_tilde;
          const Vec ref = explicit_field(b, mt, fe.correction_coeff, dc == DualCorrection::published ? 1 : -1);
          CAPTURE(name);
          CHECK((fe.unprojected - ref).cwiseAbs().maxCoeff() <= 1e-10 * (1 + ref.cwiseAbs().maxCoeff()));
        }
      }
    }
  }
}

TEST_CASE("equilibrium of a time-invariant problem") {
  const Mat Q = (Mat(2, 2) << 2, 0.5, 0.5, 1).finished();
  const Problem p = static_qp(Q, Vec(Eigen::Vector2d(-1, -1)), Mat(Eigen::RowVector2d(1, 1)), Vec::Constant(1, 0.5));
  const auto sol = solve_sampled(p, 0.0);
  REQUIRE(sol.lambda_star[0] > 0);
  const State s{sol.x_star, sol.lambda_star, 0.0};
  CHECK(rhs(p, s, FlowParams<double>::asymptotic(2), SlackSchedule<double>::asymptotic(0.01)).norm() <= 1e-6);
  CHECK(rhs(p, s, FlowParams<double>::fixed_time(1, 1, 0.2, -2), SlackSchedule<double>::none()).norm() <= 1e-6);
}

TEST_CASE("projection blocks inward dual velocity at zero multipliers") {
  const Problem p = numex_problem();
  // Infeasible-side start with the multiplier at zero: the unprojected dual
  // velocity is negative, the projected one is exactly zero.
  bool seen = false;
  for (double x1 = -3; x1 <= 3 && !seen; x1 += 0.25) {
    const State s = state({x1, -2}, {0}, 0.4);
    const auto fe = evaluate_flow(p, s, FlowParams<double>::asymptotic(2), SlackSchedule<double>::asymptotic(0.01));
    if (fe.unprojected[2] < 0) {
      CHECK(fe.velocity[2] == 0.0);
      seen = true;
    }
  }
  CHECK(seen);
}

TEST_CASE("Lyapunov decay of both flows") {
  for (const auto& name : builtin_names()) {
    const auto sc = builtin(name);
    for (const auto& s : sample_states(sc, 1000, 41)) {
      for (const auto* fp : {&sc.asymptotic, &sc.fixed}) {
        const auto& sl = fp == &sc.asymptotic ? sc.asymptotic_slack : sc.fixed_slack;
        const auto fe = evaluate_flow(sc.problem, s, *fp, sl);
        const double V = lyapunov_value(fe.bundle);
        const double r = decay_residual(*fp, V, lyapunov_derivative(fe.bundle, fe.velocity));
        CAPTURE(name);
        CHECK(r <= 1e-8 * (1 + V));
      }
    }
  }
}

TEST_CASE("projection never increases the Lyapunov derivative") {
  for (const auto& name : {"numex", "eftp_example1", "eftp_example2"}) {
    const auto sc = builtin(name);
    std::mt19937_64 rng(8);
    for (auto s : sample_states(sc, 500, 43)) {
      for (Index i = 0; i < s.lambda.size(); ++i)
        if (rng() % 2) s.lambda[i] = 0;
      if (s.lambda.maxCoeff() == 0) s.lambda[0] = 1;  // keeps the eFTP Hessian invertible
      const auto fe = evaluate_flow(sc.problem, s, sc.asymptotic, sc.asymptotic_slack);
      const double proj = lyapunov_derivative(fe.bundle, fe.velocity);
      const double raw = lyapunov_derivative(fe.bundle, fe.unprojected);
      CHECK(proj <= raw + 1e-10 * (1 + std::abs(raw)));
    }
  }
}

TEST_CASE("settling-time bounds") {
  CHECK(settling_time_bound(FlowParams<double>::fixed_time(1, 1, 0.2, -2)) == doctest::Approx(5.6089).epsilon(2e-4));
  CHECK(settling_time_bound(FlowParams<double>::fixed_time(1, 1, 0.1, -2)) == doctest::Approx(10.6026).epsilon(1e-4));
  CHECK(settling_time_bound(FlowParams<double>::fixed_time(2, 2, 0.5, -1)) == doctest::Approx(1.5428).epsilon(5e-4));
  CHECK_THROWS_AS(settling_time_bound(FlowParams<double>::finite_time(1, 0.2)), UnsupportedError);
  CHECK_THROWS_AS(settling_time_bound(FlowParams<double>::fixed_time(1, 1, 1.5, -2)), InvalidArgument);
}

TEST_CASE("finite-time bound") {
  const Problem p = numex_problem();
  const auto fp = FlowParams<double>::finite_time(1, 0.2);
  CHECK(finite_time_bound(fp, numex_start(), p) == doctest::Approx(5 * std::pow(104.0, 0.1)));
  CHECK(finite_time_bound(fp, numex_start(), p) == doctest::Approx(7.956).epsilon(1e-3));

  const auto sol = solve_sampled(p, 0.0);
  State opt{sol.x_star, sol.lambda_star, 0.0};
  opt.x = Eigen::Vector2d(0, -1);  // exact unconstrained minimizer at t = 0
  CHECK(finite_time_bound(fp, opt, p) == 0.0);

  // ||grad L|| = 1 at x = (1, -1), lambda = 0, t = 0.
  CHECK(finite_time_bound(FlowParams<double>::finite_time(10, 0.5), state({1, -1}, {0}, 0), p) ==
        doctest::Approx(0.2));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(validate(FlowParams<double>::asymptotic(0)), InvalidArgument);
  CHECK_THROWS_AS(validate(FlowParams<double>::fixed_time(1, 0, 0.2, -2)), InvalidArgument);
  CHECK_THROWS_AS(validate(FlowParams<double>::fixed_time(1, 1, 0.2, 0.5)), InvalidArgument);
  auto fin = FlowParams<double>::finite_time(1, 0.2);
  CHECK_NOTHROW(validate(fin));
  fin.c2 = 1;
  CHECK_THROWS_AS(validate(fin), InvalidArgument);
}
