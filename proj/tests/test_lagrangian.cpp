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

TEST_CASE("gradient of the Lagrangian") {
  const Problem p = numex_problem();
  const Vec g = grad_x_lagrangian(p, numex_start());
  CHECK(g[0] == doctest::Approx(-2.0));
  CHECK(g[1] == doctest::Approx(10.0));

  const State zero = state({2, 1}, {0}, 0.3);
  CHECK((grad_x_lagrangian(p, zero) - eval_grad_x_f(p, zero.x, zero.t)).norm() == 0.0);

  CHECK_THROWS_AS(grad_x_lagrangian(p, state({2, 1}, {-1}, 0)), InvalidArgument);
  CHECK_THROWS_AS(grad_x_lagrangian(p, state({2, 1}, {1, 1}, 0)), InvalidArgument);
}

TEST_CASE("gradient vanishes at oracle optimizers") {
  for (const auto& name : builtin_names()) {
    const auto sc = builtin(name);
    for (double t : {0.0, 1.3, sc.horizon / 2}) {
      const auto sol = solve_sampled(sc.problem, t);
      State s{sol.x_star, sol.lambda_star, t};
      CAPTURE(name);
      CHECK(grad_x_lagrangian(sc.problem, s).norm() <= 1e-8);
    }
  }
}

TEST_CASE("bundle on the numerical example") {
  const Problem p = numex_problem();
  const auto b = assemble_bundle(p, numex_start());
  CHECK((b.hess_xx_L - Mat(Eigen::Vector2d(1, 3).asDiagonal())).norm() == 0.0);
  CHECK(b.g_vals[0] == doctest::Approx(-2.0));
  CHECK(b.G_d()(0, 0) == b.g_vals[0]);
  CHECK((b.grad_x_G - Mat(Eigen::Vector2d(-1, 1))).norm() == 0.0);
  CHECK(b.grad_t_G[0] == doctest::Approx(0.0));
  CHECK((b.grad_xt_f - Vec(Eigen::Vector2d(1, 0))).norm() < 1e-15);
  CHECK(b.grad_xt_G.norm() == 0.0);
  CHECK(b.hessian_asymmetry == 0.0);
}

TEST_CASE("bundle of an unconstrained problem") {
  const Problem p = quadratic_problem();
  const auto b = assemble_bundle(p, state({1, 2}, {}, 0.5));
  CHECK(b.m() == 0);
  CHECK(b.grad_x_G.cols() == 0);
  CHECK(b.lambda_rowscale.rows() == 0);
  CHECK((b.grad_x_L - eval_grad_x_f(p, Vec(Eigen::Vector2d(1, 2)), 0.5)).norm() == 0.0);
}

TEST_CASE("linear constraints leave the Hessian unchanged") {
  const Problem p = numex_problem();
  const State s = state({0.3, -0.7}, {2.5}, 1.1);
  const auto b = assemble_bundle(p, s);
  CHECK((b.hess_xx_L - eval_hess_xx_f(p, s.x, s.t)).norm() == 0.0);
}

TEST_CASE("row scaling and constraint diagonal are exact") {
  const auto sc = eftp_example1();
  const auto states = sample_states(sc, 50, 11);
  for (const auto& s : states) {
    const auto b = assemble_bundle(sc.problem, s);
    for (Index i = 0; i < b.m(); ++i) {
      CHECK((b.lambda_rowscale.row(i) - s.lambda[i] * b.grad_x_G.col(i).transpose()).norm() == 0.0);
      CHECK(b.G_d()(i, i) == b.g_vals[i]);
    }
    CHECK((b.hess_xx_L - b.hess_xx_L.transpose()).norm() == 0.0);
  }
}

TEST_CASE("finite-difference Hessians are symmetrized and the asymmetry recorded") {
  const Problem p = fd_only(numex_problem());
  const auto b = assemble_bundle(p, state({0.31, -1.7}, {1.3}, 0.9));
  CHECK((b.hess_xx_L - b.hess_xx_L.transpose()).norm() == 0.0);
  CHECK(b.hessian_asymmetry < 1e-5);
  CHECK((b.hess_xx_L - Mat(Eigen::Vector2d(1, 3).asDiagonal())).norm() < 1e-5);
}

TEST_CASE("Lyapunov value") {
  const Problem p = numex_problem();
  CHECK(lyapunov_value(assemble_bundle(p, numex_start())) == doctest::Approx(52.0));
  EvalBundle<double> b;
  b.grad_x_L = Eigen::Vector2d(3, 4);
  CHECK(lyapunov_value(b) == 12.5);
  b.grad_x_L = Vec::Zero(2);
  CHECK(lyapunov_value(b) == 0.0);
}

TEST_CASE("strong convexity of the Lagrangian in x") {
  const Problem p = numex_problem();
  const double mu = *p.mu;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-5, 5), ul(0, 5), ut(0, 20);
  for (int k = 0; k < 1000; ++k) {
    const double t = ut(rng);
    State s1 = state({u(rng), u(rng)}, {ul(rng)}, t);
    State s2 = s1;
    s2.x = Eigen::Vector2d(u(rng), u(rng));
    const double lhs = lagrangian_value(p, s2) - lagrangian_value(p, s1);
    const double rhs = grad_x_lagrangian(p, s1).dot(s2.x - s1.x) + 0.5 * mu * (s2.x - s1.x).squaredNorm();
    CHECK(lhs >= rhs - 1e-8);
  }
  // The eFTP objective is only convex, so the same inequality holds with mu = 0.
  const auto sc = eftp_example2();
  for (const auto& s1 : sample_states(sc, 200, 6)) {
    State s2 = s1;
    s2.x += Vec::Ones(s1.x.size());
    const double lhs = lagrangian_value(sc.problem, s2) - lagrangian_value(sc.problem, s1);
    CHECK(lhs >= grad_x_lagrangian(sc.problem, s1).dot(s2.x - s1.x) - 1e-8 * (1 + std::abs(lhs)));
  }
}

TEST_CASE("gradient is nonzero at random non-optimal feasible states") {
  const Problem p = numex_problem();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-5, 5), ut(0, 20);
  int tested = 0;
  while (tested < 1000) {
    const double t = ut(rng);
    const Vec x = Eigen::Vector2d(u(rng), u(rng));
    if (eval_constraints(p, x, t)[0] > 0) continue;
    const auto sol = solve_sampled(p, t);
    if ((x - sol.x_star).norm() < 1e-3) continue;
    ++tested;
    CHECK(grad_x_lagrangian(p, State{x, sol.lambda_star, t}).norm() > 0);
  }
}
