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

#ifndef TVPD_TESTS_HELPERS_HPP_
#define TVPD_TESTS_HELPERS_HPP_

#include <random>

#include "tvpd/tvpd.hpp"

namespace testing {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline tvpd::State state(std::initializer_list<double> x, std::initializer_list<double> lam, double t = 0) {
  tvpd::State s;
  s.x = Eigen::Map<const Vec>(x.begin(), static_cast<Eigen::Index>(x.size()));
  s.lambda = Eigen::Map<const Vec>(lam.begin(), static_cast<Eigen::Index>(lam.size()));
  s.t = t;
  return s;
}

inline tvpd::State numex_start() { return state({2, 1}, {4}, 0); }

// 1-D problem f = x^2 (scaled), g = x - c with constant data, for hand-checked algebra.
inline tvpd::Problem scalar_problem(double hess, double grad_g, double g0) {
  tvpd::Problem p;
  p.name = "scalar";
  p.n = 1;
  p.m = 1;
  p.f = [hess](const Vec& x, double) { return 0.5 * hess * x[0] * x[0]; };
  p.grad_x_f = [hess](const Vec& x, double) -> Vec { return Vec::Constant(1, hess * x[0]); };
  p.grad_xt_f = [](const Vec&, double) -> Vec { return Vec::Zero(1); };
  p.hess_xx_f = [hess](const Vec&, double) -> Mat { return Mat::Constant(1, 1, hess); };
  p.g = [grad_g, g0](const Vec& x, double) -> Vec { return Vec::Constant(1, grad_g * x[0] + g0); };
  p.grad_x_g = [grad_g](const Vec&, double) -> Mat { return Mat::Constant(1, 1, grad_g); };
  p.grad_t_g = [](const Vec&, double) -> Vec { return Vec::Zero(1); };
  p.grad_xt_g = [](const Vec&, double) -> Mat { return Mat::Zero(1, 1); };
  p.hess_xx_g = [](const Vec&, double) { return std::vector<Mat>{Mat::Zero(1, 1)}; };
  return p;
}

// Time-invariant quadratic with linear constraints: f = 1/2 x'Qx + c'x, g = Ax - b.
inline tvpd::Problem static_qp(const Mat& Q, const Vec& c, const Mat& A, const Vec& b) {
  tvpd::Problem p;
  p.name = "static_qp";
  p.n = Q.rows();
  p.m = A.rows();
  const auto n = p.n, m = p.m;
  p.f = [Q, c](const Vec& x, double) { return 0.5 * x.dot(Q * x) + c.dot(x); };
  p.grad_x_f = [Q, c](const Vec& x, double) -> Vec { return Q * x + c; };
  p.grad_xt_f = [n](const Vec&, double) -> Vec { return Vec::Zero(n); };
  p.hess_xx_f = [Q](const Vec&, double) -> Mat { return Q; };
  p.g = [A, b](const Vec& x, double) -> Vec { return A * x - b; };
  p.grad_x_g = [A](const Vec&, double) -> Mat { return A.transpose(); };
  p.grad_t_g = [m](const Vec&, double) -> Vec { return Vec::Zero(m); };
  p.grad_xt_g = [n, m](const Vec&, double) -> Mat { return Mat::Zero(n, m); };
  p.hess_xx_g = [n, m](const Vec&, double) { return std::vector<Mat>(static_cast<std::size_t>(m), Mat::Zero(n, n)); };
  return p;
}

// Copy of `p` with every derivative slot removed, so all derivatives come from differences.
inline tvpd::Problem fd_only(tvpd::Problem p) {
  p.grad_x_f = nullptr;
  p.grad_xt_f = nullptr;
  p.hess_xx_f = nullptr;
  p.grad_x_g = nullptr;
  p.grad_t_g = nullptr;
  p.grad_xt_g = nullptr;
  p.hess_xx_g = nullptr;
  return p;
}

inline std::vector<tvpd::Sample<double>> random_samples(int count, int n, double box, double horizon,
                                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<tvpd::Sample<double>> out;
  for (int k = 0; k < count; ++k) {
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = box * u(rng);
    out.push_back({x, horizon * (u(rng) + 1) / 2});
  }
  return out;
}

}  // namespace testing

#endif  // TVPD_TESTS_HELPERS_HPP_
