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

#ifndef TVPD_LAGRANGIAN_HPP_
#define TVPD_LAGRANGIAN_HPP_

#include <Eigen/Dense>

#include <string>

#include "tvpd/problem.hpp"

namespace tvpd {

/// Every Lagrangian-derived quantity at one state (x, lambda, t). All fields
/// come from a single evaluation of the problem at that point.
template <typename Scalar>
struct EvalBundle {
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;

  Scalar t = Scalar(0);
  Vector lambda;

  Vector grad_x_L;
  Matrix hess_xx_L;
  Matrix grad_x_G;         // n x m
  Vector grad_t_G;         // m
  Matrix grad_xt_G;        // n x m
  Vector g_vals;           // m, the diagonal of G_d
  Matrix lambda_rowscale;  // m x n, row i = lambda_i * grad_x g_i^T
  Vector grad_xt_f;

  // Largest |H - H^T| entry seen before symmetrizing hess_xx_L.
  Scalar hessian_asymmetry = Scalar(0);

  Index n() const { return grad_x_L.size(); }
  Index m() const { return g_vals.size(); }
  Matrix G_d() const { return g_vals.asDiagonal(); }
  bool asymmetry_warning() const { return hessian_asymmetry > Scalar(1e-10); }
};

namespace detail {

template <typename Scalar>
void check_state(const TimeVaryingProblem<Scalar>& p, const PrimalDualState<Scalar>& s) {
  check_point(p, s.x, s.t);
  if (s.lambda.size() != p.m)
    throw InvalidArgument("dimension mismatch: lambda has " + std::to_string(s.lambda.size()) +
                          " entries, problem '" + p.name + "' has " + std::to_string(p.m) +
                          " constraints");
  if (!s.dual_feasible()) throw InvalidArgument("lambda must be componentwise nonnegative");
}

}  // namespace detail

template <typename Scalar>
VectorX<Scalar> grad_x_lagrangian(const TimeVaryingProblem<Scalar>& p, const PrimalDualState<Scalar>& s) {
  detail::check_state(p, s);
  VectorX<Scalar> v = eval_grad_x_f(p, s.x, s.t);
  if (p.m > 0) v.noalias() += eval_grad_x_g(p, s.x, s.t) * s.lambda;
  return v;
}

template <typename Scalar>
Scalar lagrangian_value(const TimeVaryingProblem<Scalar>& p, const PrimalDualState<Scalar>& s) {
  detail::check_state(p, s);
  Scalar v = eval_objective(p, s.x, s.t);
  if (p.m > 0) v += s.lambda.dot(eval_constraints(p, s.x, s.t));
  return v;
}

template <typename Scalar>
EvalBundle<Scalar> assemble_bundle(const TimeVaryingProblem<Scalar>& p, const PrimalDualState<Scalar>& s) {
  detail::check_state(p, s);
  EvalBundle<Scalar> b;
  b.t = s.t;
  b.lambda = s.lambda;
  b.grad_x_G = eval_grad_x_g(p, s.x, s.t);
  b.grad_x_L = eval_grad_x_f(p, s.x, s.t);
  b.hess_xx_L = eval_hess_xx_f(p, s.x, s.t);
  b.grad_xt_f = eval_grad_xt_f(p, s.x, s.t);
  b.g_vals = eval_constraints(p, s.x, s.t);
  b.grad_t_G = eval_grad_t_g(p, s.x, s.t);
  b.grad_xt_G = eval_grad_xt_g(p, s.x, s.t);
  if (p.m > 0) {
    b.grad_x_L.noalias() += b.grad_x_G * s.lambda;
    const auto hg = eval_hess_xx_g(p, s.x, s.t);
    for (Index i = 0; i < p.m; ++i) b.hess_xx_L += s.lambda[i] * hg[static_cast<std::size_t>(i)];
  }
  b.lambda_rowscale = s.lambda.asDiagonal() * b.grad_x_G.transpose();

  b.hessian_asymmetry = p.n > 0 ? (b.hess_xx_L - b.hess_xx_L.transpose()).cwiseAbs().maxCoeff() : Scalar(0);
  if (b.hessian_asymmetry > Scalar(0)) {
    const MatrixX<Scalar> sym = (b.hess_xx_L + b.hess_xx_L.transpose()) / Scalar(2);
    b.hess_xx_L = sym;
  }
  return b;
}

template <typename Scalar>
Scalar lyapunov_value(const EvalBundle<Scalar>& b) {
  return b.grad_x_L.squaredNorm() / Scalar(2);
}

}  // namespace tvpd

#endif  // TVPD_LAGRANGIAN_HPP_
