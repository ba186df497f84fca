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

#ifndef TVPD_ORACLE_HPP_
#define TVPD_ORACLE_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tvpd/lagrangian.hpp"

namespace tvpd {

template <typename Scalar>
struct OracleSolution {
  Scalar t = Scalar(0);
  VectorX<Scalar> x_star;
  VectorX<Scalar> lambda_star;
  std::vector<Index> active_set;
  Scalar kkt_residual = Scalar(0);  // ||grad_x f + sum lambda_i grad_x g_i||
  Scalar objective = Scalar(0);
  Scalar max_violation = Scalar(0);        // max(0, max_i g_i)
  Scalar min_complementarity = Scalar(0);  // min_i lambda_i g_i
  bool strict_complementarity = true;      // no weakly active constraint
  bool tie = false;         // another active set reaches the same objective within 1e-10
  bool degenerate = false;  // winning stationarity system was singular
  std::string error;        // set by solve_trajectory when this sample failed

  bool ok() const { return error.empty(); }
};

template <typename Scalar>
struct OracleOptions {
  Scalar residual_tol = Scalar(1e-12);
  int max_iterations = 100;
  int max_halvings = 40;
  Scalar feasibility_tol = Scalar(1e-8);
  Scalar dual_tol = Scalar(1e-10);
  // Accept a candidate that stalled above residual_tol if its residual is below this.
  Scalar accept_tol = Scalar(1e-9);
  Scalar tie_tol = Scalar(1e-10);
};

namespace detail {

template <typename Scalar>
struct NewtonResult {
  VectorX<Scalar> x;
  VectorX<Scalar> lambda_A;
  Scalar residual = Scalar(0);
  bool converged = false;
  bool singular = false;
};

template <typename Scalar>
std::vector<Index> subset_indices(unsigned long mask, Index m) {
  std::vector<Index> idx;
  for (Index i = 0; i < m; ++i)
    if (mask & (1UL << i)) idx.push_back(i);
  return idx;
}

// Residual of  grad_x f + G_A lambda_A = 0,  g_A = 0.
template <typename Scalar>
VectorX<Scalar> kkt_equations(const TimeVaryingProblem<Scalar>& p, const VectorX<Scalar>& x,
                              const VectorX<Scalar>& lam, const std::vector<Index>& A, Scalar t) {
  const Index n = p.n, a = static_cast<Index>(A.size());
  VectorX<Scalar> F(n + a);
  F.head(n) = raw_grad_x_f(p, x, t);
  if (a > 0) {
    const MatrixX<Scalar> G = raw_grad_x_g(p, x, t);
    const VectorX<Scalar> g = eval_constraints(p, x, t);
    for (Index k = 0; k < a; ++k) {
      F.head(n) += lam[k] * G.col(A[static_cast<std::size_t>(k)]);
      F[n + k] = g[A[static_cast<std::size_t>(k)]];
    }
  }
  return F;
}

// [[hess_xx L_A, G_A], [G_A^T, 0]]
template <typename Scalar>
MatrixX<Scalar> kkt_matrix(const TimeVaryingProblem<Scalar>& p, const std::vector<Index>& A, Scalar t,
                           const VectorX<Scalar>& x, const VectorX<Scalar>& lambda_A) {
  const Index n = p.n, a = static_cast<Index>(A.size());
  MatrixX<Scalar> K = MatrixX<Scalar>::Zero(n + a, n + a);
  MatrixX<Scalar> H = eval_hess_xx_f(p, x, t);
  if (a > 0) {
    const MatrixX<Scalar> G = raw_grad_x_g(p, x, t);
    const auto Hg = eval_hess_xx_g(p, x, t);
    for (Index k = 0; k < a; ++k) {
      const Index i = A[static_cast<std::size_t>(k)];
      H += lambda_A[k] * Hg[static_cast<std::size_t>(i)];
      K.block(0, n + k, n, 1) = G.col(i);
      K.block(n + k, 0, 1, n) = G.col(i).transpose();
    }
  }
  K.topLeftCorner(n, n) = H;
  return K;
}

template <typename Scalar>
NewtonResult<Scalar> newton_subset(const TimeVaryingProblem<Scalar>& p, const std::vector<Index>& A, Scalar t,
                                   const VectorX<Scalar>& x0, const OracleOptions<Scalar>& opt) {
  using std::isfinite;
  const Index n = p.n, a = static_cast<Index>(A.size());
  NewtonResult<Scalar> r;
  r.x = x0;
  r.lambda_A = VectorX<Scalar>::Zero(a);
  if (a > 0) {
    // Least-squares multipliers at the starting point.
    const MatrixX<Scalar> G = raw_grad_x_g(p, x0, t);
    MatrixX<Scalar> GA(n, a);
    for (Index k = 0; k < a; ++k) GA.col(k) = G.col(A[static_cast<std::size_t>(k)]);
    r.lambda_A = GA.completeOrthogonalDecomposition().solve(-raw_grad_x_f(p, x0, t));
  }
  VectorX<Scalar> F = kkt_equations(p, r.x, r.lambda_A, A, t);
  r.residual = F.norm();
  Eigen::CompleteOrthogonalDecomposition<MatrixX<Scalar>> cod;
  auto factor = [&] {
    cod.compute(kkt_matrix(p, A, t, r.x, r.lambda_A));
    cod.setThreshold(Scalar(1e-11));
  };
  for (int it = 0; it < opt.max_iterations && r.residual > opt.residual_tol; ++it) {
    factor();
    const VectorX<Scalar> d = -cod.solve(F);

    Scalar step = Scalar(1);
    bool improved = false;
    for (int h = 0; h <= opt.max_halvings; ++h, step /= 2) {
      const VectorX<Scalar> xn = r.x + step * d.head(n);
      const VectorX<Scalar> ln = r.lambda_A + step * d.tail(a);
      const VectorX<Scalar> Fn = kkt_equations(p, xn, ln, A, t);
      const Scalar rn = Fn.norm();
      if (isfinite(rn) && rn < r.residual) {
        r.x = xn;
        r.lambda_A = ln;
        F = Fn;
        r.residual = rn;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  factor();
  r.singular = cod.rank() < n + a;
  r.converged = r.residual <= opt.residual_tol * (Scalar(1) + r.x.norm()) || r.residual <= opt.accept_tol;
  return r;
}

// Minimum-norm Newton on grad_x f = 0; used as the starting point of every subset.
template <typename Scalar>
VectorX<Scalar> unconstrained_start(const TimeVaryingProblem<Scalar>& p, Scalar t, const VectorX<Scalar>& x0,
                                    const OracleOptions<Scalar>& opt) {
  return newton_subset<Scalar>(p, {}, t, x0, opt).x;
}

// Approximate minimizer of f + rho/2 sum max(0, g)^2 for rho = 1, 10, ..., 1e8,
// each level warm-started from the previous one. Puts subset Newton in the
// basin of the right root when constraints are curved.
template <typename Scalar>
VectorX<Scalar> penalty_start(const TimeVaryingProblem<Scalar>& p, Scalar t, const VectorX<Scalar>& x0) {
  using std::isfinite;
  VectorX<Scalar> x = x0;
  auto phi = [&](const VectorX<Scalar>& z, Scalar rho) {
    const VectorX<Scalar> g = eval_constraints(p, z, t).cwiseMax(Scalar(0));
    return eval_objective(p, z, t) + rho / 2 * g.squaredNorm();
  };
  for (Scalar rho = 1; rho <= Scalar(1e8); rho *= 10) {
    for (int it = 0; it < 50; ++it) {
      const VectorX<Scalar> g = eval_constraints(p, x, t);
      const MatrixX<Scalar> G = raw_grad_x_g(p, x, t);
      VectorX<Scalar> grad = raw_grad_x_f(p, x, t);
      MatrixX<Scalar> H = eval_hess_xx_f(p, x, t);
      std::vector<MatrixX<Scalar>> Hg;
      for (Index i = 0; i < p.m; ++i) {
        if (g[i] <= 0) continue;
        if (Hg.empty()) Hg = eval_hess_xx_g(p, x, t);
        grad += rho * g[i] * G.col(i);
        H += rho * (G.col(i) * G.col(i).transpose() + g[i] * Hg[static_cast<std::size_t>(i)]);
      }
      if (grad.norm() <= Scalar(1e-12) * (Scalar(1) + rho)) break;
      Eigen::CompleteOrthogonalDecomposition<MatrixX<Scalar>> cod(H);
      cod.setThreshold(Scalar(1e-11));
      const VectorX<Scalar> d = -cod.solve(grad);
      const Scalar f0 = phi(x, rho);
      Scalar step = 1;
      bool moved = false;
      for (int h = 0; h < 40; ++h, step /= 2) {
        const VectorX<Scalar> xn = x + step * d;
        const Scalar fn = phi(xn, rho);
        if (isfinite(fn) && fn < f0) {
          x = xn;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
  }
  return x;
}

template <typename Scalar>
struct Candidate {
  unsigned long mask = 0;
  NewtonResult<Scalar> newton;
  VectorX<Scalar> lambda;
  Scalar objective = Scalar(0);
  bool feasible = false;
};

template <typename Scalar>
void finish_solution(const TimeVaryingProblem<Scalar>& p, OracleSolution<Scalar>& s, Scalar dual_tol) {
  const VectorX<Scalar> g = eval_constraints(p, s.x_star, s.t);
  VectorX<Scalar> r = eval_grad_x_f(p, s.x_star, s.t);
  if (p.m > 0) r.noalias() += eval_grad_x_g(p, s.x_star, s.t) * s.lambda_star;
  s.kkt_residual = r.norm();
  s.objective = eval_objective(p, s.x_star, s.t);
  s.max_violation = p.m > 0 ? std::max(Scalar(0), g.maxCoeff()) : Scalar(0);
  s.min_complementarity = p.m > 0 ? s.lambda_star.cwiseProduct(g).minCoeff() : Scalar(0);
  s.strict_complementarity = true;
  for (Index i = 0; i < p.m; ++i) {
    const bool in_set = std::find(s.active_set.begin(), s.active_set.end(), i) != s.active_set.end();
    if (in_set && s.lambda_star[i] <= dual_tol) s.strict_complementarity = false;
    if (!in_set && g[i] >= -dual_tol) s.strict_complementarity = false;
  }
}

}  // namespace detail

/// KKT point of the frozen problem at time t, by enumerating active sets
/// (|A| <= n) and solving each stationarity system with damped Newton.
template <typename Scalar>
OracleSolution<Scalar> solve_sampled(const TimeVaryingProblem<Scalar>& p, Scalar t,
                                     const std::optional<VectorX<Scalar>>& warm_start = std::nullopt,
                                     const OracleOptions<Scalar>& opt = {}) {
  if (p.m > 20) throw InvalidArgument("active-set enumeration supports at most 20 constraints");
  if (!(t >= 0)) throw InvalidArgument("time must be nonnegative");
  const Index n = p.n, m = p.m;
  const VectorX<Scalar> x0 = warm_start ? *warm_start : VectorX<Scalar>::Zero(n);
  if (x0.size() != n) throw InvalidArgument("warm start has the wrong dimension");
  const VectorX<Scalar> plain = detail::unconstrained_start(p, t, x0, opt);
  std::vector<VectorX<Scalar>> starts{plain};
  if (m > 0) starts.insert(starts.begin(), detail::penalty_start(p, t, plain));

  std::vector<detail::Candidate<Scalar>> cands;
  const detail::Candidate<Scalar>* best = nullptr;
  const unsigned long count = 1UL << m;
  for (const auto& start : starts) {
    cands.clear();
    for (unsigned long mask = 0; mask < count; ++mask) {
      if (std::popcount(mask) > n) continue;
      const auto A = detail::subset_indices<Scalar>(mask, m);
      detail::Candidate<Scalar> c;
      c.mask = mask;
      c.newton = detail::newton_subset(p, A, t, start, opt);
      if (!c.newton.x.allFinite()) continue;
      c.lambda = VectorX<Scalar>::Zero(m);
      for (std::size_t k = 0; k < A.size(); ++k) c.lambda[A[k]] = c.newton.lambda_A[static_cast<Index>(k)];
      const VectorX<Scalar> g = eval_constraints(p, c.newton.x, t);
      c.feasible = (m == 0 || g.maxCoeff() <= opt.feasibility_tol) && (m == 0 || c.lambda.minCoeff() >= -opt.dual_tol);
      c.objective = eval_objective(p, c.newton.x, t);
      cands.push_back(std::move(c));
    }

    for (bool allow_singular : {false, true}) {
      for (const auto& c : cands) {
        if (!c.feasible || !c.newton.converged || (c.newton.singular && !allow_singular)) continue;
        if (!best || c.objective < best->objective) best = &c;
      }
      if (best) break;
    }
    if (best) break;
  }
  if (!best) throw InfeasibleError("no feasible KKT candidate at t=" + std::to_string(static_cast<double>(t)));
  for (const auto& c : cands)
    if (c.feasible && !c.newton.converged && c.objective < best->objective - opt.tie_tol)
      throw SolverError("Newton did not converge on the best active set", c.mask);

  OracleSolution<Scalar> s;
  s.t = t;
  s.x_star = best->newton.x;
  s.lambda_star = best->lambda.cwiseMax(Scalar(0));
  s.active_set = detail::subset_indices<Scalar>(best->mask, m);
  s.degenerate = best->newton.singular;
  for (const auto& c : cands)
    if (&c != best && c.feasible && c.newton.converged && std::abs(c.objective - best->objective) <= opt.tie_tol &&
        (c.newton.x - best->newton.x).norm() > Scalar(1e-6))
      s.tie = true;
  detail::finish_solution(p, s, opt.dual_tol);
  return s;
}

/// One solution per time, warm-starting each from the previous x. Runs
/// sequentially; failed samples carry their error message instead of throwing.
template <typename Scalar>
std::vector<OracleSolution<Scalar>> solve_trajectory(const TimeVaryingProblem<Scalar>& p,
                                                     const std::vector<Scalar>& times,
                                                     const OracleOptions<Scalar>& opt = {}) {
  if (!std::is_sorted(times.begin(), times.end())) throw InvalidArgument("times must be sorted ascending");
  std::vector<OracleSolution<Scalar>> out;
  out.reserve(times.size());
  std::optional<VectorX<Scalar>> warm;
  for (Scalar t : times) {
    try {
      out.push_back(solve_sampled(p, t, warm, opt));
      warm = out.back().x_star;
    } catch (const Error& e) {
      OracleSolution<Scalar> bad;
      bad.t = t;
      bad.error = e.what();
      out.push_back(std::move(bad));
    }
  }
  return out;
}

/// Brute-force feasible grid search over [lo, hi] followed by repeated local
/// grid refinement around the best point. For cross-checking solve_sampled.
template <typename Scalar>
VectorX<Scalar> grid_refine_oracle(const TimeVaryingProblem<Scalar>& p, Scalar t, const VectorX<Scalar>& lo,
                                   const VectorX<Scalar>& hi, Index resolution, int refinements = 30) {
  const Index n = p.n;
  if (n > 3) throw InvalidArgument("grid oracle supports n <= 3");
  if (lo.size() != n || hi.size() != n) throw InvalidArgument("bounds have the wrong dimension");
  if (resolution < 2) throw InvalidArgument("resolution must be at least 2");

  auto search = [&](const VectorX<Scalar>& a, const VectorX<Scalar>& b, Index res,
                    std::optional<VectorX<Scalar>>& best, Scalar& best_f) {
    std::vector<Index> idx(static_cast<std::size_t>(n), 0);
    VectorX<Scalar> x(n);
    while (true) {
      for (Index j = 0; j < n; ++j)
        x[j] = a[j] + (b[j] - a[j]) * static_cast<Scalar>(idx[static_cast<std::size_t>(j)]) / static_cast<Scalar>(res - 1);
      if (p.m == 0 || eval_constraints(p, x, t).maxCoeff() <= Scalar(0)) {
        const Scalar fx = eval_objective(p, x, t);
        if (!best || fx < best_f) {
          best = x;
          best_f = fx;
        }
      }
      Index j = 0;
      while (j < n && ++idx[static_cast<std::size_t>(j)] == res) idx[static_cast<std::size_t>(j++)] = 0;
      if (j == n) break;
    }
  };

  std::optional<VectorX<Scalar>> best;
  Scalar best_f = std::numeric_limits<Scalar>::infinity();
  search(lo, hi, resolution, best, best_f);
  if (!best) throw InfeasibleError("no feasible grid point");
  VectorX<Scalar> cell = (hi - lo) / static_cast<Scalar>(resolution - 1);
  for (int r = 0; r < refinements; ++r) {
    const VectorX<Scalar> centre = *best;
    search(VectorX<Scalar>(centre - 2 * cell), VectorX<Scalar>(centre + 2 * cell), 21, best, best_f);
    cell /= Scalar(5);
  }
  return *best;
}

}  // namespace tvpd

#endif  // TVPD_ORACLE_HPP_
