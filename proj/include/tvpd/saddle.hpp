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

#ifndef TVPD_SADDLE_HPP_
#define TVPD_SADDLE_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "tvpd/lagrangian.hpp"

namespace tvpd {

enum class SlackKind { asymptotic, fixed_time, none };

/// Diagonal regularizer S(t) subtracted from the Schur complement.
template <typename Scalar>
struct SlackSchedule {
  SlackKind kind = SlackKind::none;
  Scalar delta = Scalar(0.01);
  Scalar rho = Scalar(0.001);
  Scalar k = Scalar(1);
  Scalar t_max = Scalar(1);

  static SlackSchedule none() { return {}; }
  static SlackSchedule asymptotic(Scalar delta) {
    SlackSchedule s;
    s.kind = SlackKind::asymptotic;
    s.delta = delta;
    return s;
  }
  static SlackSchedule fixed_time(Scalar rho, Scalar k, Scalar t_max) {
    SlackSchedule s;
    s.kind = SlackKind::fixed_time;
    s.rho = rho;
    s.k = k;
    s.t_max = t_max;
    return s;
  }
};

inline constexpr double kSlackFactorCap = 1e12;
inline constexpr double kSlackStartTime = 1e-9;

/// s_i(t) for the given constraint values. The fixed-time factor
/// |1 - exp(-(t - t_max)/t)| grows without bound as t -> 0+, so it is capped
/// at kSlackFactorCap.
template <typename Scalar>
VectorX<Scalar> slack_values(const SlackSchedule<Scalar>& sched, const VectorX<Scalar>& g_vals, Scalar t) {
  using std::exp;
  using std::log;
  using std::tanh;
  const Index m = g_vals.size();
  VectorX<Scalar> s = VectorX<Scalar>::Zero(m);
  switch (sched.kind) {
    case SlackKind::none:
      break;
    case SlackKind::asymptotic:
      s = (g_vals.array().abs() + sched.delta) * exp(-t);
      break;
    case SlackKind::fixed_time: {
      if (t >= sched.t_max) break;
      const Scalar tt = std::max(t, Scalar(kSlackStartTime));
      const Scalar expo = -(tt - sched.t_max) / tt;  // > 0 here
      const Scalar cap = Scalar(kSlackFactorCap);
      const Scalar factor = expo >= log(cap + Scalar(1)) ? cap : exp(expo) - Scalar(1);
      const Scalar decay = Scalar(1) - tanh(sched.k * tt);
      s = (g_vals.array().abs() + sched.rho) * (factor * decay);
      break;
    }
  }
  return s.cwiseMax(Scalar(0));
}

/// Symmetric positive-definite factorization of hess_xx_L.
template <typename Scalar>
class HessianFactor {
 public:
  explicit HessianFactor(const MatrixX<Scalar>& H) : llt_(H) {
    if (llt_.info() != Eigen::Success || !(llt_.rcond() > Scalar(1e-14)))
      throw SingularMatrixError("hess_xx_L is not positive definite");
    const auto d = llt_.matrixLLT().diagonal();
    if (d.size() > 0 && !(d.cwiseAbs2().minCoeff() > Scalar(1e-12)))
      throw SingularMatrixError("hess_xx_L is numerically singular");
  }

  template <typename Rhs>
  MatrixX<Scalar> solve(const Eigen::MatrixBase<Rhs>& b) const {
    return llt_.solve(b);
  }
  VectorX<Scalar> solve_vec(const VectorX<Scalar>& b) const { return llt_.solve(b); }
  MatrixX<Scalar> inverse() const {
    const Index n = llt_.matrixLLT().rows();
    return llt_.solve(MatrixX<Scalar>::Identity(n, n));
  }

 private:
  Eigen::LLT<MatrixX<Scalar>> llt_;
};

template <typename Scalar>
struct SaddleJacobian {
  MatrixX<Scalar> top_left;      // hess_xx_L
  MatrixX<Scalar> top_right;     // grad_x_G
  MatrixX<Scalar> bottom_left;   // lambda o grad_x_G^T
  MatrixX<Scalar> bottom_right;  // G_d

  MatrixX<Scalar> dense() const {
    const Index n = top_left.rows();
    const Index m = bottom_right.rows();
    MatrixX<Scalar> J(n + m, n + m);
    J << top_left, top_right, bottom_left, bottom_right;
    return J;
  }
};

template <typename Scalar>
SaddleJacobian<Scalar> saddle_jacobian(const EvalBundle<Scalar>& b) {
  return {b.hess_xx_L, b.grad_x_G, b.lambda_rowscale, b.G_d()};
}

/// M = G_d - (lambda o grad_x_G^T) hess_xx_L^{-1} grad_x_G.
template <typename Scalar>
MatrixX<Scalar> schur_complement(const EvalBundle<Scalar>& b, const HessianFactor<Scalar>& H) {
  return MatrixX<Scalar>(b.G_d()) - b.lambda_rowscale * H.solve(b.grad_x_G);
}

template <typename Scalar>
MatrixX<Scalar> schur_complement(const EvalBundle<Scalar>& b) {
  return schur_complement(b, HessianFactor<Scalar>(b.hess_xx_L));
}

template <typename Scalar>
struct ApproxSchur {
  MatrixX<Scalar> m_tilde;
  VectorX<Scalar> slack;
  bool ridge_applied = false;
  Scalar ridge = Scalar(0);
};

namespace detail {

// |det A| against the Hadamard bound prod_i ||row_i||, which equals |det A|
// for a diagonal matrix and is insensitive to row scaling.
template <typename Scalar>
bool numerically_singular(const MatrixX<Scalar>& A) {
  using std::abs;
  if (A.size() == 0) return false;
  Eigen::FullPivLU<MatrixX<Scalar>> lu(A);
  if (!lu.isInvertible()) return true;
  const Scalar hadamard = A.rowwise().norm().prod();
  return !(abs(lu.determinant()) >= Scalar(1e-12) * hadamard);
}

}  // namespace detail

/// M~ = M - S(t). When M~ is numerically singular (|det| below 1e-12 times
/// the product of its row norms) a ridge
/// -1e-8 (1 + ||M~||_inf) I is added and reported.
template <typename Scalar>
ApproxSchur<Scalar> approx_schur(const EvalBundle<Scalar>& b, const SlackSchedule<Scalar>& sched, Scalar t,
                                 const HessianFactor<Scalar>& H) {
  ApproxSchur<Scalar> out;
  out.slack = slack_values(sched, b.g_vals, t);
  out.m_tilde = schur_complement(b, H);
  out.m_tilde.diagonal() -= out.slack;
  if (detail::numerically_singular(out.m_tilde)) {
    const Scalar norm_inf = out.m_tilde.cwiseAbs().rowwise().sum().maxCoeff();
    out.ridge = Scalar(1e-8) * (Scalar(1) + norm_inf);
    out.m_tilde.diagonal().array() -= out.ridge;
    out.ridge_applied = true;
  }
  return out;
}

template <typename Scalar>
ApproxSchur<Scalar> approx_schur(const EvalBundle<Scalar>& b, const SlackSchedule<Scalar>& sched, Scalar t) {
  return approx_schur(b, sched, t, HessianFactor<Scalar>(b.hess_xx_L));
}

/// J~^{-1} from its four blocks, with M~ in place of the Schur complement.
template <typename Scalar>
MatrixX<Scalar> block_inverse(const EvalBundle<Scalar>& b, const MatrixX<Scalar>& m_tilde,
                              const HessianFactor<Scalar>& H) {
  const Index n = b.n();
  const Index m = b.m();
  if (m_tilde.rows() != m || m_tilde.cols() != m) throw InvalidArgument("m_tilde has the wrong shape");
  const MatrixX<Scalar> Hinv = H.inverse();
  MatrixX<Scalar> Jinv(n + m, n + m);
  if (m == 0) {
    Jinv = Hinv;
    return Jinv;
  }
  Eigen::FullPivLU<MatrixX<Scalar>> lu(m_tilde);
  if (!lu.isInvertible()) throw SingularMatrixError("approximate Schur complement is singular");
  const MatrixX<Scalar> Minv = lu.inverse();
  const MatrixX<Scalar> HinvG = Hinv * b.grad_x_G;             // n x m
  const MatrixX<Scalar> LGHinv = b.lambda_rowscale * Hinv;     // m x n
  Jinv.topLeftCorner(n, n) = Hinv + HinvG * Minv * LGHinv;
  Jinv.topRightCorner(n, m) = -HinvG * Minv;
  Jinv.bottomLeftCorner(m, n) = -Minv * LGHinv;
  Jinv.bottomRightCorner(m, m) = Minv;
  return Jinv;
}

template <typename Scalar>
MatrixX<Scalar> block_inverse(const EvalBundle<Scalar>& b, const MatrixX<Scalar>& m_tilde) {
  return block_inverse(b, m_tilde, HessianFactor<Scalar>(b.hess_xx_L));
}

}  // namespace tvpd

#endif  // TVPD_SADDLE_HPP_
