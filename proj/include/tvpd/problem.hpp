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

#ifndef TVPD_PROBLEM_HPP_
#define TVPD_PROBLEM_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tvpd/core.hpp"

namespace tvpd {

/// Derivative slots a problem may supply analytically. Any slot left empty is
/// evaluated by central differences of the slot it derives from.
enum class Slot {
  grad_x_f,
  grad_xt_f,
  hess_xx_f,
  grad_x_g,
  grad_t_g,
  grad_xt_g,
  hess_xx_g,
};

inline constexpr std::array<Slot, 7> kAllSlots = {
    Slot::grad_x_f, Slot::grad_xt_f, Slot::hess_xx_f, Slot::grad_x_g,
    Slot::grad_t_g, Slot::grad_xt_g, Slot::hess_xx_g};

inline const char* slot_name(Slot s) {
  switch (s) {
    case Slot::grad_x_f: return "grad_x_f";
    case Slot::grad_xt_f: return "grad_xt_f";
    case Slot::hess_xx_f: return "hess_xx_f";
    case Slot::grad_x_g: return "grad_x_g";
    case Slot::grad_t_g: return "grad_t_g";
    case Slot::grad_xt_g: return "grad_xt_g";
    case Slot::hess_xx_g: return "hess_xx_g";
  }
  return "?";
}

enum class DerivativeMode { analytic, finite_difference };

/// min_x f(x,t)  s.t.  g_i(x,t) <= 0, i = 1..m.
///
/// The maps are plain closures and must be pure; a problem is immutable once
/// built and may be evaluated from several threads at once.
template <typename Scalar>
struct TimeVaryingProblem {
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;
  using ScalarMap = std::function<Scalar(const Vector&, Scalar)>;
  using VectorMap = std::function<Vector(const Vector&, Scalar)>;
  using MatrixMap = std::function<Matrix(const Vector&, Scalar)>;
  using MatrixListMap = std::function<std::vector<Matrix>(const Vector&, Scalar)>;

  std::string name;
  Index n = 0;
  Index m = 0;

  ScalarMap f;
  VectorMap grad_x_f;
  VectorMap grad_xt_f;
  MatrixMap hess_xx_f;

  VectorMap g;               // (g_1..g_m)
  MatrixMap grad_x_g;        // n x m, column i is grad_x g_i
  VectorMap grad_t_g;        // m
  MatrixMap grad_xt_g;       // n x m, column i is d/dt grad_x g_i
  MatrixListMap hess_xx_g;   // m matrices, n x n

  // Assumption metadata. Checked by sampling, never enforced.
  std::optional<Scalar> mu;             // strong-convexity modulus of f
  std::optional<Scalar> lipschitz;      // Lipschitz constant of grad_x L
  std::optional<Scalar> hessian_bound;  // sup ||hess_xx L||
  std::function<Vector(Scalar)> rate_bound;  // rho_i(t) >= |d/dt g_i|

  DerivativeMode mode(Slot s) const {
    bool present = false;
    switch (s) {
      case Slot::grad_x_f: present = static_cast<bool>(grad_x_f); break;
      case Slot::grad_xt_f: present = static_cast<bool>(grad_xt_f); break;
      case Slot::hess_xx_f: present = static_cast<bool>(hess_xx_f); break;
      case Slot::grad_x_g: present = static_cast<bool>(grad_x_g); break;
      case Slot::grad_t_g: present = static_cast<bool>(grad_t_g); break;
      case Slot::grad_xt_g: present = static_cast<bool>(grad_xt_g); break;
      case Slot::hess_xx_g: present = static_cast<bool>(hess_xx_g); break;
    }
    return present ? DerivativeMode::analytic : DerivativeMode::finite_difference;
  }
};

/// The integration state (x, lambda, t).
template <typename Scalar>
struct PrimalDualState {
  VectorX<Scalar> x;
  VectorX<Scalar> lambda;
  Scalar t = Scalar(0);

  bool dual_feasible() const { return lambda.size() == 0 || lambda.minCoeff() >= Scalar(0); }
  bool finite() const { return x.allFinite() && lambda.allFinite() && is_finite(t); }
};

namespace detail {

template <typename Scalar>
void check_point(const TimeVaryingProblem<Scalar>& p, const VectorX<Scalar>& x, Scalar t) {
  if (x.size() != p.n)
    throw InvalidArgument("dimension mismatch: x has " + std::to_string(x.size()) +
                          " entries, problem '" + p.name + "' expects " + std::to_string(p.n));
  if (!(t >= Scalar(0))) throw InvalidArgument("time must be nonnegative");
}

template <typename Derived>
void check_finite(const Eigen::DenseBase<Derived>& v, const char* slot) {
  if (!v.allFinite()) throw NumericalDomainError(std::string("non-finite value in slot ") + slot);
}

template <typename Scalar>
void check_finite_scalar(Scalar v, const char* slot) {
  if (!is_finite(v)) throw NumericalDomainError(std::string("non-finite value in slot ") + slot);
}

// Fallback step for central differences: 1e-6 scaled by the magnitude of the
// perturbed coordinate.
template <typename Scalar>
Scalar fd_step(Scalar base, Scalar coordinate) {
  using std::abs;
  return base * (Scalar(1) + abs(coordinate));
}

inline constexpr double kFdBase = 1e-6;
// Second derivatives differenced from a differenced gradient need a wider step.
inline constexpr double kFdNestedBase = 1e-4;

template <typename Scalar, typename F>
VectorX<Scalar> central_gradient(F&& fun, const VectorX<Scalar>& x, Scalar base) {
  VectorX<Scalar> grad(x.size());
  VectorX<Scalar> xp = x;
  for (Index j = 0; j < x.size(); ++j) {
    const Scalar h = fd_step(base, x[j]);
    xp[j] = x[j] + h;
    const Scalar fp = fun(xp);
    xp[j] = x[j] - h;
    const Scalar fm = fun(xp);
    xp[j] = x[j];
    grad[j] = (fp - fm) / (Scalar(2) * h);
  }
  return grad;
}

// Central difference of a matrix/vector valued map along coordinate j of x.
template <typename Scalar, typename F>
auto central_partial_x(F&& fun, const VectorX<Scalar>& x, Index j, Scalar base) {
  VectorX<Scalar> xp = x;
  const Scalar h = fd_step(base, x[j]);
  xp[j] = x[j] + h;
  auto fp = fun(xp);
  xp[j] = x[j] - h;
  auto fm = fun(xp);
  return decltype(fp)((fp - fm) / (Scalar(2) * h));
}

template <typename Scalar, typename F>
auto central_partial_t(F&& fun, Scalar t, Scalar base) {
  const Scalar h = fd_step(base, t);
  auto fp = fun(t + h);
  auto fm = fun(t - h);
  return decltype(fp)((fp - fm) / (Scalar(2) * h));
}

}  // namespace detail

template <typename Scalar>
Scalar eval_objective(const TimeVaryingProblem<Scalar>& p, const VectorX<Scalar>& x, Scalar t) {
  detail::check_point(p, x, t);
  const Scalar v = p.f(x, t);
  detail::check_finite_scalar(v, "f");
  return v;
}

template <typename Scalar>
VectorX<Scalar> eval_constraints(const TimeVaryingProblem<Scalar>& p, const VectorX<Scalar>& x,
                                 Scalar t) {
  detail::check_point(p, x, t);
  if (p.m == 0) return VectorX<Scalar>(0);
  VectorX<Scalar> v = p.g(x, t);
  if (v.size() != p.m) throw InvalidArgument("constraint map returned wrong size");
  detail::check_finite(v, "g");
  return v;
}

// Derivative evaluation. These skip the t >= 0 precondition on purpose: the
// difference quotients need to straddle t = 0.
namespace detail {

template <typename Scalar>
VectorX<Scalar> raw_grad_x_f(const TimeVaryingProblem<Scalar>& p, const VectorX<Scalar>& x, Scalar t) {
  if (p.grad_x_f) return p.grad_x_f(x, t);
  return central_gradient<Scalar>([&](const VectorX<Scalar>& y) { return p.f(y, t); }, x,
                                  Scalar(kFdBase));
}

template <typename Scalar>
MatrixX<Scalar> raw_grad_x_g(const TimeVaryingProblem<Scalar>& p, const VectorX<Scalar>& x, Scalar t) {
  if (p.m == 0) return MatrixX<Scalar>(p.n, 0);
  if (p.grad_x_g) return p.grad_x_g(x, t);
  MatrixX<Scalar> G(p.n, p.m);
  for (Index j = 0; j < p.n; ++j)
    G.row(j) = central_partial_x<Scalar>([&](const VectorX<Scalar>& y) { return VectorX<Scalar>(p.g(y, t)); },
                                         x, j, Scalar(kFdBase))
                   .transpose();
  return G;
}

template <typename Scalar>
Scalar nested_base(bool analytic_inner) {
  return Scalar(analytic_inner ? kFdBase : kFdNestedBase);
}

}  // namespace detail

template <typename Scalar>
VectorX<Scalar> eval_grad_x_f(const TimeVaryingProblem<Scalar>& p, const VectorX<Scalar>& x, Scalar t) {
  detail::check_point(p, x, t);
  VectorX<Scalar> v = detail::raw_grad_x_f(p, x, t);
  detail::check_finite(v, "grad_x_f");
  return v;
}

template <typename Scalar>
VectorX<Scalar> eval_grad_xt_f(const TimeVaryingProblem<Scalar>& p, const VectorX<Scalar>& x, Scalar t) {
  detail::check_point(p, x, t);
  VectorX<Scalar> v;
  if (p.grad_xt_f) {
    v = p.grad_xt_f(x, t);
  } else {
    const Scalar base = detail::nested_base<Scalar>(static_cast<bool>(p.grad_x_f));
    v = detail::central_partial_t<Scalar>([&](Scalar s) { return detail::raw_grad_x_f(p, x, s); }, t, base);
  }
  detail::check_finite(v, "grad_xt_f");
  return v;
}

template <typename Scalar>
MatrixX<Scalar> eval_hess_xx_f(const TimeVaryingProblem<Scalar>& p, const VectorX<Scalar>& x, Scalar t) {
  detail::check_point(p, x, t);
  MatrixX<Scalar> H;
  if (p.hess_xx_f) {
    H = p.hess_xx_f(x, t);
  } else {
    const Scalar base = detail::nested_base<Scalar>(static_cast<bool>(p.grad_x_f));
    H.resize(p.n, p.n);
    for (Index j = 0; j < p.n; ++j)
      H.col(j) = detail::central_partial_x<Scalar>(
          [&](const VectorX<Scalar>& y) { return detail::raw_grad_x_f(p, y, t); }, x, j, base);
  }
  detail::check_finite(H, "hess_xx_f");
  return H;
}

template <typename Scalar>
MatrixX<Scalar> eval_grad_x_g(const TimeVaryingProblem<Scalar>& p, const VectorX<Scalar>& x, Scalar t) {
  detail::check_point(p, x, t);
  MatrixX<Scalar> G = detail::raw_grad_x_g(p, x, t);
  detail::check_finite(G, "grad_x_g");
  return G;
}

template <typename Scalar>
VectorX<Scalar> eval_grad_t_g(const TimeVaryingProblem<Scalar>& p, const VectorX<Scalar>& x, Scalar t) {
  detail::check_point(p, x, t);
  if (p.m == 0) return VectorX<Scalar>(0);
  VectorX<Scalar> v;
  if (p.grad_t_g) {
    v = p.grad_t_g(x, t);
  } else {
    v = detail::central_partial_t<Scalar>([&](Scalar s) { return VectorX<Scalar>(p.g(x, s)); }, t,
                                          Scalar(detail::kFdBase));
  }
  detail::check_finite(v, "grad_t_g");
  return v;
}

template <typename Scalar>
MatrixX<Scalar> eval_grad_xt_g(const TimeVaryingProblem<Scalar>& p, const VectorX<Scalar>& x, Scalar t) {
  detail::check_point(p, x, t);
  if (p.m == 0) return MatrixX<Scalar>(p.n, 0);
  MatrixX<Scalar> v;
  if (p.grad_xt_g) {
    v = p.grad_xt_g(x, t);
  } else {
    const Scalar base = detail::nested_base<Scalar>(static_cast<bool>(p.grad_x_g));
    v = detail::central_partial_t<Scalar>([&](Scalar s) { return detail::raw_grad_x_g(p, x, s); }, t, base);
  }
  detail::check_finite(v, "grad_xt_g");
  return v;
}

template <typename Scalar>
std::vector<MatrixX<Scalar>> eval_hess_xx_g(const TimeVaryingProblem<Scalar>& p,
                                            const VectorX<Scalar>& x, Scalar t) {
  detail::check_point(p, x, t);
  std::vector<MatrixX<Scalar>> out;
  if (p.m == 0) return out;
  if (p.hess_xx_g) {
    out = p.hess_xx_g(x, t);
    if (static_cast<Index>(out.size()) != p.m)
      throw InvalidArgument("hess_xx_g returned wrong number of matrices");
  } else {
    const Scalar base = detail::nested_base<Scalar>(static_cast<bool>(p.grad_x_g));
    out.assign(static_cast<std::size_t>(p.m), MatrixX<Scalar>(p.n, p.n));
    for (Index j = 0; j < p.n; ++j) {
      const MatrixX<Scalar> dG = detail::central_partial_x<Scalar>(
          [&](const VectorX<Scalar>& y) { return detail::raw_grad_x_g(p, y, t); }, x, j, base);
      for (Index i = 0; i < p.m; ++i) out[static_cast<std::size_t>(i)].col(j) = dG.col(i);
    }
  }
  for (const auto& Hi : out) detail::check_finite(Hi, "hess_xx_g");
  return out;
}

// ---------------------------------------------------------------------------
// Derivative verification

template <typename Scalar>
struct SlotCheck {
  Slot slot{};
  bool checked = false;  // false for finite-difference slots or m == 0
  Scalar max_rel_error = Scalar(0);
  Index worst_sample = -1;
  bool pass = true;
};

template <typename Scalar>
struct FdCheckReport {
  std::array<SlotCheck<Scalar>, 7> slots;
  Scalar tolerance = Scalar(1e-5);

  bool all_pass() const {
    return std::all_of(slots.begin(), slots.end(), [](const auto& s) { return s.pass; });
  }
  const SlotCheck<Scalar>& operator[](Slot s) const { return slots[static_cast<std::size_t>(s)]; }
};

template <typename Scalar>
struct Sample {
  VectorX<Scalar> x;
  Scalar t;
};

namespace detail {

template <typename A, typename B>
typename A::Scalar rel_error(const A& analytic, const B& reference) {
  using S = typename A::Scalar;
  if (analytic.size() == 0) return S(0);
  const S scale = std::max({S(1), analytic.cwiseAbs().maxCoeff(), reference.cwiseAbs().maxCoeff()});
  return (analytic - reference).cwiseAbs().maxCoeff() / scale;
}

}  // namespace detail

/// Compares every analytic slot against central differences (step h scaled by
/// 1+|coordinate|) of the map it derives from. Relative error is measured in
/// the max norm against max(1, |analytic|, |reference|).
template <typename Scalar>
FdCheckReport<Scalar> fd_check_derivatives(const TimeVaryingProblem<Scalar>& p,
                                           const std::vector<Sample<Scalar>>& samples, Scalar h,
                                           Scalar tolerance = Scalar(1e-5)) {
  if (!(h > Scalar(1e-9) && h < Scalar(1e-3))) throw InvalidArgument("fd step must lie in (1e-9, 1e-3)");
  if (samples.empty()) throw InvalidArgument("fd_check_derivatives needs at least one sample");

  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;
  FdCheckReport<Scalar> report;
  report.tolerance = tolerance;
  for (std::size_t s = 0; s < kAllSlots.size(); ++s) {
    report.slots[s].slot = kAllSlots[s];
    const bool constraint_slot = s >= 3;
    report.slots[s].checked =
        p.mode(kAllSlots[s]) == DerivativeMode::analytic && !(constraint_slot && p.m == 0);
  }
  auto record = [&](Slot slot, Scalar err, Index k) {
    auto& sc = report.slots[static_cast<std::size_t>(slot)];
    if (err > sc.max_rel_error || sc.worst_sample < 0) {
      sc.max_rel_error = std::max(err, sc.max_rel_error);
      sc.worst_sample = k;
    }
  };

  for (std::size_t k = 0; k < samples.size(); ++k) {
    const Vector& x = samples[k].x;
    const Scalar t = samples[k].t;
    const Index idx = static_cast<Index>(k);
    try {
      detail::check_point(p, x, t);
      if (report[Slot::grad_x_f].checked) {
        const Vector ref = detail::central_gradient<Scalar>([&](const Vector& y) { return p.f(y, t); }, x, h);
        record(Slot::grad_x_f, detail::rel_error(Vector(p.grad_x_f(x, t)), ref), idx);
      }
      if (report[Slot::grad_xt_f].checked) {
        const Vector ref = detail::central_partial_t<Scalar>(
            [&](Scalar s) { return detail::raw_grad_x_f(p, x, s); }, t, h);
        record(Slot::grad_xt_f, detail::rel_error(Vector(p.grad_xt_f(x, t)), ref), idx);
      }
      if (report[Slot::hess_xx_f].checked) {
        Matrix ref(p.n, p.n);
        for (Index j = 0; j < p.n; ++j)
          ref.col(j) = detail::central_partial_x<Scalar>(
              [&](const Vector& y) { return detail::raw_grad_x_f(p, y, t); }, x, j, h);
        record(Slot::hess_xx_f, detail::rel_error(Matrix(p.hess_xx_f(x, t)), ref), idx);
      }
      if (report[Slot::grad_x_g].checked) {
        Matrix ref(p.n, p.m);
        for (Index j = 0; j < p.n; ++j)
          ref.row(j) = detail::central_partial_x<Scalar>([&](const Vector& y) { return Vector(p.g(y, t)); },
                                                         x, j, h)
                           .transpose();
        record(Slot::grad_x_g, detail::rel_error(Matrix(p.grad_x_g(x, t)), ref), idx);
      }
      if (report[Slot::grad_t_g].checked) {
        const Vector ref =
            detail::central_partial_t<Scalar>([&](Scalar s) { return Vector(p.g(x, s)); }, t, h);
        record(Slot::grad_t_g, detail::rel_error(Vector(p.grad_t_g(x, t)), ref), idx);
      }
      if (report[Slot::grad_xt_g].checked) {
        const Matrix ref = detail::central_partial_t<Scalar>(
            [&](Scalar s) { return detail::raw_grad_x_g(p, x, s); }, t, h);
        record(Slot::grad_xt_g, detail::rel_error(Matrix(p.grad_xt_g(x, t)), ref), idx);
      }
      if (report[Slot::hess_xx_g].checked) {
        const auto analytic = p.hess_xx_g(x, t);
        std::vector<Matrix> ref(static_cast<std::size_t>(p.m), Matrix(p.n, p.n));
        for (Index j = 0; j < p.n; ++j) {
          const Matrix dG = detail::central_partial_x<Scalar>(
              [&](const Vector& y) { return detail::raw_grad_x_g(p, y, t); }, x, j, h);
          for (Index i = 0; i < p.m; ++i) ref[static_cast<std::size_t>(i)].col(j) = dG.col(i);
        }
        Scalar worst = Scalar(0);
        for (Index i = 0; i < p.m; ++i)
          worst = std::max(worst, detail::rel_error(analytic[static_cast<std::size_t>(i)],
                                                    ref[static_cast<std::size_t>(i)]));
        record(Slot::hess_xx_g, worst, idx);
      }
    } catch (const Error& e) {
      throw Error("derivative check failed at sample " + std::to_string(k) + ": " + e.what());
    }
  }
  for (auto& sc : report.slots) sc.pass = !sc.checked || sc.max_rel_error <= tolerance;
  return report;
}

// ---------------------------------------------------------------------------
// Assumption diagnostics

template <typename Scalar>
struct ConvexityReport {
  Scalar min_eig_hess_f = std::numeric_limits<Scalar>::infinity();
  Scalar min_eig_hess_g = std::numeric_limits<Scalar>::infinity();
  Scalar max_asymmetry = Scalar(0);
  bool pass = true;
};

/// Samples the strong convexity of f (against p.mu, or 0 when absent) and the
/// convexity of every g_i.
template <typename Scalar>
ConvexityReport<Scalar> check_convexity(const TimeVaryingProblem<Scalar>& p,
                                        const std::vector<Sample<Scalar>>& samples,
                                        Scalar tol = Scalar(1e-8)) {
  ConvexityReport<Scalar> r;
  const Scalar mu = p.mu.value_or(Scalar(0));
  for (const auto& s : samples) {
    const MatrixX<Scalar> Hf = eval_hess_xx_f(p, s.x, s.t);
    r.max_asymmetry = std::max(r.max_asymmetry, (Hf - Hf.transpose()).cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(Hf, Eigen::EigenvaluesOnly);
    r.min_eig_hess_f = std::min(r.min_eig_hess_f, es.eigenvalues().minCoeff());
    for (const auto& Hg : eval_hess_xx_g(p, s.x, s.t)) {
      r.max_asymmetry = std::max(r.max_asymmetry, (Hg - Hg.transpose()).cwiseAbs().maxCoeff());
      Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eg(Hg, Eigen::EigenvaluesOnly);
      r.min_eig_hess_g = std::min(r.min_eig_hess_g, eg.eigenvalues().minCoeff());
    }
  }
  r.pass = r.min_eig_hess_f >= mu - tol && (p.m == 0 || r.min_eig_hess_g >= -tol) &&
           r.max_asymmetry <= Scalar(1e-10);
  return r;
}

/// Indices with g_i(x,t) >= -tol.
template <typename Scalar>
std::vector<Index> active_set(const TimeVaryingProblem<Scalar>& p, const VectorX<Scalar>& x, Scalar t,
                              Scalar tol = Scalar(1e-6)) {
  std::vector<Index> out;
  const VectorX<Scalar> g = eval_constraints(p, x, t);
  for (Index i = 0; i < g.size(); ++i)
    if (g[i] >= -tol) out.push_back(i);
  return out;
}

/// Linear independence of the active constraint gradients (and |I| <= n).
template <typename Scalar>
bool active_gradients_independent(const TimeVaryingProblem<Scalar>& p, const VectorX<Scalar>& x,
                                  Scalar t, Scalar tol = Scalar(1e-6)) {
  const auto act = active_set(p, x, t, tol);
  if (act.empty()) return true;
  if (static_cast<Index>(act.size()) > p.n) return false;
  const MatrixX<Scalar> G = eval_grad_x_g(p, x, t);
  MatrixX<Scalar> GA(p.n, static_cast<Index>(act.size()));
  for (std::size_t k = 0; k < act.size(); ++k) GA.col(static_cast<Index>(k)) = G.col(act[k]);
  Eigen::ColPivHouseholderQR<MatrixX<Scalar>> qr(GA);
  qr.setThreshold(Scalar(1e-10));
  return qr.rank() == GA.cols();
}

/// At least one constraint gradient is not orthogonal to grad_x f.
template <typename Scalar>
bool some_constraint_not_orthogonal(const TimeVaryingProblem<Scalar>& p, const VectorX<Scalar>& x,
                                    Scalar t, Scalar tol = Scalar(1e-12)) {
  if (p.m == 0) return false;
  const VectorX<Scalar> w = eval_grad_x_g(p, x, t).transpose() * eval_grad_x_f(p, x, t);
  return w.cwiseAbs().maxCoeff() > tol;
}

}  // namespace tvpd

#endif  // TVPD_PROBLEM_HPP_
