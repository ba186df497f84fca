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

#include "tvpd/report.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

namespace tvpd {

namespace {

using Vec = Eigen::VectorXd;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Index record_stride(double sampling, double step) {
  if (!(sampling > 0)) throw InvalidArgument("sampling must be positive");
  const double ratio = sampling / step;
  const auto k = static_cast<Index>(std::llround(ratio));
  if (k < 1 || std::abs(ratio - static_cast<double>(k)) > 1e-6 * ratio)
    throw InvalidArgument("sampling must be an integer multiple of the step");
  return k;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

}  // namespace

BuiltinScenario resolve_scenario(const RunConfig& cfg) {
  if (!cfg.scenario_file.empty()) return scenario_from_spec(load_scenario(cfg.scenario_file));
  return builtin(cfg.problem);
}

FlowParams<double> resolve_flow(const RunConfig& cfg, const BuiltinScenario& sc) {
  FlowParams<double> fp;
  switch (cfg.flow) {
    case FlowKind::asymptotic:
      fp = sc.asymptotic;
      if (cfg.alpha) fp.alpha = *cfg.alpha;
      break;
    case FlowKind::fixed_time:
    case FlowKind::finite_time:
      fp = sc.fixed;
      fp.kind = cfg.flow;
      if (cfg.c1) fp.c1 = *cfg.c1;
      if (cfg.c2) fp.c2 = *cfg.c2;
      if (cfg.gamma1) fp.gamma1 = *cfg.gamma1;
      if (cfg.gamma2) fp.gamma2 = *cfg.gamma2;
      if (cfg.flow == FlowKind::finite_time) fp.c2 = 0;
      break;
  }
  fp.dual_correction = cfg.dual_correction;
  validate(fp);
  return fp;
}

SlackSchedule<double> resolve_slack(const RunConfig& cfg, const BuiltinScenario& sc, const FlowParams<double>& fp) {
  SlackSchedule<double> s = fp.kind == FlowKind::asymptotic ? sc.asymptotic_slack : sc.fixed_slack;
  if (cfg.slack && *cfg.slack != s.kind) {
    if (sc.asymptotic_slack.kind == *cfg.slack)
      s = sc.asymptotic_slack;
    else if (sc.fixed_slack.kind == *cfg.slack)
      s = sc.fixed_slack;
    else
      s = SlackSchedule<double>{.kind = *cfg.slack};
  }
  if (cfg.delta) s.delta = *cfg.delta;
  if (cfg.rho) s.rho = *cfg.rho;
  if (cfg.k) s.k = *cfg.k;
  if (s.kind == SlackKind::fixed_time)
    s.t_max = settling_time_bound(fp.kind == FlowKind::fixed_time ? fp : sc.fixed);
  if (s.kind == SlackKind::asymptotic && !(s.delta > 0)) throw InvalidArgument("delta must be positive");
  if (s.kind == SlackKind::fixed_time && (!(s.rho > 0) || !(s.k > 0) || !(s.t_max > 0)))
    throw InvalidArgument("rho, k and t_max must be positive");
  return s;
}

State resolve_initial(const RunConfig& cfg, const BuiltinScenario& sc) {
  const Problem& p = sc.problem;
  State s;
  if (sc.initial) {
    s = *sc.initial;
  } else {
    const auto sol = solve_sampled(p, 0.0);
    s.x = sol.x_star;
    s.lambda = sol.lambda_star;
  }
  s.t = 0;
  if (cfg.x0) s.x = *cfg.x0;
  if (cfg.lambda0) s.lambda = *cfg.lambda0;
  if (s.x.size() != p.n) throw InvalidArgument("x0 must have " + std::to_string(p.n) + " entries");
  if (s.lambda.size() != p.m) throw InvalidArgument("lambda0 must have " + std::to_string(p.m) + " entries");
  if (!s.dual_feasible()) throw InvalidArgument("lambda0 must be nonnegative");
  return s;
}

double max_error_after(const std::vector<ErrorSample>& errors, double cutoff) {
  double v = -1;
  for (const auto& e : errors)
    if (e.t >= cutoff - 1e-9) v = std::max(v, e.x_error);
  return v;
}

RunReport run(const RunConfig& cfg) {
  const BuiltinScenario sc = resolve_scenario(cfg);
  const Problem& p = sc.problem;
  const FlowParams<double> fp = resolve_flow(cfg, sc);
  const SlackSchedule<double> slack = resolve_slack(cfg, sc, fp);
  const State s0 = resolve_initial(cfg, sc);

  IntegratorConfig<double> ic;
  ic.step = cfg.step;
  ic.horizon = cfg.horizon.value_or(sc.horizon);
  ic.record_every = record_stride(cfg.sampling, cfg.step);

  RunReport rep;
  rep.problem = p.name;
  if (fp.kind == FlowKind::fixed_time) rep.t_max = settling_time_bound(fp);

  auto t0 = Clock::now();
  try {
    rep.trajectory = integrate(p, s0, fp, slack, ic);
  } catch (const DivergenceError<double>& e) {
    rep.trajectory = e.partial();
    rep.diverged = true;
    rep.divergence = e.what();
  }
  rep.wallclock["flow"] = seconds_since(t0);

  std::vector<double> times;
  for (const auto& s : rep.trajectory.samples) times.push_back(s.state.t);
  t0 = Clock::now();
  rep.oracle = solve_trajectory(p, times);
  rep.wallclock["oracle"] = seconds_since(t0);

  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto& o = rep.oracle[k];
    if (!o.ok()) continue;
    const auto& st = rep.trajectory.samples[k].state;
    rep.errors.push_back({st.t, (st.x - o.x_star).norm(), (st.lambda - o.lambda_star).norm()});
  }
  for (const auto& s : rep.trajectory.samples)
    if (s.decay_residual > 1e-8 * (1 + s.V)) ++rep.decay_violations;

  std::vector<double> cutoffs = {1, 3, 5};
  if (rep.t_max) cutoffs.push_back(*rep.t_max);
  for (double c : cutoffs) rep.max_error_after[c] = max_error_after(rep.errors, c);
  return rep;
}

const char* suite_status_name(SuiteStatus s) {
  switch (s) {
    case SuiteStatus::pass: return "pass";
    case SuiteStatus::fail: return "FAIL";
    case SuiteStatus::skipped: return "skipped";
  }
  return "?";
}

std::vector<State> sample_states(const BuiltinScenario& sc, int count, std::uint64_t seed, double radius,
                                 double lambda_max) {
  const Problem& p = sc.problem;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // A handful of oracle anchors, reused across samples.
  std::vector<OracleSolution<double>> anchors;
  const int n_anchor = 8;
  std::vector<double> times;
  for (int k = 0; k < n_anchor; ++k) times.push_back(sc.horizon * k / (n_anchor - 1));
  anchors = solve_trajectory(p, times);

  std::vector<State> out;
  out.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(out.size()) < count) {
    const auto& a = anchors[static_cast<std::size_t>(rng() % anchors.size())];
    if (!a.ok()) continue;
    State s;
    s.t = std::min(sc.horizon, std::max(0.0, a.t + (unit(rng) - 0.5) * sc.horizon / (n_anchor - 1)));
    s.x = a.x_star;
    for (Index i = 0; i < p.n; ++i) s.x[i] += radius * (2 * unit(rng) - 1);
    s.lambda.resize(p.m);
    for (Index i = 0; i < p.m; ++i) s.lambda[i] = lambda_max * unit(rng);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SuiteResult> check(const std::string& problem, const CheckOptions& opt) {
  return check(builtin(problem), opt);
}

std::vector<SuiteResult> check(const BuiltinScenario& sc_in, const CheckOptions& opt) {
  BuiltinScenario sc = sc_in;
  Problem& p = sc.problem;
  if (opt.corrupt_gradient) {
    const auto inner = p.grad_x_f;
    const auto f = p.f;
    p.grad_x_f = [inner, f](const Vec& x, double t) -> Vec {
      Vec gr = inner ? inner(x, t) : detail::central_gradient<double>([&](const Vec& y) { return f(y, t); }, x, 1e-6);
      gr[0] += 1;
      return gr;
    };
  }
  std::vector<SuiteResult> out;
  const auto states = sample_states(sc, opt.count, opt.seed);

  {
    std::vector<Sample<double>> samples;
    for (const auto& s : states) samples.push_back({s.x, s.t});
    const auto rep = fd_check_derivatives(p, samples, 1e-6);
    SuiteResult r{"gradient", rep.all_pass() ? SuiteStatus::pass : SuiteStatus::fail, ""};
    for (const auto& sl : rep.slots)
      if (sl.checked) r.detail += std::string(slot_name(sl.slot)) + "=" + fmt(sl.max_rel_error) + " ";
    out.push_back(r);
  }
  {
    std::vector<Sample<double>> samples;
    for (const auto& s : states) samples.push_back({s.x, s.t});
    const auto rep = check_convexity(p, samples);
    out.push_back({"convexity", rep.pass ? SuiteStatus::pass : SuiteStatus::fail,
                   "min_eig_f=" + fmt(rep.min_eig_hess_f) + (p.m > 0 ? " min_eig_g=" + fmt(rep.min_eig_hess_g) : "")});
  }
  for (const auto* fp : {&sc.asymptotic, &sc.fixed}) {
    const SlackSchedule<double>& slack = fp == &sc.asymptotic ? sc.asymptotic_slack : sc.fixed_slack;
    double worst = -std::numeric_limits<double>::infinity();
    int bad = 0, errors = 0;
    for (const auto& s : states) {
      try {
        const auto fe = evaluate_flow(p, s, *fp, slack);
        const double V = lyapunov_value(fe.bundle);
        const double r = decay_residual(*fp, V, lyapunov_derivative(fe.bundle, fe.velocity)) / (1 + V);
        worst = std::max(worst, r);
        if (r > 1e-8) ++bad;
      } catch (const Error&) {
        ++errors;
      }
    }
    out.push_back({std::string("lyapunov_") + flow_kind_name(fp->kind),
                   bad == 0 && errors == 0 ? SuiteStatus::pass : SuiteStatus::fail,
                   "worst scaled residual " + fmt(worst) + ", " + std::to_string(bad) + " violations, " +
                       std::to_string(errors) + " evaluation errors"});
  }
  if (p.m == 0) {
    out.push_back({"projection", SuiteStatus::skipped, "no constraints"});
    out.push_back({"schur", SuiteStatus::skipped, "no constraints"});
  } else {
    std::mt19937_64 rng(opt.seed + 17);
    int bad = 0, tested = 0;
    for (auto s : states) {
      for (Index i = 0; i < p.m; ++i)
        if (rng() % 2) s.lambda[i] = 0;
      if (s.lambda.maxCoeff() == 0) s.lambda[0] = 1;
      try {
        const auto fe = evaluate_flow(p, s, sc.asymptotic, sc.asymptotic_slack);
        const double proj = lyapunov_derivative(fe.bundle, fe.velocity);
        const double raw = lyapunov_derivative(fe.bundle, fe.unprojected);
        ++tested;
        if (proj > raw + 1e-10 * (1 + std::abs(raw))) ++bad;
      } catch (const Error&) {
      }
    }
    out.push_back({"projection", bad == 0 && tested > 0 ? SuiteStatus::pass : SuiteStatus::fail,
                   std::to_string(tested) + " states, " + std::to_string(bad) + " increases"});

    double worst = 0;
    int used = 0;
    for (const auto& s : states) {
      const auto b = assemble_bundle(p, s);
      const Eigen::MatrixXd J = saddle_jacobian(b).dense();
      const Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
      const auto sv = svd.singularValues();
      if (!(sv(sv.size() - 1) > 0) || sv(0) / sv(sv.size() - 1) > 1e6) continue;
      try {
        const Eigen::MatrixXd Jinv = block_inverse(b, schur_complement(b));
        worst = std::max(worst, (J * Jinv - Eigen::MatrixXd::Identity(J.rows(), J.cols())).norm());
        ++used;
      } catch (const SingularMatrixError&) {
      }
    }
    out.push_back({"schur", used > 0 && worst <= 1e-8 ? SuiteStatus::pass : SuiteStatus::fail,
                   std::to_string(used) + " instances, worst ||J Jinv - I||_F " + fmt(worst)});
  }
  {
    std::vector<double> times;
    const int nt = 101;
    for (int k = 0; k < nt; ++k) times.push_back(sc.horizon * k / (nt - 1));
    const auto sols = solve_trajectory(p, times);
    int bad = 0;
    double worst = 0;
    for (const auto& s : sols) {
      if (!s.ok()) {
        ++bad;
        continue;
      }
      worst = std::max({worst, s.kkt_residual, s.max_violation, -s.min_complementarity});
      if (s.kkt_residual > 1e-8 || s.max_violation > 1e-8 || s.min_complementarity < -1e-8 ||
          (p.m > 0 && s.lambda_star.minCoeff() < -1e-10))
        ++bad;
    }
    out.push_back({"oracle_kkt", bad == 0 ? SuiteStatus::pass : SuiteStatus::fail,
                   std::to_string(sols.size()) + " times, worst residual " + fmt(worst)});
  }
  if (p.m == 0) {
    out.push_back({"dual_feasibility", SuiteStatus::skipped, "no constraints"});
  } else {
    RunConfig rc;
    State s0 = resolve_initial(rc, sc);
    IntegratorConfig<double> ic;
    ic.horizon = std::min(sc.horizon, 5.0);
    ic.record_every = 1;
    double lo = std::numeric_limits<double>::infinity();
    std::string detail;
    try {
      for (const auto* fp : {&sc.asymptotic, &sc.fixed}) {
        const SlackSchedule<double>& slack = fp == &sc.asymptotic ? sc.asymptotic_slack : sc.fixed_slack;
        lo = std::min(lo, integrate(p, s0, *fp, slack, ic).min_lambda());
      }
      detail = "min lambda " + fmt(lo);
    } catch (const Error& e) {
      lo = -1;
      detail = e.what();
    }
    out.push_back({"dual_feasibility", lo >= 0 ? SuiteStatus::pass : SuiteStatus::fail, detail});
  }
  return out;
}

RuntimeComparison compare_runtimes(const std::string& problem, double sampling, double step,
                                   std::optional<double> horizon) {
  const BuiltinScenario sc = builtin(problem);
  const Problem& p = sc.problem;
  RuntimeComparison rc;
  rc.problem = p.name;
  const double H = horizon.value_or(sc.horizon);
  rc.too_short = H < 2 * step || H < sampling;

  RunConfig cfg;
  const State s0 = resolve_initial(cfg, sc);
  IntegratorConfig<double> ic;
  ic.step = step;
  ic.horizon = H;
  ic.record_every = rc.too_short ? 1 : record_stride(sampling, step);

  std::vector<double> times;
  const auto n_samples = static_cast<Index>(std::floor(H / sampling + 1e-9));
  for (Index k = 0; k <= n_samples; ++k) times.push_back(static_cast<double>(k) * sampling);
  rc.oracle_samples = static_cast<Index>(times.size());

  auto t0 = Clock::now();
  const auto sols = solve_trajectory(p, times);
  rc.batch_seconds = seconds_since(t0);

  t0 = Clock::now();
  const auto ta = integrate(p, s0, sc.asymptotic, sc.asymptotic_slack, ic);
  rc.asymptotic_seconds = seconds_since(t0);
  rc.flow_steps = ta.steps;

  t0 = Clock::now();
  integrate(p, s0, sc.fixed, sc.fixed_slack, ic);
  rc.fixed_seconds = seconds_since(t0);
  return rc;
}

}  // namespace tvpd
