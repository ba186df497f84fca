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

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "tvpd/csv.hpp"
#include "tvpd/report.hpp"

namespace {

using namespace tvpd;

enum Exit { kOk = 0, kConfig = 1, kDivergence = 2, kInvariant = 3 };

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
}

std::ofstream open_out(const std::string& dir, const std::string& file) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / file;
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  return out;
}

struct Options {
  RunConfig run;
  std::string flow = "asymptotic";
  std::string slack;
  std::string dual = "stabilized";
  std::vector<double> x0, lambda0;
  double alpha = 0, c1 = 0, c2 = 0, gamma1 = 0, gamma2 = 0, horizon = 0, delta = 0, rho = 0, k = 0;
  std::string out = ".";
  int count = 1000;
  bool corrupt = false;
};

void add_problem(CLI::App* sub, Options& o) {
  sub->add_option("--problem", o.run.problem, "built-in problem name")->capture_default_str();
  sub->add_option("--scenario", o.run.scenario_file, "eFTP scenario file (overrides --problem)");
}

void finalize(CLI::App* sub, Options& o) {
  RunConfig& r = o.run;
  r.flow = o.flow == "asymptotic" ? FlowKind::asymptotic
           : o.flow == "fixed"    ? FlowKind::fixed_time
                                  : FlowKind::finite_time;
  if (sub->count("--alpha")) r.alpha = o.alpha;
  if (sub->count("--c1")) r.c1 = o.c1;
  if (sub->count("--c2")) r.c2 = o.c2;
  if (sub->count("--gamma1")) r.gamma1 = o.gamma1;
  if (sub->count("--gamma2")) r.gamma2 = o.gamma2;
  if (sub->count("--horizon")) r.horizon = o.horizon;
  if (sub->count("--delta")) r.delta = o.delta;
  if (sub->count("--rho")) r.rho = o.rho;
  if (sub->count("--k")) r.k = o.k;
  if (!o.x0.empty()) r.x0 = to_vector(o.x0);
  if (sub->count("--lambda0")) r.lambda0 = to_vector(o.lambda0);
  if (!o.slack.empty()) r.slack = o.slack == "asymptotic" ? SlackKind::asymptotic : SlackKind::fixed_time;
  r.dual_correction = o.dual == "published" ? DualCorrection::published : DualCorrection::stabilized;
}

int cmd_run(CLI::App* sub, Options& o) {
  finalize(sub, o);
  const RunReport rep = run(o.run);
  {
    auto out = open_out(o.out, "trajectory.csv");
    write_trajectory_csv(out, rep.trajectory);
  }
  {
    auto out = open_out(o.out, "oracle.csv");
    write_oracle_csv(out, resolve_scenario(o.run).problem, rep.oracle);
  }
  {
    auto out = open_out(o.out, "report.csv");
    out << "t,x_error,lambda_error\n";
    for (const auto& e : rep.errors)
      out << format_double(e.t) << ',' << format_double(e.x_error) << ',' << format_double(e.lambda_error) << '\n';
  }
  std::cout << "problem " << rep.problem << "  flow " << flow_kind_name(rep.trajectory.params.kind) << "  samples "
            << rep.trajectory.samples.size() << "\n";
  if (rep.t_max) std::cout << "settling bound " << *rep.t_max << " s\n";
  for (const auto& [cut, err] : rep.max_error_after) std::cout << "max |x - x*| for t >= " << cut << ": " << err << "\n";
  std::cout << "decay violations " << rep.decay_violations << "  min lambda " << rep.trajectory.min_lambda() << "\n";
  std::cout << "schur ridge events " << rep.trajectory.ridge_events << "  coefficient cap events "
            << rep.trajectory.cap_events << "\n";
  for (const auto& [name, s] : rep.wallclock) std::cout << "wallclock " << name << " " << s << " s\n";
  if (rep.diverged) {
    std::cerr << rep.divergence << "\n";
    return kDivergence;
  }
  return kOk;
}

int cmd_oracle(Options& o, double sampling, std::optional<double> horizon) {
  const BuiltinScenario sc = resolve_scenario(o.run);
  std::vector<double> times;
  const double H = horizon.value_or(sc.horizon);
  for (Index k = 0; static_cast<double>(k) * sampling <= H + 1e-9; ++k) times.push_back(static_cast<double>(k) * sampling);
  const auto sols = solve_trajectory(sc.problem, times);
  auto out = open_out(o.out, "oracle.csv");
  write_oracle_csv(out, sc.problem, sols);
  int failed = 0;
  for (const auto& s : sols)
    if (!s.ok()) {
      ++failed;
      std::cerr << "t=" << s.t << ": " << s.error << "\n";
    }
  std::cout << sols.size() << " samples, " << failed << " failed\n";
  return failed ? kInvariant : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tracking time-varying constrained optima with projected primal-dual flows"};
  app.require_subcommand(1);
  Options o;
  double sampling = 0.1;
  double horizon = 0;

  auto* run_cmd = app.add_subcommand("run", "integrate a flow and compare with the oracle");
  add_problem(run_cmd, o);
  run_cmd->add_option("--flow", o.flow)->check(CLI::IsMember({"asymptotic", "fixed", "finite"}))->capture_default_str();
  run_cmd->add_option("--alpha", o.alpha);
  run_cmd->add_option("--c1", o.c1);
  run_cmd->add_option("--c2", o.c2);
  run_cmd->add_option("--gamma1", o.gamma1);
  run_cmd->add_option("--gamma2", o.gamma2);
  run_cmd->add_option("--step", o.run.step)->capture_default_str();
  run_cmd->add_option("--horizon", o.horizon);
  run_cmd->add_option("--sampling", o.run.sampling)->capture_default_str();
  run_cmd->add_option("--x0", o.x0, "comma separated")->delimiter(',');
  run_cmd->add_option("--lambda0", o.lambda0, "comma separated")->delimiter(',');
  run_cmd->add_option("--slack", o.slack)->check(CLI::IsMember({"asymptotic", "fixed"}));
  run_cmd->add_option("--delta", o.delta);
  run_cmd->add_option("--rho", o.rho);
  run_cmd->add_option("--k", o.k);
  run_cmd->add_option("--dual-correction", o.dual)
      ->check(CLI::IsMember({"published", "stabilized"}))
      ->capture_default_str();
  run_cmd->add_option("--out", o.out, "output directory")->capture_default_str();
  run_cmd->add_option("--seed", o.run.seed);

  auto* oracle_cmd = app.add_subcommand("oracle", "solve the sampled problems only");
  add_problem(oracle_cmd, o);
  oracle_cmd->add_option("--sampling", sampling)->capture_default_str();
  oracle_cmd->add_option("--horizon", horizon);
  oracle_cmd->add_option("--out", o.out)->capture_default_str();

  auto* compare_cmd = app.add_subcommand("compare", "wall-clock of oracle batch versus both flows");
  compare_cmd->add_option("--problem", o.run.problem)->capture_default_str();
  compare_cmd->add_option("--sampling", sampling)->capture_default_str();
  compare_cmd->add_option("--step", o.run.step)->capture_default_str();
  compare_cmd->add_option("--horizon", horizon);

  auto* check_cmd = app.add_subcommand("check", "run the invariant suites");
  check_cmd->add_option("--problem", o.run.problem)->capture_default_str();
  check_cmd->add_option("--seed", o.run.seed)->capture_default_str();
  check_cmd->add_option("--count", o.count)->capture_default_str();
  check_cmd->add_flag("--corrupt-gradient", o.corrupt, "test hook: perturb grad_x f");

  app.add_subcommand("list-problems", "list the built-in problems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*run_cmd) return cmd_run(run_cmd, o);
    if (*oracle_cmd)
      return cmd_oracle(o, sampling, oracle_cmd->count("--horizon") ? std::optional<double>(horizon) : std::nullopt);
    if (*compare_cmd) {
      const auto rc = compare_runtimes(o.run.problem, sampling, o.run.step,
                                       compare_cmd->count("--horizon") ? std::optional<double>(horizon) : std::nullopt);
      std::cout << "problem " << rc.problem << "\n"
                << "batch oracle   " << rc.batch_seconds << " s (" << rc.oracle_samples << " samples)\n"
                << "asymptotic     " << rc.asymptotic_seconds << " s (" << rc.flow_steps << " steps)\n"
                << "fixed-time     " << rc.fixed_seconds << " s\n";
      if (rc.too_short)
        std::cout << "too short to order\n";
      else
        std::cout << "batch slower than both flows: " << (rc.batch_slowest() ? "yes" : "no")
                  << "\nbatch > asymptotic > fixed-time: " << (rc.full_ordering() ? "yes" : "no") << "\n";
      return kOk;
    }
    if (*check_cmd) {
      CheckOptions co;
      co.seed = o.run.seed;
      co.count = o.count;
      co.corrupt_gradient = o.corrupt;
      bool ok = true;
      for (const auto& r : check(o.run.problem, co)) {
        std::cout << r.name << ": " << suite_status_name(r.status) << "  " << r.detail << "\n";
        ok = ok && r.status != SuiteStatus::fail;
      }
      return ok ? kOk : kInvariant;
    }
    for (const auto& name : builtin_names()) {
      const auto sc = builtin(name);
      std::cout << name << "  n=" << sc.problem.n << " m=" << sc.problem.m << " horizon=" << sc.horizon << "\n";
    }
    return kOk;
  } catch (const DivergenceError<double>& e) {
    std::cerr << e.what() << "\n";
    return kDivergence;
  } catch (const InvalidArgument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvariant;
  }
}
