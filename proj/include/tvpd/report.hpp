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

#ifndef TVPD_REPORT_HPP_
#define TVPD_REPORT_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tvpd/integrator.hpp"
#include "tvpd/library.hpp"
#include "tvpd/oracle.hpp"

namespace tvpd {

struct RunConfig {
  std::string problem = "numex";
  std::string scenario_file;  // overrides `problem` when set
  FlowKind flow = FlowKind::asymptotic;
  std::optional<double> alpha, c1, c2, gamma1, gamma2;
  double step = 1e-3;
  std::optional<double> horizon;
  double sampling = 0.1;
  std::optional<Eigen::VectorXd> x0, lambda0;
  std::optional<SlackKind> slack;
  std::optional<double> delta, rho, k;
  DualCorrection dual_correction = DualCorrection::stabilized;
  std::uint64_t seed = 0;
};

struct ErrorSample {
  double t = 0;
  double x_error = 0;
  double lambda_error = 0;
};

struct RunReport {
  std::string problem;
  Trajectory<double> trajectory;
  std::vector<OracleSolution<double>> oracle;
  std::vector<ErrorSample> errors;  // at the oracle sample times
  std::map<double, double> max_error_after;
  std::map<std::string, double> wallclock;
  Index decay_violations = 0;
  std::optional<double> t_max;
  bool diverged = false;
  std::string divergence;
};

BuiltinScenario resolve_scenario(const RunConfig& cfg);
FlowParams<double> resolve_flow(const RunConfig& cfg, const BuiltinScenario& sc);
SlackSchedule<double> resolve_slack(const RunConfig& cfg, const BuiltinScenario& sc, const FlowParams<double>& fp);
/// Configured initial state, or the oracle solution at t = 0.
State resolve_initial(const RunConfig& cfg, const BuiltinScenario& sc);

/// Integrates the flow, solves the oracle at the recorded times and compares.
RunReport run(const RunConfig& cfg);

/// max ||x - x*|| over error samples with t >= cutoff (-1 when none).
double max_error_after(const std::vector<ErrorSample>& errors, double cutoff);

enum class SuiteStatus { pass, fail, skipped };
const char* suite_status_name(SuiteStatus s);

struct SuiteResult {
  std::string name;
  SuiteStatus status = SuiteStatus::pass;
  std::string detail;
};

struct CheckOptions {
  std::uint64_t seed = 1;
  int count = 1000;
  bool corrupt_gradient = false;  // adds +1 to the first entry of grad_x f
};

std::vector<SuiteResult> check(const std::string& problem, const CheckOptions& opt);
std::vector<SuiteResult> check(const BuiltinScenario& sc, const CheckOptions& opt);

/// Random states around oracle optima: x within a box of half-width `radius`,
/// lambda uniform in [0, lambda_max]^m, t uniform over the horizon.
std::vector<State> sample_states(const BuiltinScenario& sc, int count, std::uint64_t seed, double radius = 5,
                                 double lambda_max = 5);

struct RuntimeComparison {
  std::string problem;
  double batch_seconds = 0;
  double asymptotic_seconds = 0;
  double fixed_seconds = 0;
  Index oracle_samples = 0;
  Index flow_steps = 0;
  bool too_short = false;
  bool batch_slowest() const { return batch_seconds > asymptotic_seconds && batch_seconds > fixed_seconds; }
  bool full_ordering() const { return batch_slowest() && asymptotic_seconds > fixed_seconds; }
};

RuntimeComparison compare_runtimes(const std::string& problem, double sampling, double step = 1e-3,
                                   std::optional<double> horizon = std::nullopt);

}  // namespace tvpd

#endif  // TVPD_REPORT_HPP_
