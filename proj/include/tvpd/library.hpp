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

#ifndef TVPD_LIBRARY_HPP_
#define TVPD_LIBRARY_HPP_

#include <Eigen/Core>

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "tvpd/flow.hpp"
#include "tvpd/problem.hpp"
#include "tvpd/saddle.hpp"

namespace tvpd {

using Problem = TimeVaryingProblem<double>;
using State = PrimalDualState<double>;

enum class PathKind { static_, linear, spiral, circular, sinusoid_radius };

const char* path_kind_name(PathKind k);
PathKind parse_path_kind(const std::string& s);

/// Moving disk ||X - c(t)||^2 <= r(t)^2 with c(t) = anchor + path(t) - path(0).
///   static                               no parameters
///   linear           vx vy               path = (vx t, vy t)
///   spiral           a w                 path = (a t cos wt, a t sin wt)
///   circular         R w                 path = (R sin wt, R cos wt)
///   sinusoid-radius  A w                 r(t) = radius + A sin wt, fixed centre
struct DiskSpec {
  Eigen::Vector2d anchor = Eigen::Vector2d::Zero();
  double radius = 1;
  PathKind kind = PathKind::static_;
  std::vector<double> params;

  Eigen::Vector2d center(double t) const;
  Eigen::Vector2d center_rate(double t) const;
  double radius_at(double t) const;
  double radius_rate(double t) const;
};

/// One convex set: intersection of its disks.
struct SetSpec {
  std::vector<DiskSpec> disks;
};

struct ScenarioSpec {
  std::string name = "scenario";
  std::string description;
  double horizon = 50;
  double ridge = 0;  // optional eps ||z||^2 added to the objective
  std::vector<SetSpec> sets;
};

/// Checks radii stay positive over [0, horizon] and every set is nonempty.
void validate(const ScenarioSpec& spec);

/// Extended Fermat-Torricelli problem in z = (X, X_1, ..., X_q):
///   min sum_i ||X - X_i||^2  s.t. every disk of set i contains X_i.
Problem eftp_from_spec(const ScenarioSpec& spec);

ScenarioSpec parse_scenario(std::istream& in);
ScenarioSpec load_scenario(const std::string& path);

Problem numex_problem();
/// Unconstrained 1/2||x - (sin t, cos t)||^2, m = 0.
Problem quadratic_problem();

struct BuiltinScenario {
  Problem problem;
  double horizon = 20;
  FlowParams<double> asymptotic;
  SlackSchedule<double> asymptotic_slack;
  FlowParams<double> fixed;
  SlackSchedule<double> fixed_slack;
  // Empty means: start at the oracle solution at t = 0.
  std::optional<State> initial;
};

BuiltinScenario numex_scenario();
BuiltinScenario quadratic_scenario();
ScenarioSpec eftp_example1_spec();
ScenarioSpec eftp_example2_spec();
BuiltinScenario eftp_example1();
BuiltinScenario eftp_example2();
/// Wraps a parsed spec with the eftp_example2 flow defaults.
BuiltinScenario scenario_from_spec(const ScenarioSpec& spec);

std::vector<std::string> builtin_names();
BuiltinScenario builtin(const std::string& name);

}  // namespace tvpd

#endif  // TVPD_LIBRARY_HPP_
