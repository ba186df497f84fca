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

#include "tvpd/library.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace tvpd {

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Eigen::Vector2d;

std::size_t expected_params(PathKind k) {
  return k == PathKind::static_ ? 0 : 2;
}

}  // namespace

const char* path_kind_name(PathKind k) {
  switch (k) {
    case PathKind::static_: return "static";
    case PathKind::linear: return "linear";
    case PathKind::spiral: return "spiral";
    case PathKind::circular: return "circular";
    case PathKind::sinusoid_radius: return "sinusoid-radius";
  }
  return "?";
}

PathKind parse_path_kind(const std::string& s) {
  for (PathKind k : {PathKind::static_, PathKind::linear, PathKind::spiral, PathKind::circular,
                     PathKind::sinusoid_radius})
    if (s == path_kind_name(k)) return k;
  throw InvalidArgument("unknown path kind '" + s + "'");
}

Vector2d DiskSpec::center(double t) const {
  const double a = params.size() > 0 ? params[0] : 0;
  const double w = params.size() > 1 ? params[1] : 0;
  switch (kind) {
    case PathKind::static_:
    case PathKind::sinusoid_radius:
      return anchor;
    case PathKind::linear:
      return anchor + Vector2d(a * t, w * t);
    case PathKind::spiral:
      return anchor + Vector2d(a * t * std::cos(w * t), a * t * std::sin(w * t));
    case PathKind::circular:
      return anchor + Vector2d(a * std::sin(w * t), a * (std::cos(w * t) - 1));
  }
  return anchor;
}

Vector2d DiskSpec::center_rate(double t) const {
  const double a = params.size() > 0 ? params[0] : 0;
  const double w = params.size() > 1 ? params[1] : 0;
  switch (kind) {
    case PathKind::static_:
    case PathKind::sinusoid_radius:
      return Vector2d::Zero();
    case PathKind::linear:
      return Vector2d(a, w);
    case PathKind::spiral:
      return Vector2d(a * std::cos(w * t) - a * w * t * std::sin(w * t),
                      a * std::sin(w * t) + a * w * t * std::cos(w * t));
    case PathKind::circular:
      return Vector2d(a * w * std::cos(w * t), -a * w * std::sin(w * t));
  }
  return Vector2d::Zero();
}

double DiskSpec::radius_at(double t) const {
  if (kind != PathKind::sinusoid_radius) return radius;
  return radius + params[0] * std::sin(params[1] * t);
}

double DiskSpec::radius_rate(double t) const {
  if (kind != PathKind::sinusoid_radius) return 0;
  return params[0] * params[1] * std::cos(params[1] * t);
}

void validate(const ScenarioSpec& spec) {
  if (spec.sets.empty()) throw InvalidArgument("scenario has no sets");
  if (!(spec.horizon >= 0)) throw InvalidArgument("scenario horizon must be nonnegative");
  if (!(spec.ridge >= 0)) throw InvalidArgument("ridge must be nonnegative");
  for (std::size_t s = 0; s < spec.sets.size(); ++s) {
    if (spec.sets[s].disks.empty()) throw InvalidArgument("set " + std::to_string(s) + " has no disks");
    for (const auto& d : spec.sets[s].disks) {
      if (d.params.size() != expected_params(d.kind))
        throw InvalidArgument(std::string("path ") + path_kind_name(d.kind) + " expects " +
                              std::to_string(expected_params(d.kind)) + " parameters");
      if (!d.anchor.allFinite() || !std::isfinite(d.radius)) throw InvalidArgument("non-finite disk data");
      const int samples = 2000;
      for (int k = 0; k <= samples; ++k) {
        const double t = spec.horizon * k / samples;
        if (!(d.radius_at(t) > 0))
          throw InvalidArgument("radius of a disk in set " + std::to_string(s) + " is not positive at t=" +
                                std::to_string(t));
      }
    }
  }
}

Problem eftp_from_spec(const ScenarioSpec& spec) {
  validate(spec);
  struct Disk {
    Index block;  // offset of X_i in z
    DiskSpec d;
  };
  std::vector<Disk> disks;
  const Index q = static_cast<Index>(spec.sets.size());
  for (Index s = 0; s < q; ++s)
    for (const auto& d : spec.sets[static_cast<std::size_t>(s)].disks) disks.push_back({2 + 2 * s, d});

  const Index n = 2 * (q + 1);
  const Index m = static_cast<Index>(disks.size());
  const double ridge = spec.ridge;

  Mat H = Mat::Zero(n, n);
  for (Index s = 0; s < q; ++s) {
    const Index b = 2 + 2 * s;
    H.block(0, 0, 2, 2) += 2 * Eigen::Matrix2d::Identity();
    H.block(b, b, 2, 2) += 2 * Eigen::Matrix2d::Identity();
    H.block(0, b, 2, 2) -= 2 * Eigen::Matrix2d::Identity();
    H.block(b, 0, 2, 2) -= 2 * Eigen::Matrix2d::Identity();
  }
  H.diagonal().array() += 2 * ridge;

  Problem p;
  p.name = spec.name;
  p.n = n;
  p.m = m;
  p.f = [q, ridge](const Vec& z, double) {
    double v = ridge * z.squaredNorm();
    for (Index s = 0; s < q; ++s) v += (z.head<2>() - z.segment<2>(2 + 2 * s)).squaredNorm();
    return v;
  };
  p.grad_x_f = [H](const Vec& z, double) -> Vec { return H * z; };
  p.grad_xt_f = [n](const Vec&, double) -> Vec { return Vec::Zero(n); };
  p.hess_xx_f = [H](const Vec&, double) -> Mat { return H; };
  p.g = [disks, m](const Vec& z, double t) {
    Vec g(m);
    for (Index j = 0; j < m; ++j) {
      const auto& D = disks[static_cast<std::size_t>(j)];
      const double r = D.d.radius_at(t);
      g[j] = (z.segment<2>(D.block) - D.d.center(t)).squaredNorm() - r * r;
    }
    return g;
  };
  p.grad_x_g = [disks, n, m](const Vec& z, double t) {
    Mat G = Mat::Zero(n, m);
    for (Index j = 0; j < m; ++j) {
      const auto& D = disks[static_cast<std::size_t>(j)];
      G.block(D.block, j, 2, 1) = 2 * (z.segment<2>(D.block) - D.d.center(t));
    }
    return G;
  };
  p.grad_t_g = [disks, m](const Vec& z, double t) {
    Vec v(m);
    for (Index j = 0; j < m; ++j) {
      const auto& D = disks[static_cast<std::size_t>(j)];
      v[j] = -2 * (z.segment<2>(D.block) - D.d.center(t)).dot(D.d.center_rate(t)) -
             2 * D.d.radius_at(t) * D.d.radius_rate(t);
    }
    return v;
  };
  p.grad_xt_g = [disks, n, m](const Vec&, double t) {
    Mat G = Mat::Zero(n, m);
    for (Index j = 0; j < m; ++j) {
      const auto& D = disks[static_cast<std::size_t>(j)];
      G.block(D.block, j, 2, 1) = -2 * D.d.center_rate(t);
    }
    return G;
  };
  p.hess_xx_g = [disks, n](const Vec&, double) {
    std::vector<Mat> out;
    out.reserve(disks.size());
    for (const auto& D : disks) {
      Mat Hj = Mat::Zero(n, n);
      Hj.block(D.block, D.block, 2, 2) = 2 * Eigen::Matrix2d::Identity();
      out.push_back(std::move(Hj));
    }
    return out;
  };
  if (ridge > 0) p.mu = 2 * ridge;
  return p;
}

ScenarioSpec parse_scenario(std::istream& in) {
  ScenarioSpec spec;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw InvalidArgument("scenario line " + std::to_string(lineno) + ": " + msg);
  };
  auto number = [&](std::istringstream& ls, const char* what) {
    double v;
    if (!(ls >> v)) fail(std::string("expected a number for ") + what);
    return v;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "name") {
      if (!(ls >> spec.name)) fail("name needs a value");
    } else if (key == "description") {
      std::getline(ls >> std::ws, spec.description);
    } else if (key == "horizon") {
      spec.horizon = number(ls, "horizon");
    } else if (key == "ridge") {
      spec.ridge = number(ls, "ridge");
    } else if (key == "set") {
      spec.sets.emplace_back();
    } else if (key == "disk") {
      if (spec.sets.empty()) fail("disk before any set");
      DiskSpec d;
      std::string word;
      bool have_anchor = false, have_radius = false;
      while (ls >> word) {
        if (word == "anchor") {
          d.anchor.x() = number(ls, "anchor");
          d.anchor.y() = number(ls, "anchor");
          have_anchor = true;
        } else if (word == "radius") {
          d.radius = number(ls, "radius");
          have_radius = true;
        } else if (word == "path") {
          std::string kind;
          if (!(ls >> kind)) fail("path needs a kind");
          try {
            d.kind = parse_path_kind(kind);
          } catch (const InvalidArgument& e) {
            fail(e.what());
          }
          double v;
          while (ls >> v) d.params.push_back(v);
          if (!ls.eof()) fail("unexpected token after path parameters");
        } else {
          fail("unknown disk field '" + word + "'");
        }
      }
      if (!have_anchor || !have_radius) fail("disk needs anchor and radius");
      if (d.params.size() != expected_params(d.kind))
        fail(std::string("path ") + path_kind_name(d.kind) + " expects " +
             std::to_string(expected_params(d.kind)) + " parameters");
      spec.sets.back().disks.push_back(std::move(d));
    } else {
      fail("unknown keyword '" + key + "'");
    }
  }
  validate(spec);
  return spec;
}

ScenarioSpec load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open scenario file " + path);
  return parse_scenario(in);
}

Problem numex_problem() {
  Problem p;
  p.name = "numex";
  p.n = 2;
  p.m = 1;
  p.f = [](const Vec& x, double t) {
    const double a = x[0] + std::sin(t), b = x[1] + std::cos(t);
    return 0.5 * a * a + 1.5 * b * b;
  };
  p.grad_x_f = [](const Vec& x, double t) -> Vec {
    return Eigen::Vector2d(x[0] + std::sin(t), 3 * (x[1] + std::cos(t)));
  };
  p.grad_xt_f = [](const Vec&, double t) -> Vec { return Eigen::Vector2d(std::cos(t), -3 * std::sin(t)); };
  p.hess_xx_f = [](const Vec&, double) -> Mat { return Eigen::Vector2d(1, 3).asDiagonal(); };
  p.g = [](const Vec& x, double t) -> Vec { return Vec::Constant(1, x[1] - x[0] - std::cos(t)); };
  p.grad_x_g = [](const Vec&, double) -> Mat { return Eigen::Vector2d(-1, 1); };
  p.grad_t_g = [](const Vec&, double t) -> Vec { return Vec::Constant(1, std::sin(t)); };
  p.grad_xt_g = [](const Vec&, double) -> Mat { return Mat::Zero(2, 1); };
  p.hess_xx_g = [](const Vec&, double) { return std::vector<Mat>{Mat::Zero(2, 2)}; };
  p.mu = 1.0;
  p.hessian_bound = 3.0;
  p.rate_bound = [](double) { return Vec::Constant(1, 1.0); };
  return p;
}

Problem quadratic_problem() {
  Problem p;
  p.name = "quadratic";
  p.n = 2;
  p.m = 0;
  p.f = [](const Vec& x, double t) { return 0.5 * (x - Eigen::Vector2d(std::sin(t), std::cos(t))).squaredNorm(); };
  p.grad_x_f = [](const Vec& x, double t) -> Vec { return x - Eigen::Vector2d(std::sin(t), std::cos(t)); };
  p.grad_xt_f = [](const Vec&, double t) -> Vec { return -Eigen::Vector2d(std::cos(t), -std::sin(t)); };
  p.hess_xx_f = [](const Vec&, double) -> Mat { return Mat::Identity(2, 2); };
  p.mu = 1.0;
  return p;
}

BuiltinScenario numex_scenario() {
  BuiltinScenario s;
  s.problem = numex_problem();
  s.horizon = 20;
  s.asymptotic = FlowParams<double>::asymptotic(2);
  s.asymptotic_slack = SlackSchedule<double>::asymptotic(0.01);
  s.fixed = FlowParams<double>::fixed_time(1, 1, 0.2, -2);
  s.fixed_slack = SlackSchedule<double>::asymptotic(0.01);
  State s0;
  s0.x = Eigen::Vector2d(2, 1);
  s0.lambda = Vec::Constant(1, 4);
  s.initial = s0;
  return s;
}

BuiltinScenario quadratic_scenario() {
  BuiltinScenario s;
  s.problem = quadratic_problem();
  s.horizon = 10;
  s.asymptotic = FlowParams<double>::asymptotic(2);
  s.asymptotic_slack = SlackSchedule<double>::none();
  s.fixed = FlowParams<double>::fixed_time(1, 1, 0.2, -2);
  s.fixed_slack = SlackSchedule<double>::none();
  State s0;
  s0.x = Eigen::Vector2d(2, 1);
  s0.lambda = Vec(0);
  s.initial = s0;
  return s;
}

ScenarioSpec eftp_example1_spec() {
  const double w = std::numbers::pi / 25;
  ScenarioSpec s;
  s.name = "eftp_example1";
  s.description = "five moving sets: two linear disks, a spiral disk, a circular disk and a static two-disk lens";
  s.horizon = 50;
  s.sets = {
      {{DiskSpec{{-12, 12}, 3, PathKind::linear, {0.4, -0.5}}}},
      {{DiskSpec{{5, 7}, 2, PathKind::spiral, {0.2, 1}}}},
      {{DiskSpec{{7, -3}, 1.5, PathKind::linear, {-0.8, -8.0 / 60}}}},
      {{DiskSpec{{-9, -13}, 3, PathKind::circular, {6, w}}}},
      {{DiskSpec{{-25, 10}, 6, PathKind::static_, {}}, DiskSpec{{-25, 15}, 5, PathKind::static_, {}}}},
  };
  return s;
}

ScenarioSpec eftp_example2_spec() {
  ScenarioSpec s;
  s.name = "eftp_example2";
  s.description = "three disks that drift from a triangle into a line; the middle radius oscillates";
  s.horizon = 70;
  s.sets = {
      {{DiskSpec{{-11, -3.5}, 2.5, PathKind::linear, {0, 0.25}}}},
      {{DiskSpec{{0, 0}, 2, PathKind::sinusoid_radius, {0.1, 0.03 * std::numbers::pi}}}},
      {{DiskSpec{{11, -4}, 2.5, PathKind::linear, {0, 0.25}}}},
  };
  return s;
}

namespace {

BuiltinScenario eftp_scenario(const ScenarioSpec& spec, FlowParams<double> fixed, double rho, double k) {
  BuiltinScenario s;
  s.problem = eftp_from_spec(spec);
  s.horizon = spec.horizon;
  s.asymptotic = FlowParams<double>::asymptotic(2);
  s.asymptotic_slack = SlackSchedule<double>::asymptotic(0.1);
  s.fixed = fixed;
  s.fixed_slack = SlackSchedule<double>::fixed_time(rho, k, settling_time_bound(fixed));
  return s;
}

}  // namespace

BuiltinScenario eftp_example1() {
  return eftp_scenario(eftp_example1_spec(), FlowParams<double>::fixed_time(1, 1, 0.2, -2), 0.001, 1);
}

BuiltinScenario eftp_example2() {
  return eftp_scenario(eftp_example2_spec(), FlowParams<double>::fixed_time(1, 1, 0.1, -2), 0.1, 0.001);
}

BuiltinScenario scenario_from_spec(const ScenarioSpec& spec) {
  return eftp_scenario(spec, FlowParams<double>::fixed_time(1, 1, 0.1, -2), 0.1, 0.001);
}

std::vector<std::string> builtin_names() { return {"numex", "eftp_example1", "eftp_example2", "quadratic"}; }

BuiltinScenario builtin(const std::string& name) {
  if (name == "numex") return numex_scenario();
  if (name == "eftp_example1") return eftp_example1();
  if (name == "eftp_example2") return eftp_example2();
  if (name == "quadratic") return quadratic_scenario();
  throw InvalidArgument("unknown problem '" + name + "'");
}

}  // namespace tvpd
