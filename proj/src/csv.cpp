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

#include "tvpd/csv.hpp"

#include <charconv>
#include <sstream>

namespace tvpd {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InvalidArgument("not a number: '" + s + "'");
  return v;
}

void write_csv_header(std::ostream& out, Index n, Index m) {
  out << "t";
  for (Index i = 0; i < n; ++i) out << ",x_" << i;
  for (Index i = 0; i < m; ++i) out << ",lam_" << i;
  out << ",V,decay_residual,active_pattern,source\n";
}

void write_csv_row(std::ostream& out, const CsvRow& row) {
  out << format_double(row.t);
  for (double v : row.x) out << ',' << format_double(v);
  for (double v : row.lam) out << ',' << format_double(v);
  out << ',' << format_double(row.V) << ',' << format_double(row.decay_residual) << ',' << row.active << ','
      << row.source << '\n';
}

namespace {

std::string pattern(const std::vector<bool>& bits) {
  std::string s;
  for (bool b : bits) s += b ? '1' : '0';
  return s;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory<double>& traj, bool header) {
  if (traj.samples.empty()) return;
  const auto& first = traj.samples.front().state;
  if (header) write_csv_header(out, first.x.size(), first.lambda.size());
  for (const auto& s : traj.samples) {
    CsvRow r;
    r.t = s.state.t;
    r.x.assign(s.state.x.data(), s.state.x.data() + s.state.x.size());
    r.lam.assign(s.state.lambda.data(), s.state.lambda.data() + s.state.lambda.size());
    r.V = s.V;
    r.decay_residual = s.decay_residual;
    r.active = pattern(s.active);
    r.source = "flow";
    write_csv_row(out, r);
  }
}

void write_oracle_csv(std::ostream& out, const Problem& p, const std::vector<OracleSolution<double>>& sols,
                      bool header) {
  if (header) write_csv_header(out, p.n, p.m);
  for (const auto& s : sols) {
    if (!s.ok()) continue;
    CsvRow r;
    r.t = s.t;
    r.x.assign(s.x_star.data(), s.x_star.data() + s.x_star.size());
    r.lam.assign(s.lambda_star.data(), s.lambda_star.data() + s.lambda_star.size());
    r.V = 0.5 * s.kkt_residual * s.kkt_residual;
    std::vector<bool> bits(static_cast<std::size_t>(p.m), false);
    for (Index i : s.active_set) bits[static_cast<std::size_t>(i)] = true;
    r.active = pattern(bits);
    r.source = "oracle";
    write_csv_row(out, r);
  }
}

std::vector<CsvRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("empty csv");
  Index n = 0, m = 0;
  {
    std::istringstream hs(line);
    std::string col;
    while (std::getline(hs, col, ',')) {
      if (col.rfind("x_", 0) == 0) ++n;
      if (col.rfind("lam_", 0) == 0) ++m;
    }
  }
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (static_cast<Index>(f.size()) != 5 + n + m) throw InvalidArgument("csv row has the wrong number of fields");
    CsvRow r;
    std::size_t k = 0;
    r.t = parse_double(f[k++]);
    for (Index i = 0; i < n; ++i) r.x.push_back(parse_double(f[k++]));
    for (Index i = 0; i < m; ++i) r.lam.push_back(parse_double(f[k++]));
    r.V = parse_double(f[k++]);
    r.decay_residual = parse_double(f[k++]);
    r.active = f[k++];
    r.source = f[k++];
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace tvpd
