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

#ifndef TVPD_CSV_HPP_
#define TVPD_CSV_HPP_

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "tvpd/integrator.hpp"
#include "tvpd/library.hpp"
#include "tvpd/oracle.hpp"

namespace tvpd {

// Columns: t, x_0..x_{n-1}, lam_0..lam_{m-1}, V, decay_residual,
// active_pattern, source. Floats use the shortest round-trip form.
struct CsvRow {
  double t = 0;
  std::vector<double> x;
  std::vector<double> lam;
  double V = 0;
  double decay_residual = 0;
  std::string active;  // one '0'/'1' per constraint, empty when m = 0
  std::string source;  // "flow" or "oracle"
};

std::string format_double(double v);
double parse_double(const std::string& s);

void write_csv_header(std::ostream& out, Index n, Index m);
void write_csv_row(std::ostream& out, const CsvRow& row);
void write_trajectory_csv(std::ostream& out, const Trajectory<double>& traj, bool header = true);
/// Oracle rows: V is ||kkt residual||^2 / 2, decay_residual is 0. Failed
/// samples are skipped.
void write_oracle_csv(std::ostream& out, const Problem& p, const std::vector<OracleSolution<double>>& sols,
                      bool header = true);
std::vector<CsvRow> read_csv(std::istream& in);

}  // namespace tvpd

#endif  // TVPD_CSV_HPP_
