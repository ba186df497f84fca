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

#ifndef TVPD_CORE_HPP_
#define TVPD_CORE_HPP_

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>

namespace tvpd {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Error hierarchy. Everything thrown by the library derives from tvpd::Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A map returned a NaN/inf, or an operation left its numerical domain.
class NumericalDomainError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, unsigned long subset)
      : Error(what), subset_(subset) {}
  /// Bitmask of the active-set candidate that failed.
  unsigned long subset() const noexcept { return subset_; }

 private:
  unsigned long subset_;
};

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& a) {
  return a.allFinite();
}

template <typename Scalar>
bool is_finite(Scalar v) {
  using std::isfinite;
  return isfinite(v);
}

}  // namespace tvpd

#endif  // TVPD_CORE_HPP_
