// Copyright 2026 The trajsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TRAJSIM_COMMON_H_
#define TRAJSIM_COMMON_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace trajsim {

// Failure classes. The numeric values double as CLI exit codes.
enum class ErrorCode : int {
  kBadInput = 2,
  kNumeric = 3,
  kIo = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void ThrowBadInput(const std::string& message) {
  throw Error(ErrorCode::kBadInput, message);
}
[[noreturn]] inline void ThrowNumeric(const std::string& message) {
  throw Error(ErrorCode::kNumeric, message);
}
[[noreturn]] inline void ThrowIo(const std::string& message) {
  throw Error(ErrorCode::kIo, message);
}

// A point in a planar metric frame (meters after gridding).
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

using PointSequence = std::vector<Point2>;

// Dense n x n float64 matrix, row-major.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0)
      : n_(n), values_(n * n, fill) {}

  std::size_t n() const { return n_; }

  double& operator()(std::size_t i, std::size_t j) { return values_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return values_[i * n_ + j];
  }

  const double* row(std::size_t i) const { return values_.data() + i * n_; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

}  // namespace trajsim

#endif  // TRAJSIM_COMMON_H_
