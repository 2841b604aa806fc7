// Copyright 2026 The gazelex Authors.
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

#include "gazelex/gaze/spline.hpp"

#include <algorithm>
#include <stdexcept>

namespace gazelex::gaze {

CubicSpline::CubicSpline(std::span<const double> t, std::span<const double> v)
    : t_(t.begin(), t.end()), a_(v.begin(), v.end()) {
  const std::size_t n = t_.size();
  if (n != a_.size()) throw std::invalid_argument("spline: knot and value counts differ");
  if (n < 2) throw std::invalid_argument("spline: needs at least two knots");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(t_[i] > t_[i - 1])) throw std::invalid_argument("spline: knots must strictly increase");
  }
  std::vector<double> h(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) h[i] = t_[i + 1] - t_[i];

  // Tridiagonal system for second-derivative coefficients c (natural ends).
  c_.assign(n, 0.0);
  if (n > 2) {
    std::vector<double> diag(n - 2);
    std::vector<double> rhs(n - 2);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      diag[i - 1] = 2.0 * (h[i - 1] + h[i]);
      rhs[i - 1] = 3.0 * ((a_[i + 1] - a_[i]) / h[i] - (a_[i] - a_[i - 1]) / h[i - 1]);
    }
    // Thomas algorithm; the off-diagonals are h[i].
    for (std::size_t i = 1; i < n - 2; ++i) {
      const double w = h[i] / diag[i - 1];
      diag[i] -= w * h[i];
      rhs[i] -= w * rhs[i - 1];
    }
    c_[n - 2] = rhs[n - 3] / diag[n - 3];
    for (std::size_t i = n - 3; i >= 1; --i) c_[i] = (rhs[i - 1] - h[i] * c_[i + 1]) / diag[i - 1];
  }
  b_.resize(n - 1);
  d_.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    b_[i] = (a_[i + 1] - a_[i]) / h[i] - h[i] * (2.0 * c_[i] + c_[i + 1]) / 3.0;
    d_[i] = (c_[i + 1] - c_[i]) / (3.0 * h[i]);
  }
}

double CubicSpline::operator()(double t) const {
  if (t == t_.back()) return a_.back();
  // Segment i with t_i <= t < t_{i+1}, clamped to the end segments.
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  std::size_t i = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
  i = std::min(i, t_.size() - 2);
  const double dt = t - t_[i];
  return a_[i] + dt * (b_[i] + dt * (c_[i] + dt * d_[i]));
}

}  // namespace gazelex::gaze
