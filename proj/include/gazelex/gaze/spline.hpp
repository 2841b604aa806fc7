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

#pragma once

#include <span>
#include <vector>

namespace gazelex::gaze {

/// Natural cubic spline through (t_i, v_i) with strictly increasing t.
/// Evaluation at a knot returns the knot value exactly; outside the knot
/// range the end cubic is extrapolated.
class CubicSpline {
 public:
  CubicSpline(std::span<const double> t, std::span<const double> v);

  double operator()(double t) const;
  double front() const { return t_.front(); }
  double back() const { return t_.back(); }

 private:
  std::vector<double> t_;
  std::vector<double> a_;
  std::vector<double> b_;
  std::vector<double> c_;
  std::vector<double> d_;
};

}  // namespace gazelex::gaze
