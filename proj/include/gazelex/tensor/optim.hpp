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

#include <functional>
#include <vector>

#include "gazelex/tensor/parameter.hpp"

namespace gazelex::tensor {

struct AdamConfig {
  double lr_encoder_decoder = 1e-3;
  double lr_backbone = 2e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam with one learning rate per LrGroup.
class Adam {
 public:
  Adam(ParameterSet& params, AdamConfig config);

  /// Applies one update from the accumulated gradients. Throws
  /// std::domain_error naming the parameter if any gradient is not finite.
  void step();
  void zero_grad();
  std::size_t steps() const { return steps_; }
  const AdamConfig& config() const { return config_; }

 private:
  ParameterSet& params_;
  AdamConfig config_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::size_t steps_ = 0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t entries = 0;
};

/// Compares backward() of a scalar function against central differences,
/// component-wise: |analytic - numeric| / max(|analytic|, |numeric|, floor).
GradCheckResult grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                           double eps = 1e-5, double floor = 1e-6);

/// Same check over several leaf tensors that `f` closes over. `stride`
/// probes every stride-th entry of each tensor.
GradCheckResult grad_check(const std::function<Tensor()>& f, const std::vector<Tensor>& leaves,
                           double eps = 1e-5, double floor = 1e-6, std::size_t stride = 1);

}  // namespace gazelex::tensor
