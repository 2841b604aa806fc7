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

#include "gazelex/tensor/parameter.hpp"

#include <algorithm>
#include <stdexcept>

namespace gazelex::tensor {

std::string_view to_string(LrGroup group) {
  return group == LrGroup::kEncoderDecoder ? "encoder_decoder" : "backbone";
}

LrGroup lr_group_from_string(std::string_view name) {
  if (name == "encoder_decoder") return LrGroup::kEncoderDecoder;
  if (name == "backbone") return LrGroup::kBackbone;
  throw std::invalid_argument("unknown learning-rate group: " + std::string(name));
}

Tensor ParameterSet::add(const std::string& name, LrGroup group, Shape shape, Init init) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  const auto n = shape_numel(shape);
  std::vector<double> values(n, init == Init::kOnes ? 1.0 : 0.0);
  if (init == Init::kTruncatedNormal) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& v : values) {
      double z = 0.0;
      do {
        z = normal(rng_);
      } while (std::abs(z) > 2.0);
      v = 0.02 * z;
    }
  }
  Tensor t(std::move(shape), std::move(values), true);
  params_.push_back(Parameter{name, group, t});
  return t;
}

const Parameter& ParameterSet::get(std::string_view name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p;
  }
  throw std::out_of_range("no parameter named " + std::string(name));
}

bool ParameterSet::contains(std::string_view name) const {
  return std::any_of(params_.begin(), params_.end(),
                     [&](const Parameter& p) { return p.name == name; });
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.numel();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

}  // namespace gazelex::tensor
