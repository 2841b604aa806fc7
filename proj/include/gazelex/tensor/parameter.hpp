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

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "gazelex/tensor/tensor.hpp"

namespace gazelex::tensor {

/// Learning-rate group. The text backbone trains at the backbone rate;
/// everything else (gaze encoder-decoder, knowledge embeddings, classifier)
/// at the encoder-decoder rate.
enum class LrGroup { kEncoderDecoder, kBackbone };

std::string_view to_string(LrGroup group);
LrGroup lr_group_from_string(std::string_view name);

struct Parameter {
  std::string name;
  LrGroup group = LrGroup::kBackbone;
  Tensor tensor;
};

enum class Init { kZeros, kOnes, kTruncatedNormal };

/// Ordered, uniquely named parameters of one model.
class ParameterSet {
 public:
  explicit ParameterSet(std::uint64_t seed = 0) : rng_(seed) {}

  /// Registers a new parameter. Truncated-normal draws use sigma 0.02,
  /// truncated at two sigma, from this set's seeded generator in
  /// registration order.
  Tensor add(const std::string& name, LrGroup group, Shape shape, Init init);

  const std::vector<Parameter>& all() const { return params_; }
  std::vector<Parameter>& all() { return params_; }
  const Parameter& get(std::string_view name) const;
  bool contains(std::string_view name) const;
  std::size_t scalar_count() const;
  void zero_grad();

 private:
  std::vector<Parameter> params_;
  std::mt19937_64 rng_;
};

}  // namespace gazelex::tensor
