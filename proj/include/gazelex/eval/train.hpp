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
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "json.hpp"

#include "gazelex/data/dataset.hpp"
#include "gazelex/model/detector.hpp"

namespace gazelex::eval {

class TrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  std::size_t epochs = 30;
  /// Model rows (windows) per optimizer step.
  std::size_t batch_size = 32;
  double lr_encoder_decoder = 1e-3;
  double lr_backbone = 2e-5;
  /// Stop once this many epochs pass without a better dev F1.
  std::size_t patience = 5;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

struct EpochLog {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double dev_f1 = 0.0;
  double threshold = 0.0;

  nlohmann::json to_json() const;
};

struct TrainResult {
  std::size_t best_epoch = 0;
  double best_dev_f1 = -1.0;
  double threshold = 0.5;
  std::vector<EpochLog> log;

  nlohmann::json to_json() const;
};

/// Mini-batch focal-loss training with early stopping on dev F1. The model
/// ends holding the parameters of its best dev epoch. Epoch records go to
/// `log` as JSON Lines when given. Throws TrainError naming the epoch and
/// batch of a non-finite loss or gradient.
TrainResult train(model::DetectorModel& model, const data::Dataset& dataset,
                  std::span<const std::size_t> train_ids, std::span<const std::size_t> dev_ids,
                  const TrainConfig& config, std::ostream* log = nullptr);

/// Word scores (max token probability) for the given samples, in order.
std::vector<double> predict(const model::DetectorModel& model, const data::Dataset& dataset,
                            std::span<const std::size_t> ids, std::size_t batch_size = 64);

std::vector<bool> labels_of(const data::Dataset& dataset, std::span<const std::size_t> ids);

}  // namespace gazelex::eval
