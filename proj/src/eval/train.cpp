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


#include "gazelex/eval/train.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <unordered_map>

#include "gazelex/eval/metrics.hpp"
#include "gazelex/tensor/optim.hpp"

namespace gazelex::eval {

void TrainConfig::validate() const {
  if (epochs == 0 || batch_size == 0) throw std::invalid_argument("epochs and batch_size must be positive");
  if (!(lr_encoder_decoder > 0 && lr_backbone > 0)) {
    throw std::invalid_argument("learning rates must be positive");
  }
  if (patience > epochs) throw std::invalid_argument("patience must not exceed epochs");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"epochs", epochs},
          {"batch_size", batch_size},
          {"lr_encoder_decoder", lr_encoder_decoder},
          {"lr_backbone", lr_backbone},
          {"patience", patience},
          {"seed", seed}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.lr_encoder_decoder = j.value("lr_encoder_decoder", c.lr_encoder_decoder);
  c.lr_backbone = j.value("lr_backbone", c.lr_backbone);
  c.patience = j.value("patience", c.patience);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

nlohmann::json EpochLog::to_json() const {
  return {{"epoch", epoch}, {"loss", mean_loss}, {"dev_f1", dev_f1}, {"threshold", threshold}};
}

nlohmann::json TrainResult::to_json() const {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : log) epochs.push_back(e.to_json());
  return {{"best_epoch", best_epoch},
          {"best_dev_f1", best_dev_f1},
          {"threshold", threshold},
          {"epochs", epochs}};
}

std::vector<bool> labels_of(const data::Dataset& dataset, std::span<const std::size_t> ids) {
  std::vector<bool> out;
  out.reserve(ids.size());
  for (std::size_t i : ids) out.push_back(dataset.samples.at(i).unknown);
  return out;
}

std::vector<double> predict(const model::DetectorModel& model, const data::Dataset& dataset,
                            std::span<const std::size_t> ids, std::size_t batch_size) {
  tensor::NoGradGuard no_grad;
  const auto rows = data::group_rows(dataset, ids);
  std::unordered_map<std::size_t, double> score;
  for (std::size_t start = 0; start < rows.size(); start += batch_size) {
    const std::span<const data::RowRef> chunk(rows.data() + start,
                                              std::min(batch_size, rows.size() - start));
    const auto batch = data::make_batch(dataset, chunk);
    const auto out = model.forward(batch);
    const auto p = out.values();
    for (std::size_t b = 0; b < chunk.size(); ++b) {
      for (std::size_t si : chunk[b].samples) {
        double best = 0.0;
        for (std::size_t slot : dataset.samples[si].token_slots) {
          best = std::max(best, p[b * batch.n_tokens + slot]);
        }
        score[si] = best;
      }
    }
  }
  std::vector<double> out;
  out.reserve(ids.size());
  for (std::size_t i : ids) out.push_back(score.at(i));
  return out;
}

TrainResult train(model::DetectorModel& model, const data::Dataset& dataset,
                  std::span<const std::size_t> train_ids, std::span<const std::size_t> dev_ids,
                  const TrainConfig& config, std::ostream* log) {
  config.validate();
  if (train_ids.empty() || dev_ids.empty()) throw TrainError("train and dev sets must be nonempty");
  auto rows = data::group_rows(dataset, train_ids);
  const auto dev_labels = labels_of(dataset, dev_ids);
  auto& params = model.parameters();
  tensor::AdamConfig adam_cfg;
  adam_cfg.lr_encoder_decoder = config.lr_encoder_decoder;
  adam_cfg.lr_backbone = config.lr_backbone;
  tensor::Adam adam(params, adam_cfg);
  std::mt19937_64 rng(config.seed);
  const auto& mc = model.config();

  TrainResult result;
  std::vector<std::vector<double>> best_values;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(rows.begin(), rows.end(), rng);
    double loss_sum = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < rows.size(); start += config.batch_size, ++n_batches) {
      const std::span<const data::RowRef> chunk(rows.data() + start,
                                                std::min(config.batch_size, rows.size() - start));
      const auto batch = data::make_batch(dataset, chunk);
      adam.zero_grad();
      const auto p = model.forward(batch);
      const auto loss = model::focal_loss(p, batch.labels, batch.loss_mask, mc.alpha, mc.gamma);
      const double value = loss.item();
      if (!std::isfinite(value)) {
        throw TrainError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                         std::to_string(n_batches));
      }
      loss.backward();
      try {
        adam.step();
      } catch (const std::domain_error& e) {
        throw TrainError("non-finite gradient at epoch " + std::to_string(epoch) + ", batch " +
                         std::to_string(n_batches) + ": " + e.what());
      }
      loss_sum += value;
    }
    const auto scores = predict(model, dataset, dev_ids);
    EpochLog entry;
    entry.epoch = epoch;
    entry.mean_loss = loss_sum / double(std::max<std::size_t>(1, n_batches));
    entry.threshold = search_threshold(scores, dev_labels);
    entry.dev_f1 = score_metrics(scores, dev_labels, entry.threshold).f1;
    result.log.push_back(entry);
    if (log) *log << entry.to_json().dump() << '\n' << std::flush;
    if (entry.dev_f1 > result.best_dev_f1) {
      result.best_dev_f1 = entry.dev_f1;
      result.best_epoch = epoch;
      result.threshold = entry.threshold;
      best_values.clear();
      for (const auto& prm : params.all()) {
        best_values.emplace_back(prm.tensor.values().begin(), prm.tensor.values().end());
      }
    }
    if (epoch - result.best_epoch >= config.patience) break;
  }
  auto& all = params.all();
  for (std::size_t i = 0; i < all.size(); ++i) {
    std::copy(best_values[i].begin(), best_values[i].end(), all[i].tensor.mutable_values().begin());
  }
  return result;
}

}  // namespace gazelex::eval
