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
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "gazelex/baselines/baselines.hpp"
#include "gazelex/data/dataset.hpp"
#include "gazelex/eval/metrics.hpp"
#include "gazelex/eval/train.hpp"
#include "gazelex/model/detector.hpp"
#include "gazelex/text/layout.hpp"
#include "gazelex/text/vocabulary.hpp"

namespace gazelex::eval {

enum class Method {
  kFull,
  kNoText,
  kNoGaze,
  kNoKnowledge,
  kRandomText,
  kDistance,
  kFixation,
  kLogistic,
  kNgram1,
  kNgram2,
  kNgram3,
  kRandom,
  kSvm,
};

const char* to_string(Method method);
/// Throws std::invalid_argument for an unknown name.
Method method_from_string(std::string_view name);
std::vector<Method> all_methods();
bool is_neural(Method method);

/// Model config of a neural method: ablations switch components off.
model::ModelConfig method_config(Method method, model::ModelConfig base);

struct SuiteRow {
  Method method = Method::kFull;
  data::SplitMode mode = data::SplitMode::kMixed;
  /// "ok", "failed" or "external".
  std::string status = "ok";
  std::string error;
  MetricsReport test;
  double dev_f1 = 0.0;
  nlohmann::json detail = nlohmann::json::object();

  nlohmann::json to_json() const;
};

struct SuiteConfig {
  std::vector<data::SplitMode> modes{data::SplitMode::kMixed};
  std::vector<Method> methods;
  /// Base config of the neural methods; vocab_size and max_gaze_len must
  /// match the dataset.
  model::ModelConfig model;
  TrainConfig train;
  baselines::LogisticConfig logistic;
  std::uint64_t split_seed = 0;
  /// Pretrained token table loaded by every neural method except
  /// random_text. Requires `vocab`.
  std::optional<std::filesystem::path> embeddings;
  const text::Vocabulary* vocab = nullptr;
  /// Concurrent (method, mode) runs; each run is single-threaded.
  std::size_t jobs = 1;
  /// Called with each trained neural model after scoring, from the thread
  /// that ran it.
  std::function<void(const SuiteRow&, const model::DetectorModel&, const TrainResult&)>
      on_trained;

  nlohmann::json to_json() const;
};

struct SuiteReport {
  std::vector<SuiteRow> rows;
  nlohmann::json splits = nlohmann::json::object();
  data::Imbalance imbalance;
  nlohmann::json config;

  const SuiteRow* find(Method method, data::SplitMode mode) const;
  nlohmann::json to_json() const;
  /// Fixed-width text table, one line per row.
  std::string table() const;
};

/// Trains and scores each requested (method, mode) pair on the dataset.
/// Rows follow the order modes x methods. A run that throws yields a
/// "failed" row carrying the message; the svm row is always "external".
/// Epoch records and per-run timings go to `log` as JSON Lines.
SuiteReport run_suite(const data::Dataset& dataset, const std::vector<text::DocumentLayout>& docs,
                      const SuiteConfig& config, std::ostream* log = nullptr);

}  // namespace gazelex::eval
