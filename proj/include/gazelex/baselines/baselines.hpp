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
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "gazelex/data/dataset.hpp"
#include "gazelex/text/layout.hpp"

namespace gazelex::baselines {

class BaselineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Threshold rule over one scalar feature.
struct ThresholdRule {
  double theta = 0.0;
  /// true: positive when value >= theta; false: positive when value <= theta.
  bool at_least = true;

  std::vector<bool> predict(std::span<const double> values) const;
};

/// Picks theta from 101 evenly spaced points over [min, max] of the dev
/// values by word-level F1, ties to the smallest theta.
ThresholdRule calibrate_rule(std::span<const double> dev_values, const std::vector<bool>& dev_labels,
                             bool at_least);

/// Word-level gaze-token distance and fixation count of the given samples.
std::vector<double> distances(const data::Dataset& ds, std::span<const std::size_t> ids);
std::vector<double> durations(const data::Dataset& ds, std::span<const std::size_t> ids);

/// Distance heuristic: unknown iff d <= theta_d.
ThresholdRule calibrate_distance(const data::Dataset& ds, std::span<const std::size_t> dev_ids);
/// Fixation heuristic: unknown iff t >= theta_t.
ThresholdRule calibrate_fixation(const data::Dataset& ds, std::span<const std::size_t> dev_ids);

struct LogisticConfig {
  std::size_t epochs = 40;
  std::size_t batch_size = 256;
  double lr = 0.01;
  std::uint64_t seed = 0;
};

/// Logistic regression on [d, t, log tf, pos one-hot, ner one-hot], features
/// standardized with training statistics.
struct LogisticModel {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<double> weights;
  double bias = 0.0;
  double threshold = 0.5;

  static constexpr std::size_t kFeatures = 3 + 12 + 5;
  static std::vector<double> raw_features(const data::LabeledSample& s);
  double probability(const data::LabeledSample& s) const;
  std::vector<double> probabilities(const data::Dataset& ds, std::span<const std::size_t> ids) const;
  nlohmann::json to_json() const;
};

/// Trains with the Adam optimizer and calibrates the threshold on dev.
/// Throws BaselineError when the training labels hold a single class.
LogisticModel train_logistic(const data::Dataset& ds, std::span<const std::size_t> train_ids,
                             std::span<const std::size_t> dev_ids, const LogisticConfig& config = {});

/// Sentence-start padding for n-gram contexts.
inline constexpr const char* kSentenceStart = "<s>";

/// The n normalized words ending at `position`, padded with kSentenceStart
/// where the sentence starts earlier.
std::vector<std::string> ngram_at(const text::DocumentLayout& layout, std::size_t position, int n);

struct NGramPredictor {
  int n = 1;
  std::set<std::vector<std::string>> positive;
};

/// Positive set from the unknown-labelled training samples.
NGramPredictor build_ngram(int n, const data::Dataset& ds, std::span<const std::size_t> train_ids,
                           const std::vector<text::DocumentLayout>& docs);

bool ngram_predict(const NGramPredictor& predictor, const text::DocumentLayout& layout,
                   std::size_t position);

std::vector<bool> ngram_predictions(const NGramPredictor& predictor, const data::Dataset& ds,
                                    std::span<const std::size_t> ids,
                                    const std::vector<text::DocumentLayout>& docs);

/// Predicts unknown with probability `rate`, seeded.
std::vector<bool> random_predictions(std::size_t n, double rate, std::uint64_t seed);

/// Mean F1 of the predictions against shuffled labels.
double permutation_f1(const std::vector<bool>& predictions, const std::vector<bool>& labels,
                      std::uint64_t seed, std::size_t rounds = 20);

}  // namespace gazelex::baselines
