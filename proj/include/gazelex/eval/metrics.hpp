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

#include <cstddef>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace gazelex::eval {

class MetricsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
};

/// Word-level scores in percent; rates in [0, 1].
struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double threshold = 0.0;
  Confusion confusion;
  double triggered_rate = 0.0;
  double false_alarm_rate = 0.0;

  nlohmann::json to_json() const;
};

MetricsReport metrics_from_confusion(const Confusion& c, double threshold);

/// A word is predicted unknown when its score reaches the threshold.
MetricsReport score_metrics(std::span<const double> word_scores, const std::vector<bool>& labels,
                            double threshold);

/// Token-level form: a word is predicted unknown when any of its tokens has
/// p >= threshold. `token_word[i]` names the word of token i; a value outside
/// the label range throws MetricsError.
MetricsReport word_level_metrics(std::span<const double> token_p, double threshold,
                                 std::span<const std::size_t> token_word,
                                 const std::vector<bool>& labels);

/// The grid point k/100 (k = 0..100) with the highest word-level F1; ties go
/// to the smallest threshold.
double search_threshold(std::span<const double> word_scores, const std::vector<bool>& labels);

/// |A and B| / |A or B|; 1 when both are empty.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

}  // namespace gazelex::eval
