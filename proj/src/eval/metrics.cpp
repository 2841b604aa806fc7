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


#include "gazelex/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace gazelex::eval {

nlohmann::json MetricsReport::to_json() const {
  // Rules without a score threshold carry NaN.
  const nlohmann::json theta = std::isfinite(threshold) ? nlohmann::json(threshold) : nullptr;
  return {{"accuracy", accuracy},
          {"precision", precision},
          {"recall", recall},
          {"f1", f1},
          {"threshold", theta},
          {"confusion",
           {{"tp", confusion.tp}, {"fp", confusion.fp}, {"fn", confusion.fn}, {"tn", confusion.tn}}},
          {"triggered_rate", triggered_rate},
          {"false_alarm_rate", false_alarm_rate}};
}

MetricsReport metrics_from_confusion(const Confusion& c, double threshold) {
  MetricsReport r;
  r.confusion = c;
  r.threshold = threshold;
  const double tp = double(c.tp), fp = double(c.fp), fn = double(c.fn), tn = double(c.tn);
  const double p = c.tp + c.fp == 0 ? 0.0 : tp / (tp + fp);
  const double rec = c.tp + c.fn == 0 ? 0.0 : tp / (tp + fn);
  r.precision = 100.0 * p;
  r.recall = 100.0 * rec;
  r.f1 = p + rec == 0.0 ? 0.0 : 100.0 * 2.0 * p * rec / (p + rec);
  r.accuracy = c.total() == 0 ? 0.0 : 100.0 * (tp + tn) / double(c.total());
  r.triggered_rate = rec;
  r.false_alarm_rate = c.fp + c.tn == 0 ? 0.0 : fp / (fp + tn);
  return r;
}

MetricsReport score_metrics(std::span<const double> word_scores, const std::vector<bool>& labels,
                            double threshold) {
  if (word_scores.size() != labels.size()) throw MetricsError("scores and labels differ in size");
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool pred = word_scores[i] >= threshold;
    if (pred) {
      ++(labels[i] ? c.tp : c.fp);
    } else {
      ++(labels[i] ? c.fn : c.tn);
    }
  }
  return metrics_from_confusion(c, threshold);
}

MetricsReport word_level_metrics(std::span<const double> token_p, double threshold,
                                 std::span<const std::size_t> token_word,
                                 const std::vector<bool>& labels) {
  if (token_p.size() != token_word.size()) throw MetricsError("every token needs a word");
  std::vector<double> score(labels.size(), -1.0);
  for (std::size_t i = 0; i < token_p.size(); ++i) {
    if (token_word[i] >= labels.size()) {
      throw MetricsError("token " + std::to_string(i) + " is not mapped to a word");
    }
    score[token_word[i]] = std::max(score[token_word[i]], token_p[i]);
  }
  return score_metrics(score, labels, threshold);
}

double search_threshold(std::span<const double> word_scores, const std::vector<bool>& labels) {
  if (word_scores.size() != labels.size()) throw MetricsError("scores and labels differ in size");
  // F1 = 2tp / (2tp + fp + fn), compared as exact fractions so equal scores tie.
  std::uint64_t best_num = 0, best_den = 1;
  double best = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double theta = double(k) / 100.0;
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const bool pred = word_scores[i] >= theta;
      tp += pred && labels[i];
      fp += pred && !labels[i];
      fn += !pred && labels[i];
    }
    const std::uint64_t num = 2 * tp;
    const std::uint64_t den = tp == 0 ? 1 : 2 * tp + fp + fn;
    if (k == 0 || num * best_den > best_num * den) {
      best_num = num;
      best_den = den;
      best = theta;
    }
  }
  return best;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& x : a) inter += b.count(x);
  return double(inter) / double(a.size() + b.size() - inter);
}

}  // namespace gazelex::eval
