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


#include "gazelex/baselines/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gazelex/eval/metrics.hpp"
#include "gazelex/eval/train.hpp"
#include "gazelex/model/detector.hpp"
#include "gazelex/tensor/ops.hpp"
#include "gazelex/tensor/optim.hpp"
#include "gazelex/text/knowledge.hpp"

namespace gazelex::baselines {
namespace {

double f1_of(const std::vector<bool>& pred, const std::vector<bool>& labels) {
  eval::Confusion c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i]) {
      ++(labels[i] ? c.tp : c.fp);
    } else {
      ++(labels[i] ? c.fn : c.tn);
    }
  }
  return eval::metrics_from_confusion(c, 0.0).f1;
}

const text::DocumentLayout& find_doc(const std::vector<text::DocumentLayout>& docs,
                                     const std::string& id) {
  for (const auto& d : docs) {
    if (d.doc_id == id) return d;
  }
  throw BaselineError("unknown document '" + id + "'");
}

}  // namespace

std::vector<bool> ThresholdRule::predict(std::span<const double> values) const {
  std::vector<bool> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(at_least ? v >= theta : v <= theta);
  return out;
}

ThresholdRule calibrate_rule(std::span<const double> dev_values, const std::vector<bool>& dev_labels,
                             bool at_least) {
  if (dev_values.size() != dev_labels.size()) throw BaselineError("values and labels differ");
  ThresholdRule best{0.0, at_least};
  if (dev_values.empty()) return best;
  const auto [lo, hi] = std::minmax_element(dev_values.begin(), dev_values.end());
  double best_f1 = -1.0;
  for (int k = 0; k <= 100; ++k) {
    const ThresholdRule rule{*lo + (*hi - *lo) * double(k) / 100.0, at_least};
    const double f1 = f1_of(rule.predict(dev_values), dev_labels);
    if (f1 > best_f1) {
      best_f1 = f1;
      best = rule;
    }
  }
  return best;
}

std::vector<double> distances(const data::Dataset& ds, std::span<const std::size_t> ids) {
  std::vector<double> out;
  for (std::size_t i : ids) out.push_back(ds.samples.at(i).distance);
  return out;
}

std::vector<double> durations(const data::Dataset& ds, std::span<const std::size_t> ids) {
  std::vector<double> out;
  for (std::size_t i : ids) out.push_back(ds.samples.at(i).duration);
  return out;
}

ThresholdRule calibrate_distance(const data::Dataset& ds, std::span<const std::size_t> dev_ids) {
  return calibrate_rule(distances(ds, dev_ids), eval::labels_of(ds, dev_ids), false);
}

ThresholdRule calibrate_fixation(const data::Dataset& ds, std::span<const std::size_t> dev_ids) {
  return calibrate_rule(durations(ds, dev_ids), eval::labels_of(ds, dev_ids), true);
}

std::vector<double> LogisticModel::raw_features(const data::LabeledSample& s) {
  std::vector<double> f(kFeatures, 0.0);
  f[0] = s.distance;
  f[1] = s.duration;
  f[2] = s.log_tf;
  f[3 + static_cast<std::size_t>(s.pos)] = 1.0;
  f[3 + text::kPosCount + static_cast<std::size_t>(s.ner)] = 1.0;
  return f;
}

double LogisticModel::probability(const data::LabeledSample& s) const {
  const auto f = raw_features(s);
  double z = bias;
  for (std::size_t j = 0; j < kFeatures; ++j) z += weights[j] * (f[j] - mean[j]) / stddev[j];
  return 1.0 / (1.0 + std::exp(-z));
}

std::vector<double> LogisticModel::probabilities(const data::Dataset& ds,
                                                 std::span<const std::size_t> ids) const {
  std::vector<double> out;
  out.reserve(ids.size());
  for (std::size_t i : ids) out.push_back(probability(ds.samples.at(i)));
  return out;
}

nlohmann::json LogisticModel::to_json() const {
  return {{"weights", weights}, {"bias", bias}, {"mean", mean}, {"stddev", stddev},
          {"threshold", threshold}};
}

LogisticModel train_logistic(const data::Dataset& ds, std::span<const std::size_t> train_ids,
                             std::span<const std::size_t> dev_ids, const LogisticConfig& config) {
  const std::size_t k = LogisticModel::kFeatures;
  std::size_t positives = 0;
  for (std::size_t i : train_ids) positives += ds.samples.at(i).unknown;
  if (positives == 0 || positives == train_ids.size()) {
    throw BaselineError("logistic regression needs both classes in training data");
  }
  LogisticModel m;
  m.mean.assign(k, 0.0);
  m.stddev.assign(k, 0.0);
  std::vector<std::vector<double>> x;
  x.reserve(train_ids.size());
  for (std::size_t i : train_ids) x.push_back(LogisticModel::raw_features(ds.samples[i]));
  const double n = double(x.size());
  for (const auto& row : x) {
    for (std::size_t j = 0; j < k; ++j) m.mean[j] += row[j] / n;
  }
  for (const auto& row : x) {
    for (std::size_t j = 0; j < k; ++j) m.stddev[j] += (row[j] - m.mean[j]) * (row[j] - m.mean[j]) / n;
  }
  for (auto& s : m.stddev) s = s > 1e-12 ? std::sqrt(s) : 1.0;
  for (auto& row : x) {
    for (std::size_t j = 0; j < k; ++j) row[j] = (row[j] - m.mean[j]) / m.stddev[j];
  }

  tensor::ParameterSet params(config.seed);
  const auto g = tensor::LrGroup::kEncoderDecoder;
  auto w = params.add("logit.w", g, {k, 1}, tensor::Init::kZeros);
  auto b = params.add("logit.b", g, {1}, tensor::Init::kZeros);
  tensor::AdamConfig ac;
  ac.lr_encoder_decoder = ac.lr_backbone = config.lr;
  tensor::Adam adam(params, ac);
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t bs = std::min(config.batch_size, order.size() - start);
      std::vector<double> xv, y, mask(bs, 1.0);
      xv.reserve(bs * k);
      for (std::size_t r = 0; r < bs; ++r) {
        const std::size_t idx = order[start + r];
        xv.insert(xv.end(), x[idx].begin(), x[idx].end());
        y.push_back(ds.samples[train_ids[idx]].unknown ? 1.0 : 0.0);
      }
      const tensor::Tensor xt({bs, k}, std::move(xv));
      const auto p = tensor::reshape(tensor::sigmoid(tensor::add(tensor::matmul(xt, w), b)), {bs});
      adam.zero_grad();
      // Focal loss with alpha 1/2 and gamma 0 is half the cross-entropy.
      model::focal_loss(p, y, mask, 0.5, 0.0).backward();
      adam.step();
    }
  }
  m.weights.assign(w.values().begin(), w.values().end());
  m.bias = b.values()[0];
  m.threshold = eval::search_threshold(m.probabilities(ds, dev_ids), eval::labels_of(ds, dev_ids));
  return m;
}

std::vector<std::string> ngram_at(const text::DocumentLayout& layout, std::size_t position, int n) {
  if (n < 1) throw BaselineError("n-gram order must be positive");
  if (position >= layout.words.size()) throw BaselineError("n-gram position outside the document");
  std::vector<std::string> gram(static_cast<std::size_t>(n), kSentenceStart);
  std::size_t i = position;
  for (int k = n - 1; k >= 0; --k) {
    gram[static_cast<std::size_t>(k)] = text::normalize_word(layout.words[i].text);
    if (k == 0 || layout.sentence_initial(i)) break;
    --i;
  }
  return gram;
}

NGramPredictor build_ngram(int n, const data::Dataset& ds, std::span<const std::size_t> train_ids,
                           const std::vector<text::DocumentLayout>& docs) {
  NGramPredictor p;
  p.n = n;
  for (std::size_t i : train_ids) {
    const auto& s = ds.samples.at(i);
    if (!s.unknown) continue;
    p.positive.insert(ngram_at(find_doc(docs, ds.record_of(s).doc_id), s.word_index, n));
  }
  return p;
}

bool ngram_predict(const NGramPredictor& predictor, const text::DocumentLayout& layout,
                   std::size_t position) {
  return predictor.positive.contains(ngram_at(layout, position, predictor.n));
}

std::vector<bool> ngram_predictions(const NGramPredictor& predictor, const data::Dataset& ds,
                                    std::span<const std::size_t> ids,
                                    const std::vector<text::DocumentLayout>& docs) {
  std::vector<bool> out;
  out.reserve(ids.size());
  for (std::size_t i : ids) {
    const auto& s = ds.samples.at(i);
    out.push_back(ngram_predict(predictor, find_doc(docs, ds.record_of(s).doc_id), s.word_index));
  }
  return out;
}

std::vector<bool> random_predictions(std::size_t n, double rate, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<bool> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = u(rng) < rate;
  return out;
}

double permutation_f1(const std::vector<bool>& predictions, const std::vector<bool>& labels,
                      std::uint64_t seed, std::size_t rounds) {
  std::mt19937_64 rng(seed);
  std::vector<bool> shuffled = labels;
  double total = 0.0;
  for (std::size_t r = 0; r < rounds; ++r) {
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    total += f1_of(predictions, shuffled);
  }
  return total / double(std::max<std::size_t>(1, rounds));
}

}  // namespace gazelex::baselines
