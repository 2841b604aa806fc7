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

#include "gazelex/eval/suite.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

namespace gazelex::eval {
namespace {

struct MethodName {
  Method method;
  const char* name;
};

constexpr std::array<MethodName, 13> kMethods{{
    {Method::kFull, "full"},
    {Method::kNoText, "no_text"},
    {Method::kNoGaze, "no_gaze"},
    {Method::kNoKnowledge, "no_knowledge"},
    {Method::kRandomText, "random_text"},
    {Method::kDistance, "distance"},
    {Method::kFixation, "fixation"},
    {Method::kLogistic, "logistic"},
    {Method::kNgram1, "ngram1"},
    {Method::kNgram2, "ngram2"},
    {Method::kNgram3, "ngram3"},
    {Method::kRandom, "random"},
    {Method::kSvm, "svm"},
}};

MetricsReport metrics_of(const std::vector<bool>& predicted, const std::vector<bool>& labels,
                         double threshold) {
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (predicted[i]) {
      ++(labels[i] ? c.tp : c.fp);
    } else {
      ++(labels[i] ? c.fn : c.tn);
    }
  }
  return metrics_from_confusion(c, threshold);
}

double positive_rate(const data::Dataset& ds, std::span<const std::size_t> ids) {
  std::size_t pos = 0;
  for (std::size_t i : ids) pos += ds.samples[i].unknown ? 1 : 0;
  return ids.empty() ? 0.0 : double(pos) / double(ids.size());
}

struct RunContext {
  const data::Dataset& ds;
  const std::vector<text::DocumentLayout>& docs;
  const SuiteConfig& config;
  const data::Split& split;
};

void run_neural(const RunContext& ctx, SuiteRow& row, std::ostream& log) {
  model::DetectorModel model(method_config(row.method, ctx.config.model));
  bool pretrained = false;
  if (ctx.config.embeddings && row.method != Method::kRandomText && model.config().use_text_encoder) {
    if (ctx.config.vocab == nullptr) throw std::invalid_argument("embeddings need a vocabulary");
    model.load_embeddings(*ctx.config.embeddings, ctx.config.vocab->units());
    pretrained = true;
  }
  const auto result =
      train(model, ctx.ds, ctx.split.train, ctx.split.dev, ctx.config.train, &log);
  const auto scores = predict(model, ctx.ds, ctx.split.test);
  row.test = score_metrics(scores, labels_of(ctx.ds, ctx.split.test), result.threshold);
  row.dev_f1 = result.best_dev_f1;
  row.detail = {{"best_epoch", result.best_epoch},
                {"epochs_run", result.log.size()},
                {"parameters", model.parameters().scalar_count()},
                {"pretrained_embeddings", pretrained}};
  if (ctx.config.on_trained) ctx.config.on_trained(row, model, result);
}

void run_rule(const RunContext& ctx, SuiteRow& row) {
  const bool distance = row.method == Method::kDistance;
  const auto rule = distance ? baselines::calibrate_distance(ctx.ds, ctx.split.dev)
                             : baselines::calibrate_fixation(ctx.ds, ctx.split.dev);
  auto values = [&](const std::vector<std::size_t>& ids) {
    return distance ? baselines::distances(ctx.ds, ids) : baselines::durations(ctx.ds, ids);
  };
  row.dev_f1 = metrics_of(rule.predict(values(ctx.split.dev)), labels_of(ctx.ds, ctx.split.dev),
                          rule.theta)
                   .f1;
  row.test = metrics_of(rule.predict(values(ctx.split.test)), labels_of(ctx.ds, ctx.split.test),
                        rule.theta);
  row.detail = {{"rule", rule.at_least ? "value >= theta" : "value <= theta"}};
}

void run_logistic(const RunContext& ctx, SuiteRow& row) {
  const auto lr = baselines::train_logistic(ctx.ds, ctx.split.train, ctx.split.dev,
                                            ctx.config.logistic);
  row.dev_f1 = score_metrics(lr.probabilities(ctx.ds, ctx.split.dev),
                             labels_of(ctx.ds, ctx.split.dev), lr.threshold)
                   .f1;
  row.test = score_metrics(lr.probabilities(ctx.ds, ctx.split.test),
                           labels_of(ctx.ds, ctx.split.test), lr.threshold);
  row.detail = {{"model", lr.to_json()}};
}

void run_ngram(const RunContext& ctx, SuiteRow& row) {
  const int n = row.method == Method::kNgram1 ? 1 : row.method == Method::kNgram2 ? 2 : 3;
  const auto predictor = baselines::build_ngram(n, ctx.ds, ctx.split.train, ctx.docs);
  auto run = [&](const std::vector<std::size_t>& ids) {
    return metrics_of(baselines::ngram_predictions(predictor, ctx.ds, ids, ctx.docs),
                      labels_of(ctx.ds, ids), std::nan(""));
  };
  row.dev_f1 = run(ctx.split.dev).f1;
  row.test = run(ctx.split.test);
  row.detail = {{"n", n}, {"positive_ngrams", predictor.positive.size()}};
}

void run_random(const RunContext& ctx, SuiteRow& row) {
  const double rate = positive_rate(ctx.ds, ctx.split.train);
  const std::uint64_t seed = ctx.config.train.seed;
  row.dev_f1 = metrics_of(baselines::random_predictions(ctx.split.dev.size(), rate, seed),
                          labels_of(ctx.ds, ctx.split.dev), rate)
                   .f1;
  row.test = metrics_of(baselines::random_predictions(ctx.split.test.size(), rate, seed + 1),
                        labels_of(ctx.ds, ctx.split.test), rate);
  row.detail = {{"rate", rate}};
}

void run_row(const RunContext& ctx, SuiteRow& row, std::ostream& log) {
  switch (row.method) {
    case Method::kFull:
    case Method::kNoText:
    case Method::kNoGaze:
    case Method::kNoKnowledge:
    case Method::kRandomText:
      run_neural(ctx, row, log);
      break;
    case Method::kDistance:
    case Method::kFixation:
      run_rule(ctx, row);
      break;
    case Method::kLogistic:
      run_logistic(ctx, row);
      break;
    case Method::kNgram1:
    case Method::kNgram2:
    case Method::kNgram3:
      run_ngram(ctx, row);
      break;
    case Method::kRandom:
      run_random(ctx, row);
      break;
    case Method::kSvm:
      row.status = "external";
      break;
  }
}

/// Tags each JSON line of `text` with the row's method and mode.
void forward_log(const std::string& text, const SuiteRow& row, std::ostream& out) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) continue;
    j["method"] = to_string(row.method);
    j["mode"] = data::to_string(row.mode);
    out << j.dump() << '\n';
  }
}

std::string fmt(double v, int precision = 1) {
  if (!std::isfinite(v)) return "-";
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

}  // namespace

const char* to_string(Method method) {
  for (const auto& m : kMethods) {
    if (m.method == method) return m.name;
  }
  return "?";
}

Method method_from_string(std::string_view name) {
  for (const auto& m : kMethods) {
    if (name == m.name) return m.method;
  }
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

std::vector<Method> all_methods() {
  std::vector<Method> out;
  for (const auto& m : kMethods) out.push_back(m.method);
  return out;
}

bool is_neural(Method method) {
  switch (method) {
    case Method::kFull:
    case Method::kNoText:
    case Method::kNoGaze:
    case Method::kNoKnowledge:
    case Method::kRandomText:
      return true;
    default:
      return false;
  }
}

model::ModelConfig method_config(Method method, model::ModelConfig base) {
  if (method == Method::kNoText) base.use_text_encoder = false;
  if (method == Method::kNoGaze) base.use_gaze_encoder = false;
  if (method == Method::kNoKnowledge) base.use_knowledge = false;
  return base;
}

nlohmann::json SuiteConfig::to_json() const {
  nlohmann::json j;
  for (auto m : modes) j["modes"].push_back(data::to_string(m));
  for (auto m : methods) j["methods"].push_back(to_string(m));
  j["model"] = model.to_json();
  j["train"] = train.to_json();
  j["logistic"] = {{"epochs", logistic.epochs},
                   {"batch_size", logistic.batch_size},
                   {"lr", logistic.lr},
                   {"seed", logistic.seed}};
  j["split_seed"] = split_seed;
  j["embeddings"] = nullptr;
  if (embeddings) j["embeddings"] = embeddings->string();
  return j;
}

nlohmann::json SuiteRow::to_json() const {
  nlohmann::json j = {{"method", to_string(method)},
                      {"mode", data::to_string(mode)},
                      {"status", status}};
  if (status == "ok") {
    j["test"] = test.to_json();
    j["dev_f1"] = dev_f1;
    j["detail"] = detail;
  } else if (status == "failed") {
    j["error"] = error;
  }
  return j;
}

const SuiteRow* SuiteReport::find(Method method, data::SplitMode mode) const {
  for (const auto& row : rows) {
    if (row.method == method && row.mode == mode) return &row;
  }
  return nullptr;
}

nlohmann::json SuiteReport::to_json() const {
  nlohmann::json j;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : rows) j["rows"].push_back(row.to_json());
  j["splits"] = splits;
  j["imbalance"] = {{"negative_tokens", imbalance.negative_tokens},
                    {"positive_tokens", imbalance.positive_tokens},
                    {"ratio", imbalance.ratio}};
  j["config"] = config;
  return j;
}

std::string SuiteReport::table() const {
  std::ostringstream s;
  s << std::left << std::setw(14) << "method" << std::setw(16) << "mode" << std::right
    << std::setw(8) << "acc" << std::setw(8) << "prec" << std::setw(8) << "rec" << std::setw(8)
    << "f1" << std::setw(8) << "dev_f1" << std::setw(8) << "theta" << "  status\n";
  for (const auto& row : rows) {
    s << std::left << std::setw(14) << to_string(row.method) << std::setw(16)
      << data::to_string(row.mode) << std::right;
    if (row.status == "ok") {
      s << std::setw(8) << fmt(row.test.accuracy) << std::setw(8) << fmt(row.test.precision)
        << std::setw(8) << fmt(row.test.recall) << std::setw(8) << fmt(row.test.f1)
        << std::setw(8) << fmt(row.dev_f1) << std::setw(8) << fmt(row.test.threshold, 2) << "  ok";
    } else {
      for (int i = 0; i < 6; ++i) s << std::setw(8) << "-";
      s << "  " << row.status;
      if (!row.error.empty()) s << ": " << row.error;
    }
    s << '\n';
  }
  s << "token imbalance (negative:positive) " << fmt(imbalance.ratio, 2) << '\n';
  return s.str();
}

SuiteReport run_suite(const data::Dataset& dataset, const std::vector<text::DocumentLayout>& docs,
                      const SuiteConfig& config, std::ostream* log) {
  SuiteReport report;
  report.config = config.to_json();
  report.imbalance = data::class_imbalance(dataset);

  std::vector<std::optional<data::Split>> splits;
  std::vector<std::string> split_errors;
  for (auto mode : config.modes) {
    try {
      splits.emplace_back(
          data::split(dataset, data::default_split_spec(dataset, mode, config.split_seed)));
      report.splits[data::to_string(mode)] = splits.back()->manifest();
      split_errors.emplace_back();
    } catch (const std::exception& e) {
      splits.emplace_back();
      split_errors.emplace_back(e.what());
      report.splits[data::to_string(mode)] = {{"error", e.what()}};
    }
  }

  for (std::size_t m = 0; m < config.modes.size(); ++m) {
    for (auto method : config.methods) {
      SuiteRow row;
      row.method = method;
      row.mode = config.modes[m];
      if (!splits[m] && method != Method::kSvm) {
        row.status = "failed";
        row.error = split_errors[m];
      }
      report.rows.push_back(std::move(row));
    }
  }

  std::mutex log_mu;
  std::atomic<std::size_t> next{0};
  const std::size_t n_methods = config.methods.size();
  auto worker = [&] {
    for (std::size_t i = next++; i < report.rows.size(); i = next++) {
      SuiteRow& row = report.rows[i];
      if (row.status == "failed") continue;
      const auto& split = splits[i / n_methods];
      std::ostringstream run_log;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        if (row.method != Method::kSvm && !split) throw std::logic_error("missing split");
        const RunContext ctx{dataset, docs, config, *split};
        run_row(ctx, row, run_log);
      } catch (const std::exception& e) {
        row.status = "failed";
        row.error = e.what();
        row.detail = nlohmann::json::object();
      }
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (log != nullptr) {
        nlohmann::json done = {{"event", "run_done"}, {"status", row.status}, {"seconds", seconds}};
        if (row.status == "ok") done["test_f1"] = row.test.f1;
        if (!row.error.empty()) done["error"] = row.error;
        run_log << done.dump() << '\n';
        const std::lock_guard<std::mutex> lock(log_mu);
        forward_log(run_log.str(), row, *log);
        log->flush();
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(config.jobs, 1, report.rows.size() + 1);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  return report;
}

}  // namespace gazelex::eval
