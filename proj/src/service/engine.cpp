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


#include "gazelex/service/engine.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "gazelex/eval/metrics.hpp"
#include "gazelex/gaze/pipeline.hpp"
#include "gazelex/tensor/tensor.hpp"

namespace gazelex::service {

using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * double(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - double(lo)) * (v[hi] - v[lo]);
}

}  // namespace

Dictionary::Dictionary(std::unordered_map<std::string, std::string> entries)
    : entries_(std::move(entries)) {}

Dictionary Dictionary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ServiceError("cannot read dictionary " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ServiceError("dictionary " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ServiceError("dictionary " + path.string() + " is not an object");
  std::unordered_map<std::string, std::string> entries;
  for (const auto& [word, def] : j.items()) {
    if (!def.is_string()) throw ServiceError("definition of '" + word + "' is not a string");
    entries[text::normalize_word(word)] = def.get<std::string>();
  }
  return Dictionary(std::move(entries));
}

std::string Dictionary::lookup(std::string_view word) const {
  const auto it = entries_.find(text::normalize_word(word));
  return it == entries_.end() ? std::string() : it->second;
}

void save_engine(const std::filesystem::path& path, const model::DetectorModel& model,
                 const text::Vocabulary& vocab, const text::FrequencyTable& freq,
                 const data::BuildConfig& build, double threshold, const nlohmann::json& extra) {
  nlohmann::json header = extra.is_object() ? extra : nlohmann::json::object();
  header["vocab"] = vocab.to_json();
  header["freq"] = freq.to_json();
  header["build_config"] = build.to_json();
  model::save_model(path, model, vocab.fingerprint(), threshold, header);
}

Engine load_engine(const std::filesystem::path& path, const Dictionary& dictionary) {
  auto loaded = model::load_model(path);
  const auto& h = loaded.header;
  for (const char* key : {"vocab", "freq", "build_config"}) {
    if (!h.contains(key)) {
      throw ServiceError("checkpoint " + path.string() + " has no '" + key + "' entry");
    }
  }
  Engine e{std::move(loaded.model),
           loaded.threshold,
           text::Vocabulary::from_json(h.at("vocab")),
           text::FrequencyTable::from_json(h.at("freq")),
           data::BuildConfig::from_json(h.at("build_config")),
           dictionary};
  if (h.value("vocab_hash", std::string()) != model::hash_hex(e.vocab.fingerprint())) {
    throw ServiceError("checkpoint " + path.string() + " vocabulary does not match its hash");
  }
  if (e.vocab.size() != e.model.config().vocab_size) {
    throw ServiceError("checkpoint " + path.string() + " vocabulary size differs from the model");
  }
  return e;
}

WindowPrediction predict_window(const Engine& engine, const data::WindowBuilder& builder,
                                std::span<const gaze::GazeSample> raw, std::size_t index) {
  data::Dataset ds;
  WindowPrediction out;
  out.window = index;
  out.status = builder.build(raw, index, nullptr, "", ds);
  if (ds.samples.empty()) return out;
  tensor::NoGradGuard no_grad;
  std::vector<std::size_t> ids(ds.samples.size());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  const auto rows = data::group_rows(ds, ids);
  const auto batch = data::make_batch(ds, rows);
  const auto probs = engine.model.forward(batch);
  const auto p = probs.values();
  for (std::size_t b = 0; b < rows.size(); ++b) {
    for (std::size_t si : rows[b].samples) {
      double best = 0.0;
      for (std::size_t slot : ds.samples[si].token_slots) {
        best = std::max(best, p[b * batch.n_tokens + slot]);
      }
      out.words.push_back({ds.samples[si].word_index, best});
    }
  }
  return out;
}

std::vector<WindowPrediction> predict_stream(const Engine& engine,
                                             const text::DocumentLayout& layout,
                                             std::span<const gaze::GazeSample> stream) {
  const data::WindowBuilder builder(layout, engine.text(), engine.build);
  std::vector<WindowPrediction> out;
  const std::size_t count = data::stream_window_count(stream);
  for (std::size_t k = 0; k < count; ++k) out.push_back(predict_window(engine, builder, stream, k));
  return out;
}

nlohmann::json Detection::to_json() const {
  return {{"type", "detection"}, {"word", word},        {"word_index", word_index},
          {"window", window},    {"p", p},              {"definition", definition}};
}

Session::Session(std::string session_id, std::shared_ptr<const Engine> engine,
                 text::DocumentLayout layout, gaze::Source source)
    : id_(std::move(session_id)),
      engine_(std::move(engine)),
      layout_(std::move(layout)),
      source_(source),
      builder_(layout_, engine_->text(), engine_->build) {}

std::vector<Detection> Session::push(const gaze::GazeSample& sample) {
  const auto arrival = Clock::now();
  if (finished_) throw ServiceError("session " + id_ + " is finished");
  if (!std::isfinite(sample.t_ms) || !std::isfinite(sample.x) || !std::isfinite(sample.y)) {
    throw ServiceError("gaze sample is not finite");
  }
  if (sample.t_ms < 0) throw ServiceError("gaze timestamp is negative");
  if (last_t_ && sample.t_ms < *last_t_) {
    throw ServiceError("gaze timestamp " + std::to_string(sample.t_ms) + " is older than " +
                       std::to_string(*last_t_));
  }
  if (last_t_) intervals_.push_back(sample.t_ms - *last_t_);
  last_t_ = sample.t_ms;
  gaze::GazeSample s = sample;
  s.source = source_;
  buffer_.push_back(s);

  std::vector<Detection> out;
  while (data::WindowBuilder::raw_span(next_window_).second <= sample.t_ms) {
    auto found = close(next_window_++);
    latencies_.push_back(ms_since(arrival));
    out.insert(out.end(), found.begin(), found.end());
    const double keep_from = data::WindowBuilder::raw_span(next_window_).first;
    const auto first_kept = std::lower_bound(
        buffer_.begin(), buffer_.end(), keep_from,
        [](const gaze::GazeSample& g, double v) { return g.t_ms < v; });
    buffer_.erase(buffer_.begin(), first_kept);
  }
  return out;
}

std::vector<Detection> Session::finish() {
  std::vector<Detection> out;
  if (finished_) return out;
  finished_ = true;
  if (!last_t_) return out;
  double median = 0.0;
  if (!intervals_.empty()) {
    auto gaps = intervals_;
    auto mid = gaps.begin() + static_cast<long>(gaps.size() / 2);
    std::nth_element(gaps.begin(), mid, gaps.end());
    median = *mid;
  }
  const std::size_t count =
      gaze::window_count(*last_t_ + median, data::WindowBuilder::kWindowMs);
  for (; next_window_ < count; ++next_window_) {
    const auto start = Clock::now();
    auto found = close(next_window_);
    latencies_.push_back(ms_since(start));
    out.insert(out.end(), found.begin(), found.end());
  }
  return out;
}

std::vector<Detection> Session::close(std::size_t index) {
  predictions_.push_back(predict_window(*engine_, builder_, buffer_, index));
  std::vector<Detection> out;
  for (const auto& w : predictions_.back().words) {
    if (w.p < engine_->threshold || emitted_.count(w.word_index) != 0) continue;
    emitted_.insert(w.word_index);
    const std::string word = text::normalize_word(layout_.words[w.word_index].text);
    out.push_back({word, w.word_index, index, w.p, engine_->dictionary.lookup(word)});
  }
  return out;
}

nlohmann::json LatencyReport::to_json() const {
  return {{"trials", trials}, {"mean_ms", mean_ms}, {"p50_ms", p50_ms},
          {"p95_ms", p95_ms}, {"max_ms", max_ms},   {"peak_rss_mb", peak_rss_mb}};
}

LatencyReport measure_latency(const model::DetectorModel& model, const data::Dataset& rows,
                              std::size_t trials, std::size_t warmup) {
  if (rows.samples.empty()) throw ServiceError("latency needs at least one window");
  if (trials == 0) throw ServiceError("latency needs at least one trial");
  tensor::NoGradGuard no_grad;
  std::vector<std::size_t> ids(rows.samples.size());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  const auto refs = data::group_rows(rows, ids);
  std::vector<double> times;
  times.reserve(trials);
  for (std::size_t i = 0; i < warmup + trials; ++i) {
    const std::span<const data::RowRef> one(&refs[i % refs.size()], 1);
    const auto start = Clock::now();
    const auto batch = data::make_batch(rows, one);
    const auto p = model.forward(batch);
    const double ms = ms_since(start);
    if (p.values().empty()) throw ServiceError("empty model output");
    if (i >= warmup) times.push_back(ms);
  }
  LatencyReport r;
  r.trials = trials;
  r.mean_ms = std::accumulate(times.begin(), times.end(), 0.0) / double(times.size());
  r.p50_ms = percentile(times, 0.5);
  r.p95_ms = percentile(times, 0.95);
  r.max_ms = *std::max_element(times.begin(), times.end());
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  r.peak_rss_mb = double(usage.ru_maxrss) / 1024.0;
  return r;
}

}  // namespace gazelex::service
