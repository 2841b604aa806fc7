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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "gazelex/data/dataset.hpp"
#include "gazelex/model/detector.hpp"
#include "gazelex/text/knowledge.hpp"
#include "gazelex/text/vocabulary.hpp"

namespace gazelex::service {

class ServiceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Local word -> definition table standing in for a definition generator.
class Dictionary {
 public:
  Dictionary() = default;
  explicit Dictionary(std::unordered_map<std::string, std::string> entries);

  /// JSON object {word: definition}. Throws ServiceError on a bad file.
  static Dictionary load(const std::filesystem::path& path);

  /// Definition of the normalized word, or "" when absent.
  std::string lookup(std::string_view word) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, std::string> entries_;
};

/// A trained detector with everything needed to featurize raw input.
struct Engine {
  model::DetectorModel model;
  double threshold = 0.5;
  text::Vocabulary vocab;
  text::FrequencyTable freq;
  data::BuildConfig build;
  Dictionary dictionary;

  data::TextResources text() const { return {vocab, freq}; }
};

/// Writes the checkpoint with vocabulary, frequency table and build config
/// in its header.
void save_engine(const std::filesystem::path& path, const model::DetectorModel& model,
                 const text::Vocabulary& vocab, const text::FrequencyTable& freq,
                 const data::BuildConfig& build, double threshold,
                 const nlohmann::json& extra = {});

/// Throws ServiceError when the header lacks the text resources or the
/// vocabulary does not match the checkpoint's fingerprint.
Engine load_engine(const std::filesystem::path& path, const Dictionary& dictionary = {});

struct WordScore {
  std::size_t word_index = 0;
  double p = 0.0;
  bool operator==(const WordScore&) const = default;
};

struct WindowPrediction {
  std::size_t window = 0;
  gaze::WindowStatus status = gaze::WindowStatus::kAccepted;
  /// Candidate words in order with their max token probability.
  std::vector<WordScore> words;
  bool operator==(const WindowPrediction&) const = default;
};

/// Runs one window through the pipeline and the model, one batch holding the
/// window's rows.
WindowPrediction predict_window(const Engine& engine, const data::WindowBuilder& builder,
                                std::span<const gaze::GazeSample> raw, std::size_t index);

/// Offline pass over a whole recording.
std::vector<WindowPrediction> predict_stream(const Engine& engine,
                                             const text::DocumentLayout& layout,
                                             std::span<const gaze::GazeSample> stream);

struct Detection {
  std::string word;
  std::size_t word_index = 0;
  std::size_t window = 0;
  double p = 0.0;
  std::string definition;

  nlohmann::json to_json() const;
};

/// Live detection over one document. Samples arrive in time order (ms from
/// session start); window k closes when the first sample past its raw span
/// arrives, and at finish(). Only the samples later windows still need are
/// kept. Each word is reported at most once.
class Session {
 public:
  Session(std::string session_id, std::shared_ptr<const Engine> engine,
          text::DocumentLayout layout, gaze::Source source = gaze::Source::kTracker);
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::string& id() const { return id_; }
  const text::DocumentLayout& layout() const { return layout_; }

  /// Throws ServiceError for a non-finite sample or one older than the last.
  std::vector<Detection> push(const gaze::GazeSample& sample);

  /// Closes the remaining windows the recording covers.
  std::vector<Detection> finish();

  const std::vector<WindowPrediction>& predictions() const { return predictions_; }
  /// Per closed window: milliseconds from the closing sample's arrival to the
  /// detections being ready.
  const std::vector<double>& latencies_ms() const { return latencies_; }
  const std::set<std::size_t>& emitted() const { return emitted_; }
  std::size_t buffered() const { return buffer_.size(); }

 private:
  std::vector<Detection> close(std::size_t index);

  std::string id_;
  std::shared_ptr<const Engine> engine_;
  text::DocumentLayout layout_;
  gaze::Source source_;
  data::WindowBuilder builder_;
  std::vector<gaze::GazeSample> buffer_;
  std::vector<double> intervals_;
  std::optional<double> last_t_;
  std::size_t next_window_ = 0;
  bool finished_ = false;
  std::set<std::size_t> emitted_;
  std::vector<WindowPrediction> predictions_;
  std::vector<double> latencies_;
};

struct LatencyReport {
  std::size_t trials = 0;
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double max_ms = 0.0;
  double peak_rss_mb = 0.0;

  nlohmann::json to_json() const;
};

/// Batch-1 forward latency over the given rows, cycling through them;
/// `warmup` runs are excluded.
LatencyReport measure_latency(const model::DetectorModel& model, const data::Dataset& rows,
                              std::size_t trials, std::size_t warmup = 5);

}  // namespace gazelex::service
