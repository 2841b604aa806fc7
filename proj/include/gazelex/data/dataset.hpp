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

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "gazelex/gaze/types.hpp"
#include "gazelex/model/detector.hpp"
#include "gazelex/text/knowledge.hpp"
#include "gazelex/text/layout.hpp"
#include "gazelex/text/vocabulary.hpp"

namespace gazelex::data {

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-word labels of one (user, doc) session; nullopt marks a missing label.
using WordLabels = std::vector<std::optional<bool>>;

struct TokenRecord {
  std::size_t word_index = 0;
  std::int64_t token_id = 0;
  /// w_x, w_y (screen units), d / diagonal, t / n_g over the extended span.
  std::array<double, 4> feats{};
  std::int64_t tf_bin = 0;
  std::int64_t pos = 0;
  std::int64_t ner = 0;
  double log_tf = 0.0;
};

/// One model row: the gaze of an accepted window and a contiguous span of
/// document tokens around its candidate words.
struct WindowRecord {
  std::string user_id;
  std::string doc_id;
  gaze::Source source = gaze::Source::kTracker;
  std::size_t window_index = 0;
  /// Sub-row ordinal when a window's candidates do not fit one row.
  std::size_t part = 0;
  /// Smoothed x, smoothed y, raw x, raw y in screen units.
  std::vector<std::array<double, 4>> gaze;
  /// Sample times in 60 Hz periods from the start of the extended span.
  std::vector<double> gaze_time;
  std::vector<TokenRecord> tokens;
};

/// One candidate word of one accepted window.
struct LabeledSample {
  std::size_t record = 0;
  std::size_t word_index = 0;
  bool unknown = false;
  /// Word-level gaze features over the extended span.
  double distance = 0.0;
  double duration = 0.0;
  std::size_t n_g = 0;
  double log_tf = 0.0;
  int pos = 0;
  int ner = 0;
  /// Positions of the word's tokens inside the record.
  std::vector<std::size_t> token_slots;
};

struct WindowStats {
  std::size_t accepted = 0;
  std::size_t rejected_unstable = 0;
  std::size_t rejected_empty = 0;
  std::size_t without_candidates = 0;
};

struct Dataset {
  std::vector<WindowRecord> windows;
  std::vector<LabeledSample> samples;
  WindowStats stats;

  /// Appends another dataset, reindexing its records.
  void append(Dataset other);
  const WindowRecord& record_of(const LabeledSample& s) const { return windows.at(s.record); }
};

struct BuildConfig {
  std::size_t max_tokens = 64;
  std::size_t max_gaze_len = 180;
  /// Context words kept on each side of the candidates.
  std::size_t context_words = 8;
  std::size_t smoothing = 5;
  double screen_width = 1280.0;
  double screen_height = 800.0;

  nlohmann::json to_json() const;
  /// Missing keys keep their defaults.
  static BuildConfig from_json(const nlohmann::json& j);
};

struct TextResources {
  const text::Vocabulary& vocab;
  const text::FrequencyTable& freq;
};

/// Builds model rows for single windows of one document. Each window is cut
/// from its own raw slice, the extended span plus kMarginMs on both sides,
/// so a live session holding only recent samples produces the same rows as a
/// pass over the whole recording.
class WindowBuilder {
 public:
  static constexpr double kWindowMs = 1000.0;
  static constexpr double kMarginMs = 500.0;

  WindowBuilder(const text::DocumentLayout& layout, const TextResources& text,
                BuildConfig config = {});

  const text::DocumentLayout& layout() const { return layout_; }
  const BuildConfig& config() const { return config_; }

  /// Raw time range [first, second) window `index` reads.
  static std::pair<double, double> raw_span(std::size_t index);

  /// Appends the rows and samples of window `index` to `out` and updates its
  /// stats. `raw` must be sorted and cover raw_span(index). Webcam slices are
  /// smoothed and resampled before cutting. Without labels every sample is
  /// marked known; with labels a candidate lacking one throws DatasetError
  /// naming the word.
  gaze::WindowStatus build(std::span<const gaze::GazeSample> raw, std::size_t index,
                           const WordLabels* labels, const std::string& user_id,
                           Dataset& out) const;

 private:
  struct WordInfo {
    std::vector<text::TokenSpan> tokens;
    text::KnowledgeVector knowledge;
  };

  const text::DocumentLayout& layout_;
  BuildConfig config_;
  std::vector<WordInfo> words_;
  std::vector<std::size_t> prefix_;
};

/// Number of windows a recording yields.
std::size_t stream_window_count(std::span<const gaze::GazeSample> stream);

/// Runs WindowBuilder over every window of the stream and emits one sample
/// per candidate word. Throws DatasetError naming the word when a candidate
/// has no label.
Dataset build_samples(std::span<const gaze::GazeSample> stream, const text::DocumentLayout& layout,
                      const WordLabels& labels, const TextResources& text,
                      const std::string& user_id, const BuildConfig& config = {});

enum class SplitMode { kMixed, kCrossUser, kCrossDocument };

const char* to_string(SplitMode mode);
SplitMode split_mode_from_string(std::string_view name);

struct SplitSpec {
  SplitMode mode = SplitMode::kMixed;
  double train_ratio = 0.8;
  double dev_ratio = 0.1;
  /// Held-out user or document ids for the cross modes.
  std::vector<std::string> dev_ids;
  std::vector<std::string> test_ids;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> dev;
  std::vector<std::size_t> test;
  SplitSpec spec;

  nlohmann::json manifest() const;
};

/// Mixed: ratio split. Cross modes: the distinct user or document ids are
/// shuffled with `seed`; the first ceil(10%) go to test, the next ceil(10%)
/// to dev.
SplitSpec default_split_spec(const Dataset& dataset, SplitMode mode, std::uint64_t seed);

/// Sample-index partition. Throws DatasetError when a part is empty.
Split split(const Dataset& dataset, const SplitSpec& spec);

struct Imbalance {
  std::size_t negative_tokens = 0;
  std::size_t positive_tokens = 0;
  /// negative / positive; infinity without positives.
  double ratio = 0.0;
};

/// Token-level negative:positive ratio over the given samples (all when
/// `ids` is empty). Logs a warning when there are no positives.
Imbalance class_imbalance(const Dataset& dataset, std::span<const std::size_t> ids = {});

/// A model row together with the samples whose tokens carry loss.
struct RowRef {
  std::size_t record = 0;
  std::vector<std::size_t> samples;
};

/// Groups samples by record, in record order.
std::vector<RowRef> group_rows(const Dataset& dataset, std::span<const std::size_t> ids);

/// Pads rows into a model batch; loss_mask and labels cover the tokens of the
/// listed samples only.
model::WindowBatch make_batch(const Dataset& dataset, std::span<const RowRef> rows);

/// windows.jsonl, samples.jsonl and manifest.json under `dir`.
void write_dataset(const std::filesystem::path& dir, const Dataset& dataset,
                   const nlohmann::json& manifest_extra = {});
Dataset read_dataset(const std::filesystem::path& dir);

/// Synthetic export as loaded from disk.
struct Session {
  std::string user_id;
  std::string doc_id;
  WordLabels labels;
  gaze::GazeStream tracker;
  gaze::GazeStream webcam;
};

struct SourceData {
  std::vector<text::DocumentLayout> docs;
  std::vector<Session> sessions;
  std::vector<std::string> users;

  const text::DocumentLayout& doc(const std::string& doc_id) const;
};

SourceData load_export(const std::filesystem::path& dir);

/// Builds samples for every session of one source kind.
Dataset build_dataset(const SourceData& source, gaze::Source kind, const TextResources& text,
                      const BuildConfig& config = {});

}  // namespace gazelex::data
