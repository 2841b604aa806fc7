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
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "gazelex/gaze/types.hpp"
#include "gazelex/text/knowledge.hpp"
#include "gazelex/text/layout.hpp"

namespace gazelex::synth {

using gaze::GazeStream;
using gaze::Source;
using text::DocumentLayout;

/// Deterministic sub-seed for a named task.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);

/// Synthetic words ordered by frequency rank (rank 1 = most frequent).
/// Function words occupy most of the top ranks; rarer content words are
/// longer and built from rarer syllables.
struct Lexicon {
  std::vector<std::string> words;
  std::vector<double> probability;
  std::unordered_map<std::string, std::size_t> rank_of;  // 1-based

  /// Rank of a word by its normalized form; 0 when absent.
  std::size_t rank(std::string_view word) const;
};

struct CorpusConfig {
  std::uint64_t seed = 7;
  std::size_t n_docs = 20;
  std::size_t words_per_doc = 363;
  std::size_t lexicon_size = 6000;
  double zipf_exponent = 1.0;
  text::PageGeometry geometry = two_column_geometry();

  static text::PageGeometry two_column_geometry();
  nlohmann::json to_json() const;
};

struct Corpus {
  Lexicon lexicon;
  std::vector<DocumentLayout> docs;
  text::FrequencyTable frequency;
};

/// Throws std::invalid_argument when words_per_doc < 50.
Corpus gen_corpus(const CorpusConfig& config);
Lexicon gen_lexicon(std::uint64_t seed, std::size_t size, double zipf_exponent);

struct UserProfile {
  std::string user_id;
  /// Frequency rank above which a content word is unknown.
  double proficiency = 1500;
  double label_noise = 0.03;
  double dwell_gain = 3.0;
  /// Probability of a brief return to an unknown word.
  double regression_prob = 0.3;

  void validate() const;
  nlohmann::json to_json() const;
};

/// Per-word unknown flags for one (user, document). Function words are
/// always known.
std::vector<bool> assign_labels(const UserProfile& profile, const DocumentLayout& layout,
                                const Lexicon& lexicon, std::uint64_t seed);

struct NoiseModel {
  Source kind = Source::kTracker;
  double rate_hz = 60.0;
  /// Webcam streams draw their rate uniformly from [rate_hz, rate_hz_max].
  double rate_hz_max = 60.0;
  double jitter_x = 8.0;
  double jitter_y = 4.0;
  /// Slowly varying offset: Ornstein-Uhlenbeck process per axis.
  double offset_x = 10.0;
  double offset_y = 3.0;
  double offset_tau_s = 20.0;
  /// Linear drift in a per-stream random direction.
  double drift_px_per_min = 4.0;
  double dropout = 0.01;
  /// Blink artefacts per second; each displaces y for ~100 ms.
  double blink_rate_hz = 0.1;

  static NoiseModel tracker();
  static NoiseModel webcam();
  nlohmann::json to_json() const;
};

/// One fixation of the planned reading path, in page pixels.
struct Fixation {
  double start_ms = 0.0;
  double end_ms = 0.0;
  double x = 0.0;
  double y = 0.0;
  std::size_t word_index = 0;
};

struct Scanpath {
  std::vector<Fixation> fixations;
  double duration_ms = 0.0;

  /// Noise-free gaze position at time t: fixation points joined by linear
  /// saccades.
  std::pair<double, double> position(double t_ms) const;
};

struct ReadingConfig {
  double words_per_second = 2.5;
  double saccade_ms = 30.0;
  double return_sweep_ms = 60.0;
  double regression_ms = 220.0;
  double duration_spread = 0.25;  // lognormal sigma of fixation durations
};

/// Left-to-right, line-by-line reading. Throws on an empty layout.
Scanpath plan_scanpath(const DocumentLayout& layout, const std::vector<bool>& labels,
                       const UserProfile& profile, std::uint64_t seed,
                       const ReadingConfig& reading = {});

/// Samples a scanpath through a noise model.
GazeStream render_gaze(const Scanpath& path, const NoiseModel& noise, std::uint64_t seed);

GazeStream simulate_gaze(const DocumentLayout& layout, const std::vector<bool>& labels,
                         const UserProfile& profile, const NoiseModel& noise, std::uint64_t seed);

struct SynthConfig {
  CorpusConfig corpus;
  std::size_t n_users = 8;
  /// Users and documents are split into this many reading groups; the
  /// users of one group read the same documents.
  std::size_t n_groups = 2;
  double proficiency_min = 5000;
  double proficiency_max = 5950;
  double label_noise = 0.03;
  double dwell_gain = 3.0;
  double regression_prob = 0.3;
  NoiseModel tracker = NoiseModel::tracker();
  NoiseModel webcam = NoiseModel::webcam();
  bool emit_webcam = true;

  std::uint64_t seed() const { return corpus.seed; }
  nlohmann::json to_json() const;
};

std::vector<UserProfile> make_users(const SynthConfig& config);

/// Documents read by a user (group assignment).
std::vector<std::size_t> docs_for_user(const SynthConfig& config, std::size_t user_index);

/// Writes layouts/, labels.jsonl, gaze/<kind>/<user>_<doc>.jsonl, lexicon.json
/// and manifest.json under `out_dir`. Returns the manifest.
nlohmann::json export_dataset(const SynthConfig& config, const std::filesystem::path& out_dir);

/// FNV-1a 64 of a file's bytes.
std::uint64_t file_hash(const std::filesystem::path& path);

}  // namespace gazelex::synth
