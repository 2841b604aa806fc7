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
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "gazelex/text/layout.hpp"

namespace gazelex::text {

struct VocabularyConfig {
  std::size_t max_size = 4096;
  /// Whole words need at least this many corpus occurrences.
  std::size_t min_count = 1;
  /// Upper share of the budget kept for sub-word units when whole words
  /// would otherwise fill it.
  double subword_share = 0.25;
};

/// Whole-word units plus "##"-prefixed character-bigram (and trailing single
/// character) fallback units. Ids 0 and 1 are <pad> and <unk>.
class Vocabulary {
 public:
  static constexpr std::int64_t kPad = 0;
  static constexpr std::int64_t kUnk = 1;
  static constexpr int kFormatVersion = 1;

  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> units);

  std::size_t size() const { return units_.size(); }
  const std::vector<std::string>& units() const { return units_; }
  const std::string& unit(std::int64_t id) const { return units_.at(static_cast<std::size_t>(id)); }

  /// Id of a whole word (normalized form), or -1.
  std::int64_t word_id(std::string_view normalized) const;
  /// Id of a sub-word piece (lowercased raw characters), or kUnk.
  std::int64_t piece_id(std::string_view piece) const;

  /// FNV-1a 64 over the serialized unit list.
  std::uint64_t fingerprint() const;

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

 private:
  std::vector<std::string> units_;
  std::unordered_map<std::string, std::int64_t> index_;
};

/// Deterministic: ties in frequency break lexicographically. Throws
/// std::invalid_argument for an empty corpus or max_size < 16.
Vocabulary build_vocabulary(std::span<const DocumentLayout> corpus,
                            const VocabularyConfig& config = {});

/// One token for an in-vocabulary word, else two-character pieces left to
/// right (last piece single when the length is odd). Token boxes split the
/// word box in proportion to character counts. Throws on an empty word.
std::vector<TokenSpan> tokenize(const LayoutWord& word, const Vocabulary& vocab);

/// Fills `tokens` for every word.
void tokenize_layout(DocumentLayout& layout, const Vocabulary& vocab);

}  // namespace gazelex::text
