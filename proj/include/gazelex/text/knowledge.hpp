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
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>

#include "json.hpp"

#include "gazelex/text/layout.hpp"

namespace gazelex::text {

// Universal tag set.
enum class Pos : int {
  kNoun, kVerb, kAdj, kAdv, kPron, kDet, kAdp, kNum, kConj, kPrt, kPunct, kOther
};
inline constexpr int kPosCount = 12;

enum class Ner : int { kNone, kPerson, kPlace, kOrg, kOther };
inline constexpr int kNerCount = 5;
inline constexpr int kTfBins = 16;

const char* to_string(Pos p);
const char* to_string(Ner n);

/// Word counts (normalized forms) over a training corpus.
class FrequencyTable {
 public:
  FrequencyTable() = default;
  static FrequencyTable from_corpus(std::span<const DocumentLayout> corpus);

  void add(std::string_view word, std::uint64_t n = 1);
  std::uint64_t count(std::string_view word) const;
  std::uint64_t max_count() const { return max_; }
  std::size_t distinct() const { return counts_.size(); }

  /// 0 for an unseen word, else max(1, floor(15 * log(c+1) / log(max+1))).
  int tf_bin(std::uint64_t c) const;

  nlohmann::json to_json() const;
  static FrequencyTable from_json(const nlohmann::json& j);

 private:
  std::unordered_map<std::string, std::uint64_t> counts_;
  std::uint64_t max_ = 0;
};

struct KnowledgeVector {
  double log_term_frequency = 0.0;
  int tf_bin = 0;
  Pos pos = Pos::kNoun;
  Ner ner = Ner::kNone;
};

/// Lexicon lookup with suffix-rule fallback.
Pos tag_pos(std::string_view text);

/// Gazetteer first, then capitalization away from the sentence start.
Ner tag_ner(std::string_view text, bool sentence_initial);

KnowledgeVector knowledge_features(std::string_view text, bool sentence_initial,
                                   const FrequencyTable& freq);
KnowledgeVector knowledge_features(const DocumentLayout& layout, std::size_t word_index,
                                   const FrequencyTable& freq);

}  // namespace gazelex::text
