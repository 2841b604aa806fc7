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
#include <vector>

#include "json.hpp"

#include "gazelex/gaze/types.hpp"

namespace gazelex::text {

using gaze::BoundingBox;

struct TokenSpan {
  std::int64_t token_id = 0;
  std::string text;
  BoundingBox box;
};

struct LayoutWord {
  std::string text;
  BoundingBox box;
  int line_index = 0;
  std::vector<TokenSpan> tokens;  // filled by tokenize_layout()
  bool is_function_word = false;
};

/// A rendered page: words in reading order with pixel boxes.
struct DocumentLayout {
  std::string doc_id;
  std::vector<LayoutWord> words;
  double line_height = 20.63;
  std::vector<BoundingBox> columns;

  /// True when word `i` starts a sentence (first word, or the previous word
  /// ends in . ! or ?).
  bool sentence_initial(std::size_t i) const;
};

/// Lowercased alphanumeric core of a word ("Fox." -> "fox").
std::string normalize_word(std::string_view text);

/// Membership in the bundled list of English function words (articles,
/// conjunctions, prepositions, pronouns, auxiliaries). Case-insensitive.
bool is_function_word(std::string_view text);
const std::vector<std::string>& function_words();

struct PageGeometry {
  double left = 40.0;
  double top = 40.0;
  /// Width of one column.
  double width = 800.0;
  std::size_t columns = 1;
  double column_gap = 40.0;
  double char_width = 9.0;
  double space_width = 9.0;
  double line_height = 20.63;
  /// Share of the line height covered by a word box.
  double box_fill = 0.8;
};

/// Greedy line wrapping of `words`; lines fill the columns left to right,
/// the first columns taking the extra line when the count does not divide.
DocumentLayout render_layout(std::string doc_id, std::span<const std::string> words,
                             const PageGeometry& geometry = {});

/// Indices of non-function words whose box intersects `roi`, in reading order.
std::vector<std::size_t> candidate_words(const DocumentLayout& layout, const BoundingBox& roi);

// Layout file: {"doc_id", "line_height", "words": [{"text", "box": [x0, y0,
// x1, y1], "line"}], "columns": [[x0, y0, x1, y1], ...]} ("columns" optional).
nlohmann::json to_json(const DocumentLayout& layout);
DocumentLayout layout_from_json(const nlohmann::json& j);
DocumentLayout read_layout(const std::filesystem::path& path);
void write_layout(const std::filesystem::path& path, const DocumentLayout& layout);

}  // namespace gazelex::text
