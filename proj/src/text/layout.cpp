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

#include "gazelex/text/layout.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

namespace gazelex::text {

const std::vector<std::string>& function_words() {
  static const std::vector<std::string> kWords = {
      // articles and determiners
      "a", "an", "the", "this", "that", "these", "those", "each", "every", "either", "neither",
      "some", "any", "no", "all", "both", "few", "many", "much", "more", "most", "several",
      "such", "other", "another", "what", "which", "whose", "whatever", "whichever",
      // conjunctions
      "and", "or", "but", "nor", "so", "yet", "for", "because", "although", "though", "while",
      "whereas", "if", "unless", "until", "since", "when", "whenever", "where", "wherever",
      "whether", "than", "as", "once", "lest", "then",
      // prepositions
      "of", "in", "on", "at", "by", "with", "from", "to", "into", "onto", "upon", "about",
      "above", "across", "after", "against", "along", "amid", "among", "around", "before",
      "behind", "below", "beneath", "beside", "besides", "between", "beyond", "despite", "down",
      "during", "except", "inside", "near", "off", "out", "outside", "over", "past", "per",
      "through", "throughout", "toward", "towards", "under", "underneath", "unlike", "up",
      "via", "within", "without", "like",
      // pronouns
      "i", "me", "my", "mine", "myself", "you", "your", "yours", "yourself", "yourselves", "he",
      "him", "his", "himself", "she", "her", "hers", "herself", "it", "its", "itself", "we",
      "us", "our", "ours", "ourselves", "they", "them", "their", "theirs", "themselves", "who",
      "whom", "whoever", "one", "ones", "someone", "anyone", "everyone", "something", "anything",
      "everything", "nothing", "there", "here",
      // auxiliaries and modals
      "be", "am", "is", "are", "was", "were", "been", "being", "have", "has", "had", "having",
      "do", "does", "did", "will", "would", "shall", "should", "can", "could", "may", "might",
      "must", "ought",
      // particles and common adverbs of degree
      "not", "also", "very", "too", "just", "only", "even", "still", "how", "why",
  };
  return kWords;
}

bool is_function_word(std::string_view text) {
  static const std::unordered_set<std::string> kSet(function_words().begin(),
                                                    function_words().end());
  return kSet.contains(normalize_word(text));
}

std::string normalize_word(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) out.push_back(static_cast<char>(std::tolower(u)));
  }
  return out;
}

bool DocumentLayout::sentence_initial(std::size_t i) const {
  if (i == 0) return true;
  const auto& prev = words.at(i - 1).text;
  if (prev.empty()) return false;
  const char last = prev.back();
  return last == '.' || last == '!' || last == '?';
}

std::vector<std::size_t> candidate_words(const DocumentLayout& layout, const BoundingBox& roi) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < layout.words.size(); ++i) {
    const auto& w = layout.words[i];
    if (!w.is_function_word && w.box.intersects(roi)) out.push_back(i);
  }
  return out;
}

DocumentLayout render_layout(std::string doc_id, std::span<const std::string> words,
                             const PageGeometry& g) {
  if (g.columns == 0) throw std::invalid_argument("render_layout: zero columns");
  DocumentLayout layout;
  layout.doc_id = std::move(doc_id);
  layout.line_height = g.line_height;
  // First pass: wrap into lines with x offsets relative to the column.
  std::vector<std::pair<int, double>> placed;
  double x = 0.0;
  int line = 0;
  for (const auto& text : words) {
    const double w = g.char_width * double(std::max<std::size_t>(1, text.size()));
    if (x > 0.0 && x + w > g.width) {
      x = 0.0;
      ++line;
    }
    placed.emplace_back(line, x);
    x += w + g.space_width;
  }
  const int n_lines = words.empty() ? 0 : line + 1;
  const int per_col = (n_lines + int(g.columns) - 1) / std::max(1, int(g.columns));
  const double box_h = g.line_height * g.box_fill;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto [ln, rel_x] = placed[i];
    const int col = per_col == 0 ? 0 : ln / per_col;
    const int row = per_col == 0 ? 0 : ln % per_col;
    const double x0 = g.left + double(col) * (g.width + g.column_gap) + rel_x;
    const double y0 = g.top + g.line_height * row + (g.line_height - box_h) / 2;
    LayoutWord word;
    word.text = words[i];
    word.box = BoundingBox{x0, y0, x0 + g.char_width * double(std::max<std::size_t>(1, words[i].size())),
                           y0 + box_h};
    word.line_index = ln;
    word.is_function_word = is_function_word(words[i]);
    layout.words.push_back(std::move(word));
  }
  const std::size_t used = std::max<std::size_t>(
      1, std::min<std::size_t>(g.columns, per_col == 0 ? 1 : std::size_t((n_lines + per_col - 1) / per_col)));
  for (std::size_t c = 0; c < used; ++c) {
    const double cx = g.left + double(c) * (g.width + g.column_gap);
    layout.columns.push_back(
        BoundingBox{cx, g.top, cx + g.width, g.top + g.line_height * std::max(1, per_col)});
  }
  return layout;
}

namespace {

nlohmann::json box_json(const BoundingBox& b) { return {b.x_min, b.y_min, b.x_max, b.y_max}; }

BoundingBox box_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) throw std::invalid_argument("box must be [x0, y0, x1, y1]");
  return BoundingBox::checked(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
                              j[3].get<double>());
}

}  // namespace

nlohmann::json to_json(const DocumentLayout& layout) {
  nlohmann::json words = nlohmann::json::array();
  for (const auto& w : layout.words) {
    words.push_back({{"text", w.text}, {"box", box_json(w.box)}, {"line", w.line_index}});
  }
  nlohmann::json columns = nlohmann::json::array();
  for (const auto& c : layout.columns) columns.push_back(box_json(c));
  return {{"doc_id", layout.doc_id},
          {"line_height", layout.line_height},
          {"words", words},
          {"columns", columns}};
}

DocumentLayout layout_from_json(const nlohmann::json& j) {
  DocumentLayout layout;
  layout.doc_id = j.at("doc_id").get<std::string>();
  layout.line_height = j.at("line_height").get<double>();
  if (!(layout.line_height > 0)) throw std::invalid_argument("line_height must be positive");
  for (const auto& w : j.at("words")) {
    LayoutWord word;
    word.text = w.at("text").get<std::string>();
    word.box = box_from(w.at("box"));
    word.line_index = w.value("line", 0);
    word.is_function_word = is_function_word(word.text);
    layout.words.push_back(std::move(word));
  }
  if (j.contains("columns")) {
    for (const auto& c : j.at("columns")) layout.columns.push_back(box_from(c));
  }
  return layout;
}

DocumentLayout read_layout(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open layout " + path.string());
  return layout_from_json(nlohmann::json::parse(in));
}

void write_layout(const std::filesystem::path& path, const DocumentLayout& layout) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write layout " + path.string());
  out << to_json(layout).dump() << '\n';
}

}  // namespace gazelex::text
