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

#include "gazelex/text/vocabulary.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <stdexcept>

namespace gazelex::text {
namespace {

constexpr std::string_view kPiecePrefix = "##";

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Left-to-right two-character chunks of `text`; the last chunk is a single
// character when the length is odd.
std::vector<std::pair<std::size_t, std::size_t>> chunks(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < n; i += 2) out.emplace_back(i, std::min<std::size_t>(2, n - i));
  return out;
}

std::vector<std::pair<std::string, std::size_t>> ranked(const std::map<std::string, std::size_t>& m,
                                                        std::size_t min_count) {
  std::vector<std::pair<std::string, std::size_t>> v;
  for (const auto& [k, c] : m) {
    if (c >= min_count) v.emplace_back(k, c);
  }
  std::stable_sort(v.begin(), v.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return v;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> units) : units_(std::move(units)) {
  if (units_.size() < 2 || units_[0] != "<pad>" || units_[1] != "<unk>") {
    throw std::invalid_argument("vocabulary must start with <pad>, <unk>");
  }
  for (std::size_t i = 0; i < units_.size(); ++i) {
    if (!index_.emplace(units_[i], static_cast<std::int64_t>(i)).second) {
      throw std::invalid_argument("duplicate vocabulary unit '" + units_[i] + "'");
    }
  }
}

std::int64_t Vocabulary::word_id(std::string_view normalized) const {
  if (normalized.empty() || normalized.starts_with(kPiecePrefix) || normalized.front() == '<') {
    return -1;
  }
  auto it = index_.find(std::string(normalized));
  return it == index_.end() ? -1 : it->second;
}

std::int64_t Vocabulary::piece_id(std::string_view piece) const {
  auto it = index_.find(std::string(kPiecePrefix) + lower(piece));
  return it == index_.end() ? kUnk : it->second;
}

std::uint64_t Vocabulary::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& u : units_) {
    for (unsigned char c : u) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  }
  return h;
}

nlohmann::json Vocabulary::to_json() const {
  return {{"version", kFormatVersion}, {"units", units_}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  const int version = j.at("version").get<int>();
  if (version != kFormatVersion) {
    throw std::runtime_error("unsupported vocabulary version " + std::to_string(version));
  }
  return Vocabulary(j.at("units").get<std::vector<std::string>>());
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write vocabulary " + path.string());
  out << to_json().dump() << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary " + path.string());
  return from_json(nlohmann::json::parse(in));
}

Vocabulary build_vocabulary(std::span<const DocumentLayout> corpus,
                            const VocabularyConfig& config) {
  if (config.max_size < 16) throw std::invalid_argument("vocabulary max_size must be >= 16");
  std::map<std::string, std::size_t> words;
  std::map<std::string, std::size_t> pieces;
  std::size_t n_words = 0;
  for (const auto& doc : corpus) {
    for (const auto& w : doc.words) {
      if (w.text.empty()) continue;
      ++n_words;
      const auto norm = normalize_word(w.text);
      if (!norm.empty()) ++words[norm];
      const auto low = lower(w.text);
      for (auto [b, n] : chunks(low.size())) ++pieces[low.substr(b, n)];
    }
  }
  if (n_words == 0) throw std::invalid_argument("vocabulary corpus is empty");

  const auto rw = ranked(words, config.min_count);
  const auto rp = ranked(pieces, 1);
  const std::size_t budget = config.max_size - 2;
  const std::size_t piece_cap =
      std::min(rp.size(), static_cast<std::size_t>(config.subword_share * double(budget)));
  const std::size_t n_w = std::min(rw.size(), budget - piece_cap);
  const std::size_t n_p = std::min(rp.size(), budget - n_w);

  std::vector<std::string> units = {"<pad>", "<unk>"};
  for (std::size_t i = 0; i < n_w; ++i) units.push_back(rw[i].first);
  for (std::size_t i = 0; i < n_p; ++i) units.push_back(std::string(kPiecePrefix) + rp[i].first);
  return Vocabulary(std::move(units));
}

std::vector<TokenSpan> tokenize(const LayoutWord& word, const Vocabulary& vocab) {
  if (word.text.empty()) throw std::invalid_argument("cannot tokenize an empty word");
  const auto id = vocab.word_id(normalize_word(word.text));
  if (id >= 0) return {TokenSpan{id, word.text, word.box}};

  const std::size_t n = word.text.size();
  const double w = word.box.width();
  std::vector<TokenSpan> out;
  for (auto [b, len] : chunks(n)) {
    TokenSpan t;
    t.text = word.text.substr(b, len);
    t.token_id = vocab.piece_id(t.text);
    t.box = word.box;
    t.box.x_min = word.box.x_min + w * double(b) / double(n);
    t.box.x_max = b + len == n ? word.box.x_max : word.box.x_min + w * double(b + len) / double(n);
    out.push_back(std::move(t));
  }
  return out;
}

void tokenize_layout(DocumentLayout& layout, const Vocabulary& vocab) {
  for (auto& w : layout.words) w.tokens = tokenize(w, vocab);
}

}  // namespace gazelex::text
