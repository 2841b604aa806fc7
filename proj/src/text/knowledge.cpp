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

#include "gazelex/text/knowledge.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_map>

namespace gazelex::text {
namespace {

const std::unordered_map<std::string, Pos>& pos_lexicon() {
  static const std::unordered_map<std::string, Pos> kLex = [] {
    std::unordered_map<std::string, Pos> m;
    auto put = [&m](Pos p, std::initializer_list<const char*> ws) {
      for (const char* w : ws) m.emplace(w, p);
    };
    put(Pos::kDet, {"a", "an", "the", "this", "that", "these", "those", "each", "every", "either",
                    "neither", "some", "any", "no", "all", "both", "few", "many", "much", "several",
                    "such", "another", "what", "which", "whose", "whatever", "whichever"});
    put(Pos::kConj, {"and", "or", "but", "nor", "yet", "because", "although", "though", "while",
                     "whereas", "if", "unless", "whether", "than", "lest"});
    put(Pos::kAdp, {"of", "in", "on", "at", "by", "with", "from", "into", "onto", "upon",
                    "about", "above", "across", "after", "against", "along", "amid", "among",
                    "around", "before", "behind", "below", "beneath", "beside", "besides",
                    "between", "beyond", "despite", "during", "except", "inside", "near",
                    "outside", "over", "past", "per", "through", "throughout", "toward",
                    "towards", "under", "underneath", "unlike", "via", "within", "without",
                    "like", "for", "as", "since", "until"});
    put(Pos::kPron, {"i", "me", "my", "mine", "myself", "you", "your", "yours", "yourself",
                     "yourselves", "he", "him", "his", "himself", "she", "her", "hers",
                     "herself", "it", "its", "itself", "we", "us", "our", "ours", "ourselves",
                     "they", "them", "their", "theirs", "themselves", "who", "whom", "whoever",
                     "someone", "anyone", "everyone", "something", "anything", "everything",
                     "nothing"});
    put(Pos::kVerb, {"be", "am", "is", "are", "was", "were", "been", "being", "have", "has",
                     "had", "having", "do", "does", "did", "will", "would", "shall", "should",
                     "can", "could", "may", "might", "must", "ought", "go", "went", "gone",
                     "make", "made", "take", "took", "see", "saw", "seen", "know", "knew",
                     "get", "got", "give", "gave", "find", "found", "think", "thought", "say",
                     "said", "come", "came", "become", "became", "seem", "seemed", "keep",
                     "kept", "let", "put", "run", "ran", "show", "tell", "told", "feel", "felt"});
    put(Pos::kPrt, {"to", "not", "up", "down", "off", "out"});
    put(Pos::kAdv, {"also", "very", "too", "just", "only", "even", "still", "how", "why",
                    "when", "where", "wherever", "whenever", "then", "there", "here", "so",
                    "once", "now", "never", "always", "often", "again", "soon", "perhaps",
                    "almost", "quite", "rather", "more", "most"});
    put(Pos::kNum, {"one", "two", "three", "four", "five", "six", "seven", "eight", "nine",
                    "ten", "hundred", "thousand", "million", "billion", "ones"});
    put(Pos::kAdj, {"good", "new", "old", "great", "high", "small", "large", "long", "little",
                    "big", "young", "other", "own", "same", "early", "late", "important",
                    "different", "able", "whole", "real", "best", "better", "true", "clear"});
    return m;
  }();
  return kLex;
}

const std::unordered_map<std::string, Ner>& gazetteer() {
  static const std::unordered_map<std::string, Ner> kGaz = [] {
    std::unordered_map<std::string, Ner> m;
    auto put = [&m](Ner n, std::initializer_list<const char*> ws) {
      for (const char* w : ws) m.emplace(w, n);
    };
    put(Ner::kPlace, {"paris", "london", "berlin", "tokyo", "beijing", "seoul", "rome",
                      "madrid", "moscow", "sydney", "toronto", "chicago", "boston", "america",
                      "europe", "asia", "africa", "china", "japan", "korea", "france", "germany",
                      "england", "britain", "italy", "spain", "canada", "india", "russia",
                      "australia", "brazil", "mexico", "egypt", "texas", "california",
                      "atlantic", "pacific", "thames", "nile", "amazon"});
    put(Ner::kPerson, {"john", "mary", "james", "robert", "michael", "william", "david",
                       "richard", "thomas", "charles", "elizabeth", "sarah", "anna", "emma",
                       "alice", "peter", "paul", "george", "smith", "johnson", "brown",
                       "newton", "darwin", "einstein", "shakespeare", "lincoln", "napoleon"});
    put(Ner::kOrg, {"google", "microsoft", "apple", "ibm", "nasa", "unesco", "un", "nato",
                    "congress", "parliament", "university", "institute", "bank", "company",
                    "corporation", "association", "committee", "ministry"});
    return m;
  }();
  return kGaz;
}

bool ends_with(std::string_view s, std::string_view suf) {
  return s.size() > suf.size() + 1 && s.ends_with(suf);
}

}  // namespace

const char* to_string(Pos p) {
  static const char* kNames[] = {"NOUN", "VERB", "ADJ", "ADV", "PRON", "DET",
                                 "ADP",  "NUM",  "CONJ", "PRT", ".",    "X"};
  return kNames[static_cast<int>(p)];
}

const char* to_string(Ner n) {
  static const char* kNames[] = {"none", "person", "place", "org", "other"};
  return kNames[static_cast<int>(n)];
}

FrequencyTable FrequencyTable::from_corpus(std::span<const DocumentLayout> corpus) {
  FrequencyTable t;
  for (const auto& doc : corpus) {
    for (const auto& w : doc.words) t.add(w.text);
  }
  return t;
}

void FrequencyTable::add(std::string_view word, std::uint64_t n) {
  const auto key = normalize_word(word);
  if (key.empty() || n == 0) return;
  max_ = std::max(max_, counts_[key] += n);
}

std::uint64_t FrequencyTable::count(std::string_view word) const {
  auto it = counts_.find(normalize_word(word));
  return it == counts_.end() ? 0 : it->second;
}

int FrequencyTable::tf_bin(std::uint64_t c) const {
  if (c == 0 || max_ == 0) return 0;
  const double r = std::log(double(c) + 1.0) / std::log(double(max_) + 1.0);
  const int b = static_cast<int>(std::floor(15.0 * r + 1e-12));
  return std::clamp(b, 1, 15);
}

nlohmann::json FrequencyTable::to_json() const {
  // Sorted keys keep the file byte-stable.
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [k, v] : counts_) counts[k] = v;
  return {{"counts", counts}};
}

FrequencyTable FrequencyTable::from_json(const nlohmann::json& j) {
  FrequencyTable t;
  for (const auto& [k, v] : j.at("counts").items()) t.add(k, v.get<std::uint64_t>());
  return t;
}

Pos tag_pos(std::string_view text) {
  bool any_alnum = false, all_digit = true;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) any_alnum = true;
    if (std::isalpha(u)) all_digit = false;
  }
  if (!any_alnum) return Pos::kPunct;
  if (all_digit) return Pos::kNum;
  const auto w = normalize_word(text);
  if (auto it = pos_lexicon().find(w); it != pos_lexicon().end()) return it->second;
  if (ends_with(w, "ly")) return Pos::kAdv;
  for (auto suf : {"ing", "ed", "ize", "ise", "ify", "ate"}) {
    if (ends_with(w, suf)) return Pos::kVerb;
  }
  for (auto suf : {"ous", "ful", "able", "ible", "ive", "al", "ic", "less", "ish", "ary"}) {
    if (ends_with(w, suf)) return Pos::kAdj;
  }
  return Pos::kNoun;
}

Ner tag_ner(std::string_view text, bool sentence_initial) {
  const auto w = normalize_word(text);
  if (w.empty()) return Ner::kNone;
  const auto first = std::find_if(text.begin(), text.end(),
                                  [](char c) { return std::isalpha(static_cast<unsigned char>(c)); });
  const bool capitalized = first != text.end() && std::isupper(static_cast<unsigned char>(*first));
  if (!capitalized) return Ner::kNone;
  if (auto it = gazetteer().find(w); it != gazetteer().end()) return it->second;
  if (sentence_initial || is_function_word(w)) return Ner::kNone;
  return Ner::kOther;
}

KnowledgeVector knowledge_features(std::string_view text, bool sentence_initial,
                                   const FrequencyTable& freq) {
  KnowledgeVector k;
  const auto c = freq.count(text);
  k.log_term_frequency = std::log(double(c) + 1.0);
  k.tf_bin = freq.tf_bin(c);
  k.pos = tag_pos(text);
  k.ner = tag_ner(text, sentence_initial);
  return k;
}

KnowledgeVector knowledge_features(const DocumentLayout& layout, std::size_t word_index,
                                   const FrequencyTable& freq) {
  return knowledge_features(layout.words.at(word_index).text, layout.sentence_initial(word_index),
                            freq);
}

}  // namespace gazelex::text
