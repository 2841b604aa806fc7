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


#include <limits>
#include <sstream>

#include "doctest.h"

#include "gazelex/baselines/baselines.hpp"
#include "gazelex/eval/metrics.hpp"
#include "gazelex/eval/train.hpp"
#include "gazelex/synth/synth.hpp"

using namespace gazelex;
using namespace gazelex::baselines;

namespace {

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

text::DocumentLayout doc(const std::string& id, const std::string& words) {
  return text::render_layout(id, split_words(words), text::PageGeometry{});
}

// One sample per word of each listed doc; labels marked by word index.
data::Dataset word_dataset(const std::vector<text::DocumentLayout>& docs,
                           const std::vector<std::vector<std::size_t>>& unknown) {
  data::Dataset ds;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    data::WindowRecord r;
    r.user_id = "u";
    r.doc_id = docs[d].doc_id;
    ds.windows.push_back(r);
    for (std::size_t i = 0; i < docs[d].words.size(); ++i) {
      data::LabeledSample s;
      s.record = d;
      s.word_index = i;
      s.unknown = std::find(unknown[d].begin(), unknown[d].end(), i) != unknown[d].end();
      s.distance = double(i);
      s.duration = double(10 * i);
      s.n_g = 180;
      ds.samples.push_back(s);
    }
  }
  return ds;
}

// Sentences padded with n-1 start symbols, as flat windows per word.
std::vector<std::vector<std::string>> padded_grams(const std::string& text, int n) {
  std::vector<std::vector<std::string>> grams;
  std::vector<std::string> sentence;
  auto flush = [&] {
    std::vector<std::string> padded(std::size_t(n - 1), "<s>");
    padded.insert(padded.end(), sentence.begin(), sentence.end());
    for (std::size_t i = std::size_t(n - 1); i < padded.size(); ++i) {
      grams.emplace_back(padded.begin() + long(i) - (n - 1), padded.begin() + long(i) + 1);
    }
    sentence.clear();
  };
  for (const auto& w : split_words(text)) {
    sentence.push_back(text::normalize_word(w));
    if (w.back() == '.') flush();
  }
  if (!sentence.empty()) flush();
  return grams;
}

}  // namespace

TEST_CASE("distance heuristic extremes") {
  const std::vector<double> d = {0.0, 3.5, 10.0, 250.0};
  const auto all = ThresholdRule{std::numeric_limits<double>::infinity(), false}.predict(d);
  CHECK(std::all_of(all.begin(), all.end(), [](bool b) { return b; }));
  const std::vector<bool> labels = {true, false, true, false};
  std::vector<double> scores(all.begin(), all.end());
  CHECK(eval::score_metrics(scores, labels, 0.5).recall == 100.0);
  const auto zero = ThresholdRule{0.0, false}.predict(d);
  CHECK(zero == std::vector<bool>{true, false, false, false});
}

TEST_CASE("fixation heuristic extremes") {
  const std::vector<double> t = {0.0, 5.0, 60.0, 180.0};
  const auto all = ThresholdRule{0.0, true}.predict(t);
  CHECK(std::all_of(all.begin(), all.end(), [](bool b) { return b; }));
  const auto none = ThresholdRule{181.0, true}.predict(t);
  CHECK(std::none_of(none.begin(), none.end(), [](bool b) { return b; }));
}

TEST_CASE("heuristic predictions are monotone in the threshold") {
  std::vector<double> v;
  for (int i = 0; i < 50; ++i) v.push_back(double((i * 37) % 101));
  std::size_t prev_ge = v.size() + 1, prev_le = 0;
  for (int k = 0; k <= 100; ++k) {
    const auto ge = ThresholdRule{double(k), true}.predict(v);
    const auto le = ThresholdRule{double(k), false}.predict(v);
    const auto n_ge = std::size_t(std::count(ge.begin(), ge.end(), true));
    const auto n_le = std::size_t(std::count(le.begin(), le.end(), true));
    CHECK(n_ge <= prev_ge);
    CHECK(n_le >= prev_le);
    prev_ge = n_ge;
    prev_le = n_le;
  }
}

TEST_CASE("rule calibration maximizes F1 on the scaled grid") {
  const std::vector<double> v = {10, 20, 30, 40, 50, 60, 70, 80, 90, 110};
  const std::vector<bool> y = {false, false, false, false, false, false, true, true, true, true};
  const auto rule = calibrate_rule(v, y, true);
  // Grid points 61..70 tie; the smallest wins.
  CHECK(rule.theta == doctest::Approx(61.0));
  const auto down = calibrate_rule(v, y, false);
  CHECK(down.theta == doctest::Approx(110.0));
}

TEST_CASE("fixation heuristic beats chance on planted dwell") {
  synth::SynthConfig cfg;
  cfg.corpus.n_docs = 4;
  cfg.n_users = 2;
  cfg.n_groups = 1;
  const auto corpus = synth::gen_corpus(cfg.corpus);
  const auto users = synth::make_users(cfg);
  const auto vocab = text::build_vocabulary(corpus.docs, {512, 1, 0.25});
  data::Dataset ds;
  for (std::size_t u = 0; u < users.size(); ++u) {
    for (const auto& d : corpus.docs) {
      const auto labels = synth::assign_labels(users[u], d, corpus.lexicon, u + 1);
      const auto s = synth::simulate_gaze(d, labels, users[u], cfg.tracker, 20 + u);
      ds.append(data::build_samples(s, d, data::WordLabels(labels.begin(), labels.end()),
                                    {vocab, corpus.frequency}, users[u].user_id));
    }
  }
  data::SplitSpec spec;
  spec.seed = 2;
  const auto sp = data::split(ds, spec);
  const auto rule = calibrate_fixation(ds, sp.dev);
  const auto pred = rule.predict(durations(ds, sp.test));
  const auto labels = eval::labels_of(ds, sp.test);
  const auto f1 = eval::score_metrics(std::vector<double>(pred.begin(), pred.end()), labels, 0.5).f1;
  const double chance = permutation_f1(pred, labels, 3);
  MESSAGE("fixation F1 " << f1 << " vs permuted " << chance);
  CHECK(f1 > chance);
}

TEST_CASE("logistic regression") {
  const auto d = doc("a", "alpha beta gamma delta epsilon zeta eta theta iota kappa");
  auto ds = word_dataset({d}, {{}});
  std::vector<std::size_t> ids(ds.samples.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  CHECK_THROWS_AS(train_logistic(ds, ids, ids), BaselineError);

  // Long fixations are unknown: separable on one feature.
  ds = word_dataset({d}, {{6, 7, 8, 9}});
  LogisticConfig lc;
  lc.epochs = 300;
  lc.batch_size = 4;
  lc.lr = 0.05;
  const auto m = train_logistic(ds, ids, ids, lc);
  const auto r = eval::score_metrics(m.probabilities(ds, ids), eval::labels_of(ds, ids), m.threshold);
  CHECK(r.f1 == 100.0);
  CHECK(m.weights.size() == LogisticModel::kFeatures);
}

TEST_CASE("n-gram definitions") {
  const auto train = doc("tr", "The cat sat. A dog ran far. The cat ran.");
  const auto test = doc("te", "A cat sat. The dog sat far away.");
  const auto ds = word_dataset({train, test}, {{1, 5}, {}});
  const std::vector<std::size_t> train_ids = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  const std::vector<text::DocumentLayout> docs = {train, test};

  CHECK(ngram_at(train, 1, 3) == std::vector<std::string>{"<s>", "the", "cat"});
  CHECK(ngram_at(train, 3, 2) == std::vector<std::string>{"<s>", "a"});
  CHECK(ngram_at(train, 5, 1) == std::vector<std::string>{"ran"});

  for (int n = 1; n <= 3; ++n) {
    const auto p = build_ngram(n, ds, train_ids, docs);
    // "dog" was never unknown in training.
    CHECK_FALSE(ngram_predict(p, test, 4));
  }
  // Unigram: "cat" and "ran" are unknown somewhere, so positive everywhere.
  const auto uni = build_ngram(1, ds, train_ids, docs);
  CHECK(ngram_predict(uni, test, 1));
  CHECK(ngram_predict(uni, train, 9));
  // Bigram "the cat" matches the sentence-initial pair only.
  const auto bi = build_ngram(2, ds, train_ids, docs);
  CHECK(ngram_predict(bi, train, 8));
  CHECK_FALSE(ngram_predict(bi, train, 9));
  CHECK_FALSE(ngram_predict(bi, test, 1));
}

TEST_CASE("n-gram prediction equals a brute-force scan") {
  const std::string train_text =
      "Rivers carve deep canyons. Deep canyons hold old stone. Old stone tells stories. "
      "Stories carve rivers.";
  const std::string test_text =
      "Deep canyons carve stone. Old stone tells rivers. Rivers carve deep canyons.";
  const auto train = doc("tr", train_text);
  const auto test = doc("te", test_text);
  REQUIRE(train.words.size() == 16);
  std::vector<std::size_t> unknown = {2, 3, 6, 8, 12};
  const auto ds = word_dataset({train, test}, {unknown, {}});
  std::vector<std::size_t> train_ids;
  for (std::size_t i = 0; i < train.words.size(); ++i) train_ids.push_back(i);
  const std::vector<text::DocumentLayout> docs = {train, test};
  for (int n = 1; n <= 3; ++n) {
    const auto p = build_ngram(n, ds, train_ids, docs);
    const auto train_grams = padded_grams(train_text, n);
    const auto test_grams = padded_grams(test_text, n);
    REQUIRE(test_grams.size() == test.words.size());
    for (std::size_t i = 0; i < test.words.size(); ++i) {
      bool expected = false;
      for (std::size_t u : unknown) expected = expected || train_grams[u] == test_grams[i];
      CHECK(ngram_predict(p, test, i) == expected);
    }
  }
}

TEST_CASE("higher n-gram orders never hit more often") {
  synth::CorpusConfig cc;
  cc.n_docs = 6;
  const auto corpus = synth::gen_corpus(cc);
  synth::UserProfile user;
  user.user_id = "u";
  user.proficiency = 800;
  std::vector<std::vector<std::size_t>> unknown;
  for (std::size_t d = 0; d < 6; ++d) {
    const auto labels = synth::assign_labels(user, corpus.docs[d], corpus.lexicon, d);
    unknown.emplace_back();
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] && d < 3) unknown.back().push_back(i);
    }
  }
  const auto ds = word_dataset(corpus.docs, unknown);
  std::vector<std::size_t> train_ids, test_ids;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    (ds.samples[i].record < 3 ? train_ids : test_ids).push_back(i);
  }
  std::vector<bool> prev;
  std::size_t prev_hits = test_ids.size() + 1;
  for (int n = 1; n <= 3; ++n) {
    const auto p = build_ngram(n, ds, train_ids, corpus.docs);
    const auto hits = ngram_predictions(p, ds, test_ids, corpus.docs);
    const auto count = std::size_t(std::count(hits.begin(), hits.end(), true));
    CHECK(count <= prev_hits);
    if (!prev.empty()) {
      for (std::size_t i = 0; i < hits.size(); ++i) CHECK((!hits[i] || prev[i]));
    }
    prev = hits;
    prev_hits = count;
  }
  CHECK(prev_hits < test_ids.size());
}

TEST_CASE("random predictions follow the rate") {
  const auto p = random_predictions(10000, 0.1, 4);
  const auto n = std::count(p.begin(), p.end(), true);
  CHECK(n > 900);
  CHECK(n < 1100);
  CHECK(random_predictions(100, 0.3, 9) == random_predictions(100, 0.3, 9));
}
