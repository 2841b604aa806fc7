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


#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "doctest.h"

#include "gazelex/data/dataset.hpp"
#include "gazelex/gaze/pipeline.hpp"
#include "gazelex/synth/synth.hpp"

using namespace gazelex;
using gazelex::gaze::BoundingBox;
using gazelex::gaze::GazeSample;
using gazelex::gaze::GazeStream;

namespace {

struct Fixture {
  text::DocumentLayout layout;
  text::Vocabulary vocab;
  text::FrequencyTable freq;
};

Fixture line_fixture() {
  const std::vector<std::string> words = {"apple", "the",  "berry", "cherry", "of",
                                          "date",  "eggs", "figs",  "grape",  "honey"};
  Fixture f;
  f.layout = text::render_layout("toy", words, text::PageGeometry{});
  std::vector<text::DocumentLayout> corpus{f.layout};
  f.vocab = text::build_vocabulary(corpus, {64, 1, 0.25});
  f.freq = text::FrequencyTable::from_corpus(corpus);
  return f;
}

data::WordLabels all_known(std::size_t n) { return data::WordLabels(n, false); }

// 60 Hz stream; x sweeps between two points during the first second.
GazeStream sweep(double x0, double x1, double y, double duration_ms) {
  GazeStream s;
  for (int k = 0; k * 1000.0 / 60.0 < duration_ms; ++k) {
    const double t = std::round(k * 1000.0 / 60.0);
    const double a = std::min(1.0, t / 1000.0);
    s.push_back({t, x0 + a * (x1 - x0), y, gaze::Source::kTracker});
  }
  return s;
}

// Samples kept by the blink rule, written from its definition.
std::vector<double> kept_y(std::vector<double> ys, double lh) {
  std::sort(ys.begin(), ys.end());
  std::vector<std::vector<double>> runs{{ys.front()}};
  for (std::size_t i = 1; i < ys.size(); ++i) {
    if (ys[i] - ys[i - 1] > 3 * lh) runs.emplace_back();
    runs.back().push_back(ys[i]);
  }
  std::size_t biggest = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].size() > runs[biggest].size()) biggest = r;
  }
  std::vector<double> out;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (r == biggest || double(runs[r].size()) >= 0.2 * double(ys.size())) {
      out.insert(out.end(), runs[r].begin(), runs[r].end());
    }
  }
  return out;
}

data::Dataset fake_dataset(std::size_t n, std::size_t users, std::size_t docs) {
  data::Dataset ds;
  for (std::size_t i = 0; i < n; ++i) {
    data::WindowRecord r;
    r.user_id = "u" + std::to_string(i % users);
    r.doc_id = "d" + std::to_string((i / users) % docs);
    r.window_index = i;
    r.gaze = {{0.1, 0.1, 0.1, 0.1}};
    r.gaze_time = {0.0};
    r.tokens.push_back({});
    ds.windows.push_back(r);
    data::LabeledSample s;
    s.record = i;
    s.unknown = i % 2 == 0;
    s.token_slots = {0};
    ds.samples.push_back(s);
  }
  return ds;
}

}  // namespace

TEST_CASE("a window over three content words yields three samples") {
  const auto f = line_fixture();
  const auto& w = f.layout.words;
  // Gaze sweeps from "apple" to "cherry"; "the" is a function word.
  const auto stream = sweep(w[0].box.center_x(), w[3].box.center_x(), w[0].box.center_y(), 1500);
  const auto ds = data::build_samples(stream, f.layout, all_known(w.size()), {f.vocab, f.freq}, "u");
  REQUIRE(ds.samples.size() == 3);
  CHECK(ds.samples[0].word_index == 0);
  CHECK(ds.samples[1].word_index == 2);
  CHECK(ds.samples[2].word_index == 3);
  CHECK(ds.windows.size() == 1);
  CHECK(ds.stats.accepted == 1);
  for (const auto& s : ds.samples) {
    CHECK(!s.token_slots.empty());
    for (std::size_t slot : s.token_slots) CHECK(ds.windows[0].tokens[slot].word_index == s.word_index);
    CHECK(s.n_g == stream.size());
  }
}

TEST_CASE("unstable windows contribute nothing") {
  const auto f = line_fixture();
  GazeStream s;
  for (int k = 0; k < 90; ++k) {
    const double t = std::round(k * 1000.0 / 60.0);
    s.push_back({t, 100.0, 300.0 + 300.0 * double(k % 60) / 59.0, gaze::Source::kTracker});
  }
  const auto ds = data::build_samples(s, f.layout, all_known(f.layout.words.size()),
                                      {f.vocab, f.freq}, "u");
  CHECK(ds.samples.empty());
  CHECK(ds.stats.rejected_unstable == 1);
}

TEST_CASE("a candidate without a label names the word") {
  const auto f = line_fixture();
  const auto& w = f.layout.words;
  const auto stream = sweep(w[0].box.center_x(), w[3].box.center_x(), w[0].box.center_y(), 1500);
  auto labels = all_known(w.size());
  labels[2].reset();
  try {
    data::build_samples(stream, f.layout, labels, {f.vocab, f.freq}, "u");
    FAIL("expected a missing-label error");
  } catch (const data::DatasetError& e) {
    CHECK(std::string(e.what()).find("berry") != std::string::npos);
  }
  labels.resize(2);
  CHECK_THROWS_AS(data::build_samples(stream, f.layout, labels, {f.vocab, f.freq}, "u"),
                  data::DatasetError);
}

TEST_CASE("sample count matches a brute-force re-walk over a two-column page") {
  synth::CorpusConfig cc;
  cc.n_docs = 1;
  cc.words_per_doc = 363;
  const auto corpus = synth::gen_corpus(cc);
  const auto& doc = corpus.docs[0];
  REQUIRE(doc.columns.size() == 2);
  synth::UserProfile user;
  user.user_id = "u";
  user.proficiency = 2000;
  const auto labels = synth::assign_labels(user, doc, corpus.lexicon, 4);
  const auto path = synth::plan_scanpath(doc, labels, user, 8);
  const auto full = synth::render_gaze(path, synth::NoiseModel::tracker(), 9);
  // Sixty seconds centred on the jump to the second column.
  double jump = 0.0;
  for (const auto& f : path.fixations) {
    if (f.x > doc.columns[0].x_max) {
      jump = f.start_ms;
      break;
    }
  }
  REQUIRE(jump > 30000.0);
  const double t0 = std::floor(jump / 1000.0) * 1000.0 - 30000.0;
  GazeStream stream;
  for (auto s : full) {
    s.t_ms -= t0;
    if (s.t_ms >= 0.0 && s.t_ms < 60000.0) stream.push_back(s);
  }

  const auto vocab = text::build_vocabulary(corpus.docs, {512, 1, 0.25});
  data::WordLabels wl(labels.begin(), labels.end());
  const auto ds = data::build_samples(stream, doc, wl, {vocab, corpus.frequency}, "u");

  const double lh = doc.line_height;
  std::size_t expected = 0, rejected = 0;
  for (int k = 0; k < 60; ++k) {
    std::vector<double> ys;
    std::vector<GazeSample> core;
    for (const auto& s : stream) {
      if (s.t_ms >= 1000.0 * k && s.t_ms < 1000.0 * (k + 1)) core.push_back(s);
    }
    for (const auto& s : core) ys.push_back(s.y);
    const auto kept = kept_y(ys, lh);
    if (kept.back() - kept.front() > 6 * lh) {
      ++rejected;
      continue;
    }
    const std::multiset<double> keep(kept.begin(), kept.end());
    BoundingBox roi{1e9, 1e9, -1e9, -1e9};
    for (const auto& s : core) {
      if (!keep.count(s.y)) continue;
      roi.x_min = std::min(roi.x_min, s.x);
      roi.x_max = std::max(roi.x_max, s.x);
      roi.y_min = std::min(roi.y_min, s.y);
      roi.y_max = std::max(roi.y_max, s.y);
    }
    for (const auto& w : doc.words) {
      const bool hit = w.box.x_min <= roi.x_max && roi.x_min <= w.box.x_max &&
                       w.box.y_min <= roi.y_max && roi.y_min <= w.box.y_max;
      expected += hit && !w.is_function_word;
    }
  }
  MESSAGE("samples " << ds.samples.size() << ", rejected " << rejected);
  CHECK(ds.stats.accepted + ds.stats.rejected_unstable + ds.stats.rejected_empty == 60);
  CHECK(ds.stats.rejected_unstable == rejected);
  CHECK(ds.samples.size() == expected);
  CHECK(expected > 0);
  CHECK(rejected > 0);

  const auto again = data::build_samples(stream, doc, wl, {vocab, corpus.frequency}, "u");
  REQUIRE(again.samples.size() == ds.samples.size());
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    CHECK(again.samples[i].word_index == ds.samples[i].word_index);
    CHECK(again.samples[i].distance == ds.samples[i].distance);
  }
}

TEST_CASE("rows respect the token budget") {
  synth::CorpusConfig cc;
  cc.n_docs = 1;
  const auto corpus = synth::gen_corpus(cc);
  const auto& doc = corpus.docs[0];
  const auto vocab = text::build_vocabulary(corpus.docs, {512, 1, 0.25});
  // A stationary gaze over the first line, then a slow vertical sweep.
  GazeStream s;
  for (int k = 0; k < 400; ++k) {
    const double t = std::round(k * 1000.0 / 60.0);
    s.push_back({t, 60.0 + double(k % 60) * 9.0, 90.0 + double(k % 60), gaze::Source::kTracker});
  }
  data::BuildConfig bc;
  bc.max_tokens = 12;
  const auto ds = data::build_samples(s, doc, data::WordLabels(doc.words.size(), false),
                                      {vocab, corpus.frequency}, "u", bc);
  REQUIRE(!ds.samples.empty());
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& r : ds.windows) {
    CHECK(r.tokens.size() <= 12);
    CHECK(r.gaze.size() <= bc.max_gaze_len);
    for (std::size_t i = 1; i < r.tokens.size(); ++i) {
      CHECK(r.tokens[i].word_index >= r.tokens[i - 1].word_index);
    }
  }
  for (const auto& smp : ds.samples) {
    const auto& r = ds.windows[smp.record];
    CHECK(seen.insert({r.window_index, smp.word_index}).second);
  }
  const bool split_rows =
      std::any_of(ds.windows.begin(), ds.windows.end(), [](const auto& r) { return r.part > 0; });
  CHECK(split_rows);
}

TEST_CASE("mixed split follows the ratios") {
  const auto ds = fake_dataset(1000, 10, 10);
  data::SplitSpec spec;
  spec.seed = 3;
  const auto sp = data::split(ds, spec);
  CHECK(sp.train.size() == 800);
  CHECK(sp.dev.size() == 100);
  CHECK(sp.test.size() == 100);
  std::set<std::size_t> all(sp.train.begin(), sp.train.end());
  all.insert(sp.dev.begin(), sp.dev.end());
  all.insert(sp.test.begin(), sp.test.end());
  CHECK(all.size() == 1000);
  CHECK(data::split(ds, spec).manifest() == sp.manifest());
  spec.seed = 4;
  CHECK(data::split(ds, spec).manifest()["hash"] != sp.manifest()["hash"]);
}

TEST_CASE("cross splits hold out whole ids") {
  const auto ds = fake_dataset(1000, 10, 10);
  data::SplitSpec spec;
  spec.mode = data::SplitMode::kCrossUser;
  spec.dev_ids = {"u8"};
  spec.test_ids = {"u9"};
  const auto sp = data::split(ds, spec);
  for (std::size_t i : sp.train) {
    const auto& u = ds.record_of(ds.samples[i]).user_id;
    CHECK(u != "u9");
    CHECK(u != "u8");
  }
  for (std::size_t i : sp.test) CHECK(ds.record_of(ds.samples[i]).user_id == "u9");
  CHECK(sp.train.size() + sp.dev.size() + sp.test.size() == 1000);

  spec.mode = data::SplitMode::kCrossDocument;
  spec.dev_ids = {"d1"};
  spec.test_ids = {"d2"};
  const auto sd = data::split(ds, spec);
  for (std::size_t i : sd.test) CHECK(ds.record_of(ds.samples[i]).doc_id == "d2");

  spec.test_ids = {"d99"};
  CHECK_THROWS_AS(data::split(ds, spec), data::DatasetError);
  spec.test_ids = {"d1"};
  CHECK_THROWS_AS(data::split(ds, spec), std::invalid_argument);
  spec.dev_ids.clear();
  CHECK_THROWS_AS(data::split(ds, spec), std::invalid_argument);
}

TEST_CASE("class imbalance counts tokens") {
  const auto balanced = fake_dataset(10, 2, 2);
  CHECK(data::class_imbalance(balanced).ratio == 1.0);
  auto ds = balanced;
  ds.samples[0].token_slots = {0, 0, 0};
  const auto imb = data::class_imbalance(ds);
  CHECK(imb.positive_tokens == 7);
  CHECK(imb.negative_tokens == 5);
  for (auto& s : ds.samples) s.unknown = false;
  CHECK(std::isinf(data::class_imbalance(ds).ratio));
  const std::vector<std::size_t> ids = {1, 3};
  CHECK(data::class_imbalance(balanced, ids).negative_tokens == 2);
}

TEST_CASE("batches mask loss to the listed samples") {
  const auto f = line_fixture();
  const auto& w = f.layout.words;
  auto labels = all_known(w.size());
  labels[3] = true;
  const auto stream = sweep(w[0].box.center_x(), w[3].box.center_x(), w[0].box.center_y(), 1500);
  const auto ds = data::build_samples(stream, f.layout, labels, {f.vocab, f.freq}, "u");
  const std::vector<std::size_t> ids = {0, 2};
  const auto rows = data::group_rows(ds, ids);
  REQUIRE(rows.size() == 1);
  const auto b = data::make_batch(ds, rows);
  CHECK(b.batch == 1);
  CHECK(b.n_tokens == ds.windows[0].tokens.size());
  double masked = 0, positive = 0;
  for (std::size_t t = 0; t < b.n_tokens; ++t) {
    masked += b.loss_mask[t];
    positive += b.labels[t];
    CHECK(b.token_mask[t] == 1.0);
  }
  CHECK(masked == double(ds.samples[0].token_slots.size() + ds.samples[2].token_slots.size()));
  CHECK(positive == double(ds.samples[2].token_slots.size()));
}

TEST_CASE("dataset files round trip") {
  synth::CorpusConfig cc;
  cc.n_docs = 1;
  const auto corpus = synth::gen_corpus(cc);
  const auto& doc = corpus.docs[0];
  synth::UserProfile user;
  user.user_id = "u";
  user.proficiency = 2000;
  const auto labels = synth::assign_labels(user, doc, corpus.lexicon, 4);
  const auto stream = synth::simulate_gaze(doc, labels, user, synth::NoiseModel::webcam(), 5);
  const auto vocab = text::build_vocabulary(corpus.docs, {512, 1, 0.25});
  const auto ds = data::build_samples(stream, doc, data::WordLabels(labels.begin(), labels.end()),
                                      {vocab, corpus.frequency}, "u");
  REQUIRE(!ds.samples.empty());
  CHECK(ds.windows[0].source == gaze::Source::kWebcam);
  const auto dir = std::filesystem::temp_directory_path() / "gazelex_ds_rt";
  data::write_dataset(dir, ds, {{"vocab_hash", "x"}});
  const auto back = data::read_dataset(dir);
  REQUIRE(back.samples.size() == ds.samples.size());
  REQUIRE(back.windows.size() == ds.windows.size());
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    CHECK(back.samples[i].distance == ds.samples[i].distance);
    CHECK(back.samples[i].token_slots == ds.samples[i].token_slots);
  }
  for (std::size_t i = 0; i < ds.windows.size(); ++i) {
    CHECK(back.windows[i].gaze == ds.windows[i].gaze);
    CHECK(back.windows[i].tokens.size() == ds.windows[i].tokens.size());
    CHECK(back.windows[i].tokens.back().feats == ds.windows[i].tokens.back().feats);
  }
  CHECK(back.stats.accepted == ds.stats.accepted);
  data::write_dataset(dir / "again", back, {{"vocab_hash", "x"}});
  CHECK(nlohmann::json::parse(std::ifstream(dir / "manifest.json"))["hash"] ==
        nlohmann::json::parse(std::ifstream(dir / "again" / "manifest.json"))["hash"]);
  std::filesystem::remove_all(dir);
}
