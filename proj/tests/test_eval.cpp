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


#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "doctest.h"

#include "gazelex/data/dataset.hpp"
#include "gazelex/eval/metrics.hpp"
#include "gazelex/eval/suite.hpp"
#include "gazelex/eval/train.hpp"
#include "gazelex/synth/synth.hpp"

using namespace gazelex;
using namespace gazelex::eval;

namespace {

double brute_best(const std::vector<double>& s, const std::vector<bool>& y) {
  double best = -1, arg = 0;
  for (int k = 0; k <= 100; ++k) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const bool p = s[i] >= k / 100.0;
      tp += p && y[i];
      fp += p && !y[i];
      fn += !p && y[i];
    }
    const double f1 = tp == 0 ? 0.0 : 2.0 * tp / (2.0 * tp + fp + fn);
    if (f1 > best + 1e-12) {
      best = f1;
      arg = k / 100.0;
    }
  }
  return arg;
}

struct Toy {
  data::Dataset ds;
  data::Split split;
  std::size_t vocab_size = 0;
  std::vector<text::DocumentLayout> docs;
};

Toy toy_dataset() {
  synth::SynthConfig cfg;
  cfg.corpus.n_docs = 2;
  cfg.corpus.words_per_doc = 120;
  cfg.n_users = 2;
  cfg.n_groups = 1;
  cfg.proficiency_min = 600;
  cfg.proficiency_max = 900;
  const auto corpus = synth::gen_corpus(cfg.corpus);
  const auto users = synth::make_users(cfg);
  const auto vocab = text::build_vocabulary(corpus.docs, {128, 1, 0.25});
  Toy toy;
  toy.vocab_size = vocab.size();
  for (std::size_t u = 0; u < users.size(); ++u) {
    for (const auto& doc : corpus.docs) {
      const auto labels = synth::assign_labels(users[u], doc, corpus.lexicon, u);
      const auto stream =
          synth::simulate_gaze(doc, labels, users[u], synth::NoiseModel::tracker(), 10 + u);
      toy.ds.append(data::build_samples(stream, doc,
                                        data::WordLabels(labels.begin(), labels.end()),
                                        {vocab, corpus.frequency}, users[u].user_id));
    }
  }
  toy.docs = corpus.docs;
  data::SplitSpec spec;
  spec.seed = 1;
  toy.split = data::split(toy.ds, spec);
  return toy;
}

model::ModelConfig toy_model(std::size_t vocab) {
  model::ModelConfig mc;
  mc.d_model = 8;
  mc.n_enc_layers = mc.n_dec_layers = mc.n_text_layers = 1;
  mc.n_heads = 2;
  mc.ffn_mult = 2;
  mc.knowledge_dim = 2;
  mc.vocab_size = vocab;
  mc.seed = 2;
  return mc;
}

}  // namespace

TEST_CASE("a word is unknown when any token fires") {
  const std::vector<double> p = {0.2, 0.8, 0.1};
  const std::vector<std::size_t> word = {0, 0, 1};
  const std::vector<bool> labels = {true, false};
  const auto r = word_level_metrics(p, 0.5, word, labels);
  CHECK(r.confusion.tp == 1);
  CHECK(r.confusion.tn == 1);
  const std::vector<std::size_t> bad = {0, 0, 2};
  CHECK_THROWS_AS(word_level_metrics(p, 0.5, bad, labels), MetricsError);
}

TEST_CASE("confusion arithmetic") {
  const auto r = metrics_from_confusion({2, 1, 1, 96}, 0.5);
  CHECK(r.precision == doctest::Approx(66.6667).epsilon(1e-4));
  CHECK(r.recall == doctest::Approx(66.6667).epsilon(1e-4));
  CHECK(r.f1 == doctest::Approx(66.6667).epsilon(1e-4));
  CHECK(r.accuracy == doctest::Approx(98.0));
  CHECK(r.false_alarm_rate == doctest::Approx(1.0 / 97.0));
  CHECK(r.triggered_rate * 100.0 == doctest::Approx(r.recall));
  const auto j = r.to_json();
  CHECK(j["confusion"]["tn"] == 96);
  const auto zero = metrics_from_confusion({0, 0, 3, 7}, 0.5);
  CHECK(zero.f1 == 0.0);
  CHECK(zero.precision == 0.0);
}

TEST_CASE("threshold search") {
  const std::vector<double> s0 = {0.1, 0.5, 0.9};
  CHECK(search_threshold(s0, {false, false, false}) == 0.0);

  // Positives at 0.30 and 0.45; the 0.35 negative makes 0.31..0.35 worse.
  const std::vector<double> s = {0.05, 0.1, 0.2, 0.25, 0.3, 0.35, 0.45, 0.12, 0.29, 0.02};
  const std::vector<bool> y = {false, false, false, false, true, false, true, false, false, false};
  CHECK(brute_best(s, y) == 0.30);
  CHECK(search_threshold(s, y) == 0.30);

  const std::vector<double> sep = {0.95, 0.91, 0.99, 0.1, 0.05, 0.02, 0.07};
  const std::vector<bool> ysep = {true, true, true, false, false, false, false};
  CHECK(search_threshold(sep, ysep) == doctest::Approx(0.11));
  for (double th : {0.11, 0.5, 0.9}) CHECK(score_metrics(sep, ysep, th).f1 == 100.0);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> sc(60);
    std::vector<bool> lab(60);
    for (std::size_t i = 0; i < sc.size(); ++i) {
      lab[i] = u(rng) < 0.2;
      sc[i] = std::round(std::clamp(u(rng) * 0.6 + (lab[i] ? 0.3 : 0.0), 0.0, 1.0) * 1000) / 1000;
    }
    CHECK(search_threshold(sc, lab) == brute_best(sc, lab));
    std::size_t prev = sc.size() + 1;
    for (int k = 0; k <= 100; ++k) {
      const auto r = score_metrics(sc, lab, k / 100.0);
      const std::size_t predicted = r.confusion.tp + r.confusion.fp;
      CHECK(predicted <= prev);
      prev = predicted;
      if (r.precision + r.recall > 0) {
        CHECK(r.f1 == doctest::Approx(2 * r.precision * r.recall / (r.precision + r.recall)));
      }
      CHECK(r.accuracy ==
            doctest::Approx(100.0 * double(r.confusion.tp + r.confusion.tn) / 60.0));
    }
  }
}

TEST_CASE("jaccard") {
  CHECK(jaccard({"a", "b"}, {"a", "b"}) == 1.0);
  CHECK(jaccard({"a"}, {"b"}) == 0.0);
  CHECK(jaccard({"a", "b", "c"}, {"b", "c", "d"}) == 0.5);
  CHECK(jaccard({}, {}) == 1.0);
  CHECK(jaccard({"a"}, {}) == 0.0);
}

TEST_CASE("train config invariants") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.patience = 31;
  CHECK_THROWS(c.validate());
  c = {};
  c.batch_size = 0;
  CHECK_THROWS(c.validate());
  c = {};
  c.lr_backbone = 0;
  CHECK_THROWS(c.validate());
  c = {};
  CHECK(TrainConfig::from_json(c.to_json()).to_json() == c.to_json());
}

TEST_CASE("training contract") {
  const auto toy = toy_dataset();
  REQUIRE(toy.ds.samples.size() > 100);
  TrainConfig tc;
  tc.epochs = 3;
  tc.batch_size = 8;
  tc.lr_backbone = 1e-3;
  tc.patience = 3;
  tc.seed = 4;

  SUBCASE("patience 0 runs one epoch") {
    model::DetectorModel m(toy_model(toy.vocab_size));
    tc.patience = 0;
    const auto r = train(m, toy.ds, toy.split.train, toy.split.dev, tc);
    CHECK(r.log.size() == 1);
  }
  SUBCASE("seeded reruns repeat the trajectory and the loss falls") {
    model::DetectorModel a(toy_model(toy.vocab_size));
    model::DetectorModel b(toy_model(toy.vocab_size));
    std::ostringstream log;
    const auto ra = train(a, toy.ds, toy.split.train, toy.split.dev, tc, &log);
    const auto rb = train(b, toy.ds, toy.split.train, toy.split.dev, tc);
    CHECK(ra.to_json() == rb.to_json());
    CHECK(ra.log.size() == 3);
    for (std::size_t e = 1; e < ra.log.size(); ++e) {
      CHECK(ra.log[e].mean_loss <= ra.log[e - 1].mean_loss);
    }
    std::size_t lines = 0;
    std::istringstream in(log.str());
    for (std::string line; std::getline(in, line);) {
      CHECK(nlohmann::json::parse(line).contains("dev_f1"));
      ++lines;
    }
    CHECK(lines == 3);
    // The model keeps its best-epoch parameters.
    const auto scores = predict(a, toy.ds, toy.split.dev);
    const auto dev = labels_of(toy.ds, toy.split.dev);
    CHECK(score_metrics(scores, dev, ra.threshold).f1 == doctest::Approx(ra.best_dev_f1));
  }
  SUBCASE("a non-finite loss names its coordinates") {
    auto broken = toy.ds;
    for (auto& w : broken.windows) w.gaze[0][0] = std::numeric_limits<double>::quiet_NaN();
    model::DetectorModel m(toy_model(toy.vocab_size));
    try {
      train(m, broken, toy.split.train, toy.split.dev, tc);
      FAIL("expected a training error");
    } catch (const TrainError& e) {
      CHECK(std::string(e.what()).find("epoch 0, batch 0") != std::string::npos);
    }
  }
}

TEST_CASE("method names") {
  for (auto m : all_methods()) CHECK(method_from_string(to_string(m)) == m);
  CHECK(all_methods().size() == 13);
  CHECK_THROWS_AS(method_from_string("svm2"), std::invalid_argument);
  CHECK(is_neural(Method::kNoKnowledge));
  CHECK_FALSE(is_neural(Method::kNgram3));
}

TEST_CASE("ablations remove parameters") {
  const auto base = toy_model(64);
  const auto count = [&](Method m) {
    return model::DetectorModel(method_config(m, base)).parameters().scalar_count();
  };
  const auto full = count(Method::kFull);
  CHECK(count(Method::kRandomText) == full);
  CHECK(count(Method::kNoText) < full);
  CHECK(count(Method::kNoGaze) < full);
  CHECK(count(Method::kNoKnowledge) < full);
}

TEST_CASE("default split specs") {
  const auto toy = toy_dataset();
  const auto mixed = data::default_split_spec(toy.ds, data::SplitMode::kMixed, 3);
  CHECK(mixed.dev_ids.empty());
  // Two documents cannot fill train, dev and test.
  CHECK_THROWS_AS(data::default_split_spec(toy.ds, data::SplitMode::kCrossDocument, 3),
                  data::DatasetError);

  data::Dataset ds;
  for (int d = 0; d < 20; ++d) {
    data::WindowRecord w;
    w.user_id = "u" + std::to_string(d % 4);
    w.doc_id = "doc" + std::to_string(d);
    ds.windows.push_back(w);
    data::LabeledSample s;
    s.record = std::size_t(d);
    ds.samples.push_back(s);
  }
  const auto spec = data::default_split_spec(ds, data::SplitMode::kCrossDocument, 3);
  CHECK(spec.test_ids.size() == 2);
  CHECK(spec.dev_ids.size() == 2);
  CHECK(spec.to_json() == data::default_split_spec(ds, data::SplitMode::kCrossDocument, 3).to_json());
  const auto sp = data::split(ds, spec);
  CHECK(sp.test.size() == 2);
  CHECK(sp.dev.size() == 2);
  CHECK(sp.train.size() == 16);
  const auto users = data::default_split_spec(ds, data::SplitMode::kCrossUser, 3);
  CHECK(users.test_ids.size() == 1);
  CHECK(users.dev_ids.size() == 1);
  CHECK(users.test_ids != users.dev_ids);
}

TEST_CASE("suite report") {
  const auto toy = toy_dataset();
  SuiteConfig config;
  config.modes = {data::SplitMode::kMixed, data::SplitMode::kCrossUser};
  config.methods = {Method::kFull, Method::kNgram2, Method::kDistance, Method::kLogistic,
                    Method::kRandom, Method::kSvm};
  config.model = toy_model(toy.vocab_size);
  config.train.epochs = 2;
  config.train.batch_size = 8;
  config.train.patience = 2;
  config.train.lr_backbone = 1e-3;
  config.split_seed = 1;

  std::ostringstream log;
  const auto report = run_suite(toy.ds, toy.docs, config, &log);
  REQUIRE(report.rows.size() == 12);

  SUBCASE("one row per method and mode, in order") {
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
      CHECK(report.rows[i].mode == config.modes[i / 6]);
      CHECK(report.rows[i].method == config.methods[i % 6]);
    }
    CHECK(report.find(Method::kNgram2, data::SplitMode::kMixed) == &report.rows[1]);
    CHECK(report.find(Method::kNoGaze, data::SplitMode::kMixed) == nullptr);
  }
  SUBCASE("failures and external rows are annotated") {
    for (const auto& row : report.rows) {
      if (row.method == Method::kSvm) {
        CHECK(row.status == "external");
      } else if (row.mode == data::SplitMode::kCrossUser) {
        // Two users cannot fill three parts.
        CHECK(row.status == "failed");
        CHECK(row.error.find("distinct ids") != std::string::npos);
      } else {
        CHECK(row.status == "ok");
      }
    }
    CHECK(report.splits.at("cross_user").contains("error"));
  }
  SUBCASE("metric identities hold on every scored row") {
    for (const auto& row : report.rows) {
      if (row.status != "ok") continue;
      const auto& m = row.test;
      const auto& c = m.confusion;
      CHECK(m.accuracy == doctest::Approx(100.0 * double(c.tp + c.tn) / double(c.total())));
      if (m.precision + m.recall > 0) {
        CHECK(m.f1 == doctest::Approx(2 * m.precision * m.recall / (m.precision + m.recall)));
      }
      CHECK(m.triggered_rate * 100.0 == doctest::Approx(m.recall));
      CHECK(c.total() == toy.split.test.size());
    }
  }
  SUBCASE("json, table and log") {
    const auto j = report.to_json();
    CHECK(j.at("rows").size() == 12);
    CHECK(j.at("rows")[0].at("test").contains("f1"));
    CHECK(j.at("rows")[5].at("status") == "external");
    CHECK(j.at("imbalance").at("ratio").get<double>() == doctest::Approx(report.imbalance.ratio));
    std::size_t lines = 0;
    std::istringstream table(report.table());
    for (std::string line; std::getline(table, line);) ++lines;
    CHECK(lines == 12 + 2);
    std::size_t epochs = 0, done = 0;
    std::istringstream in(log.str());
    for (std::string line; std::getline(in, line);) {
      const auto e = nlohmann::json::parse(line);
      CHECK(e.contains("method"));
      CHECK(e.contains("mode"));
      if (e.contains("dev_f1") && e.contains("epoch")) ++epochs;
      if (e.value("event", "") == "run_done") ++done;
    }
    CHECK(epochs == 2);
    CHECK(done == 7);
  }
  SUBCASE("concurrent runs give the same report") {
    auto parallel = config;
    parallel.jobs = 3;
    CHECK(run_suite(toy.ds, toy.docs, parallel).to_json() == report.to_json());
  }
}
