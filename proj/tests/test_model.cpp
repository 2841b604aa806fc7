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
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "gazelex/model/detector.hpp"
#include "gazelex/tensor/optim.hpp"

using namespace gazelex;
using namespace gazelex::model;
using tensor::Tensor;

namespace {

ModelConfig toy_config() {
  ModelConfig c;
  c.d_model = 16;
  c.n_heads = 2;
  c.n_enc_layers = 1;
  c.n_dec_layers = 1;
  c.n_text_layers = 1;
  c.ffn_mult = 2;
  c.knowledge_dim = 4;
  c.vocab_size = 30;
  c.seed = 3;
  return c;
}

// Random batch; row r keeps gaze_len - r gaze samples and n_tokens - r tokens.
WindowBatch random_batch(std::size_t b, std::size_t lg, std::size_t t, std::uint32_t seed,
                         std::size_t vocab = 30) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::uniform_int_distribution<std::int64_t> id(0, static_cast<std::int64_t>(vocab) - 1);
  auto w = WindowBatch::empty(b, lg, t);
  for (std::size_t r = 0; r < b; ++r) {
    const std::size_t ng = lg - std::min(r, lg - 1), nt = t - std::min(r, t - 1);
    for (std::size_t i = 0; i < ng; ++i) {
      for (std::size_t c = 0; c < 4; ++c) w.gaze[(r * lg + i) * 4 + c] = u(rng);
      w.gaze_time[r * lg + i] = double(i);
      w.gaze_mask[r * lg + i] = 1;
    }
    for (std::size_t i = 0; i < nt; ++i) {
      const std::size_t k = r * t + i;
      for (std::size_t c = 0; c < 4; ++c) w.token_feats[k * 4 + c] = u(rng);
      w.token_ids[k] = id(rng);
      w.tf_bin[k] = static_cast<std::int64_t>(u(rng) * 15.99);
      w.pos[k] = static_cast<std::int64_t>(u(rng) * 11.99);
      w.ner[k] = static_cast<std::int64_t>(u(rng) * 4.99);
      w.log_tf[k] = u(rng) * 5;
      w.token_mask[k] = 1;
      w.loss_mask[k] = i % 2 == 0 ? 1 : 0;
      w.labels[k] = u(rng) < 0.3 ? 1 : 0;
    }
  }
  return w;
}

// Fill padded positions with garbage.
void scramble_padding(WindowBatch& w, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n(0, 50);
  for (std::size_t i = 0; i < w.gaze_mask.size(); ++i) {
    if (w.gaze_mask[i] == 0) {
      for (std::size_t c = 0; c < 4; ++c) w.gaze[i * 4 + c] = n(rng);
      w.gaze_time[i] = n(rng);
    }
  }
  for (std::size_t i = 0; i < w.token_mask.size(); ++i) {
    if (w.token_mask[i] == 0) {
      for (std::size_t c = 0; c < 4; ++c) w.token_feats[i * 4 + c] = n(rng);
      w.token_ids[i] = 7;
      w.tf_bin[i] = 3;
      w.log_tf[i] = n(rng);
    }
  }
}

double max_abs_diff_masked(const Tensor& a, const Tensor& b, const std::vector<double>& mask,
                           std::size_t width) {
  double m = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == 0) continue;
    for (std::size_t j = 0; j < width; ++j) {
      m = std::max(m, std::abs(a.values()[i * width + j] - b.values()[i * width + j]));
    }
  }
  return m;
}

// Moves every parameter to a generic point so attention is far from uniform
// and gradients sit well above finite-difference round-off.
void randomize(DetectorModel& m, std::uint32_t seed, double sigma = 0.3) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n(0, sigma);
  for (auto& p : m.parameters().all()) {
    for (auto& v : p.tensor.mutable_values()) v += n(rng);
  }
}

std::vector<Tensor> leaves_of(DetectorModel& m) {
  std::vector<Tensor> out;
  for (auto& p : m.parameters().all()) out.push_back(p.tensor);
  return out;
}

}  // namespace

TEST_CASE("default shapes") {
  ModelConfig c;
  c.vocab_size = 100;
  DetectorModel m(c);
  auto batch = random_batch(2, 180, 64, 1, 100);
  tensor::NoGradGuard ng;
  const Tensor hg = m.encode_gaze(batch);
  CHECK(hg.shape() == tensor::Shape{2, 180, 64});
  const Tensor p = m.decode_tokens(hg, batch);
  CHECK(p.shape() == tensor::Shape{2, 64, 64});
  CHECK(m.encode_text(batch).shape() == tensor::Shape{2, 64, 64});
  CHECK(m.knowledge_embed(batch).shape() == tensor::Shape{2, 64, 25});
  CHECK(c.knowledge_width() == 25);
  CHECK(m.forward(batch).shape() == tensor::Shape{2, 64});
}

TEST_CASE("config invariants") {
  ModelConfig c = toy_config();
  c.n_heads = 3;
  CHECK_THROWS_AS(DetectorModel{c}, std::invalid_argument);
  c = toy_config();
  c.max_gaze_len = 181;
  CHECK_THROWS_AS(DetectorModel{c}, std::invalid_argument);
  c = toy_config();
  c.max_tokens = 65;
  CHECK_THROWS_AS(DetectorModel{c}, std::invalid_argument);
  const auto back = ModelConfig::from_json(toy_config().to_json());
  CHECK(back.to_json() == toy_config().to_json());
}

TEST_CASE("padding never leaks into unmasked outputs") {
  DetectorModel m(toy_config());
  auto a = random_batch(3, 12, 6, 2);
  auto b = a;
  scramble_padding(b, 9);
  tensor::NoGradGuard ng;
  CHECK(max_abs_diff_masked(m.encode_gaze(a), m.encode_gaze(b), a.gaze_mask, 16) == 0.0);
  CHECK(max_abs_diff_masked(m.encode_text(a), m.encode_text(b), a.token_mask, 16) == 0.0);
  CHECK(max_abs_diff_masked(m.forward(a), m.forward(b), a.token_mask, 1) == 0.0);
}

TEST_CASE("empty gaze or token rows are rejected") {
  DetectorModel m(toy_config());
  auto w = random_batch(2, 8, 4, 3);
  auto g = w;
  std::fill(g.gaze_mask.begin() + 8, g.gaze_mask.end(), 0.0);
  CHECK_THROWS_WITH_AS(m.encode_gaze(g), "empty gaze window", ModelError);
  auto t = w;
  std::fill(t.token_mask.begin(), t.token_mask.begin() + 4, 0.0);
  CHECK_THROWS_AS(m.forward(t), ModelError);
  auto bad = w;
  bad.token_ids[0] = 30;
  CHECK_THROWS_AS(m.encode_text(bad), std::out_of_range);
  bad = w;
  bad.ner[0] = 5;
  CHECK_THROWS_AS(m.knowledge_embed(bad), std::out_of_range);
}

TEST_CASE("gaze encoder gradient matches finite differences") {
  DetectorModel m(toy_config());
  randomize(m, 41);
  const auto w = random_batch(2, 6, 3, 4);
  std::vector<Tensor> enc;
  for (auto& p : m.parameters().all()) {
    if (p.name.starts_with("gaze.")) enc.push_back(p.tensor);
  }
  REQUIRE(!enc.empty());
  // Fixed random readout; a sum of squares after layer norm is nearly flat.
  std::mt19937 rng(40);
  std::normal_distribution<double> n(0, 1);
  std::vector<double> readout(2 * 6 * 16);
  for (auto& v : readout) v = n(rng);
  const Tensor r_t({2, 6, 16}, readout);
  const auto r = tensor::grad_check(
      [&] { return tensor::sum(tensor::mul(m.encode_gaze(w), r_t)); },
      enc, 1e-4, 1e-6, 3);
  CHECK(r.entries > 50);
  CHECK(r.max_relative_error < 1e-4);
}

TEST_CASE("cross-attention is live and masked tokens get no gradient") {
  DetectorModel m(toy_config());
  const auto w = random_batch(2, 10, 5, 5);
  tensor::NoGradGuard* guard = new tensor::NoGradGuard;
  const Tensor hg = m.encode_gaze(w);
  const Tensor p1 = m.decode_tokens(hg, w);
  const Tensor p0 = m.decode_tokens(Tensor::zeros(hg.shape()), w);
  delete guard;
  double diff = 0;
  for (std::size_t i = 0; i < p1.numel(); ++i) diff += std::abs(p1.values()[i] - p0.values()[i]);
  CHECK(diff > 0);

  Tensor feats(w.token_feats_tensor().shape(), w.token_feats, true);
  const Tensor p = m.decode_tokens(hg, w.gaze_mask_tensor(), feats, w.token_mask_tensor());
  tensor::sum(p).backward();
  const auto g = feats.grad();
  bool masked_zero = true, live_nonzero = false;
  for (std::size_t i = 0; i < w.token_mask.size(); ++i) {
    for (std::size_t c = 0; c < 4; ++c) {
      if (w.token_mask[i] == 0) masked_zero &= g[i * 4 + c] == 0.0;
      else live_nonzero |= g[i * 4 + c] != 0.0;
    }
  }
  CHECK(masked_zero);
  CHECK(live_nonzero);
}

TEST_CASE("text encoder is deterministic and contextual") {
  DetectorModel m(toy_config());
  auto w = random_batch(2, 4, 6, 6);
  std::fill(w.token_mask.begin(), w.token_mask.end(), 1.0);
  std::copy_n(w.token_ids.begin(), 6, w.token_ids.begin() + 6);
  tensor::NoGradGuard ng;
  const Tensor z = m.encode_text(w);
  for (std::size_t i = 0; i < 6 * 16; ++i) CHECK(z.values()[i] == z.values()[6 * 16 + i]);

  auto s = w;
  std::swap(s.token_ids[1], s.token_ids[2]);
  if (s.token_ids[1] == s.token_ids[2]) s.token_ids[1] = (s.token_ids[1] + 1) % 30;
  const Tensor zs = m.encode_text(s);
  double diff = 0;
  for (std::size_t j = 0; j < 16; ++j) {
    diff += std::abs(z.values()[4 * 16 + j] - zs.values()[4 * 16 + j]);
  }
  CHECK(diff > 0);
}

TEST_CASE("knowledge rows") {
  DetectorModel m(toy_config());
  auto w = random_batch(1, 4, 3, 7);
  w.tf_bin[1] = w.tf_bin[0];
  w.pos[1] = w.pos[0];
  w.ner[1] = w.ner[0];
  w.log_tf[1] = w.log_tf[0];
  w.tf_bin[2] = 0;
  w.log_tf[2] = 0;
  tensor::NoGradGuard ng;
  const Tensor k = m.knowledge_embed(w);
  const std::size_t nk = toy_config().knowledge_width();
  CHECK(nk == 13);
  for (std::size_t j = 0; j < nk; ++j) CHECK(k.values()[j] == k.values()[nk + j]);
  const auto& table = m.parameters().get("know.tf").tensor;
  for (std::size_t j = 0; j < 4; ++j) CHECK(k.values()[2 * nk + j] == table.values()[j]);
  CHECK(k.values()[2 * nk + nk - 1] == 0.0);
}

TEST_CASE("classifier range and zero head") {
  DetectorModel m(toy_config());
  auto w = random_batch(3, 8, 5, 8);
  for (auto& x : w.gaze) x *= 1e3;
  tensor::NoGradGuard ng;
  const Tensor p = m.forward(w);
  for (std::size_t i = 0; i < p.numel(); ++i) {
    if (w.token_mask[i] == 0) continue;
    CHECK(p.values()[i] > 0.0);
    CHECK(p.values()[i] < 1.0);
  }
  for (auto& prm : m.parameters().all()) {
    if (prm.name.starts_with("head.")) {
      for (auto& v : prm.tensor.mutable_values()) v = 0;
    }
  }
  const Tensor h = m.forward(w);
  for (std::size_t i = 0; i < h.numel(); ++i) {
    if (w.token_mask[i] != 0) CHECK(h.values()[i] == 0.5);
  }
}

TEST_CASE("end-to-end gradient check at toy dims") {
  DetectorModel m(toy_config());
  randomize(m, 42);
  const auto w = random_batch(2, 5, 4, 10);
  const auto r = tensor::grad_check(
      [&] { return focal_loss(m.forward(w), w.labels, w.token_mask, 0.9, 2.0); }, leaves_of(m),
      1e-4, 1e-6, 5);
  CHECK(r.entries > 100);
  CHECK(r.max_relative_error < 1e-4);
}

TEST_CASE("every parameter receives a finite nonzero gradient") {
  DetectorModel m(toy_config());
  const auto w = random_batch(3, 9, 6, 11);
  focal_loss(m.forward(w), w.labels, w.token_mask, 0.9, 2.0).backward();
  for (const auto& p : m.parameters().all()) {
    double mag = 0;
    bool finite = true;
    for (double g : p.tensor.grad()) {
      finite &= std::isfinite(g);
      mag += std::abs(g);
    }
    CAPTURE(p.name);
    CHECK(finite);
    CHECK(mag > 0);
  }
}

TEST_CASE("focal loss reduces to half BCE") {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> u(1e-6, 1 - 1e-6);
  for (int i = 0; i < 1000; ++i) {
    const double p = u(rng);
    const double y = u(rng) < 0.5 ? 1.0 : 0.0;
    const double one = 1.0;
    const double got =
        focal_loss(Tensor({1}, {p}), std::span(&y, 1), std::span(&one, 1), 0.5, 0.0).item();
    const double bce = -(y * std::log(p) + (1 - y) * std::log(1 - p));
    CHECK(std::abs(got - 0.5 * bce) <= 1e-12);
  }
  const double y = 1, one = 1;
  const double half =
      focal_loss(Tensor({1}, {0.5}), std::span(&y, 1), std::span(&one, 1), 0.5, 0.0).item();
  CHECK(std::abs(half - 0.34657359027997264) < 1e-15);
  CHECK(std::abs(half + 0.5 * std::log(0.5)) < 1e-15);
}

TEST_CASE("focal loss decreases toward zero as p approaches the positive label") {
  const double y = 1, one = 1;
  for (double gamma : {0.0, 0.5, 2.0, 5.0}) {
    double prev = INFINITY;
    for (double p = 0.01; p < 1.0; p += 0.01) {
      const double l =
          focal_loss(Tensor({1}, {p}), std::span(&y, 1), std::span(&one, 1), 0.9, gamma).item();
      CHECK(l >= 0);
      CHECK(l < prev);
      prev = l;
    }
    const double at1 =
        focal_loss(Tensor({1}, {1.0}), std::span(&y, 1), std::span(&one, 1), 0.9, gamma).item();
    CHECK(at1 < 1e-11);
  }
  const double zero = 0;
  CHECK_THROWS_AS(focal_loss(Tensor({1}, {0.5}), std::span(&y, 1), std::span(&zero, 1), 0.9, 2),
                  ModelError);
}

TEST_CASE("focal loss gradient") {
  std::vector<double> labels = {1, 0, 1, 0, 1};
  std::vector<double> mask = {1, 1, 0, 1, 1};
  for (double gamma : {0.0, 1.0, 2.0}) {
    const auto r = tensor::grad_check(
        [&](const Tensor& x) { return focal_loss(x, labels, mask, 0.7, gamma); },
        Tensor({5}, {0.2, 0.6, 0.5, 0.9, 0.97}, true));
    CHECK(r.max_relative_error < 1e-6);
  }
}

TEST_CASE("ablations remove parameters") {
  const auto full = DetectorModel(toy_config()).parameters().scalar_count();
  auto c = toy_config();
  c.use_text_encoder = false;
  DetectorModel nt(c);
  CHECK(nt.parameters().scalar_count() < full);
  CHECK_FALSE(nt.parameters().contains("text.tok_emb"));
  c = toy_config();
  c.use_gaze_encoder = false;
  DetectorModel ng(c);
  CHECK(ng.parameters().scalar_count() < full);
  CHECK_FALSE(ng.parameters().contains("gaze.in.w"));
  c = toy_config();
  c.use_knowledge = false;
  CHECK(DetectorModel(c).parameters().scalar_count() < full);
  const auto w = random_batch(2, 6, 4, 13);
  tensor::NoGradGuard guard;
  CHECK(ng.forward(w).shape() == tensor::Shape{2, 4});
  CHECK(nt.forward(w).shape() == tensor::Shape{2, 4});
}

TEST_CASE("forward is repeatable and survives a checkpoint round trip") {
  DetectorModel m(toy_config());
  const auto w = random_batch(2, 7, 5, 14);
  tensor::NoGradGuard ng;
  const Tensor a = m.forward(w);
  const Tensor b = m.forward(w);
  CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  const auto path = std::filesystem::temp_directory_path() / "gazelex_model_test.ckpt";
  save_model(path, m, 0xabcdef, 0.37);
  const auto back = load_model(path);
  CHECK(back.threshold == 0.37);
  CHECK(back.header.at("vocab_hash") == "0000000000abcdef");
  const Tensor c = back.model.forward(w);
  CHECK(std::equal(a.values().begin(), a.values().end(), c.values().begin()));
  std::filesystem::remove(path);
}

TEST_CASE("pretrained embedding rows load by unit") {
  DetectorModel m(toy_config());
  std::vector<std::string> units(30);
  for (std::size_t i = 0; i < 30; ++i) units[i] = "u" + std::to_string(i);
  const auto path = std::filesystem::temp_directory_path() / "gazelex_emb.txt";
  {
    std::ofstream out(path);
    out << "u4";
    for (int j = 0; j < 16; ++j) out << ' ' << j;
    out << "\nmissing";
    for (int j = 0; j < 16; ++j) out << " 1";
    out << '\n';
  }
  CHECK(m.load_embeddings(path, units) == 1);
  CHECK(m.parameters().get("text.tok_emb").tensor.values()[4 * 16 + 5] == 5.0);
  std::filesystem::remove(path);
}
