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

#include "gazelex/model/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "gazelex/tensor/checkpoint.hpp"
#include "gazelex/text/knowledge.hpp"

namespace gazelex::model {

using tensor::Init;
using tensor::LrGroup;
using tensor::Shape;

double ModelConfig::screen_diagonal() const {
  return std::hypot(screen_width, screen_height);
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("model config: " + m); };
  if (d_model == 0 || n_heads == 0 || d_model % n_heads != 0) {
    fail("d_model must be a positive multiple of n_heads");
  }
  if (text_width() % n_heads != 0) fail("n_r must be a multiple of n_heads");
  if (max_gaze_len == 0 || max_gaze_len > 180) fail("max_gaze_len must be in [1, 180]");
  if (max_tokens == 0 || max_tokens > 64) fail("max_tokens must be in [1, 64]");
  if (use_text_encoder && vocab_size < 2) fail("vocab_size must be set");
  if (!(alpha > 0 && alpha < 1)) fail("alpha must be in (0, 1)");
  if (!(gamma >= 0)) fail("gamma must be >= 0");
  if (!(screen_width > 0 && screen_height > 0)) fail("screen extent must be positive");
  if (ffn_mult == 0 || knowledge_dim == 0) fail("ffn_mult and knowledge_dim must be positive");
}

nlohmann::json ModelConfig::to_json() const {
  return {{"d_model", d_model},
          {"n_enc_layers", n_enc_layers},
          {"n_dec_layers", n_dec_layers},
          {"n_text_layers", n_text_layers},
          {"n_heads", n_heads},
          {"max_gaze_len", max_gaze_len},
          {"max_tokens", max_tokens},
          {"n_r", text_width()},
          {"n_k", knowledge_width()},
          {"knowledge_dim", knowledge_dim},
          {"ffn_mult", ffn_mult},
          {"vocab_size", vocab_size},
          {"alpha", alpha},
          {"gamma", gamma},
          {"screen_width", screen_width},
          {"screen_height", screen_height},
          {"seed", seed},
          {"use_text_encoder", use_text_encoder},
          {"use_gaze_encoder", use_gaze_encoder},
          {"use_knowledge", use_knowledge}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.d_model = j.value("d_model", c.d_model);
  c.n_enc_layers = j.value("n_enc_layers", c.n_enc_layers);
  c.n_dec_layers = j.value("n_dec_layers", c.n_dec_layers);
  c.n_text_layers = j.value("n_text_layers", c.n_text_layers);
  c.n_heads = j.value("n_heads", c.n_heads);
  c.max_gaze_len = j.value("max_gaze_len", c.max_gaze_len);
  c.max_tokens = j.value("max_tokens", c.max_tokens);
  c.n_r = j.value("n_r", c.n_r);
  c.knowledge_dim = j.value("knowledge_dim", c.knowledge_dim);
  c.ffn_mult = j.value("ffn_mult", c.ffn_mult);
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.alpha = j.value("alpha", c.alpha);
  c.gamma = j.value("gamma", c.gamma);
  c.screen_width = j.value("screen_width", c.screen_width);
  c.screen_height = j.value("screen_height", c.screen_height);
  c.seed = j.value("seed", c.seed);
  c.use_text_encoder = j.value("use_text_encoder", c.use_text_encoder);
  c.use_gaze_encoder = j.value("use_gaze_encoder", c.use_gaze_encoder);
  c.use_knowledge = j.value("use_knowledge", c.use_knowledge);
  return c;
}

WindowBatch WindowBatch::empty(std::size_t batch, std::size_t gaze_len, std::size_t n_tokens) {
  WindowBatch b;
  b.batch = batch;
  b.gaze_len = gaze_len;
  b.n_tokens = n_tokens;
  const std::size_t bg = batch * gaze_len, bt = batch * n_tokens;
  b.gaze.assign(bg * 4, 0.0);
  b.gaze_time.assign(bg, 0.0);
  b.gaze_mask.assign(bg, 0.0);
  b.token_feats.assign(bt * 4, 0.0);
  b.token_ids.assign(bt, 0);
  b.tf_bin.assign(bt, 0);
  b.pos.assign(bt, 0);
  b.ner.assign(bt, 0);
  b.log_tf.assign(bt, 0.0);
  b.token_mask.assign(bt, 0.0);
  b.loss_mask.assign(bt, 0.0);
  b.labels.assign(bt, 0.0);
  return b;
}

Tensor WindowBatch::gaze_tensor() const { return Tensor({batch, gaze_len, 4}, gaze); }
Tensor WindowBatch::gaze_mask_tensor() const { return Tensor({batch, gaze_len}, gaze_mask); }
Tensor WindowBatch::token_feats_tensor() const { return Tensor({batch, n_tokens, 4}, token_feats); }
Tensor WindowBatch::token_mask_tensor() const { return Tensor({batch, n_tokens}, token_mask); }

namespace {

void require_rows(const Tensor& mask, const char* what) {
  const std::size_t b = mask.dim(0), l = mask.dim(1);
  const auto m = mask.values();
  for (std::size_t i = 0; i < b; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < l && !any; ++j) any = m[i * l + j] != 0.0;
    if (!any) throw ModelError(what);
  }
}

// Sinusoidal encoding of fractional positions, [B, L, d].
Tensor time_encoding(const Tensor& positions, std::size_t d) {
  const std::size_t n = positions.numel();
  std::vector<double> out(n * d);
  const auto pv = positions.values();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; j += 2) {
      const double freq = std::pow(10000.0, -double(j) / double(d));
      out[i * d + j] = std::sin(pv[i] * freq);
      if (j + 1 < d) out[i * d + j + 1] = std::cos(pv[i] * freq);
    }
  }
  Shape s = positions.shape();
  s.push_back(d);
  return Tensor(std::move(s), std::move(out));
}

}  // namespace

DetectorModel::DetectorModel(ModelConfig config) : config_(config), params_(config.seed) {
  config_.validate();
  const std::size_t d = config_.d_model;
  const auto ed = LrGroup::kEncoderDecoder;
  const auto bb = LrGroup::kBackbone;
  if (config_.use_gaze_encoder) {
    gaze_in_ = linear("gaze.in", ed, 4, d);
    for (std::size_t i = 0; i < config_.n_enc_layers; ++i) {
      enc_.push_back(block("gaze.enc" + std::to_string(i), ed, d, false));
    }
    enc_out_ = norm("gaze.out", ed, d);
  }
  tok_in_ = linear("dec.in", ed, 4, d);
  for (std::size_t i = 0; i < config_.n_dec_layers; ++i) {
    dec_.push_back(block("dec.layer" + std::to_string(i), ed, d, config_.use_gaze_encoder));
  }
  dec_out_ = norm("dec.out", ed, d);
  const std::size_t nr = config_.text_width();
  if (config_.use_text_encoder) {
    tok_emb_ = params_.add("text.tok_emb", bb, {config_.vocab_size, nr}, Init::kTruncatedNormal);
    pos_emb_ = params_.add("text.pos_emb", bb, {config_.max_tokens, nr}, Init::kTruncatedNormal);
    for (std::size_t i = 0; i < config_.n_text_layers; ++i) {
      text_.push_back(block("text.layer" + std::to_string(i), bb, nr, false));
    }
    text_out_ = norm("text.out", bb, nr);
  }
  if (config_.use_knowledge) {
    const std::size_t kd = config_.knowledge_dim;
    tf_emb_ = params_.add("know.tf", ed, {text::kTfBins, kd}, Init::kTruncatedNormal);
    pos_tag_emb_ = params_.add("know.pos", ed, {text::kPosCount, kd}, Init::kTruncatedNormal);
    ner_emb_ = params_.add("know.ner", ed, {text::kNerCount, kd}, Init::kTruncatedNormal);
  }
  const std::size_t width =
      d + (config_.use_text_encoder ? nr : 0) + config_.knowledge_width();
  head_ = linear("head", ed, width, 1);
}

DetectorModel::Linear DetectorModel::linear(const std::string& name, LrGroup g, std::size_t in,
                                            std::size_t out) {
  return {params_.add(name + ".w", g, {in, out}, Init::kTruncatedNormal),
          params_.add(name + ".b", g, {out}, Init::kZeros)};
}

DetectorModel::Norm DetectorModel::norm(const std::string& name, LrGroup g, std::size_t width) {
  return {params_.add(name + ".gamma", g, {width}, Init::kOnes),
          params_.add(name + ".beta", g, {width}, Init::kZeros)};
}

DetectorModel::Block DetectorModel::block(const std::string& name, LrGroup g, std::size_t width,
                                          bool cross) {
  Block b;
  b.ln_self = norm(name + ".ln_self", g, width);
  b.q = linear(name + ".q", g, width, width);
  b.k = linear(name + ".k", g, width, width);
  b.v = linear(name + ".v", g, width, width);
  b.o = linear(name + ".o", g, width, width);
  b.cross = cross;
  if (cross) {
    b.ln_cross = norm(name + ".ln_cross", g, width);
    b.cq = linear(name + ".cq", g, width, width);
    b.ck = linear(name + ".ck", g, width, width);
    b.cv = linear(name + ".cv", g, width, width);
    b.co = linear(name + ".co", g, width, width);
  }
  b.ln_ffn = norm(name + ".ln_ffn", g, width);
  b.ff1 = linear(name + ".ff1", g, width, width * config_.ffn_mult);
  b.ff2 = linear(name + ".ff2", g, width * config_.ffn_mult, width);
  return b;
}

Tensor DetectorModel::apply(const Linear& l, const Tensor& x) {
  return tensor::add(tensor::matmul(x, l.w), l.b);
}

Tensor DetectorModel::apply(const Norm& n, const Tensor& x) {
  return tensor::layer_norm(x, n.gamma, n.beta);
}

Tensor DetectorModel::run_block(const Block& b, const Tensor& x, const Tensor& mask,
                                const Tensor& memory, const Tensor& memory_mask) const {
  using namespace tensor;
  const std::size_t h = config_.n_heads;
  Tensor y = apply(b.ln_self, x);
  Tensor out = add(x, apply(b.o, attention(apply(b.q, y), apply(b.k, y), apply(b.v, y), mask, h)));
  if (b.cross) {
    y = apply(b.ln_cross, out);
    out = add(out, apply(b.co, attention(apply(b.cq, y), apply(b.ck, memory),
                                         apply(b.cv, memory), memory_mask, h)));
  }
  y = apply(b.ln_ffn, out);
  return add(out, apply(b.ff2, gelu(apply(b.ff1, y))));
}

Tensor DetectorModel::encode_gaze(const WindowBatch& batch) const {
  return encode_gaze(batch.gaze_tensor(), Tensor({batch.batch, batch.gaze_len}, batch.gaze_time),
                     batch.gaze_mask_tensor());
}

Tensor DetectorModel::encode_gaze(const Tensor& gaze, const Tensor& gaze_time,
                                  const Tensor& gaze_mask) const {
  if (!config_.use_gaze_encoder) throw ModelError("gaze encoder disabled");
  if (gaze.rank() != 3 || gaze.dim(2) != 4) {
    throw tensor::ShapeError("encode_gaze: expected [B, L, 4], got " +
                             tensor::shape_string(gaze.shape()));
  }
  if (gaze.dim(1) > config_.max_gaze_len) throw ModelError("gaze window longer than max_gaze_len");
  require_rows(gaze_mask, "empty gaze window");
  Tensor x = tensor::add(apply(gaze_in_, gaze), time_encoding(gaze_time, config_.d_model));
  for (const auto& b : enc_) x = run_block(b, x, gaze_mask, {}, {});
  return tensor::mask_rows(apply(enc_out_, x), gaze_mask);
}

Tensor DetectorModel::decode_tokens(const Tensor& h_g, const WindowBatch& batch) const {
  return decode_tokens(h_g, batch.gaze_mask_tensor(), batch.token_feats_tensor(),
                       batch.token_mask_tensor());
}

Tensor DetectorModel::decode_tokens(const Tensor& h_g, const Tensor& gaze_mask,
                                    const Tensor& token_feats, const Tensor& token_mask) const {
  if (token_feats.rank() != 3 || token_feats.dim(2) != 4) {
    throw tensor::ShapeError("decode_tokens: expected [B, T, 4], got " +
                             tensor::shape_string(token_feats.shape()));
  }
  if (token_feats.dim(1) > config_.max_tokens) throw ModelError("more tokens than max_tokens");
  require_rows(token_mask, "empty token mask");
  if (config_.use_gaze_encoder && !h_g.defined()) throw ModelError("decoder needs H_g");
  Tensor x = apply(tok_in_, tensor::mask_rows(token_feats, token_mask));
  for (const auto& b : dec_) x = run_block(b, x, token_mask, h_g, gaze_mask);
  return tensor::mask_rows(apply(dec_out_, x), token_mask);
}

Tensor DetectorModel::encode_text(const WindowBatch& batch) const {
  if (!config_.use_text_encoder) throw ModelError("text encoder disabled");
  const std::size_t bsz = batch.batch, t = batch.n_tokens;
  if (t > config_.max_tokens) throw ModelError("more tokens than max_tokens");
  Tensor mask = batch.token_mask_tensor();
  require_rows(mask, "empty token mask");
  std::vector<std::int64_t> positions(bsz * t);
  for (std::size_t i = 0; i < bsz * t; ++i) positions[i] = static_cast<std::int64_t>(i % t);
  Tensor x = tensor::add(tensor::embedding(tok_emb_, batch.token_ids, {bsz, t}),
                         tensor::embedding(pos_emb_, positions, {bsz, t}));
  for (const auto& b : text_) x = run_block(b, x, mask, {}, {});
  return tensor::mask_rows(apply(text_out_, x), mask);
}

Tensor DetectorModel::knowledge_embed(const WindowBatch& batch) const {
  if (!config_.use_knowledge) throw ModelError("knowledge embeddings disabled");
  const Shape lead{batch.batch, batch.n_tokens};
  Tensor log_tf({batch.batch, batch.n_tokens, 1}, batch.log_tf);
  return tensor::concat_last({tensor::embedding(tf_emb_, batch.tf_bin, lead),
                              tensor::embedding(pos_tag_emb_, batch.pos, lead),
                              tensor::embedding(ner_emb_, batch.ner, lead), log_tf});
}

Tensor DetectorModel::classify(const Tensor& p, const Tensor& z, const Tensor& k) const {
  std::vector<Tensor> parts;
  for (const auto* t : {&p, &z, &k}) {
    if (t->defined()) parts.push_back(*t);
  }
  if (parts.empty()) throw ModelError("classify: no inputs");
  Tensor h = parts.size() == 1 ? parts[0] : tensor::concat_last(parts);
  if (h.dim(-1) != head_.w.dim(0)) {
    throw tensor::ShapeError("classify: concatenated width " + std::to_string(h.dim(-1)) +
                             " does not match head input " + std::to_string(head_.w.dim(0)));
  }
  Tensor logits = apply(head_, h);
  return tensor::sigmoid(tensor::reshape(logits, {h.dim(0), h.dim(1)}));
}

Tensor DetectorModel::forward(const WindowBatch& batch) const {
  Tensor h_g;
  if (config_.use_gaze_encoder) h_g = encode_gaze(batch);
  Tensor p = decode_tokens(h_g, batch);
  Tensor z, k;
  if (config_.use_text_encoder) z = encode_text(batch);
  if (config_.use_knowledge) k = knowledge_embed(batch);
  return tensor::mul(classify(p, z, k), batch.token_mask_tensor());
}

std::size_t DetectorModel::load_embeddings(const std::filesystem::path& path,
                                           const std::vector<std::string>& vocab_units) {
  if (!config_.use_text_encoder) throw ModelError("text encoder disabled");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embeddings " + path.string());
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < vocab_units.size(); ++i) index.emplace(vocab_units[i], i);
  const std::size_t nr = config_.text_width();
  auto table = tok_emb_.mutable_values();
  std::size_t loaded = 0;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string unit;
    if (!(ss >> unit)) continue;
    std::vector<double> row;
    double v;
    while (ss >> v) row.push_back(v);
    if (row.size() != nr) {
      throw std::runtime_error("embedding row for '" + unit + "' has " +
                               std::to_string(row.size()) + " values, expected " +
                               std::to_string(nr));
    }
    auto it = index.find(unit);
    if (it == index.end() || it->second >= config_.vocab_size) continue;
    std::copy(row.begin(), row.end(), table.begin() + static_cast<long>(it->second * nr));
    ++loaded;
  }
  return loaded;
}

Tensor focal_loss(const Tensor& p, std::span<const double> labels, std::span<const double> mask,
                  double alpha, double gamma) {
  const std::size_t n = p.numel();
  if (labels.size() != n || mask.size() != n) {
    throw tensor::ShapeError("focal_loss: " + std::to_string(n) + " predictions, " +
                             std::to_string(labels.size()) + " labels, " +
                             std::to_string(mask.size()) + " mask entries");
  }
  constexpr double kLo = 1e-12, kHi = 1.0 - 1e-12;
  double count = 0.0;
  for (double m : mask) count += m != 0.0 ? 1.0 : 0.0;
  if (count == 0.0) throw ModelError("focal_loss: empty mask");
  const auto pv = p.values();
  double total = 0.0;
  tensor::Buffer dldp(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i] == 0.0) continue;
    const double y = labels[i];
    const double q = std::clamp(pv[i], kLo, kHi);
    const double lq = std::log(q), l1q = std::log(1.0 - q);
    const double pos_w = std::pow(1.0 - q, gamma), neg_w = std::pow(q, gamma);
    total += -alpha * y * pos_w * lq - (1.0 - alpha) * (1.0 - y) * neg_w * l1q;
    if (pv[i] < kLo || pv[i] > kHi) continue;
    const double dpos = (gamma == 0.0 ? 0.0 : -gamma * std::pow(1.0 - q, gamma - 1.0) * lq) +
                        pos_w / q;
    const double dneg = (gamma == 0.0 ? 0.0 : gamma * std::pow(q, gamma - 1.0) * l1q) -
                        neg_w / (1.0 - q);
    dldp[i] = (-alpha * y * dpos - (1.0 - alpha) * (1.0 - y) * dneg) / count;
  }
  auto pd = p.data();
  return tensor::make_result({}, {total / count}, {p},
                             [pd, dldp = std::move(dldp)](const tensor::TensorData& o) {
                               if (!pd->requires_grad) return;
                               auto& g = pd->grad_buffer();
                               for (std::size_t i = 0; i < dldp.size(); ++i) {
                                 g[i] += o.grad[0] * dldp[i];
                               }
                             });
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void save_model(const std::filesystem::path& path, const DetectorModel& model,
                std::uint64_t vocab_hash, double threshold, const nlohmann::json& extra) {
  nlohmann::json header = extra.is_object() ? extra : nlohmann::json::object();
  header["model_config"] = model.config().to_json();
  header["vocab_hash"] = hash_hex(vocab_hash);
  header["threshold"] = threshold;
  tensor::save_checkpoint(path, header, model.parameters());
}

LoadedModel load_model(const std::filesystem::path& path) {
  auto ckpt = tensor::load_checkpoint(path);
  LoadedModel out{DetectorModel(ModelConfig::from_json(ckpt.header.at("model_config"))),
                  ckpt.header.value("threshold", 0.5), ckpt.header};
  tensor::restore_parameters(ckpt, out.model.parameters());
  return out;
}

}  // namespace gazelex::model
