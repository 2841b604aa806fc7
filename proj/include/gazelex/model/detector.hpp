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
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "gazelex/tensor/ops.hpp"
#include "gazelex/tensor/parameter.hpp"

namespace gazelex::model {

using tensor::Tensor;

struct ModelConfig {
  std::size_t d_model = 64;
  std::size_t n_enc_layers = 2;
  std::size_t n_dec_layers = 2;
  std::size_t n_text_layers = 2;
  std::size_t n_heads = 4;
  std::size_t max_gaze_len = 180;
  std::size_t max_tokens = 64;
  /// Text hidden width; 0 means d_model.
  std::size_t n_r = 0;
  /// Width of each categorical knowledge embedding.
  std::size_t knowledge_dim = 8;
  std::size_t ffn_mult = 4;
  std::size_t vocab_size = 0;
  double alpha = 0.9;
  double gamma = 2.0;
  /// Screen extent used to normalize pixel inputs.
  double screen_width = 1280.0;
  double screen_height = 800.0;
  std::uint64_t seed = 0;

  // Structural ablations: a disabled component has no parameters.
  bool use_text_encoder = true;
  bool use_gaze_encoder = true;
  bool use_knowledge = true;

  std::size_t text_width() const { return n_r == 0 ? d_model : n_r; }
  std::size_t knowledge_width() const { return use_knowledge ? 3 * knowledge_dim + 1 : 0; }
  double screen_diagonal() const;

  /// Throws std::invalid_argument on violated invariants.
  void validate() const;
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

/// Padded model input. Row-major layouts:
///   gaze        [B, Lg, 4]  smoothed x, smoothed y, raw x, raw y (screen units)
///   gaze_time   [B, Lg]     sample time in 60 Hz sample periods from the
///                           start of the extended span
///   token_feats [B, T, 4]   w_x, w_y (screen units), d / diagonal, t / n_g
/// Masks hold 1 for real positions. `loss_mask` marks candidate-word tokens;
/// other real tokens are context only.
struct WindowBatch {
  std::size_t batch = 0;
  std::size_t gaze_len = 0;
  std::size_t n_tokens = 0;
  std::vector<double> gaze;
  std::vector<double> gaze_time;
  std::vector<double> gaze_mask;
  std::vector<double> token_feats;
  std::vector<std::int64_t> token_ids;
  std::vector<std::int64_t> tf_bin;
  std::vector<std::int64_t> pos;
  std::vector<std::int64_t> ner;
  std::vector<double> log_tf;
  std::vector<double> token_mask;
  std::vector<double> loss_mask;
  std::vector<double> labels;

  /// Zero-filled batch of the given dimensions.
  static WindowBatch empty(std::size_t batch, std::size_t gaze_len, std::size_t n_tokens);
  Tensor gaze_tensor() const;
  Tensor gaze_mask_tensor() const;
  Tensor token_feats_tensor() const;
  Tensor token_mask_tensor() const;
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gaze encoder, cross-attention token decoder, text encoder, knowledge
/// embeddings and a single affine classifier over their concatenation.
class DetectorModel {
 public:
  explicit DetectorModel(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  tensor::ParameterSet& parameters() { return params_; }
  const tensor::ParameterSet& parameters() const { return params_; }

  /// [B, Lg, d_model]. Throws ModelError "empty gaze window" when a row has
  /// no unmasked sample.
  Tensor encode_gaze(const WindowBatch& batch) const;
  Tensor encode_gaze(const Tensor& gaze, const Tensor& gaze_time, const Tensor& gaze_mask) const;

  /// [B, T, d_model]. `h_g` may be undefined when the gaze encoder is
  /// disabled.
  Tensor decode_tokens(const Tensor& h_g, const WindowBatch& batch) const;
  Tensor decode_tokens(const Tensor& h_g, const Tensor& gaze_mask, const Tensor& token_feats,
                       const Tensor& token_mask) const;

  /// [B, T, n_r]. Throws std::out_of_range for an id outside the vocabulary.
  Tensor encode_text(const WindowBatch& batch) const;

  /// [B, T, n_k]: tf_bin, pos and ner embeddings plus the raw log frequency.
  Tensor knowledge_embed(const WindowBatch& batch) const;

  /// Token probabilities [B, T] from the enabled parts; undefined tensors are
  /// skipped.
  Tensor classify(const Tensor& p, const Tensor& z, const Tensor& k) const;

  /// Full forward pass: token probabilities [B, T], zero at masked tokens.
  Tensor forward(const WindowBatch& batch) const;

  /// Copies rows of a pretrained table into the token embedding. Text format:
  /// one unit per line, "unit v1 ... v_{n_r}". Returns the number of rows
  /// loaded.
  std::size_t load_embeddings(const std::filesystem::path& path,
                              const std::vector<std::string>& vocab_units);

 private:
  struct Linear {
    Tensor w, b;
  };
  struct Norm {
    Tensor gamma, beta;
  };
  struct Block {
    Norm ln_self;
    Linear q, k, v, o;
    Norm ln_cross;
    Linear cq, ck, cv, co;
    Norm ln_ffn;
    Linear ff1, ff2;
    bool cross = false;
  };

  Linear linear(const std::string& name, tensor::LrGroup g, std::size_t in, std::size_t out);
  Norm norm(const std::string& name, tensor::LrGroup g, std::size_t width);
  Block block(const std::string& name, tensor::LrGroup g, std::size_t width, bool cross);

  static Tensor apply(const Linear& l, const Tensor& x);
  static Tensor apply(const Norm& n, const Tensor& x);
  Tensor run_block(const Block& b, const Tensor& x, const Tensor& mask, const Tensor& memory,
                   const Tensor& memory_mask) const;

  ModelConfig config_;
  tensor::ParameterSet params_;

  Linear gaze_in_;
  std::vector<Block> enc_;
  Norm enc_out_;
  Linear tok_in_;
  std::vector<Block> dec_;
  Norm dec_out_;
  Tensor tok_emb_, pos_emb_;
  std::vector<Block> text_;
  Norm text_out_;
  Tensor tf_emb_, pos_tag_emb_, ner_emb_;
  Linear head_;
};

/// Mean over unmasked tokens of
///   -alpha * y * (1-p)^gamma * log p - (1-alpha) * (1-y) * p^gamma * log(1-p),
/// with p clamped to [1e-12, 1 - 1e-12] before the logs. Throws ModelError
/// when the mask selects nothing.
Tensor focal_loss(const Tensor& p, std::span<const double> labels, std::span<const double> mask,
                  double alpha, double gamma);

struct LoadedModel {
  DetectorModel model;
  double threshold = 0.5;
  nlohmann::json header;
};

/// Checkpoint header: {"model_config", "vocab_hash", "threshold", ...extra}.
void save_model(const std::filesystem::path& path, const DetectorModel& model,
                std::uint64_t vocab_hash, double threshold, const nlohmann::json& extra = {});
LoadedModel load_model(const std::filesystem::path& path);

std::string hash_hex(std::uint64_t h);

}  // namespace gazelex::model
