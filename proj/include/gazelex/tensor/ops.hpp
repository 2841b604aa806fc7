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
#include <span>
#include <vector>

#include "gazelex/tensor/tensor.hpp"

namespace gazelex::tensor {

// Differentiable forward ops. Every op throws ShapeError naming both
// shapes when its inputs are incompatible.

/// a [..., m, k] x b [k, n] -> [..., m, n], or batched with b [..., k, n]
/// sharing a's leading dimensions.
Tensor matmul(const Tensor& a, const Tensor& b);

/// Elementwise sum. `b` may equal a's shape or a's trailing dimensions
/// (broadcast, e.g. a bias vector).
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);

/// Zeroes whole rows of x [..., D] where mask [...] is 0.
Tensor mask_rows(const Tensor& x, const Tensor& mask);

Tensor concat_last(const std::vector<Tensor>& parts);

/// Rows of table [V, D] gathered by ids; result shape is lead + [D].
Tensor embedding(const Tensor& table, std::span<const std::int64_t> ids, const Shape& lead);

Tensor softmax_last(const Tensor& a);
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);
/// Exact (erf) GELU.
Tensor gelu(const Tensor& a);
Tensor sigmoid(const Tensor& a);

/// Multi-head scaled dot-product attention, softmax(QK^T / sqrt(d_head)) V,
/// per head. q [B, Lq, D], k and v [B, Lk, D], key_mask [B, Lk] with 1 for
/// visible keys. Masked keys get an additive -inf score, so their K/V values
/// never reach the output. A query row with no visible key is an error.
Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, const Tensor& key_mask,
                 std::size_t n_heads);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor reshape(const Tensor& a, Shape shape);

}  // namespace gazelex::tensor
