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

#include "gazelex/tensor/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gazelex::tensor {

Adam::Adam(ParameterSet& params, AdamConfig config) : params_(params), config_(config) {
  for (const auto& p : params_.all()) {
    m_.emplace_back(p.tensor.numel(), 0.0);
    v_.emplace_back(p.tensor.numel(), 0.0);
  }
}

void Adam::step() {
  auto& all = params_.all();
  if (all.size() != m_.size()) throw std::logic_error("parameter set changed after Adam setup");
  for (const auto& p : all) {
    if (!p.tensor.has_grad()) continue;
    for (double g : p.tensor.grad()) {
      if (!std::isfinite(g)) throw std::domain_error("non-finite gradient in parameter " + p.name);
    }
  }
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(config_.beta1, t);
  const double c2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t i = 0; i < all.size(); ++i) {
    auto& p = all[i];
    if (!p.tensor.has_grad()) continue;
    const double lr = p.group == LrGroup::kEncoderDecoder ? config_.lr_encoder_decoder
                                                          : config_.lr_backbone;
    const auto g = p.tensor.grad();
    auto w = p.tensor.mutable_values();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = config_.beta1 * m[j] + (1.0 - config_.beta1) * g[j];
      v[j] = config_.beta2 * v[j] + (1.0 - config_.beta2) * g[j] * g[j];
      w[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + config_.eps);
    }
  }
}

void Adam::zero_grad() { params_.zero_grad(); }

namespace {

double relative(double a, double n, double floor) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
}

}  // namespace

GradCheckResult grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                           double eps, double floor) {
  Tensor leaf(x.shape(), std::vector<double>(x.values().begin(), x.values().end()), true);
  return grad_check([&] { return f(leaf); }, {leaf}, eps, floor);
}

GradCheckResult grad_check(const std::function<Tensor()>& f, const std::vector<Tensor>& leaves,
                           double eps, double floor, std::size_t stride) {
  for (auto leaf : leaves) leaf.zero_grad();
  f().backward();
  std::vector<std::vector<double>> analytic;
  for (const auto& leaf : leaves) analytic.emplace_back(leaf.grad().begin(), leaf.grad().end());

  GradCheckResult result;
  NoGradGuard no_grad;
  for (std::size_t li = 0; li < leaves.size(); ++li) {
    Tensor leaf = leaves[li];
    auto w = leaf.mutable_values();
    for (std::size_t j = 0; j < w.size(); j += std::max<std::size_t>(stride, 1)) {
      const double saved = w[j];
      w[j] = saved + eps;
      const double up = f().item();
      w[j] = saved - eps;
      const double down = f().item();
      w[j] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      result.max_relative_error =
          std::max(result.max_relative_error, relative(analytic[li][j], numeric, floor));
      ++result.entries;
    }
  }
  return result;
}

}  // namespace gazelex::tensor
