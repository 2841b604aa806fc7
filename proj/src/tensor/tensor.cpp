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

#include "gazelex/tensor/tensor.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace gazelex::tensor {

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ", ";
    out << shape[i];
  }
  out << ']';
  return out.str();
}

Buffer& TensorData::grad_buffer() {
  if (grad.empty()) grad.assign(value.size(), 0.0);
  return grad;
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad)
    : Tensor(from_buffer(std::move(shape), Buffer(values.begin(), values.end()), requires_grad)) {}

Tensor Tensor::from_buffer(Shape shape, Buffer values, bool requires_grad) {
  if (shape_numel(shape) != values.size()) {
    throw ShapeError("tensor shape " + shape_string(shape) + " does not match " +
                     std::to_string(values.size()) + " values");
  }
  auto data = std::make_shared<TensorData>();
  data->shape = std::move(shape);
  data->value = std::move(values);
  data->requires_grad = requires_grad;
  return Tensor(std::move(data));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const auto n = shape_numel(shape);
  return from_buffer(std::move(shape), Buffer(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor(Shape{}, {value}, requires_grad);
}

const Shape& Tensor::shape() const {
  if (!data_) throw GraphError("use of undefined tensor");
  return data_->shape;
}

std::size_t Tensor::dim(int i) const {
  const auto& s = shape();
  const int r = static_cast<int>(s.size());
  const int k = i < 0 ? r + i : i;
  if (k < 0 || k >= r) {
    throw ShapeError("dimension " + std::to_string(i) + " out of range for shape " +
                     shape_string(s));
  }
  return s[static_cast<std::size_t>(k)];
}

std::size_t Tensor::numel() const { return shape_numel(shape()); }

std::span<const double> Tensor::values() const {
  shape();
  return data_->value;
}

std::span<double> Tensor::mutable_values() {
  shape();
  return data_->value;
}

double Tensor::item() const {
  if (numel() != 1) throw ShapeError("item() on tensor of shape " + shape_string(shape()));
  return data_->value[0];
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
  const auto& s = shape();
  if (index.size() != s.size()) throw ShapeError("index rank mismatch for " + shape_string(s));
  std::size_t flat = 0;
  std::size_t k = 0;
  for (auto i : index) {
    if (i >= s[k]) throw ShapeError("index out of range for " + shape_string(s));
    flat = flat * s[k] + i;
    ++k;
  }
  return data_->value[flat];
}

bool Tensor::requires_grad() const { return data_ && data_->requires_grad; }

void Tensor::set_requires_grad(bool flag) {
  shape();
  data_->requires_grad = flag;
}

bool Tensor::has_grad() const { return data_ && !data_->grad.empty(); }

std::span<const double> Tensor::grad() const {
  shape();
  return data_->grad_buffer();
}

void Tensor::zero_grad() {
  if (data_ && !data_->grad.empty()) std::fill(data_->grad.begin(), data_->grad.end(), 0.0);
}

Tensor Tensor::detach() const { return from_buffer(shape(), data_->value, false); }

void Tensor::backward() const {
  const auto& s = shape();
  if (shape_numel(s) != 1) {
    throw ShapeError("backward() requires a scalar result, got shape " + shape_string(s));
  }
  if (data_->consumed) throw GraphError("backward() called twice on a consumed graph");
  if (!data_->requires_grad) throw GraphError("backward() on a tensor that does not require grad");

  // Iterative post-order DFS over tensors that carry a node.
  std::vector<TensorData*> order;
  std::unordered_set<TensorData*> visited;
  std::vector<std::pair<TensorData*, std::size_t>> stack;
  stack.emplace_back(data_.get(), 0);
  visited.insert(data_.get());
  while (!stack.empty()) {
    auto& [t, next] = stack.back();
    if (t->node && next < t->node->inputs.size()) {
      TensorData* child = t->node->inputs[next++].get();
      if (child->node && visited.insert(child).second) stack.emplace_back(child, 0);
      continue;
    }
    order.push_back(t);
    stack.pop_back();
  }

  data_->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorData* t = *it;
    if (!t->node) continue;
    if (t->grad.empty()) t->grad_buffer();
    t->node->backward(*t);
  }
  for (TensorData* t : order) {
    if (!t->node) continue;
    t->node.reset();
    t->consumed = true;
    if (t != data_.get()) {
      t->grad.clear();
      t->grad.shrink_to_fit();
    }
  }
}

Tensor make_result(Shape shape, Buffer values, const std::vector<Tensor>& inputs,
                   std::function<void(const TensorData&)> backward) {
  Tensor out = Tensor::from_buffer(std::move(shape), std::move(values), false);
  if (!g_grad_enabled) return out;
  bool needs = false;
  for (const auto& in : inputs) needs = needs || in.requires_grad();
  if (!needs) return out;
  auto node = std::make_shared<Node>();
  node->inputs.reserve(inputs.size());
  for (const auto& in : inputs) node->inputs.push_back(in.data());
  node->backward = std::move(backward);
  out.data_->requires_grad = true;
  out.data_->node = std::move(node);
  return out;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

}  // namespace gazelex::tensor
