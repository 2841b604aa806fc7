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

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace gazelex::tensor {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class GraphError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Storage with a fixed alignment, so vectorized kernels split their loops
/// the same way on every run and results are bit-reproducible.
using Buffer = std::vector<double, Eigen::aligned_allocator<double>>;

struct TensorData;

/// Backward record of one op. `backward` reads the output gradient and
/// accumulates into the gradients of `inputs`.
struct Node {
  std::vector<std::shared_ptr<TensorData>> inputs;
  std::function<void(const TensorData& out)> backward;
};

struct TensorData {
  Shape shape;
  Buffer value;
  Buffer grad;  // empty until first accumulation
  bool requires_grad = false;
  bool consumed = false;  // set on non-leaf tensors after backward()
  std::shared_ptr<Node> node;

  /// Returns the gradient buffer, allocating zeros on first use.
  Buffer& grad_buffer();
};

/// Dense row-major float64 tensor with optional reverse-mode gradient.
///
/// Tensors are shared handles: copying a Tensor aliases the same storage.
/// Gradients accumulate across backward() calls until zero_grad(); a
/// recorded graph is consumed by backward() and calling it again on the
/// same result throws GraphError.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor from_buffer(Shape shape, Buffer values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return data_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  /// Dimension `i`; negative values index from the end.
  std::size_t dim(int i) const;
  std::size_t numel() const;

  std::span<const double> values() const;
  std::span<double> mutable_values();
  double item() const;
  double at(std::initializer_list<std::size_t> index) const;

  bool requires_grad() const;
  void set_requires_grad(bool flag);
  bool has_grad() const;
  /// Gradient view; zeros when nothing has been accumulated yet.
  std::span<const double> grad() const;
  void zero_grad();

  /// Reverse pass from a scalar result through the recorded graph.
  void backward() const;

  /// Copy of the values without a graph record.
  Tensor detach() const;

  const std::shared_ptr<TensorData>& data() const { return data_; }

 private:
  explicit Tensor(std::shared_ptr<TensorData> data) : data_(std::move(data)) {}
  friend Tensor make_result(Shape, Buffer, const std::vector<Tensor>&,
                            std::function<void(const TensorData&)>);
  std::shared_ptr<TensorData> data_;
};

/// Builds an op result. When grad mode is on and any input requires a
/// gradient, `backward` is recorded against the inputs.
Tensor make_result(Shape shape, Buffer values, const std::vector<Tensor>& inputs,
                   std::function<void(const TensorData&)> backward);

bool grad_enabled();

/// Disables graph recording on this thread for the guard's lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace gazelex::tensor
