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

#include "gazelex/tensor/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace gazelex::tensor {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;
using StridedC = Eigen::Map<const RowMat, 0, Eigen::OuterStride<>>;
using Strided = Eigen::Map<RowMat, 0, Eigen::OuterStride<>>;

[[noreturn]] void mismatch(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_string(a.shape()) +
                   " and " + shape_string(b.shape()));
}

bool is_suffix(const Shape& whole, const Shape& tail) {
  if (tail.size() > whole.size()) return false;
  return std::equal(tail.begin(), tail.end(), whole.end() - static_cast<long>(tail.size()));
}

Buffer* grad_if(const std::shared_ptr<TensorData>& t) {
  return t->requires_grad ? &t->grad_buffer() : nullptr;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() < 2 || b.rank() < 2) mismatch("matmul", a, b);
  const std::size_t m = a.dim(-2);
  const std::size_t k = a.dim(-1);
  if (b.dim(-2) != k) mismatch("matmul", a, b);
  const std::size_t n = b.dim(-1);
  Shape out_shape = a.shape();
  out_shape.back() = n;

  if (b.rank() == 2) {
    const std::size_t rows = a.numel() / k;
    Buffer out(rows * n);
    MapMat(out.data(), rows, n).noalias() =
        CMapMat(a.values().data(), rows, k) * CMapMat(b.values().data(), k, n);
    auto ad = a.data();
    auto bd = b.data();
    return make_result(std::move(out_shape), std::move(out), {a, b},
                       [ad, bd, rows, k, n](const TensorData& o) {
                         CMapMat go(o.grad.data(), rows, n);
                         if (auto* ga = grad_if(ad)) {
                           MapMat(ga->data(), rows, k).noalias() +=
                               go * CMapMat(bd->value.data(), k, n).transpose();
                         }
                         if (auto* gb = grad_if(bd)) {
                           MapMat(gb->data(), k, n).noalias() +=
                               CMapMat(ad->value.data(), rows, k).transpose() * go;
                         }
                       });
  }

  const Shape lead_a(a.shape().begin(), a.shape().end() - 2);
  const Shape lead_b(b.shape().begin(), b.shape().end() - 2);
  if (lead_a != lead_b) mismatch("matmul", a, b);
  const std::size_t batch = shape_numel(lead_a);
  Buffer out(batch * m * n);
  for (std::size_t i = 0; i < batch; ++i) {
    MapMat(out.data() + i * m * n, m, n).noalias() =
        CMapMat(a.values().data() + i * m * k, m, k) *
        CMapMat(b.values().data() + i * k * n, k, n);
  }
  auto ad = a.data();
  auto bd = b.data();
  return make_result(std::move(out_shape), std::move(out), {a, b},
                     [ad, bd, batch, m, k, n](const TensorData& o) {
                       auto* ga = grad_if(ad);
                       auto* gb = grad_if(bd);
                       for (std::size_t i = 0; i < batch; ++i) {
                         CMapMat go(o.grad.data() + i * m * n, m, n);
                         if (ga) {
                           MapMat(ga->data() + i * m * k, m, k).noalias() +=
                               go * CMapMat(bd->value.data() + i * k * n, k, n).transpose();
                         }
                         if (gb) {
                           MapMat(gb->data() + i * k * n, k, n).noalias() +=
                               CMapMat(ad->value.data() + i * m * k, m, k).transpose() * go;
                         }
                       }
                     });
}

namespace {

enum class Binary { kAdd, kMul };

Tensor binary(const char* name, const Tensor& a, const Tensor& b, Binary kind) {
  if (!is_suffix(a.shape(), b.shape())) mismatch(name, a, b);
  const std::size_t n = a.numel();
  const std::size_t period = b.numel();
  if (period == 0) mismatch(name, a, b);
  Buffer out(n);
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = kind == Binary::kAdd ? av[i] + bv[i % period] : av[i] * bv[i % period];
  }
  auto ad = a.data();
  auto bd = b.data();
  return make_result(a.shape(), std::move(out), {a, b},
                     [ad, bd, n, period, kind](const TensorData& o) {
                       if (auto* ga = grad_if(ad)) {
                         for (std::size_t i = 0; i < n; ++i) {
                           (*ga)[i] += kind == Binary::kAdd ? o.grad[i]
                                                            : o.grad[i] * bd->value[i % period];
                         }
                       }
                       if (auto* gb = grad_if(bd)) {
                         for (std::size_t i = 0; i < n; ++i) {
                           (*gb)[i % period] += kind == Binary::kAdd
                                                    ? o.grad[i]
                                                    : o.grad[i] * ad->value[i];
                         }
                       }
                     });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return binary("add", a, b, Binary::kAdd); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary("mul", a, b, Binary::kMul); }

Tensor scale(const Tensor& a, double factor) {
  Buffer out(a.values().begin(), a.values().end());
  for (auto& v : out) v *= factor;
  auto ad = a.data();
  return make_result(a.shape(), std::move(out), {a}, [ad, factor](const TensorData& o) {
    auto& ga = ad->grad_buffer();
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += factor * o.grad[i];
  });
}

Tensor mask_rows(const Tensor& x, const Tensor& mask) {
  if (x.rank() != mask.rank() + 1 ||
      !std::equal(mask.shape().begin(), mask.shape().end(), x.shape().begin())) {
    mismatch("mask_rows", x, mask);
  }
  const std::size_t d = x.dim(-1);
  const std::size_t rows = mask.numel();
  Buffer out(x.values().begin(), x.values().end());
  std::vector<bool> keep(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    keep[r] = mask.values()[r] != 0.0;
    if (!keep[r]) std::fill_n(out.begin() + static_cast<long>(r * d), d, 0.0);
  }
  auto xd = x.data();
  return make_result(x.shape(), std::move(out), {x}, [xd, keep, d](const TensorData& o) {
    auto& gx = xd->grad_buffer();
    for (std::size_t r = 0; r < keep.size(); ++r) {
      if (!keep[r]) continue;
      for (std::size_t j = 0; j < d; ++j) gx[r * d + j] += o.grad[r * d + j];
    }
  });
}

Tensor concat_last(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_last: no inputs");
  const Shape lead(parts[0].shape().begin(), parts[0].shape().end() - 1);
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.rank() != lead.size() + 1 || !std::equal(lead.begin(), lead.end(), p.shape().begin())) {
      mismatch("concat_last", parts[0], p);
    }
    widths.push_back(p.dim(-1));
    total += p.dim(-1);
  }
  const std::size_t rows = shape_numel(lead);
  Buffer out(rows * total);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto v = parts[i].values();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(v.begin() + static_cast<long>(r * widths[i]), widths[i],
                  out.begin() + static_cast<long>(r * total + offset));
    }
    offset += widths[i];
  }
  Shape out_shape = lead;
  out_shape.push_back(total);
  std::vector<std::shared_ptr<TensorData>> datas;
  for (const auto& p : parts) datas.push_back(p.data());
  return make_result(std::move(out_shape), std::move(out), parts,
                     [datas, widths, rows, total](const TensorData& o) {
                       std::size_t off = 0;
                       for (std::size_t i = 0; i < datas.size(); ++i) {
                         if (auto* g = grad_if(datas[i])) {
                           for (std::size_t r = 0; r < rows; ++r) {
                             for (std::size_t j = 0; j < widths[i]; ++j) {
                               (*g)[r * widths[i] + j] += o.grad[r * total + off + j];
                             }
                           }
                         }
                         off += widths[i];
                       }
                     });
}

Tensor embedding(const Tensor& table, std::span<const std::int64_t> ids, const Shape& lead) {
  if (table.rank() != 2) throw ShapeError("embedding: table must be 2-D, got " +
                                          shape_string(table.shape()));
  if (shape_numel(lead) != ids.size()) {
    throw ShapeError("embedding: " + std::to_string(ids.size()) + " ids for lead shape " +
                     shape_string(lead));
  }
  const std::size_t vocab = table.dim(0);
  const std::size_t d = table.dim(1);
  Buffer out(ids.size() * d);
  const auto tv = table.values();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab) {
      throw std::out_of_range("embedding: id " + std::to_string(ids[i]) + " outside table of " +
                              std::to_string(vocab) + " rows");
    }
    std::copy_n(tv.begin() + ids[i] * static_cast<long>(d), d,
                out.begin() + static_cast<long>(i * d));
  }
  Shape out_shape = lead;
  out_shape.push_back(d);
  auto td = table.data();
  std::vector<std::int64_t> idv(ids.begin(), ids.end());
  return make_result(std::move(out_shape), std::move(out), {table},
                     [td, idv, d](const TensorData& o) {
                       auto& g = td->grad_buffer();
                       for (std::size_t i = 0; i < idv.size(); ++i) {
                         for (std::size_t j = 0; j < d; ++j) {
                           g[static_cast<std::size_t>(idv[i]) * d + j] += o.grad[i * d + j];
                         }
                       }
                     });
}

Tensor softmax_last(const Tensor& a) {
  if (a.rank() < 1) throw ShapeError("softmax_last: scalar input");
  const std::size_t d = a.dim(-1);
  const std::size_t rows = a.numel() / d;
  Buffer out(a.numel());
  const auto av = a.values();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = av.data() + r * d;
    double* y = out.data() + r * d;
    const double mx = *std::max_element(x, x + d);
    double z = 0.0;
    for (std::size_t j = 0; j < d; ++j) z += (y[j] = std::exp(x[j] - mx));
    for (std::size_t j = 0; j < d; ++j) y[j] /= z;
  }
  auto ad = a.data();
  return make_result(a.shape(), out, {a}, [ad, out, rows, d](const TensorData& o) {
    auto& g = ad->grad_buffer();
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j) dot += o.grad[r * d + j] * out[r * d + j];
      for (std::size_t j = 0; j < d; ++j) {
        g[r * d + j] += out[r * d + j] * (o.grad[r * d + j] - dot);
      }
    }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  const std::size_t d = x.dim(-1);
  if (gamma.shape() != Shape{d}) mismatch("layer_norm", x, gamma);
  if (beta.shape() != Shape{d}) mismatch("layer_norm", x, beta);
  const std::size_t rows = x.numel() / d;
  Buffer out(x.numel());
  Buffer xhat(x.numel());
  Buffer inv_std(rows);
  const auto xv = x.values();
  const auto gv = gamma.values();
  const auto bv = beta.values();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = xv.data() + r * d;
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += xr[j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= static_cast<double>(d);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      xhat[r * d + j] = (xr[j] - mu) * inv_std[r];
      out[r * d + j] = xhat[r * d + j] * gv[j] + bv[j];
    }
  }
  auto xd = x.data();
  auto gd = gamma.data();
  auto bd = beta.data();
  return make_result(
      x.shape(), std::move(out), {x, gamma, beta},
      [xd, gd, bd, xhat = std::move(xhat), inv_std = std::move(inv_std), rows,
       d](const TensorData& o) {
        auto* gx = grad_if(xd);
        auto* gg = grad_if(gd);
        auto* gb = grad_if(bd);
        Buffer dxhat(d);
        for (std::size_t r = 0; r < rows; ++r) {
          double mean_dxhat = 0.0;
          double mean_dxhat_xhat = 0.0;
          for (std::size_t j = 0; j < d; ++j) {
            const double go = o.grad[r * d + j];
            if (gg) (*gg)[j] += go * xhat[r * d + j];
            if (gb) (*gb)[j] += go;
            dxhat[j] = go * gd->value[j];
            mean_dxhat += dxhat[j];
            mean_dxhat_xhat += dxhat[j] * xhat[r * d + j];
          }
          if (!gx) continue;
          mean_dxhat /= static_cast<double>(d);
          mean_dxhat_xhat /= static_cast<double>(d);
          for (std::size_t j = 0; j < d; ++j) {
            (*gx)[r * d + j] +=
                inv_std[r] * (dxhat[j] - mean_dxhat - xhat[r * d + j] * mean_dxhat_xhat);
          }
        }
      });
}

Tensor gelu(const Tensor& a) {
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  const auto av = a.values();
  Buffer out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) {
    out[i] = 0.5 * av[i] * (1.0 + std::erf(av[i] * kInvSqrt2));
  }
  auto ad = a.data();
  return make_result(a.shape(), std::move(out), {a}, [ad, inv_sqrt_2pi](const TensorData& o) {
    auto& g = ad->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = ad->value[i];
      const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
      const double pdf = inv_sqrt_2pi * std::exp(-0.5 * x * x);
      g[i] += o.grad[i] * (cdf + x * pdf);
    }
  });
}

Tensor sigmoid(const Tensor& a) {
  const auto av = a.values();
  Buffer out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) {
    // Stable in both tails.
    out[i] = av[i] >= 0 ? 1.0 / (1.0 + std::exp(-av[i]))
                        : std::exp(av[i]) / (1.0 + std::exp(av[i]));
    // Keep the open interval (0, 1) where the true value rounds to an end.
    out[i] = std::clamp(out[i], std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
  }
  auto ad = a.data();
  return make_result(a.shape(), out, {a}, [ad, out](const TensorData& o) {
    auto& g = ad->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * out[i] * (1.0 - out[i]);
  });
}

Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, const Tensor& key_mask,
                 std::size_t n_heads) {
  if (q.rank() != 3) throw ShapeError("attention: q must be [B, Lq, D], got " +
                                      shape_string(q.shape()));
  if (k.shape() != v.shape() || k.rank() != 3) mismatch("attention", k, v);
  const std::size_t batch = q.dim(0);
  const std::size_t lq = q.dim(1);
  const std::size_t dm = q.dim(2);
  const std::size_t lk = k.dim(1);
  if (k.dim(0) != batch || k.dim(2) != dm) mismatch("attention", q, k);
  if (key_mask.shape() != Shape{batch, lk}) mismatch("attention", k, key_mask);
  if (n_heads == 0 || dm % n_heads != 0) {
    throw ShapeError("attention: width " + std::to_string(dm) + " not divisible by " +
                     std::to_string(n_heads) + " heads");
  }
  const std::size_t dh = dm / n_heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));

  // Visible key indices per batch row.
  std::vector<std::vector<std::size_t>> visible(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t j = 0; j < lk; ++j) {
      if (key_mask.values()[b * lk + j] != 0.0) visible[b].push_back(j);
    }
    if (visible[b].empty()) {
      throw std::invalid_argument("attention: batch row " + std::to_string(b) +
                                  " has no visible key");
    }
  }

  Buffer out(batch * lq * dm, 0.0);
  // Attention weights over visible keys, per (b, h): [lq, n_visible].
  std::vector<Buffer> weights(batch * n_heads);
  const auto qv = q.values();
  const auto kv = k.values();
  const auto vv = v.values();
  for (std::size_t b = 0; b < batch; ++b) {
    const auto& vis = visible[b];
    const std::size_t nv = vis.size();
    RowMat kc(nv, dm);
    RowMat vc(nv, dm);
    for (std::size_t j = 0; j < nv; ++j) {
      kc.row(static_cast<long>(j)) = CMapMat(kv.data() + (b * lk + vis[j]) * dm, 1, dm);
      vc.row(static_cast<long>(j)) = CMapMat(vv.data() + (b * lk + vis[j]) * dm, 1, dm);
    }
    for (std::size_t h = 0; h < n_heads; ++h) {
      StridedC qh(qv.data() + b * lq * dm + h * dh, lq, dh, Eigen::OuterStride<>(dm));
      auto& w = weights[b * n_heads + h];
      w.resize(lq * nv);
      MapMat s(w.data(), lq, nv);
      s.noalias() = (qh * kc.middleCols(h * dh, dh).transpose()) * inv_sqrt;
      for (std::size_t i = 0; i < lq; ++i) {
        auto row = s.row(static_cast<long>(i));
        const double mx = row.maxCoeff();
        row = (row.array() - mx).exp();
        row /= row.sum();
      }
      Strided oh(out.data() + b * lq * dm + h * dh, lq, dh, Eigen::OuterStride<>(dm));
      oh.noalias() = s * vc.middleCols(h * dh, dh);
    }
  }

  auto qd = q.data();
  auto kd = k.data();
  auto vd = v.data();
  return make_result(
      Shape{batch, lq, dm}, std::move(out), {q, k, v},
      [qd, kd, vd, visible = std::move(visible), weights = std::move(weights), batch, lq, lk, dm,
       dh, n_heads, inv_sqrt](const TensorData& o) {
        auto* gq = grad_if(qd);
        auto* gk = grad_if(kd);
        auto* gv = grad_if(vd);
        for (std::size_t b = 0; b < batch; ++b) {
          const auto& vis = visible[b];
          const std::size_t nv = vis.size();
          RowMat kc(nv, dm);
          RowMat vc(nv, dm);
          for (std::size_t j = 0; j < nv; ++j) {
            kc.row(static_cast<long>(j)) = CMapMat(kd->value.data() + (b * lk + vis[j]) * dm, 1, dm);
            vc.row(static_cast<long>(j)) = CMapMat(vd->value.data() + (b * lk + vis[j]) * dm, 1, dm);
          }
          RowMat gkc = RowMat::Zero(nv, dm);
          RowMat gvc = RowMat::Zero(nv, dm);
          for (std::size_t h = 0; h < n_heads; ++h) {
            CMapMat a(weights[b * n_heads + h].data(), lq, nv);
            StridedC go(o.grad.data() + b * lq * dm + h * dh, lq, dh, Eigen::OuterStride<>(dm));
            gvc.middleCols(h * dh, dh).noalias() += a.transpose() * go;
            RowMat da = go * vc.middleCols(h * dh, dh).transpose();
            RowMat ds = a.array() * (da.array().colwise() -
                                     (da.array() * a.array()).rowwise().sum());
            ds *= inv_sqrt;
            if (gq) {
              Strided gqh(gq->data() + b * lq * dm + h * dh, lq, dh, Eigen::OuterStride<>(dm));
              gqh.noalias() += ds * kc.middleCols(h * dh, dh);
            }
            StridedC qh(qd->value.data() + b * lq * dm + h * dh, lq, dh, Eigen::OuterStride<>(dm));
            gkc.middleCols(h * dh, dh).noalias() += ds.transpose() * qh;
          }
          for (std::size_t j = 0; j < nv; ++j) {
            if (gk) {
              MapMat(gk->data() + (b * lk + vis[j]) * dm, 1, dm) += gkc.row(static_cast<long>(j));
            }
            if (gv) {
              MapMat(gv->data() + (b * lk + vis[j]) * dm, 1, dm) += gvc.row(static_cast<long>(j));
            }
          }
        }
      });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double x : a.values()) s += x;
  auto ad = a.data();
  return make_result(Shape{}, {s}, {a}, [ad](const TensorData& o) {
    auto& g = ad->grad_buffer();
    for (auto& x : g) x += o.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  if (a.numel() == 0) throw ShapeError("mean of empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw ShapeError("reshape: cannot view " + shape_string(a.shape()) + " as " +
                     shape_string(shape));
  }
  auto ad = a.data();
  return make_result(std::move(shape), Buffer(a.values().begin(), a.values().end()),
                     {a}, [ad](const TensorData& o) {
                       auto& g = ad->grad_buffer();
                       for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
                     });
}

}  // namespace gazelex::tensor
