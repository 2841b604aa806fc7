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

#include "gazelex/gaze/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gazelex/gaze/spline.hpp"

namespace gazelex::gaze {

std::string_view to_string(Source source) {
  return source == Source::kTracker ? "tracker" : "webcam";
}

Source source_from_string(std::string_view name) {
  if (name == "tracker") return Source::kTracker;
  if (name == "webcam") return Source::kWebcam;
  throw std::invalid_argument("unknown gaze source: " + std::string(name));
}

std::string_view to_string(WindowStatus status) {
  switch (status) {
    case WindowStatus::kAccepted:
      return "accepted";
    case WindowStatus::kRejectedUnstable:
      return "rejected_unstable";
    case WindowStatus::kRejectedEmpty:
      return "rejected_empty";
  }
  return "?";
}

BoundingBox BoundingBox::checked(double x_min, double y_min, double x_max, double y_max) {
  if (!(x_min <= x_max) || !(y_min <= y_max)) {
    throw std::invalid_argument("invalid bounding box");
  }
  return BoundingBox{x_min, y_min, x_max, y_max};
}

namespace {

double median(std::vector<double> values) {
  const std::size_t n = values.size();
  std::sort(values.begin(), values.end());
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Samples kept by the minority-cluster rule, in input order.
std::vector<GazeSample> drop_minority_clusters(const std::vector<GazeSample>& samples,
                                               double line_height, const DenoiseConfig& config) {
  if (samples.size() < 2) return samples;
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return samples[a].y < samples[b].y; });
  // Clusters are maximal runs of sorted y without a gap above the bound.
  const double gap_bound = config.outlier_gap_lines * line_height;
  std::vector<std::size_t> cluster_of(samples.size());
  std::vector<std::size_t> sizes{1};
  cluster_of[order[0]] = 0;
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (samples[order[k]].y - samples[order[k - 1]].y > gap_bound) sizes.push_back(0);
    cluster_of[order[k]] = sizes.size() - 1;
    ++sizes.back();
  }
  if (sizes.size() == 1) return samples;
  const auto majority =
      static_cast<std::size_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  const double total = static_cast<double>(samples.size());
  std::vector<GazeSample> kept;
  kept.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::size_t c = cluster_of[i];
    if (c == majority || static_cast<double>(sizes[c]) >= config.minority_share * total) {
      kept.push_back(samples[i]);
    }
  }
  return kept;
}

}  // namespace

double median_interval(std::span<const GazeSample> stream) {
  if (stream.size() < 2) return 0.0;
  std::vector<double> gaps;
  gaps.reserve(stream.size() - 1);
  for (std::size_t i = 1; i < stream.size(); ++i) gaps.push_back(stream[i].t_ms - stream[i - 1].t_ms);
  auto mid = gaps.begin() + static_cast<long>(gaps.size() / 2);
  std::nth_element(gaps.begin(), mid, gaps.end());
  return *mid;
}

std::size_t window_count(double covered_until_ms, double window_ms) {
  if (!(window_ms > 0)) throw std::invalid_argument("window length must be positive");
  if (!(covered_until_ms > 0)) return 0;
  return static_cast<std::size_t>(std::floor(covered_until_ms / window_ms + 1e-9));
}

GazeWindow cut_window(std::span<const GazeSample> stream, std::size_t index, double window_ms) {
  auto lower = [&](double t) {
    return std::lower_bound(stream.begin(), stream.end(), t,
                            [](const GazeSample& s, double v) { return s.t_ms < v; });
  };
  GazeWindow w;
  w.index = index;
  w.core_start_ms = static_cast<double>(index) * window_ms;
  w.core_end_ms = w.core_start_ms + window_ms;
  w.core_samples.assign(lower(w.core_start_ms), lower(w.core_end_ms));
  w.extended_samples.assign(lower(w.core_start_ms - window_ms), lower(w.core_end_ms + window_ms));
  return w;
}

std::vector<GazeWindow> segment_windows(std::span<const GazeSample> stream, double window_ms) {
  std::vector<GazeWindow> windows;
  if (stream.empty()) return windows;
  if (!(window_ms > 0)) throw std::invalid_argument("window length must be positive");
  for (std::size_t i = 1; i < stream.size(); ++i) {
    if (stream[i].t_ms < stream[i - 1].t_ms) {
      throw std::invalid_argument("gaze stream is not timestamp-sorted");
    }
  }
  const std::size_t count = window_count(stream.back().t_ms + median_interval(stream), window_ms);
  windows.reserve(count);
  for (std::size_t k = 0; k < count; ++k) windows.push_back(cut_window(stream, k, window_ms));
  return windows;
}

GazeWindow reject_or_denoise(const GazeWindow& window, double line_height,
                             const DenoiseConfig& config) {
  if (!(line_height > 0)) throw std::invalid_argument("line height must be positive");
  GazeWindow out = window;
  out.core_samples = drop_minority_clusters(window.core_samples, line_height, config);

  // Previous and next buckets of the extension, each filtered on its own.
  std::vector<GazeSample> before;
  std::vector<GazeSample> after;
  for (const auto& s : window.extended_samples) {
    if (s.t_ms < window.core_start_ms) {
      before.push_back(s);
    } else if (s.t_ms >= window.core_end_ms) {
      after.push_back(s);
    }
  }
  out.extended_samples = drop_minority_clusters(before, line_height, config);
  out.extended_samples.insert(out.extended_samples.end(), out.core_samples.begin(),
                              out.core_samples.end());
  const auto tail = drop_minority_clusters(after, line_height, config);
  out.extended_samples.insert(out.extended_samples.end(), tail.begin(), tail.end());

  if (out.core_samples.empty()) {
    out.status = WindowStatus::kRejectedEmpty;
    return out;
  }
  const auto [lo, hi] = std::minmax_element(
      out.core_samples.begin(), out.core_samples.end(),
      [](const GazeSample& a, const GazeSample& b) { return a.y < b.y; });
  out.status = hi->y - lo->y > config.unstable_range_lines * line_height
                   ? WindowStatus::kRejectedUnstable
                   : WindowStatus::kAccepted;
  return out;
}

BoundingBox region_of_interest(const GazeWindow& window) {
  if (window.status != WindowStatus::kAccepted || window.core_samples.empty()) {
    throw GazeError("no region of interest");
  }
  BoundingBox box{window.core_samples[0].x, window.core_samples[0].y, window.core_samples[0].x,
                  window.core_samples[0].y};
  for (const auto& s : window.core_samples) {
    box.x_min = std::min(box.x_min, s.x);
    box.y_min = std::min(box.y_min, s.y);
    box.x_max = std::max(box.x_max, s.x);
    box.y_max = std::max(box.y_max, s.y);
  }
  return box;
}

std::vector<GazeSample> moving_average(std::span<const GazeSample> samples, std::size_t k) {
  if (k == 0 || k % 2 == 0) {
    throw std::invalid_argument("moving average length must be odd, got " + std::to_string(k));
  }
  const std::size_t n = samples.size();
  const std::size_t half = k / 2;
  std::vector<GazeSample> out(samples.begin(), samples.end());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) {
      sx += samples[j].x;
      sy += samples[j].y;
    }
    const auto count = static_cast<double>(hi - lo + 1);
    out[i].x = sx / count;
    out[i].y = sy / count;
  }
  return out;
}

Resampled resample(std::span<const GazeSample> samples, double target_hz) {
  if (samples.empty()) throw std::invalid_argument("resample: empty stream");
  if (!(target_hz > 0)) throw std::invalid_argument("resample: target rate must be positive");
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].t_ms > samples[i - 1].t_ms)) {
      throw std::invalid_argument("resample: timestamps must strictly increase");
    }
  }
  Resampled out;
  const double step = 1000.0 / target_hz;
  const double t0 = samples.front().t_ms;
  const double t1 = samples.back().t_ms;
  const auto n = static_cast<std::size_t>(std::floor((t1 - t0) / step + 1e-9)) + 1;
  out.samples.reserve(n);
  const Source src = samples.front().source;

  if (samples.size() < 4) {
    out.linear_fallback = true;
    std::size_t seg = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = t0 + static_cast<double>(i) * step;
      while (seg + 2 < samples.size() && samples[seg + 1].t_ms <= t) ++seg;
      if (samples.size() == 1) {
        out.samples.push_back({t, samples[0].x, samples[0].y, src});
        continue;
      }
      const auto& a = samples[seg];
      const auto& b = samples[seg + 1];
      const double u = (t - a.t_ms) / (b.t_ms - a.t_ms);
      out.samples.push_back({t, a.x + u * (b.x - a.x), a.y + u * (b.y - a.y), src});
    }
    return out;
  }

  std::vector<double> ts;
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& s : samples) {
    ts.push_back(s.t_ms);
    xs.push_back(s.x);
    ys.push_back(s.y);
  }
  const CubicSpline sx(ts, xs);
  const CubicSpline sy(ts, ys);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = t0 + static_cast<double>(i) * step;
    out.samples.push_back({t, sx(t), sy(t), src});
  }
  return out;
}

double gaze_token_distance(std::span<const GazeSample> extended, const BoundingBox& box) {
  if (extended.empty()) throw GazeError("gaze-token distance of an empty sample set");
  double sum_x = 0.0;
  double sum_y = 0.0;
  for (const auto& s : extended) {
    sum_x += s.x;
    sum_y += s.y;
  }
  const double n = static_cast<double>(extended.size());
  const double dx = sum_x / n - (box.x_min + box.x_max) / 2.0;
  const double dy = sum_y / n - (box.y_min + box.y_max) / 2.0;
  return std::sqrt(dx * dx + dy * dy);
}

std::size_t gaze_duration(std::span<const GazeSample> extended, const BoundingBox& box) {
  std::size_t count = 0;
  for (const auto& s : extended) count += box.contains(s.x, s.y) ? 1 : 0;
  return count;
}

std::pair<double, double> gaze_mae(std::span<const GazeSample> reference,
                                   std::span<const GazeSample> noisy) {
  if (reference.empty() || noisy.empty()) throw GazeError("gaze_mae: empty stream");
  std::vector<double> ts;
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& s : noisy) {
    if (!ts.empty() && s.t_ms <= ts.back()) continue;
    ts.push_back(s.t_ms);
    xs.push_back(s.x);
    ys.push_back(s.y);
  }
  std::vector<double> dx;
  std::vector<double> dy;
  if (ts.size() == 1) {
    for (const auto& r : reference) {
      if (r.t_ms == ts[0]) {
        dx.push_back(std::abs(xs[0] - r.x));
        dy.push_back(std::abs(ys[0] - r.y));
      }
    }
  } else {
    const CubicSpline sx(ts, xs);
    const CubicSpline sy(ts, ys);
    for (const auto& r : reference) {
      if (r.t_ms < ts.front() || r.t_ms > ts.back()) continue;
      dx.push_back(std::abs(sx(r.t_ms) - r.x));
      dy.push_back(std::abs(sy(r.t_ms) - r.y));
    }
  }
  if (dx.empty()) throw GazeError("gaze_mae: streams do not overlap in time");
  return {median(std::move(dx)), median(std::move(dy))};
}

std::vector<GazeSample> prepare_stream(std::span<const GazeSample> stream, std::size_t k,
                                       double target_hz) {
  if (stream.empty() || stream.front().source == Source::kTracker) {
    return {stream.begin(), stream.end()};
  }
  auto smoothed = moving_average(stream, k);
  // Drop duplicate timestamps so the spline knots strictly increase.
  smoothed.erase(std::unique(smoothed.begin(), smoothed.end(),
                             [](const GazeSample& a, const GazeSample& b) { return a.t_ms == b.t_ms; }),
                 smoothed.end());
  return resample(smoothed, target_hz).samples;
}

}  // namespace gazelex::gaze
