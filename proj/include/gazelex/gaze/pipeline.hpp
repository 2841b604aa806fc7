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

#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gazelex/gaze/types.hpp"

namespace gazelex::gaze {

class GazeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DenoiseConfig {
  /// A y-cluster holding fewer than this share of the segment's samples is
  /// a blink artefact when separated from the rest by more than
  /// `outlier_gap_lines` line heights.
  double minority_share = 0.20;
  double outlier_gap_lines = 3.0;
  /// A core whose retained y-range exceeds this many line heights is unstable.
  double unstable_range_lines = 6.0;
};

/// Splits a timestamp-sorted stream into consecutive, non-overlapping
/// windows aligned to multiples of `window_ms` from t = 0. A window is
/// emitted only when the stream covers its whole core; coverage of the last
/// sample extends by the median sampling interval. Each window's extended
/// samples add one window length before and after, clipped to the stream.
std::vector<GazeWindow> segment_windows(std::span<const GazeSample> stream,
                                        double window_ms = 1000.0);

/// Median gap between consecutive timestamps; 0 for fewer than two samples.
double median_interval(std::span<const GazeSample> stream);

/// Number of windows whose core lies before `covered_until_ms`.
std::size_t window_count(double covered_until_ms, double window_ms = 1000.0);

/// Window `index` cut from a sorted stream, as segment_windows would emit it
/// when the stream covers the window's extension.
GazeWindow cut_window(std::span<const GazeSample> stream, std::size_t index,
                      double window_ms = 1000.0);

/// Removes blink-like minority y-clusters and rejects unstable windows.
///
/// The rule runs separately on each window-length bucket of the extended
/// samples (previous, core, next), so the extension keeps the same
/// retained set its neighbouring windows would keep. Idempotent.
GazeWindow reject_or_denoise(const GazeWindow& window, double line_height,
                             const DenoiseConfig& config = {});

/// Bounding box of the retained core samples. Throws GazeError
/// "no region of interest" for a rejected window.
BoundingBox region_of_interest(const GazeWindow& window);

/// Centred moving average of x and y over `k` samples (odd). Edges shrink
/// the neighbourhood, so the output keeps the input length and timestamps.
std::vector<GazeSample> moving_average(std::span<const GazeSample> samples, std::size_t k = 5);

struct Resampled {
  std::vector<GazeSample> samples;
  bool linear_fallback = false;
};

/// Natural cubic-spline resampling of x(t), y(t) onto a uniform grid of
/// `target_hz` spanning [first, last]. With fewer than four samples the
/// interpolation falls back to piecewise-linear and sets the flag.
Resampled resample(std::span<const GazeSample> samples, double target_hz = 60.0);

/// Euclidean distance from the mean gaze point to the box centre.
double gaze_token_distance(std::span<const GazeSample> extended, const BoundingBox& box);

/// Number of samples inside the box, edges inclusive.
std::size_t gaze_duration(std::span<const GazeSample> extended, const BoundingBox& box);

/// Per-axis median absolute error of `noisy` against `reference`, after
/// spline-resampling `noisy` onto the reference timestamps that fall inside
/// its time range.
std::pair<double, double> gaze_mae(std::span<const GazeSample> reference,
                                   std::span<const GazeSample> noisy);

/// Smoothing applied before windowing: moving average then 60 Hz resampling
/// for webcam-grade streams; tracker streams pass through unchanged.
std::vector<GazeSample> prepare_stream(std::span<const GazeSample> stream, std::size_t k = 5,
                                       double target_hz = 60.0);

}  // namespace gazelex::gaze
