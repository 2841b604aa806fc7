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

#include <string_view>
#include <vector>

namespace gazelex::gaze {

enum class Source { kTracker, kWebcam };

std::string_view to_string(Source source);
Source source_from_string(std::string_view name);

/// One gaze coordinate in screen pixels (+x right, +y down), timestamped in
/// milliseconds since stream start.
struct GazeSample {
  double t_ms = 0.0;
  double x = 0.0;
  double y = 0.0;
  Source source = Source::kTracker;

  bool operator==(const GazeSample&) const = default;
};

using GazeStream = std::vector<GazeSample>;

struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  /// Throws std::invalid_argument unless x_min <= x_max and y_min <= y_max.
  static BoundingBox checked(double x_min, double y_min, double x_max, double y_max);

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double center_x() const { return (x_min + x_max) / 2.0; }
  double center_y() const { return (y_min + y_max) / 2.0; }
  /// Inclusive on all four edges.
  bool contains(double x, double y) const {
    return x_min <= x && x <= x_max && y_min <= y && y <= y_max;
  }
  /// Closed-box intersection: touching edges count.
  bool intersects(const BoundingBox& other) const {
    return x_min <= other.x_max && other.x_min <= x_max && y_min <= other.y_max &&
           other.y_min <= y_max;
  }

  bool operator==(const BoundingBox&) const = default;
};

enum class WindowStatus { kAccepted, kRejectedUnstable, kRejectedEmpty };

std::string_view to_string(WindowStatus status);

/// A 1 s core segment plus its context extended by up to one second on each
/// side (clipped at the stream ends).
struct GazeWindow {
  std::size_t index = 0;
  double core_start_ms = 0.0;
  double core_end_ms = 0.0;
  std::vector<GazeSample> core_samples;
  std::vector<GazeSample> extended_samples;
  WindowStatus status = WindowStatus::kAccepted;

  std::size_t n_g() const { return extended_samples.size(); }
};

}  // namespace gazelex::gaze
