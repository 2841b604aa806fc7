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

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "gazelex/gaze/io.hpp"
#include "gazelex/gaze/pipeline.hpp"
#include "gazelex/gaze/spline.hpp"

using namespace gazelex::gaze;

namespace {

GazeStream uniform_stream(double seconds, double hz, double x = 100, double y = 300) {
  GazeStream s;
  for (std::size_t i = 0;; ++i) {
    const double t = std::round(static_cast<double>(i) * 1000.0 / hz);
    if (t >= seconds * 1000.0) break;
    s.push_back({t, x, y, Source::kTracker});
  }
  return s;
}

GazeWindow window_of(std::vector<GazeSample> core) {
  GazeWindow w;
  w.core_start_ms = 0;
  w.core_end_ms = 1000;
  w.core_samples = core;
  w.extended_samples = core;
  return w;
}

}  // namespace

TEST_CASE("segment_windows counts whole seconds") {
  auto s = uniform_stream(3.5, 60);
  auto w = segment_windows(s);
  // Oracle: bucket timestamps by second and keep buckets the stream passes.
  std::size_t full = 0;
  for (int k = 0; k < 4; ++k) {
    bool has_later = std::any_of(s.begin(), s.end(), [&](auto& g) { return g.t_ms >= (k + 1) * 1000; });
    full += has_later ? 1 : 0;
  }
  REQUIRE(w.size() == 3);
  CHECK(full == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(w[k].core_start_ms == 1000.0 * k);
    CHECK(w[k].core_samples.size() == 60);
    for (auto& g : w[k].core_samples) {
      CHECK(g.t_ms >= 1000.0 * k);
      CHECK(g.t_ms < 1000.0 * (k + 1));
    }
  }
  CHECK(segment_windows(uniform_stream(0.9, 60)).empty());
  CHECK(segment_windows({}).empty());
  // Left extension clipped at the stream start: [0, 2000).
  CHECK(w[0].extended_samples.front().t_ms == 0.0);
  CHECK(w[0].extended_samples.back().t_ms < 2000.0);
  CHECK(w[0].extended_samples.size() == 120);
  CHECK(w[1].extended_samples.size() == 180);
  CHECK(segment_windows(uniform_stream(3.0, 60)).size() == 3);
}

TEST_CASE("windows are disjoint and cover the stream's whole seconds") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    std::uniform_real_distribution<double> secs(0.5, 12.0);
    const double hz = trial % 2 ? 60.0 : 25.0;
    auto s = uniform_stream(secs(rng), hz);
    auto w = segment_windows(s);
    std::size_t covered = 0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      covered += w[k].core_samples.size();
      CHECK(w[k].extended_samples.size() >= w[k].core_samples.size());
      CHECK(w[k].extended_samples.back().t_ms - w[k].extended_samples.front().t_ms <= 3000.0);
      CHECK(std::includes(w[k].extended_samples.begin(), w[k].extended_samples.end(),
                          w[k].core_samples.begin(), w[k].core_samples.end(),
                          [](auto& a, auto& b) { return a.t_ms < b.t_ms; }));
    }
    const auto in_whole = std::count_if(s.begin(), s.end(), [&](auto& g) {
      return g.t_ms < 1000.0 * static_cast<double>(w.size());
    });
    CHECK(covered == static_cast<std::size_t>(in_whole));
  }
}

TEST_CASE("reject_or_denoise removes a blink cluster") {
  std::vector<GazeSample> core;
  for (int i = 0; i < 60; ++i) core.push_back({i * 16.0, 100.0 + i, i < 55 ? 300.0 : 400.0});
  auto out = reject_or_denoise(window_of(core), 20.0);
  CHECK(out.status == WindowStatus::kAccepted);
  CHECK(out.core_samples.size() == 55);
  CHECK(out.extended_samples.size() == 55);
  for (auto& g : out.core_samples) CHECK(g.y == 300.0);

  std::vector<GazeSample> flat;
  for (int i = 0; i < 60; ++i) flat.push_back({i * 16.0, 100.0 + i, 300.0});
  auto same = reject_or_denoise(window_of(flat), 20.0);
  CHECK(same.status == WindowStatus::kAccepted);
  CHECK(same.core_samples == flat);

  std::vector<GazeSample> spread;
  for (int i = 0; i < 60; ++i) spread.push_back({i * 16.0, 100.0, 300.0 + 300.0 * i / 59.0});
  CHECK(reject_or_denoise(window_of(spread), 20.0).status == WindowStatus::kRejectedUnstable);

  CHECK(reject_or_denoise(window_of({}), 20.0).status == WindowStatus::kRejectedEmpty);
  CHECK_THROWS_AS(region_of_interest(reject_or_denoise(window_of(spread), 20.0)), GazeError);
}

TEST_CASE("denoise output is a subset and the rule is idempotent") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> jitter(0, 8);
  std::bernoulli_distribution blink(0.08);
  for (int trial = 0; trial < 50; ++trial) {
    GazeStream s;
    for (int i = 0; i < 240; ++i) {
      double y = 300 + 20 * (i / 60) + jitter(rng);
      if (blink(rng)) y += 150;
      s.push_back({i * 1000.0 / 60, 200 + i + jitter(rng), y, Source::kTracker});
    }
    for (const auto& w : segment_windows(s)) {
      auto once = reject_or_denoise(w, 20.6);
      auto twice = reject_or_denoise(once, 20.6);
      CHECK(once.core_samples == twice.core_samples);
      CHECK(once.extended_samples == twice.extended_samples);
      CHECK(once.status == twice.status);
      for (auto& g : once.extended_samples) {
        CHECK(std::find(w.extended_samples.begin(), w.extended_samples.end(), g) !=
              w.extended_samples.end());
      }
      if (once.status == WindowStatus::kAccepted) {
        auto box = region_of_interest(once);
        for (auto& g : once.core_samples) CHECK(box.contains(g.x, g.y));
      }
    }
  }
}

TEST_CASE("region_of_interest is the component-wise hull") {
  CHECK(region_of_interest(window_of({{0, 10, 10}, {1, 50, 30}})) == BoundingBox{10, 10, 50, 30});
  CHECK(region_of_interest(window_of({{0, 7, 9}})) == BoundingBox{7, 9, 7, 9});
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 500);
  std::vector<GazeSample> pts;
  for (int i = 0; i < 100; ++i) pts.push_back({i * 10.0, u(rng), 100 + u(rng) / 10});
  double x0 = 1e9, y0 = 1e9, x1 = -1e9, y1 = -1e9;
  for (auto& p : pts) {
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
  CHECK(region_of_interest(window_of(pts)) == BoundingBox{x0, y0, x1, y1});
}

TEST_CASE("moving average") {
  std::vector<GazeSample> s = {{0, 0, 1}, {1, 10, 1}, {2, 20, 1}};
  auto k1 = moving_average(s, 1);
  CHECK(k1 == s);
  auto k3 = moving_average(s, 3);
  CHECK(k3[0].x == 5.0);
  CHECK(k3[1].x == 10.0);
  CHECK(k3[2].x == 15.0);
  for (auto& g : k3) CHECK(g.y == 1.0);
  CHECK_THROWS_AS(moving_average(s, 4), std::invalid_argument);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-50, 50);
  std::vector<GazeSample> noisy;
  for (int i = 0; i < 200; ++i) noisy.push_back({i * 1.0, u(rng), u(rng)});
  auto sm = moving_average(noisy, 5);
  REQUIRE(sm.size() == noisy.size());
  auto [xl, xh] = std::minmax_element(noisy.begin(), noisy.end(), [](auto& a, auto& b) { return a.x < b.x; });
  for (std::size_t i = 0; i < sm.size(); ++i) {
    CHECK(sm[i].t_ms == noisy[i].t_ms);
    CHECK(sm[i].x >= xl->x);
    CHECK(sm[i].x <= xh->x);
  }
}

TEST_CASE("cubic spline resampling") {
  std::vector<GazeSample> ramp;
  for (int i = 0; i < 50; ++i) ramp.push_back({i * 40.0, i * 40.0, 7.0, Source::kWebcam});
  auto r = resample(ramp, 60);
  CHECK_FALSE(r.linear_fallback);
  CHECK(r.samples.size() == static_cast<std::size_t>(std::floor(49 * 40 / (1000.0 / 60))) + 1);
  for (auto& g : r.samples) {
    CHECK(std::abs(g.x - g.t_ms) <= 1e-9);
    CHECK(std::abs(g.y - 7.0) <= 1e-9);
  }

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-100, 100);
  std::vector<double> t, v;
  for (int i = 0; i < 30; ++i) {
    t.push_back(i * 37.0 + (i % 3));
    v.push_back(u(rng));
  }
  CubicSpline spline(t, v);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(spline(t[i]) == v[i]);

  // Knots on the output grid come back exactly.
  std::vector<GazeSample> on_grid;
  for (int i = 0; i < 10; ++i) on_grid.push_back({i * 50.0, u(rng), u(rng)});
  auto rg = resample(on_grid, 20);
  for (int i = 0; i < 10; ++i) {
    CHECK(rg.samples[i].t_ms == on_grid[i].t_ms);
    CHECK(rg.samples[i].x == on_grid[i].x);
    CHECK(rg.samples[i].y == on_grid[i].y);
  }

  auto few = resample(std::vector<GazeSample>{{0, 0, 0}, {100, 10, 20}}, 60);
  CHECK(few.linear_fallback);
  CHECK(few.samples[3].x == doctest::Approx(50.0 / 100 * 10));
  CHECK_THROWS_AS(resample(std::vector<GazeSample>{{0, 0, 0}, {0, 1, 1}, {5, 1, 1}, {9, 1, 1}}, 60),
                  std::invalid_argument);
}

TEST_CASE("gaze-token distance and duration") {
  std::vector<GazeSample> at20 = {{0, 10, 10}, {1, 30, 30}};
  CHECK(gaze_token_distance(at20, {0, 0, 40, 40}) == 0.0);
  std::vector<GazeSample> mean_100_50 = {{0, 90, 40}, {1, 110, 60}};
  CHECK(gaze_token_distance(mean_100_50, {30, 0, 50, 20}) ==
        doctest::Approx(std::sqrt(60.0 * 60 + 40.0 * 40)).epsilon(1e-15));
  CHECK(std::abs(gaze_token_distance(mean_100_50, {30, 0, 50, 20}) - 72.11102550927978) < 1e-12);
  CHECK_THROWS_AS(gaze_token_distance({}, {0, 0, 1, 1}), GazeError);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 100);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<GazeSample> s;
    for (int i = 0; i < 180; ++i) s.push_back({i * 1.0, u(rng), u(rng)});
    BoundingBox box{u(rng) / 2, u(rng) / 2, 50 + u(rng) / 2, 50 + u(rng) / 2};
    const double dx = u(rng) - 50, dy = u(rng) - 50;
    auto moved = s;
    for (auto& g : moved) {
      g.x += dx;
      g.y += dy;
    }
    BoundingBox moved_box{box.x_min + dx, box.y_min + dy, box.x_max + dx, box.y_max + dy};
    const double d = gaze_token_distance(s, box);
    CHECK(d >= 0.0);
    CHECK(std::abs(gaze_token_distance(moved, moved_box) - d) < 1e-9);
    CHECK(gaze_duration(s, box) <= s.size());
  }

  std::vector<GazeSample> s;
  for (int i = 0; i < 180; ++i) s.push_back({i * 1.0, i < 7 ? 5.0 : 500.0, 5.0});
  BoundingBox box{0, 0, 10, 10};
  std::size_t brute = 0;
  for (auto& g : s) brute += (g.x >= 0 && g.x <= 10 && g.y >= 0 && g.y <= 10) ? 1 : 0;
  CHECK(brute == 7);
  CHECK(gaze_duration(s, box) == 7);
  CHECK(gaze_duration(s, {600, 600, 700, 700}) == 0);
  CHECK(gaze_duration(s, {0, 0, 1000, 1000}) == 180);
  // Edges are inclusive.
  CHECK(gaze_duration(std::vector<GazeSample>{{0, 10, 10}}, box) == 1);
}

TEST_CASE("gaze median absolute error") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 800);
  GazeStream ref;
  for (int i = 0; i < 120; ++i) ref.push_back({i * 1000.0 / 60, u(rng), u(rng)});
  auto [mx, my] = gaze_mae(ref, ref);
  CHECK(mx == 0.0);
  CHECK(my == 0.0);
  auto shifted = ref;
  for (auto& g : shifted) g.x += 10;
  auto [sx, sy] = gaze_mae(ref, shifted);
  CHECK(sx == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(sy == doctest::Approx(0.0));
  GazeStream late = {{5000, 0, 0}, {5016, 0, 0}, {5033, 0, 0}, {5050, 0, 0}};
  CHECK_THROWS_AS(gaze_mae(ref, late), GazeError);
}

TEST_CASE("gaze JSON lines round trip") {
  GazeStream s = {{0, 1.5, 2.25, Source::kTracker}, {17, 3.0, 4.0, Source::kWebcam}};
  std::stringstream io;
  write_gaze_jsonl(io, s);
  CHECK(io.str().find("\"src\":\"webcam\"") != std::string::npos);
  auto back = read_gaze_jsonl(io);
  CHECK(back == s);
  std::stringstream bad("{\"t_ms\": 5, \"x\": 1, \"y\": 1}\n{\"t_ms\": 3, \"x\": 1, \"y\": 1}\n");
  CHECK_THROWS(read_gaze_jsonl(bad));
}
