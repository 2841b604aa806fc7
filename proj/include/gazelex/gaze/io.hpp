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

#include <filesystem>
#include <iosfwd>

#include "json.hpp"

#include "gazelex/gaze/types.hpp"

namespace gazelex::gaze {

// Gaze stream files are JSON Lines, one sample per line:
//   {"t_ms": 16, "x": 412.5, "y": 230.0, "src": "tracker"}

nlohmann::json to_json(const GazeSample& sample);
GazeSample sample_from_json(const nlohmann::json& j);

GazeStream read_gaze_jsonl(std::istream& in);
GazeStream read_gaze_jsonl(const std::filesystem::path& path);
void write_gaze_jsonl(std::ostream& out, const GazeStream& stream);
void write_gaze_jsonl(const std::filesystem::path& path, const GazeStream& stream);

}  // namespace gazelex::gaze
