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

#include "gazelex/gaze/io.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include "gazelex/gaze/pipeline.hpp"

namespace gazelex::gaze {

nlohmann::json to_json(const GazeSample& sample) {
  return {{"t_ms", static_cast<long long>(std::llround(sample.t_ms))},
          {"x", sample.x},
          {"y", sample.y},
          {"src", std::string(to_string(sample.source))}};
}

GazeSample sample_from_json(const nlohmann::json& j) {
  GazeSample s;
  s.t_ms = j.at("t_ms").get<double>();
  s.x = j.at("x").get<double>();
  s.y = j.at("y").get<double>();
  s.source = source_from_string(j.value("src", std::string("tracker")));
  if (!std::isfinite(s.x) || !std::isfinite(s.y) || s.t_ms < 0) {
    throw std::invalid_argument("gaze sample out of range");
  }
  return s;
}

GazeStream read_gaze_jsonl(std::istream& in) {
  GazeStream stream;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      stream.push_back(sample_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error("gaze stream line " + std::to_string(lineno) + ": " + e.what());
    }
    if (stream.size() > 1 && stream.back().t_ms < stream[stream.size() - 2].t_ms) {
      throw std::runtime_error("gaze stream line " + std::to_string(lineno) +
                               ": timestamp goes backwards");
    }
  }
  return stream;
}

GazeStream read_gaze_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open gaze stream " + path.string());
  return read_gaze_jsonl(in);
}

void write_gaze_jsonl(std::ostream& out, const GazeStream& stream) {
  for (const auto& s : stream) out << to_json(s).dump() << '\n';
}

void write_gaze_jsonl(const std::filesystem::path& path, const GazeStream& stream) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write gaze stream " + path.string());
  write_gaze_jsonl(out, stream);
}

}  // namespace gazelex::gaze
