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
#include <map>
#include <string>

#include "json.hpp"

#include "gazelex/tensor/parameter.hpp"

namespace gazelex::tensor {

/// On-disk layout:
///   8 bytes   magic "GZLXCKP1"
///   8 bytes   little-endian u64 header length
///   header    JSON: {"header": <caller metadata>,
///                    "tensors": [{"name", "group", "shape", "offset"}...]}
///   payload   little-endian float64 arrays; offsets are in bytes from the
///             start of the payload
struct Checkpoint {
  nlohmann::json header;
  std::vector<Parameter> tensors;

  const Parameter& find(const std::string& name) const;
};

void save_checkpoint(const std::filesystem::path& path, const nlohmann::json& header,
                     const ParameterSet& params);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies checkpoint values into `params`; names and shapes must match.
void restore_parameters(const Checkpoint& checkpoint, ParameterSet& params);

/// In-memory value snapshot, used to keep the best epoch during training.
std::vector<std::vector<double>> snapshot_values(const ParameterSet& params);
void restore_values(ParameterSet& params, const std::vector<std::vector<double>>& snapshot);

}  // namespace gazelex::tensor
