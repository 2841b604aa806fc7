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

#include "gazelex/tensor/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace gazelex::tensor {

namespace {

constexpr char kMagic[8] = {'G', 'Z', 'L', 'X', 'C', 'K', 'P', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

}  // namespace

const Parameter& Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t;
  }
  throw std::out_of_range("checkpoint has no tensor " + name);
}

void save_checkpoint(const std::filesystem::path& path, const nlohmann::json& header,
                     const ParameterSet& params) {
  nlohmann::json manifest = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& p : params.all()) {
    manifest.push_back({{"name", p.name},
                        {"group", std::string(to_string(p.group))},
                        {"shape", p.tensor.shape()},
                        {"offset", offset}});
    offset += p.tensor.numel() * sizeof(double);
  }
  const std::string text = nlohmann::json{{"header", header}, {"tensors", manifest}}.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof kMagic);
  write_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& p : params.all()) {
    const auto v = p.tensor.values();
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("short write on checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw std::runtime_error(path.string() + " is not a gazelex checkpoint");
  }
  const auto length = read_u64(in);
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!in) throw std::runtime_error("truncated checkpoint header in " + path.string());
  const auto doc = nlohmann::json::parse(text);
  const auto payload_start = in.tellg();

  Checkpoint ckpt;
  ckpt.header = doc.at("header");
  for (const auto& entry : doc.at("tensors")) {
    Shape shape = entry.at("shape").get<Shape>();
    std::vector<double> values(shape_numel(shape));
    in.seekg(payload_start + static_cast<std::streamoff>(entry.at("offset").get<std::uint64_t>()));
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!in) throw std::runtime_error("truncated tensor " + entry.at("name").get<std::string>());
    ckpt.tensors.push_back(Parameter{entry.at("name").get<std::string>(),
                                     lr_group_from_string(entry.at("group").get<std::string>()),
                                     Tensor(std::move(shape), std::move(values), false)});
  }
  return ckpt;
}

void restore_parameters(const Checkpoint& checkpoint, ParameterSet& params) {
  if (checkpoint.tensors.size() != params.all().size()) {
    throw std::runtime_error("checkpoint holds " + std::to_string(checkpoint.tensors.size()) +
                             " tensors, model expects " + std::to_string(params.all().size()));
  }
  for (auto& p : params.all()) {
    const auto& src = checkpoint.find(p.name);
    if (src.tensor.shape() != p.tensor.shape()) {
      throw ShapeError("checkpoint tensor " + p.name + " has shape " +
                       shape_string(src.tensor.shape()) + ", model expects " +
                       shape_string(p.tensor.shape()));
    }
    std::copy(src.tensor.values().begin(), src.tensor.values().end(),
              p.tensor.mutable_values().begin());
  }
}

std::vector<std::vector<double>> snapshot_values(const ParameterSet& params) {
  std::vector<std::vector<double>> out;
  for (const auto& p : params.all()) out.emplace_back(p.tensor.values().begin(), p.tensor.values().end());
  return out;
}

void restore_values(ParameterSet& params, const std::vector<std::vector<double>>& snapshot) {
  auto& all = params.all();
  if (snapshot.size() != all.size()) throw std::logic_error("snapshot does not match parameters");
  for (std::size_t i = 0; i < all.size(); ++i) {
    std::copy(snapshot[i].begin(), snapshot[i].end(), all[i].tensor.mutable_values().begin());
  }
}

}  // namespace gazelex::tensor
