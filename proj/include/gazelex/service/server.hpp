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

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"

#include "gazelex/service/engine.hpp"

namespace gazelex::service {

/// Documents and model shared by every connection.
class Library {
 public:
  Library(std::shared_ptr<const Engine> engine, std::vector<text::DocumentLayout> docs);

  /// Loads every *.json layout in a directory.
  static std::vector<text::DocumentLayout> read_layouts(const std::filesystem::path& dir);

  const std::shared_ptr<const Engine>& engine() const { return engine_; }
  const text::DocumentLayout* find(const std::string& doc_id) const;
  std::vector<std::string> doc_ids() const;
  std::string next_session_id() const;

 private:
  std::shared_ptr<const Engine> engine_;
  std::map<std::string, text::DocumentLayout> docs_;
  mutable std::atomic<std::uint64_t> sessions_{0};
};

/// Newline-delimited JSON protocol of one connection, independent of the
/// transport. Client messages:
///   {"type":"open_doc","doc_id":..., "source":"tracker"|"webcam"}
///   {"type":"gaze","t_ms":...,"x":...,"y":...}
///   {"type":"close_doc"}
/// Replies are detection events and {"type":"status","state":...}
/// messages; a bad message gets state "error" and the session survives.
class Protocol {
 public:
  explicit Protocol(const Library& library);

  std::vector<nlohmann::json> handle(std::string_view line);
  /// Finishes the open session, as on disconnect.
  std::vector<nlohmann::json> close();

  const Session* session() const { return session_.get(); }

 private:
  std::vector<nlohmann::json> open(const nlohmann::json& msg);
  std::vector<nlohmann::json> finish_session();

  const Library& library_;
  std::unique_ptr<Session> session_;
};

nlohmann::json status_error(const std::string& message);

struct ServerConfig {
  std::string host = "127.0.0.1";
  /// 0 picks a free port.
  unsigned short port = 8765;
};

/// One listening port for three kinds of client, told apart by the first
/// byte: raw TCP with newline-delimited JSON, WebSocket (one JSON message
/// per text frame), and HTTP GET of /docs, /layout/<doc_id> and /health.
/// Each connection runs on its own thread.
class Server {
 public:
  Server(std::shared_ptr<Library> library, ServerConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Bound port, valid after construction.
  unsigned short port() const;
  /// Accepts connections until stop().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gazelex::service
