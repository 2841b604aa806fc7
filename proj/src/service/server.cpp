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


#include "gazelex/service/server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <cctype>
#include <numeric>
#include <iostream>
#include <thread>

#include "gazelex/gaze/io.hpp"

namespace gazelex::service {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

Library::Library(std::shared_ptr<const Engine> engine, std::vector<text::DocumentLayout> docs)
    : engine_(std::move(engine)) {
  if (!engine_) throw ServiceError("library needs an engine");
  for (auto& d : docs) {
    const std::string id = d.doc_id;
    if (!docs_.emplace(id, std::move(d)).second) throw ServiceError("duplicate document " + id);
  }
}

std::vector<text::DocumentLayout> Library::read_layouts(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ServiceError("layout directory " + dir.string() + " does not exist");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<text::DocumentLayout> out;
  for (const auto& f : files) out.push_back(text::read_layout(f));
  return out;
}

const text::DocumentLayout* Library::find(const std::string& doc_id) const {
  const auto it = docs_.find(doc_id);
  return it == docs_.end() ? nullptr : &it->second;
}

std::vector<std::string> Library::doc_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, d] : docs_) out.push_back(id);
  return out;
}

std::string Library::next_session_id() const { return "s" + std::to_string(++sessions_); }

nlohmann::json status_error(const std::string& message) {
  return {{"type", "status"}, {"state", "error"}, {"message", message}};
}

Protocol::Protocol(const Library& library) : library_(library) {}

std::vector<nlohmann::json> Protocol::handle(std::string_view line) {
  nlohmann::json msg;
  try {
    msg = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    return {status_error("malformed JSON")};
  }
  if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
    return {status_error("message needs a string 'type'")};
  }
  const std::string type = msg["type"];
  try {
    if (type == "open_doc") return open(msg);
    if (type == "close_doc") {
      if (!session_) return {status_error("no document is open")};
      return finish_session();
    }
    if (type == "gaze") {
      if (!session_) return {status_error("no document is open")};
      for (const char* key : {"t_ms", "x", "y"}) {
        if (!msg.contains(key) || !msg[key].is_number()) {
          return {status_error(std::string("gaze message needs a number '") + key + "'")};
        }
      }
      gaze::GazeSample s;
      s.t_ms = msg["t_ms"].get<double>();
      s.x = msg["x"].get<double>();
      s.y = msg["y"].get<double>();
      std::vector<nlohmann::json> out;
      for (const auto& d : session_->push(s)) out.push_back(d.to_json());
      return out;
    }
  } catch (const std::exception& e) {
    return {status_error(e.what())};
  }
  return {status_error("unknown message type '" + type + "'")};
}

std::vector<nlohmann::json> Protocol::open(const nlohmann::json& msg) {
  if (!msg.contains("doc_id") || !msg["doc_id"].is_string()) {
    return {status_error("open_doc needs a string 'doc_id'")};
  }
  const std::string doc_id = msg["doc_id"];
  const auto* layout = library_.find(doc_id);
  if (layout == nullptr) return {status_error("unknown document '" + doc_id + "'")};
  gaze::Source source = gaze::Source::kTracker;
  if (msg.contains("source")) {
    if (!msg["source"].is_string()) return {status_error("'source' must be a string")};
    source = gaze::source_from_string(msg["source"].get<std::string>());
  }
  std::vector<nlohmann::json> out;
  if (session_) out = finish_session();
  session_ = std::make_unique<Session>(library_.next_session_id(), library_.engine(), *layout,
                                       source);
  out.push_back({{"type", "status"},
                 {"state", "open"},
                 {"session_id", session_->id()},
                 {"doc_id", doc_id},
                 {"words", layout->words.size()},
                 {"threshold", library_.engine()->threshold}});
  return out;
}

std::vector<nlohmann::json> Protocol::finish_session() {
  std::vector<nlohmann::json> out;
  for (const auto& d : session_->finish()) out.push_back(d.to_json());
  const auto& lat = session_->latencies_ms();
  const double mean =
      lat.empty() ? 0.0 : std::accumulate(lat.begin(), lat.end(), 0.0) / double(lat.size());
  out.push_back({{"type", "status"},
                 {"state", "closed"},
                 {"session_id", session_->id()},
                 {"windows", session_->predictions().size()},
                 {"detections", session_->emitted().size()},
                 {"mean_latency_ms", mean}});
  session_.reset();
  return out;
}

std::vector<nlohmann::json> Protocol::close() {
  if (!session_) return {};
  return finish_session();
}

namespace {

void serve_ndjson(tcp::socket& socket, Protocol& protocol) {
  asio::streambuf buf;
  auto send = [&](const std::vector<nlohmann::json>& replies) {
    std::string out;
    for (const auto& r : replies) out += r.dump() + "\n";
    if (!out.empty()) asio::write(socket, asio::buffer(out));
  };
  beast::error_code ec;
  for (;;) {
    asio::read_until(socket, buf, '\n', ec);
    if (ec) break;
    std::istream in(&buf);
    std::string line;
    std::getline(in, line);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    send(protocol.handle(line));
  }
  // Flush windows the recording still covers; the peer may be gone.
  try {
    send(protocol.close());
  } catch (const std::exception&) {
  }
}

void serve_websocket(tcp::socket& socket, const http::request<http::string_body>& req,
                     Protocol& protocol) {
  websocket::stream<tcp::socket&> ws(socket);
  ws.accept(req);
  ws.text(true);
  auto send = [&](const std::vector<nlohmann::json>& replies) {
    for (const auto& r : replies) ws.write(asio::buffer(r.dump()));
  };
  beast::flat_buffer buf;
  beast::error_code ec;
  for (;;) {
    ws.read(buf, ec);
    if (ec) break;
    const std::string msg = beast::buffers_to_string(buf.data());
    buf.consume(buf.size());
    send(protocol.handle(msg));
  }
  try {
    send(protocol.close());
  } catch (const std::exception&) {
  }
}

http::response<http::string_body> http_reply(const Library& library,
                                             const http::request<http::string_body>& req) {
  http::response<http::string_body> res;
  res.version(req.version());
  res.keep_alive(req.keep_alive());
  res.set(http::field::content_type, "application/json");
  res.set(http::field::access_control_allow_origin, "*");
  const std::string target(req.target());
  nlohmann::json body;
  res.result(http::status::ok);
  if (req.method() != http::verb::get) {
    res.result(http::status::method_not_allowed);
    body = {{"error", "only GET is supported"}};
  } else if (target == "/health") {
    body = {{"status", "ok"}, {"docs", library.doc_ids().size()},
            {"threshold", library.engine()->threshold}};
  } else if (target == "/docs") {
    body = library.doc_ids();
  } else if (target.rfind("/layout/", 0) == 0) {
    const auto* layout = library.find(target.substr(8));
    if (layout == nullptr) {
      res.result(http::status::not_found);
      body = {{"error", "unknown document"}};
    } else {
      body = text::to_json(*layout);
    }
  } else {
    res.result(http::status::not_found);
    body = {{"error", "not found"}};
  }
  res.body() = body.dump();
  res.prepare_payload();
  return res;
}

void serve_http(tcp::socket& socket, Library& library) {
  beast::flat_buffer buf;
  for (;;) {
    http::request<http::string_body> req;
    beast::error_code ec;
    http::read(socket, buf, req, ec);
    if (ec) return;
    if (websocket::is_upgrade(req)) {
      Protocol protocol(library);
      serve_websocket(socket, req, protocol);
      return;
    }
    const auto res = http_reply(library, req);
    http::write(socket, res, ec);
    if (ec || !res.keep_alive()) return;
  }
}

void serve_connection(tcp::socket& socket, Library& library) {
  char first = 0;
  beast::error_code ec;
  socket.receive(asio::buffer(&first, 1), tcp::socket::message_peek, ec);
  if (ec) return;
  if (first == '{' || std::isspace(static_cast<unsigned char>(first))) {
    Protocol protocol(library);
    serve_ndjson(socket, protocol);
  } else {
    serve_http(socket, library);
  }
}

}  // namespace

struct Server::Impl {
  std::shared_ptr<Library> library;
  asio::io_context io;
  tcp::acceptor acceptor{io};
  std::mutex mu;
  std::vector<std::shared_ptr<tcp::socket>> sockets;
  std::vector<std::thread> threads;
  bool stopped = false;

  void accept_next() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      auto sock = std::make_shared<tcp::socket>(std::move(socket));
      {
        std::lock_guard<std::mutex> lock(mu);
        if (stopped) return;
        sockets.push_back(sock);
        threads.emplace_back([this, sock] {
          try {
            serve_connection(*sock, *library);
          } catch (const std::exception& e) {
            std::cerr << "connection: " << e.what() << '\n';
          }
          beast::error_code ignored;
          sock->shutdown(tcp::socket::shutdown_both, ignored);
          sock->close(ignored);
        });
      }
      accept_next();
    });
  }
};

Server::Server(std::shared_ptr<Library> library, ServerConfig config) : impl_(new Impl) {
  impl_->library = std::move(library);
  const tcp::endpoint ep(asio::ip::make_address(config.host), config.port);
  impl_->acceptor.open(ep.protocol());
  impl_->acceptor.set_option(tcp::acceptor::reuse_address(true));
  impl_->acceptor.bind(ep);
  impl_->acceptor.listen();
}

Server::~Server() { stop(); }

unsigned short Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run() {
  impl_->accept_next();
  impl_->io.run();
}

void Server::stop() {
  std::vector<std::thread> threads;
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    if (impl_->stopped) return;
    impl_->stopped = true;
    for (auto& s : impl_->sockets) {
      beast::error_code ignored;
      s->shutdown(tcp::socket::shutdown_both, ignored);
    }
    threads.swap(impl_->threads);
  }
  asio::post(impl_->io, [this] {
    beast::error_code ignored;
    impl_->acceptor.close(ignored);
  });
  impl_->io.stop();
  for (auto& t : threads) t.join();
}

}  // namespace gazelex::service
