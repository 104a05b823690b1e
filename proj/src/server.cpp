#include "led/server.hpp"

#include <algorithm>

#include <httplib.h>

#include "led/serialize.hpp"

namespace led {
namespace {

using nlohmann::json;

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, std::string_view message) {
  send_json(res, status, {{"error", {{"code", code}, {"message", message}}}});
}

}  // namespace

ChatServer::ChatServer(ServerSettings settings)
    : settings_(std::move(settings)), http_(std::make_unique<httplib::Server>()) {
  // Enough workers that the concurrent-turn limit, not the pool, is what
  // pushes back.
  const std::size_t workers = std::max<std::size_t>(8, settings_.max_concurrent_turns + 4);
  http_->new_task_queue = [workers] { return new httplib::ThreadPool(workers); };
  install_routes();
}

ChatServer::~ChatServer() {
  stop();
  if (load_thread_.joinable()) load_thread_.join();
}

int ChatServer::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = http_->bind_to_any_port(host);
  } else if (!http_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw ResourceError("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void ChatServer::start() {
  listen_thread_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
}

void ChatServer::listen() { http_->listen_after_bind(); }

void ChatServer::stop() {
  if (http_->is_running()) http_->stop();
  if (listen_thread_.joinable()) listen_thread_.join();
}

void ChatServer::set_engine(std::shared_ptr<const Engine> engine) {
  auto service = std::make_shared<ChatService>(std::move(engine), settings_);
  std::lock_guard lock(state_mutex_);
  service_ = std::move(service);
  load_error_.clear();
}

void ChatServer::set_load_error(std::string message) {
  std::lock_guard lock(state_mutex_);
  load_error_ = std::move(message);
}

void ChatServer::load_async(std::function<std::shared_ptr<const Engine>()> loader) {
  load_thread_ = std::thread([this, loader = std::move(loader)] {
    try {
      set_engine(loader());
    } catch (const std::exception& e) {
      set_load_error(e.what());
    }
  });
}

bool ChatServer::ready() const {
  std::lock_guard lock(state_mutex_);
  return service_ != nullptr;
}

std::shared_ptr<ChatService> ChatServer::service() const {
  std::lock_guard lock(state_mutex_);
  return service_;
}

void ChatServer::install_routes() {
  http_->set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});

  http_->Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  http_->Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
    std::shared_ptr<ChatService> service;
    std::string error;
    {
      std::lock_guard lock(state_mutex_);
      service = service_;
      error = load_error_;
    }
    if (service) {
      send_json(res, 200, {{"status", "ok"}, {"sessions", service->session_count()}, {"in_flight", service->in_flight()}});
    } else if (!error.empty()) {
      send_json(res, 503, {{"status", "error"}, {"message", error}});
    } else {
      send_json(res, 503, {{"status", "loading"}});
    }
  });

  http_->Post("/v1/chat", [this](const httplib::Request& req, httplib::Response& res) {
    const auto service = this->service();
    if (!service) return send_error(res, 503, "not_ready", "engine is still loading");
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::parse_error&) {
      return send_error(res, 400, "malformed_body", "request body is not valid JSON");
    }
    if (!body.is_object() || !body.contains("session_id") || !body["session_id"].is_string() ||
        !body.contains("utterance") || !body["utterance"].is_string()) {
      return send_error(res, 400, "malformed_body", "expected {\"session_id\": string, \"utterance\": string}");
    }
    try {
      const auto reply = service->chat(body["session_id"].get<std::string>(), body["utterance"].get<std::string>());
      send_json(res, 200, to_json(reply));
    } catch (const Overloaded& e) {
      send_error(res, 429, "overloaded", e.what());
    } catch (const InvalidInput& e) {
      send_error(res, 400, "invalid_input", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  });

  http_->Get(R"(/v1/session/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    const auto service = this->service();
    if (!service) return send_error(res, 503, "not_ready", "engine is still loading");
    const auto id = req.matches[1].str();
    const auto snapshot = service->session(id);
    if (!snapshot) return send_error(res, 404, "unknown_session", "no session " + id);
    send_json(res, 200, to_json(*snapshot));
  });

  http_->Delete(R"(/v1/session/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    const auto service = this->service();
    if (!service) return send_error(res, 503, "not_ready", "engine is still loading");
    const auto id = req.matches[1].str();
    if (!service->erase(id)) return send_error(res, 404, "unknown_session", "no session " + id);
    res.status = 204;
  });
}

}  // namespace led
