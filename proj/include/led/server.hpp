#pragma once

// HTTP/1.1 chat service.
//
//   POST   /v1/chat           {"session_id", "utterance"} -> ChatResponse
//   GET    /v1/session/{id}   turn history with full traces, 404 if unknown
//   DELETE /v1/session/{id}   204, 404 if unknown
//   GET    /v1/health         200 once the engine is loaded, 503 before
//
// Errors carry {"error": {"code", "message"}}: 400 malformed request, 404
// unknown session, 429 concurrent-turn limit, 503 engine not ready.

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "led/config.hpp"
#include "led/session_store.hpp"

namespace httplib {
class Server;
}

namespace led {

class ChatServer {
 public:
  explicit ChatServer(ServerSettings settings);
  ~ChatServer();

  ChatServer(const ChatServer&) = delete;
  ChatServer& operator=(const ChatServer&) = delete;

  /// Binds the listening socket. Port 0 picks a free port; the bound port is
  /// returned. Throws ResourceError when the address cannot be bound.
  int bind(const std::string& host, int port);

  /// Serves on a background thread until stop().
  void start();

  /// Serves on the calling thread until stop().
  void listen();

  /// Stops accepting connections; in-flight requests finish first.
  void stop();

  /// Installs a loaded engine; health turns 200 and chats are accepted.
  void set_engine(std::shared_ptr<const Engine> engine);

  /// Records a startup failure; health reports it with 503.
  void set_load_error(std::string message);

  /// Loads the engine on a background thread, reporting success or failure
  /// through health.
  void load_async(std::function<std::shared_ptr<const Engine>()> loader);

  bool ready() const;
  std::shared_ptr<ChatService> service() const;

 private:
  void install_routes();

  ServerSettings settings_;
  std::unique_ptr<httplib::Server> http_;
  mutable std::mutex state_mutex_;
  std::shared_ptr<ChatService> service_;
  std::string load_error_;
  std::thread listen_thread_;
  std::thread load_thread_;
};

}  // namespace led
