#pragma once

// Sessions over a shared engine. ChatService is the single front door used
// by both the HTTP server and the interactive CLI, so the two produce the
// same responses for the same script.

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "led/errors.hpp"
#include "led/pipeline.hpp"

namespace led {

/// Raised when the concurrent-turn limit is reached.
class Overloaded : public Error {
 public:
  using Error::Error;
};

struct ChatReply {
  std::string session_id;
  int turn_no = 0;
  std::string response;
  Route route = Route::Subjective;
  std::string rewritten;
  TurnTrace trace;
};

nlohmann::json to_json(const ChatReply& reply);

struct SessionSnapshot {
  std::string session_id;
  std::vector<Turn> turns;
  std::vector<nlohmann::json> traces;  // one per turn
};

nlohmann::json to_json(const SessionSnapshot& snapshot);

class ChatService {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  /// Replays the session log when one is configured.
  ChatService(std::shared_ptr<const Engine> engine, ServerSettings settings, Clock clock = {});
  ~ChatService();

  ChatService(const ChatService&) = delete;
  ChatService& operator=(const ChatService&) = delete;

  /// Runs one turn, creating the session if needed. Turns on one session are
  /// serialized; distinct sessions run concurrently. Throws Overloaded above
  /// the concurrent-turn limit and InvalidInput for an empty utterance or id.
  ChatReply chat(const std::string& session_id, std::string_view utterance);

  std::optional<SessionSnapshot> session(const std::string& session_id) const;
  bool erase(const std::string& session_id);

  /// Drops sessions idle longer than the TTL. Returns the number dropped.
  std::size_t evict_idle();

  std::size_t session_count() const;
  std::size_t in_flight() const noexcept { return in_flight_.load(); }
  const Engine& engine() const noexcept { return *engine_; }

 private:
  struct Session {
    std::mutex turn_mutex;
    ConversationState state;
    std::vector<nlohmann::json> traces;
    std::chrono::steady_clock::time_point last_active;
    bool erased = false;
  };

  std::shared_ptr<Session> acquire(const std::string& session_id);
  void replay_log(const std::filesystem::path& path);
  void log_event(const nlohmann::json& event);

  std::shared_ptr<const Engine> engine_;
  ServerSettings settings_;
  Clock clock_;
  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::atomic<std::size_t> in_flight_{0};
  std::mutex log_mutex_;
  std::ofstream log_;
};

}  // namespace led
