#include "led/session_store.hpp"

#include "jsonl.hpp"
#include "led/serialize.hpp"

namespace led {
namespace {

using nlohmann::json;

constexpr std::size_t kMaxSessionIdBytes = 256;

void check_session_id(const std::string& id) {
  if (id.empty()) throw InvalidInput("session_id must be non-empty");
  if (id.size() > kMaxSessionIdBytes) throw InvalidInput("session_id is too long");
}

class InFlight {
 public:
  InFlight(std::atomic<std::size_t>& counter, std::size_t limit) : counter_(counter) {
    if (counter_.fetch_add(1) >= limit) {
      counter_.fetch_sub(1);
      throw Overloaded("too many concurrent turns");
    }
  }
  ~InFlight() { counter_.fetch_sub(1); }
  InFlight(const InFlight&) = delete;
  InFlight& operator=(const InFlight&) = delete;

 private:
  std::atomic<std::size_t>& counter_;
};

}  // namespace

json to_json(const ChatReply& r) {
  return {{"session_id", r.session_id},
          {"turn_no", r.turn_no},
          {"response", r.response},
          {"route", std::string(to_string(r.route))},
          {"rewritten", r.rewritten},
          {"trace", trace_summary(r.trace)}};
}

json to_json(const SessionSnapshot& s) {
  json turns = json::array();
  for (std::size_t i = 0; i < s.turns.size(); ++i) {
    auto t = to_json(s.turns[i]);
    t["turn_no"] = i + 1;
    t["trace"] = i < s.traces.size() ? s.traces[i] : json(nullptr);
    turns.push_back(std::move(t));
  }
  return {{"session_id", s.session_id}, {"turns", turns}};
}

ChatService::ChatService(std::shared_ptr<const Engine> engine, ServerSettings settings, Clock clock)
    : engine_(std::move(engine)), settings_(std::move(settings)), clock_(std::move(clock)) {
  if (!engine_) throw InvalidInput("chat service needs an engine");
  if (!clock_) clock_ = [] { return std::chrono::steady_clock::now(); };
  if (settings_.session_log) {
    if (std::filesystem::exists(*settings_.session_log)) replay_log(*settings_.session_log);
    log_.open(*settings_.session_log, std::ios::app);
    if (!log_) throw ResourceError("cannot open session log: " + settings_.session_log->string());
  }
}

ChatService::~ChatService() = default;

void ChatService::replay_log(const std::filesystem::path& path) {
  const auto now = clock_();
  detail::for_each_jsonl(path, [&](const json& event, std::size_t) {
    const auto id = event.at("session_id").get<std::string>();
    const auto kind = event.at("event").get<std::string>();
    if (kind == "delete") {
      sessions_.erase(id);
      return;
    }
    if (kind != "turn") throw InvalidInput("unknown session log event: " + kind);
    auto& session = sessions_[id];
    if (!session) {
      session = std::make_shared<Session>();
      session->state = engine_->new_session(id);
    }
    append_turn(session->state, turn_from_json(event.at("turn")), engine_->gazetteer(), engine_->config().decay);
    session->traces.push_back(event.value("trace", json(nullptr)));
    session->last_active = now;
  });
}

void ChatService::log_event(const json& event) {
  if (!log_.is_open()) return;
  std::lock_guard lock(log_mutex_);
  log_ << event.dump() << '\n';
  log_.flush();
}

std::shared_ptr<ChatService::Session> ChatService::acquire(const std::string& session_id) {
  std::lock_guard lock(sessions_mutex_);
  auto& session = sessions_[session_id];
  if (!session) {
    session = std::make_shared<Session>();
    session->state = engine_->new_session(session_id);
  }
  session->last_active = clock_();
  return session;
}

ChatReply ChatService::chat(const std::string& session_id, std::string_view utterance) {
  check_session_id(session_id);
  InFlight guard(in_flight_, settings_.max_concurrent_turns);
  evict_idle();

  std::shared_ptr<Session> session;
  std::unique_lock<std::mutex> turn_lock;
  for (;;) {
    session = acquire(session_id);
    turn_lock = std::unique_lock(session->turn_mutex);
    if (!session->erased) break;  // deleted while we waited; start over
    turn_lock.unlock();
  }

  auto result = engine_->process_turn(session->state, utterance);
  auto trace_json = to_json(result.trace);
  session->traces.push_back(trace_json);
  {
    std::lock_guard lock(sessions_mutex_);
    session->last_active = clock_();
  }
  log_event({{"event", "turn"}, {"session_id", session_id}, {"turn", to_json(result.turn)}, {"trace", trace_json}});

  ChatReply reply;
  reply.session_id = session_id;
  reply.turn_no = static_cast<int>(session->state.turns.size());
  reply.response = result.response;
  reply.route = result.turn.route;
  reply.rewritten = result.turn.rewritten.text();
  reply.trace = std::move(result.trace);
  return reply;
}

std::optional<SessionSnapshot> ChatService::session(const std::string& session_id) const {
  std::shared_ptr<Session> session;
  {
    std::lock_guard lock(sessions_mutex_);
    const auto it = sessions_.find(session_id);
    if (it == sessions_.end()) return std::nullopt;
    session = it->second;
  }
  std::lock_guard turn_lock(session->turn_mutex);
  if (session->erased) return std::nullopt;
  return SessionSnapshot{session_id, session->state.turns, session->traces};
}

bool ChatService::erase(const std::string& session_id) {
  std::shared_ptr<Session> session;
  {
    std::lock_guard lock(sessions_mutex_);
    const auto it = sessions_.find(session_id);
    if (it == sessions_.end()) return false;
    session = it->second;
    sessions_.erase(it);
  }
  {
    std::lock_guard turn_lock(session->turn_mutex);
    session->erased = true;
  }
  log_event({{"event", "delete"}, {"session_id", session_id}});
  return true;
}

std::size_t ChatService::evict_idle() {
  const auto now = clock_();
  std::lock_guard lock(sessions_mutex_);
  std::size_t dropped = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    auto& session = it->second;
    // A session whose turn is running is never idle.
    std::unique_lock turn_lock(session->turn_mutex, std::try_to_lock);
    if (turn_lock.owns_lock() && now - session->last_active > settings_.session_ttl) {
      session->erased = true;
      turn_lock.unlock();
      it = sessions_.erase(it);
      ++dropped;
    } else {
      ++it;
    }
  }
  return dropped;
}

std::size_t ChatService::session_count() const {
  std::lock_guard lock(sessions_mutex_);
  return sessions_.size();
}

}  // namespace led
