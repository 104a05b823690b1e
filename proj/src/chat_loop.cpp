#include "led/chat_loop.hpp"

#include <cstdio>
#include <istream>
#include <ostream>

#include "led/text.hpp"

namespace led {
namespace {

std::string fixed(double value, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

}  // namespace

std::string format_trace_line(const ChatReply& reply) {
  const auto& t = reply.trace;
  std::string line = "[trace] turn=" + std::to_string(reply.turn_no) + " route=" + std::string(to_string(reply.route)) +
                     " factual_score=" + fixed(t.factual_score);
  if (t.fell_through) line += " fell_through=true";
  if (t.span) line += " passage=" + t.span->passage_id + " fused=" + fixed(t.span->fused);
  line += " rewritten=\"" + reply.rewritten + "\"";
  line += " verdicts=";
  for (std::size_t i = 0; i < t.gated.size(); ++i) {
    if (i) line += ",";
    line += t.gated[i].verdict ? std::string(to_string(*t.gated[i].verdict)) : "none";
  }
  if (t.fallback_emitted) line += " fallback=true";
  return line;
}

std::size_t run_chat_loop(ChatService& service, std::istream& in, std::ostream& out, const ChatLoopOptions& options) {
  bool trace = options.trace;
  int session_no = 1;
  auto session_id = [&] { return options.session_prefix + "-" + std::to_string(session_no); };
  std::size_t turns = 0;
  std::string line;
  for (;;) {
    if (options.prompt) out << "> " << std::flush;
    if (!std::getline(in, line)) break;
    const auto text = trim(line);
    if (text.empty()) continue;
    if (text == "/quit" || text == "/exit") break;
    if (text == "/trace") {
      trace = !trace;
      out << "(trace " << (trace ? "on" : "off") << ")\n";
      continue;
    }
    if (text == "/reset") {
      service.erase(session_id());
      ++session_no;
      out << "(new session)\n";
      continue;
    }
    const auto reply = service.chat(session_id(), text);
    out << reply.response << '\n';
    if (trace) out << format_trace_line(reply) << '\n';
    out.flush();
    ++turns;
  }
  return turns;
}

}  // namespace led
