#pragma once

// Line-oriented chat over a ChatService. Each input line is one user turn
// and produces one response line. Commands: /trace toggles trace output,
// /reset starts a fresh session, /quit ends the loop.

#include <iosfwd>
#include <string>

#include "led/session_store.hpp"

namespace led {

struct ChatLoopOptions {
  bool trace = false;
  bool prompt = false;  // print "> " before reading each line
  std::string session_prefix = "cli";
};

/// Returns the number of turns processed.
std::size_t run_chat_loop(ChatService& service, std::istream& in, std::ostream& out, const ChatLoopOptions& options);

/// The one-line trace printed under a response when tracing is on.
std::string format_trace_line(const ChatReply& reply);

}  // namespace led
