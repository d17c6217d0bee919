#include "bubble/protocol.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <vector>

namespace bubble::protocol {

namespace {

// Splits on single spaces; empty tokens (double spaces, leading/trailing space) are rejected.
bool split(std::string_view s, std::vector<std::string_view>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    const auto sp = s.find(' ', start);
    const auto tok = s.substr(start, sp == std::string_view::npos ? std::string_view::npos : sp - start);
    if (tok.empty()) return false;
    out.push_back(tok);
    if (sp == std::string_view::npos) return true;
    start = sp + 1;
  }
}

bool parse_id(std::string_view t, int& id) {
  if (t.empty() || t.size() > 3) return false;
  for (char c : t)
    if (c < '0' || c > '9') return false;
  std::from_chars(t.data(), t.data() + t.size(), id);
  return true;
}

bool parse_hpa(std::string_view t, double& v) {
  if (t.empty() || t.front() == '+') return false;
  for (char c : t)
    if (!((c >= '0' && c <= '9') || c == '.' || c == '-')) return false;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v, std::chars_format::fixed);
  return ec == std::errc() && ptr == t.data() + t.size() && std::isfinite(v);
}

}  // namespace

std::variant<Command, Response> parse_command(std::string_view line) {
  if (line.empty() || line.back() != '\n') return Response::error("parse");
  line.remove_suffix(1);
  if (line.find('\n') != std::string_view::npos) return Response::error("parse");
  std::vector<std::string_view> tok;
  if (!split(line, tok)) return Response::error("parse");

  Command c;
  if (tok[0] == "SET" && tok.size() == 3) {
    c.kind = CommandKind::set;
    if (!parse_id(tok[1], c.bubble_id) || !parse_hpa(tok[2], c.hpa)) return Response::error("parse");
    if (!in_operating_band(c.hpa)) return Response::error("range");
  } else if (tok[0] == "GET" && tok.size() == 2) {
    c.kind = CommandKind::get;
    if (!parse_id(tok[1], c.bubble_id)) return Response::error("parse");
  } else if (tok[0] == "VENT" && tok.size() == 2) {
    c.kind = CommandKind::vent;
    if (!parse_id(tok[1], c.bubble_id)) return Response::error("parse");
  } else {
    return Response::error("parse");
  }
  return c;
}

std::string format_response(const Response& r) {
  switch (r.kind) {
    case ResponseKind::ok:
      return "OK\n";
    case ResponseKind::pressure: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "P %d %.1f\n", r.bubble_id, r.hpa);
      return buf;
    }
    case ResponseKind::error:
      return "ERR " + r.reason + "\n";
  }
  return "ERR parse\n";
}

Response CommandConsole::execute(const Command& c) {
  if (c.bubble_id < 0 || c.bubble_id >= system_.channels()) return Response::error("id");
  switch (c.kind) {
    case CommandKind::set:
      if (!in_operating_band(c.hpa)) return Response::error("range");
      system_.set_setpoint(c.bubble_id, c.hpa);
      return Response::ok();
    case CommandKind::get:
      return Response::pressure(c.bubble_id, system_.estimate(c.bubble_id));
    case CommandKind::vent:
      system_.vent(c.bubble_id);
      return Response::ok();
  }
  return Response::error("parse");
}

std::string CommandConsole::handle(std::string_view line) {
  if (tick_s_ > 0.0) system_.advance(tick_s_);
  const auto parsed = parse_command(line);
  if (const auto* err = std::get_if<Response>(&parsed)) return format_response(*err);
  return format_response(execute(std::get<Command>(parsed)));
}

}  // namespace bubble::protocol
