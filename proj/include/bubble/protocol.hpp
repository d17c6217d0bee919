#pragma once

// Line protocol of the pressure controller:
//   SET <id> <hPa>\n   ->  OK
//   GET <id>\n         ->  P <id> <hPa>
//   VENT <id>\n        ->  OK
// Failures answer `ERR parse`, `ERR range` (setpoint outside the band) or `ERR id`.

#include <string>
#include <string_view>
#include <variant>

#include "bubble/pneumatics.hpp"

namespace bubble::protocol {

enum class CommandKind { set, get, vent };

struct Command {
  CommandKind kind = CommandKind::get;
  int bubble_id = 0;
  double hpa = 0.0;
};

enum class ResponseKind { ok, pressure, error };

struct Response {
  ResponseKind kind = ResponseKind::ok;
  int bubble_id = 0;
  double hpa = 0.0;
  std::string reason;  // error only: parse, range or id

  static Response ok() { return {}; }
  static Response pressure(int id, double hpa) { return {ResponseKind::pressure, id, hpa, {}}; }
  static Response error(std::string reason) { return {ResponseKind::error, 0, 0.0, std::move(reason)}; }
};

/// Parses one newline-terminated record. Malformed input yields an error Response.
std::variant<Command, Response> parse_command(std::string_view line);

/// Wire text of a response, including the trailing newline.
std::string format_response(const Response& response);

/// Serialized command channel in front of a PneumaticSystem. Each handled line first
/// advances simulated time by `tick_s`, then executes the command.
class CommandConsole {
 public:
  CommandConsole(pneumatics::PneumaticSystem& system, double tick_s = 1.0) : system_(system), tick_s_(tick_s) {}

  Response execute(const Command& command);
  std::string handle(std::string_view line);

 private:
  pneumatics::PneumaticSystem& system_;
  double tick_s_;
};

}  // namespace bubble::protocol
