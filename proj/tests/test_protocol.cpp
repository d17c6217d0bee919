#include <doctest.h>

#include "bubble/protocol.hpp"

using namespace bubble;
using namespace bubble::protocol;

namespace {

std::string reply(std::string_view line) {
  const auto r = parse_command(line);
  if (const auto* e = std::get_if<Response>(&r)) return format_response(*e);
  return "CMD";
}

}  // namespace

TEST_CASE("well formed commands parse") {
  const auto set = std::get<Command>(parse_command("SET 1 1065.5\n"));
  CHECK(set.kind == CommandKind::set);
  CHECK(set.bubble_id == 1);
  CHECK(set.hpa == 1065.5);
  CHECK(std::get<Command>(parse_command("GET 0\n")).kind == CommandKind::get);
  CHECK(std::get<Command>(parse_command("VENT 0\n")).kind == CommandKind::vent);
  CHECK(std::get<Command>(parse_command("SET 0 1010\n")).hpa == 1010.0);
  CHECK(std::get<Command>(parse_command("SET 0 1090\n")).hpa == 1090.0);
}

TEST_CASE("malformed commands answer ERR parse") {
  for (const char* bad : {"SET 0 1050", "set 0 1050\n", "SET  0 1050\n", "SET 0 1050 \n", " GET 0\n", "GET\n",
                          "GET 0 1\n", "GET x\n", "GET -1\n", "SET 0 10e2\n", "SET 0 +1050\n", "SET 0 abc\n",
                          "SET 0 1050\r\n", "\n", "", "PING\n", "GET 0\nGET 1\n"})
    CHECK_MESSAGE(reply(bad) == "ERR parse\n", bad);
}

TEST_CASE("out-of-band setpoints answer ERR range") {
  CHECK(reply("SET 0 1009.9\n") == "ERR range\n");
  CHECK(reply("SET 0 1100\n") == "ERR range\n");
  CHECK(reply("SET 0 -5\n") == "ERR range\n");
}

TEST_CASE("response wire format") {
  CHECK(format_response(Response::ok()) == "OK\n");
  CHECK(format_response(Response::pressure(1, 1049.96)) == "P 1 1050.0\n");
  CHECK(format_response(Response::error("id")) == "ERR id\n");
}

TEST_CASE("console drives the pneumatic system") {
  pneumatics::PlantProfile quiet;
  quiet.sensor_noise_hpa = 0.0;
  pneumatics::PneumaticSystem sys(quiet, {}, 2, 1050.0, 1);
  CommandConsole console(sys, 1.0);
  CHECK(console.handle("GET 0\n") == "P 0 1050.0\n");
  CHECK(sys.time_s() == doctest::Approx(1.0));
  CHECK(console.handle("SET 1 1070\n") == "OK\n");
  CHECK(sys.setpoint(1) == 1070.0);
  CHECK(console.handle("GET 2\n") == "ERR id\n");
  CHECK(console.handle("SET 5 1050\n") == "ERR id\n");
  for (int i = 0; i < 5; ++i) console.handle("GET 1\n");
  const auto r = console.execute({CommandKind::get, 1, 0.0});
  CHECK(std::abs(r.hpa - 1070.0) <= 2.0);
  CHECK(console.handle("VENT 0\n") == "OK\n");
  CHECK(sys.venting(0));
  CHECK(console.handle("SET 0 1200\n") == "ERR range\n");
  CHECK(sys.venting(0));
}

TEST_CASE("spec console exchanges") {
  pneumatics::PneumaticSystem sys({}, {}, 2, 1050.0, 3);
  CommandConsole console(sys, 1.0);
  CHECK(console.handle("SET 0 900\n") == "ERR range\n");
  CHECK(console.handle("SET 0 1070\n") == "OK\n");
  CHECK(sys.setpoint(0) == 1070.0);
  CHECK(console.handle("SET 0 1050\n") == "OK\n");
  sys.run_until_settled(30.0);
  const std::string r = console.handle("GET 0\n");
  REQUIRE(r.rfind("P 0 ", 0) == 0);
  CHECK(std::abs(std::stod(r.substr(4)) - 1050.0) <= 2.0 + 1.5);
}
