#include <doctest.h>

#include <cmath>

#include "bubble/pneumatics.hpp"

using namespace bubble;
using namespace bubble::pneumatics;

namespace {

PlantProfile quiet() {
  PlantProfile p;
  p.sensor_noise_hpa = 0.0;
  return p;
}

// Steps the plant with actuation held until it crosses `target`; returns elapsed time.
double crossing_time(double from, double target, bool pump) {
  PlantState s = make_plant(from);
  s.pump_on = pump;
  s.valve_open = !pump;
  const double dt = 1e-4;
  while (pump ? s.bubble_pressure_hpa < target : s.bubble_pressure_hpa > target) s = step_plant(s, dt);
  return s.time_s;
}

}  // namespace

// Golden values from tests/oracles/membrane_oracle.py.
TEST_CASE("plant integration matches the closed form") {
  PlantState s = make_plant(1050.0);
  s.pump_on = true;
  CHECK(step_plant(s, 2.0).bubble_pressure_hpa == doctest::Approx(1084.231370366).epsilon(1e-12));
  PlantState many = s;
  for (int i = 0; i < 200; ++i) many = step_plant(many, 0.01);
  CHECK(many.bubble_pressure_hpa == doctest::Approx(1084.231370366).epsilon(1e-10));
  CHECK(many.time_s == doctest::Approx(2.0));
  s.pump_on = false;
  s.valve_open = true;
  CHECK(step_plant(s, 2.0).bubble_pressure_hpa == doctest::Approx(1039.331393053).epsilon(1e-12));
  s.valve_open = false;
  CHECK(step_plant(s, 5.0).bubble_pressure_hpa == 1050.0);
  CHECK_THROWS_AS(step_plant(s, 0.0), DomainError);
}

TEST_CASE("deflation is slower than inflation over the same span") {
  CHECK(crossing_time(1050.0, 1070.0, true) == doctest::Approx(1.089708670).epsilon(1e-3));
  CHECK(crossing_time(1070.0, 1050.0, false) == doctest::Approx(2.803935305).epsilon(1e-3));
  for (double lo = 1010.0; lo < 1090.0; lo += 10.0)
    for (double hi = lo + 10.0; hi <= 1090.0; hi += 10.0) CHECK(crossing_time(hi, lo, false) > crossing_time(lo, hi, true));
}

TEST_CASE("line gradient and offset correction round trip") {
  const PlantProfile p;
  CHECK(line_gradient(true, false, p) == 6.0);
  CHECK(line_gradient(false, true, p) == -4.0);
  CHECK(line_gradient(false, false, p) == 0.0);
  const auto table = OffsetTable::matched(p);
  for (auto [pump, valve] : {std::pair{true, false}, std::pair{false, true}, std::pair{false, false}}) {
    const double line = 1050.0 + line_gradient(pump, valve, p);
    CHECK(offset_correct(line, pump, valve, table) == doctest::Approx(1050.0));
  }
  CHECK_THROWS_AS(regime_of(true, true), ContractError);
  OffsetTable bad = table;
  bad.entries[2].second = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  OffsetTable missing{{{FlowRegime::inflating, 6.0}}};
  CHECK_THROWS_AS(missing.validate(), ConfigError);
  CHECK_THROWS_AS(offset_correct(1050.0, false, true, missing), ConfigError);
}

TEST_CASE("bang-bang controller with deadband") {
  ControllerConfig c;
  c.setpoint_hpa = 1050.0;
  CHECK(controller_step(1047.9, c) == Actuation{true, false});
  CHECK(controller_step(1052.1, c) == Actuation{false, true});
  CHECK(controller_step(1048.0, c) == Actuation{false, false});
  CHECK(controller_step(1052.0, c) == Actuation{false, false});
  for (double e = 1000.0; e < 1100.0; e += 0.37) {
    const auto a = controller_step(e, c);
    CHECK_FALSE((a.pump_on && a.valve_open));
  }
}

TEST_CASE("closed loop settles, holds and never runs both actuators") {
  PneumaticSystem sys(PlantProfile{}, ControllerConfig{}, 2, 1050.0, 11);
  long rows = 0, unsafe = 0;
  sys.set_telemetry_sink([&](const TelemetryRow& r) {
    ++rows;
    unsafe += r.pump && r.valve;
  });
  sys.set_setpoint(0, 1070.0);
  sys.set_setpoint(1, 1020.0);
  CHECK_FALSE(sys.all_settled());
  REQUIRE(sys.run_until_settled(60.0));
  CHECK(std::abs(sys.true_pressure(0) - 1070.0) <= 2.0);
  CHECK(std::abs(sys.true_pressure(1) - 1020.0) <= 2.0);
  sys.advance(10.0);
  CHECK(std::abs(sys.true_pressure(0) - 1070.0) <= 2.0);
  CHECK(std::abs(sys.true_pressure(1) - 1020.0) <= 2.0);
  CHECK(unsafe == 0);
  CHECK(rows > 0);
  CHECK(sys.time_s() == doctest::Approx(rows / 2 * 0.01));
}

TEST_CASE("noise-free settling time is reproducible") {
  PneumaticSystem sys(quiet(), ControllerConfig{}, 1, 1050.0, 1);
  sys.set_setpoint(0, 1070.0);
  REQUIRE(sys.run_until_settled(60.0));
  // Crossing 1068 takes ln(125/107)/0.16 = 0.9722 s, then a 0.5 s hold.
  CHECK(sys.time_s() == doctest::Approx(0.98 + 0.5).epsilon(0.02));
  const double t0 = sys.time_s();
  sys.set_setpoint(0, 1050.0);
  REQUIRE(sys.run_until_settled(60.0));
  // Deflating to 1052: ln(68/52)/0.12 = 2.235 s, then hold plus the deflation delay.
  CHECK(sys.time_s() - t0 == doctest::Approx(2.24 + 1.5).epsilon(0.02));
}

TEST_CASE("identical seeds give identical runs") {
  auto run = [](std::uint64_t seed) {
    PneumaticSystem sys(PlantProfile{}, ControllerConfig{}, 1, 1050.0, seed);
    std::string csv;
    sys.set_telemetry_sink([&](const TelemetryRow& r) { csv += telemetry_csv_row(r); });
    sys.set_setpoint(0, 1080.0);
    sys.run_until_settled(60.0);
    return csv;
  };
  CHECK(run(5) == run(5));
  CHECK(run(5) != run(6));
}

TEST_CASE("venting and input validation") {
  PneumaticSystem sys(quiet(), ControllerConfig{}, 2, 1050.0, 1);
  CHECK_THROWS_AS(sys.set_setpoint(0, 1095.0), DomainError);
  CHECK_THROWS_AS(sys.set_setpoint(2, 1050.0), ContractError);
  CHECK_THROWS_AS(sys.estimate(-1), ContractError);
  sys.vent(1);
  CHECK(sys.venting(1));
  sys.advance(5.0);
  CHECK(sys.true_pressure(1) < 1030.0);
  CHECK_FALSE(sys.settled(1));
  CHECK(sys.plant(1).valve_open);
  sys.set_setpoint(1, 1050.0);
  CHECK_FALSE(sys.venting(1));
  CHECK(sys.run_until_settled(60.0));
  CHECK_THROWS_AS(PneumaticSystem(quiet(), ControllerConfig{}, 0, 1050.0, 1), ConfigError);
  CHECK_THROWS_AS(PneumaticSystem(quiet(), ControllerConfig{}, 1, 900.0, 1), DomainError);
}

TEST_CASE("plant profiles parse from key=value text") {
  const auto p = PlantProfile::parse("# bench rig\ninflate_rate_per_s = 0.2\nsensor_noise_hpa=0\n");
  CHECK(p.inflate_rate_per_s == 0.2);
  CHECK(p.sensor_noise_hpa == 0.0);
  CHECK(p.exhaust_rate_per_s == 0.12);
  CHECK_THROWS_AS(PlantProfile::parse("inflate_rate = 0.2\n"), ConfigError);
  CHECK_THROWS_AS(PlantProfile::parse("inflate_rate_per_s = -1\n"), ConfigError);
  CHECK_THROWS_AS(PlantProfile::parse("inflate_rate_per_s = fast\n"), ConfigError);
  CHECK(telemetry_csv_row({1.25, 1, 1050.0, 1049.5, true, false}) == "1.250,1,1050.0000,1049.5000,1,0\n");
}

TEST_CASE("pumping for a long time saturates at the supply ceiling") {
  PlantState s = make_plant(1010.0);
  s.pump_on = true;
  for (int i = 0; i < 1000; ++i) s = step_plant(s, 0.5);
  CHECK(s.bubble_pressure_hpa == doctest::Approx(1175.0).epsilon(1e-9));
  CHECK(s.bubble_pressure_hpa <= 1175.0);
}

TEST_CASE("corrected estimate tracks the bubble during inflation") {
  PneumaticSystem sys(quiet(), ControllerConfig{}, 1, 1010.0, 1);
  sys.set_setpoint(0, 1090.0);
  double worst = 0.0;
  sys.set_telemetry_sink([&](const TelemetryRow& r) { worst = std::max(worst, std::abs(r.est_hpa - r.true_hpa)); });
  sys.advance(3.0);
  CHECK(sys.plant(0).pump_on);
  CHECK(worst < 1.0);
}

TEST_CASE("controller below the band pumps") {
  ControllerConfig c;
  c.setpoint_hpa = 1070.0;
  CHECK(controller_step(1070.0, c) == Actuation{false, false});
  CHECK(controller_step(1070.0 - 2.0 * c.deadband_hpa, c) == Actuation{true, false});
}

// Golden settling time from tests/oracles/membrane_oracle.py.
TEST_CASE("closed loop from 1010 to 1070 settles on schedule and holds") {
  PneumaticSystem sys(quiet(), ControllerConfig{}, 1, 1010.0, 1);
  sys.set_setpoint(0, 1070.0);
  REQUIRE(sys.run_until_settled(30.0));
  CHECK(sys.time_s() == doctest::Approx(3.21).epsilon(0.01));
  for (int i = 0; i < 1000; ++i) {
    sys.step();
    CHECK(std::abs(sys.true_pressure(0) - 1070.0) <= 2.0);
  }
}
