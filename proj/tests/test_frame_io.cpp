#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "bubble/frame_io.hpp"
#include "bubble/membrane.hpp"

using namespace bubble;
using namespace bubble::io;

namespace {

sim::MembraneState pressed_state() {
  static const auto s = sim::press_object(sim::inflate_shape(sim::BubbleConfig{}, 1050.0),
                                          sim::ObjectPrimitive::cylinder(15.0), 25.0);
  return s;
}

}  // namespace

TEST_CASE("depth frames round trip to the quantisation step") {
  const auto s = pressed_state();
  const auto d = sim::render_depth(s);
  const std::string bytes = encode_depth(d);
  CHECK(bytes.size() == kGridHeaderBytes + 2 * d.range_mm.size());
  CHECK(bytes.substr(0, 5) == "BBLF1");
  CHECK(bytes[kGridHeaderBytes - 1] == '\n');
  std::size_t off = 0;
  const auto back = decode_depth(bytes, off);
  CHECK(off == bytes.size());
  for (std::size_t i = 0; i < d.range_mm.size(); ++i) CHECK(std::abs(back.range_mm[i] - d.range_mm[i]) <= 0.005 + 1e-12);
  // Decoding is a fixed point after one quantisation.
  std::size_t off2 = 0;
  CHECK(decode_depth(encode_depth(back), off2).range_mm == back.range_mm);
}

TEST_CASE("IR, mask, flow and contact grids round trip") {
  const auto s = pressed_state();
  const auto ir = sim::render_ir(s);
  std::size_t off = 0;
  const auto ir_back = decode_ir(encode_ir(ir), off);
  for (std::size_t i = 0; i < ir.intensity.size(); ++i)
    CHECK(std::abs(ir_back.intensity[i] - ir.intensity[i]) <= 0.5 / 255.0 + 1e-12);

  ContactMask m;
  m.on = s.contact;
  off = 0;
  CHECK(decode_mask(encode_mask(m), off).on == m.on);

  off = 0;
  CHECK(decode_contact_rle(encode_contact_rle(s.contact), off) == s.contact);
  Grid<std::uint8_t> all(5, 3, 1);
  off = 0;
  CHECK(decode_contact_rle(encode_contact_rle(all), off) == all);

  FlowField f(6, 4);
  f.displacement(1, 1) = {1.2345, -0.5};
  f.valid(1, 1) = 1;
  f.displacement(2, 2) = {-3.0, 2.0};
  f.valid(2, 2) = 1;
  off = 0;
  const auto fb = decode_flow(encode_flow(f), off);
  CHECK(fb.valid == f.valid);
  CHECK(fb.displacement(1, 1).x == doctest::Approx(1.2345).epsilon(1e-3));
  CHECK(fb.displacement(2, 2).y == doctest::Approx(2.0));
  CHECK(fb.displacement(0, 0) == Vec2{});
}

TEST_CASE("record entries carry role, time and pressure") {
  const auto s = pressed_state();
  RecordEntry e;
  e.index = 7;
  e.role = FrameRole::reference;
  e.time_s = 12.5;
  e.pressure_hpa = 1049.87;
  e.depth = sim::render_depth(s);
  e.ir = sim::render_ir(s);
  std::string bytes = encode_record_entry(e);
  CHECK(bytes.substr(0, 6) == "BBLR1 ");
  CHECK(bytes[kRecordHeaderBytes - 1] == '\n');
  e.index = 8;
  e.role = FrameRole::frame;
  bytes += encode_record_entry(e);
  const auto entries = decode_record(bytes);
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].role == FrameRole::reference);
  CHECK(entries[1].index == 8);
  CHECK(entries[1].time_s == 12.5);
  CHECK(entries[1].pressure_hpa == doctest::Approx(1049.87));
  CHECK(entries[1].depth.pressure_hpa == entries[1].pressure_hpa);
  CHECK(entries[1].ir.timestamp_s == 12.5);
  // Re-encoding decoded entries reproduces the bytes exactly.
  CHECK(encode_record_entry(entries[0]) + encode_record_entry(entries[1]) == bytes);
  CHECK(decode_record("").empty());
}

TEST_CASE("malformed data reports the failing byte offset") {
  const auto s = pressed_state();
  RecordEntry e;
  e.depth = sim::render_depth(s);
  e.ir = sim::render_ir(s);
  const std::string good = encode_record_entry(e);

  SUBCASE("truncated payload") {
    const std::string cut = good.substr(0, good.size() - 10);
    try {
      decode_record(cut);
      FAIL("expected FormatError");
    } catch (const FormatError& err) {
      CHECK(err.offset() == cut.size());
      CHECK(std::string(err.what()).find("truncated") != std::string::npos);
    }
  }
  SUBCASE("second entry with a bad tag") {
    std::string two = good + good;
    two[good.size()] = 'X';
    try {
      decode_record(two);
      FAIL("expected FormatError");
    } catch (const FormatError& err) {
      CHECK(err.offset() == good.size());
    }
  }
  SUBCASE("bad role") {
    std::string bad = good;
    bad[bad.find(" F ") + 1] = 'Q';
    CHECK_THROWS_AS(decode_record(bad), FormatError);
  }
  SUBCASE("mask values other than 0 and 1") {
    ContactMask m(4, 2);
    std::string bytes = encode_mask(m);
    bytes[kGridHeaderBytes + 5] = 2;
    std::size_t off = 0;
    try {
      decode_mask(bytes, off);
      FAIL("expected FormatError");
    } catch (const FormatError& err) {
      CHECK(err.offset() == kGridHeaderBytes + 5);
    }
  }
  SUBCASE("contact runs that overflow the grid") {
    std::string bytes = encode_contact_rle(Grid<std::uint8_t>(3, 3, 0));
    bytes[kGridHeaderBytes] = 10;
    std::size_t off = 0;
    CHECK_THROWS_AS(decode_contact_rle(bytes, off), FormatError);
  }
  SUBCASE("wrong grid kind") {
    std::size_t off = 0;
    CHECK_THROWS_AS(decode_ir(encode_depth(e.depth), off), FormatError);
  }
}

TEST_CASE("files round trip") {
  const auto path = (std::filesystem::temp_directory_path() / "bubble_io_test.bin").string();
  const std::string data("a\0b\xff", 4);
  write_file(path, data);
  CHECK(read_file(path) == data);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_file(path), Error);
}
