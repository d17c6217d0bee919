#include "bubble/frame_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace bubble::io {

namespace {

struct GridHeader {
  std::string tag;
  int width = 0;
  int height = 0;
  long param = 0;
};

std::string make_header(std::size_t size, const char* fmt, auto... args) {
  char buf[128];
  const int n = std::snprintf(buf, sizeof buf, fmt, args...);
  if (n < 0 || static_cast<std::size_t>(n) >= size) throw ContractError("header fields do not fit");
  std::string h(size, ' ');
  std::memcpy(h.data(), buf, static_cast<std::size_t>(n));
  h.back() = '\n';
  return h;
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

std::uint16_t get_u16(std::string_view b, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    (static_cast<unsigned char>(b[at + 1]) << 8));
}

std::uint32_t get_u32(std::string_view b, std::size_t at) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + k])) << (8 * k);
  return v;
}

void require(std::string_view bytes, std::size_t offset, std::size_t n, const char* what) {
  if (bytes.size() < offset || bytes.size() - offset < n)
    throw FormatError(std::string("truncated ") + what, bytes.size());
}

GridHeader read_header(std::string_view bytes, std::size_t& offset, std::string_view expected_tag) {
  require(bytes, offset, kGridHeaderBytes, "grid header");
  const std::string text(bytes.substr(offset, kGridHeaderBytes));
  if (text.back() != '\n') throw FormatError("grid header not newline terminated", offset + kGridHeaderBytes - 1);
  if (text.compare(0, expected_tag.size(), expected_tag) != 0)
    throw FormatError("expected " + std::string(expected_tag) + " grid header", offset);
  GridHeader h;
  std::istringstream in(text.substr(0, kGridHeaderBytes - 1));
  std::string rest;
  if (!(in >> h.tag >> h.width >> h.height >> h.param) || (in >> rest))
    throw FormatError("malformed " + std::string(expected_tag) + " header fields", offset);
  if (h.width <= 0 || h.height <= 0 || h.width > 1 << 15 || h.height > 1 << 15)
    throw FormatError("invalid grid dimensions", offset);
  offset += kGridHeaderBytes;
  return h;
}

std::size_t cells(const GridHeader& h) { return static_cast<std::size_t>(h.width) * h.height; }

}  // namespace

// ---------------------------------------------------------------- encoders

std::string encode_depth(const DepthImage& depth, int scale_um) {
  if (scale_um <= 0) throw ContractError("depth scale must be positive");
  std::string out = make_header(kGridHeaderBytes, "BBLF1 %d %d %d", depth.width(), depth.height(), scale_um);
  out.reserve(out.size() + 2 * depth.range_mm.size());
  const double units_per_mm = 1000.0 / scale_um;
  for (double v : depth.range_mm.values()) {
    const double q = std::clamp(std::round(v * units_per_mm), 0.0, 65535.0);
    put_u16(out, static_cast<std::uint16_t>(q));
  }
  return out;
}

std::string encode_ir(const IrImage& ir) {
  std::string out = make_header(kGridHeaderBytes, "BBLI1 %d %d 255", ir.width(), ir.height());
  for (double v : ir.intensity.values())
    out.push_back(static_cast<char>(static_cast<std::uint8_t>(std::clamp(std::round(v * 255.0), 0.0, 255.0))));
  return out;
}

std::string encode_mask(const ContactMask& mask) {
  std::string out = make_header(kGridHeaderBytes, "BBLM1 %d %d 1", mask.width(), mask.height());
  for (auto v : mask.on.values()) out.push_back(v ? 1 : 0);
  return out;
}

std::string encode_flow(const FlowField& flow) {
  std::string out = make_header(kGridHeaderBytes, "BBLV1 %d %d 1000", flow.width(), flow.height());
  auto milli = [](double v) {
    return static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(std::round(v * 1000.0), -32767.0, 32767.0)));
  };
  constexpr auto invalid = static_cast<std::uint16_t>(std::numeric_limits<std::int16_t>::min());
  for (std::size_t i = 0; i < flow.displacement.size(); ++i) {
    if (flow.valid[i]) {
      put_u16(out, milli(flow.displacement[i].x));
      put_u16(out, milli(flow.displacement[i].y));
    } else {
      put_u16(out, invalid);
      put_u16(out, invalid);
    }
  }
  return out;
}

std::string encode_contact_rle(const Grid<std::uint8_t>& contact) {
  std::vector<std::uint32_t> runs;
  bool current = false;
  std::uint32_t run = 0;
  for (auto v : contact.values()) {
    if ((v != 0) != current) {
      runs.push_back(run);
      run = 0;
      current = !current;
    }
    ++run;
  }
  runs.push_back(run);
  std::string out = make_header(kGridHeaderBytes, "BBLC1 %d %d %zu", contact.width(), contact.height(), runs.size());
  for (auto r : runs) put_u32(out, r);
  return out;
}

// ---------------------------------------------------------------- decoders

DepthImage decode_depth(std::string_view bytes, std::size_t& offset) {
  const std::size_t start = offset;
  const GridHeader h = read_header(bytes, offset, "BBLF1");
  if (h.param <= 0) throw FormatError("depth scale must be positive", start);
  require(bytes, offset, 2 * cells(h), "depth payload");
  DepthImage d;
  d.range_mm = Grid<double>(h.width, h.height);
  const double mm_per_unit = h.param / 1000.0;
  for (std::size_t i = 0; i < cells(h); ++i) d.range_mm[i] = get_u16(bytes, offset + 2 * i) * mm_per_unit;
  offset += 2 * cells(h);
  return d;
}

IrImage decode_ir(std::string_view bytes, std::size_t& offset) {
  const std::size_t start = offset;
  const GridHeader h = read_header(bytes, offset, "BBLI1");
  if (h.param != 255) throw FormatError("IR full scale must be 255", start);
  require(bytes, offset, cells(h), "IR payload");
  IrImage ir;
  ir.intensity = Grid<double>(h.width, h.height);
  for (std::size_t i = 0; i < cells(h); ++i)
    ir.intensity[i] = static_cast<unsigned char>(bytes[offset + i]) / 255.0;
  offset += cells(h);
  return ir;
}

ContactMask decode_mask(std::string_view bytes, std::size_t& offset) {
  const GridHeader h = read_header(bytes, offset, "BBLM1");
  require(bytes, offset, cells(h), "mask payload");
  ContactMask m(h.width, h.height);
  for (std::size_t i = 0; i < cells(h); ++i) {
    const auto v = static_cast<unsigned char>(bytes[offset + i]);
    if (v > 1) throw FormatError("mask value not 0/1", offset + i);
    m.on[i] = v;
  }
  offset += cells(h);
  return m;
}

FlowField decode_flow(std::string_view bytes, std::size_t& offset) {
  const GridHeader h = read_header(bytes, offset, "BBLV1");
  require(bytes, offset, 4 * cells(h), "flow payload");
  FlowField f(h.width, h.height);
  const double scale = h.param > 0 ? 1.0 / h.param : 1e-3;
  for (std::size_t i = 0; i < cells(h); ++i) {
    const auto x = static_cast<std::int16_t>(get_u16(bytes, offset + 4 * i));
    const auto y = static_cast<std::int16_t>(get_u16(bytes, offset + 4 * i + 2));
    if (x == std::numeric_limits<std::int16_t>::min()) continue;
    f.displacement[i] = {x * scale, y * scale};
    f.valid[i] = 1;
  }
  offset += 4 * cells(h);
  return f;
}

Grid<std::uint8_t> decode_contact_rle(std::string_view bytes, std::size_t& offset) {
  const std::size_t start = offset;
  const GridHeader h = read_header(bytes, offset, "BBLC1");
  if (h.param <= 0) throw FormatError("contact sidecar needs at least one run", start);
  const auto nruns = static_cast<std::size_t>(h.param);
  require(bytes, offset, 4 * nruns, "contact runs");
  Grid<std::uint8_t> g(h.width, h.height, 0);
  std::size_t pos = 0;
  for (std::size_t r = 0; r < nruns; ++r) {
    const std::uint32_t len = get_u32(bytes, offset + 4 * r);
    if (len > cells(h) - pos) throw FormatError("contact runs exceed grid size", offset + 4 * r);
    if (r % 2 == 1) std::fill_n(g.values().begin() + static_cast<std::ptrdiff_t>(pos), len, 1);
    pos += len;
  }
  if (pos != cells(h)) throw FormatError("contact runs do not cover the grid", offset + 4 * nruns);
  offset += 4 * nruns;
  return g;
}

// ---------------------------------------------------------------- records

std::string encode_record_entry(const RecordEntry& e) {
  std::string out = make_header(kRecordHeaderBytes, "BBLR1 %d %c %.3f %.4f", e.index, static_cast<char>(e.role),
                                e.time_s, e.pressure_hpa);
  out += encode_depth(e.depth);
  out += encode_ir(e.ir);
  return out;
}

std::vector<RecordEntry> decode_record(std::string_view bytes) {
  std::vector<RecordEntry> entries;
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    require(bytes, offset, kRecordHeaderBytes, "record entry header");
    const std::string text(bytes.substr(offset, kRecordHeaderBytes));
    if (text.compare(0, 6, "BBLR1 ") != 0 || text.back() != '\n')
      throw FormatError("expected BBLR1 entry header", offset);
    RecordEntry e;
    char role = 0;
    int consumed = 0;
    if (std::sscanf(text.c_str(), "BBLR1 %d %c %lf %lf%n", &e.index, &role, &e.time_s, &e.pressure_hpa,
                    &consumed) != 4 ||
        text.find_first_not_of(' ', static_cast<std::size_t>(consumed)) != kRecordHeaderBytes - 1)
      throw FormatError("malformed BBLR1 entry header", offset);
    if (role != 'R' && role != 'F') throw FormatError("unknown frame role", offset);
    e.role = static_cast<FrameRole>(role);
    offset += kRecordHeaderBytes;
    e.depth = decode_depth(bytes, offset);
    e.ir = decode_ir(bytes, offset);
    if (!e.depth.range_mm.same_shape(e.ir.intensity))
      throw FormatError("depth and IR dimensions differ", offset);
    e.depth.pressure_hpa = e.pressure_hpa;
    e.depth.timestamp_s = e.time_s;
    e.ir.timestamp_s = e.time_s;
    entries.push_back(std::move(e));
  }
  return entries;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path);
}

}  // namespace bubble::io
