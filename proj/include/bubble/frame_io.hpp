#pragma once

// Binary grid files. Every grid starts with a 32-byte ASCII header, space padded and
// terminated by '\n', followed by a little-endian row-major payload:
//
//   BBLF1 <w> <h> <um-per-unit>   depth, uint16
//   BBLI1 <w> <h> 255             IR intensity, uint8 (value / 255)
//   BBLM1 <w> <h> 1               mask, uint8 0/1
//   BBLV1 <w> <h> 1000            flow, int16 pairs in 1/1000 px, invalid = INT16_MIN
//   BBLC1 <w> <h> <runs>          contact set, uint32 run lengths alternating false/true,
//                                 starting with a (possibly empty) false run
//
// A run record is a sequence of entries, each a 64-byte header
// `BBLR1 <index> <R|F> <time_s> <pressure_hpa>` followed by one depth and one IR grid.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bubble/images.hpp"

namespace bubble::io {

inline constexpr std::size_t kGridHeaderBytes = 32;
inline constexpr std::size_t kRecordHeaderBytes = 64;
inline constexpr int kDefaultDepthScaleUm = 10;

std::string encode_depth(const DepthImage& depth, int scale_um = kDefaultDepthScaleUm);
std::string encode_ir(const IrImage& ir);
std::string encode_mask(const ContactMask& mask);
std::string encode_flow(const FlowField& flow);
std::string encode_contact_rle(const Grid<std::uint8_t>& contact);

// Decoders read one grid starting at `offset` and advance it past the grid. They throw
// FormatError carrying the absolute byte offset of the problem.
DepthImage decode_depth(std::string_view bytes, std::size_t& offset);
IrImage decode_ir(std::string_view bytes, std::size_t& offset);
ContactMask decode_mask(std::string_view bytes, std::size_t& offset);
FlowField decode_flow(std::string_view bytes, std::size_t& offset);
Grid<std::uint8_t> decode_contact_rle(std::string_view bytes, std::size_t& offset);

enum class FrameRole : char { reference = 'R', frame = 'F' };

struct RecordEntry {
  int index = 0;
  FrameRole role = FrameRole::frame;
  double time_s = 0.0;
  double pressure_hpa = 0.0;
  DepthImage depth;
  IrImage ir;
};

std::string encode_record_entry(const RecordEntry& entry);
/// Decodes a whole record; the depth image's pressure and both timestamps come from the entry header.
std::vector<RecordEntry> decode_record(std::string_view bytes);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

}  // namespace bubble::io
