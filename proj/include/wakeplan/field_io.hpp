#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "wakeplan/error.hpp"
#include "wakeplan/flowfield.hpp"
#include "wakeplan/util.hpp"

namespace wakeplan {

// Binary field file ("WPF1"), all little-endian:
//
//   char[4] magic "WPF1"
//   u32 nx, u32 ny, u32 nz
//   f64 extent, f64 flow_speed, f64 flow_angle
//   u64 seed
//   f64 speed[nx*ny*nz]            x fastest, then y, then z
//   u8  occupied[nx*ny*nz]
//   u32 crc32(speed bytes + occupancy bytes)
namespace field_format {
inline constexpr char kMagic[4] = {'W', 'P', 'F', '1'};
inline constexpr std::size_t kHeaderBytes = 4 + 3 * 4 + 3 * 8 + 8;
}  // namespace field_format

inline std::vector<std::uint8_t> encode_field(const FlowField& f) {
  const GridSpec& g = f.spec();
  std::vector<std::uint8_t> out;
  out.reserve(field_format::kHeaderBytes + g.size() * 9 + 4);
  out.insert(out.end(), field_format::kMagic, field_format::kMagic + 4);
  util::put_u32(out, static_cast<std::uint32_t>(g.nx));
  util::put_u32(out, static_cast<std::uint32_t>(g.ny));
  util::put_u32(out, static_cast<std::uint32_t>(g.nz));
  util::put_f64(out, g.extent);
  util::put_f64(out, f.scenario().flow_speed);
  util::put_f64(out, f.scenario().flow_angle);
  util::put_u64(out, f.scenario().seed);
  const std::size_t payload_start = out.size();
  for (double v : f.speeds()) util::put_f64(out, v);
  out.insert(out.end(), f.occupancy().begin(), f.occupancy().end());
  const std::uint32_t crc =
      util::crc32(std::span<const std::uint8_t>(out.data() + payload_start, out.size() - payload_start));
  util::put_u32(out, crc);
  return out;
}

inline FlowField decode_field(std::span<const std::uint8_t> bytes) {
  using namespace field_format;
  if (bytes.size() < 4) throw TruncatedError("field file: shorter than its magic number");
  if (!(bytes[0] == 'W' && bytes[1] == 'P' && bytes[2] == 'F'))
    throw FormatError("field file: bad magic number");
  if (bytes[3] != kMagic[3])
    throw VersionError(std::string("field file: unsupported version '") + static_cast<char>(bytes[3]) + "'");
  if (bytes.size() < kHeaderBytes) throw TruncatedError("field file: truncated header");

  const std::uint8_t* p = bytes.data() + 4;
  GridSpec g;
  g.nx = static_cast<int>(util::get_u32(p));
  g.ny = static_cast<int>(util::get_u32(p + 4));
  g.nz = static_cast<int>(util::get_u32(p + 8));
  g.extent = util::get_f64(p + 12);
  ScenarioParams sc;
  sc.flow_speed = util::get_f64(p + 20);
  sc.flow_angle = util::get_f64(p + 28);
  sc.seed = util::get_u64(p + 36);
  try {
    g.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("field file: invalid grid header: ") + e.what());
  }

  const std::size_t n = g.size();
  const std::size_t expected = kHeaderBytes + n * 8 + n + 4;
  if (bytes.size() < expected) throw TruncatedError("field file: truncated payload");
  if (bytes.size() > expected) throw FormatError("field file: trailing bytes after checksum");

  const std::uint8_t* payload = bytes.data() + kHeaderBytes;
  const std::uint32_t stored = util::get_u32(payload + n * 9);
  const std::uint32_t actual = util::crc32(std::span<const std::uint8_t>(payload, n * 9));
  if (stored != actual) throw ChecksumError("field file: CRC32 mismatch");

  std::vector<double> speed(n);
  for (std::size_t i = 0; i < n; ++i) speed[i] = util::get_f64(payload + 8 * i);
  std::vector<std::uint8_t> occ(payload + 8 * n, payload + 9 * n);
  try {
    return FlowField(g, sc, std::move(speed), std::move(occ));
  } catch (const ConfigError& e) {
    throw FormatError(std::string("field file: invalid contents: ") + e.what());
  }
}

inline void write_field(const std::filesystem::path& path, const FlowField& f) {
  const auto bytes = encode_field(f);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

inline FlowField read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open field file: " + path.string());
  const auto bytes = util::read_all(in);
  return decode_field(bytes);
}

}  // namespace wakeplan
