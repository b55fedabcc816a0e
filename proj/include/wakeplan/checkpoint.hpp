#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "wakeplan/corpus_io.hpp"
#include "wakeplan/error.hpp"
#include "wakeplan/mlp.hpp"
#include "wakeplan/serialize.hpp"
#include "wakeplan/util.hpp"

// Model checkpoint: <dir>/model.json (manifest) + <dir>/model.bin.
// The blob holds little-endian f64 parameters in the order w1, b1, w2, b2, w3,
// b3 (matrices row-major), followed by a u32 CRC32 of those bytes.

namespace wakeplan {

struct Checkpoint {
  MlpModel model;
  TrainConfig config;
};

namespace detail {
inline void put_matrix(std::vector<std::uint8_t>& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) util::put_f64(out, m(r, c));
}
inline void get_matrix(const std::uint8_t*& p, Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = util::get_f64(p);
      p += 8;
    }
}
inline void get_vector(const std::uint8_t*& p, Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = util::get_f64(p);
    p += 8;
  }
}
inline json shape(Eigen::Index r, Eigen::Index c) { return json::array({r, c}); }
}  // namespace detail

inline std::vector<std::uint8_t> encode_parameters(const MlpModel& m) {
  std::vector<std::uint8_t> out;
  out.reserve(m.parameter_count() * 8 + 4);
  detail::put_matrix(out, m.w1);
  detail::put_matrix(out, m.b1);
  detail::put_matrix(out, m.w2);
  detail::put_matrix(out, m.b2);
  detail::put_matrix(out, m.w3);
  detail::put_matrix(out, m.b3);
  util::put_u32(out, util::crc32(out));
  return out;
}

inline void save_checkpoint(const std::filesystem::path& dir, const MlpModel& m, const TrainConfig& cfg) {
  m.check();
  std::filesystem::create_directories(dir);
  const auto blob = encode_parameters(m);
  json manifest = {{"format", "wakeplan-mlp-1"},
                   {"variant", std::string(to_string(m.variant))},
                   {"shapes",
                    {{"w1", detail::shape(m.w1.rows(), m.w1.cols())},
                     {"b1", detail::shape(m.b1.size(), 1)},
                     {"w2", detail::shape(m.w2.rows(), m.w2.cols())},
                     {"b2", detail::shape(m.b2.size(), 1)},
                     {"w3", detail::shape(m.w3.rows(), m.w3.cols())},
                     {"b3", detail::shape(m.b3.size(), 1)}}},
                   {"train_config", cfg},
                   {"norm_stats", m.norm},
                   {"input_units", "meters"},
                   {"blob", "model.bin"},
                   {"blob_crc32", util::get_u32(blob.data() + blob.size() - 4)}};
  write_text(dir / "model.json", manifest.dump(2) + "\n");
  std::ofstream out(dir / "model.bin", std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint blob in " + dir.string());
  out.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
  if (!out) throw IoError("checkpoint blob write failed in " + dir.string());
}

inline Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  const json manifest = read_json_file(dir / "model.json");
  if (manifest.value("format", "") != "wakeplan-mlp-1") throw VersionError("checkpoint: unsupported format");
  Checkpoint ck;
  const auto& shapes = manifest.at("shapes");
  auto expect = [&](const char* name, Eigen::Index r, Eigen::Index c) {
    if (shapes.at(name) != detail::shape(r, c))
      throw FormatError(std::string("checkpoint: shape mismatch for ") + name);
  };
  MlpModel& m = ck.model;
  expect("w1", m.w1.rows(), m.w1.cols());
  expect("b1", m.b1.size(), 1);
  expect("w2", m.w2.rows(), m.w2.cols());
  expect("b2", m.b2.size(), 1);
  expect("w3", m.w3.rows(), m.w3.cols());
  expect("b3", m.b3.size(), 1);
  m.variant = parse_variant(manifest.at("variant").get<std::string>());
  manifest.at("norm_stats").get_to(m.norm);
  manifest.at("train_config").get_to(ck.config);

  std::ifstream in(dir / manifest.value("blob", std::string("model.bin")), std::ios::binary);
  if (!in) throw IoError("checkpoint: cannot open parameter blob in " + dir.string());
  const auto bytes = util::read_all(in);
  const std::size_t expected = m.parameter_count() * 8 + 4;
  if (bytes.size() < expected) throw TruncatedError("checkpoint: parameter blob truncated");
  if (bytes.size() > expected) throw FormatError("checkpoint: parameter blob has trailing bytes");
  const std::uint32_t stored = util::get_u32(bytes.data() + expected - 4);
  if (stored != util::crc32(std::span<const std::uint8_t>(bytes.data(), expected - 4)))
    throw ChecksumError("checkpoint: parameter blob CRC32 mismatch");
  const std::uint8_t* p = bytes.data();
  detail::get_matrix(p, m.w1);
  detail::get_vector(p, m.b1);
  detail::get_matrix(p, m.w2);
  detail::get_vector(p, m.b2);
  detail::get_matrix(p, m.w3);
  detail::get_vector(p, m.b3);
  m.check();
  return ck;
}

}  // namespace wakeplan
