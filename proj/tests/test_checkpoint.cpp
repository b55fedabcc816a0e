#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "wakeplan/checkpoint.hpp"

using namespace wakeplan;
namespace fs = std::filesystem;

namespace {
MlpModel trained_looking_model() {
  MlpModel m = init_xavier(77);
  for (Eigen::Index i = 0; i < m.b2.size(); ++i) m.b2(i) = std::sin(static_cast<double>(i)) * 1e-3;
  m.b3(5) = -1.0 / 3.0;
  m.w3(7, 11) = 1e-300;
  m.norm.input_mean[0] = 120.5;
  m.norm.input_std[0] = 7.25;
  m.norm.target_mean[17] = 0.1;
  m.norm.target_std[17] = 3.0;
  m.variant = Variant::current_informed;
  return m;
}

fs::path fresh_dir(const char* name) {
  const auto d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  return d;
}

void flip_byte(const fs::path& file, std::streamoff at) {
  std::fstream f(file, std::ios::binary | std::ios::in | std::ios::out);
  f.seekg(at);
  char c;
  f.get(c);
  f.seekp(at);
  f.put(static_cast<char>(c ^ 0x40));
}
}  // namespace

TEST(Checkpoint, BitwiseRoundTrip) {
  const auto dir = fresh_dir("wakeplan_ck_rt");
  const MlpModel m = trained_looking_model();
  TrainConfig cfg;
  cfg.lr = 3e-4;
  cfg.seed = 99;
  save_checkpoint(dir, m, cfg);
  const Checkpoint ck = load_checkpoint(dir);
  EXPECT_TRUE(ck.model == m);
  EXPECT_EQ(ck.model.w3(7, 11), 1e-300);
  EXPECT_EQ(ck.config.lr, 3e-4);
  EXPECT_EQ(ck.config.seed, 99u);
  EXPECT_EQ(fs::file_size(dir / "model.bin"), m.parameter_count() * 8 + 4);

  // Saving the loaded model reproduces the same bytes.
  const auto dir2 = fresh_dir("wakeplan_ck_rt2");
  save_checkpoint(dir2, ck.model, ck.config);
  EXPECT_EQ(encode_parameters(ck.model), encode_parameters(m));
}

TEST(Checkpoint, CorruptedBlobIsRejected) {
  const auto dir = fresh_dir("wakeplan_ck_bad");
  save_checkpoint(dir, trained_looking_model(), TrainConfig{});
  flip_byte(dir / "model.bin", 1000);
  EXPECT_THROW(load_checkpoint(dir), ChecksumError);
}

TEST(Checkpoint, TruncatedAndOversizedBlobs) {
  const auto dir = fresh_dir("wakeplan_ck_trunc");
  save_checkpoint(dir, trained_looking_model(), TrainConfig{});
  const auto size = fs::file_size(dir / "model.bin");
  fs::resize_file(dir / "model.bin", size - 9);
  EXPECT_THROW(load_checkpoint(dir), TruncatedError);
  fs::resize_file(dir / "model.bin", size + 1);
  EXPECT_THROW(load_checkpoint(dir), FormatError);
  fs::remove(dir / "model.bin");
  EXPECT_THROW(load_checkpoint(dir), IoError);
}

TEST(Checkpoint, ManifestChecks) {
  const auto dir = fresh_dir("wakeplan_ck_manifest");
  save_checkpoint(dir, trained_looking_model(), TrainConfig{});
  const json good = read_json_file(dir / "model.json");

  json bad_shape = good;
  bad_shape["shapes"]["w2"] = json::array({256, 64});
  write_text(dir / "model.json", bad_shape.dump());
  EXPECT_THROW(load_checkpoint(dir), FormatError);

  json bad_format = good;
  bad_format["format"] = "wakeplan-mlp-0";
  write_text(dir / "model.json", bad_format.dump());
  EXPECT_THROW(load_checkpoint(dir), VersionError);

  write_text(dir / "model.json", good.dump());
  EXPECT_NO_THROW(load_checkpoint(dir));
  EXPECT_THROW(load_checkpoint(fresh_dir("wakeplan_ck_missing")), IoError);
}

TEST(Checkpoint, RefusesNonFiniteParameters) {
  MlpModel m = trained_looking_model();
  m.w1(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(save_checkpoint(fresh_dir("wakeplan_ck_nan"), m, TrainConfig{}), ConfigError);
}
