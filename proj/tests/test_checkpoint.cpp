// Checkpoint round-trips, corruption detection, and exact training resume:
// a run stopped at an epoch boundary and continued must be indistinguishable
// from one that never stopped, down to identical loss rows and identical
// checkpoint bytes.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "doctest.h"
#include "lanegen/dataio.hpp"
#include "lanegen/error.hpp"
#include "lanegen/model.hpp"
#include "lanegen/palette.hpp"
#include "lanegen/trainer.hpp"

using namespace lanegen;

namespace {

TrainConfig tiny_train_config(int epochs) {
  TrainConfig tc;
  tc.arch.image_size = 16;
  tc.arch.base_channels = 4;
  tc.arch.depth = 4;
  tc.arch.skip_levels = ArchConfig::all_skips(4);
  tc.epochs = epochs;
  tc.batch_size = 4;
  tc.seed = 31;
  tc.persist = true;
  tc.checkpoint_interval = 0;  // final checkpoint only
  return tc;
}

DatasetSplit tiny_split(int count, std::uint64_t seed) {
  DatasetSplit split;
  split.name = "train";
  for (int i = 0; i < count; ++i)
    split.samples.push_back(
        synth_scene(seed + static_cast<std::uint64_t>(i), ClassPalette::default_palette(), 16));
  return split;
}

std::vector<char> file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::vector<std::string> csv_rows(const std::filesystem::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(line);
  return rows;
}

std::filesystem::path scratch(const std::string& leaf) {
  const std::filesystem::path p = std::filesystem::temp_directory_path() / leaf;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("checkpoint round-trips the full training state") {
  const std::filesystem::path dir = scratch("lanegen_ckpt_roundtrip");
  const DatasetSplit data = tiny_split(4, 900);
  TrainState state = make_initial_state(tiny_train_config(2));
  train(state, data, dir / "run");

  const std::filesystem::path path = dir / "state.ckpt";
  save_checkpoint(state, path);
  TrainState back = load_checkpoint(path);

  CHECK(back.epoch == state.epoch);
  CHECK(back.step == state.step);
  CHECK(back.config.arch == state.config.arch);
  CHECK(back.config.seed == state.config.seed);
  CHECK(back.config.epochs == state.config.epochs);
  CHECK(back.config.batch_size == state.config.batch_size);
  CHECK(back.config.source_mode == state.config.source_mode);
  CHECK(back.config.palette.size() == state.config.palette.size());
  CHECK(param_checksum(back.g.params()) == param_checksum(state.g.params()));
  CHECK(param_checksum(back.d.params()) == param_checksum(state.d.params()));
  CHECK(back.opt_g.t() == state.opt_g.t());
  CHECK(back.opt_d.t() == state.opt_d.t());
  CHECK(back.opt_g.m() == state.opt_g.m());
  CHECK(back.opt_g.v() == state.opt_g.v());

  // Saving the loaded state reproduces the file bit for bit.
  save_checkpoint(back, dir / "resaved.ckpt");
  CHECK(file_bytes(dir / "resaved.ckpt") == file_bytes(path));
  std::filesystem::remove_all(dir);
}

TEST_CASE("corrupt checkpoints are rejected, not silently loaded") {
  const std::filesystem::path dir = scratch("lanegen_ckpt_corrupt");
  TrainState state = make_initial_state(tiny_train_config(1));
  const std::filesystem::path path = dir / "good.ckpt";
  save_checkpoint(state, path);

  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_checkpoint(dir / "nope.ckpt"), IoError);
  }
  SUBCASE("foreign magic") {
    std::vector<char> bytes = file_bytes(path);
    bytes[0] = 'X';
    std::ofstream(dir / "magic.ckpt", std::ios::binary)
        .write(bytes.data(), static_cast<long>(bytes.size()));
    CHECK_THROWS_AS(load_checkpoint(dir / "magic.ckpt"), FormatError);
  }
  SUBCASE("flipped payload byte fails the checksum") {
    std::vector<char> bytes = file_bytes(path);
    bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 0x40);
    std::ofstream(dir / "flip.ckpt", std::ios::binary)
        .write(bytes.data(), static_cast<long>(bytes.size()));
    CHECK_THROWS_AS(load_checkpoint(dir / "flip.ckpt"), FormatError);
  }
  SUBCASE("truncation") {
    std::vector<char> bytes = file_bytes(path);
    bytes.resize(bytes.size() / 3);
    std::ofstream(dir / "trunc.ckpt", std::ios::binary)
        .write(bytes.data(), static_cast<long>(bytes.size()));
    CHECK_THROWS_AS(load_checkpoint(dir / "trunc.ckpt"), FormatError);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("resumed training is bit-identical to an uninterrupted run") {
  const DatasetSplit data = tiny_split(8, 901);
  const std::filesystem::path straight_dir = scratch("lanegen_ckpt_straight");
  const std::filesystem::path resumed_dir = scratch("lanegen_ckpt_resumed");

  // Uninterrupted: 4 epochs in one go.
  TrainState straight = make_initial_state(tiny_train_config(4));
  train(straight, data, straight_dir);

  // Interrupted: 2 epochs, reload from the checkpoint, extend to 4.
  {
    TrainState first = make_initial_state(tiny_train_config(2));
    train(first, data, resumed_dir);
  }
  TrainState resumed = load_checkpoint(resumed_dir / "last.ckpt");
  CHECK(resumed.epoch == 2);
  resumed.config.epochs = 4;
  train(resumed, data, resumed_dir);

  CHECK(resumed.step == straight.step);
  CHECK(param_checksum(resumed.g.params()) == param_checksum(straight.g.params()));
  CHECK(param_checksum(resumed.d.params()) == param_checksum(straight.d.params()));

  // Loss rows: the resumed file's appended rows equal the straight run's tail.
  const std::vector<std::string> a = csv_rows(straight_dir / "loss.csv");
  const std::vector<std::string> b = csv_rows(resumed_dir / "loss.csv");
  REQUIRE(a.size() == b.size());
  CHECK(a == b);

  // Final checkpoints agree byte for byte (the resumed one records epochs=4
  // exactly like the straight config).
  CHECK(file_bytes(resumed_dir / "last.ckpt") == file_bytes(straight_dir / "last.ckpt"));

  std::filesystem::remove_all(straight_dir);
  std::filesystem::remove_all(resumed_dir);
}

TEST_CASE("checkpoint interval writes epoch-stamped snapshots") {
  const std::filesystem::path dir = scratch("lanegen_ckpt_interval");
  TrainConfig tc = tiny_train_config(4);
  tc.checkpoint_interval = 2;
  const DatasetSplit data = tiny_split(4, 902);
  TrainState state = make_initial_state(tc);
  train(state, data, dir);
  CHECK(std::filesystem::exists(dir / "ckpt_epoch_0002.ckpt"));
  CHECK(std::filesystem::exists(dir / "ckpt_epoch_0004.ckpt"));
  CHECK(std::filesystem::exists(dir / "last.ckpt"));
  CHECK(file_bytes(dir / "last.ckpt") == file_bytes(dir / "ckpt_epoch_0004.ckpt"));

  TrainConfig off = tc;
  off.persist = false;
  const std::filesystem::path dir2 = scratch("lanegen_ckpt_none");
  TrainState state2 = make_initial_state(off);
  train(state2, data, dir2);
  CHECK_FALSE(std::filesystem::exists(dir2 / "last.ckpt"));

  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(dir2);
}
