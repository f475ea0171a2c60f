#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lanegen/dataio.hpp"
#include "lanegen/losses.hpp"
#include "lanegen/model.hpp"
#include "lanegen/optim.hpp"

namespace lanegen {

// Where the generator's source channels come from during training: `teacher`
// feeds the rendered ground-truth target (inference still uses noise);
// `noise` feeds Gaussian noise during training too, guarding against the
// identity shortcut.
enum class SourceMode { teacher, noise };

SourceMode source_mode_from_string(const std::string& s);  // ConfigError on unknown
std::string to_string(SourceMode m);

struct TrainConfig {
  ArchConfig arch = ArchConfig::desk_default();
  ClassPalette palette = ClassPalette::default_palette();
  int batch_size = 1;  // desk-scale quality favors per-sample updates
  double learning_rate = 0.0002;
  double beta1 = 0.5;
  double beta2 = 0.999;
  int epochs = 200;
  std::uint64_t seed = 1;
  bool adversarial_enabled = true;
  LossWeights weights;
  SourceMode source_mode = SourceMode::teacher;
  int checkpoint_interval = 50;  // epochs; <= 0 means final checkpoint only
  bool persist = true;           // false disables checkpointing entirely

  void validate() const;  // ConfigError on violated invariants
};

// Everything needed to continue training exactly where it stopped. Shuffle
// orders and training noise are derived statelessly from (seed, epoch, step),
// so counters plus parameters plus optimizer moments are the whole state.
struct TrainState {
  TrainConfig config;
  std::int64_t epoch = 0;  // completed epochs
  std::int64_t step = 0;   // completed steps
  Generator g;
  Discriminator d;
  Adam opt_g, opt_d;

  explicit TrainState(const TrainConfig& cfg);
};

// Fresh parameters from seed-derived init streams, optimizers attached.
TrainState make_initial_state(const TrainConfig& config);

// One D-then-G alternating update on a batch. With adversarial_enabled off,
// the discriminator is not touched at all and l_adv reports 0. Throws on a
// non-finite loss, naming the offending term.
LossBreakdown train_step(TrainState& state, const std::vector<const SamplePair*>& batch);
LossBreakdown train_step(TrainState& state, const std::vector<SamplePair>& batch);

// Runs epochs [state.epoch, config.epochs): per-epoch seeded shuffle,
// batches in order, one CSV row `step,epoch,l_mse,l_adv,l_total_g,l_d` per
// step into <out_dir>/loss.csv (appended when resuming), checkpoints per
// config into <out_dir>.
void train(TrainState& state, const DatasetSplit& data, const std::filesystem::path& out_dir);

// Versioned binary checkpoint (magic LANEGEN-CKPT-v1): config echo, epoch
// and step counters, both networks' parameters and batch-norm buffers, both
// optimizer states, RNG derivation base, trailing content checksum. The
// state is only read; non-const because parameter registration hands out
// mutable views.
void save_checkpoint(TrainState& state, const std::filesystem::path& path);
TrainState load_checkpoint(const std::filesystem::path& path);

}  // namespace lanegen
