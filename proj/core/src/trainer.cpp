#include "lanegen/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "lanegen/error.hpp"
#include "lanegen/inference.hpp"
#include "lanegen/rng.hpp"

namespace lanegen {

namespace {

constexpr std::uint64_t kGenInitTag = 0x67696e6974ULL;
constexpr std::uint64_t kDiscInitTag = 0x64696e6974ULL;
constexpr std::uint64_t kShuffleTag = 0x73687566ULL;
constexpr std::uint64_t kSourceNoiseTag = 0x736e6f69ULL;

void require_finite(double value, const char* term, std::int64_t step) {
  if (!std::isfinite(value))
    throw Error("non-finite loss term " + std::string(term) + " at step " +
                std::to_string(step + 1) + "; training aborted");
}

// Stacks per-sample conditioned inputs and rendered targets into batch
// tensors. Teacher mode sources the rendered target itself; noise mode
// draws a per-(step, item) noise image.
void build_batch(const TrainState& state, const std::vector<const SamplePair*>& batch,
                 const ClassPalette& palette, Tensor& x, Tensor& target, Tensor& context) {
  const int S = state.config.arch.image_size;
  const int B = static_cast<int>(batch.size());
  x = Tensor(B, 6, S, S);
  target = Tensor(B, 3, S, S);
  context = Tensor(B, 3, S, S);
  for (int k = 0; k < B; ++k) {
    const SamplePair& sample = *batch[static_cast<std::size_t>(k)];
    if (sample.context.height != S || sample.context.width != S)
      throw ValidationError("train batch item '" + sample.id + "' is " +
                            std::to_string(sample.context.height) + "x" +
                            std::to_string(sample.context.width) + ", config wants " +
                            std::to_string(S) + "x" + std::to_string(S));
    const RgbImage rendered = render_labels(sample.target, palette);
    const RgbImage source =
        state.config.source_mode == SourceMode::teacher
            ? rendered
            : noise_image(S, S,
                          derive_seed(state.config.seed,
                                      {kSourceNoiseTag, static_cast<std::uint64_t>(state.step),
                                       static_cast<std::uint64_t>(k)}));
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < S; ++y)
        for (int xx = 0; xx < S; ++xx) {
          x.at(k, c, y, xx) = source.at(y, xx, c);
          x.at(k, c + 3, y, xx) = sample.context.at(y, xx, c);
          target.at(k, c, y, xx) = rendered.at(y, xx, c);
          context.at(k, c, y, xx) = sample.context.at(y, xx, c);
        }
  }
}

}  // namespace

SourceMode source_mode_from_string(const std::string& s) {
  if (s == "teacher") return SourceMode::teacher;
  if (s == "noise") return SourceMode::noise;
  throw ConfigError("unknown source_mode '" + s + "' (expected teacher or noise)");
}

std::string to_string(SourceMode m) { return m == SourceMode::teacher ? "teacher" : "noise"; }

void TrainConfig::validate() const {
  arch.validate();
  weights.validate();
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("train.beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("train.beta2 must lie in [0, 1)");
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
}

TrainState::TrainState(const TrainConfig& cfg) : config(cfg), g(cfg.arch), d(cfg.arch) {
  config.validate();
  AdamConfig ac;
  ac.lr = cfg.learning_rate;
  ac.beta1 = cfg.beta1;
  ac.beta2 = cfg.beta2;
  opt_g = Adam(ac);
  opt_d = Adam(ac);
}

TrainState make_initial_state(const TrainConfig& config) {
  TrainState state(config);
  Rng g_rng(derive_seed(config.seed, {kGenInitTag}));
  Rng d_rng(derive_seed(config.seed, {kDiscInitTag}));
  state.g.init(g_rng);
  state.d.init(d_rng);
  state.opt_g.attach(state.g.params());
  state.opt_d.attach(state.d.params());
  return state;
}

LossBreakdown train_step(TrainState& state, const std::vector<const SamplePair*>& batch) {
  if (batch.empty()) throw ValidationError("train_step: empty batch");
  Tensor x, target, context;
  build_batch(state, batch, state.config.palette, x, target, context);

  // Generator forward first; its caches survive the discriminator update
  // and feed the generator backward below.
  const Tensor generated = state.g.forward_train(x);

  double l_d = 0.0;
  if (state.config.adversarial_enabled) {
    // Discriminator update on (target | context) vs (generated | context);
    // the generated batch is detached - no gradient reaches the generator.
    state.d.zero_grad();
    const Tensor real_scores = state.d.forward_train(concat_channels(target, context));
    state.d.backward(discriminator_loss_grad_real(real_scores));
    const Tensor fake_scores = state.d.forward_train(concat_channels(generated, context));
    state.d.backward(discriminator_loss_grad_fake(fake_scores));
    l_d = discriminator_loss(real_scores, fake_scores);
    require_finite(l_d, "l_d", state.step);
    state.opt_d.step(state.d.params());
  }

  // Generator update against the just-updated discriminator.
  const double l_mse = generative_loss(generated, target);
  require_finite(l_mse, "l_mse", state.step);
  Tensor d_generated = generative_loss_grad(generated, target);
  for (double& v : d_generated.v) v *= state.config.weights.lambda_mse;

  double l_adv = 0.0;
  LossWeights effective = state.config.weights;
  if (state.config.adversarial_enabled) {
    const Tensor scores = state.d.forward_train(concat_channels(generated, context));
    l_adv = adversarial_loss_g(scores);
    require_finite(l_adv, "l_adv", state.step);
    Tensor d_scores = adversarial_loss_g_grad(scores);
    for (double& v : d_scores.v) v *= state.config.weights.lambda_adv;
    const Tensor d_input = state.d.backward(d_scores);
    state.d.zero_grad();  // this pass trains G, not D
    const Tensor d_gen_adv = d_input.channel_slice(0, 3);
    for (std::size_t i = 0; i < d_generated.v.size(); ++i)
      d_generated.v[i] += d_gen_adv.v[i];
  } else {
    effective.lambda_adv = 0.0;
  }

  state.g.zero_grad();
  state.g.backward(d_generated);
  state.opt_g.step(state.g.params());

  state.step += 1;
  LossBreakdown breakdown = total_generator_loss(l_mse, l_adv, effective);
  breakdown.l_d = l_d;
  return breakdown;
}

LossBreakdown train_step(TrainState& state, const std::vector<SamplePair>& batch) {
  std::vector<const SamplePair*> refs;
  refs.reserve(batch.size());
  for (const SamplePair& p : batch) refs.push_back(&p);
  return train_step(state, refs);
}

void train(TrainState& state, const DatasetSplit& data, const std::filesystem::path& out_dir) {
  state.config.validate();
  if (data.samples.empty()) throw ValidationError("train: dataset split is empty");

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  const std::filesystem::path csv_path = out_dir / "loss.csv";
  const bool resuming = state.epoch > 0;
  std::ofstream csv(csv_path, resuming ? std::ios::app : std::ios::trunc);
  if (!csv) throw IoError("cannot write " + csv_path.string());
  if (!resuming) csv << "step,epoch,l_mse,l_adv,l_total_g,l_d\n";

  const int n = static_cast<int>(data.samples.size());
  auto breakdown_row = [](std::int64_t step, std::int64_t epoch, const LossBreakdown& b) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%lld,%lld,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(step), static_cast<long long>(epoch), b.l_mse, b.l_adv,
                  b.l_total_g, b.l_d);
    return std::string(buf);
  };

  auto checkpoint_at = [&](std::int64_t epoch) {
    char name[48];
    std::snprintf(name, sizeof(name), "ckpt_epoch_%04lld.ckpt", static_cast<long long>(epoch));
    save_checkpoint(state, out_dir / name);
    save_checkpoint(state, out_dir / "last.ckpt");
  };

  for (std::int64_t epoch = state.epoch; epoch < state.config.epochs; ++epoch) {
    // Stateless per-epoch permutation: resuming at an epoch boundary sees
    // exactly the order an uninterrupted run would have used.
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng shuffle_rng(
        derive_seed(state.config.seed, {kShuffleTag, static_cast<std::uint64_t>(epoch)}));
    shuffle_rng.shuffle(order);

    for (int start = 0; start < n; start += state.config.batch_size) {
      const int end = std::min(n, start + state.config.batch_size);
      std::vector<const SamplePair*> batch;
      batch.reserve(static_cast<std::size_t>(end - start));
      for (int i = start; i < end; ++i)
        batch.push_back(&data.samples[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
      const LossBreakdown b = train_step(state, batch);
      csv << breakdown_row(state.step, epoch, b);
    }
    csv.flush();
    if (!csv) throw IoError("write failure on " + csv_path.string());
    state.epoch = epoch + 1;

    if (state.config.persist && state.config.checkpoint_interval > 0 &&
        (state.epoch % state.config.checkpoint_interval == 0) &&
        state.epoch < state.config.epochs)
      checkpoint_at(state.epoch);
  }
  if (state.config.persist) checkpoint_at(state.epoch);
}

}  // namespace lanegen
