// lanegen: desk-scale conditioned lane/symbol generation pipeline.
//
// Subcommands: synth, train, infer, eval, perturb, ablate. Every command
// echoes its merged configuration into the output directory so a run is
// reproducible from the echo plus the seed alone.
//
// Exit codes: 0 success, 1 runtime/IO failure, 2 usage/validation error.

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lanegen/dataio.hpp"
#include "lanegen/error.hpp"
#include "lanegen/inference.hpp"
#include "lanegen/metrics.hpp"
#include "lanegen/perturb.hpp"
#include "lanegen/runconfig.hpp"
#include "lanegen/trainer.hpp"

namespace fs = std::filesystem;
using namespace lanegen;

namespace {

std::string strip_ws(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "config file with `key = value` lines");
  cmd->add_option("--set", opts.sets, "override a config key, e.g. --set train.epochs=50")
      ->take_all();
}

RunConfig build_config(const CommonOpts& opts) {
  RunConfig rc =
      opts.config_path.empty() ? RunConfig() : RunConfig::from_file(opts.config_path);
  for (const std::string& kv : opts.sets) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    rc.set(strip_ws(kv.substr(0, eq)), strip_ws(kv.substr(eq + 1)));
  }
  return rc;
}

// Writes the fully resolved training configuration back into the flat key
// space so the echo captures effective values, not just overrides.
void record_train_config(RunConfig& rc, const TrainConfig& tc) {
  rc.set("arch.image_size", std::to_string(tc.arch.image_size));
  rc.set("arch.base_channels", std::to_string(tc.arch.base_channels));
  rc.set("arch.depth", std::to_string(tc.arch.depth));
  rc.set("arch.leaky_slope", fmt_double(tc.arch.leaky_slope));
  std::string skips;
  for (int l : tc.arch.skip_levels) {
    if (!skips.empty()) skips += ",";
    skips += std::to_string(l);
  }
  rc.set("arch.skip_levels", skips);
  rc.set("train.batch_size", std::to_string(tc.batch_size));
  rc.set("train.learning_rate", fmt_double(tc.learning_rate));
  rc.set("train.beta1", fmt_double(tc.beta1));
  rc.set("train.beta2", fmt_double(tc.beta2));
  rc.set("train.epochs", std::to_string(tc.epochs));
  rc.set("train.seed", std::to_string(tc.seed));
  rc.set("train.adversarial", tc.adversarial_enabled ? "true" : "false");
  rc.set("train.lambda_mse", fmt_double(tc.weights.lambda_mse));
  rc.set("train.lambda_adv", fmt_double(tc.weights.lambda_adv));
  rc.set("train.source_mode", to_string(tc.source_mode));
  rc.set("train.checkpoint_interval", std::to_string(tc.checkpoint_interval));
  rc.set("train.persist", tc.persist ? "true" : "false");
}

void ensure_out_dir(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out.string() + ": " + ec.message());
}

DatasetSplit load_named_split(const std::string& root, const std::string& name,
                              const ClassPalette& palette, int image_size) {
  DatasetSplit split = load_split(root, name, palette, image_size);
  if (split.samples.empty())
    throw ValidationError("split '" + name + "' under " + root + " has no samples");
  return split;
}

MetricsReport eval_split(Generator& g, const ClassPalette& palette, const DatasetSplit& split,
                         std::uint64_t seed, double* ms_per_frame = nullptr) {
  if (split.samples.empty())
    throw ValidationError("eval: split '" + split.name + "' has no samples");
  std::vector<RgbImage> contexts;
  contexts.reserve(split.samples.size());
  for (const SamplePair& p : split.samples) contexts.push_back(p.context);
  const std::vector<Generation> gens = generate_batch(g, contexts, seed, palette, ms_per_frame);
  ConfusionCounts counts(palette.size());
  for (std::size_t k = 0; k < gens.size(); ++k)
    counts.accumulate(gens[k].labels, split.samples[k].target);
  return report(counts, palette);
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  CommonOpts common;
  std::uint64_t seed = 1;
  std::string counts = "8,2,2";
  int size = 64;
  std::string out;
};

int run_synth(const SynthArgs& a) {
  RunConfig rc = build_config(a.common);
  const ClassPalette palette = palette_from_config(rc);

  SplitCounts counts;
  if (std::sscanf(a.counts.c_str(), "%d,%d,%d", &counts.train, &counts.val, &counts.test) != 3)
    throw ConfigError("--counts expects train,val,test (e.g. 8,2,2), got '" + a.counts + "'");

  const Dataset ds = synth_dataset(a.seed, counts, palette, a.size);
  ensure_out_dir(a.out);
  write_dataset(a.out, ds, palette);
  save_palette(palette, fs::path(a.out) / "palette.csv");
  rc.set("synth.seed", std::to_string(a.seed));
  rc.set("synth.counts", a.counts);
  rc.set("synth.size", std::to_string(a.size));
  rc.echo_to(fs::path(a.out) / "config.txt");
  std::cout << "wrote " << (counts.train + counts.val + counts.test) << " pairs under " << a.out
            << "\n";
  return 0;
}

struct TrainArgs {
  CommonOpts common;
  std::string data;
  std::string out;
  std::string resume;
  bool no_adversarial = false;
};

int run_train(const TrainArgs& a) {
  RunConfig rc = build_config(a.common);
  if (a.no_adversarial) rc.set("train.adversarial", "false");

  TrainState state = [&] {
    if (!a.resume.empty()) {
      TrainState st = load_checkpoint(a.resume);
      // Only the epoch target may change on resume; everything else must
      // stay what the checkpoint trained with.
      if (rc.has("train.epochs")) st.config.epochs = rc.get_int("train.epochs", st.config.epochs);
      return st;
    }
    return make_initial_state(train_config_from(rc));
  }();

  const DatasetSplit train_split =
      load_named_split(a.data, "train", state.config.palette, state.config.arch.image_size);

  ensure_out_dir(a.out);
  record_train_config(rc, state.config);
  rc.echo_to(fs::path(a.out) / "config.txt");

  train(state, train_split, a.out);
  std::cout << "trained to epoch " << state.epoch << " (" << state.step << " steps); outputs in "
            << a.out << "\n";
  return 0;
}

struct InferArgs {
  CommonOpts common;
  std::string ckpt;
  std::string data;
  std::string split = "test";
  std::string out;
  std::uint64_t seed = 1234;
};

int run_infer(const InferArgs& a) {
  RunConfig rc = build_config(a.common);
  TrainState state = load_checkpoint(a.ckpt);
  const DatasetSplit split =
      load_named_split(a.data, a.split, state.config.palette, state.config.arch.image_size);

  std::vector<RgbImage> contexts;
  for (const SamplePair& p : split.samples) contexts.push_back(p.context);
  double ms = 0.0;
  const std::vector<Generation> gens =
      generate_batch(state.g, contexts, a.seed, state.config.palette, &ms);

  ensure_out_dir(a.out);
  for (std::size_t k = 0; k < gens.size(); ++k)
    write_generation(gens[k], a.out, split.samples[k].id, state.config.palette);
  rc.set("infer.seed", std::to_string(a.seed));
  rc.echo_to(fs::path(a.out) / "config.txt");
  std::cout << "generated " << gens.size() << " images (" << fmt_double(ms)
            << " ms/frame, informational) into " << a.out << "\n";
  return 0;
}

struct EvalArgs {
  CommonOpts common;
  std::string ckpt;
  std::string data;
  std::string split = "val";
  std::string out;
  bool self_check = false;
};

int run_eval(const EvalArgs& a) {
  RunConfig rc = build_config(a.common);
  ensure_out_dir(a.out);

  MetricsReport rep;
  if (a.self_check) {
    // Ground truth scored against itself: a pipeline sanity mode, every
    // defined metric must come out 1.0.
    const ClassPalette palette = palette_from_config(rc);
    const int size = rc.get_int("arch.image_size", 64);
    const DatasetSplit split = load_named_split(a.data, a.split, palette, size);
    ConfusionCounts counts(palette.size());
    for (const SamplePair& p : split.samples) {
      const LabelImage roundtrip = quantize(render_labels(p.target, palette), palette);
      counts.accumulate(roundtrip, p.target);
    }
    rep = report(counts, palette);
  } else {
    if (a.ckpt.empty()) throw ConfigError("eval needs --ckpt (or --self-check)");
    TrainState state = load_checkpoint(a.ckpt);
    const DatasetSplit split =
        load_named_split(a.data, a.split, state.config.palette, state.config.arch.image_size);
    const std::uint64_t seed = rc.get_u64("infer.seed", 1234);
    rep = eval_split(state.g, state.config.palette, split, seed);
    rc.set("infer.seed", std::to_string(seed));
  }

  write_report(rep, fs::path(a.out) / "report.csv", fs::path(a.out) / "report.json");
  rc.echo_to(fs::path(a.out) / "config.txt");
  std::cout << report_to_csv(rep);
  return 0;
}

struct PerturbArgs {
  CommonOpts common;
  std::string data;
  std::string split = "test";
  std::string out;
  std::uint64_t seed = 1;
  std::string eval_with;
};

int run_perturb(const PerturbArgs& a) {
  RunConfig rc = build_config(a.common);
  const ClassPalette palette = palette_from_config(rc);
  const int size = rc.get_int("arch.image_size", 64);
  const DatasetSplit split = load_named_split(a.data, a.split, palette, size);
  const PerturbationSpec spec = perturb_spec_from(rc);

  const AdverseSets sets = build_adverse_sets(split, spec, a.seed);
  if (sets.truncated)
    std::cerr << "warning: split '" << a.split << "' has " << split.samples.size()
              << " samples (not divisible by 3); using balanced prefix of " << sets.used_samples
              << "\n";

  ensure_out_dir(a.out);
  for (const DatasetSplit* s : {&sets.noise, &sets.gamma, &sets.occl})
    write_split(a.out, *s, palette);
  rc.set("perturb.noise_sigma", fmt_double(spec.noise_sigma));
  rc.set("perturb.gamma_lo", fmt_double(spec.gamma_lo));
  rc.set("perturb.gamma_hi", fmt_double(spec.gamma_hi));
  rc.set("perturb.removal_fraction", fmt_double(spec.removal_fraction));
  rc.echo_to(fs::path(a.out) / "config.txt");
  std::cout << "wrote adverse sets (" << sets.used_samples << " samples over 3 sets) under "
            << a.out << "\n";

  if (!a.eval_with.empty()) {
    TrainState state = load_checkpoint(a.eval_with);
    const std::uint64_t seed = rc.get_u64("infer.seed", 1234);
    // Clean baseline on the same balanced prefix the adverse sets use.
    DatasetSplit clean;
    clean.name = "clean";
    clean.image_size = split.image_size;
    clean.samples.assign(split.samples.begin(),
                         split.samples.begin() + sets.used_samples);

    std::ofstream combined(fs::path(a.out) / "adverse_report.csv");
    if (!combined) throw IoError("cannot write adverse_report.csv");
    combined << "set,mean_iou,mean_precision,mean_recall,pixel_accuracy\n";
    const std::array<const DatasetSplit*, 4> scored = {&clean, &sets.noise, &sets.gamma,
                                                       &sets.occl};
    for (const DatasetSplit* s : scored) {
      const MetricsReport rep = eval_split(state.g, state.config.palette, *s, seed);
      combined << s->name << "," << (rep.mean_iou_defined ? fmt_double(rep.mean_iou) : "undefined")
               << ","
               << (rep.mean_precision_defined ? fmt_double(rep.mean_precision) : "undefined")
               << "," << (rep.mean_recall_defined ? fmt_double(rep.mean_recall) : "undefined")
               << "," << fmt_double(rep.pixel_accuracy) << "\n";
      write_report(rep, fs::path(a.out) / (s->name + "_report.csv"),
                   fs::path(a.out) / (s->name + "_report.json"));
    }
    std::cout << "clean vs adverse report in " << (fs::path(a.out) / "adverse_report.csv").string()
              << "\n";
  }
  return 0;
}

struct AblateArgs {
  CommonOpts common;
  std::string data;
  std::string out;
  std::string seeds = "1,2,3";
  std::string split = "val";  // held-out split to score
};

int run_ablate(const AblateArgs& a) {
  RunConfig rc = build_config(a.common);

  std::vector<std::uint64_t> seeds;
  {
    std::istringstream is(a.seeds);
    std::string item;
    while (std::getline(is, item, ',')) {
      try {
        seeds.push_back(std::stoull(strip_ws(item)));
      } catch (const std::exception&) {
        throw ConfigError("--seeds expects comma-separated integers, got '" + a.seeds + "'");
      }
    }
  }
  if (seeds.empty() || seeds.size() % 2 == 0)
    throw ConfigError("--seeds needs an odd number of seeds for a majority vote");

  ensure_out_dir(a.out);
  const TrainConfig base = train_config_from(rc);
  const DatasetSplit train_split =
      load_named_split(a.data, "train", base.palette, base.arch.image_size);
  const DatasetSplit held_out =
      load_named_split(a.data, a.split, base.palette, base.arch.image_size);
  const std::uint64_t infer_seed = rc.get_u64("infer.seed", 1234);

  struct SeedResult {
    std::uint64_t seed;
    MetricsReport with_adv, without_adv;
  };
  std::vector<SeedResult> results;

  for (const std::uint64_t seed : seeds) {
    SeedResult res;
    res.seed = seed;
    for (const bool adversarial : {true, false}) {
      TrainConfig tc = base;
      tc.seed = seed;
      tc.adversarial_enabled = adversarial;
      const fs::path run_dir =
          fs::path(a.out) / ("seed" + std::to_string(seed) + (adversarial ? "_adv" : "_noadv"));
      ensure_out_dir(run_dir);
      TrainState state = make_initial_state(tc);
      train(state, train_split, run_dir);
      const MetricsReport rep = eval_split(state.g, tc.palette, held_out, infer_seed);
      write_report(rep, run_dir / "report.csv", run_dir / "report.json");
      (adversarial ? res.with_adv : res.without_adv) = rep;
    }
    std::cout << "seed " << res.seed << ": mean IOU with adversarial "
              << fmt_double(res.with_adv.mean_iou) << " vs without "
              << fmt_double(res.without_adv.mean_iou) << "\n";
    results.push_back(std::move(res));
  }

  int votes_with = 0;
  for (const SeedResult& r : results)
    if (r.with_adv.mean_iou >= r.without_adv.mean_iou) ++votes_with;
  const bool majority = votes_with * 2 > static_cast<int>(results.size());

  // Per-class IOU with/without adversarial loss, averaged over seeds.
  {
    std::ofstream table(fs::path(a.out) / "table6.csv");
    if (!table) throw IoError("cannot write table6.csv");
    table << "class,iou_with_adv,iou_without_adv\n";
    const std::size_t n_classes = results.front().with_adv.per_class.size();
    for (std::size_t c = 1; c < n_classes; ++c) {
      double with_sum = 0.0, without_sum = 0.0;
      int with_n = 0, without_n = 0;
      for (const SeedResult& r : results) {
        if (r.with_adv.per_class[c].iou_defined) {
          with_sum += r.with_adv.per_class[c].iou;
          ++with_n;
        }
        if (r.without_adv.per_class[c].iou_defined) {
          without_sum += r.without_adv.per_class[c].iou;
          ++without_n;
        }
      }
      table << results.front().with_adv.per_class[c].name << ","
            << (with_n ? fmt_double(with_sum / with_n) : "undefined") << ","
            << (without_n ? fmt_double(without_sum / without_n) : "undefined") << "\n";
    }
    double with_sum = 0.0, without_sum = 0.0;
    for (const SeedResult& r : results) {
      with_sum += r.with_adv.mean_iou;
      without_sum += r.without_adv.mean_iou;
    }
    table << "mean," << fmt_double(with_sum / static_cast<double>(results.size())) << ","
          << fmt_double(without_sum / static_cast<double>(results.size())) << "\n";
  }

  {
    std::ofstream js(fs::path(a.out) / "ablation.json");
    if (!js) throw IoError("cannot write ablation.json");
    js << "{\n  \"seeds\": [\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
      const SeedResult& r = results[i];
      js << "    {\"seed\": " << r.seed << ", \"mean_iou_with_adv\": "
         << fmt_double(r.with_adv.mean_iou)
         << ", \"mean_iou_without_adv\": " << fmt_double(r.without_adv.mean_iou)
         << ", \"with_ge_without\": "
         << (r.with_adv.mean_iou >= r.without_adv.mean_iou ? "true" : "false") << "}"
         << (i + 1 < results.size() ? "," : "") << "\n";
    }
    js << "  ],\n  \"majority_with_ge_without\": " << (majority ? "true" : "false") << "\n}\n";
  }

  record_train_config(rc, base);
  rc.echo_to(fs::path(a.out) / "config.txt");
  std::cout << "majority verdict: mean IOU with adversarial loss "
            << (majority ? ">=" : "<") << " without (" << votes_with << "/" << results.size()
            << " seeds)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale conditioned lane/symbol generation pipeline"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic road-scene dataset");
  add_common(synth_cmd, synth_args.common);
  synth_cmd->add_option("--seed", synth_args.seed, "dataset seed");
  synth_cmd->add_option("--counts", synth_args.counts, "train,val,test sample counts");
  synth_cmd->add_option("--size", synth_args.size, "square image size in pixels");
  synth_cmd->add_option("--out", synth_args.out, "output dataset root")->required();

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train the conditioned generator");
  add_common(train_cmd, train_args.common);
  train_cmd->add_option("--data", train_args.data, "dataset root")->required();
  train_cmd->add_option("--out", train_args.out, "run output directory")->required();
  train_cmd->add_option("--resume", train_args.resume, "checkpoint to continue from");
  train_cmd->add_flag("--no-adversarial", train_args.no_adversarial,
                      "ablation: train with the MSE loss only");

  InferArgs infer_args;
  auto* infer_cmd = app.add_subcommand("infer", "generate images for a split");
  add_common(infer_cmd, infer_args.common);
  infer_cmd->add_option("--ckpt", infer_args.ckpt, "checkpoint to load")->required();
  infer_cmd->add_option("--data", infer_args.data, "dataset root")->required();
  infer_cmd->add_option("--split", infer_args.split, "split name (default test)");
  infer_cmd->add_option("--out", infer_args.out, "output directory")->required();
  infer_cmd->add_option("--seed", infer_args.seed, "noise seed");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate generation quality on a split");
  add_common(eval_cmd, eval_args.common);
  eval_cmd->add_option("--ckpt", eval_args.ckpt, "checkpoint to load");
  eval_cmd->add_option("--data", eval_args.data, "dataset root")->required();
  eval_cmd->add_option("--split", eval_args.split, "split name (default val)");
  eval_cmd->add_option("--out", eval_args.out, "output directory")->required();
  eval_cmd->add_flag("--self-check", eval_args.self_check,
                     "score ground truth against itself (must be all 1.0)");

  PerturbArgs perturb_args;
  auto* perturb_cmd = app.add_subcommand("perturb", "build the three adverse-condition sets");
  add_common(perturb_cmd, perturb_args.common);
  perturb_cmd->add_option("--data", perturb_args.data, "dataset root")->required();
  perturb_cmd->add_option("--split", perturb_args.split, "split to perturb (default test)");
  perturb_cmd->add_option("--out", perturb_args.out, "output directory")->required();
  perturb_cmd->add_option("--seed", perturb_args.seed, "perturbation seed");
  perturb_cmd->add_option("--eval-with", perturb_args.eval_with,
                          "checkpoint; also evaluate clean vs adverse");

  AblateArgs ablate_args;
  auto* ablate_cmd =
      app.add_subcommand("ablate", "train with and without adversarial loss, compare IOU");
  add_common(ablate_cmd, ablate_args.common);
  ablate_cmd->add_option("--data", ablate_args.data, "dataset root")->required();
  ablate_cmd->add_option("--out", ablate_args.out, "output directory")->required();
  ablate_cmd->add_option("--seeds", ablate_args.seeds, "comma-separated seeds (odd count)");
  ablate_cmd->add_option("--split", ablate_args.split, "held-out split to score (default val)");

  try {
    app.parse(argc, argv);
    if (synth_cmd->parsed()) return run_synth(synth_args);
    if (train_cmd->parsed()) return run_train(train_args);
    if (infer_cmd->parsed()) return run_infer(infer_args);
    if (eval_cmd->parsed()) return run_eval(eval_args);
    if (perturb_cmd->parsed()) return run_perturb(perturb_args);
    if (ablate_cmd->parsed()) return run_ablate(ablate_args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
