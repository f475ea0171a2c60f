// Flat config parsing: file syntax, unknown-key rejection with line numbers,
// typed getters, override precedence, and the echoed render round-trip.

#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "lanegen/error.hpp"
#include "lanegen/runconfig.hpp"
#include "lanegen/trainer.hpp"

using namespace lanegen;

namespace {

std::filesystem::path write_temp_config(const std::string& name, const std::string& body) {
  const std::filesystem::path p = std::filesystem::temp_directory_path() / name;
  std::ofstream out(p, std::ios::trunc);
  out << body;
  out.close();
  return p;
}

}  // namespace

TEST_CASE("config files parse keys, comments, and blank lines") {
  const auto p = write_temp_config("lanegen_rc_ok.cfg",
                                   "# a comment\n"
                                   "\n"
                                   "train.epochs = 25\n"
                                   "train.learning_rate = 0.001\n"
                                   "arch.image_size=32\n"
                                   "train.adversarial = false\n");
  const RunConfig cfg = RunConfig::from_file(p);
  CHECK(cfg.get_int("train.epochs", 0) == 25);
  CHECK(cfg.get_double("train.learning_rate", 0.0) == doctest::Approx(0.001));
  CHECK(cfg.get_int("arch.image_size", 0) == 32);
  CHECK(cfg.get_bool("train.adversarial", true) == false);
  CHECK_FALSE(cfg.has("train.batch_size"));
  CHECK(cfg.get_int("train.batch_size", 7) == 7);  // fallback on unset
  std::filesystem::remove(p);
}

TEST_CASE("parse errors carry the offending line number") {
  const auto p1 = write_temp_config("lanegen_rc_noeq.cfg",
                                    "train.epochs = 5\n"
                                    "this line has no equals\n");
  CHECK_THROWS_WITH_AS(static_cast<void>(RunConfig::from_file(p1)),
                       doctest::Contains(":2:"), ConfigError);
  std::filesystem::remove(p1);

  const auto p2 = write_temp_config("lanegen_rc_unknown.cfg",
                                    "# header\n"
                                    "train.epochs = 5\n"
                                    "train.momentum = 0.9\n");
  CHECK_THROWS_WITH_AS(static_cast<void>(RunConfig::from_file(p2)),
                       doctest::Contains("train.momentum"), ConfigError);
  std::filesystem::remove(p2);

  CHECK_THROWS_AS(static_cast<void>(RunConfig::from_file("/nonexistent/lanegen.cfg")), ConfigError);
}

TEST_CASE("set rejects unknown keys and overrides file values") {
  const auto p = write_temp_config("lanegen_rc_override.cfg", "train.epochs = 100\n");
  RunConfig cfg = RunConfig::from_file(p);
  CHECK(cfg.get_int("train.epochs", 0) == 100);
  cfg.set("train.epochs", "10");  // CLI-style override wins
  CHECK(cfg.get_int("train.epochs", 0) == 10);
  CHECK_THROWS_AS(cfg.set("train.turbo", "on"), ConfigError);
  std::filesystem::remove(p);
}

TEST_CASE("typed getters reject malformed values") {
  RunConfig cfg;
  cfg.set("train.epochs", "twenty");
  CHECK_THROWS_AS(static_cast<void>(cfg.get_int("train.epochs", 0)), ConfigError);
  cfg.set("train.learning_rate", "fast");
  CHECK_THROWS_AS(static_cast<void>(cfg.get_double("train.learning_rate", 0.0)), ConfigError);
  cfg.set("train.adversarial", "maybe");
  CHECK_THROWS_AS(static_cast<void>(cfg.get_bool("train.adversarial", true)), ConfigError);
}

TEST_CASE("render is sorted and echo round-trips through from_file") {
  RunConfig cfg;
  cfg.set("train.seed", "9");
  cfg.set("arch.depth", "3");
  cfg.set("train.batch_size", "2");
  const std::string text = cfg.render();
  // Sorted by key: arch.* precedes train.*.
  CHECK(text.find("arch.depth") < text.find("train.batch_size"));
  CHECK(text.find("train.batch_size") < text.find("train.seed"));

  const std::filesystem::path p =
      std::filesystem::temp_directory_path() / "lanegen_rc_echo.cfg";
  cfg.echo_to(p);
  const RunConfig back = RunConfig::from_file(p);
  CHECK(back.values() == cfg.values());
  std::filesystem::remove(p);
}

TEST_CASE("train_config_from maps dotted keys onto the typed config") {
  RunConfig cfg;
  cfg.set("arch.image_size", "32");
  cfg.set("arch.base_channels", "8");
  cfg.set("arch.depth", "3");
  cfg.set("arch.skip_levels", "1,2");
  cfg.set("train.batch_size", "2");
  cfg.set("train.epochs", "7");
  cfg.set("train.seed", "123");
  cfg.set("train.adversarial", "false");
  cfg.set("train.lambda_mse", "50");
  cfg.set("train.source_mode", "noise");

  const TrainConfig tc = train_config_from(cfg);
  CHECK(tc.arch.image_size == 32);
  CHECK(tc.arch.base_channels == 8);
  CHECK(tc.arch.depth == 3);
  CHECK(tc.arch.skip_levels == std::set<int>{1, 2});
  CHECK(tc.batch_size == 2);
  CHECK(tc.epochs == 7);
  CHECK(tc.seed == 123);
  CHECK(tc.adversarial_enabled == false);
  CHECK(tc.weights.lambda_mse == doctest::Approx(50.0));
  CHECK(tc.source_mode == SourceMode::noise);

  // Untouched keys keep their defaults.
  const TrainConfig defaults = train_config_from(RunConfig{});
  CHECK(defaults.learning_rate == doctest::Approx(0.0002));
  CHECK(defaults.beta1 == doctest::Approx(0.5));
  CHECK(defaults.beta2 == doctest::Approx(0.999));
  CHECK(defaults.epochs == 200);
  CHECK(defaults.adversarial_enabled == true);
  CHECK(defaults.source_mode == SourceMode::teacher);
  CHECK(defaults.weights.lambda_mse == doctest::Approx(100.0));
  CHECK(defaults.weights.lambda_adv == doctest::Approx(1.0));

  RunConfig badmode;
  badmode.set("train.source_mode", "mystery");
  CHECK_THROWS_AS(static_cast<void>(train_config_from(badmode)), ConfigError);
}

TEST_CASE("perturb_spec_from maps and validates") {
  RunConfig cfg;
  cfg.set("perturb.noise_sigma", "0.07");
  cfg.set("perturb.gamma_lo", "0.5");
  cfg.set("perturb.gamma_hi", "2.0");
  cfg.set("perturb.removal_fraction", "0.25");
  const PerturbationSpec spec = perturb_spec_from(cfg);
  CHECK(spec.noise_sigma == doctest::Approx(0.07));
  CHECK(spec.gamma_lo == doctest::Approx(0.5));
  CHECK(spec.gamma_hi == doctest::Approx(2.0));
  CHECK(spec.removal_fraction == doctest::Approx(0.25));

  RunConfig bad;
  bad.set("perturb.removal_fraction", "1.5");
  CHECK_THROWS_AS(static_cast<void>(perturb_spec_from(bad)), ConfigError);
}
