#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "lanegen/palette.hpp"
#include "lanegen/perturb.hpp"
#include "lanegen/trainer.hpp"

namespace lanegen {

// Flat dotted-key configuration: `key = value` lines, '#' comments. Values
// from a file can be overridden one key at a time (CLI flags); the merged
// result is echoed into every output directory so runs stay reproducible.
class RunConfig {
 public:
  RunConfig() = default;

  // ConfigError with the offending line number on parse problems or unknown
  // keys.
  static RunConfig from_file(const std::filesystem::path& path);

  // ConfigError on unknown key.
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  int get_int(const std::string& key, int fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

  // Merged view, sorted by key, one `key = value` per line.
  std::string render() const;
  void echo_to(const std::filesystem::path& path) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// Typed assembly from the flat keys (defaults where unset).
ClassPalette palette_from_config(const RunConfig& cfg);
TrainConfig train_config_from(const RunConfig& cfg);
PerturbationSpec perturb_spec_from(const RunConfig& cfg);

}  // namespace lanegen
