#include "lanegen/runconfig.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include "lanegen/error.hpp"

namespace lanegen {

namespace {

constexpr std::array kKnownKeys = {
    "arch.image_size",    "arch.base_channels",      "arch.depth",
    "arch.leaky_slope",   "arch.skip_levels",        "train.batch_size",
    "train.learning_rate", "train.beta1",            "train.beta2",
    "train.epochs",       "train.seed",              "train.adversarial",
    "train.lambda_mse",   "train.lambda_adv",        "train.source_mode",
    "train.checkpoint_interval", "train.persist",    "perturb.noise_sigma",
    "perturb.gamma_lo",   "perturb.gamma_hi",        "perturb.removal_fraction",
    "palette.path",       "infer.seed",              "synth.seed",
    "synth.counts",       "synth.size",
};

bool known_key(const std::string& key) {
  return std::find(kKnownKeys.begin(), kKnownKeys.end(), key) != kKnownKeys.end();
}

std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = strip(line);
    if (s.empty() || s[0] == '#') continue;
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": expected `key = value`, got '" + s + "'");
    const std::string key = strip(s.substr(0, eq));
    const std::string value = strip(s.substr(eq + 1));
    if (key.empty())
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": empty key");
    if (!known_key(key))
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": unknown key '" + key +
                        "'");
    cfg.values_[key] = value;
  }
  return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!known_key(key)) throw ConfigError("unknown config key '" + key + "'");
  values_[key] = value;
}

bool RunConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

int RunConfig::get_int(const std::string& key, int fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t used = 0;
    const int v = std::stoi(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": '" + it->second + "' is not an integer");
  }
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": '" + it->second + "' is not a number");
  }
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1" || it->second == "on") return true;
  if (it->second == "false" || it->second == "0" || it->second == "off") return false;
  throw ConfigError("config key " + key + ": '" + it->second + "' is not a boolean");
}

std::uint64_t RunConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": '" + it->second +
                      "' is not an unsigned integer");
  }
}

std::string RunConfig::render() const {
  std::ostringstream os;
  for (const auto& [key, value] : values_) os << key << " = " << value << "\n";
  return os.str();
}

void RunConfig::echo_to(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config echo " + path.string());
  out << render();
}

ClassPalette palette_from_config(const RunConfig& cfg) {
  const std::string path = cfg.get_string("palette.path", "");
  return path.empty() ? ClassPalette::default_palette() : load_palette(path);
}

TrainConfig train_config_from(const RunConfig& cfg) {
  TrainConfig tc;
  tc.arch.image_size = cfg.get_int("arch.image_size", tc.arch.image_size);
  tc.arch.base_channels = cfg.get_int("arch.base_channels", tc.arch.base_channels);
  tc.arch.depth = cfg.get_int("arch.depth", tc.arch.depth);
  tc.arch.leaky_slope = cfg.get_double("arch.leaky_slope", tc.arch.leaky_slope);
  if (cfg.has("arch.skip_levels")) {
    tc.arch.skip_levels.clear();
    std::istringstream is(cfg.get_string("arch.skip_levels", ""));
    std::string item;
    while (std::getline(is, item, ',')) {
      const std::string t = strip(item);
      if (t.empty()) continue;
      try {
        tc.arch.skip_levels.insert(std::stoi(t));
      } catch (const std::exception&) {
        throw ConfigError("arch.skip_levels: '" + t + "' is not an integer");
      }
    }
  } else if (cfg.has("arch.depth")) {
    tc.arch.skip_levels = ArchConfig::all_skips(tc.arch.depth);
  }
  tc.palette = palette_from_config(cfg);
  tc.batch_size = cfg.get_int("train.batch_size", tc.batch_size);
  tc.learning_rate = cfg.get_double("train.learning_rate", tc.learning_rate);
  tc.beta1 = cfg.get_double("train.beta1", tc.beta1);
  tc.beta2 = cfg.get_double("train.beta2", tc.beta2);
  tc.epochs = cfg.get_int("train.epochs", tc.epochs);
  tc.seed = cfg.get_u64("train.seed", tc.seed);
  tc.adversarial_enabled = cfg.get_bool("train.adversarial", tc.adversarial_enabled);
  tc.weights.lambda_mse = cfg.get_double("train.lambda_mse", tc.weights.lambda_mse);
  tc.weights.lambda_adv = cfg.get_double("train.lambda_adv", tc.weights.lambda_adv);
  tc.source_mode = source_mode_from_string(
      cfg.get_string("train.source_mode", to_string(tc.source_mode)));
  tc.checkpoint_interval = cfg.get_int("train.checkpoint_interval", tc.checkpoint_interval);
  tc.persist = cfg.get_bool("train.persist", tc.persist);
  tc.validate();
  return tc;
}

PerturbationSpec perturb_spec_from(const RunConfig& cfg) {
  PerturbationSpec spec;
  spec.noise_sigma = cfg.get_double("perturb.noise_sigma", spec.noise_sigma);
  spec.gamma_lo = cfg.get_double("perturb.gamma_lo", spec.gamma_lo);
  spec.gamma_hi = cfg.get_double("perturb.gamma_hi", spec.gamma_hi);
  spec.removal_fraction = cfg.get_double("perturb.removal_fraction", spec.removal_fraction);
  spec.validate();
  return spec;
}

}  // namespace lanegen
