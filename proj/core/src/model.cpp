#include "lanegen/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <sstream>

#include "lanegen/error.hpp"

namespace lanegen {

namespace {

constexpr int kSourceChannels = 3;
constexpr int kContextChannels = 3;
constexpr int kInputChannels = kSourceChannels + kContextChannels;
constexpr int kOutputChannels = 3;

double leaky_gain(double slope) {
  // He init adjusted for the leaky ramp.
  return std::sqrt(2.0 / (1.0 + slope * slope));
}

}  // namespace

void ArchConfig::validate() const {
  if (depth < 2) throw ConfigError("arch.depth must be >= 2, got " + std::to_string(depth));
  if (base_channels < 1)
    throw ConfigError("arch.base_channels must be >= 1, got " + std::to_string(base_channels));
  if (image_size < 1)
    throw ConfigError("arch.image_size must be >= 1, got " + std::to_string(image_size));
  const int stride_total = 1 << depth;
  if (image_size % stride_total != 0) {
    std::ostringstream os;
    os << "arch.image_size " << image_size << " is not divisible by 2^depth = " << stride_total;
    throw ConfigError(os.str());
  }
  if (!(leaky_slope > 0.0 && leaky_slope < 1.0))
    throw ConfigError("arch.leaky_slope must lie in (0, 1)");
  for (int l : skip_levels) {
    if (l < 1 || l > depth - 1) {
      std::ostringstream os;
      os << "arch.skip_levels entry " << l << " outside valid range [1, " << (depth - 1) << "]";
      throw ConfigError(os.str());
    }
  }
}

int ArchConfig::enc_channels(int level) const {
  const long long wide = static_cast<long long>(base_channels) << level;
  const long long cap = 8LL * base_channels;
  return static_cast<int>(wide < cap ? wide : cap);
}

int ArchConfig::dec_channels(int level) const {
  return level >= 1 ? enc_channels(level - 1) : base_channels;
}

int ArchConfig::score_map_size() const { return image_size >> depth; }

std::set<int> ArchConfig::all_skips(int depth) {
  std::set<int> s;
  for (int l = 1; l <= depth - 1; ++l) s.insert(l);
  return s;
}

ArchConfig ArchConfig::desk_default() {
  ArchConfig c;
  c.image_size = 64;
  c.base_channels = 16;
  c.depth = 4;
  c.leaky_slope = 0.2;
  c.skip_levels = all_skips(c.depth);
  return c;
}

ArchConfig ArchConfig::paper_preset() {
  ArchConfig c;
  c.image_size = 512;
  c.base_channels = 88;
  c.depth = 6;
  c.leaky_slope = 0.2;
  c.skip_levels = all_skips(c.depth);
  return c;
}

bool ArchConfig::operator==(const ArchConfig& o) const {
  return image_size == o.image_size && base_channels == o.base_channels && depth == o.depth &&
         leaky_slope == o.leaky_slope && skip_levels == o.skip_levels;
}

// ---------------------------------------------------------------------------
// Generator

Generator::Generator(const ArchConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  enc_.reserve(cfg_.depth);
  for (int l = 0; l < cfg_.depth; ++l) {
    const int in_ch = l == 0 ? kInputChannels : cfg_.enc_channels(l - 1);
    const int out_ch = cfg_.enc_channels(l);
    EncBlock b{Conv2d(in_ch, out_ch, 4, 2, 1), BatchNorm2d(out_ch),
               LeakyReLU(cfg_.leaky_slope)};
    enc_.push_back(std::move(b));
  }
  dec_.reserve(cfg_.depth);
  for (int l = 0; l < cfg_.depth; ++l) {
    // Main path feeding level l: e[depth-1] at the deepest level, otherwise
    // the output of decoder level l+1.
    const int in_main =
        l == cfg_.depth - 1 ? cfg_.enc_channels(cfg_.depth - 1) : cfg_.dec_channels(l + 1);
    const int in_skip = cfg_.skip_levels.count(l) ? cfg_.enc_channels(l - 1) : 0;
    DecBlock b{Upsample2x(), Conv2d(in_main + in_skip, cfg_.dec_channels(l), 3, 1, 1),
               BatchNorm2d(cfg_.dec_channels(l)), LeakyReLU(cfg_.leaky_slope)};
    dec_.push_back(std::move(b));
  }
  head_ = Conv2d(cfg_.base_channels, kOutputChannels, 3, 1, 1);
}

void Generator::init(Rng& rng) {
  const double g = leaky_gain(cfg_.leaky_slope);
  for (auto& b : enc_) b.conv.init(rng, g);
  for (auto& b : dec_) b.conv.init(rng, g);
  head_.init(rng, 1.0);
  // Zero-convolution init on the source slice of the stem: the source
  // pathway starts contributing nothing and is grown by training only as
  // far as descent actually needs it. A symmetric random init hands the
  // teacher-mode source a head start that converges to verbatim copying,
  // which collapses under the noise source used at inference.
  Conv2d& stem = enc_.front().conv;
  const int kk = stem.ksize * stem.ksize;
  for (int o = 0; o < stem.out_ch; ++o)
    for (int ic = 0; ic < kSourceChannels; ++ic)
      std::fill_n(stem.w.begin() + (static_cast<std::size_t>(o) * stem.in_ch + ic) * kk, kk, 0.0);
}

void Generator::check_input(const Tensor& x) const {
  if (x.c != kInputChannels || x.h != cfg_.image_size || x.w != cfg_.image_size) {
    std::ostringstream os;
    os << "generator expects (N," << kInputChannels << "," << cfg_.image_size << ","
       << cfg_.image_size << ") input, got " << x.shape_str();
    throw ValidationError(os.str());
  }
}

Tensor Generator::eval_pass(const Tensor& x, const std::set<int>* suppressed) const {
  check_input(x);
  std::vector<Tensor> enc_out;
  enc_out.reserve(cfg_.depth);
  {
    Tensor h = x;
    for (const auto& b : enc_) {
      h = b.act.apply(b.bn.apply(b.conv.apply(h)));
      enc_out.push_back(h);
    }
  }
  Tensor h = enc_out.back();
  for (int l = cfg_.depth - 1; l >= 0; --l) {
    const auto& b = dec_[static_cast<std::size_t>(l)];
    h = b.up.apply(h);
    if (cfg_.skip_levels.count(l)) {
      Tensor skip = enc_out[static_cast<std::size_t>(l - 1)];
      if (suppressed && suppressed->count(l)) skip.v.assign(skip.v.size(), 0.0);
      h = concat_channels(h, skip);
    }
    h = b.act.apply(b.bn.apply(b.conv.apply(h)));
  }
  return out_act_.apply(head_.apply(h));
}

Tensor Generator::infer(const Tensor& x) const { return eval_pass(x, nullptr); }

Tensor Generator::infer_suppressing_skips(const Tensor& x, const std::set<int>& suppressed) const {
  return eval_pass(x, &suppressed);
}

Tensor Generator::forward_train(const Tensor& x) {
  check_input(x);
  cached_enc_out_.clear();
  cached_enc_out_.reserve(cfg_.depth);
  Tensor h = x;
  for (auto& b : enc_) {
    h = b.act.forward(b.bn.forward(b.conv.forward(h)));
    cached_enc_out_.push_back(h);
  }
  h = cached_enc_out_.back();
  for (int l = cfg_.depth - 1; l >= 0; --l) {
    auto& b = dec_[static_cast<std::size_t>(l)];
    h = b.up.forward(h);
    if (cfg_.skip_levels.count(l))
      h = concat_channels(h, cached_enc_out_[static_cast<std::size_t>(l - 1)]);
    h = b.act.forward(b.bn.forward(b.conv.forward(h)));
  }
  return out_act_.forward(head_.forward(h));
}

Tensor Generator::backward(const Tensor& dy) {
  if (cached_enc_out_.size() != static_cast<std::size_t>(cfg_.depth))
    throw ValidationError("generator backward called without a prior forward_train");
  Tensor d = head_.backward(out_act_.backward(dy));
  // Gradients flowing into each cached encoder output, accumulated from the
  // decoder main path and every skip branch.
  std::vector<Tensor> d_enc(static_cast<std::size_t>(cfg_.depth));
  for (int l = 0; l < cfg_.depth; ++l) {  // reverse of application order
    auto& b = dec_[static_cast<std::size_t>(l)];
    d = b.conv.backward(b.bn.backward(b.act.backward(d)));
    if (cfg_.skip_levels.count(l)) {
      const int skip_ch = cfg_.enc_channels(l - 1);
      Tensor d_skip = d.channel_slice(d.c - skip_ch, skip_ch);
      Tensor& slot = d_enc[static_cast<std::size_t>(l - 1)];
      if (slot.size() == 0) {
        slot = std::move(d_skip);
      } else {
        for (std::size_t i = 0; i < slot.v.size(); ++i) slot.v[i] += d_skip.v[i];
      }
      d = d.channel_slice(0, d.c - skip_ch);
    }
    d = b.up.backward(d);
  }
  {
    Tensor& deepest = d_enc[static_cast<std::size_t>(cfg_.depth - 1)];
    if (deepest.size() == 0) {
      deepest = std::move(d);
    } else {
      for (std::size_t i = 0; i < deepest.v.size(); ++i) deepest.v[i] += d.v[i];
    }
  }
  Tensor dx;
  for (int l = cfg_.depth - 1; l >= 0; --l) {
    auto& b = enc_[static_cast<std::size_t>(l)];
    Tensor dprev =
        b.conv.backward(b.bn.backward(b.act.backward(d_enc[static_cast<std::size_t>(l)])));
    if (l > 0) {
      Tensor& below = d_enc[static_cast<std::size_t>(l - 1)];
      if (below.size() == 0) {
        below = std::move(dprev);
      } else {
        for (std::size_t i = 0; i < below.v.size(); ++i) below.v[i] += dprev.v[i];
      }
    } else {
      dx = std::move(dprev);
    }
  }
  cached_enc_out_.clear();
  return dx;
}

void Generator::zero_grad() {
  for (auto& b : enc_) {
    b.conv.zero_grad();
    b.bn.zero_grad();
  }
  for (auto& b : dec_) {
    b.conv.zero_grad();
    b.bn.zero_grad();
  }
  head_.zero_grad();
}

std::vector<ParamTensor> Generator::params() {
  std::vector<ParamTensor> out;
  for (std::size_t l = 0; l < enc_.size(); ++l) {
    const std::string p = "g.enc" + std::to_string(l);
    out.push_back({&enc_[l].conv.w, &enc_[l].conv.gw, p + ".conv.w"});
    out.push_back({&enc_[l].conv.b, &enc_[l].conv.gb, p + ".conv.b"});
    out.push_back({&enc_[l].bn.gamma, &enc_[l].bn.ggamma, p + ".bn.gamma"});
    out.push_back({&enc_[l].bn.beta, &enc_[l].bn.gbeta, p + ".bn.beta"});
  }
  for (std::size_t l = 0; l < dec_.size(); ++l) {
    const std::string p = "g.dec" + std::to_string(l);
    out.push_back({&dec_[l].conv.w, &dec_[l].conv.gw, p + ".conv.w"});
    out.push_back({&dec_[l].conv.b, &dec_[l].conv.gb, p + ".conv.b"});
    out.push_back({&dec_[l].bn.gamma, &dec_[l].bn.ggamma, p + ".bn.gamma"});
    out.push_back({&dec_[l].bn.beta, &dec_[l].bn.gbeta, p + ".bn.beta"});
  }
  out.push_back({&head_.w, &head_.gw, "g.head.w"});
  out.push_back({&head_.b, &head_.gb, "g.head.b"});
  return out;
}

std::vector<BufferTensor> Generator::buffers() {
  std::vector<BufferTensor> out;
  for (std::size_t l = 0; l < enc_.size(); ++l) {
    const std::string p = "g.enc" + std::to_string(l);
    out.push_back({&enc_[l].bn.running_mean, p + ".bn.running_mean"});
    out.push_back({&enc_[l].bn.running_var, p + ".bn.running_var"});
  }
  for (std::size_t l = 0; l < dec_.size(); ++l) {
    const std::string p = "g.dec" + std::to_string(l);
    out.push_back({&dec_[l].bn.running_mean, p + ".bn.running_mean"});
    out.push_back({&dec_[l].bn.running_var, p + ".bn.running_var"});
  }
  return out;
}

std::size_t Generator::param_count() const {
  std::size_t n = 0;
  for (const auto& b : enc_) n += b.conv.param_count() + b.bn.param_count();
  for (const auto& b : dec_) n += b.conv.param_count() + b.bn.param_count();
  n += head_.param_count();
  return n;
}

// ---------------------------------------------------------------------------
// Discriminator

Discriminator::Discriminator(const ArchConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  blocks_.reserve(cfg_.depth);
  for (int l = 0; l < cfg_.depth; ++l) {
    const int in_ch = l == 0 ? kInputChannels : cfg_.enc_channels(l - 1);
    EncBlock b{Conv2d(in_ch, cfg_.enc_channels(l), 4, 2, 1), BatchNorm2d(cfg_.enc_channels(l)),
               LeakyReLU(cfg_.leaky_slope)};
    blocks_.push_back(std::move(b));
  }
  head_ = Conv2d(cfg_.enc_channels(cfg_.depth - 1), 1, 3, 1, 1);
}

void Discriminator::init(Rng& rng) {
  const double g = leaky_gain(cfg_.leaky_slope);
  for (auto& b : blocks_) b.conv.init(rng, g);
  head_.init(rng, 1.0);
}

void Discriminator::check_input(const Tensor& x) const {
  if (x.c != kInputChannels || x.h != cfg_.image_size || x.w != cfg_.image_size) {
    std::ostringstream os;
    os << "discriminator expects (N," << kInputChannels << "," << cfg_.image_size << ","
       << cfg_.image_size << ") input, got " << x.shape_str();
    throw ValidationError(os.str());
  }
}

Tensor Discriminator::infer(const Tensor& x) const {
  check_input(x);
  Tensor h = x;
  for (const auto& b : blocks_) h = b.act.apply(b.bn.apply(b.conv.apply(h)));
  return out_act_.apply(head_.apply(h));
}

Tensor Discriminator::forward_train(const Tensor& x) {
  check_input(x);
  Tensor h = x;
  for (auto& b : blocks_) h = b.act.forward(b.bn.forward(b.conv.forward(h)));
  return out_act_.forward(head_.forward(h));
}

Tensor Discriminator::backward(const Tensor& dy) {
  Tensor d = head_.backward(out_act_.backward(dy));
  for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it)
    d = it->conv.backward(it->bn.backward(it->act.backward(d)));
  return d;
}

void Discriminator::zero_grad() {
  for (auto& b : blocks_) {
    b.conv.zero_grad();
    b.bn.zero_grad();
  }
  head_.zero_grad();
}

std::vector<ParamTensor> Discriminator::params() {
  std::vector<ParamTensor> out;
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const std::string p = "d.blk" + std::to_string(l);
    out.push_back({&blocks_[l].conv.w, &blocks_[l].conv.gw, p + ".conv.w"});
    out.push_back({&blocks_[l].conv.b, &blocks_[l].conv.gb, p + ".conv.b"});
    out.push_back({&blocks_[l].bn.gamma, &blocks_[l].bn.ggamma, p + ".bn.gamma"});
    out.push_back({&blocks_[l].bn.beta, &blocks_[l].bn.gbeta, p + ".bn.beta"});
  }
  out.push_back({&head_.w, &head_.gw, "d.head.w"});
  out.push_back({&head_.b, &head_.gb, "d.head.b"});
  return out;
}

std::vector<BufferTensor> Discriminator::buffers() {
  std::vector<BufferTensor> out;
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const std::string p = "d.blk" + std::to_string(l);
    out.push_back({&blocks_[l].bn.running_mean, p + ".bn.running_mean"});
    out.push_back({&blocks_[l].bn.running_var, p + ".bn.running_var"});
  }
  return out;
}

std::size_t Discriminator::param_count() const {
  std::size_t n = 0;
  for (const auto& b : blocks_) n += b.conv.param_count() + b.bn.param_count();
  n += head_.param_count();
  return n;
}

// ---------------------------------------------------------------------------

std::string param_checksum(const std::vector<ParamTensor>& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a offset basis
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& p : params) {
    mix(p.name.data(), p.name.size());
    if (!p.value->empty()) mix(p.value->data(), p.value->size() * sizeof(double));
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace lanegen
