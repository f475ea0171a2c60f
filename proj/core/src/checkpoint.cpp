#include <cstring>
#include <fstream>
#include <vector>

#include "lanegen/error.hpp"
#include "lanegen/trainer.hpp"

namespace lanegen {

namespace {

constexpr char kMagic[] = "LANEGEN-CKPT-v1\n";
constexpr std::size_t kMagicLen = sizeof(kMagic) - 1;

std::uint64_t fnv1a(const unsigned char* p, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

class ByteSink {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  void u8(std::uint8_t v) { raw(&v, 1); }
  void u32(std::uint32_t v) { raw(&v, 4); }
  void u64(std::uint64_t v) { raw(&v, 8); }
  void i32(std::int32_t v) { raw(&v, 4); }
  void i64(std::int64_t v) { raw(&v, 8); }
  void f64(double v) { raw(&v, 8); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  void doubles(const std::vector<double>& v) {
    u64(v.size());
    raw(v.data(), v.size() * sizeof(double));
  }
  const std::vector<unsigned char>& bytes() const { return bytes_; }

 private:
  std::vector<unsigned char> bytes_;
};

class ByteSource {
 public:
  ByteSource(const unsigned char* p, std::size_t n, const std::string& path)
      : p_(p), n_(n), path_(path) {}

  void raw(void* out, std::size_t n) {
    if (pos_ + n > n_)
      throw FormatError("checkpoint " + path_ + " is truncated (needed " + std::to_string(n) +
                        " bytes at offset " + std::to_string(pos_) + ")");
    std::memcpy(out, p_ + pos_, n);
    pos_ += n;
  }
  std::uint8_t u8() {
    std::uint8_t v;
    raw(&v, 1);
    return v;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    raw(&v, 4);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    raw(&v, 8);
    return v;
  }
  std::int32_t i32() {
    std::int32_t v;
    raw(&v, 4);
    return v;
  }
  std::int64_t i64() {
    std::int64_t v;
    raw(&v, 8);
    return v;
  }
  double f64() {
    double v;
    raw(&v, 8);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }
  std::vector<double> doubles() {
    const std::uint64_t n = u64();
    if (pos_ + n * sizeof(double) > n_)
      throw FormatError("checkpoint " + path_ + " is truncated inside a tensor");
    std::vector<double> v(n);
    raw(v.data(), n * sizeof(double));
    return v;
  }

 private:
  const unsigned char* p_;
  std::size_t n_;
  std::size_t pos_ = 0;
  std::string path_;
};

void put_params(ByteSink& sink, const std::vector<ParamTensor>& params) {
  sink.u32(static_cast<std::uint32_t>(params.size()));
  for (const ParamTensor& p : params) {
    sink.str(p.name);
    sink.doubles(*p.value);
  }
}

void put_buffers(ByteSink& sink, const std::vector<BufferTensor>& buffers) {
  sink.u32(static_cast<std::uint32_t>(buffers.size()));
  for (const BufferTensor& b : buffers) {
    sink.str(b.name);
    sink.doubles(*b.value);
  }
}

void get_params(ByteSource& src, const std::vector<ParamTensor>& params, const std::string& path) {
  const std::uint32_t count = src.u32();
  if (count != params.size())
    throw FormatError("checkpoint " + path + ": expected " + std::to_string(params.size()) +
                      " parameter tensors, found " + std::to_string(count));
  for (const ParamTensor& p : params) {
    const std::string name = src.str();
    if (name != p.name)
      throw FormatError("checkpoint " + path + ": parameter order mismatch, expected '" + p.name +
                        "', found '" + name + "'");
    std::vector<double> v = src.doubles();
    if (v.size() != p.value->size())
      throw FormatError("checkpoint " + path + ": tensor '" + name + "' has " +
                        std::to_string(v.size()) + " values, model wants " +
                        std::to_string(p.value->size()));
    *p.value = std::move(v);
  }
}

void get_buffers(ByteSource& src, const std::vector<BufferTensor>& buffers,
                 const std::string& path) {
  const std::uint32_t count = src.u32();
  if (count != buffers.size())
    throw FormatError("checkpoint " + path + ": expected " + std::to_string(buffers.size()) +
                      " buffer tensors, found " + std::to_string(count));
  for (const BufferTensor& b : buffers) {
    const std::string name = src.str();
    if (name != b.name)
      throw FormatError("checkpoint " + path + ": buffer order mismatch, expected '" + b.name +
                        "', found '" + name + "'");
    std::vector<double> v = src.doubles();
    if (v.size() != b.value->size())
      throw FormatError("checkpoint " + path + ": buffer '" + name + "' size mismatch");
    *b.value = std::move(v);
  }
}

void put_adam(ByteSink& sink, Adam& opt) {
  sink.i64(opt.t());
  sink.u32(static_cast<std::uint32_t>(opt.m().size()));
  for (std::size_t j = 0; j < opt.m().size(); ++j) {
    sink.doubles(opt.m()[j]);
    sink.doubles(opt.v()[j]);
  }
}

void get_adam(ByteSource& src, Adam& opt, const std::vector<ParamTensor>& params,
              const std::string& path) {
  opt.attach(params);
  opt.set_t(src.i64());
  const std::uint32_t count = src.u32();
  if (count != params.size())
    throw FormatError("checkpoint " + path + ": optimizer tracks " + std::to_string(count) +
                      " tensors, model has " + std::to_string(params.size()));
  for (std::size_t j = 0; j < params.size(); ++j) {
    std::vector<double> m = src.doubles();
    std::vector<double> v = src.doubles();
    if (m.size() != params[j].value->size() || v.size() != params[j].value->size())
      throw FormatError("checkpoint " + path + ": optimizer moment size mismatch at '" +
                        params[j].name + "'");
    opt.m()[j] = std::move(m);
    opt.v()[j] = std::move(v);
  }
}

}  // namespace

void save_checkpoint(TrainState& state, const std::filesystem::path& path) {
  ByteSink sink;
  sink.raw(kMagic, kMagicLen);

  const ArchConfig& a = state.config.arch;
  sink.i32(a.image_size);
  sink.i32(a.base_channels);
  sink.i32(a.depth);
  sink.f64(a.leaky_slope);
  sink.u32(static_cast<std::uint32_t>(a.skip_levels.size()));
  for (int l : a.skip_levels) sink.i32(l);

  const ClassPalette& pal = state.config.palette;
  sink.u32(static_cast<std::uint32_t>(pal.size()));
  for (const PaletteEntry& e : pal.entries()) {
    sink.i32(e.class_id);
    sink.str(e.name);
    sink.f64(e.color[0]);
    sink.f64(e.color[1]);
    sink.f64(e.color[2]);
  }

  sink.i32(state.config.batch_size);
  sink.f64(state.config.learning_rate);
  sink.f64(state.config.beta1);
  sink.f64(state.config.beta2);
  sink.i32(state.config.epochs);
  sink.u64(state.config.seed);
  sink.u8(state.config.adversarial_enabled ? 1 : 0);
  sink.f64(state.config.weights.lambda_mse);
  sink.f64(state.config.weights.lambda_adv);
  sink.u8(state.config.source_mode == SourceMode::teacher ? 0 : 1);
  sink.i32(state.config.checkpoint_interval);
  sink.u8(state.config.persist ? 1 : 0);

  sink.i64(state.epoch);
  sink.i64(state.step);

  put_params(sink, state.g.params());
  put_buffers(sink, state.g.buffers());
  put_params(sink, state.d.params());
  put_buffers(sink, state.d.buffers());
  put_adam(sink, state.opt_g);
  put_adam(sink, state.opt_d);

  // All training randomness is derived statelessly from the seed and the
  // epoch/step counters, so the seed is the complete RNG state.
  sink.str("stateless-derivation:" + std::to_string(state.config.seed));

  const std::uint64_t checksum = fnv1a(sink.bytes().data(), sink.bytes().size());

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(sink.bytes().data()),
            static_cast<std::streamsize>(sink.bytes().size()));
  out.write(reinterpret_cast<const char*>(&checksum), sizeof(checksum));
  out.flush();
  if (!out) throw IoError("write failure on checkpoint " + path.string());
}

TrainState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const std::string pstr = path.string();

  if (bytes.size() < kMagicLen + sizeof(std::uint64_t) ||
      std::memcmp(bytes.data(), kMagic, kMagicLen) != 0)
    throw FormatError("file " + pstr + " is not a LANEGEN-CKPT-v1 checkpoint");

  const std::size_t payload = bytes.size() - sizeof(std::uint64_t);
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + payload, sizeof(stored));
  if (fnv1a(bytes.data(), payload) != stored)
    throw FormatError("checkpoint " + pstr + " failed its checksum (corrupt file)");

  ByteSource src(bytes.data() + kMagicLen, payload - kMagicLen, pstr);

  TrainConfig cfg;
  cfg.arch.image_size = src.i32();
  cfg.arch.base_channels = src.i32();
  cfg.arch.depth = src.i32();
  cfg.arch.leaky_slope = src.f64();
  cfg.arch.skip_levels.clear();
  const std::uint32_t n_skips = src.u32();
  for (std::uint32_t i = 0; i < n_skips; ++i) cfg.arch.skip_levels.insert(src.i32());

  std::vector<PaletteEntry> entries;
  const std::uint32_t n_classes = src.u32();
  for (std::uint32_t i = 0; i < n_classes; ++i) {
    PaletteEntry e;
    e.class_id = src.i32();
    e.name = src.str();
    e.color[0] = src.f64();
    e.color[1] = src.f64();
    e.color[2] = src.f64();
    entries.push_back(std::move(e));
  }
  cfg.palette = ClassPalette(std::move(entries));

  cfg.batch_size = src.i32();
  cfg.learning_rate = src.f64();
  cfg.beta1 = src.f64();
  cfg.beta2 = src.f64();
  cfg.epochs = src.i32();
  cfg.seed = src.u64();
  cfg.adversarial_enabled = src.u8() != 0;
  cfg.weights.lambda_mse = src.f64();
  cfg.weights.lambda_adv = src.f64();
  cfg.source_mode = src.u8() == 0 ? SourceMode::teacher : SourceMode::noise;
  cfg.checkpoint_interval = src.i32();
  cfg.persist = src.u8() != 0;

  TrainState state(cfg);
  state.epoch = src.i64();
  state.step = src.i64();
  get_params(src, state.g.params(), pstr);
  get_buffers(src, state.g.buffers(), pstr);
  get_params(src, state.d.params(), pstr);
  get_buffers(src, state.d.buffers(), pstr);
  get_adam(src, state.opt_g, state.g.params(), pstr);
  get_adam(src, state.opt_d, state.d.params(), pstr);
  src.str();  // RNG derivation note; informational
  return state;
}

}  // namespace lanegen
