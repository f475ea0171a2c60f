#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "lanegen/dataio.hpp"
#include "lanegen/error.hpp"
#include "lanegen/rng.hpp"

namespace lanegen {

namespace {

constexpr std::uint64_t kSceneTag = 0x73796e7468ULL;  // stream tag for scene draws

// Marking classes by function. Canonical names are looked up first; roles the
// palette does not name fall back to the remaining class ids in role order,
// so any palette with background + >= 3 classes works.
struct Roles {
  int lane_inner = -1;  // dividing lines between driving lanes
  int lane_edge = -1;   // guiding lines at the road edges
  int arrow = -1;       // turn symbol
  int crossing = -1;
  int stop = -1;
  int nopark = -1;
};

Roles resolve_roles(const ClassPalette& palette) {
  if (palette.size() < 4)
    throw ConfigError("synth_scene needs background plus at least 3 marking classes, palette has " +
                      std::to_string(palette.size()));
  Roles r;
  std::vector<bool> taken(static_cast<std::size_t>(palette.size()), false);
  taken[0] = true;
  auto by_name = [&](const char* name) {
    const int id = palette.find_by_name(name);
    if (id > 0 && !taken[static_cast<std::size_t>(id)]) {
      taken[static_cast<std::size_t>(id)] = true;
      return id;
    }
    return -1;
  };
  r.lane_inner = by_name("dividing_lane");
  r.lane_edge = by_name("guiding_lane");
  r.arrow = by_name("turn_symbol");
  r.crossing = by_name("crossing");
  r.stop = by_name("stop_lane");
  r.nopark = by_name("no_parking");
  auto next_free = [&]() {
    for (int id = 1; id < palette.size(); ++id)
      if (!taken[static_cast<std::size_t>(id)]) {
        taken[static_cast<std::size_t>(id)] = true;
        return id;
      }
    return -1;
  };
  for (int* slot : {&r.lane_inner, &r.lane_edge, &r.arrow, &r.crossing, &r.stop, &r.nopark})
    if (*slot < 0) *slot = next_free();
  return r;
}

double lerp(double a, double b, double t) { return a + (b - a) * t; }

// Stateless per-pixel hash noise in [-1, 1]; keeps the texture independent
// of the main draw sequence.
double tex_noise(std::uint64_t seed, int y, int x) {
  const std::uint64_t key =
      (static_cast<std::uint64_t>(static_cast<std::uint32_t>(y)) << 32) |
      static_cast<std::uint32_t>(x);
  const std::uint64_t h = splitmix64(seed ^ key);
  return (static_cast<double>(h >> 11) * 0x1.0p-53) * 2.0 - 1.0;
}

}  // namespace

SamplePair synth_scene(std::uint64_t seed, const ClassPalette& palette, int image_size) {
  if (image_size < 16)
    throw ConfigError("synth_scene: image_size must be >= 16, got " + std::to_string(image_size));
  const Roles roles = resolve_roles(palette);
  Rng rng(derive_seed(seed, {kSceneTag}));
  const int S = image_size;
  const double Sd = static_cast<double>(S);

  // All randomness is drawn up front in a fixed order, independent of which
  // features end up enabled, so scenes stay comparable across palettes.
  const double horizon = rng.uniform(0.28, 0.40);   // fraction of height
  const double vx = rng.uniform(0.38, 0.62);        // vanishing x, fraction of width
  const double top_halfw = rng.uniform(0.025, 0.06);
  const double bot_left = rng.uniform(-0.22, -0.04);
  const double bot_right = rng.uniform(1.04, 1.22);
  const int n_lines = rng.uniform_int(2, 4);
  const double edge_lo = rng.uniform(0.09, 0.15);
  const double edge_hi = 1.0 - rng.uniform(0.09, 0.15);
  const double inner_jit[2] = {rng.uniform(-0.03, 0.03), rng.uniform(-0.03, 0.03)};
  bool dashed[4];
  for (bool& d : dashed) d = rng.bernoulli(0.6);
  // Marking widths are resolution-aware: anything much under 3-4 px at the
  // working size cannot survive the stride-2 encoder and would make the
  // label targets unlearnable rather than merely hard.
  const double line_w = rng.uniform(0.100, 0.145);  // full width at bottom, fraction of S
  const int dash_n = rng.uniform_int(4, 7);
  const double dash_duty = rng.uniform(0.5, 0.65);

  // Presence stays probabilistic for variety, but leans high: at desk-scale
  // sample counts every class needs enough pixels across the split to learn
  // and to keep its metrics defined.
  const bool has_crossing = rng.bernoulli(0.85) && roles.crossing > 0;
  const double cross_t0 = rng.uniform(0.30, 0.48);
  const double cross_h = rng.uniform(0.12, 0.18);
  const int cross_stripes = rng.uniform_int(3, 5);
  const bool has_stop = rng.bernoulli(0.85) && roles.stop > 0;
  const double stop_t = rng.uniform(0.62, 0.78);
  const double stop_h = rng.uniform(0.05, 0.08);
  const bool has_arrow = rng.bernoulli(0.90) && roles.arrow > 0;
  const int arrow_cell_raw = rng.uniform_int(0, 2);
  const double arrow_t1 = rng.uniform(0.60, 0.80);  // bottom of the arrow
  const double arrow_len = rng.uniform(0.32, 0.42);
  const bool has_nopark = rng.bernoulli(0.85) && roles.nopark > 0;
  const double np_t0 = rng.uniform(0.30, 0.40);

  // Night lighting: scenery luminance stays far below the painted markings,
  // the contrast regime the markings are designed for.
  const double sky_r = rng.uniform(0.02, 0.04);
  const double sky_g = rng.uniform(0.02, 0.04);
  const double sky_b = rng.uniform(0.03, 0.06);
  const double grass_r = rng.uniform(0.015, 0.03);
  const double grass_g = rng.uniform(0.02, 0.045);
  const double grass_b = rng.uniform(0.01, 0.025);
  const double road_gray = rng.uniform(0.03, 0.07);
  const std::uint64_t tex_seed = rng.next_u64();
  const double contrast = rng.uniform(0.985, 1.015);
  const double brightness = rng.uniform(-0.01, 0.01);

  const double yh = horizon * (Sd - 1.0);
  auto t_of_y = [&](int y) { return (static_cast<double>(y) - yh) / ((Sd - 1.0) - yh); };
  auto road_left = [&](double t) { return lerp(vx - top_halfw, bot_left, t) * (Sd - 1.0); };
  auto road_right = [&](double t) { return lerp(vx + top_halfw, bot_right, t) * (Sd - 1.0); };

  std::vector<double> line_u(static_cast<std::size_t>(n_lines));
  std::vector<int> line_cls(static_cast<std::size_t>(n_lines));
  std::vector<bool> line_dash(static_cast<std::size_t>(n_lines));
  for (int i = 0; i < n_lines; ++i) {
    const double f = static_cast<double>(i) / (n_lines - 1);
    double u = lerp(edge_lo, edge_hi, f);
    const bool edge = i == 0 || i == n_lines - 1;
    if (!edge) u += inner_jit[i - 1] * (edge_hi - edge_lo);
    line_u[static_cast<std::size_t>(i)] = u;
    line_cls[static_cast<std::size_t>(i)] = edge ? roles.lane_edge : roles.lane_inner;
    line_dash[static_cast<std::size_t>(i)] = !edge && dashed[i];
  }

  // ---- label raster ----
  LabelImage target(S, S, 0);
  auto paint_span = [&](int y, double x0, double x1, int cls) {
    const int xa = std::max(0, static_cast<int>(std::ceil(x0)));
    const int xb = std::min(S - 1, static_cast<int>(std::floor(x1)));
    for (int x = xa; x <= xb; ++x) target.at(y, x) = static_cast<std::uint8_t>(cls);
  };

  const int y_start = static_cast<int>(std::ceil(yh));
  for (int y = y_start; y < S; ++y) {
    const double t = std::min(1.0, std::max(0.0, t_of_y(y)));
    const double lx = road_left(t);
    const double rx = road_right(t);
    const double roadw = rx - lx;

    const double lane_half = std::max(1.25, 0.5 * line_w * Sd * (0.35 + 0.65 * t));
    for (int i = 0; i < n_lines; ++i) {
      if (line_dash[static_cast<std::size_t>(i)] &&
          std::fmod(t * dash_n, 1.0) > dash_duty)
        continue;
      const double xc = lx + line_u[static_cast<std::size_t>(i)] * roadw;
      paint_span(y, xc - lane_half, xc + lane_half, line_cls[static_cast<std::size_t>(i)]);
    }

    if (has_crossing && t >= cross_t0 && t <= cross_t0 + cross_h) {
      const int xa = std::max(0, static_cast<int>(std::ceil(lx + 0.05 * roadw)));
      const int xb = std::min(S - 1, static_cast<int>(std::floor(rx - 0.05 * roadw)));
      for (int x = xa; x <= xb; ++x) {
        const double u = (static_cast<double>(x) - lx) / roadw;
        if (std::fmod(u * cross_stripes * 2.0, 2.0) < 1.0)
          target.at(y, x) = static_cast<std::uint8_t>(roles.crossing);
      }
    }

    if (has_stop && t >= stop_t && t <= stop_t + stop_h)
      paint_span(y, lx + 0.08 * roadw, rx - 0.08 * roadw, roles.stop);

    if (has_arrow && t >= arrow_t1 - arrow_len && t <= arrow_t1) {
      const int cell = arrow_cell_raw % (n_lines - 1);
      const double u_a = 0.5 * (line_u[static_cast<std::size_t>(cell)] +
                                line_u[static_cast<std::size_t>(cell + 1)]);
      const double s = (t - (arrow_t1 - arrow_len)) / arrow_len;  // 0 tip, 1 base
      const double half =
          (s < 0.5 ? lerp(0.05, 0.17, s / 0.5) : 0.075) * roadw;
      const double xc = lx + u_a * roadw;
      paint_span(y, xc - std::max(half, 2.5), xc + std::max(half, 2.5), roles.arrow);
    }

    // No-parking marking: a solid strip hugging the left road edge. Solid and
    // wide on purpose — a dashed curb pattern at this working size would drop
    // below the stride-2 resolution floor described above.
    if (has_nopark && t >= np_t0 && t <= np_t0 + 0.45) {
      const double xc = lx + 0.05 * roadw;
      const double half = std::max(2.5, lane_half * 1.6);
      paint_span(y, xc - half, xc + half, roles.nopark);
    }
  }

  // ---- context raster ----
  RgbImage ctx(S, S);
  for (int y = 0; y < S; ++y) {
    const bool above = static_cast<double>(y) < yh;
    const double t = above ? 0.0 : std::min(1.0, std::max(0.0, t_of_y(y)));
    const double lx = road_left(t);
    const double rx = road_right(t);
    for (int x = 0; x < S; ++x) {
      double r, g, b;
      if (above) {
        const double v = static_cast<double>(y) / std::max(yh, 1.0);
        r = lerp(sky_r, 0.055, v);  // faint glow toward the horizon
        g = lerp(sky_g, 0.045, v);
        b = lerp(sky_b, 0.065, v);
      } else if (static_cast<double>(x) >= lx && static_cast<double>(x) <= rx) {
        const double shade = road_gray * (0.82 + 0.18 * t);
        const double n = tex_noise(tex_seed, y, x) * 0.012;
        r = g = b = shade + n;
      } else {
        const double n = tex_noise(tex_seed, y, x) * 0.015;
        r = grass_r + n;
        g = grass_g + n;
        b = grass_b + n;
      }
      const int cls = target.at(y, x);
      if (cls != 0) {
        // Freshly painted markings: canonical class colors, exempt from the
        // photometric jitter that shifts the unpainted scenery around them.
        const auto& color = palette.entry(cls).color;
        ctx.at(y, x, 0) = color[0];
        ctx.at(y, x, 1) = color[1];
        ctx.at(y, x, 2) = color[2];
        continue;
      }
      ctx.at(y, x, 0) = (r - 0.5) * contrast + 0.5 + brightness;
      ctx.at(y, x, 1) = (g - 0.5) * contrast + 0.5 + brightness;
      ctx.at(y, x, 2) = (b - 0.5) * contrast + 0.5 + brightness;
    }
  }
  clip01(ctx);

  SamplePair pair;
  pair.context = std::move(ctx);
  pair.target = std::move(target);
  {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "scene_%016llx", static_cast<unsigned long long>(seed));
    pair.id = buf;
  }
  return pair;
}

Dataset synth_dataset(std::uint64_t seed, const SplitCounts& counts, const ClassPalette& palette,
                      int image_size) {
  if (counts.train < 1 || counts.val < 1 || counts.test < 1)
    throw ConfigError("synth_dataset: all split counts must be positive");
  auto make = [&](const char* name, int count, int base_index) {
    DatasetSplit split;
    split.name = name;
    split.image_size = image_size;
    split.samples.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
      const int index = base_index + k;
      SamplePair p =
          synth_scene(derive_seed(seed, {static_cast<std::uint64_t>(index)}), palette, image_size);
      char buf[16];
      std::snprintf(buf, sizeof(buf), "scene_%05d", index);
      p.id = buf;
      split.samples.push_back(std::move(p));
    }
    return split;
  };
  Dataset ds;
  ds.train = make("train", counts.train, 0);
  ds.val = make("val", counts.val, counts.train);
  ds.test = make("test", counts.test, counts.train + counts.val);
  return ds;
}

}  // namespace lanegen
