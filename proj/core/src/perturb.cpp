#include "lanegen/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "lanegen/error.hpp"
#include "lanegen/rng.hpp"

namespace lanegen {

namespace {

constexpr std::uint64_t kNoiseTag = 0x6e6f697365ULL;  // per-op stream tags
constexpr std::uint64_t kOcclTag = 0x6f63636cULL;
constexpr std::uint64_t kGammaTag = 0x67616d6d61ULL;

double median(std::vector<double>& values) {
  const std::size_t n = values.size();
  std::sort(values.begin(), values.end());
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

void PerturbationSpec::validate() const {
  if (noise_sigma < 0.0) throw ConfigError("perturb.noise_sigma must be >= 0");
  if (!(gamma_lo > 0.0 && gamma_lo <= gamma_hi))
    throw ConfigError("perturb.gamma range must satisfy 0 < lo <= hi");
  if (removal_fraction < 0.0 || removal_fraction > 1.0)
    throw ConfigError("perturb.removal_fraction must lie in [0, 1]");
}

RgbImage apply_gaussian_noise(const RgbImage& image, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw ValidationError("apply_gaussian_noise: sigma must be >= 0");
  if (sigma == 0.0) return image;
  Rng rng(derive_seed(seed, {kNoiseTag}));
  RgbImage out = image;
  for (double& v : out.data) v += rng.normal(0.0, sigma);
  clip01(out);
  return out;
}

RgbImage apply_gamma(const RgbImage& image, double gamma) {
  if (!(gamma > 0.0)) throw ValidationError("apply_gamma: gamma must be positive");
  RgbImage out = image;
  for (double& v : out.data) v = std::pow(v, gamma);
  return out;
}

RgbImage occlude_components(const RgbImage& context, const LabelImage& labels, double fraction,
                            std::uint64_t seed) {
  if (fraction < 0.0 || fraction > 1.0)
    throw ValidationError("occlude_components: fraction must lie in [0, 1]");
  if (context.height != labels.height || context.width != labels.width)
    throw ValidationError("occlude_components: context/labels size mismatch");

  const int H = labels.height, W = labels.width;
  // 8-connected component labeling over non-background pixels; dashes sit
  // diagonally adjacent under perspective, so 4-connectivity would shred
  // them into fragments.
  std::vector<int> comp(static_cast<std::size_t>(H) * W, -1);
  std::vector<std::vector<int>> members;  // pixel indices per component
  std::vector<int> stack;
  for (int start = 0; start < H * W; ++start) {
    if (labels.data[static_cast<std::size_t>(start)] == 0 ||
        comp[static_cast<std::size_t>(start)] >= 0)
      continue;
    const int id = static_cast<int>(members.size());
    members.emplace_back();
    stack.push_back(start);
    comp[static_cast<std::size_t>(start)] = id;
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      members[static_cast<std::size_t>(id)].push_back(cur);
      const int cy = cur / W, cx = cur % W;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dy == 0 && dx == 0) continue;
          const int ny = cy + dy, nx = cx + dx;
          if (ny < 0 || ny >= H || nx < 0 || nx >= W) continue;
          const int ni = ny * W + nx;
          if (labels.data[static_cast<std::size_t>(ni)] == 0 ||
              comp[static_cast<std::size_t>(ni)] >= 0)
            continue;
          comp[static_cast<std::size_t>(ni)] = id;
          stack.push_back(ni);
        }
    }
  }

  const int n_components = static_cast<int>(members.size());
  if (n_components == 0 || fraction == 0.0) return context;
  const int n_selected =
      std::min(n_components, static_cast<int>(std::ceil(fraction * n_components)));

  std::vector<int> order(static_cast<std::size_t>(n_components));
  for (int i = 0; i < n_components; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(derive_seed(seed, {kOcclTag}));
  rng.shuffle(order);

  RgbImage out = context;
  for (int k = 0; k < n_selected; ++k) {
    const std::vector<int>& pix = members[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
    const int id = comp[static_cast<std::size_t>(pix.front())];
    // One-pixel boundary ring: pixels outside this component that touch it.
    std::vector<std::uint8_t> in_ring(static_cast<std::size_t>(H) * W, 0);
    std::vector<double> ring_r, ring_g, ring_b;
    for (int cur : pix) {
      const int cy = cur / W, cx = cur % W;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dy == 0 && dx == 0) continue;
          const int ny = cy + dy, nx = cx + dx;
          if (ny < 0 || ny >= H || nx < 0 || nx >= W) continue;
          const int ni = ny * W + nx;
          if (comp[static_cast<std::size_t>(ni)] == id || in_ring[static_cast<std::size_t>(ni)])
            continue;
          in_ring[static_cast<std::size_t>(ni)] = 1;
          ring_r.push_back(context.at(ny, nx, 0));
          ring_g.push_back(context.at(ny, nx, 1));
          ring_b.push_back(context.at(ny, nx, 2));
        }
    }
    if (ring_r.empty()) continue;  // component spans the whole image
    const double fill_r = median(ring_r), fill_g = median(ring_g), fill_b = median(ring_b);
    for (int cur : pix) {
      const int cy = cur / W, cx = cur % W;
      out.at(cy, cx, 0) = fill_r;
      out.at(cy, cx, 1) = fill_g;
      out.at(cy, cx, 2) = fill_b;
    }
  }
  return out;
}

AdverseSets build_adverse_sets(const DatasetSplit& split, const PerturbationSpec& spec,
                               std::uint64_t seed) {
  spec.validate();
  const int n = static_cast<int>(split.samples.size());
  const int per_set = n / 3;
  if (per_set == 0)
    throw ValidationError("build_adverse_sets: split '" + split.name + "' has " +
                          std::to_string(n) + " samples; need at least 3");

  AdverseSets sets;
  sets.used_samples = per_set * 3;
  sets.truncated = sets.used_samples != n;
  sets.noise.name = "adverse_noise";
  sets.gamma.name = "adverse_gamma";
  sets.occl.name = "adverse_occl";
  for (DatasetSplit* s : {&sets.noise, &sets.gamma, &sets.occl})
    s->image_size = split.image_size;

  for (int i = 0; i < sets.used_samples; ++i) {
    const SamplePair& src = split.samples[static_cast<std::size_t>(i)];
    SamplePair p;
    p.id = src.id;
    p.target = src.target;  // ground truth is never perturbed
    const std::uint64_t item_seed = derive_seed(seed, {static_cast<std::uint64_t>(i)});
    if (i < per_set) {
      p.context = apply_gaussian_noise(src.context, spec.noise_sigma, item_seed);
      sets.noise.samples.push_back(std::move(p));
    } else if (i < 2 * per_set) {
      Rng rng(derive_seed(item_seed, {kGammaTag}));
      p.context = apply_gamma(src.context, rng.uniform(spec.gamma_lo, spec.gamma_hi));
      sets.gamma.samples.push_back(std::move(p));
    } else {
      p.context = occlude_components(src.context, src.target, spec.removal_fraction, item_seed);
      sets.occl.samples.push_back(std::move(p));
    }
  }
  return sets;
}

}  // namespace lanegen
