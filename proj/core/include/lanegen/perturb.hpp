#pragma once

#include <cstdint>

#include "lanegen/dataio.hpp"
#include "lanegen/image.hpp"

namespace lanegen {

// Knobs for the three adverse-condition constructions. Ranges were picked to
// be visibly adverse without destroying the scene; all overridable.
struct PerturbationSpec {
  double noise_sigma = 0.05;  // on the [0,1] scale
  double gamma_lo = 0.4;
  double gamma_hi = 2.5;
  double removal_fraction = 0.5;

  void validate() const;  // ConfigError on violated invariants
};

// out = clip(image + n), n ~ N(0, sigma^2) i.i.d. per channel.
RgbImage apply_gaussian_noise(const RgbImage& image, double sigma, std::uint64_t seed);

// Per-channel power law; gamma must be positive.
RgbImage apply_gamma(const RgbImage& image, double gamma);

// Fades markings out of the context: finds 8-connected components of
// non-background label pixels, picks ceil(fraction * count) of them by
// seeded choice, and replaces each selected component's context pixels with
// the per-channel median of its one-pixel boundary ring. Labels stay intact
// on purpose - the network must regenerate what was removed.
RgbImage occlude_components(const RgbImage& context, const LabelImage& labels, double fraction,
                            std::uint64_t seed);

struct AdverseSets {
  DatasetSplit noise;  // named adverse_noise
  DatasetSplit gamma;  // named adverse_gamma
  DatasetSplit occl;   // named adverse_occl
  int used_samples = 0;
  bool truncated = false;  // true when the split size was not divisible by 3
};

// Splits the input into thirds in sample order, applies one perturbation
// kind per third. Ids and labels are carried over unmodified. A
// non-divisible split is cut to the largest balanced prefix (flagged).
AdverseSets build_adverse_sets(const DatasetSplit& split, const PerturbationSpec& spec,
                               std::uint64_t seed);

}  // namespace lanegen
