#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lanegen/image.hpp"
#include "lanegen/palette.hpp"

namespace lanegen {

struct ClassCounts {
  std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// Per-class pixel tallies. accumulate() is pure summation, so counts from
// different images (or workers) can be merged in any order.
class ConfusionCounts {
 public:
  explicit ConfusionCounts(int num_classes);

  void accumulate(const LabelImage& predicted, const LabelImage& truth);
  void merge(const ConfusionCounts& other);

  int num_classes() const { return static_cast<int>(per_class_.size()); }
  const ClassCounts& counts(int class_id) const;
  ClassCounts& counts(int class_id) { return per_class_[static_cast<std::size_t>(class_id)]; }
  std::int64_t total_pixels() const { return total_pixels_; }
  int sample_count() const { return sample_count_; }

 private:
  std::vector<ClassCounts> per_class_;
  std::int64_t total_pixels_ = 0;
  int sample_count_ = 0;
};

struct ClassMetrics {
  int class_id = 0;
  std::string name;
  double iou = 0.0, precision = 0.0, recall = 0.0;
  bool iou_defined = false, precision_defined = false, recall_defined = false;
};

struct MetricsReport {
  std::vector<ClassMetrics> per_class;  // every palette class, background included
  // Means over non-background classes, skipping undefined entries.
  double mean_iou = 0.0, mean_precision = 0.0, mean_recall = 0.0;
  bool mean_iou_defined = false, mean_precision_defined = false, mean_recall_defined = false;
  double pixel_accuracy = 0.0;
  int sample_count = 0;
  std::vector<int> undefined_classes;  // non-background classes with no denominator
};

// iou = tp/(tp+fp+fn), precision = tp/(tp+fp), recall = tp/(tp+fn),
// accuracy = sum(tp)/total. Zero-denominator classes are excluded from the
// means and listed in undefined_classes rather than coerced to 0 or 1.
MetricsReport report(const ConfusionCounts& counts, const ClassPalette& palette);

// One row per non-background class plus a mean row; columns
// class,iou,precision,recall. Undefined cells print as "undefined".
std::string report_to_csv(const MetricsReport& r);
std::string report_to_json(const MetricsReport& r);
void write_report(const MetricsReport& r, const std::filesystem::path& csv_path,
                  const std::filesystem::path& json_path);

}  // namespace lanegen
