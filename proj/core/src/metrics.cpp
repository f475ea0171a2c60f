#include "lanegen/metrics.hpp"

#include <fstream>
#include <sstream>

#include "lanegen/error.hpp"

namespace lanegen {

ConfusionCounts::ConfusionCounts(int num_classes) {
  if (num_classes < 1)
    throw ValidationError("ConfusionCounts needs at least one class, got " +
                          std::to_string(num_classes));
  per_class_.resize(static_cast<std::size_t>(num_classes));
}

const ClassCounts& ConfusionCounts::counts(int class_id) const {
  if (class_id < 0 || class_id >= num_classes())
    throw ValidationError("ConfusionCounts: class " + std::to_string(class_id) + " out of range");
  return per_class_[static_cast<std::size_t>(class_id)];
}

void ConfusionCounts::accumulate(const LabelImage& predicted, const LabelImage& truth) {
  if (!predicted.same_size(truth)) {
    std::ostringstream os;
    os << "accumulate: shape mismatch " << predicted.height << "x" << predicted.width << " vs "
       << truth.height << "x" << truth.width;
    throw ValidationError(os.str());
  }
  const int nc = num_classes();
  // Each pixel touches at most two classes; tn for everything else is
  // restored afterwards from the pixel total.
  std::vector<std::int64_t> touched(static_cast<std::size_t>(nc), 0);
  const std::int64_t pixels = static_cast<std::int64_t>(predicted.pixel_count());
  for (std::size_t i = 0; i < predicted.data.size(); ++i) {
    const int p = predicted.data[i];
    const int t = truth.data[i];
    if (p >= nc || t >= nc)
      throw ValidationError("accumulate: class id " + std::to_string(std::max(p, t)) +
                            " outside the palette (" + std::to_string(nc) + " classes)");
    if (p == t) {
      per_class_[static_cast<std::size_t>(p)].tp++;
      touched[static_cast<std::size_t>(p)]++;
    } else {
      per_class_[static_cast<std::size_t>(p)].fp++;
      per_class_[static_cast<std::size_t>(t)].fn++;
      touched[static_cast<std::size_t>(p)]++;
      touched[static_cast<std::size_t>(t)]++;
    }
  }
  for (int c = 0; c < nc; ++c)
    per_class_[static_cast<std::size_t>(c)].tn += pixels - touched[static_cast<std::size_t>(c)];
  total_pixels_ += pixels;
  sample_count_ += 1;
}

void ConfusionCounts::merge(const ConfusionCounts& other) {
  if (other.num_classes() != num_classes())
    throw ValidationError("merge: class count mismatch");
  for (int c = 0; c < num_classes(); ++c) {
    ClassCounts& a = per_class_[static_cast<std::size_t>(c)];
    const ClassCounts& b = other.per_class_[static_cast<std::size_t>(c)];
    a.tp += b.tp;
    a.fp += b.fp;
    a.fn += b.fn;
    a.tn += b.tn;
  }
  total_pixels_ += other.total_pixels_;
  sample_count_ += other.sample_count_;
}

MetricsReport report(const ConfusionCounts& counts, const ClassPalette& palette) {
  if (palette.size() != counts.num_classes())
    throw ValidationError("report: palette has " + std::to_string(palette.size()) +
                          " classes but counts track " + std::to_string(counts.num_classes()));
  MetricsReport r;
  r.sample_count = counts.sample_count();
  std::int64_t tp_total = 0;
  double iou_sum = 0.0, prec_sum = 0.0, rec_sum = 0.0;
  int iou_n = 0, prec_n = 0, rec_n = 0;
  for (int c = 0; c < counts.num_classes(); ++c) {
    const ClassCounts& cc = counts.counts(c);
    tp_total += cc.tp;
    ClassMetrics m;
    m.class_id = c;
    m.name = palette.entry(c).name;
    if (cc.tp + cc.fp + cc.fn > 0) {
      m.iou = static_cast<double>(cc.tp) / static_cast<double>(cc.tp + cc.fp + cc.fn);
      m.iou_defined = true;
    }
    if (cc.tp + cc.fp > 0) {
      m.precision = static_cast<double>(cc.tp) / static_cast<double>(cc.tp + cc.fp);
      m.precision_defined = true;
    }
    if (cc.tp + cc.fn > 0) {
      m.recall = static_cast<double>(cc.tp) / static_cast<double>(cc.tp + cc.fn);
      m.recall_defined = true;
    }
    if (c != 0) {
      if (m.iou_defined) {
        iou_sum += m.iou;
        iou_n++;
      } else {
        r.undefined_classes.push_back(c);
      }
      if (m.precision_defined) {
        prec_sum += m.precision;
        prec_n++;
      }
      if (m.recall_defined) {
        rec_sum += m.recall;
        rec_n++;
      }
    }
    r.per_class.push_back(std::move(m));
  }
  if (iou_n > 0) {
    r.mean_iou = iou_sum / iou_n;
    r.mean_iou_defined = true;
  }
  if (prec_n > 0) {
    r.mean_precision = prec_sum / prec_n;
    r.mean_precision_defined = true;
  }
  if (rec_n > 0) {
    r.mean_recall = rec_sum / rec_n;
    r.mean_recall_defined = true;
  }
  if (counts.total_pixels() > 0)
    r.pixel_accuracy = static_cast<double>(tp_total) / static_cast<double>(counts.total_pixels());
  return r;
}

namespace {

std::string cell(double value, bool defined) {
  if (!defined) return "undefined";
  std::ostringstream os;
  os.precision(6);
  os << std::fixed << value;
  return os.str();
}

std::string json_number(double value, bool defined) {
  if (!defined) return "null";
  std::ostringstream os;
  os.precision(10);
  os << value;
  return os.str();
}

}  // namespace

std::string report_to_csv(const MetricsReport& r) {
  std::ostringstream os;
  os << "class,iou,precision,recall\n";
  for (const ClassMetrics& m : r.per_class) {
    if (m.class_id == 0) continue;
    os << m.name << "," << cell(m.iou, m.iou_defined) << ","
       << cell(m.precision, m.precision_defined) << "," << cell(m.recall, m.recall_defined)
       << "\n";
  }
  os << "mean," << cell(r.mean_iou, r.mean_iou_defined) << ","
     << cell(r.mean_precision, r.mean_precision_defined) << ","
     << cell(r.mean_recall, r.mean_recall_defined) << "\n";
  return os.str();
}

std::string report_to_json(const MetricsReport& r) {
  std::ostringstream os;
  os << "{\n  \"classes\": [\n";
  bool first = true;
  for (const ClassMetrics& m : r.per_class) {
    if (!first) os << ",\n";
    first = false;
    os << "    {\"class_id\": " << m.class_id << ", \"name\": \"" << m.name
       << "\", \"iou\": " << json_number(m.iou, m.iou_defined)
       << ", \"precision\": " << json_number(m.precision, m.precision_defined)
       << ", \"recall\": " << json_number(m.recall, m.recall_defined) << "}";
  }
  os << "\n  ],\n";
  os << "  \"mean_iou\": " << json_number(r.mean_iou, r.mean_iou_defined) << ",\n";
  os << "  \"mean_precision\": " << json_number(r.mean_precision, r.mean_precision_defined)
     << ",\n";
  os << "  \"mean_recall\": " << json_number(r.mean_recall, r.mean_recall_defined) << ",\n";
  os << "  \"pixel_accuracy\": " << json_number(r.pixel_accuracy, true) << ",\n";
  os << "  \"sample_count\": " << r.sample_count << ",\n";
  os << "  \"undefined_classes\": [";
  for (std::size_t i = 0; i < r.undefined_classes.size(); ++i) {
    if (i) os << ", ";
    os << r.undefined_classes[i];
  }
  os << "]\n}\n";
  return os.str();
}

void write_report(const MetricsReport& r, const std::filesystem::path& csv_path,
                  const std::filesystem::path& json_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw IoError("cannot write " + csv_path.string());
  csv << report_to_csv(r);
  std::ofstream js(json_path);
  if (!js) throw IoError("cannot write " + json_path.string());
  js << report_to_json(r);
}

}  // namespace lanegen
