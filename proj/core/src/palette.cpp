#include "lanegen/palette.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lanegen/error.hpp"

namespace lanegen {

namespace {

double color_dist2(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  double d = 0.0;
  for (int c = 0; c < 3; ++c) {
    const double diff = a[c] - b[c];
    d += diff * diff;
  }
  return d;
}

}  // namespace

ClassPalette::ClassPalette(std::vector<PaletteEntry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw ValidationError("palette: no entries");
  std::sort(entries_.begin(), entries_.end(),
            [](const PaletteEntry& a, const PaletteEntry& b) { return a.class_id < b.class_id; });
  for (int i = 0; i < static_cast<int>(entries_.size()); ++i) {
    if (entries_[i].class_id != i) {
      throw ValidationError("palette: class ids must be unique and contiguous from 0, got id " +
                            std::to_string(entries_[i].class_id) + " at position " + std::to_string(i));
    }
    for (double c : entries_[i].color) {
      if (!(c >= 0.0 && c <= 1.0)) {
        throw ValidationError("palette: channel out of [0,1] for class " + std::to_string(i));
      }
    }
  }
  if (entries_[0].color != std::array<double, 3>{0.0, 0.0, 0.0}) {
    throw ValidationError("palette: class 0 must be background with color (0,0,0)");
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    for (std::size_t j = i + 1; j < entries_.size(); ++j) {
      if (color_dist2(entries_[i].color, entries_[j].color) <= 0.0) {
        throw ValidationError("palette: classes " + std::to_string(i) + " and " +
                              std::to_string(j) + " share the same color");
      }
    }
  }
}

ClassPalette ClassPalette::default_palette() {
  // Cube corners at the maximal min-separation of 1.0, assigned so that the
  // large classes take the primaries. A generated color that fades from a
  // two-component corner toward black crosses only the cells of that corner's
  // component primaries, so stray boundary pixels land in the high-support
  // classes instead of minting false positives for the small symbol classes.
  // White is left out entirely: its fade passes the cube circumcenter, which
  // is equidistant to every corner and turns boundary pixels into a lottery
  // over all classes.
  return ClassPalette({
      {0, "background", {0.0, 0.0, 0.0}},
      {1, "dividing_lane", {1.0, 0.0, 0.0}},
      {2, "guiding_lane", {0.0, 1.0, 0.0}},
      {3, "crossing", {0.0, 0.0, 1.0}},
      {4, "stop_lane", {1.0, 1.0, 0.0}},
      {5, "turn_symbol", {0.0, 1.0, 1.0}},
      {6, "no_parking", {1.0, 0.0, 1.0}},
  });
}

const PaletteEntry& ClassPalette::entry(int class_id) const {
  if (!has_class(class_id)) {
    throw ValidationError("palette: unknown class id " + std::to_string(class_id));
  }
  return entries_[static_cast<std::size_t>(class_id)];
}

int ClassPalette::find_by_name(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e.class_id;
  }
  return -1;
}

bool ClassPalette::operator==(const ClassPalette& o) const {
  if (entries_.size() != o.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].class_id != o.entries_[i].class_id ||
        entries_[i].name != o.entries_[i].name ||
        entries_[i].color != o.entries_[i].color) {
      return false;
    }
  }
  return true;
}

RgbImage render_labels(const LabelImage& labels, const ClassPalette& palette) {
  RgbImage out(labels.height, labels.width);
  for (int y = 0; y < labels.height; ++y) {
    for (int x = 0; x < labels.width; ++x) {
      const int id = labels.at(y, x);
      if (!palette.has_class(id)) {
        throw ValidationError("render_labels: unknown class_id " + std::to_string(id) +
                              " at pixel (" + std::to_string(y) + "," + std::to_string(x) + ")");
      }
      const auto& color = palette.entry(id).color;
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = color[c];
    }
  }
  return out;
}

LabelImage quantize(const RgbImage& image, const ClassPalette& palette) {
  LabelImage out(image.height, image.width);
  const auto& entries = palette.entries();
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const std::array<double, 3> px{image.at(y, x, 0), image.at(y, x, 1), image.at(y, x, 2)};
      int best = 0;
      double best_d = color_dist2(px, entries[0].color);
      for (int k = 1; k < static_cast<int>(entries.size()); ++k) {
        const double d = color_dist2(px, entries[static_cast<std::size_t>(k)].color);
        if (d < best_d) {  // strict: ties keep the lowest class id
          best_d = d;
          best = k;
        }
      }
      out.at(y, x) = static_cast<std::uint8_t>(best);
    }
  }
  return out;
}

ClassPalette load_palette(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open palette file: " + path.string());

  std::vector<PaletteEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // strip whitespace and skip blanks/comments
    std::string trimmed;
    for (char ch : line) {
      if (!std::isspace(static_cast<unsigned char>(ch))) trimmed += ch;
    }
    if (trimmed.empty() || trimmed[0] == '#') continue;

    std::stringstream ss(trimmed);
    std::string id_s, name, r_s, g_s, b_s, extra;
    if (!std::getline(ss, id_s, ',') || !std::getline(ss, name, ',') ||
        !std::getline(ss, r_s, ',') || !std::getline(ss, g_s, ',') || !std::getline(ss, b_s, ',')) {
      throw FormatError("palette line " + std::to_string(line_no) +
                        ": expected class_id,name,R,G,B");
    }
    if (std::getline(ss, extra, ',')) {
      throw FormatError("palette line " + std::to_string(line_no) + ": trailing fields");
    }
    PaletteEntry e;
    try {
      e.class_id = std::stoi(id_s);
      for (int c = 0; c < 3; ++c) {
        const int v = std::stoi(c == 0 ? r_s : (c == 1 ? g_s : b_s));
        if (v < 0 || v > 255) {
          throw FormatError("palette line " + std::to_string(line_no) +
                            ": channel value " + std::to_string(v) + " out of [0,255]");
        }
        e.color[static_cast<std::size_t>(c)] = v / 255.0;
      }
    } catch (const FormatError&) {
      throw;
    } catch (const std::exception&) {
      throw FormatError("palette line " + std::to_string(line_no) + ": malformed number");
    }
    e.name = name;
    if (e.name.empty()) {
      throw FormatError("palette line " + std::to_string(line_no) + ": empty class name");
    }
    // Enforce the palette invariants row by row so violations point at the
    // offending line rather than at the file as a whole.
    if (e.class_id != static_cast<int>(entries.size())) {
      throw FormatError("palette line " + std::to_string(line_no) + ": class ids must be " +
                        "contiguous from 0, got " + std::to_string(e.class_id) + " where " +
                        std::to_string(entries.size()) + " was expected");
    }
    if (e.class_id == 0 && (e.color[0] != 0.0 || e.color[1] != 0.0 || e.color[2] != 0.0)) {
      throw FormatError("palette line " + std::to_string(line_no) +
                        ": class 0 must be background with color 0,0,0");
    }
    for (const PaletteEntry& prev : entries) {
      if (prev.color == e.color) {
        throw FormatError("palette line " + std::to_string(line_no) + ": color duplicates class " +
                          std::to_string(prev.class_id));
      }
    }
    entries.push_back(std::move(e));
  }
  if (entries.empty()) throw FormatError("palette file has no entries: " + path.string());
  try {
    return ClassPalette(std::move(entries));
  } catch (const ValidationError& e) {
    throw FormatError(std::string(e.what()) + " (file " + path.string() + ")");
  }
}

void save_palette(const ClassPalette& palette, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open palette file for writing: " + path.string());
  out << "# class_id,name,R,G,B\n";
  for (const auto& e : palette.entries()) {
    out << e.class_id << ',' << e.name;
    for (int c = 0; c < 3; ++c) {
      out << ',' << static_cast<int>(std::lround(e.color[static_cast<std::size_t>(c)] * 255.0));
    }
    out << '\n';
  }
  if (!out) throw IoError("palette write failed: " + path.string());
}

}  // namespace lanegen
