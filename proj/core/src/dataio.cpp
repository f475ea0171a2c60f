#include "lanegen/dataio.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>
#include <system_error>

#include "lanegen/error.hpp"
#include "lanegen/png_io.hpp"

namespace fs = std::filesystem;

namespace lanegen {

namespace {

std::string join_stems(const std::vector<std::string>& stems) {
  std::ostringstream os;
  const std::size_t shown = std::min<std::size_t>(stems.size(), 8);
  for (std::size_t i = 0; i < shown; ++i) {
    if (i) os << ", ";
    os << stems[i];
  }
  if (stems.size() > shown) os << ", ... (" << stems.size() << " total)";
  return os.str();
}

std::vector<std::string> list_stems(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec))
    throw IoError("dataset directory missing: " + dir.string());
  std::vector<std::string> stems;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const fs::path& p = entry.path();
    if (p.extension() == ".png") stems.push_back(p.stem().string());
  }
  std::sort(stems.begin(), stems.end());
  return stems;
}

}  // namespace

Tensor to_tensor(const RgbImage& img) {
  Tensor t(1, 3, img.height, img.width);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) t.at(0, c, y, x) = img.at(y, x, c);
  return t;
}

RgbImage image_from_tensor(const Tensor& t, int item) {
  if (t.c != 3)
    throw ValidationError("image_from_tensor expects 3 channels, got " + t.shape_str());
  if (item < 0 || item >= t.n)
    throw ValidationError("image_from_tensor: batch item " + std::to_string(item) +
                          " out of range for " + t.shape_str());
  RgbImage img(t.h, t.w);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < t.h; ++y)
      for (int x = 0; x < t.w; ++x) img.at(y, x, c) = t.at(item, c, y, x);
  return img;
}

ConditionedInput make_conditioned_input(const RgbImage& source, const RgbImage& context) {
  if (!source.same_size(context)) {
    std::ostringstream os;
    os << "make_conditioned_input: source " << source.height << "x" << source.width
       << " vs context " << context.height << "x" << context.width;
    throw ValidationError(os.str());
  }
  ConditionedInput in;
  in.data = Tensor(1, 6, source.height, source.width);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < source.height; ++y)
      for (int x = 0; x < source.width; ++x) {
        in.data.at(0, c, y, x) = source.at(y, x, c);
        in.data.at(0, c + 3, y, x) = context.at(y, x, c);
      }
  return in;
}

std::pair<RgbImage, RgbImage> split_conditioned_input(const ConditionedInput& in) {
  if (in.data.n != 1 || in.data.c != 6)
    throw ValidationError("split_conditioned_input expects a (1,6,S,S) tensor, got " +
                          in.data.shape_str());
  RgbImage source(in.data.h, in.data.w), context(in.data.h, in.data.w);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < in.data.h; ++y)
      for (int x = 0; x < in.data.w; ++x) {
        source.at(y, x, c) = in.data.at(0, c, y, x);
        context.at(y, x, c) = in.data.at(0, c + 3, y, x);
      }
  return {std::move(source), std::move(context)};
}

DatasetSplit load_split(const std::string& root, const std::string& name,
                        const ClassPalette& palette, int image_size) {
  const fs::path images_dir = fs::path(root) / name / "images";
  const fs::path labels_dir = fs::path(root) / name / "labels";
  const std::vector<std::string> img_stems = list_stems(images_dir);
  const std::vector<std::string> lbl_stems = list_stems(labels_dir);

  std::vector<std::string> img_only, lbl_only;
  std::set_difference(img_stems.begin(), img_stems.end(), lbl_stems.begin(), lbl_stems.end(),
                      std::back_inserter(img_only));
  std::set_difference(lbl_stems.begin(), lbl_stems.end(), img_stems.begin(), img_stems.end(),
                      std::back_inserter(lbl_only));
  if (!img_only.empty() || !lbl_only.empty()) {
    std::ostringstream os;
    os << "split '" << name << "': unpaired files;";
    if (!img_only.empty()) os << " images without labels: " << join_stems(img_only) << ";";
    if (!lbl_only.empty()) os << " labels without images: " << join_stems(lbl_only) << ";";
    throw ValidationError(os.str());
  }

  DatasetSplit split;
  split.name = name;
  split.image_size = image_size;
  split.samples.reserve(img_stems.size());
  for (const std::string& stem : img_stems) {
    SamplePair pair;
    pair.id = stem;
    RgbImage ctx = read_png(images_dir / (stem + ".png"));
    pair.context = (ctx.height == image_size && ctx.width == image_size)
                       ? std::move(ctx)
                       : resize_bilinear(ctx, image_size, image_size);
    LabelImage lbl = quantize(read_png(labels_dir / (stem + ".png")), palette);
    pair.target = (lbl.height == image_size && lbl.width == image_size)
                      ? std::move(lbl)
                      : resize_nearest(lbl, image_size, image_size);
    split.samples.push_back(std::move(pair));
  }
  return split;
}

Dataset load_dataset(const std::string& root, const ClassPalette& palette, int image_size) {
  Dataset ds;
  ds.train = load_split(root, "train", palette, image_size);
  ds.val = load_split(root, "val", palette, image_size);
  ds.test = load_split(root, "test", palette, image_size);

  // Splits must be disjoint by id so cross-split reports are unambiguous.
  std::vector<std::pair<std::string, std::string>> seen;  // id -> split
  std::vector<std::string> collisions;
  for (const DatasetSplit* s : {&ds.train, &ds.val, &ds.test})
    for (const SamplePair& p : s->samples) {
      for (const auto& [id, where] : seen)
        if (id == p.id) collisions.push_back(p.id + " (in " + where + " and " + s->name + ")");
      seen.emplace_back(p.id, s->name);
    }
  if (!collisions.empty())
    throw ValidationError("dataset splits share ids: " + join_stems(collisions));
  return ds;
}

int write_split(const std::string& root, const DatasetSplit& split, const ClassPalette& palette) {
  const fs::path images_dir = fs::path(root) / split.name / "images";
  const fs::path labels_dir = fs::path(root) / split.name / "labels";
  std::error_code ec;
  fs::create_directories(images_dir, ec);
  if (ec) throw IoError("cannot create " + images_dir.string() + ": " + ec.message());
  fs::create_directories(labels_dir, ec);
  if (ec) throw IoError("cannot create " + labels_dir.string() + ": " + ec.message());

  for (const SamplePair& p : split.samples) {
    write_png(p.context, images_dir / (p.id + ".png"));
    write_png(render_labels(p.target, palette), labels_dir / (p.id + ".png"));
  }
  return static_cast<int>(split.samples.size());
}

void write_dataset(const std::string& root, const Dataset& ds, const ClassPalette& palette) {
  write_split(root, ds.train, palette);
  write_split(root, ds.val, palette);
  write_split(root, ds.test, palette);
}

}  // namespace lanegen
