#include "boxlevelset/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "boxlevelset/image_io.hpp"
#include "boxlevelset/pipeline.hpp"

namespace boxlevelset {
namespace {

// The engine's output sequence is fixed by the standard; the std::
// distributions are not, so the mapping to doubles is done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(uniform() * (hi - lo + 1));
  }
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return mag * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct Shape {
  ShapeKind kind;
  double cx, cy;
  double half_a, half_b;  // radius for disks
  double angle;

  bool contains(double x, double y) const {
    const double dx = x - cx;
    const double dy = y - cy;
    switch (kind) {
      case ShapeKind::kDisk:
        return dx * dx + dy * dy <= half_a * half_a;
      case ShapeKind::kRectangle:
        return std::abs(dx) <= half_a && std::abs(dy) <= half_b;
      case ShapeKind::kRotatedRectangle: {
        const double ca = std::cos(angle), sa = std::sin(angle);
        const double lx = ca * dx + sa * dy;
        const double ly = -sa * dx + ca * dy;
        return std::abs(lx) <= half_a && std::abs(ly) <= half_b;
      }
    }
    return false;
  }

  // Half extents of the axis-aligned bounding rectangle.
  std::pair<double, double> extent() const {
    if (kind == ShapeKind::kDisk) return {half_a, half_a};
    if (kind == ShapeKind::kRectangle) return {half_a, half_b};
    const double ca = std::abs(std::cos(angle)), sa = std::abs(std::sin(angle));
    return {ca * half_a + sa * half_b, sa * half_a + ca * half_b};
  }
};

BinaryMask rasterize(const Shape& shape, int width, int height) {
  BinaryMask mask(height, width, 0);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      if (shape.contains(x + 0.5, y + 0.5)) mask(y, x) = 1;
  return mask;
}

bool boxes_overlap(const BoxAnnotation& a, const BoxAnnotation& b) {
  return a.x_min < b.x_max && b.x_min < a.x_max && a.y_min < b.y_max && b.y_min < a.y_max;
}

BoxAnnotation scaled(const BoxAnnotation& b, double factor) {
  const double cx = 0.5 * (b.x_min + b.x_max), cy = 0.5 * (b.y_min + b.y_max);
  const double hw = 0.5 * b.width() * factor, hh = 0.5 * b.height() * factor;
  return {cx - hw, cy - hh, cx + hw, cy + hh, b.class_id};
}

}  // namespace

void SynthSpec::validate() const {
  if (width < 1 || height < 1) throw ValidationError("synth: image size must be positive");
  if (shapes.empty()) throw ValidationError("synth: no shape kinds enabled");
  if (!(size_min > 0 && size_min <= size_max)) throw ValidationError("synth: bad size range");
  if (!(contrast_min > 0 && contrast_min <= contrast_max && contrast_max <= 1))
    throw ValidationError("synth: contrast range must lie in (0, 1]");
  if (!(background_min >= 0 && background_min <= background_max && background_max <= 1))
    throw ValidationError("synth: background range must lie in [0, 1]");
  if (!(noise >= 0)) throw ValidationError("synth: noise must be >= 0");
  if (!(looseness_min >= 1 && looseness_min <= looseness_max))
    throw ValidationError("synth: looseness range must start at >= 1");
  if (!(spacing >= 1)) throw ValidationError("synth: spacing must be >= 1");
  if (objects_min < 1 || objects_min > objects_max)
    throw ValidationError("synth: bad object count range");
  // A rotated rectangle at 45 degrees has the widest footprint.
  const double footprint = 2.0 * size_max * std::numbers::sqrt2 * looseness_max + 4.0;
  if (footprint > std::min(width, height))
    throw ValidationError("synth: shapes of size " + std::to_string(size_max) +
                          " do not fit in a " + std::to_string(width) + "x" +
                          std::to_string(height) + " image");
}

SyntheticDataset generate_synthetic(std::uint64_t seed, int count, const SynthSpec& spec) {
  spec.validate();
  if (count < 0) throw ValidationError("synth: count must be >= 0");
  Rng rng(seed);
  SyntheticDataset dataset;

  for (int index = 0; index < count; ++index) {
    SyntheticImage out;
    char name[32];
    std::snprintf(name, sizeof name, "synth_%04d.png", index);
    out.name = name;

    const double background = rng.uniform(spec.background_min, spec.background_max);
    const int wanted = rng.integer(spec.objects_min, spec.objects_max);
    std::vector<double> fill(static_cast<std::size_t>(spec.width) * spec.height, background);

    for (int attempt = 0;
         static_cast<int>(out.boxes.size()) < wanted && attempt < spec.placement_attempts;
         ++attempt) {
      Shape shape{};
      shape.kind = spec.shapes[rng.integer(0, static_cast<int>(spec.shapes.size()) - 1)];
      shape.half_a = rng.uniform(spec.size_min, spec.size_max);
      shape.half_b = shape.kind == ShapeKind::kDisk ? shape.half_a
                                                    : shape.half_a * rng.uniform(0.6, 1.0);
      shape.angle = shape.kind == ShapeKind::kRotatedRectangle
                        ? rng.uniform(15.0, 75.0) * std::numbers::pi / 180.0
                        : 0.0;
      const double looseness = rng.uniform(spec.looseness_min, spec.looseness_max);
      const double contrast = rng.uniform(spec.contrast_min, spec.contrast_max);
      const bool brighter_ok = background + contrast <= 1.0;
      const bool darker_ok = background - contrast >= 0.0;
      const bool brighter = brighter_ok && (!darker_ok || rng.uniform() < 0.5);
      const double intensity = brighter ? background + contrast : background - contrast;

      const auto [ex, ey] = shape.extent();
      const double hx = ex * looseness + 2.0;
      const double hy = ey * looseness + 2.0;
      shape.cx = rng.uniform(hx, spec.width - hx);
      shape.cy = rng.uniform(hy, spec.height - hy);

      BinaryMask mask = rasterize(shape, spec.width, spec.height);
      int x0 = spec.width, y0 = spec.height, x1 = 0, y1 = 0;
      for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x)
          if (mask(y, x)) {
            x0 = std::min(x0, x);
            y0 = std::min(y0, y);
            x1 = std::max(x1, x + 1);
            y1 = std::max(y1, y + 1);
          }
      if (x1 <= x0 || y1 <= y0) continue;

      const double bcx = 0.5 * (x0 + x1), bcy = 0.5 * (y0 + y1);
      const double bhw = 0.5 * (x1 - x0) * looseness, bhh = 0.5 * (y1 - y0) * looseness;
      BoxAnnotation box{std::max(0.0, std::floor(bcx - bhw)), std::max(0.0, std::floor(bcy - bhh)),
                        std::min<double>(spec.width, std::ceil(bcx + bhw)),
                        std::min<double>(spec.height, std::ceil(bcy + bhh)),
                        static_cast<int>(shape.kind)};
      if (std::any_of(out.boxes.begin(), out.boxes.end(),
                      [&](const BoxAnnotation& other) {
                        return boxes_overlap(scaled(box, spec.spacing), other) ||
                               boxes_overlap(box, scaled(other, spec.spacing));
                      }))
        continue;

      for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask.values()[i]) fill[i] = intensity;
      out.boxes.push_back(box);
      out.masks.push_back(std::move(mask));
    }
    if (out.boxes.empty())
      throw ValidationError("synth: could not place any object in image " + out.name);

    std::vector<double> pixels(fill.size());
    for (std::size_t i = 0; i < fill.size(); ++i) {
      const double v = std::clamp(fill[i] + spec.noise * rng.normal(), 0.0, 1.0);
      pixels[i] = std::round(v * 255.0);
    }
    out.image = RawImage(spec.width, spec.height, 1, std::move(pixels));
    dataset.images.push_back(std::move(out));
  }
  return dataset;
}

void write_synthetic(const SyntheticDataset& dataset, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  std::vector<DatasetRecord> records;
  std::vector<ImageResult> truth;
  for (const auto& img : dataset.images) {
    write_image_png(dir / img.name, img.image);
    records.push_back({img.name, img.boxes, {}, {}});
    ImageResult gt;
    gt.image = img.name;
    gt.width = img.image.width();
    gt.height = img.image.height();
    for (std::size_t i = 0; i < img.boxes.size(); ++i) {
      InstanceMask inst;
      inst.image = img.name;
      inst.instance_id = static_cast<int>(i);
      inst.class_id = img.boxes[i].class_id;
      inst.box = img.boxes[i];
      inst.region = EnlargedRegion{0, 0, gt.width, gt.height, 1.0};
      inst.mask = img.masks[i];
      gt.instances.push_back(std::move(inst));
    }
    truth.push_back(std::move(gt));
  }
  save_annotations(records, dir / "annotations.json");
  save_results(truth, nullptr, dir / "ground_truth.json");
}

}  // namespace boxlevelset
