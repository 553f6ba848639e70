#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "boxlevelset/grid.hpp"

namespace boxlevelset {

enum class ShapeKind { kDisk = 0, kRectangle = 1, kRotatedRectangle = 2 };

/// Generator settings. Sizes are disk radii / rectangle half-extents in pixels.
struct SynthSpec {
  int width = 256;
  int height = 256;
  std::vector<ShapeKind> shapes{ShapeKind::kDisk, ShapeKind::kRectangle,
                                ShapeKind::kRotatedRectangle};
  double size_min = 28.0;
  double size_max = 38.0;
  double contrast_min = 0.3;
  double contrast_max = 0.6;
  double background_min = 0.3;
  double background_max = 0.7;
  /// Standard deviation of additive Gaussian noise on the [0, 1] scale.
  double noise = 0.02;
  /// Box side over the tight bounding-box side; 1 gives tight boxes.
  double looseness_min = 1.0;
  double looseness_max = 1.0;
  /// A box scaled by this factor about its center may not overlap any other
  /// box. 1 only forbids overlapping boxes.
  double spacing = 1.3;
  int objects_min = 2;
  int objects_max = 3;
  int placement_attempts = 200;

  /// Throws ValidationError for an impossible spec (e.g. a shape that cannot
  /// fit in the image).
  void validate() const;
};

struct SyntheticImage {
  std::string name;
  /// One channel, integer values in [0, 255].
  RawImage image;
  std::vector<BoxAnnotation> boxes;
  /// Full-image ground-truth mask per box.
  std::vector<BinaryMask> masks;
};

struct SyntheticDataset {
  std::vector<SyntheticImage> images;
};

/// Deterministic for a given (seed, count, spec) on every platform.
SyntheticDataset generate_synthetic(std::uint64_t seed, int count, const SynthSpec& spec = {});

/// Writes `<name>.png` per image, `annotations.json` (boxes) and
/// `ground_truth.json` (RLE masks) into `dir`.
void write_synthetic(const SyntheticDataset& dataset, const std::filesystem::path& dir);

}  // namespace boxlevelset
