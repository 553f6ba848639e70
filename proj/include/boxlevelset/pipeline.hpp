#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "boxlevelset/energy.hpp"
#include "boxlevelset/evolve.hpp"
#include "boxlevelset/grid.hpp"
#include "boxlevelset/masks.hpp"

namespace boxlevelset {

/// One annotated image. `image` is a path relative to the image root; when
/// `pixels` is set it is used instead of reading the file.
struct DatasetRecord {
  std::string image;
  std::vector<BoxAnnotation> boxes;
  /// Full-image ground-truth mask per box (synthetic data only).
  std::optional<std::vector<BinaryMask>> ground_truth;
  std::optional<RawImage> pixels;
};

/// Segmentation of one box. `mask` and `probability` cover `region` only.
struct InstanceMask {
  std::string image;
  int instance_id = 0;
  int class_id = 0;
  BoxAnnotation box;
  EnlargedRegion region;
  BinaryMask mask;
  Grid<double> probability;
  double runtime_ms = 0;
  int iterations = 0;
  bool converged = false;

  BinaryMask full_mask(int width, int height) const { return paste_region(mask, region, width, height); }
};

struct ImageResult {
  std::string image;
  int width = 0;
  int height = 0;
  std::vector<InstanceMask> instances;
  /// 0 = background, instance_id + 1 otherwise.
  Grid<int> labels;
};

struct DatasetResult {
  std::vector<ImageResult> images;
  /// Scores are filled when every record carries ground truth.
  MetricsReport report;
};

struct PipelineOptions {
  double enlarge_factor = 2.0;
  /// Worker threads; values < 1 mean one.
  int jobs = 1;
  std::filesystem::path image_root;
  /// Called per instance with (image, instance_id, iteration, phi).
  std::function<void(const std::string&, int, int, const LevelSetField&)> snapshot;
};

/// Parses the annotation JSON (an array of {"image", "boxes": [[x0,y0,x1,y1,cls], ...]}).
/// Throws ValidationError naming the offending record, IoError if unreadable.
std::vector<DatasetRecord> load_annotations(const std::filesystem::path& path);
std::vector<DatasetRecord> parse_annotations(const std::string& text);
void save_annotations(std::span<const DatasetRecord> records, const std::filesystem::path& path);

/// Evolves every box over its enlarged region, resolves overlaps per image and
/// scores against ground truth when present. Failures are recorded per record
/// and the run continues. Output order follows input order for any `jobs`.
DatasetResult run_dataset(std::span<const DatasetRecord> records, const EnergyParams& params,
                          const EvolveConfig& cfg, const PipelineOptions& options);

/// Full-image label map. A pixel claimed by several instances goes to the one
/// with the highest foreground probability; ties go to the lower instance_id.
Grid<int> composite_masks(std::span<const InstanceMask> masks, int width, int height);

enum class ExportFormat { kPng, kRleJson };

/// kPng: `<dir>/<image stem>/<instance_id>.png` full-image masks.
/// kRleJson: `<dir>/results.json` with RLE masks plus `report`.
void export_masks(const DatasetResult& result, ExportFormat format,
                  const std::filesystem::path& dir);

/// Writes the results JSON (instances with RLE masks; metrics when given).
void save_results(std::span<const ImageResult> images, const MetricsReport* report,
                  const std::filesystem::path& path);

/// Reads a results / ground-truth JSON back. Instance masks come back as
/// full-image masks with a full-image region.
std::vector<ImageResult> load_results(const std::filesystem::path& path);

/// Matches instances by (image, instance_id). Throws std::invalid_argument
/// when the two sides do not contain the same instances.
MetricsReport evaluate_results(std::span<const ImageResult> preds,
                               std::span<const ImageResult> ground_truth);

/// Serialization of a report as emitted by the CLI.
std::string report_to_json(const MetricsReport& report, int indent = 2);

}  // namespace boxlevelset
