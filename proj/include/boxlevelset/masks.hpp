#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "boxlevelset/grid.hpp"

namespace boxlevelset {

/// Uncompressed run-length encoding: alternating background / foreground run
/// lengths over the column-major pixel order, starting with a (possibly
/// empty) background run.
struct RleMask {
  int height = 0;
  int width = 0;
  std::vector<std::int64_t> counts;

  friend bool operator==(const RleMask&, const RleMask&) = default;
};

RleMask rle_encode(const BinaryMask& mask);
/// Throws ValidationError when the counts do not cover height * width exactly.
BinaryMask rle_decode(const RleMask& rle);

/// Intersection over union; two empty masks score 1.
double mask_iou(const BinaryMask& a, const BinaryMask& b);

/// Places a region-local mask into a zeroed full-image grid.
BinaryMask paste_region(const BinaryMask& local, const EnlargedRegion& region, int width,
                        int height);

struct InstanceScore {
  std::string image;
  int instance_id = 0;
  double iou = 0;
  double runtime_ms = 0;
};

struct RecordFailure {
  std::string image;
  std::string message;
};

/// One prediction per ground-truth instance, so AP at a threshold reduces to
/// the fraction of instances whose IoU reaches it.
struct MetricsReport {
  std::vector<InstanceScore> instances;
  double mean_iou = 0;
  double ap50 = 0;
  double ap75 = 0;
  std::vector<RecordFailure> failures;
};

/// Scores preds[i] against ground_truth[i]. Throws std::invalid_argument on a
/// count or shape mismatch.
MetricsReport evaluate_masks(std::span<const BinaryMask> preds,
                             std::span<const BinaryMask> ground_truth);

/// Recomputes mean IoU and AP from `report.instances`.
void summarize(MetricsReport& report);

}  // namespace boxlevelset
