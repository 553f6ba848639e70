#include "boxlevelset/masks.hpp"

#include <stdexcept>

namespace boxlevelset {

RleMask rle_encode(const BinaryMask& mask) {
  RleMask rle{mask.rows(), mask.cols(), {}};
  std::uint8_t current = 0;
  std::int64_t run = 0;
  for (int c = 0; c < mask.cols(); ++c) {
    for (int r = 0; r < mask.rows(); ++r) {
      const std::uint8_t v = mask(r, c) ? 1 : 0;
      if (v != current) {
        rle.counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  rle.counts.push_back(run);
  return rle;
}

BinaryMask rle_decode(const RleMask& rle) {
  if (rle.height < 0 || rle.width < 0) throw ValidationError("RLE: negative size");
  BinaryMask mask(rle.height, rle.width, 0);
  const std::int64_t total = static_cast<std::int64_t>(rle.height) * rle.width;
  std::int64_t pos = 0;
  std::uint8_t value = 0;
  for (std::int64_t run : rle.counts) {
    if (run < 0 || pos + run > total) throw ValidationError("RLE: counts exceed mask size");
    for (std::int64_t i = 0; i < run; ++i, ++pos) {
      if (value) mask(static_cast<int>(pos % rle.height), static_cast<int>(pos / rle.height)) = 1;
    }
    value ^= 1;
  }
  if (pos != total) throw ValidationError("RLE: counts do not cover the mask");
  return mask;
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("mask_iou: shape mismatch");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool pa = a.values()[i] != 0;
    const bool pb = b.values()[i] != 0;
    inter += pa && pb;
    uni += pa || pb;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

BinaryMask paste_region(const BinaryMask& local, const EnlargedRegion& region, int width,
                        int height) {
  if (local.rows() != region.height() || local.cols() != region.width())
    throw std::invalid_argument("paste_region: mask does not match region");
  BinaryMask full(height, width, 0);
  for (int r = 0; r < local.rows(); ++r)
    for (int c = 0; c < local.cols(); ++c) {
      const int y = region.y_min + r;
      const int x = region.x_min + c;
      if (y >= 0 && y < height && x >= 0 && x < width) full(y, x) = local(r, c);
    }
  return full;
}

void summarize(MetricsReport& report) {
  const std::size_t n = report.instances.size();
  report.mean_iou = report.ap50 = report.ap75 = 0.0;
  if (n == 0) return;
  double sum = 0.0;
  std::size_t hit50 = 0, hit75 = 0;
  for (const auto& s : report.instances) {
    sum += s.iou;
    hit50 += s.iou >= 0.5;
    hit75 += s.iou >= 0.75;
  }
  report.mean_iou = sum / static_cast<double>(n);
  report.ap50 = static_cast<double>(hit50) / static_cast<double>(n);
  report.ap75 = static_cast<double>(hit75) / static_cast<double>(n);
}

MetricsReport evaluate_masks(std::span<const BinaryMask> preds,
                             std::span<const BinaryMask> ground_truth) {
  if (preds.size() != ground_truth.size())
    throw std::invalid_argument("evaluate_masks: prediction and ground-truth counts differ");
  MetricsReport report;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    InstanceScore s;
    s.instance_id = static_cast<int>(i);
    s.iou = mask_iou(preds[i], ground_truth[i]);
    report.instances.push_back(s);
  }
  summarize(report);
  return report;
}

}  // namespace boxlevelset
