#include "boxlevelset/grid.hpp"

#include <algorithm>
#include <cmath>

namespace boxlevelset {

RawImage::RawImage(int width, int height, int channels, std::vector<double> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  if (width < 1 || height < 1) throw std::invalid_argument("RawImage: empty image");
  if (channels != 1 && channels != 3)
    throw std::invalid_argument("RawImage: channel count must be 1 or 3");
  if (data_.size() != static_cast<std::size_t>(width) * height * channels)
    throw std::invalid_argument("RawImage: data length does not match shape");
}

RawImage::RawImage(int width, int height, int channels, double fill)
    : RawImage(width, height, channels,
               std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                       std::max(height, 0) * std::max(channels, 0),
                                   fill)) {}

NormalizedImage NormalizedImage::from_unit_values(RawImage img) {
  for (double v : img.data()) {
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("NormalizedImage: value outside [0, 1]");
  }
  return NormalizedImage(std::move(img));
}

bool BoxAnnotation::intersects(int image_width, int image_height) const {
  return !degenerate() && x_max > 0 && y_max > 0 && x_min < image_width &&
         y_min < image_height;
}

NormalizedImage normalize_image(const RawImage& raw) {
  const std::size_t plane = static_cast<std::size_t>(raw.width()) * raw.height();
  std::vector<double> out(raw.data().size(), 0.0);
  for (int c = 0; c < raw.channels(); ++c) {
    auto first = raw.data().begin() + static_cast<std::ptrdiff_t>(c * plane);
    auto last = first + static_cast<std::ptrdiff_t>(plane);
    auto [lo_it, hi_it] = std::minmax_element(first, last);
    const double lo = *lo_it;
    const double span = *hi_it - lo;
    if (!(span > 0.0)) continue;  // constant channel stays zero
    double* dst = out.data() + c * plane;
    for (auto it = first; it != last; ++it, ++dst) {
      *dst = std::clamp((*it - lo) / span, 0.0, 1.0);
    }
  }
  return NormalizedImage(RawImage(raw.width(), raw.height(), raw.channels(), std::move(out)));
}

EnlargedRegion enlarge_box(const BoxAnnotation& box, double factor, int image_width,
                           int image_height) {
  if (!(factor >= 1.0)) throw std::invalid_argument("enlarge_box: factor must be >= 1");
  if (box.degenerate()) throw ValidationError("enlarge_box: degenerate box");
  if (!box.intersects(image_width, image_height))
    throw ValidationError("enlarge_box: box lies outside the image");

  const double cx = 0.5 * (box.x_min + box.x_max);
  const double cy = 0.5 * (box.y_min + box.y_max);
  const double half_w = 0.5 * factor * box.width();
  const double half_h = 0.5 * factor * box.height();

  EnlargedRegion region;
  region.factor = factor;
  region.x_min = std::max(0, static_cast<int>(std::floor(cx - half_w)));
  region.y_min = std::max(0, static_cast<int>(std::floor(cy - half_h)));
  region.x_max = std::min(image_width, static_cast<int>(std::ceil(cx + half_w)));
  region.y_max = std::min(image_height, static_cast<int>(std::ceil(cy + half_h)));
  return region;
}

NormalizedImage crop_region(const NormalizedImage& img, const EnlargedRegion& region) {
  if (region.x_min < 0 || region.y_min < 0 || region.x_max > img.width() ||
      region.y_max > img.height() || region.width() < 1 || region.height() < 1)
    throw std::invalid_argument("crop_region: region outside image");
  const int w = region.width();
  const int h = region.height();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(w) * h * img.channels());
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out.push_back(img(c, region.y_min + y, region.x_min + x));
  return NormalizedImage(RawImage(w, h, img.channels(), std::move(out)));
}

BinaryMask box_indicator(const BoxAnnotation& box, const EnlargedRegion& region) {
  BinaryMask mask(region.height(), region.width(), 0);
  for (int r = 0; r < mask.rows(); ++r) {
    const double y = region.y_min + r;
    if (y < box.y_min || y >= box.y_max) continue;
    for (int c = 0; c < mask.cols(); ++c) {
      const double x = region.x_min + c;
      if (x >= box.x_min && x < box.x_max) mask(r, c) = 1;
    }
  }
  return mask;
}

}  // namespace boxlevelset
