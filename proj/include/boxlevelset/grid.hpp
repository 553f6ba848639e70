#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace boxlevelset {

struct EnlargedRegion;

/// Input that fails a documented validity rule (bad box, bad config value).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem or codec failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major 2-D array.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(checked_size(rows, cols), fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int r, int c) { return data_[index(r, c)]; }
  const T& operator()(int r, int c) const { return data_[index(r, c)]; }

  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  bool same_shape(const Grid& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return rows_ == other.rows() && cols_ == other.cols();
  }

  friend bool operator==(const Grid& a, const Grid& b) = default;

 private:
  static std::size_t checked_size(int rows, int cols) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Grid: negative dimension");
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  }
  std::size_t index(int r, int c) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(c);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

/// Scalar level-set function over a region grid. Positive inside the contour.
using LevelSetField = Grid<double>;
/// Per-pixel {0,1} mask.
using BinaryMask = Grid<std::uint8_t>;

/// Multi-channel image, planar layout: value(c, y, x).
class RawImage {
 public:
  RawImage() = default;
  RawImage(int width, int height, int channels, std::vector<double> data);
  RawImage(int width, int height, int channels, double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }

  double operator()(int c, int y, int x) const { return data_[offset(c, y, x)]; }
  double& operator()(int c, int y, int x) { return data_[offset(c, y, x)]; }

  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const RawImage&, const RawImage&) = default;

 private:
  std::size_t offset(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

/// Image whose every value lies in [0, 1]. Only obtainable through
/// normalize_image, crop_region, or the checked factory below.
class NormalizedImage {
 public:
  NormalizedImage() = default;

  /// Throws std::invalid_argument if any value is outside [0, 1].
  static NormalizedImage from_unit_values(RawImage img);

  int width() const { return img_.width(); }
  int height() const { return img_.height(); }
  int channels() const { return img_.channels(); }
  double operator()(int c, int y, int x) const { return img_(c, y, x); }
  const RawImage& raw() const { return img_; }

  friend bool operator==(const NormalizedImage&, const NormalizedImage&) = default;

 private:
  explicit NormalizedImage(RawImage img) : img_(std::move(img)) {}
  RawImage img_;

  friend NormalizedImage normalize_image(const RawImage& raw);
  friend NormalizedImage crop_region(const NormalizedImage& img, const EnlargedRegion& region);
};

/// Annotated box in pixel coordinates, half-open: [x_min, x_max) x [y_min, y_max).
struct BoxAnnotation {
  double x_min = 0;
  double y_min = 0;
  double x_max = 0;
  double y_max = 0;
  int class_id = 0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  bool degenerate() const { return !(x_min < x_max) || !(y_min < y_max); }
  bool intersects(int image_width, int image_height) const;

  friend bool operator==(const BoxAnnotation&, const BoxAnnotation&) = default;
};

/// Integer pixel region [x_min, x_max) x [y_min, y_max), clipped to the image.
struct EnlargedRegion {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;
  double factor = 1.0;

  int width() const { return x_max - x_min; }
  int height() const { return y_max - y_min; }

  friend bool operator==(const EnlargedRegion&, const EnlargedRegion&) = default;
};

/// Global per-channel min-max map onto [0, 1]; constant channels become 0.
NormalizedImage normalize_image(const RawImage& raw);

/// Scales the box about its center, rounds outward, clips to the image.
/// Throws ValidationError if the box is degenerate or misses the image, and
/// std::invalid_argument if factor < 1.
EnlargedRegion enlarge_box(const BoxAnnotation& box, double factor, int image_width,
                           int image_height);

/// Copies the sub-grid covered by `region`.
NormalizedImage crop_region(const NormalizedImage& img, const EnlargedRegion& region);

/// Indicator of box pixels in region-local coordinates. Pixel (x, y) belongs
/// to the box when x_min <= x < x_max and y_min <= y < y_max.
BinaryMask box_indicator(const BoxAnnotation& box, const EnlargedRegion& region);

}  // namespace boxlevelset
