#pragma once

#include <random>
#include <vector>

#include "boxlevelset/grid.hpp"

namespace testing {

using namespace boxlevelset;

inline NormalizedImage unit_image(int width, int height, int channels, std::vector<double> values) {
  return NormalizedImage::from_unit_values(RawImage(width, height, channels, std::move(values)));
}

inline NormalizedImage random_image(std::mt19937_64& rng, int width, int height, int channels = 1) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(width) * height * channels);
  for (auto& x : v) x = u(rng);
  return unit_image(width, height, channels, std::move(v));
}

inline Grid<double> random_grid(std::mt19937_64& rng, int rows, int cols, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Grid<double> g(rows, cols);
  for (auto& x : g.values()) x = u(rng);
  return g;
}

inline double rel_err(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

}  // namespace testing
