#include "boxlevelset/snapshot.hpp"

#include <cmath>
#include <cstdio>
#include <vector>

#include "boxlevelset/image_io.hpp"

namespace boxlevelset {

void write_snapshot_png(const std::filesystem::path& path, const LevelSetField& phi,
                        const EnergyParams& params) {
  const int h = phi.rows();
  const int w = phi.cols();
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * 3);
  auto on_contour = [&](int r, int c) {
    if (phi(r, c) <= 0) return false;
    return (r > 0 && phi(r - 1, c) <= 0) || (r + 1 < h && phi(r + 1, c) <= 0) ||
           (c > 0 && phi(r, c - 1) <= 0) || (c + 1 < w && phi(r, c + 1) <= 0);
  };
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      std::uint8_t* p = &px[(static_cast<std::size_t>(r) * w + c) * 3];
      if (on_contour(r, c)) {
        p[0] = 255;
        p[1] = 0;
        p[2] = 0;
        continue;
      }
      const auto g = static_cast<std::uint8_t>(
          std::lround(255.0 * sigmoid(params.sigmoid_slope * phi(r, c))));
      p[0] = p[1] = p[2] = g;
    }
  }
  write_png(path, w, h, 3, px);
}

std::string snapshot_name(const std::string& instance, int iteration) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%05d", iteration);
  return instance + "_" + buf + ".png";
}

}  // namespace boxlevelset
