#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "boxlevelset/image_io.hpp"
#include "boxlevelset/snapshot.hpp"
#include "support.hpp"

using namespace boxlevelset;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "boxlevelset_test_io";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("gray and RGB PNG round trip") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int channels : {1, 3}) {
    std::vector<double> data(7 * 5 * channels);
    for (auto& v : data) v = byte(rng);
    const RawImage img(7, 5, channels, data);
    const fs::path path = scratch() / ("img" + std::to_string(channels) + ".png");
    write_image_png(path, img);
    CHECK(read_image(path) == img);
  }
}

TEST_CASE("mask PNG round trip") {
  BinaryMask m(4, 6, 0);
  m(1, 2) = m(3, 5) = m(0, 0) = 1;
  const fs::path path = scratch() / "mask.png";
  write_mask_png(path, m);
  CHECK(read_mask_png(path) == m);
}

TEST_CASE("unreadable images raise IoError") {
  CHECK_THROWS_AS(read_image(scratch() / "missing.png"), IoError);
  const fs::path junk = scratch() / "junk.png";
  std::ofstream(junk) << "not an image";
  CHECK_THROWS_AS(read_image(junk), IoError);
}

TEST_CASE("snapshot frames") {
  CHECK(snapshot_name("synth_0001_2", 40) == "synth_0001_2_00040.png");
  CHECK(snapshot_name("x", 0) == "x_00000.png");
  LevelSetField phi(6, 8, -1.0);
  for (int r = 2; r < 4; ++r)
    for (int c = 2; c < 6; ++c) phi(r, c) = 2.0;
  const fs::path path = scratch() / "frame.png";
  write_snapshot_png(path, phi, EnergyParams{});
  const RawImage frame = read_image(path);
  CHECK(frame.channels() == 3);
  CHECK(frame.width() == 8);
  CHECK(frame.height() == 6);
  // Contour pixels are red, far background is a plain gray.
  CHECK(frame(0, 2, 2) > frame(1, 2, 2));
  CHECK(frame(0, 0, 0) == frame(1, 0, 0));
}
