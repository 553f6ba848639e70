#include <doctest.h>

#include "boxlevelset/grid.hpp"
#include "support.hpp"

using namespace boxlevelset;

TEST_CASE("enlarge_box scales about the center") {
  const EnlargedRegion r = enlarge_box({10, 10, 20, 20, 0}, 2.0, 100, 100);
  CHECK(r.x_min == 5);
  CHECK(r.y_min == 5);
  CHECK(r.x_max == 25);
  CHECK(r.y_max == 25);
  CHECK(r.factor == 2.0);
}

TEST_CASE("enlarge_box clips at the image border") {
  const EnlargedRegion r = enlarge_box({0, 0, 10, 10, 0}, 2.0, 100, 100);
  CHECK(r.x_min == 0);
  CHECK(r.y_min == 0);
  CHECK(r.x_max == 15);
  CHECK(r.y_max == 15);
}

TEST_CASE("enlarge_box rounds outward") {
  const EnlargedRegion r = enlarge_box({10.5, 10, 13, 12, 0}, 1.0, 100, 100);
  CHECK(r.x_min == 10);
  CHECK(r.x_max == 13);
  const EnlargedRegion s = enlarge_box({10, 10, 13, 13, 0}, 1.5, 100, 100);
  CHECK(s.x_min == 9);  // 11.5 -/+ 2.25
  CHECK(s.x_max == 14);
}

TEST_CASE("enlarge_box rejects bad input") {
  CHECK_THROWS_AS(enlarge_box({5, 5, 5, 9, 0}, 2.0, 50, 50), ValidationError);
  CHECK_THROWS_AS(enlarge_box({60, 60, 70, 70, 0}, 2.0, 50, 50), ValidationError);
  CHECK_THROWS_AS(enlarge_box({5, 5, 9, 9, 0}, 0.5, 50, 50), std::invalid_argument);
}

TEST_CASE("normalize_image maps each channel onto [0, 1]") {
  RawImage raw(2, 1, 3, std::vector<double>{10, 30, 5, 5, 0, 200});
  const NormalizedImage n = normalize_image(raw);
  CHECK(n(0, 0, 0) == 0.0);
  CHECK(n(0, 0, 1) == 1.0);
  CHECK(n(1, 0, 0) == 0.0);  // constant channel
  CHECK(n(1, 0, 1) == 0.0);
  CHECK(n(2, 0, 1) == 1.0);
}

TEST_CASE("normalize_image is idempotent") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const NormalizedImage once = testing::random_image(rng, 7, 5, 3);
    const NormalizedImage twice = normalize_image(normalize_image(once.raw()).raw());
    const NormalizedImage first = normalize_image(once.raw());
    for (std::size_t i = 0; i < first.raw().data().size(); ++i)
      CHECK(std::abs(first.raw().data()[i] - twice.raw().data()[i]) < 1e-12);
  }
}

TEST_CASE("NormalizedImage refuses values outside [0, 1]") {
  CHECK_THROWS_AS(NormalizedImage::from_unit_values(RawImage(1, 1, 1, std::vector<double>{1.5})),
                  std::invalid_argument);
}

TEST_CASE("RawImage validates its shape") {
  CHECK_THROWS(RawImage(2, 2, 2, std::vector<double>(8, 0.0)));
  CHECK_THROWS(RawImage(2, 2, 1, std::vector<double>(3, 0.0)));
}

TEST_CASE("crop_region copies the covered pixels") {
  std::vector<double> v(20);
  for (int i = 0; i < 20; ++i) v[i] = i / 19.0;
  const NormalizedImage img = testing::unit_image(5, 4, 1, v);
  const NormalizedImage c = crop_region(img, {1, 2, 4, 4, 1.0});
  REQUIRE(c.width() == 3);
  REQUIRE(c.height() == 2);
  CHECK(c(0, 0, 0) == img(0, 2, 1));
  CHECK(c(0, 1, 2) == img(0, 3, 3));
}

TEST_CASE("box_indicator is half-open") {
  const BinaryMask m = box_indicator({2, 1, 4, 3, 0}, {0, 0, 6, 5, 1.0});
  int count = 0;
  for (auto v : m.values()) count += v;
  CHECK(count == 4);
  CHECK(m(1, 2) == 1);
  CHECK(m(2, 3) == 1);
  CHECK(m(3, 3) == 0);
  CHECK(m(1, 4) == 0);
}
