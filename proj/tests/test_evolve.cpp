#include <doctest.h>

#include "boxlevelset/evolve.hpp"
#include "boxlevelset/masks.hpp"
#include "support.hpp"

using namespace boxlevelset;

namespace {

// Disk of the given intensity on a background, noise-free.
NormalizedImage disk_image(int w, int h, double cx, double cy, double radius, double fg, double bg) {
  std::vector<double> v(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
      v[y * w + x] = dx * dx + dy * dy <= radius * radius ? fg : bg;
    }
  return testing::unit_image(w, h, 1, std::move(v));
}

BinaryMask crop_mask(const NormalizedImage& img, const EnlargedRegion& region, double fg) {
  BinaryMask m(region.height(), region.width(), 0);
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) m(r, c) = img(0, region.y_min + r, region.x_min + c) == fg;
  return m;
}

struct Run {
  EnlargedRegion region;
  EvolveResult result;
};

Run evolve(const NormalizedImage& img, const BoxAnnotation& box, const EnergyParams& p,
           const EvolveConfig& cfg = {}) {
  const EnlargedRegion region = enlarge_box(box, 2.0, img.width(), img.height());
  return {region, evolve_instance(crop_region(img, region), box, region, p, cfg)};
}

}  // namespace

TEST_CASE("initial level set is the clamped signed distance to the box") {
  const BoxAnnotation box{10, 10, 20, 20, 0};
  const EnlargedRegion region{0, 0, 30, 30, 1.0};
  const LevelSetField phi = initialize_phi(region, box);
  CHECK(phi(15, 15) == 5.0);
  CHECK(phi(12, 10) == 0.0);
  CHECK(phi(15, 7) == -3.0);
  CHECK(phi(13, 14) == 3.0);
  CHECK(phi(0, 0) == -5.0);
}

TEST_CASE("threshold_mask uses a strict inequality") {
  EnergyParams p;
  const BinaryMask zero = threshold_mask(LevelSetField(3, 4, 0.0), p);
  for (auto v : zero.values()) CHECK(v == 0);
  const BinaryMask one = threshold_mask(LevelSetField(3, 4, 1.0), p);
  for (auto v : one.values()) CHECK(v == 1);
  LevelSetField mixed(1, 3);
  mixed.values() = {-0.5, 1e-9, 2};
  CHECK(threshold_mask(mixed, p).values() == std::vector<std::uint8_t>{0, 1, 1});
}

TEST_CASE("zero iterations return the thresholded initialization") {
  const NormalizedImage img = disk_image(40, 40, 20, 20, 6, 1.0, 0.0);
  const BoxAnnotation box{12, 12, 28, 28, 0};
  EvolveConfig cfg;
  cfg.max_iters = 0;
  const Run run = evolve(img, box, EnergyParams{}, cfg);
  CHECK(run.result.mask == threshold_mask(initialize_phi(run.region, box), EnergyParams{}));
  CHECK(run.result.iterations_used == 0);
  CHECK(run.result.energy_trace.size() == 1);
}

TEST_CASE("constant image gives back the box") {
  const NormalizedImage img = testing::unit_image(60, 60, 1, std::vector<double>(3600, 0.5));
  const BoxAnnotation box{18, 20, 40, 38, 0};
  const Run run = evolve(img, box, EnergyParams{});
  CHECK(mask_iou(run.result.mask, box_indicator(box, run.region)) >= 0.95);
}

TEST_CASE("bright disk on a dark background is recovered") {
  const NormalizedImage img = disk_image(80, 80, 40, 40, 12, 1.0, 0.0);
  const BoxAnnotation box{27, 27, 53, 53, 0};
  const Run run = evolve(img, box, EnergyParams{});
  CHECK(mask_iou(run.result.mask, crop_mask(img, run.region, 1.0)) >= 0.95);
}

TEST_CASE("constraints alone recover the box") {
  EnergyParams p;
  p.alpha1 = p.alpha2 = p.lambda = p.mu = 0;
  const NormalizedImage img = disk_image(80, 80, 40, 40, 12, 0.8, 0.2);
  for (const BoxAnnotation& box : {BoxAnnotation{30, 30, 40, 40, 0}, BoxAnnotation{25, 31, 55, 47, 0}}) {
    const Run run = evolve(img, box, p);
    CHECK(mask_iou(run.result.mask, box_indicator(box, run.region)) >= 0.95);
  }
}

TEST_CASE("accepted steps never raise the loss") {
  std::mt19937_64 rng(17);
  const NormalizedImage img = testing::random_image(rng, 40, 40);
  const BoxAnnotation box{12, 10, 27, 30, 0};
  EvolveConfig cfg;
  cfg.max_iters = 60;
  const Run run = evolve(img, box, EnergyParams{}, cfg);
  const auto& trace = run.result.energy_trace;
  CHECK(trace.size() == static_cast<std::size_t>(run.result.iterations_used) + 1);
  CHECK(run.result.iterations_used <= cfg.max_iters);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-9);
}

TEST_CASE("evolution is deterministic") {
  const NormalizedImage img = disk_image(50, 50, 22, 26, 8, 0.7, 0.3);
  const BoxAnnotation box{13, 17, 31, 35, 0};
  const Run a = evolve(img, box, EnergyParams{});
  const Run b = evolve(img, box, EnergyParams{});
  CHECK(a.result.phi == b.result.phi);
  CHECK(a.result.energy_trace == b.result.energy_trace);
}

TEST_CASE("translation equivariance") {
  const NormalizedImage a = disk_image(60, 60, 28, 30, 9, 0.75, 0.35);
  const NormalizedImage b = disk_image(70, 66, 28 + 7, 30 + 5, 9, 0.75, 0.35);
  const Run ra = evolve(a, {18, 20, 38, 40, 0}, EnergyParams{});
  const Run rb = evolve(b, {25, 25, 45, 45, 0}, EnergyParams{});
  CHECK(rb.region.x_min == ra.region.x_min + 7);
  CHECK(rb.region.y_min == ra.region.y_min + 5);
  CHECK(ra.result.mask == rb.result.mask);
}

TEST_CASE("snapshots follow the configured stride") {
  const NormalizedImage img = disk_image(40, 40, 20, 20, 7, 0.9, 0.1);
  const BoxAnnotation box{12, 12, 28, 28, 0};
  const EnlargedRegion region = enlarge_box(box, 2.0, 40, 40);
  EvolveConfig cfg;
  cfg.max_iters = 25;
  cfg.tol = 0;
  cfg.snapshot_every = 10;
  std::vector<int> seen;
  const EvolveResult r = evolve_instance(crop_region(img, region), box, region, EnergyParams{}, cfg,
                                         [&](int iter, const LevelSetField&) { seen.push_back(iter); });
  REQUIRE(!seen.empty());
  CHECK(seen.front() == 0);
  for (int it : seen) CHECK(it % 10 == 0);
  CHECK(seen.back() <= r.iterations_used);
}

TEST_CASE("evolve config validation") {
  EvolveConfig cfg;
  cfg.step_size = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = EvolveConfig{};
  cfg.backtrack_factor = 1;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = EvolveConfig{};
  cfg.tol = -1;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("evolve_instance rejects a crop of the wrong size") {
  const NormalizedImage img = disk_image(20, 20, 10, 10, 4, 1, 0);
  const BoxAnnotation box{5, 5, 15, 15, 0};
  CHECK_THROWS_AS(evolve_instance(img, box, {0, 0, 10, 10, 1.0}, EnergyParams{}, EvolveConfig{}),
                  std::invalid_argument);
}

TEST_CASE("missing class weight surfaces as a configuration error") {
  EnergyParams p;
  p.rho_default.reset();
  const NormalizedImage img = disk_image(20, 20, 10, 10, 4, 1, 0);
  const BoxAnnotation box{5, 5, 15, 15, 4};
  const EnlargedRegion region = enlarge_box(box, 2.0, 20, 20);
  CHECK_THROWS_AS(evolve_instance(crop_region(img, region), box, region, p, EvolveConfig{}), ConfigError);
}
