#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "boxlevelset/image_io.hpp"
#include "boxlevelset/pipeline.hpp"
#include "boxlevelset/synthetic.hpp"
#include "support.hpp"

using namespace boxlevelset;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("boxlevelset_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

InstanceMask square(int id, int x0, int y0, int size, double prob) {
  InstanceMask m;
  m.instance_id = id;
  m.region = {x0, y0, x0 + size, y0 + size, 1.0};
  m.mask = BinaryMask(size, size, 1);
  m.probability = Grid<double>(size, size, prob);
  return m;
}

std::vector<DatasetRecord> small_synthetic(int count) {
  SynthSpec spec;
  spec.width = spec.height = 96;
  spec.size_min = 10;
  spec.size_max = 14;
  spec.objects_max = 2;
  std::vector<DatasetRecord> records;
  for (auto& im : generate_synthetic(5, count, spec).images)
    records.push_back({im.name, im.boxes, im.masks, im.image});
  return records;
}

}  // namespace

TEST_CASE("annotation parsing") {
  CHECK(parse_annotations("[]").empty());
  const auto one = parse_annotations(R"([{"image": "a.png", "boxes": [[1, 2, 5, 6, 3]]}])");
  REQUIRE(one.size() == 1);
  CHECK(one[0].image == "a.png");
  REQUIRE(one[0].boxes.size() == 1);
  CHECK(one[0].boxes[0] == BoxAnnotation{1, 2, 5, 6, 3});
}

TEST_CASE("annotation errors name the record") {
  try {
    parse_annotations(R"([{"image": "ok.png", "boxes": []}, {"image": "bad.png", "boxes": [[4, 1, 4, 9, 0]]}])");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("bad.png") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_annotations("[{\"image\": 1}"), ValidationError);
  CHECK_THROWS_AS(parse_annotations("{}"), ValidationError);
  CHECK_THROWS_AS(parse_annotations(R"([{"image": "x.png"}])"), ValidationError);
  CHECK_THROWS_AS(parse_annotations(R"([{"image": "x.png", "boxes": [[1, 2, 3]]}])"), ValidationError);
  CHECK_THROWS_AS(load_annotations("/nonexistent/annotations.json"), IoError);
}

TEST_CASE("annotation save / load round trip") {
  const fs::path dir = scratch("annotations");
  std::vector<DatasetRecord> recs(2);
  recs[0].image = "a.png";
  recs[0].boxes = {{1.5, 2, 7, 9, 1}, {0, 0, 3, 3, 0}};
  recs[1].image = "b.png";
  save_annotations(recs, dir / "ann.json");
  const auto back = load_annotations(dir / "ann.json");
  REQUIRE(back.size() == 2);
  CHECK(back[0].boxes == recs[0].boxes);
  CHECK(back[1].boxes.empty());
}

TEST_CASE("composite: disjoint masks keep distinct labels") {
  const std::vector<InstanceMask> masks{square(0, 0, 0, 2, 0.8), square(1, 3, 3, 2, 0.8)};
  const Grid<int> labels = composite_masks(masks, 6, 6);
  CHECK(labels(0, 0) == 1);
  CHECK(labels(4, 4) == 2);
  CHECK(labels(2, 2) == 0);
}

TEST_CASE("composite: highest probability wins, ties go to the lower id") {
  const std::vector<InstanceMask> masks{square(0, 0, 0, 3, 0.6), square(1, 1, 1, 3, 0.9)};
  CHECK(composite_masks(masks, 5, 5)(2, 2) == 2);
  const std::vector<InstanceMask> tie{square(1, 1, 1, 3, 0.7), square(0, 0, 0, 3, 0.7)};
  CHECK(composite_masks(tie, 5, 5)(2, 2) == 1);
  const std::vector<InstanceMask> reversed{tie[1], tie[0]};
  CHECK(composite_masks(reversed, 5, 5) == composite_masks(tie, 5, 5));
}

TEST_CASE("run_dataset on an empty dataset") {
  const DatasetResult r = run_dataset({}, EnergyParams{}, EvolveConfig{}, {});
  CHECK(r.images.empty());
  CHECK(r.report.instances.empty());
  CHECK(r.report.failures.empty());
}

TEST_CASE("constant images give box masks") {
  std::vector<DatasetRecord> recs(1);
  recs[0].image = "flat.png";
  recs[0].pixels = RawImage(50, 40, 1, 120.0);
  recs[0].boxes = {{5, 5, 20, 18, 0}, {30, 20, 45, 35, 0}};
  const DatasetResult r = run_dataset(recs, EnergyParams{}, EvolveConfig{}, {});
  REQUIRE(r.images.size() == 1);
  for (const auto& inst : r.images[0].instances) {
    const BinaryMask box = box_indicator(inst.box, inst.region);
    CHECK(mask_iou(inst.mask, box) >= 0.95);
  }
}

TEST_CASE("unreadable images become record failures") {
  std::vector<DatasetRecord> recs = small_synthetic(1);
  DatasetRecord missing;
  missing.image = "does_not_exist.png";
  missing.boxes = {{1, 1, 5, 5, 0}};
  recs.insert(recs.begin(), missing);
  PipelineOptions opts;
  opts.image_root = scratch("missing");
  const DatasetResult r = run_dataset(recs, EnergyParams{}, EvolveConfig{}, opts);
  REQUIRE(r.report.failures.size() == 1);
  CHECK(r.report.failures[0].image == "does_not_exist.png");
  CHECK(r.images.size() == 1);
}

TEST_CASE("worker count does not change results") {
  const auto recs = small_synthetic(3);
  PipelineOptions one, four;
  four.jobs = 4;
  const DatasetResult a = run_dataset(recs, EnergyParams{}, EvolveConfig{}, one);
  const DatasetResult b = run_dataset(recs, EnergyParams{}, EvolveConfig{}, four);
  REQUIRE(a.images.size() == b.images.size());
  for (std::size_t i = 0; i < a.images.size(); ++i) {
    CHECK(a.images[i].labels == b.images[i].labels);
    REQUIRE(a.images[i].instances.size() == b.images[i].instances.size());
    for (std::size_t k = 0; k < a.images[i].instances.size(); ++k)
      CHECK(a.images[i].instances[k].mask == b.images[i].instances[k].mask);
  }
  REQUIRE(a.report.instances.size() == b.report.instances.size());
  for (std::size_t i = 0; i < a.report.instances.size(); ++i)
    CHECK(a.report.instances[i].iou == b.report.instances[i].iou);
}

TEST_CASE("exported masks read back unchanged") {
  const fs::path dir = scratch("export");
  const DatasetResult r = run_dataset(small_synthetic(2), EnergyParams{}, EvolveConfig{}, {});
  export_masks(r, ExportFormat::kPng, dir);
  export_masks(r, ExportFormat::kRleJson, dir);
  const auto loaded = load_results(dir / "results.json");
  REQUIRE(loaded.size() == r.images.size());
  for (std::size_t i = 0; i < r.images.size(); ++i) {
    const ImageResult& img = r.images[i];
    for (std::size_t k = 0; k < img.instances.size(); ++k) {
      const BinaryMask full = img.instances[k].full_mask(img.width, img.height);
      const fs::path png = dir / fs::path(img.image).stem() / (std::to_string(img.instances[k].instance_id) + ".png");
      CHECK(read_mask_png(png) == full);
      CHECK(loaded[i].instances[k].full_mask(img.width, img.height) == full);
      CHECK(loaded[i].instances[k].box == img.instances[k].box);
    }
  }
  const MetricsReport self = evaluate_results(loaded, loaded);
  CHECK(self.mean_iou == doctest::Approx(1.0));
}

TEST_CASE("evaluate_results matches by image and instance") {
  const DatasetResult r = run_dataset(small_synthetic(2), EnergyParams{}, EvolveConfig{}, {});
  std::vector<ImageResult> partial = r.images;
  partial[0].instances.pop_back();
  CHECK_THROWS_AS(evaluate_results(partial, r.images), std::invalid_argument);
  CHECK_THROWS_AS(evaluate_results(r.images, partial), std::invalid_argument);
}

TEST_CASE("results loader reports malformed files") {
  const fs::path dir = scratch("badresults");
  std::ofstream(dir / "a.json") << "{\"instances\": [{\"image\": \"x\"}]}";
  CHECK_THROWS_AS(load_results(dir / "a.json"), ValidationError);
  std::ofstream(dir / "b.json") << "not json";
  CHECK_THROWS_AS(load_results(dir / "b.json"), ValidationError);
}
