#include "boxlevelset/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "boxlevelset/image_io.hpp"

namespace boxlevelset {
namespace {

using nlohmann::json;

std::string record_label(std::size_t index, const json& entry) {
  std::string label = "record " + std::to_string(index);
  if (entry.is_object() && entry.contains("image") && entry["image"].is_string())
    label += " (image '" + entry["image"].get<std::string>() + "')";
  return label;
}

BoxAnnotation parse_box(const json& j, const std::string& where) {
  if (!j.is_array() || (j.size() != 4 && j.size() != 5))
    throw ValidationError(where + ": box must be [x_min, y_min, x_max, y_max, class_id]");
  for (const auto& v : j)
    if (!v.is_number()) throw ValidationError(where + ": box entries must be numbers");
  BoxAnnotation box{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
                    j[3].get<double>(), j.size() == 5 ? j[4].get<int>() : 0};
  if (box.x_min == box.x_max || box.y_min == box.y_max)
    throw ValidationError(where + ": degenerate box (zero area)");
  if (box.degenerate()) throw ValidationError(where + ": box has x_min > x_max or y_min > y_max");
  return box;
}

json box_to_json(const BoxAnnotation& b) {
  return json::array({b.x_min, b.y_min, b.x_max, b.y_max, b.class_id});
}

json rle_to_json(const RleMask& rle) {
  return json{{"size", {rle.height, rle.width}}, {"counts", rle.counts}};
}

RleMask rle_from_json(const json& j) {
  RleMask rle;
  rle.height = j.at("size").at(0).get<int>();
  rle.width = j.at("size").at(1).get<int>();
  rle.counts = j.at("counts").get<std::vector<std::int64_t>>();
  return rle;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

json report_json(const MetricsReport& report) {
  json instances = json::array();
  for (const auto& s : report.instances)
    instances.push_back({{"image", s.image},
                         {"instance_id", s.instance_id},
                         {"iou", s.iou},
                         {"runtime_ms", s.runtime_ms}});
  json failures = json::array();
  for (const auto& f : report.failures) failures.push_back({{"image", f.image}, {"error", f.message}});
  return json{{"count", report.instances.size()},
              {"mean_iou", report.mean_iou},
              {"ap50", report.ap50},
              {"ap75", report.ap75},
              {"instances", instances},
              {"failures", failures}};
}

struct LoadedImage {
  std::size_t record = 0;
  NormalizedImage pixels;
};

struct WorkItem {
  std::size_t loaded = 0;  // index into the loaded-image list
  std::size_t box = 0;
};

}  // namespace

std::vector<DatasetRecord> parse_annotations(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("annotation JSON: ") + e.what());
  }
  if (!root.is_array()) throw ValidationError("annotation JSON: top level must be an array");

  std::vector<DatasetRecord> records;
  for (std::size_t i = 0; i < root.size(); ++i) {
    const json& entry = root[i];
    const std::string where = record_label(i, entry);
    if (!entry.is_object() || !entry.contains("image") || !entry["image"].is_string())
      throw ValidationError(where + ": missing string field \"image\"");
    if (!entry.contains("boxes") || !entry["boxes"].is_array())
      throw ValidationError(where + ": missing array field \"boxes\"");
    DatasetRecord rec;
    rec.image = entry["image"].get<std::string>();
    for (std::size_t b = 0; b < entry["boxes"].size(); ++b)
      rec.boxes.push_back(parse_box(entry["boxes"][b], where + ", box " + std::to_string(b)));
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<DatasetRecord> load_annotations(const std::filesystem::path& path) {
  return parse_annotations(read_text(path));
}

void save_annotations(std::span<const DatasetRecord> records, const std::filesystem::path& path) {
  json root = json::array();
  for (const auto& rec : records) {
    json boxes = json::array();
    for (const auto& b : rec.boxes) boxes.push_back(box_to_json(b));
    root.push_back({{"image", rec.image}, {"boxes", boxes}});
  }
  write_text(path, root.dump(2) + "\n");
}

Grid<int> composite_masks(std::span<const InstanceMask> masks, int width, int height) {
  Grid<int> labels(height, width, 0);
  Grid<double> best_prob(height, width, -1.0);
  Grid<int> best_id(height, width, -1);
  for (const auto& inst : masks) {
    for (int r = 0; r < inst.mask.rows(); ++r) {
      for (int c = 0; c < inst.mask.cols(); ++c) {
        if (!inst.mask(r, c)) continue;
        const int y = inst.region.y_min + r;
        const int x = inst.region.x_min + c;
        if (y < 0 || y >= height || x < 0 || x >= width) continue;
        const double p = inst.probability.empty() ? 1.0 : inst.probability(r, c);
        const bool wins = p > best_prob(y, x) ||
                          (p == best_prob(y, x) && inst.instance_id < best_id(y, x));
        if (best_id(y, x) < 0 || wins) {
          best_prob(y, x) = p;
          best_id(y, x) = inst.instance_id;
          labels(y, x) = inst.instance_id + 1;
        }
      }
    }
  }
  return labels;
}

DatasetResult run_dataset(std::span<const DatasetRecord> records, const EnergyParams& params,
                          const EvolveConfig& cfg, const PipelineOptions& options) {
  params.validate();
  cfg.validate();
  DatasetResult result;

  std::vector<LoadedImage> loaded;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const DatasetRecord& rec = records[i];
    try {
      RawImage raw = rec.pixels ? *rec.pixels : read_image(options.image_root / rec.image);
      loaded.push_back({i, normalize_image(raw)});
    } catch (const std::exception& e) {
      result.report.failures.push_back({rec.image, e.what()});
    }
  }

  std::vector<WorkItem> items;
  for (std::size_t l = 0; l < loaded.size(); ++l)
    for (std::size_t b = 0; b < records[loaded[l].record].boxes.size(); ++b) items.push_back({l, b});

  std::vector<std::optional<InstanceMask>> outputs(items.size());
  std::vector<std::string> errors(items.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t k = next.fetch_add(1); k < items.size(); k = next.fetch_add(1)) {
      const WorkItem& item = items[k];
      const DatasetRecord& rec = records[loaded[item.loaded].record];
      const NormalizedImage& img = loaded[item.loaded].pixels;
      const BoxAnnotation& box = rec.boxes[item.box];
      const int id = static_cast<int>(item.box);
      try {
        const auto start = std::chrono::steady_clock::now();
        const EnlargedRegion region =
            enlarge_box(box, options.enlarge_factor, img.width(), img.height());
        const NormalizedImage crop = crop_region(img, region);
        SnapshotSink sink;
        if (options.snapshot)
          sink = [&](int iter, const LevelSetField& phi) { options.snapshot(rec.image, id, iter, phi); };
        EvolveResult evolved = evolve_instance(crop, box, region, params, cfg, sink);

        InstanceMask inst;
        inst.image = rec.image;
        inst.instance_id = id;
        inst.class_id = box.class_id;
        inst.box = box;
        inst.region = region;
        inst.mask = std::move(evolved.mask);
        inst.probability = foreground_probability(evolved.phi, params.sigmoid_slope);
        inst.iterations = evolved.iterations_used;
        inst.converged = evolved.converged;
        inst.runtime_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - start).count();
        outputs[k] = std::move(inst);
      } catch (const std::exception& e) {
        errors[k] = "box " + std::to_string(item.box) + ": " + e.what();
      }
    }
  };

  const int jobs = std::max(1, options.jobs);
  if (jobs == 1 || items.size() < 2) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), items.size());
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  // Gather in input order.
  std::size_t k = 0;
  const bool scored = !records.empty() &&
                      std::all_of(records.begin(), records.end(),
                                  [](const DatasetRecord& r) { return r.ground_truth.has_value(); });
  std::vector<std::optional<ImageResult>> per_record(records.size());
  for (std::size_t l = 0; l < loaded.size(); ++l) {
    const DatasetRecord& rec = records[loaded[l].record];
    ImageResult image;
    image.image = rec.image;
    image.width = loaded[l].pixels.width();
    image.height = loaded[l].pixels.height();
    for (std::size_t b = 0; b < rec.boxes.size(); ++b, ++k) {
      if (outputs[k]) {
        image.instances.push_back(std::move(*outputs[k]));
      } else {
        result.report.failures.push_back({rec.image, errors[k]});
      }
    }
    image.labels = composite_masks(image.instances, image.width, image.height);
    for (auto& inst : image.instances) {
      for (int r = 0; r < inst.mask.rows(); ++r)
        for (int c = 0; c < inst.mask.cols(); ++c)
          if (inst.mask(r, c) &&
              image.labels(inst.region.y_min + r, inst.region.x_min + c) != inst.instance_id + 1)
            inst.mask(r, c) = 0;
    }
    per_record[loaded[l].record] = std::move(image);
  }

  if (scored) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      const DatasetRecord& rec = records[i];
      const auto& truth = *rec.ground_truth;
      if (truth.size() != rec.boxes.size())
        throw std::invalid_argument("run_dataset: record '" + rec.image +
                                    "' has a ground-truth count different from its box count");
      for (std::size_t b = 0; b < truth.size(); ++b) {
        InstanceScore s;
        s.image = rec.image;
        s.instance_id = static_cast<int>(b);
        BinaryMask pred(truth[b].rows(), truth[b].cols(), 0);
        if (per_record[i]) {
          for (const auto& inst : per_record[i]->instances)
            if (inst.instance_id == s.instance_id) {
              pred = inst.full_mask(truth[b].cols(), truth[b].rows());
              s.runtime_ms = inst.runtime_ms;
            }
        }
        s.iou = mask_iou(pred, truth[b]);
        result.report.instances.push_back(s);
      }
    }
    summarize(result.report);
  }

  for (auto& image : per_record)
    if (image) result.images.push_back(std::move(*image));
  return result;
}

void save_results(std::span<const ImageResult> images, const MetricsReport* report,
                  const std::filesystem::path& path) {
  json instances = json::array();
  for (const auto& image : images) {
    for (const auto& inst : image.instances) {
      instances.push_back(
          {{"image", image.image},
           {"instance_id", inst.instance_id},
           {"class_id", inst.class_id},
           {"box", box_to_json(inst.box)},
           {"region", {inst.region.x_min, inst.region.y_min, inst.region.x_max, inst.region.y_max}},
           {"mask", rle_to_json(rle_encode(inst.full_mask(image.width, image.height)))}});
    }
  }
  json root{{"instances", instances}};
  if (report) root["metrics"] = report_json(*report);
  write_text(path, root.dump(2) + "\n");
}

std::vector<ImageResult> load_results(const std::filesystem::path& path) {
  json root;
  try {
    root = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  if (!root.is_object() || !root.contains("instances") || !root["instances"].is_array())
    throw ValidationError(path.string() + ": expected an object with an \"instances\" array");

  std::vector<ImageResult> images;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < root["instances"].size(); ++i) {
    const json& j = root["instances"][i];
    try {
      InstanceMask inst;
      inst.image = j.at("image").get<std::string>();
      inst.instance_id = j.at("instance_id").get<int>();
      inst.class_id = j.value("class_id", 0);
      if (j.contains("box")) inst.box = parse_box(j["box"], "instance " + std::to_string(i));
      inst.mask = rle_decode(rle_from_json(j.at("mask")));
      inst.region = EnlargedRegion{0, 0, inst.mask.cols(), inst.mask.rows(), 1.0};
      auto [it, fresh] = index.try_emplace(inst.image, images.size());
      if (fresh) {
        ImageResult image;
        image.image = inst.image;
        image.width = inst.mask.cols();
        image.height = inst.mask.rows();
        images.push_back(std::move(image));
      }
      images[it->second].instances.push_back(std::move(inst));
    } catch (const json::exception& e) {
      throw ValidationError(path.string() + ", instance " + std::to_string(i) + ": " + e.what());
    }
  }
  return images;
}

MetricsReport evaluate_results(std::span<const ImageResult> preds,
                               std::span<const ImageResult> ground_truth) {
  std::map<std::pair<std::string, int>, const InstanceMask*> predicted;
  std::size_t pred_count = 0;
  for (const auto& image : preds)
    for (const auto& inst : image.instances) {
      predicted[{image.image, inst.instance_id}] = &inst;
      ++pred_count;
    }

  std::vector<BinaryMask> p, g;
  MetricsReport report;
  for (const auto& image : ground_truth) {
    for (const auto& inst : image.instances) {
      auto it = predicted.find({image.image, inst.instance_id});
      if (it == predicted.end())
        throw std::invalid_argument("evaluate: no prediction for " + image.image + " instance " +
                                    std::to_string(inst.instance_id));
      p.push_back(it->second->full_mask(image.width, image.height));
      g.push_back(inst.full_mask(image.width, image.height));
      report.instances.push_back({image.image, inst.instance_id, 0.0, 0.0});
    }
  }
  if (pred_count != g.size())
    throw std::invalid_argument("evaluate: prediction count " + std::to_string(pred_count) +
                                " differs from ground-truth count " + std::to_string(g.size()));
  const MetricsReport scored = evaluate_masks(p, g);
  for (std::size_t i = 0; i < report.instances.size(); ++i)
    report.instances[i].iou = scored.instances[i].iou;
  summarize(report);
  return report;
}

void export_masks(const DatasetResult& result, ExportFormat format,
                  const std::filesystem::path& dir) {
  if (format == ExportFormat::kRleJson) {
    save_results(result.images, &result.report, dir / "results.json");
    return;
  }
  for (const auto& image : result.images) {
    const auto sub = dir / std::filesystem::path(image.image).stem();
    std::error_code ec;
    std::filesystem::create_directories(sub, ec);
    if (ec) throw IoError("cannot create " + sub.string() + ": " + ec.message());
    for (const auto& inst : image.instances)
      write_mask_png(sub / (std::to_string(inst.instance_id) + ".png"),
                     inst.full_mask(image.width, image.height));
  }
}

std::string report_to_json(const MetricsReport& report, int indent) {
  return report_json(report).dump(indent);
}

}  // namespace boxlevelset
