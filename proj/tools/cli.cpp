#include "cli.hpp"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <thread>

#include "boxlevelset/config.hpp"
#include "boxlevelset/image_io.hpp"
#include "boxlevelset/pipeline.hpp"
#include "boxlevelset/snapshot.hpp"
#include "boxlevelset/synthetic.hpp"

namespace boxlevelset::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::shared_ptr<spdlog::logger> make_logger() {
  auto logger = std::make_shared<spdlog::logger>(
      "boxlevelset", std::make_shared<spdlog::sinks::stderr_sink_mt>());
  logger->set_pattern("[%l] %v");
  const char* env = std::getenv("BOXLEVELSET_LOG");
  const std::string level = env ? env : "off";
  if (level == "off" || level.empty()) {
    logger->set_level(spdlog::level::off);
  } else if (level == "info") {
    logger->set_level(spdlog::level::info);
  } else if (level == "debug") {
    logger->set_level(spdlog::level::debug);
  } else {
    throw ValidationError("BOXLEVELSET_LOG must be off, info or debug (got '" + level + "')");
  }
  return logger;
}

std::string flag_name(const std::string& key) {
  std::string name = key;
  std::replace(name.begin(), name.end(), '_', '-');
  return "--" + name;
}

// Config file, then per-key flags, then --set entries, in that order.
struct ConfigOptions {
  std::string config_path;
  std::map<std::string, std::string> overrides;
  std::vector<std::string> sets;
  bool dump = false;

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "key = value config file");
    for (const auto& key : config_keys()) {
      std::string names = flag_name(key);
      if (key == "enlarge_factor") names += ",--enlarge";
      app.add_option_function<std::string>(
          names, [this, key](const std::string& v) { overrides[key] = v; },
          "override " + key);
    }
    app.add_option("--set", sets, "KEY=VALUE override, e.g. rho_cls.2=0.5")->take_all();
    app.add_flag("--dump-config", dump, "print the effective config and exit");
  }

  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    for (const auto& key : config_keys())
      if (auto it = overrides.find(key); it != overrides.end()) apply_setting(cfg, key, it->second);
    for (const auto& entry : sets) {
      const auto eq = entry.find('=');
      if (eq == std::string::npos) throw ValidationError("--set expects KEY=VALUE, got '" + entry + "'");
      apply_setting(cfg, entry.substr(0, eq), entry.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
  }
};

BoxAnnotation parse_box(const std::string& text, int class_id) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw ValidationError("--box: '" + part + "' is not a number");
    }
  }
  if (v.size() != 4) throw ValidationError("--box expects x_min,y_min,x_max,y_max");
  BoxAnnotation box{v[0], v[1], v[2], v[3], class_id};
  if (box.degenerate()) throw ValidationError("--box has zero area");
  return box;
}

// Attaches ground-truth masks from a results-format file to the records.
void attach_ground_truth(std::vector<DatasetRecord>& records, const fs::path& path) {
  const auto truth = load_results(path);
  std::map<std::string, const ImageResult*> by_image;
  for (const auto& image : truth) by_image[image.image] = &image;
  for (auto& rec : records) {
    auto it = by_image.find(rec.image);
    if (it == by_image.end()) throw ValidationError("ground truth has no entry for " + rec.image);
    std::vector<BinaryMask> masks(rec.boxes.size());
    for (const auto& inst : it->second->instances) {
      if (inst.instance_id < 0 || inst.instance_id >= static_cast<int>(masks.size()))
        throw ValidationError("ground truth for " + rec.image + " has unknown instance " +
                              std::to_string(inst.instance_id));
      masks[inst.instance_id] = inst.full_mask(it->second->width, it->second->height);
    }
    for (std::size_t b = 0; b < masks.size(); ++b)
      if (masks[b].empty())
        throw ValidationError("ground truth for " + rec.image + " lacks instance " +
                              std::to_string(b));
    rec.ground_truth = std::move(masks);
  }
}

void print_summary(std::ostream& err, const MetricsReport& report) {
  err << "instances: " << report.instances.size() << "  mean IoU: " << report.mean_iou
      << "  AP50: " << report.ap50 << "  AP75: " << report.ap75 << "\n";
}

int default_jobs() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

struct SegmentArgs {
  std::string images, annotations, out, gt, frames;
  int jobs = default_jobs();
};

int run_segment(const SegmentArgs& a, const ConfigOptions& co, std::ostream& out,
                std::ostream& err, spdlog::logger& log) {
  const RunConfig cfg = co.resolve();
  if (co.dump) {
    out << format_config(cfg);
    return kExitOk;
  }
  auto records = load_annotations(a.annotations);
  if (!a.gt.empty()) attach_ground_truth(records, a.gt);
  log.info("segmenting {} images with {} jobs", records.size(), a.jobs);

  PipelineOptions opts;
  opts.enlarge_factor = cfg.enlarge_factor;
  opts.jobs = a.jobs;
  opts.image_root = a.images;
  if (!a.frames.empty() && cfg.evolve.snapshot_every > 0) {
    const EnergyParams params = cfg.energy;
    const fs::path frames = a.frames;
    opts.snapshot = [params, frames](const std::string& image, int id, int iter,
                                     const LevelSetField& phi) {
      const std::string stem = fs::path(image).stem().string();
      write_snapshot_png(frames / snapshot_name(stem + "_" + std::to_string(id), iter), phi, params);
    };
  }
  const DatasetResult result = run_dataset(records, cfg.energy, cfg.evolve, opts);
  export_masks(result, ExportFormat::kPng, a.out);
  export_masks(result, ExportFormat::kRleJson, a.out);

  std::size_t instances = 0;
  for (const auto& image : result.images) instances += image.instances.size();
  for (const auto& f : result.report.failures) err << "failed: " << f.image << ": " << f.message << "\n";
  err << "segmented " << instances << " instances in " << result.images.size() << " images -> "
      << (fs::path(a.out) / "results.json").string() << "\n";

  json summary{{"images", result.images.size()},
               {"instances", instances},
               {"results", (fs::path(a.out) / "results.json").string()}};
  if (!result.report.instances.empty()) {
    summary["metrics"] = json::parse(report_to_json(result.report));
    print_summary(err, result.report);
  }
  json failures = json::array();
  for (const auto& f : result.report.failures) failures.push_back({{"image", f.image}, {"message", f.message}});
  summary["failures"] = failures;
  out << summary.dump(2) << "\n";
  return result.report.failures.empty() ? kExitOk : kExitIo;
}

struct DemoArgs {
  std::string image, box, frames;
  int class_id = 0;
};

int run_demo(const DemoArgs& a, const ConfigOptions& co, std::ostream& out, std::ostream& err,
             spdlog::logger& log) {
  RunConfig cfg = co.resolve();
  if (cfg.evolve.snapshot_every == 0) cfg.evolve.snapshot_every = 10;
  if (co.dump) {
    out << format_config(cfg);
    return kExitOk;
  }
  const BoxAnnotation box = parse_box(a.box, a.class_id);
  const NormalizedImage img = normalize_image(read_image(a.image));
  const EnlargedRegion region = enlarge_box(box, cfg.enlarge_factor, img.width(), img.height());
  const NormalizedImage crop = crop_region(img, region);

  const fs::path frames = a.frames;
  std::error_code ec;
  fs::create_directories(frames, ec);
  if (ec) throw IoError("cannot create " + frames.string() + ": " + ec.message());
  const std::string stem = fs::path(a.image).stem().string();
  int written = 0;
  auto sink = [&](int iter, const LevelSetField& phi) {
    write_snapshot_png(frames / snapshot_name(stem, iter), phi, cfg.energy);
    ++written;
    log.debug("frame {}", iter);
  };
  const EvolveResult r = evolve_instance(crop, box, region, cfg.energy, cfg.evolve, sink);
  write_snapshot_png(frames / snapshot_name(stem, r.iterations_used), r.phi, cfg.energy);
  write_mask_png(frames / (stem + "_mask.png"), r.mask);

  err << "evolved " << r.iterations_used << " iterations ("
      << (r.converged ? "converged" : "not converged") << "), " << written + 1 << " frames in "
      << frames.string() << "\n";
  json summary{{"iterations", r.iterations_used},
               {"converged", r.converged},
               {"initial_energy", r.energy_trace.front()},
               {"final_energy", r.energy_trace.back()},
               {"region", {region.x_min, region.y_min, region.x_max, region.y_max}},
               {"frames", written + 1},
               {"rle", {{"size", {r.mask.rows(), r.mask.cols()}}, {"counts", rle_encode(r.mask).counts}}}};
  out << summary.dump(2) << "\n";
  return kExitOk;
}

int run_eval(const std::string& pred, const std::string& gt, std::ostream& out, std::ostream& err) {
  const auto p = load_results(pred);
  const auto g = load_results(gt);
  MetricsReport report;
  try {
    report = evaluate_results(p, g);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  out << report_to_json(report) << "\n";
  print_summary(err, report);
  return kExitOk;
}

struct SynthArgs {
  std::uint64_t seed = 0;
  int count = 50;
  std::string out;
  SynthSpec spec;
};

int run_synth(const SynthArgs& a, std::ostream& out, std::ostream& err) {
  const SyntheticDataset ds = generate_synthetic(a.seed, a.count, a.spec);
  write_synthetic(ds, a.out);
  std::size_t boxes = 0;
  for (const auto& im : ds.images) boxes += im.boxes.size();
  err << "wrote " << ds.images.size() << " images with " << boxes << " objects to " << a.out << "\n";
  json summary{{"images", ds.images.size()},
               {"instances", boxes},
               {"annotations", (fs::path(a.out) / "annotations.json").string()},
               {"ground_truth", (fs::path(a.out) / "ground_truth.json").string()}};
  out << summary.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::shared_ptr<spdlog::logger> log;
  try {
    log = make_logger();
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  CLI::App app{"Box-supervised level-set instance segmentation"};
  app.name("boxlevelset");
  app.require_subcommand(1);

  SegmentArgs seg;
  ConfigOptions seg_cfg;
  auto* segment = app.add_subcommand("segment", "segment every annotated box of a dataset");
  segment->add_option("--images", seg.images, "image directory")->required();
  segment->add_option("--annotations", seg.annotations, "annotation JSON")->required();
  segment->add_option("--out", seg.out, "output directory")->required();
  segment->add_option("--gt", seg.gt, "ground-truth results JSON; enables metrics");
  segment->add_option("--frames", seg.frames, "snapshot directory (needs snapshot_every > 0)");
  segment->add_option("--jobs", seg.jobs, "worker threads")->check(CLI::PositiveNumber);
  seg_cfg.attach(*segment);

  DemoArgs demo;
  ConfigOptions demo_cfg;
  auto* evolve = app.add_subcommand("evolve-demo", "evolve one box and write frames");
  evolve->add_option("--image", demo.image, "input image")->required();
  evolve->add_option("--box", demo.box, "x_min,y_min,x_max,y_max")->required();
  evolve->add_option("--class", demo.class_id, "class id of the box");
  evolve->add_option("--frames", demo.frames, "frame directory")->required();
  demo_cfg.attach(*evolve);

  std::string pred, gt;
  auto* eval = app.add_subcommand("eval", "score predictions against ground truth");
  eval->add_option("--pred", pred, "predicted results JSON")->required();
  eval->add_option("--gt", gt, "ground-truth results JSON")->required();

  SynthArgs syn;
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--seed", syn.seed, "random seed")->required();
  synth->add_option("--count", syn.count, "number of images")->check(CLI::NonNegativeNumber);
  synth->add_option("--out", syn.out, "output directory")->required();
  synth->add_option("--width", syn.spec.width);
  synth->add_option("--height", syn.spec.height);
  synth->add_option("--size-min", syn.spec.size_min);
  synth->add_option("--size-max", syn.spec.size_max);
  synth->add_option("--contrast-min", syn.spec.contrast_min);
  synth->add_option("--contrast-max", syn.spec.contrast_max);
  synth->add_option("--noise", syn.spec.noise);
  synth->add_option("--looseness-min", syn.spec.looseness_min);
  synth->add_option("--looseness-max", syn.spec.looseness_max);
  synth->add_option("--spacing", syn.spec.spacing);
  synth->add_option("--objects-min", syn.spec.objects_min);
  synth->add_option("--objects-max", syn.spec.objects_max);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    if (segment->parsed()) return run_segment(seg, seg_cfg, out, err, *log);
    if (evolve->parsed()) return run_demo(demo, demo_cfg, out, err, *log);
    if (eval->parsed()) return run_eval(pred, gt, out, err);
    if (synth->parsed()) return run_synth(syn, out, err);
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  }
  err << app.help();
  return kExitValidation;
}

}  // namespace boxlevelset::cli
