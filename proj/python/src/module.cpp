#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "boxlevelset/config.hpp"
#include "boxlevelset/constraints.hpp"
#include "boxlevelset/energy.hpp"
#include "boxlevelset/evolve.hpp"
#include "boxlevelset/masks.hpp"
#include "boxlevelset/pipeline.hpp"
#include "boxlevelset/synthetic.hpp"

namespace py = pybind11;
using namespace boxlevelset;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using MaskArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

template <class T>
Grid<T> to_grid(const py::array_t<T, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
  Grid<T> g(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), g.values().begin());
  return g;
}

template <class T>
py::array_t<T> to_array(const Grid<T>& g) {
  py::array_t<T> a({g.rows(), g.cols()});
  std::copy(g.values().begin(), g.values().end(), a.mutable_data());
  return a;
}

// (H, W) or (C, H, W) array to a planar image.
RawImage to_raw(const Array& a) {
  if (a.ndim() == 2)
    return RawImage(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)), 1,
                    std::vector<double>(a.data(), a.data() + a.size()));
  if (a.ndim() == 3)
    return RawImage(static_cast<int>(a.shape(2)), static_cast<int>(a.shape(1)),
                    static_cast<int>(a.shape(0)), std::vector<double>(a.data(), a.data() + a.size()));
  throw std::invalid_argument("image must have shape (H, W) or (C, H, W)");
}

py::array_t<double> raw_to_array(const RawImage& img) {
  py::array_t<double> a({img.channels(), img.height(), img.width()});
  std::copy(img.data().begin(), img.data().end(), a.mutable_data());
  return a;
}

RunConfig make_config(const std::map<std::string, std::string>& settings) {
  RunConfig cfg;
  for (const auto& [key, value] : settings) apply_setting(cfg, key, value);
  cfg.validate();
  return cfg;
}

BoxAnnotation to_box(const std::vector<double>& b, int class_id) {
  if (b.size() != 4) throw std::invalid_argument("box must be (x_min, y_min, x_max, y_max)");
  return {b[0], b[1], b[2], b[3], class_id};
}

py::dict breakdown(const EnergyBreakdown& e) {
  py::dict d;
  d["data_inside"] = e.data_inside;
  d["data_outside"] = e.data_outside;
  d["length"] = e.length;
  d["area"] = e.area;
  d["total"] = e.total;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Box-supervised level-set segmentation core";

  static py::exception<ValidationError> validation_error(m, "ValidationError", PyExc_ValueError);
  static py::exception<IoError> io_error(m, "IoError", PyExc_OSError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ValidationError& e) {
      PyErr_SetString(validation_error.ptr(), e.what());
    } catch (const IoError& e) {
      PyErr_SetString(io_error.ptr(), e.what());
    }
  });

  m.def("config_keys", &config_keys);
  m.def("format_config", [](const std::map<std::string, std::string>& s) {
    return format_config(make_config(s));
  }, py::arg("settings") = std::map<std::string, std::string>{});

  m.def("normalize", [](const Array& img) { return raw_to_array(normalize_image(to_raw(img)).raw()); },
        "Per-channel min-max normalization; returns (C, H, W).");

  m.def("levelset_energy",
        [](const Array& img, const Array& phi, int class_id,
           const std::map<std::string, std::string>& settings) {
          const RunConfig cfg = make_config(settings);
          return breakdown(levelset_energy(NormalizedImage::from_unit_values(to_raw(img)),
                                           to_grid(phi), class_id, cfg.energy));
        },
        py::arg("image"), py::arg("phi"), py::arg("class_id") = 0,
        py::arg("settings") = std::map<std::string, std::string>{});

  m.def("levelset_gradient",
        [](const Array& img, const Array& phi, int class_id,
           const std::map<std::string, std::string>& settings) {
          const RunConfig cfg = make_config(settings);
          return to_array(levelset_gradient(NormalizedImage::from_unit_values(to_raw(img)),
                                            to_grid(phi), class_id, cfg.energy));
        },
        py::arg("image"), py::arg("phi"), py::arg("class_id") = 0,
        py::arg("settings") = std::map<std::string, std::string>{});

  m.def("classical_energy",
        [](const Array& img, const Array& phi, double eps_h, int class_id,
           const std::map<std::string, std::string>& settings) {
          const RunConfig cfg = make_config(settings);
          return breakdown(classical_energy(NormalizedImage::from_unit_values(to_raw(img)),
                                            to_grid(phi), eps_h, class_id, cfg.energy));
        },
        py::arg("image"), py::arg("phi"), py::arg("eps_h") = 1e-3, py::arg("class_id") = 0,
        py::arg("settings") = std::map<std::string, std::string>{});

  m.def("dice_loss", [](std::vector<double> p, std::vector<double> t) { return dice_loss(p, t); });

  m.def("constraint_loss", [](const Array& prob, const MaskArray& foreground) {
    return constraint_loss(to_grid(prob), BinaryRegionMasks::from_foreground(to_grid(foreground)));
  });
  m.def("constraint_gradient", [](const Array& prob, const MaskArray& foreground) {
    return to_array(constraint_gradient(to_grid(prob),
                                        BinaryRegionMasks::from_foreground(to_grid(foreground))));
  });

  m.def("evolve",
        [](const Array& img, const std::vector<double>& box, int class_id,
           const std::map<std::string, std::string>& settings) {
          const RunConfig cfg = make_config(settings);
          const NormalizedImage u = normalize_image(to_raw(img));
          const BoxAnnotation b = to_box(box, class_id);
          const EnlargedRegion region = enlarge_box(b, cfg.enlarge_factor, u.width(), u.height());
          EvolveResult r;
          {
            py::gil_scoped_release release;
            r = evolve_instance(crop_region(u, region), b, region, cfg.energy, cfg.evolve);
          }
          py::dict d;
          d["phi"] = to_array(r.phi);
          d["mask"] = to_array(paste_region(r.mask, region, u.width(), u.height()));
          d["region"] = py::make_tuple(region.x_min, region.y_min, region.x_max, region.y_max);
          d["energy_trace"] = r.energy_trace;
          d["iterations"] = r.iterations_used;
          d["converged"] = r.converged;
          return d;
        },
        py::arg("image"), py::arg("box"), py::arg("class_id") = 0,
        py::arg("settings") = std::map<std::string, std::string>{});

  m.def("segment",
        [](const Array& img, const std::vector<std::vector<double>>& boxes,
           const std::vector<int>& classes, const std::map<std::string, std::string>& settings,
           int jobs) {
          const RunConfig cfg = make_config(settings);
          DatasetRecord rec;
          rec.image = "image";
          rec.pixels = to_raw(img);
          for (std::size_t i = 0; i < boxes.size(); ++i)
            rec.boxes.push_back(to_box(boxes[i], i < classes.size() ? classes[i] : 0));
          PipelineOptions opts;
          opts.enlarge_factor = cfg.enlarge_factor;
          opts.jobs = jobs;
          DatasetResult r;
          {
            py::gil_scoped_release release;
            r = run_dataset(std::span(&rec, 1), cfg.energy, cfg.evolve, opts);
          }
          if (!r.report.failures.empty()) throw ValidationError(r.report.failures[0].message);
          const ImageResult& res = r.images.at(0);
          py::list masks;
          for (const auto& inst : res.instances) masks.append(to_array(inst.full_mask(res.width, res.height)));
          py::dict d;
          d["labels"] = to_array(res.labels);
          d["masks"] = masks;
          return d;
        },
        py::arg("image"), py::arg("boxes"), py::arg("classes") = std::vector<int>{},
        py::arg("settings") = std::map<std::string, std::string>{}, py::arg("jobs") = 1);

  m.def("rle_encode", [](const MaskArray& mask) { return rle_encode(to_grid(mask)).counts; });
  m.def("rle_decode", [](std::vector<std::int64_t> counts, int height, int width) {
    return to_array(rle_decode({height, width, std::move(counts)}));
  }, py::arg("counts"), py::arg("height"), py::arg("width"));
  m.def("mask_iou", [](const MaskArray& a, const MaskArray& b) { return mask_iou(to_grid(a), to_grid(b)); });

  m.def("synth",
        [](std::uint64_t seed, int count, const std::map<std::string, double>& overrides) {
          SynthSpec spec;
          for (const auto& [key, v] : overrides) {
            if (key == "width") spec.width = static_cast<int>(v);
            else if (key == "height") spec.height = static_cast<int>(v);
            else if (key == "size_min") spec.size_min = v;
            else if (key == "size_max") spec.size_max = v;
            else if (key == "contrast_min") spec.contrast_min = v;
            else if (key == "contrast_max") spec.contrast_max = v;
            else if (key == "noise") spec.noise = v;
            else if (key == "looseness_min") spec.looseness_min = v;
            else if (key == "looseness_max") spec.looseness_max = v;
            else if (key == "spacing") spec.spacing = v;
            else if (key == "objects_min") spec.objects_min = static_cast<int>(v);
            else if (key == "objects_max") spec.objects_max = static_cast<int>(v);
            else throw ValidationError("synth: unknown setting '" + key + "'");
          }
          py::list out;
          for (const auto& im : generate_synthetic(seed, count, spec).images) {
            py::dict d;
            d["name"] = im.name;
            d["image"] = raw_to_array(im.image)[py::int_(0)];
            py::list boxes, masks;
            for (const auto& b : im.boxes) boxes.append(py::make_tuple(b.x_min, b.y_min, b.x_max, b.y_max, b.class_id));
            for (const auto& mk : im.masks) masks.append(to_array(mk));
            d["boxes"] = boxes;
            d["masks"] = masks;
            out.append(d);
          }
          return out;
        },
        py::arg("seed"), py::arg("count"), py::arg("overrides") = std::map<std::string, double>{});
}
