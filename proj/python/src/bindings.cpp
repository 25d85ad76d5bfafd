#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>
#include <limits>

#include "modmix/cloud_io.hpp"
#include "modmix/coco.hpp"
#include "modmix/dataset.hpp"
#include "modmix/dhs.hpp"
#include "modmix/error.hpp"
#include "modmix/eval.hpp"
#include "modmix/mixing.hpp"

namespace py = pybind11;
using namespace modmix;

namespace {

using Points = py::array_t<double, py::array::c_style | py::array::forcecast>;
using Bytes = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

OrganizedPointCloud cloud_from_array(const Points& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw InvalidInput("points must have shape (height, width, 3)");
  const auto h = static_cast<std::size_t>(a.shape(0));
  const auto w = static_cast<std::size_t>(a.shape(1));
  const double* p = a.data();
  std::vector<std::optional<Vec3>> pts(w * h);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double x = p[i * 3], y = p[i * 3 + 1], z = p[i * 3 + 2];
    if (std::isnan(x) && std::isnan(y) && std::isnan(z)) continue;
    pts[i] = Vec3{x, y, z};
  }
  return OrganizedPointCloud(w, h, std::move(pts));
}

Points cloud_to_array(const OrganizedPointCloud& c) {
  Points out({c.height(), c.width(), std::size_t{3}});
  double* p = out.mutable_data();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& v = c.points()[i];
    p[i * 3] = v ? v->x : nan;
    p[i * 3 + 1] = v ? v->y : nan;
    p[i * 3 + 2] = v ? v->z : nan;
  }
  return out;
}

RgbImage image_from_array(const Bytes& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw InvalidInput("images must have shape (height, width, 3)");
  return RgbImage(static_cast<std::size_t>(a.shape(1)), static_cast<std::size_t>(a.shape(0)),
                  std::vector<std::uint8_t>(a.data(), a.data() + a.size()));
}

Bytes image_to_array(const RgbImage& img) {
  Bytes out({img.height(), img.width(), std::size_t{3}});
  std::copy(img.pixels().begin(), img.pixels().end(), out.mutable_data());
  return out;
}

Bytes mask_to_array(const MixtureMask& m) {
  Bytes out({m.height(), m.width()});
  std::transform(m.labels().begin(), m.labels().end(), out.mutable_data(),
                 [](Label l) { return static_cast<std::uint8_t>(l); });
  return out;
}

MixtureMask mask_from_array(const Bytes& a) {
  if (a.ndim() != 2) throw InvalidInput("masks must have shape (height, width)");
  std::vector<Label> labels(static_cast<std::size_t>(a.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (a.data()[i] > 1) throw InvalidInput("mask values must be 0 (A) or 1 (B)");
    labels[i] = static_cast<Label>(a.data()[i]);
  }
  return MixtureMask(static_cast<std::size_t>(a.shape(1)), static_cast<std::size_t>(a.shape(0)), std::move(labels));
}

Label parse_label(const std::string& s) {
  if (s == "A" || s == "a" || s == "rgb") return Label::A;
  if (s == "B" || s == "b" || s == "dhs") return Label::B;
  throw InvalidInput("label must be A or B");
}

Neighborhood parse_neighborhood(int n) {
  if (n == 4) return Neighborhood::Four;
  if (n == 8) return Neighborhood::Eight;
  throw InvalidInput("neighborhood must be 4 or 8");
}

DepthMode parse_depth_mode(const std::string& s) {
  if (s == "range") return DepthMode::Range;
  if (s == "forward") return DepthMode::Forward;
  throw InvalidInput("depth_mode must be 'range' or 'forward'");
}

std::string evaluate_json(const std::string& detections_json, const std::string& coco_json,
                          const std::vector<std::string>& subgroups, const std::vector<double>& thresholds,
                          bool zero_fill) {
  const std::vector<Detection> dets = detections_from_json(nlohmann::json::parse(detections_json));
  const CocoDocument gt = CocoDocument::from_json(nlohmann::json::parse(coco_json));
  const auto all = make_subgroups();
  std::vector<CategorySet> selected;
  for (const auto& name : subgroups) {
    auto s = find_subgroup(all, name);
    if (!s) throw InvalidInput("unknown subgroup '" + name + "'");
    selected.push_back(*s);
  }
  EvalOptions options;
  options.zero_fill_empty = zero_fill;
  return evaluate(dets, gt.ground_truth(), gt.categories, selected, thresholds, options).to_json().dump();
}

}  // namespace

PYBIND11_MODULE(_modmix, m) {
  m.doc() = "Native core of modmix";
  m.attr("__version__") = MODMIX_VERSION;
  m.attr("DEFAULT_SEED") = kDefaultSeed;

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_OSError);

  m.def("read_opc", [](const std::filesystem::path& p) { return cloud_to_array(read_opc(p)); }, py::arg("path"));
  m.def("write_opc", [](const std::filesystem::path& p, const Points& a) { write_opc(p, cloud_from_array(a)); },
        py::arg("path"), py::arg("points"));
  m.def("load_cloud", [](const std::filesystem::path& p) { return cloud_to_array(load_cloud(p)); }, py::arg("path"));

  m.def(
      "encode_dhs",
      [](const Points& a, const std::string& depth_mode) {
        const PseudoImage img = encode_dhs(cloud_from_array(a), DhsOptions{parse_depth_mode(depth_mode)});
        Points channels({img.height, img.width, std::size_t{3}});
        py::array_t<bool> valid({img.height, img.width});
        double* c = channels.mutable_data();
        bool* v = valid.mutable_data();
        for (std::size_t i = 0; i < img.valid.size(); ++i) {
          for (std::size_t k = 0; k < 3; ++k) c[i * 3 + k] = img.channels[k][i];
          v[i] = img.valid[i] != 0;
        }
        return py::make_tuple(channels, valid);
      },
      py::arg("points"), py::arg("depth_mode") = "range");
  m.def(
      "dhs_image",
      [](const Points& a, const std::string& depth_mode) {
        return image_to_array(to_rgb8(encode_dhs(cloud_from_array(a), DhsOptions{parse_depth_mode(depth_mode)})));
      },
      py::arg("points"), py::arg("depth_mode") = "range");

  m.def(
      "cppm_mask",
      [](std::size_t w, std::size_t h, std::size_t patch, const std::string& origin) {
        return mask_to_array(cppm_mask(w, h, patch, parse_label(origin)));
      },
      py::arg("width"), py::arg("height"), py::arg("patch_size") = 1, py::arg("origin") = "A");
  m.def(
      "sffm_mask",
      [](std::size_t w, std::size_t h, double pa, double pb, int n, std::uint64_t seed) {
        return mask_to_array(sffm_mask(w, h, SffmParams{pa, pb, parse_neighborhood(n), seed}));
      },
      py::arg("width"), py::arg("height"), py::arg("p_a"), py::arg("p_b"), py::arg("neighborhood") = 4,
      py::arg("seed") = kDefaultSeed);
  m.def(
      "sffm_batch",
      [](std::size_t w, std::size_t h, std::size_t count, double lo, double hi, int n, std::uint64_t seed) {
        py::list out;
        for (const auto& s : sffm_batch(w, h, count, lo, hi, parse_neighborhood(n), seed)) {
          py::dict d;
          d["p_a"] = s.params.p_a;
          d["p_b"] = s.params.p_b;
          d["seed"] = s.params.seed;
          d["mask"] = mask_to_array(s.mask);
          out.append(d);
        }
        return out;
      },
      py::arg("width"), py::arg("height"), py::arg("count") = 6, py::arg("prob_low") = 0.1,
      py::arg("prob_high") = 0.9, py::arg("neighborhood") = 4, py::arg("seed") = kDefaultSeed);
  m.def(
      "apply_mask",
      [](const Bytes& a, const Bytes& b, const Bytes& mask) {
        return image_to_array(apply_mask(image_from_array(a), image_from_array(b), mask_from_array(mask)));
      },
      py::arg("image_a"), py::arg("image_b"), py::arg("mask"));
  m.def(
      "region_stats",
      [](const Bytes& mask, int n) {
        const RegionStats s = region_stats(mask_from_array(mask), parse_neighborhood(n));
        return py::make_tuple(s.regions, s.mean_region_size);
      },
      py::arg("mask"), py::arg("neighborhood") = 4);

  m.def(
      "box_iou",
      [](const std::array<double, 4>& a, const std::array<double, 4>& b) {
        return box_iou(BoundingBox(a[0], a[1], a[2], a[3]), BoundingBox(b[0], b[1], b[2], b[3]));
      },
      py::arg("a"), py::arg("b"));
  m.def("coco_thresholds", &coco_thresholds);
  m.def("_evaluate_json", &evaluate_json, py::arg("detections"), py::arg("ground_truth"), py::arg("subgroups"),
        py::arg("thresholds"), py::arg("zero_fill") = false);

  m.def(
      "build_dataset",
      [](const std::filesystem::path& manifest, const std::filesystem::path& out, const std::string& modalities,
         std::size_t sffm_count, std::size_t patch_size, std::uint64_t seed, std::size_t parallelism,
         bool save_masks) {
        BuildOptions options;
        options.out_dir = out;
        options.seed = seed;
        options.policy.seed = seed;
        options.parallelism = parallelism;
        options.plan = ModalityPlan::parse(modalities, sffm_count);
        options.plan.patch_size = patch_size;
        options.plan.save_masks = save_masks;
        options.categories = sunrgbd16();
        BuildSummary s;
        {
          py::gil_scoped_release release;
          s = build_dataset(read_manifest(manifest), options);
        }
        py::dict d;
        d["frames_total"] = s.frames_total;
        d["frames_written"] = s.frames_written;
        d["frames_skipped"] = s.frames_skipped;
        d["images_written"] = s.images_written;
        d["annotations_written"] = s.annotations_written;
        d["failures"] = s.failures;
        return d;
      },
      py::arg("manifest"), py::arg("out_dir"), py::arg("modalities") = "rgb,dhs,cppm", py::arg("sffm_count") = 0,
      py::arg("patch_size") = 1, py::arg("seed") = kDefaultSeed, py::arg("parallelism") = 1,
      py::arg("save_masks") = false);
}
