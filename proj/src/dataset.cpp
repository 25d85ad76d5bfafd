#include "modmix/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "modmix/cloud_io.hpp"
#include "modmix/error.hpp"
#include "modmix/image_io.hpp"
#include "modmix/logging.hpp"
#include "modmix/parallel.hpp"
#include "modmix/rng.hpp"

namespace modmix {

namespace fs = std::filesystem;

namespace {

bool valid_frame_id(const std::string& id) {
  return !id.empty() && std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '.' || c == '_' || c == '-';
  });
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

struct EmittedImage {
  std::string file_name;
  std::size_t width = 0;
  std::size_t height = 0;
  Provenance provenance;
};

struct FrameOutput {
  bool ok = false;
  std::string error;
  std::vector<EmittedImage> images;
  std::vector<Annotation> annotations;
};

FrameOutput process_frame(const FrameRecord& record, const BuildOptions& options) {
  FrameOutput out;
  FramePair frame = load_frame(record, options.categories);
  const ModalityPlan& plan = options.plan;
  const fs::path image_dir = options.out_dir / "images";
  const fs::path mask_dir = options.out_dir / "masks";
  const std::uint64_t frame_seed = derive_seed(options.seed, frame.id);

  auto emit = [&](const RgbImage& image, const std::string& suffix, Provenance provenance) {
    const std::string name = frame.id + "_" + suffix + ".png";
    write_rgb_png(image_dir / name, image);
    out.images.push_back({"images/" + name, image.width(), image.height(), std::move(provenance)});
  };

  const bool need_dhs = plan.dhs || plan.cppm || plan.sffm_count > 0;
  RgbImage dhs;
  if (need_dhs) dhs = to_rgb8(encode_dhs(frame.cloud, options.dhs));

  if (plan.rgb) emit(frame.rgb, "rgb", {frame.id, "rgb", {}, {}, {}, {}});
  if (plan.dhs) emit(dhs, "dhs", {frame.id, "dhs", {}, {}, {}, {}});
  if (plan.cppm) {
    const MixtureMask mask = cppm_mask(frame.rgb.width(), frame.rgb.height(), plan.patch_size, plan.cppm_origin);
    emit(apply_mask(frame.rgb, dhs, mask), "cppm", {frame.id, "cppm", plan.patch_size, {}, {}, {}});
    if (plan.save_masks) write_mask_png(mask_dir / (frame.id + "_cppm.png"), mask);
  }
  if (plan.sffm_count > 0) {
    const auto samples = sffm_batch(frame.rgb.width(), frame.rgb.height(), plan.sffm_count, plan.sffm_prob_low,
                                    plan.sffm_prob_high, plan.neighborhood, frame_seed);
    for (std::size_t k = 0; k < samples.size(); ++k) {
      const auto& s = samples[k];
      const std::string suffix = "sffm_" + std::to_string(k);
      emit(apply_mask(frame.rgb, dhs, s.mask), suffix, {frame.id, "sffm", {}, s.params.p_a, s.params.p_b, s.params.seed});
      if (plan.save_masks) write_mask_png(mask_dir / (frame.id + "_" + suffix + ".png"), s.mask);
    }
  }
  out.annotations = std::move(frame.annotations);
  out.ok = true;
  return out;
}

nlohmann::json policy_json(const AugmentationPolicy& p) {
  return {{"flip_probability", p.flip_probability},
          {"resize_target_width", p.resize_target_width},
          {"resize_target_heights", p.resize_target_heights},
          {"crop_size", {p.crop_height, p.crop_width}},
          {"test_resize", {p.test_width, p.test_height}},
          {"seed", p.seed}};
}

nlohmann::json plan_json(const ModalityPlan& p) {
  return {{"rgb", p.rgb},
          {"dhs", p.dhs},
          {"cppm", p.cppm},
          {"sffm_count", p.sffm_count},
          {"patch_size", p.patch_size},
          {"cppm_origin", p.cppm_origin == Label::A ? "rgb" : "dhs"},
          {"sffm_prob_range", {p.sffm_prob_low, p.sffm_prob_high}},
          {"neighborhood", static_cast<int>(p.neighborhood)},
          {"save_masks", p.save_masks}};
}

}  // namespace

std::vector<FrameRecord> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open manifest " + path.string());
  const fs::path base = path.parent_path();
  std::vector<FrameRecord> frames;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::string id, rgb, cloud, ann, extra;
    if (!(fields >> id >> rgb >> cloud >> ann) || (fields >> extra)) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected four fields");
    }
    if (!valid_frame_id(id)) throw FormatError(path.string() + ":" + std::to_string(line_no) + ": bad frame id '" + id + "'");
    if (!ids.insert(id).second) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": duplicate frame id '" + id + "'");
    }
    frames.push_back({id, resolve(base, rgb), resolve(base, cloud), resolve(base, ann)});
  }
  return frames;
}

SplitSpec read_split_spec(const fs::path& path) {
  const nlohmann::json doc = read_json_file(path);
  SplitSpec spec;
  try {
    if (doc.contains("train")) spec.train = doc.at("train").get<std::vector<std::string>>();
    if (doc.contains("val")) spec.val = doc.at("val").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError(path.string() + ": 'train' and 'val' must be lists of frame ids");
  }
  return spec;
}

SplitResult split_manifest(const std::vector<FrameRecord>& frames, const SplitSpec& spec) {
  std::set<std::string> known;
  for (const auto& f : frames) known.insert(f.id);
  std::set<std::string> train;
  std::set<std::string> val;
  for (const auto& [list, target, name] :
       {std::tuple{&spec.train, &train, "train"}, std::tuple{&spec.val, &val, "val"}}) {
    for (const auto& id : *list) {
      if (!known.count(id)) throw InvalidInput(std::string(name) + " split lists unknown frame '" + id + "'");
      if (!target->insert(id).second) throw InvalidInput(std::string(name) + " split lists '" + id + "' twice");
    }
  }
  for (const auto& id : val) {
    if (train.count(id)) throw InvalidInput("frame '" + id + "' is listed in both train and val");
  }
  SplitResult out;
  for (const auto& f : frames) {
    if (val.count(f.id)) {
      out.val.push_back(f);
    } else if (spec.train.empty() || train.count(f.id)) {
      out.train.push_back(f);
    }
  }
  return out;
}

FramePair load_frame(const FrameRecord& record, const CategorySet& categories) {
  FramePair frame;
  frame.id = record.id;
  frame.rgb = read_rgb_png(record.rgb);
  frame.cloud = load_cloud(record.cloud);
  if (frame.rgb.width() != frame.cloud.width() || frame.rgb.height() != frame.cloud.height()) {
    throw InvalidInput("RGB image is " + std::to_string(frame.rgb.width()) + "x" + std::to_string(frame.rgb.height()) +
                       " but the cloud grid is " + std::to_string(frame.cloud.width()) + "x" +
                       std::to_string(frame.cloud.height()));
  }
  const nlohmann::json doc = read_json_file(record.annotations);
  if (!doc.is_array()) throw FormatError(record.annotations.string() + ": expected an array of annotations");
  for (const auto& j : doc) {
    std::string name;
    std::vector<double> b;
    try {
      name = j.at("category").get<std::string>();
      b = j.at("bbox").get<std::vector<double>>();
    } catch (const nlohmann::json::exception&) {
      throw FormatError(record.annotations.string() + ": each annotation needs 'category' and 'bbox'");
    }
    if (b.size() != 4) throw FormatError(record.annotations.string() + ": bbox must be [x, y, w, h]");
    auto it = std::find(categories.categories.begin(), categories.categories.end(), name);
    if (it == categories.categories.end()) continue;
    if (!(b[2] > 0.0 && b[3] > 0.0)) continue;
    const auto id = static_cast<std::int64_t>(it - categories.categories.begin()) + 1;
    try {
      if (auto clipped = clip_box(BoundingBox(b[0], b[1], b[2], b[3]), static_cast<double>(frame.rgb.width()),
                                  static_cast<double>(frame.rgb.height()))) {
        frame.annotations.push_back({id, *clipped});
      }
    } catch (const InvalidInput& e) {
      throw FormatError(record.annotations.string() + ": " + e.what());
    }
  }
  return frame;
}

ModalityPlan ModalityPlan::parse(const std::string& list, std::size_t sffm_count) {
  ModalityPlan plan;
  plan.rgb = plan.dhs = plan.cppm = false;
  plan.sffm_count = 0;
  std::stringstream in(list);
  std::string item;
  bool any = false;
  while (std::getline(in, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }), item.end());
    std::transform(item.begin(), item.end(), item.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (item.empty()) continue;
    any = true;
    if (item == "rgb") plan.rgb = true;
    else if (item == "dhs") plan.dhs = true;
    else if (item == "cppm") plan.cppm = true;
    else if (item == "sffm") plan.sffm_count = sffm_count ? sffm_count : 6;
    else throw InvalidInput("unknown modality '" + item + "'");
  }
  if (!any) throw InvalidInput("modality list is empty");
  return plan;
}

std::size_t ModalityPlan::images_per_frame() const {
  return static_cast<std::size_t>(rgb) + static_cast<std::size_t>(dhs) + static_cast<std::size_t>(cppm) + sffm_count;
}

void ModalityPlan::validate() const {
  if (images_per_frame() == 0) throw InvalidInput("modality plan produces no images");
  if (patch_size == 0) throw InvalidInput("patch size must be at least 1");
  if (sffm_count > 0 && !(sffm_prob_low > 0.0 && sffm_prob_low <= sffm_prob_high && sffm_prob_high <= 1.0)) {
    throw InvalidInput("SFFM probability range must satisfy 0 < low <= high <= 1");
  }
}

BuildSummary build_dataset(const std::vector<FrameRecord>& frames, const BuildOptions& options) {
  options.plan.validate();
  options.policy.validate();
  options.categories.validate();
  if (options.out_dir.empty()) throw InvalidInput("output directory is required");
  fs::create_directories(options.out_dir / "images");
  if (options.plan.save_masks) fs::create_directories(options.out_dir / "masks");

  std::vector<FrameOutput> outputs(frames.size());
  parallel_for(frames.size(), options.parallelism, [&](std::size_t i) {
    try {
      outputs[i] = process_frame(frames[i], options);
    } catch (const Error& e) {
      outputs[i].ok = false;
      outputs[i].error = e.what();
      log_event(LogLevel::Warn, "frame_skipped", {{"frame", frames[i].id}, {"reason", e.what()}});
    }
  });

  BuildSummary summary;
  summary.frames_total = frames.size();
  CocoDocument doc;
  for (std::size_t c = 0; c < options.categories.categories.size(); ++c) {
    doc.categories.push_back({static_cast<std::int64_t>(c) + 1, options.categories.categories[c]});
  }
  std::int64_t next_image = 1;
  std::int64_t next_annotation = 1;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    FrameOutput& out = outputs[i];
    if (!out.ok) {
      ++summary.frames_skipped;
      summary.failures.push_back(frames[i].id + ": " + out.error);
      continue;
    }
    ++summary.frames_written;
    for (auto& im : out.images) {
      const std::int64_t image_id = next_image++;
      doc.images.push_back({image_id, im.file_name, im.width, im.height, std::move(im.provenance)});
      for (const auto& a : out.annotations) {
        doc.annotations.push_back({next_annotation++, image_id, a.category_id, a.box, a.box.area(), 0});
      }
    }
  }
  summary.images_written = doc.images.size();
  summary.annotations_written = doc.annotations.size();
  write_coco(options.out_dir / "annotations.json", doc);

  nlohmann::json build = {{"seed", options.seed},
                          {"categories", options.categories.name},
                          {"depth_mode", options.dhs.depth_mode == DepthMode::Range ? "range" : "forward"},
                          {"plan", plan_json(options.plan)},
                          {"augmentation", policy_json(options.policy)},
                          {"summary",
                           {{"frames_total", summary.frames_total},
                            {"frames_written", summary.frames_written},
                            {"frames_skipped", summary.frames_skipped},
                            {"images_written", summary.images_written},
                            {"annotations_written", summary.annotations_written},
                            {"failures", summary.failures}}}};
  write_json_file(options.out_dir / "build.json", build);
  log_event(LogLevel::Info, "build_complete",
            {{"frames", summary.frames_total},
             {"skipped", summary.frames_skipped},
             {"images", summary.images_written},
             {"out", options.out_dir.string()}});
  return summary;
}

}  // namespace modmix
