#include "modmix/commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "modmix/categories.hpp"
#include "modmix/cloud_io.hpp"
#include "modmix/coco.hpp"
#include "modmix/dataset.hpp"
#include "modmix/error.hpp"
#include "modmix/eval.hpp"
#include "modmix/image_io.hpp"
#include "modmix/logging.hpp"
#include "modmix/parallel.hpp"

namespace modmix {

namespace fs = std::filesystem;

namespace {

struct ConvertJob {
  std::string stem;
  fs::path cloud;
  std::optional<fs::path> intrinsics;
};

std::vector<ConvertJob> expand_inputs(const ConvertCommand& cmd) {
  std::vector<ConvertJob> jobs;
  auto add_file = [&](const fs::path& p) {
    if (p.extension() == ".png") {
      jobs.push_back({p.stem().string(), p, intrinsics_sidecar(p)});
    } else {
      jobs.push_back({p.stem().string(), p, std::nullopt});
    }
  };
  for (const auto& input : cmd.inputs) {
    if (fs::is_directory(input)) {
      std::vector<fs::path> entries;
      for (const auto& e : fs::directory_iterator(input)) {
        if (!e.is_regular_file()) continue;
        const auto ext = e.path().extension();
        if (ext == ".opc" || (ext == ".png" && fs::exists(intrinsics_sidecar(e.path())))) entries.push_back(e.path());
      }
      std::sort(entries.begin(), entries.end());
      for (const auto& p : entries) add_file(p);
    } else {
      add_file(input);
    }
  }
  if (cmd.depth) {
    if (!cmd.intrinsics) throw InvalidInput("--depth needs --intrinsics");
    jobs.push_back({cmd.depth->stem().string(), *cmd.depth, *cmd.intrinsics});
  }
  return jobs;
}

}  // namespace

ConvertSummary run_convert(const ConvertCommand& cmd) {
  ConvertSummary summary;
  const auto jobs = expand_inputs(cmd);
  if (jobs.empty()) {
    summary.failures.push_back("no inputs");
    log_event(LogLevel::Error, "convert_no_inputs");
    return summary;
  }
  std::set<std::string> stems;
  for (const auto& j : jobs) {
    if (!stems.insert(j.stem).second) throw InvalidInput("two inputs share the output name '" + j.stem + "'");
  }
  fs::create_directories(cmd.out_dir);

  std::vector<std::string> errors(jobs.size());
  parallel_for(jobs.size(), cmd.parallelism, [&](std::size_t i) {
    const auto& job = jobs[i];
    try {
      const OrganizedPointCloud cloud =
          job.intrinsics ? load_depth_cloud(job.cloud, *job.intrinsics) : read_opc(job.cloud);
      const PseudoImage image = encode_dhs(cloud, DhsOptions{cmd.depth_mode});
      write_rgb_png(cmd.out_dir / (job.stem + "_dhs.png"), to_rgb8(image));
      if (cmd.write_validity) {
        const auto mask = validity_mask8(image);
        write_gray_png(cmd.out_dir / (job.stem + "_valid.png"),
                       GrayImage{image.width, image.height, 8, {mask.begin(), mask.end()}});
      }
      log_event(LogLevel::Debug, "converted", {{"input", job.cloud.string()}});
    } catch (const Error& e) {
      errors[i] = e.what();
      log_event(LogLevel::Error, "convert_failed", {{"input", job.cloud.string()}, {"reason", e.what()}});
    }
  });
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (errors[i].empty()) {
      ++summary.converted;
    } else {
      summary.failures.push_back(jobs[i].cloud.string() + ": " + errors[i]);
    }
  }
  log_event(LogLevel::Info, "convert_summary",
            {{"converted", summary.converted}, {"failed", summary.failures.size()}, {"failures", summary.failures}});
  return summary;
}

int run_mix(const MixCommand& cmd) {
  if (cmd.rgb.has_value() != cmd.dhs.has_value()) throw InvalidInput("--rgb and --dhs must be given together");
  std::optional<RgbImage> rgb;
  std::optional<RgbImage> dhs;
  std::size_t width = cmd.width;
  std::size_t height = cmd.height;
  if (cmd.rgb) {
    rgb = read_rgb_png(*cmd.rgb);
    dhs = read_rgb_png(*cmd.dhs);
    if (rgb->width() != dhs->width() || rgb->height() != dhs->height()) {
      throw InvalidInput("RGB and DHS images differ in size");
    }
    width = rgb->width();
    height = rgb->height();
  }
  if (width == 0 || height == 0) throw InvalidInput("mask-only mode needs --width and --height");
  if (cmd.count == 0) throw InvalidInput("--count must be at least 1");
  const bool save_masks = cmd.save_masks || !rgb;

  std::vector<std::pair<nlohmann::json, MixtureMask>> outputs;
  if (cmd.mode == MixMode::Cppm) {
    outputs.emplace_back(nlohmann::json{{"mode", "cppm"}, {"patch_size", cmd.patch_size},
                                        {"origin", cmd.origin == Label::A ? "rgb" : "dhs"}},
                         cppm_mask(width, height, cmd.patch_size, cmd.origin));
  } else if (cmd.p_a || cmd.p_b) {
    if (!(cmd.p_a && cmd.p_b)) throw InvalidInput("--p-a and --p-b must be given together");
    Rng rng(cmd.seed);
    for (std::size_t k = 0; k < cmd.count; ++k) {
      SffmParams params{*cmd.p_a, *cmd.p_b, cmd.neighborhood, rng.next()};
      outputs.emplace_back(nlohmann::json{{"mode", "sffm"}, {"p_a", params.p_a}, {"p_b", params.p_b},
                                          {"neighborhood", static_cast<int>(params.neighborhood)},
                                          {"seed", params.seed}},
                           sffm_mask(width, height, params));
    }
  } else {
    for (auto& s : sffm_batch(width, height, cmd.count, cmd.prob_low, cmd.prob_high, cmd.neighborhood, cmd.seed)) {
      outputs.emplace_back(nlohmann::json{{"mode", "sffm"}, {"p_a", s.params.p_a}, {"p_b", s.params.p_b},
                                          {"neighborhood", static_cast<int>(s.params.neighborhood)},
                                          {"seed", s.params.seed}},
                           std::move(s.mask));
    }
  }

  fs::create_directories(cmd.out_dir);
  if (save_masks) fs::create_directories(cmd.out_dir / "masks");
  const std::string mode = cmd.mode == MixMode::Cppm ? "cppm" : "sffm";
  nlohmann::json manifest = {{"root_seed", cmd.seed}, {"width", width}, {"height", height}, {"outputs", nlohmann::json::array()}};
  for (std::size_t k = 0; k < outputs.size(); ++k) {
    auto& [params, mask] = outputs[k];
    const std::string name = mode + "_" + std::to_string(k) + ".png";
    if (rgb) {
      write_rgb_png(cmd.out_dir / ("mixed_" + name), apply_mask(*rgb, *dhs, mask));
      params["image"] = "mixed_" + name;
    }
    if (save_masks) {
      write_mask_png(cmd.out_dir / "masks" / ("mask_" + name), mask);
      params["mask"] = "masks/mask_" + name;
    }
    params["a_fraction"] = mask.a_fraction();
    manifest["outputs"].push_back(params);
  }
  write_json_file(cmd.out_dir / "mix.json", manifest);
  log_event(LogLevel::Info, "mix_complete", {{"mode", mode}, {"outputs", outputs.size()}});
  return 0;
}

int run_build(const BuildCommand& cmd) {
  std::vector<CategorySet> configured;
  if (cmd.categories_config) configured = load_category_config(*cmd.categories_config);
  const auto subgroups = make_subgroups(configured);
  auto categories = find_subgroup(subgroups, cmd.categories);
  if (!categories) throw InvalidInput("unknown category set '" + cmd.categories + "'");

  std::vector<FrameRecord> frames = read_manifest(cmd.manifest);
  if (cmd.split) {
    if (!cmd.split_file) throw InvalidInput("--split needs --split-file");
    const SplitResult split = split_manifest(frames, read_split_spec(*cmd.split_file));
    log_event(LogLevel::Info, "split", {{"train", split.train.size()}, {"val", split.val.size()}});
    if (*cmd.split == "train") frames = split.train;
    else if (*cmd.split == "val") frames = split.val;
    else throw InvalidInput("--split must be train or val");
  }

  BuildOptions options;
  options.out_dir = cmd.out_dir;
  options.seed = cmd.seed;
  options.parallelism = cmd.parallelism;
  options.policy.seed = cmd.seed;
  options.plan = ModalityPlan::parse(cmd.modalities, cmd.sffm_count);
  options.plan.patch_size = cmd.patch_size;
  options.plan.save_masks = cmd.save_masks;
  options.categories = *categories;
  options.dhs.depth_mode = cmd.depth_mode;
  const BuildSummary summary = build_dataset(frames, options);
  return summary.frames_skipped == 0 ? 0 : 1;
}

std::vector<double> parse_thresholds(const std::string& spec) {
  if (spec == "coco") return coco_thresholds();
  std::vector<double> out;
  std::stringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const double t = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(t);
    } catch (const std::exception&) {
      throw InvalidInput("bad IoU threshold '" + item + "'");
    }
  }
  if (out.empty()) throw InvalidInput("no IoU thresholds given");
  return out;
}

int run_eval(const EvalCommand& cmd) {
  const CocoDocument gt = read_coco(cmd.gt);
  const std::vector<Detection> dets = read_detections(cmd.dets);
  std::vector<CategorySet> configured;
  if (cmd.categories_config) configured = load_category_config(*cmd.categories_config);
  const auto all = make_subgroups(configured);
  std::vector<CategorySet> selected;
  if (cmd.subgroup == "all") {
    selected = all;
  } else if (auto s = find_subgroup(all, cmd.subgroup)) {
    selected.push_back(*s);
  } else {
    throw InvalidInput("subgroup '" + cmd.subgroup + "' is not available (sunrgbd66/79 need --categories-config)");
  }

  const auto thresholds = parse_thresholds(cmd.thresholds);
  EvalOptions options;
  options.max_detections = cmd.max_detections;
  options.zero_fill_empty = cmd.zero_fill_empty;
  const EvalReport report = evaluate(dets, gt.ground_truth(), gt.categories, selected, thresholds, options);

  if (cmd.out_json) write_json_file(*cmd.out_json, report.to_json());
  if (cmd.out_table) {
    std::ofstream out(*cmd.out_table, std::ios::trunc);
    out << report.to_text_table();
    if (!out) throw FormatError("cannot write " + cmd.out_table->string());
  }
  if (!cmd.out_json && !cmd.out_table) std::cout << report.to_text_table();
  nlohmann::json summary = nlohmann::json::object();
  for (const auto& s : report.subgroups) {
    summary[s.name] = {{"map50", s.map50 ? nlohmann::json(*s.map50) : nlohmann::json(nullptr)},
                       {"map75", s.map75 ? nlohmann::json(*s.map75) : nlohmann::json(nullptr)},
                       {"map", s.map ? nlohmann::json(*s.map) : nlohmann::json(nullptr)}};
  }
  log_event(LogLevel::Info, "eval_complete", {{"detections", dets.size()}, {"subgroups", summary}});
  return 0;
}

StatsSummary compute_mask_stats(const fs::path& mask_dir, Neighborhood neighborhood) {
  if (!fs::is_directory(mask_dir)) throw InvalidInput(mask_dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(mask_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  StatsSummary summary;
  for (const auto& f : files) {
    try {
      const MixtureMask mask = read_mask_png(f);
      const RegionStats rs = region_stats(mask, neighborhood);
      summary.masks.push_back({f.filename().string(), mask.a_fraction(), rs.regions, rs.mean_region_size});
    } catch (const Error& e) {
      summary.skipped.push_back(f.filename().string() + ": " + e.what());
      log_event(LogLevel::Warn, "mask_skipped", {{"file", f.string()}, {"reason", e.what()}});
    }
  }
  if (!summary.masks.empty()) {
    summary.min_regions = summary.masks.front().regions;
    double fa = 0.0, rg = 0.0, sz = 0.0;
    for (const auto& m : summary.masks) {
      fa += m.a_fraction;
      rg += static_cast<double>(m.regions);
      sz += m.mean_region_size;
      summary.min_regions = std::min(summary.min_regions, m.regions);
      summary.max_regions = std::max(summary.max_regions, m.regions);
    }
    const auto n = static_cast<double>(summary.masks.size());
    summary.mean_a_fraction = fa / n;
    summary.mean_regions = rg / n;
    summary.mean_region_size = sz / n;
  }
  return summary;
}

int run_stats(const StatsCommand& cmd) {
  const StatsSummary s = compute_mask_stats(cmd.mask_dir, cmd.neighborhood);
  nlohmann::json masks = nlohmann::json::array();
  for (const auto& m : s.masks) {
    masks.push_back({{"file", m.file},
                     {"a_fraction", m.a_fraction},
                     {"regions", m.regions},
                     {"mean_region_size", m.mean_region_size}});
  }
  nlohmann::json doc = {{"masks", masks},
                        {"skipped", s.skipped},
                        {"aggregate",
                         {{"count", s.masks.size()},
                          {"mean_a_fraction", s.mean_a_fraction},
                          {"mean_regions", s.mean_regions},
                          {"min_regions", s.min_regions},
                          {"max_regions", s.max_regions},
                          {"mean_region_size", s.mean_region_size}}}};
  if (cmd.out_json) {
    write_json_file(*cmd.out_json, doc);
  } else {
    std::cout << doc.dump(2) << '\n';
  }
  return s.skipped.empty() ? 0 : 1;
}

}  // namespace modmix
