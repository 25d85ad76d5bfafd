// modmix: DHS encoding, modality mixing, dataset building and AP evaluation.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "modmix/commands.hpp"
#include "modmix/error.hpp"
#include "modmix/logging.hpp"
#include "modmix/parallel.hpp"

namespace {

const std::map<std::string, modmix::DepthMode> kDepthModes = {{"range", modmix::DepthMode::Range},
                                                              {"forward", modmix::DepthMode::Forward}};
const std::map<std::string, modmix::Neighborhood> kNeighborhoods = {{"4", modmix::Neighborhood::Four},
                                                                    {"8", modmix::Neighborhood::Eight}};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DHS pseudo-image encoding, inter-modality mixing, dataset building and detection evaluation"};
  app.set_version_flag("--version", std::string("modmix ") + MODMIX_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = modmix::kDefaultSeed;
  std::size_t parallelism = modmix::default_parallelism();
  std::string log_level = "info";
  app.add_option("--seed", seed, "Root seed for every random draw")->capture_default_str();
  app.add_option("-j,--parallelism", parallelism, "Worker threads (env MODMIX_PARALLELISM)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--log-level", log_level, "debug, info, warn, error or off")
      ->check(CLI::IsMember({"debug", "info", "warn", "error", "off"}))
      ->capture_default_str();

  auto version = [](CLI::App* sub) { sub->set_version_flag("--version", std::string("modmix ") + MODMIX_VERSION); };

  // convert
  modmix::ConvertCommand convert;
  std::string convert_out;
  auto* convert_cmd = app.add_subcommand("convert", "Encode organized point clouds as DHS PNG images");
  version(convert_cmd);
  convert_cmd->add_option("inputs", convert.inputs, "OPC1 files, depth PNGs with .intrinsics.txt sidecars, or directories");
  auto* depth_opt = convert_cmd->add_option("--depth", convert.depth, "16-bit depth PNG in millimeters");
  convert_cmd->add_option("--intrinsics", convert.intrinsics, "3x3 intrinsics matrix text file")->needs(depth_opt);
  convert_cmd->add_option("--out", convert_out, "Output directory")->required();
  convert_cmd->add_option("--depth-mode", convert.depth_mode, "range or forward")
      ->transform(CLI::CheckedTransformer(kDepthModes, CLI::ignore_case));
  convert_cmd->add_flag("--validity", convert.write_validity, "Also write <stem>_valid.png");

  // mix
  modmix::MixCommand mix;
  std::string mix_mode = "cppm";
  std::string mix_out;
  std::string origin = "rgb";
  auto* mix_cmd = app.add_subcommand("mix", "Generate CPPM or SFFM mixture masks and mixed images");
  version(mix_cmd);
  mix_cmd->add_option("--rgb", mix.rgb, "RGB image (first modality)");
  mix_cmd->add_option("--dhs", mix.dhs, "DHS image (second modality)");
  mix_cmd->add_option("--width", mix.width, "Mask width when no images are given");
  mix_cmd->add_option("--height", mix.height, "Mask height when no images are given");
  mix_cmd->add_option("--mode", mix_mode, "cppm or sffm")->check(CLI::IsMember({"cppm", "sffm"}))->capture_default_str();
  mix_cmd->add_option("--patch-size", mix.patch_size, "CPPM patch size in pixels")->check(CLI::PositiveNumber)->capture_default_str();
  mix_cmd->add_option("--origin", origin, "Modality of CPPM patch (0, 0): rgb or dhs")
      ->check(CLI::IsMember({"rgb", "dhs"}))
      ->capture_default_str();
  mix_cmd->add_option("--p-a", mix.p_a, "SFFM edge probability for the RGB label")->check(CLI::Range(0.0, 1.0));
  mix_cmd->add_option("--p-b", mix.p_b, "SFFM edge probability for the DHS label")->check(CLI::Range(0.0, 1.0));
  mix_cmd->add_option("--prob-low", mix.prob_low, "Lower bound when sampling SFFM probabilities")->capture_default_str();
  mix_cmd->add_option("--prob-high", mix.prob_high, "Upper bound when sampling SFFM probabilities")->capture_default_str();
  mix_cmd->add_option("--neighborhood", mix.neighborhood, "4 or 8")
      ->transform(CLI::CheckedTransformer(kNeighborhoods));
  mix_cmd->add_option("--count", mix.count, "Number of SFFM masks")->check(CLI::PositiveNumber)->capture_default_str();
  mix_cmd->add_option("--out", mix_out, "Output directory")->required();
  mix_cmd->add_flag("--save-masks", mix.save_masks, "Write 1-bit mask PNGs");

  // build
  modmix::BuildCommand build;
  std::string build_out;
  auto* build_cmd = app.add_subcommand("build", "Build a multi-modality detection dataset with COCO annotations");
  version(build_cmd);
  build_cmd->add_option("--manifest", build.manifest, "Frame manifest")->required()->check(CLI::ExistingFile);
  build_cmd->add_option("--split", build.split, "train or val")->check(CLI::IsMember({"train", "val"}));
  build_cmd->add_option("--split-file", build.split_file, "JSON {\"train\": [...], \"val\": [...]}")->check(CLI::ExistingFile);
  build_cmd->add_option("--modalities", build.modalities, "Comma list of rgb, dhs, cppm, sffm")->capture_default_str();
  build_cmd->add_option("--sffm-count", build.sffm_count, "SFFM images per frame (default 6 when sffm is listed)");
  build_cmd->add_option("--patch-size", build.patch_size, "CPPM patch size")->check(CLI::PositiveNumber)->capture_default_str();
  build_cmd->add_option("--categories", build.categories, "Category set written to the COCO document")->capture_default_str();
  build_cmd->add_option("--categories-config", build.categories_config, "JSON with sunrgbd66/sunrgbd79 lists")
      ->check(CLI::ExistingFile);
  build_cmd->add_option("--depth-mode", build.depth_mode, "range or forward")
      ->transform(CLI::CheckedTransformer(kDepthModes, CLI::ignore_case));
  build_cmd->add_flag("--save-masks", build.save_masks, "Write mixture masks under <out>/masks");
  build_cmd->add_option("--out", build_out, "Output directory")->required();

  // eval
  modmix::EvalCommand eval;
  auto* eval_cmd = app.add_subcommand("eval", "Per-category AP and subgroup mAP for COCO-format detections");
  version(eval_cmd);
  eval_cmd->add_option("--gt", eval.gt, "COCO ground-truth document")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--dets", eval.dets, "COCO results array")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--subgroup", eval.subgroup, "sunrgbd10, sunrgbd16, sunrgbd66, sunrgbd79 or all")
      ->capture_default_str();
  eval_cmd->add_option("--thresholds", eval.thresholds, "0.5, 0.75, coco, or a comma list")->capture_default_str();
  eval_cmd->add_option("--categories-config", eval.categories_config, "JSON with sunrgbd66/sunrgbd79 lists")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--max-dets", eval.max_detections, "Cap detections per image and category");
  eval_cmd->add_flag("--zero-fill", eval.zero_fill_empty, "Count categories without ground truth as AP 0");
  eval_cmd->add_option("--out", eval.out_json, "Write the report as JSON");
  eval_cmd->add_option("--table", eval.out_table, "Write the text table");

  // stats
  modmix::StatsCommand stats;
  auto* stats_cmd = app.add_subcommand("stats", "Label balance and region structure of mask PNGs");
  version(stats_cmd);
  stats_cmd->add_option("masks", stats.mask_dir, "Directory of mask PNGs")->required();
  stats_cmd->add_option("--neighborhood", stats.neighborhood, "4 or 8")
      ->transform(CLI::CheckedTransformer(kNeighborhoods));
  stats_cmd->add_option("--out", stats.out_json, "Write the summary JSON here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  modmix::set_log_level(modmix::parse_log_level(log_level));
  try {
    if (*convert_cmd) {
      convert.out_dir = convert_out;
      convert.parallelism = parallelism;
      return modmix::run_convert(convert).exit_code();
    }
    if (*mix_cmd) {
      mix.out_dir = mix_out;
      mix.seed = seed;
      mix.mode = mix_mode == "cppm" ? modmix::MixMode::Cppm : modmix::MixMode::Sffm;
      mix.origin = origin == "rgb" ? modmix::Label::A : modmix::Label::B;
      return modmix::run_mix(mix);
    }
    if (*build_cmd) {
      build.out_dir = build_out;
      build.seed = seed;
      build.parallelism = parallelism;
      return modmix::run_build(build);
    }
    if (*eval_cmd) return modmix::run_eval(eval);
    if (*stats_cmd) return modmix::run_stats(stats);
  } catch (const modmix::Error& e) {
    modmix::log_event(modmix::LogLevel::Error, "fatal", {{"reason", e.what()}});
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    modmix::log_event(modmix::LogLevel::Error, "fatal", {{"reason", e.what()}});
    return 2;
  }
  return 1;
}
