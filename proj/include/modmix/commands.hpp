#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "modmix/dhs.hpp"
#include "modmix/mixing.hpp"
#include "modmix/rng.hpp"

// Entry points behind the modmix subcommands. Each returns the process exit
// status: 0 iff no per-item failure occurred. Logs go to the log sink, data
// only to files (or stdout where a command documents it).

namespace modmix {

struct ConvertCommand {
  /// OPC1 files, depth PNGs with sidecars, or directories. A directory
  /// contributes its .opc files and the .png files that have a sidecar.
  std::vector<std::filesystem::path> inputs;
  std::optional<std::filesystem::path> depth;
  std::optional<std::filesystem::path> intrinsics;
  std::filesystem::path out_dir;
  DepthMode depth_mode = DepthMode::Range;
  bool write_validity = false;
  std::size_t parallelism = 1;
};

struct ConvertSummary {
  std::size_t converted = 0;
  std::vector<std::string> failures;
  int exit_code() const { return failures.empty() && converted > 0 ? 0 : 1; }
};

/// Each input <stem> becomes <out>/<stem>_dhs.png (and <stem>_valid.png).
ConvertSummary run_convert(const ConvertCommand& cmd);

enum class MixMode { Cppm, Sffm };

struct MixCommand {
  std::optional<std::filesystem::path> rgb;
  std::optional<std::filesystem::path> dhs;
  std::size_t width = 0;   ///< mask-only mode when no images are given
  std::size_t height = 0;
  MixMode mode = MixMode::Cppm;
  std::size_t patch_size = 1;
  Label origin = Label::A;
  std::optional<double> p_a;
  std::optional<double> p_b;
  double prob_low = 0.1;
  double prob_high = 0.9;
  Neighborhood neighborhood = Neighborhood::Four;
  std::uint64_t seed = kDefaultSeed;
  std::size_t count = 1;
  std::filesystem::path out_dir;
  bool save_masks = false;
};

/// Writes mixed_<mode>_<k>.png, masks/mask_<mode>_<k>.png and mix.json
/// (parameters of every output) into out_dir.
int run_mix(const MixCommand& cmd);

struct BuildCommand {
  std::filesystem::path manifest;
  std::optional<std::string> split;  ///< train or val; needs split_file
  std::optional<std::filesystem::path> split_file;
  std::string modalities = "rgb,dhs,cppm";
  std::size_t sffm_count = 0;
  std::size_t patch_size = 1;
  std::string categories = "sunrgbd16";
  std::optional<std::filesystem::path> categories_config;
  DepthMode depth_mode = DepthMode::Range;
  bool save_masks = false;
  std::uint64_t seed = kDefaultSeed;
  std::size_t parallelism = 1;
  std::filesystem::path out_dir;
};

int run_build(const BuildCommand& cmd);

struct EvalCommand {
  std::filesystem::path gt;
  std::filesystem::path dets;
  std::string subgroup = "all";
  std::string thresholds = "coco";  ///< 0.5, 0.75, coco, or a comma separated list
  std::optional<std::filesystem::path> categories_config;
  std::optional<std::size_t> max_detections;
  bool zero_fill_empty = false;
  std::optional<std::filesystem::path> out_json;
  std::optional<std::filesystem::path> out_table;
};

/// Without out paths the text table is printed to stdout.
int run_eval(const EvalCommand& cmd);

/// Parses the --thresholds value.
std::vector<double> parse_thresholds(const std::string& spec);

struct MaskStats {
  std::string file;
  double a_fraction = 0.0;
  std::size_t regions = 0;
  double mean_region_size = 0.0;
};

struct StatsSummary {
  std::vector<MaskStats> masks;
  std::vector<std::string> skipped;
  double mean_a_fraction = 0.0;
  double mean_regions = 0.0;
  std::size_t min_regions = 0;
  std::size_t max_regions = 0;
  double mean_region_size = 0.0;
};

struct StatsCommand {
  std::filesystem::path mask_dir;
  Neighborhood neighborhood = Neighborhood::Four;
  std::optional<std::filesystem::path> out_json;
};

StatsSummary compute_mask_stats(const std::filesystem::path& mask_dir, Neighborhood neighborhood);

/// Summary JSON goes to out_json, or stdout without it.
int run_stats(const StatsCommand& cmd);

}  // namespace modmix
