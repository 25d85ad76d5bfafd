#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "modmix/augment.hpp"
#include "modmix/categories.hpp"
#include "modmix/coco.hpp"
#include "modmix/dhs.hpp"
#include "modmix/geometry.hpp"
#include "modmix/mixing.hpp"

namespace modmix {

/// One manifest line: frame id, RGB path, cloud path, annotation path.
struct FrameRecord {
  std::string id;
  std::filesystem::path rgb;
  std::filesystem::path cloud;
  std::filesystem::path annotations;

  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

/// Manifest: one frame per line, four whitespace or tab separated fields
///   <frame id> <rgb png> <cloud (OPC1 or depth png)> <annotation json>
/// Blank lines and lines starting with '#' are ignored; relative paths are
/// resolved against the manifest's directory. Frame ids may contain only
/// [A-Za-z0-9._-] and must be unique.
std::vector<FrameRecord> read_manifest(const std::filesystem::path& path);

struct SplitSpec {
  std::vector<std::string> train;
  std::vector<std::string> val;
};

/// {"train": [ids...], "val": [ids...]}
SplitSpec read_split_spec(const std::filesystem::path& path);

struct SplitResult {
  std::vector<FrameRecord> train;
  std::vector<FrameRecord> val;
};

/// Partitions frames by id. When the train list is empty every frame not in
/// val is train. Throws InvalidInput for ids listed in both splits, listed
/// twice, or absent from the frames. Order follows the frames.
SplitResult split_manifest(const std::vector<FrameRecord>& frames, const SplitSpec& spec);

struct FramePair {
  std::string id;
  RgbImage rgb;
  OrganizedPointCloud cloud;
  std::vector<Annotation> annotations;
};

/// Per-frame annotation file: JSON array of {"category": name, "bbox": [x, y, w, h]}.
/// Categories outside `categories` are dropped; boxes are clipped to the
/// image, dropping those under 1 px^2. Category ids are 1-based positions in
/// `categories`. Throws FormatError if a file is unreadable and
/// InvalidInput if the RGB image and cloud grids differ in size.
FramePair load_frame(const FrameRecord& record, const CategorySet& categories);

struct ModalityPlan {
  bool rgb = true;
  bool dhs = true;
  bool cppm = false;
  std::size_t sffm_count = 0;
  std::size_t patch_size = 1;
  Label cppm_origin = Label::A;
  double sffm_prob_low = 0.1;
  double sffm_prob_high = 0.9;
  Neighborhood neighborhood = Neighborhood::Four;
  bool save_masks = false;

  /// Comma separated subset of rgb, dhs, cppm, sffm. sffm uses sffm_count
  /// (defaulting to 6 when the list names it and the count is 0).
  static ModalityPlan parse(const std::string& list, std::size_t sffm_count = 0);
  std::size_t images_per_frame() const;
  void validate() const;
};

struct BuildOptions {
  std::filesystem::path out_dir;
  std::uint64_t seed = kDefaultSeed;
  std::size_t parallelism = 1;
  AugmentationPolicy policy;
  ModalityPlan plan;
  CategorySet categories;
  DhsOptions dhs;
};

struct BuildSummary {
  std::size_t frames_total = 0;
  std::size_t frames_written = 0;
  std::size_t frames_skipped = 0;
  std::size_t images_written = 0;
  std::size_t annotations_written = 0;
  std::vector<std::string> failures;  ///< "<frame id>: <reason>", manifest order
};

/// Writes, for each frame, the planned modality images under
/// <out>/images/<frame>_<modality>[_<k>].png (optional masks under
/// <out>/masks/), a merged COCO document <out>/annotations.json and the
/// recorded policy in <out>/build.json. Unreadable or misaligned frames are
/// skipped and reported. Output bytes depend only on the frames, options and
/// seed, never on parallelism. Augmentation is not applied here; the policy
/// is recorded for the trainer.
BuildSummary build_dataset(const std::vector<FrameRecord>& frames, const BuildOptions& options);

}  // namespace modmix
