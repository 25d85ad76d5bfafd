#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "modmix/categories.hpp"
#include "modmix/geometry.hpp"

namespace modmix {

struct Detection {
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  BoundingBox box;
  double score = 0.0;
};

struct GroundTruth {
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  BoundingBox box;
};

/// One detection after greedy matching.
struct MatchedDetection {
  double score = 0.0;
  bool true_positive = false;
};

struct MatchResult {
  std::vector<MatchedDetection> detections;  ///< descending score
  std::size_t gt_count = 0;
  std::size_t matched_gt = 0;

  std::size_t missed() const { return gt_count - matched_gt; }
};

/// Greedy matching, independently within each (image, category) pair.
///
/// Detections are processed in descending score (ties broken by box x, y, w,
/// h so the result does not depend on input order). Each one takes the
/// unmatched ground truth with the highest IoU, lowest index on ties, if that
/// IoU >= iou_threshold; otherwise it is a false positive.
MatchResult match_detections(std::span<const Detection> detections, std::span<const GroundTruth> ground_truth,
                             double iou_threshold);

/// 101-point interpolated AP.
///
/// Operating points are taken after each distinct score level (equal scores
/// enter together), precision at recall r is the maximum precision at any
/// recall >= r, and AP is the mean over r in {0, 0.01, ..., 1}. Returns
/// nullopt when there is neither ground truth nor a detection, and 0 when
/// there is no ground truth but some detection.
std::optional<double> average_precision(const MatchResult& matches);

/// 0.50, 0.55, ..., 0.95
std::vector<double> coco_thresholds();

struct EvalOptions {
  /// Keep at most this many highest-scoring detections per (image, category).
  std::optional<std::size_t> max_detections;
  /// Include categories without ground truth in subgroup means as AP 0
  /// instead of excluding them.
  bool zero_fill_empty = false;
};

struct CategoryInfo {
  std::int64_t id = 0;
  std::string name;
};

struct CategoryResult {
  std::int64_t id = 0;
  std::string name;
  std::size_t gt_count = 0;
  std::size_t detection_count = 0;
  std::vector<std::optional<double>> ap;  ///< per threshold
  std::optional<double> coco_ap;          ///< mean over .50:.05:.95 when all ten were evaluated
};

struct SubgroupResult {
  std::string name;
  std::size_t categories_total = 0;
  std::size_t categories_used = 0;
  std::vector<std::optional<double>> mean_ap;  ///< per threshold
  std::optional<double> map50;
  std::optional<double> map75;
  std::optional<double> map;  ///< COCO mAP over .50:.05:.95
};

struct EvalReport {
  std::vector<double> thresholds;
  std::vector<CategoryResult> categories;
  std::vector<SubgroupResult> subgroups;
  bool zero_fill_empty = false;

  const CategoryResult* category(const std::string& name) const;
  const SubgroupResult* subgroup(const std::string& name) const;

  /// One row per category followed by one summary row per subgroup.
  nlohmann::json to_json() const;
  /// Plain-text table: one column per catalog category, then one mean column
  /// per subgroup; one row per threshold plus a COCO mAP row when available.
  std::string to_text_table() const;
};

/// Per-category AP at each threshold and subgroup means.
///
/// Subgroup members are resolved by name against the catalog; names missing
/// from it contribute nothing. Throws InvalidInput for a detection or ground
/// truth whose category id is not in the catalog, or a score outside [0, 1].
EvalReport evaluate(std::span<const Detection> detections, std::span<const GroundTruth> ground_truth,
                    std::span<const CategoryInfo> catalog, std::span<const CategorySet> subgroups,
                    std::span<const double> thresholds, const EvalOptions& options = {});

}  // namespace modmix
