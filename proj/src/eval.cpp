#include "modmix/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>
#include <unordered_map>

#include "modmix/error.hpp"

namespace modmix {

namespace {

using GroupKey = std::pair<std::int64_t, std::int64_t>;  // (image, category)

auto box_key(const BoundingBox& b) { return std::make_tuple(b.x(), b.y(), b.w(), b.h()); }

bool detection_before(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  return box_key(a.box) < box_key(b.box);
}

bool near(double a, double b) { return std::abs(a - b) < 1e-9; }

std::optional<std::size_t> threshold_index(std::span<const double> thresholds, double t) {
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (near(thresholds[i], t)) return i;
  }
  return std::nullopt;
}

std::optional<double> mean_of(const std::vector<double>& values) {
  if (values.empty()) return std::nullopt;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

MatchResult match_impl(std::span<const Detection> detections, std::span<const GroundTruth> ground_truth,
                       double iou_threshold, std::optional<std::size_t> max_detections) {
  std::map<GroupKey, std::pair<std::vector<const Detection*>, std::vector<const GroundTruth*>>> groups;
  for (const auto& d : detections) groups[{d.image_id, d.category_id}].first.push_back(&d);
  for (const auto& g : ground_truth) groups[{g.image_id, g.category_id}].second.push_back(&g);

  MatchResult result;
  result.gt_count = ground_truth.size();
  for (auto& [key, group] : groups) {
    auto& [dets, gts] = group;
    std::sort(dets.begin(), dets.end(), [](const Detection* a, const Detection* b) { return detection_before(*a, *b); });
    std::stable_sort(gts.begin(), gts.end(),
                     [](const GroundTruth* a, const GroundTruth* b) { return box_key(a->box) < box_key(b->box); });
    if (max_detections && dets.size() > *max_detections) dets.resize(*max_detections);

    std::vector<bool> taken(gts.size(), false);
    for (const Detection* d : dets) {
      double best = -1.0;
      std::size_t best_index = gts.size();
      for (std::size_t g = 0; g < gts.size(); ++g) {
        if (taken[g]) continue;
        const double iou = box_iou(d->box, gts[g]->box);
        if (iou > best) {
          best = iou;
          best_index = g;
        }
      }
      const bool tp = best_index < gts.size() && best >= iou_threshold;
      if (tp) {
        taken[best_index] = true;
        ++result.matched_gt;
      }
      result.detections.push_back({d->score, tp});
    }
  }
  std::stable_sort(result.detections.begin(), result.detections.end(),
                   [](const MatchedDetection& a, const MatchedDetection& b) { return a.score > b.score; });
  return result;
}

std::string threshold_label(double t) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", t);
  return buf;
}

}  // namespace

MatchResult match_detections(std::span<const Detection> detections, std::span<const GroundTruth> ground_truth,
                             double iou_threshold) {
  return match_impl(detections, ground_truth, iou_threshold, std::nullopt);
}

std::optional<double> average_precision(const MatchResult& matches) {
  if (matches.gt_count == 0) {
    if (matches.detections.empty()) return std::nullopt;
    return 0.0;
  }
  std::vector<MatchedDetection> dets = matches.detections;
  std::stable_sort(dets.begin(), dets.end(),
                   [](const MatchedDetection& a, const MatchedDetection& b) { return a.score > b.score; });

  struct Point {
    std::size_t tp;
    double precision;
  };
  std::vector<Point> points;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    (dets[i].true_positive ? tp : fp) += 1;
    if (i + 1 == dets.size() || dets[i + 1].score != dets[i].score) {
      points.push_back({tp, static_cast<double>(tp) / static_cast<double>(tp + fp)});
    }
  }
  // Precision envelope: best precision at this or any higher recall.
  for (std::size_t i = points.size(); i-- > 1;) {
    points[i - 1].precision = std::max(points[i - 1].precision, points[i].precision);
  }

  const std::size_t n = matches.gt_count;
  double sum = 0.0;
  std::size_t p = 0;
  for (std::size_t step = 0; step <= 100; ++step) {
    // First operating point whose recall tp / n reaches step / 100.
    while (p < points.size() && points[p].tp * 100 < step * n) ++p;
    if (p == points.size()) break;
    sum += points[p].precision;
  }
  return sum / 101.0;
}

std::vector<double> coco_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back((50 + 5 * i) / 100.0);
  return t;
}

const CategoryResult* EvalReport::category(const std::string& name) const {
  for (const auto& c : categories) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

const SubgroupResult* EvalReport::subgroup(const std::string& name) const {
  for (const auto& s : subgroups) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

EvalReport evaluate(std::span<const Detection> detections, std::span<const GroundTruth> ground_truth,
                    std::span<const CategoryInfo> catalog, std::span<const CategorySet> subgroups,
                    std::span<const double> thresholds, const EvalOptions& options) {
  if (thresholds.empty()) throw InvalidInput("at least one IoU threshold is required");
  for (double t : thresholds) {
    if (!(t > 0.0 && t <= 1.0)) throw InvalidInput("IoU thresholds must lie in (0, 1]");
  }

  std::unordered_map<std::int64_t, std::size_t> index_of;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    if (!index_of.emplace(catalog[i].id, i).second) {
      throw InvalidInput("category id " + std::to_string(catalog[i].id) + " appears twice in the catalog");
    }
  }
  std::vector<std::vector<Detection>> dets_by_cat(catalog.size());
  std::vector<std::vector<GroundTruth>> gts_by_cat(catalog.size());
  for (const auto& d : detections) {
    auto it = index_of.find(d.category_id);
    if (it == index_of.end()) {
      throw InvalidInput("detection on image " + std::to_string(d.image_id) + " has unknown category id " +
                         std::to_string(d.category_id));
    }
    if (!(d.score >= 0.0 && d.score <= 1.0)) {
      throw InvalidInput("detection score must lie in [0, 1] (image " + std::to_string(d.image_id) + ")");
    }
    dets_by_cat[it->second].push_back(d);
  }
  for (const auto& g : ground_truth) {
    auto it = index_of.find(g.category_id);
    if (it == index_of.end()) {
      throw InvalidInput("ground truth on image " + std::to_string(g.image_id) + " has unknown category id " +
                         std::to_string(g.category_id));
    }
    gts_by_cat[it->second].push_back(g);
  }

  EvalReport report;
  report.thresholds.assign(thresholds.begin(), thresholds.end());
  report.zero_fill_empty = options.zero_fill_empty;

  std::vector<std::size_t> coco_index;
  for (double t : coco_thresholds()) {
    if (auto i = threshold_index(thresholds, t)) coco_index.push_back(*i);
  }
  const bool has_coco = coco_index.size() == 10;

  for (std::size_t c = 0; c < catalog.size(); ++c) {
    CategoryResult cat{catalog[c].id, catalog[c].name, gts_by_cat[c].size(), dets_by_cat[c].size(), {}, std::nullopt};
    for (double t : thresholds) {
      cat.ap.push_back(average_precision(match_impl(dets_by_cat[c], gts_by_cat[c], t, options.max_detections)));
    }
    if (has_coco && cat.ap[coco_index[0]]) {
      double sum = 0.0;
      for (std::size_t i : coco_index) sum += *cat.ap[i];
      cat.coco_ap = sum / 10.0;
    }
    report.categories.push_back(std::move(cat));
  }

  const auto i50 = threshold_index(thresholds, 0.5);
  const auto i75 = threshold_index(thresholds, 0.75);
  for (const auto& group : subgroups) {
    SubgroupResult sub;
    sub.name = group.name;
    sub.categories_total = group.categories.size();
    std::vector<const CategoryResult*> members;
    for (const auto& name : group.categories) {
      const CategoryResult* cat = report.category(name);
      if (!cat) continue;
      if (cat->gt_count == 0 && !options.zero_fill_empty) continue;
      members.push_back(cat);
    }
    sub.categories_used = members.size();
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      std::vector<double> values;
      for (const auto* m : members) values.push_back(m->ap[t].value_or(0.0));
      sub.mean_ap.push_back(mean_of(values));
    }
    if (i50) sub.map50 = sub.mean_ap[*i50];
    if (i75) sub.map75 = sub.mean_ap[*i75];
    if (has_coco) {
      std::vector<double> values;
      for (const auto* m : members) values.push_back(m->coco_ap.value_or(0.0));
      sub.map = mean_of(values);
    }
    report.subgroups.push_back(std::move(sub));
  }
  return report;
}

nlohmann::json EvalReport::to_json() const {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& c : categories) {
    nlohmann::json ap = nlohmann::json::object();
    for (std::size_t t = 0; t < thresholds.size(); ++t) ap[threshold_label(thresholds[t])] = opt(c.ap[t]);
    rows.push_back({{"type", "category"},
                    {"id", c.id},
                    {"name", c.name},
                    {"gt_count", c.gt_count},
                    {"detection_count", c.detection_count},
                    {"ap", ap},
                    {"coco_ap", opt(c.coco_ap)}});
  }
  for (const auto& s : subgroups) {
    nlohmann::json ap = nlohmann::json::object();
    for (std::size_t t = 0; t < thresholds.size(); ++t) ap[threshold_label(thresholds[t])] = opt(s.mean_ap[t]);
    rows.push_back({{"type", "subgroup"},
                    {"name", s.name},
                    {"categories_total", s.categories_total},
                    {"categories_used", s.categories_used},
                    {"mean_ap", ap},
                    {"map50", opt(s.map50)},
                    {"map75", opt(s.map75)},
                    {"map", opt(s.map)}});
  }
  return {{"thresholds", thresholds},
          {"empty_categories", zero_fill_empty ? "zero_filled" : "excluded"},
          {"rows", rows}};
}

}  // namespace modmix
