#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "modmix/coco.hpp"
#include "modmix/error.hpp"
#include "modmix/eval.hpp"
#include "oracles/ap_oracle.hpp"
#include "test_support.hpp"

using namespace modmix;

namespace {

const std::vector<CategoryInfo> kCatalog = {{1, "bed"}, {2, "chair"}, {3, "sofa"}};

std::vector<CategorySet> groups() {
  return {CategorySet{"first_two", {"bed", "chair"}}, CategorySet{"all", {"bed", "chair", "sofa"}}};
}

EvalReport run(const testing::Scene& s, std::span<const double> thresholds, const EvalOptions& options = {}) {
  const auto g = groups();
  return evaluate(s.dets, s.gts, kCatalog, g, thresholds, options);
}

bool same_report(const EvalReport& a, const EvalReport& b) { return a.to_json() == b.to_json(); }

}  // namespace

TEST_CASE("matching examples") {
  const GroundTruth gt{1, 1, BoundingBox(0, 0, 10, 10)};
  SUBCASE("exact hit") {
    const std::vector<Detection> d{{1, 1, BoundingBox(0, 0, 10, 10), 0.9}};
    const auto m = match_detections(d, std::vector{gt}, 0.5);
    REQUIRE(m.detections.size() == 1);
    CHECK(m.detections[0].true_positive);
    CHECK(m.missed() == 0);
  }
  SUBCASE("two detections on one ground truth") {
    const std::vector<Detection> d{{1, 1, BoundingBox(0, 0, 10, 10), 0.6}, {1, 1, BoundingBox(0, 0, 10, 10), 0.9}};
    const auto m = match_detections(d, std::vector{gt}, 0.5);
    REQUIRE(m.detections.size() == 2);
    CHECK(m.detections[0].score == 0.9);
    CHECK(m.detections[0].true_positive);
    CHECK_FALSE(m.detections[1].true_positive);
  }
  SUBCASE("IoU below the threshold") {
    // 10x10 against 10x4 inside it: IoU 0.4
    const std::vector<Detection> d{{1, 1, BoundingBox(0, 0, 10, 4), 0.9}};
    const auto m = match_detections(d, std::vector{gt}, 0.5);
    CHECK_FALSE(m.detections[0].true_positive);
    CHECK(m.missed() == 1);
    CHECK(match_detections(d, std::vector{gt}, 0.4).detections[0].true_positive);
  }
  SUBCASE("matching stays within image and category") {
    const std::vector<Detection> d{{2, 1, BoundingBox(0, 0, 10, 10), 0.9}, {1, 2, BoundingBox(0, 0, 10, 10), 0.9}};
    const auto m = match_detections(d, std::vector{gt}, 0.5);
    CHECK(m.matched_gt == 0);
  }
  SUBCASE("highest IoU wins") {
    const std::vector<GroundTruth> gts{{1, 1, BoundingBox(0, 0, 10, 10)}, {1, 1, BoundingBox(1, 0, 10, 10)}};
    const std::vector<Detection> d{{1, 1, BoundingBox(1, 0, 10, 10), 0.9}, {1, 1, BoundingBox(0, 0, 10, 10), 0.5}};
    const auto m = match_detections(d, gts, 0.5);
    CHECK(m.detections[0].true_positive);
    CHECK(m.detections[1].true_positive);
  }
}

TEST_CASE("average precision examples") {
  MatchResult perfect{{{0.9, true}, {0.8, true}}, 2, 2};
  CHECK(average_precision(perfect) == 1.0);
  CHECK(average_precision(MatchResult{{}, 3, 0}) == 0.0);
  CHECK(average_precision(MatchResult{{{0.4, false}}, 0, 0}) == 0.0);
  CHECK_FALSE(average_precision(MatchResult{}).has_value());

  // TP, FP, TP over two ground truths: precision 1 up to recall 0.5, 2/3 beyond
  const MatchResult mixed{{{0.9, true}, {0.8, false}, {0.7, true}}, 2, 2};
  CHECK(*average_precision(mixed) == doctest::Approx(253.0 / 303.0).epsilon(1e-12));

  // equal scores form one operating point whatever their order
  CHECK(*average_precision(MatchResult{{{0.5, true}, {0.5, false}}, 1, 1}) == 0.5);
  CHECK(*average_precision(MatchResult{{{0.5, false}, {0.5, true}}, 1, 1}) == 0.5);

  const auto t = coco_thresholds();
  REQUIRE(t.size() == 10);
  CHECK(t[0] == 0.5);
  CHECK(t[2] == 0.6);
  CHECK(t[9] == 0.95);
}

TEST_CASE("matches the brute-force oracle on random scenes") {
  std::mt19937_64 gen(2024);
  const auto thresholds = coco_thresholds();
  for (int i = 0; i < 300; ++i) {
    const testing::Scene s = testing::random_scene(gen, 5, 5, 3);
    const EvalReport report = run(s, thresholds);
    for (std::size_t c = 0; c < kCatalog.size(); ++c) {
      for (std::size_t t = 0; t < thresholds.size(); ++t) {
        const auto expected = oracle::category_ap(s.dets, s.gts, kCatalog[c].id, thresholds[t]);
        const auto actual = report.categories[c].ap[t];
        REQUIRE(expected.has_value() == actual.has_value());
        if (expected) REQUIRE(std::abs(*expected - *actual) < 1e-9);
      }
    }
    const auto g = groups();
    for (std::size_t k = 0; k < g.size(); ++k) {
      const auto m50 = oracle::subgroup_mean(s.dets, s.gts, kCatalog, g[k], 0.5);
      const auto map = oracle::subgroup_coco_map(s.dets, s.gts, kCatalog, g[k]);
      REQUIRE(m50.has_value() == report.subgroups[k].map50.has_value());
      REQUIRE(map.has_value() == report.subgroups[k].map.has_value());
      if (m50) CHECK(std::abs(*m50 - *report.subgroups[k].map50) < 1e-9);
      if (map) CHECK(std::abs(*map - *report.subgroups[k].map) < 1e-9);
    }
  }
}

TEST_CASE("perfect detections give 1.0 everywhere") {
  std::mt19937_64 gen(8);
  testing::Scene s;
  for (int i = 0; i < 6; ++i) s.gts.push_back({1 + i % 2, 1 + i % 3, testing::random_box(gen, 30, 30)});
  for (const auto& g : s.gts) s.dets.push_back({g.image_id, g.category_id, g.box, 0.9});
  const EvalReport r = run(s, coco_thresholds());
  for (const auto& sub : r.subgroups) {
    CHECK(*sub.map50 == 1.0);
    CHECK(*sub.map75 == 1.0);
    CHECK(*sub.map == 1.0);
  }
}

TEST_CASE("AP monotonicity") {
  std::mt19937_64 gen(77);
  for (int i = 0; i < 300; ++i) {
    testing::Scene s = testing::random_scene(gen, 5, 5, 1, 1);
    if (s.gts.empty()) continue;
    const double before = *oracle::category_ap(s.dets, s.gts, 1, 0.5);
    const double lib_before = *run(s, std::vector{0.5}).categories[0].ap[0];
    CHECK(std::abs(before - lib_before) < 1e-9);

    testing::Scene with_fp = s;
    // far from every ground truth (they all lie inside 20 x 20)
    with_fp.dets.push_back({1, 1, BoundingBox(100, 100, 5, 5), static_cast<double>(gen() % 11) / 10.0});
    CHECK(*run(with_fp, std::vector{0.5}).categories[0].ap[0] <= lib_before + 1e-12);

    const MatchResult m = match_detections(s.dets, s.gts, 0.5);
    if (m.missed() == 0) continue;
    // a perfect box on a missed ground truth, scored above everything
    std::vector<bool> hit(s.gts.size(), false);
    testing::Scene with_tp = s;
    for (std::size_t g = 0; g < s.gts.size(); ++g) {
      testing::Scene probe = s;
      probe.dets.push_back({1, 1, s.gts[g].box, 1.0});
      if (match_detections(probe.dets, probe.gts, 0.5).matched_gt > m.matched_gt) {
        with_tp = probe;
        break;
      }
    }
    CHECK(*run(with_tp, std::vector{0.5}).categories[0].ap[0] >= lib_before - 1e-12);
  }
}

TEST_CASE("evaluation is order and score-transform invariant") {
  std::mt19937_64 gen(13);
  const auto thresholds = coco_thresholds();
  for (int i = 0; i < 200; ++i) {
    testing::Scene s = testing::random_scene(gen, 6, 5, 3);
    const EvalReport base = run(s, thresholds);
    testing::Scene shuffled = s;
    std::shuffle(shuffled.dets.begin(), shuffled.dets.end(), gen);
    std::shuffle(shuffled.gts.begin(), shuffled.gts.end(), gen);
    CHECK(same_report(base, run(shuffled, thresholds)));
    testing::Scene squashed = s;
    for (auto& d : squashed.dets) d.score = d.score * d.score * 0.5 + 0.25;
    CHECK(same_report(base, run(squashed, thresholds)));
  }
}

TEST_CASE("subgroup means lie between category extremes") {
  std::mt19937_64 gen(19);
  for (int i = 0; i < 200; ++i) {
    const testing::Scene s = testing::random_scene(gen, 5, 5, 3);
    const EvalReport r = run(s, std::vector{0.5});
    const auto& all = *r.subgroup("all");
    if (!all.map50) continue;
    double lo = 1.0, hi = 0.0;
    for (const auto& c : r.categories) {
      if (c.gt_count == 0) continue;
      lo = std::min(lo, *c.ap[0]);
      hi = std::max(hi, *c.ap[0]);
    }
    CHECK(*all.map50 >= lo - 1e-12);
    CHECK(*all.map50 <= hi + 1e-12);
  }
}

TEST_CASE("empty categories and options") {
  testing::Scene s;
  s.gts.push_back({1, 1, BoundingBox(0, 0, 10, 10)});
  s.dets.push_back({1, 1, BoundingBox(0, 0, 10, 10), 0.9});
  s.dets.push_back({1, 2, BoundingBox(0, 0, 10, 10), 0.8});
  const EvalReport excluded = run(s, std::vector{0.5});
  CHECK(*excluded.category("chair")->ap[0] == 0.0);
  CHECK_FALSE(excluded.category("sofa")->ap[0].has_value());
  CHECK(*excluded.subgroup("all")->map50 == 1.0);
  CHECK(excluded.subgroup("all")->categories_used == 1);
  CHECK_FALSE(excluded.subgroup("all")->map.has_value());

  EvalOptions zero;
  zero.zero_fill_empty = true;
  const EvalReport filled = run(s, std::vector{0.5}, zero);
  CHECK(*filled.subgroup("all")->map50 == doctest::Approx(1.0 / 3.0));

  testing::Scene crowded = s;
  crowded.dets = {{1, 1, BoundingBox(50, 50, 5, 5), 0.9}, {1, 1, BoundingBox(0, 0, 10, 10), 0.5}};
  EvalOptions capped;
  capped.max_detections = 1;
  CHECK(*run(crowded, std::vector{0.5}).category("bed")->ap[0] > 0.0);
  CHECK(*run(crowded, std::vector{0.5}, capped).category("bed")->ap[0] == 0.0);

  testing::Scene nothing;
  const EvalReport none = run(nothing, std::vector{0.5});
  CHECK_FALSE(none.subgroup("all")->map50.has_value());
}

TEST_CASE("evaluation input errors") {
  testing::Scene s;
  s.dets.push_back({1, 9, BoundingBox(0, 0, 1, 1), 0.5});
  CHECK_THROWS_AS(run(s, std::vector{0.5}), InvalidInput);
  s.dets = {{1, 1, BoundingBox(0, 0, 1, 1), 1.5}};
  CHECK_THROWS_AS(run(s, std::vector{0.5}), InvalidInput);
  s.dets.clear();
  s.gts.push_back({1, 7, BoundingBox(0, 0, 1, 1)});
  CHECK_THROWS_AS(run(s, std::vector{0.5}), InvalidInput);
  CHECK_THROWS_AS(run(testing::Scene{}, std::vector<double>{}), InvalidInput);
}

TEST_CASE("report rendering") {
  testing::Scene s;
  s.gts.push_back({1, 1, BoundingBox(0, 0, 10, 10)});
  s.dets.push_back({1, 1, BoundingBox(0, 0, 10, 10), 0.9});
  const EvalReport r = run(s, coco_thresholds());
  const auto j = r.to_json();
  CHECK(j["rows"].size() == 5);
  CHECK(j["rows"][0]["type"] == "category");
  CHECK(j["rows"][0]["ap"]["0.50"] == 1.0);
  CHECK(j["rows"][1]["ap"]["0.50"].is_null());
  CHECK(j["rows"][2]["ap"]["0.75"].is_null());
  CHECK(j["rows"][4]["type"] == "subgroup");
  CHECK(j["rows"][4]["map"] == 1.0);
  CHECK(j["empty_categories"] == "excluded");

  const std::string table = r.to_text_table();
  CHECK(table.rfind("metric ", 0) == 0);
  CHECK(table.find("| bed") != std::string::npos);
  CHECK(table.find("AP50") != std::string::npos);
  CHECK(table.find("AP@0.55") != std::string::npos);
  CHECK(table.find("AP@[.50:.95]") != std::string::npos);
  CHECK(table.find("100.0") != std::string::npos);
  CHECK(table.find("N/A") != std::string::npos);
}

TEST_CASE("COCO round trip evaluates identically") {
  std::mt19937_64 gen(5);
  testing::ScratchDir dir("eval_rt");
  for (int i = 0; i < 50; ++i) {
    const testing::Scene s = testing::random_scene(gen, 5, 5, 3);
    CocoDocument doc;
    for (std::int64_t im = 1; im <= 2; ++im) doc.images.push_back({im, "img.png", 40, 40, std::nullopt});
    for (const auto& c : kCatalog) doc.categories.push_back(c);
    std::int64_t next = 1;
    for (const auto& g : s.gts) doc.annotations.push_back({next++, g.image_id, g.category_id, g.box, g.box.area(), 0});
    write_coco(dir / "gt.json", doc);
    write_json_file(dir / "dets.json", detections_to_json(s.dets));
    const auto gts = read_coco(dir / "gt.json").ground_truth();
    const auto dets = read_detections(dir / "dets.json");
    const auto g = groups();
    const auto t = coco_thresholds();
    CHECK(same_report(evaluate(dets, gts, kCatalog, g, t), run(s, t)));
  }
}
