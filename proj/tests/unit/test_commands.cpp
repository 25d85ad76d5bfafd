#include <doctest.h>

#include <iostream>
#include <random>
#include <sstream>

#include "modmix/cloud_io.hpp"
#include "modmix/coco.hpp"
#include "modmix/commands.hpp"
#include "modmix/error.hpp"
#include "modmix/image_io.hpp"
#include "modmix/logging.hpp"
#include "test_support.hpp"

using namespace modmix;
namespace fs = std::filesystem;

namespace {

struct QuietLogs {
  std::ostringstream sink;
  QuietLogs() { set_log_sink(&sink); }
  ~QuietLogs() { set_log_sink(&std::cerr); }
};

}  // namespace

TEST_CASE("convert a directory with one corrupt file") {
  QuietLogs logs;
  testing::ScratchDir dir("convert");
  std::mt19937_64 gen(1);
  fs::create_directories(dir / "in");
  for (int i = 0; i < 3; ++i) write_opc(dir / "in" / ("c" + std::to_string(i) + ".opc"), testing::random_cloud(gen, 9, 6, 0.3));
  testing::write_text(dir / "in" / "broken.opc", "OPC1 but not really");
  testing::write_text(dir / "in" / "notes.txt", "ignored");

  ConvertCommand cmd;
  cmd.inputs = {dir / "in"};
  cmd.out_dir = dir / "out";
  cmd.write_validity = true;
  cmd.parallelism = 2;
  const ConvertSummary s = run_convert(cmd);
  CHECK(s.converted == 3);
  REQUIRE(s.failures.size() == 1);
  CHECK(s.failures[0].find("broken.opc") != std::string::npos);
  CHECK(s.exit_code() != 0);
  for (int i = 0; i < 3; ++i) {
    CHECK(fs::exists(dir / "out" / ("c" + std::to_string(i) + "_dhs.png")));
    CHECK(read_gray_png(dir / "out" / ("c" + std::to_string(i) + "_valid.png")).width == 9);
  }
  CHECK_FALSE(fs::exists(dir / "out" / "broken_dhs.png"));
  CHECK(logs.sink.str().find("convert_failed") != std::string::npos);

  cmd.inputs = {dir / "in" / "c0.opc"};
  cmd.out_dir = dir / "single";
  CHECK(run_convert(cmd).exit_code() == 0);
  CHECK(read_rgb_png(dir / "single" / "c0_dhs.png") == to_rgb8(encode_dhs(read_opc(dir / "in" / "c0.opc"))));
}

TEST_CASE("depth map input equals the equivalent OPC cloud") {
  QuietLogs logs;
  testing::ScratchDir dir("depth");
  std::mt19937_64 gen(6);
  const std::size_t w = 14, h = 10;
  GrayImage depth{w, h, 16, std::vector<std::uint16_t>(w * h)};
  for (auto& d : depth.samples) d = gen() % 5 == 0 ? 0 : static_cast<std::uint16_t>(500 + gen() % 4000);
  write_gray_png(dir / "scene.png", depth);
  testing::write_text(dir / "scene.intrinsics.txt", "520.5 0 6.5\n0 519.25 4.75\n0 0 1\n");

  // textbook pinhole back-projection, z up
  const double fx = 520.5, fy = 519.25, cx = 6.5, cy = 4.75;
  std::vector<std::optional<Vec3>> pts(w * h);
  for (std::size_t v = 0; v < h; ++v) {
    for (std::size_t u = 0; u < w; ++u) {
      const auto raw = depth.samples[v * w + u];
      if (raw == 0) continue;
      const double d = raw * 0.001;
      pts[v * w + u] = Vec3{(double(u) - cx) * d / fx, d, -(double(v) - cy) * d / fy};
    }
  }
  write_opc(dir / "reference.opc", OrganizedPointCloud(w, h, pts));

  ConvertCommand from_depth;
  from_depth.depth = dir / "scene.png";
  from_depth.intrinsics = dir / "scene.intrinsics.txt";
  from_depth.out_dir = dir / "a";
  REQUIRE(run_convert(from_depth).exit_code() == 0);
  ConvertCommand sidecar;
  sidecar.inputs = {dir / "scene.png"};
  sidecar.out_dir = dir / "b";
  REQUIRE(run_convert(sidecar).exit_code() == 0);
  ConvertCommand from_opc;
  from_opc.inputs = {dir / "reference.opc"};
  from_opc.out_dir = dir / "c";
  REQUIRE(run_convert(from_opc).exit_code() == 0);

  const std::string expected = testing::read_bytes(dir / "c" / "reference_dhs.png");
  CHECK(testing::read_bytes(dir / "a" / "scene_dhs.png") == expected);
  CHECK(testing::read_bytes(dir / "b" / "scene_dhs.png") == expected);

  write_rgb_png(dir / "photo.png", testing::random_image(gen, 4, 4));
  ConvertCommand whole_dir;
  whole_dir.inputs = {dir.path()};
  whole_dir.out_dir = dir / "all";
  const ConvertSummary all = run_convert(whole_dir);
  CHECK(all.converted == 2);
  CHECK(all.exit_code() == 0);
  CHECK_FALSE(fs::exists(dir / "all" / "photo_dhs.png"));

  ConvertCommand missing;
  missing.depth = dir / "scene.png";
  missing.out_dir = dir / "d";
  CHECK_THROWS_AS(run_convert(missing), InvalidInput);
  ConvertCommand empty;
  empty.out_dir = dir / "e";
  CHECK(run_convert(empty).exit_code() != 0);
}

TEST_CASE("mix writes images, masks and parameters") {
  QuietLogs logs;
  testing::ScratchDir dir("mix");
  std::mt19937_64 gen(2);
  write_rgb_png(dir / "rgb.png", testing::random_image(gen, 12, 8));
  write_rgb_png(dir / "dhs.png", testing::random_image(gen, 12, 8));

  MixCommand cppm;
  cppm.rgb = dir / "rgb.png";
  cppm.dhs = dir / "dhs.png";
  cppm.patch_size = 3;
  cppm.save_masks = true;
  cppm.out_dir = dir / "cppm";
  CHECK(run_mix(cppm) == 0);
  const RgbImage mixed = read_rgb_png(dir / "cppm" / "mixed_cppm_0.png");
  CHECK(mixed == apply_mask(read_rgb_png(dir / "rgb.png"), read_rgb_png(dir / "dhs.png"), cppm_mask(12, 8, 3)));
  CHECK(read_mask_png(dir / "cppm" / "masks" / "mask_cppm_0.png") == cppm_mask(12, 8, 3));

  MixCommand sffm = cppm;
  sffm.mode = MixMode::Sffm;
  sffm.count = 4;
  sffm.out_dir = dir / "sffm";
  CHECK(run_mix(sffm) == 0);
  const auto doc = read_json_file(dir / "sffm" / "mix.json");
  REQUIRE(doc["outputs"].size() == 4);
  const auto batch = sffm_batch(12, 8, 4, 0.1, 0.9, Neighborhood::Four, kDefaultSeed);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(doc["outputs"][k]["p_a"] == batch[k].params.p_a);
    CHECK(read_mask_png(dir / "sffm" / "masks" / ("mask_sffm_" + std::to_string(k) + ".png")) == batch[k].mask);
  }

  MixCommand fixed;
  fixed.mode = MixMode::Sffm;
  fixed.p_a = 1.0;
  fixed.p_b = 1.0;
  fixed.width = 10;
  fixed.height = 5;
  fixed.count = 3;
  fixed.out_dir = dir / "masks_only";
  CHECK(run_mix(fixed) == 0);
  for (int k = 0; k < 3; ++k) {
    const auto m = read_mask_png(dir / "masks_only" / "masks" / ("mask_sffm_" + std::to_string(k) + ".png"));
    CHECK((m.a_fraction() == 0.0 || m.a_fraction() == 1.0));
  }
  CHECK_FALSE(fs::exists(dir / "masks_only" / "mixed_sffm_0.png"));

  MixCommand bad = fixed;
  bad.p_b.reset();
  CHECK_THROWS_AS(run_mix(bad), InvalidInput);
  bad = fixed;
  bad.width = 0;
  CHECK_THROWS_AS(run_mix(bad), InvalidInput);
  bad = cppm;
  bad.dhs.reset();
  CHECK_THROWS_AS(run_mix(bad), InvalidInput);
}

TEST_CASE("stats over a mask directory") {
  QuietLogs logs;
  testing::ScratchDir dir("stats");
  write_mask_png(dir / "all_a.png", MixtureMask(6, 4, Label::A));
  write_mask_png(dir / "board.png", cppm_mask(6, 4, 1));
  std::mt19937_64 gen(3);
  write_rgb_png(dir / "photo.png", testing::random_image(gen, 4, 4));
  write_gray_png(dir / "gray.png", GrayImage{2, 1, 8, {0, 17}});

  const StatsSummary s = compute_mask_stats(dir.path(), Neighborhood::Four);
  REQUIRE(s.masks.size() == 2);
  CHECK(s.masks[0].file == "all_a.png");
  CHECK(s.masks[0].a_fraction == 1.0);
  CHECK(s.masks[0].regions == 1);
  CHECK(s.masks[1].a_fraction == 0.5);
  CHECK(s.masks[1].regions == 24);
  CHECK(s.skipped.size() == 2);
  CHECK(s.min_regions == 1);
  CHECK(s.max_regions == 24);
  CHECK(s.mean_a_fraction == 0.75);

  StatsCommand cmd;
  cmd.mask_dir = dir.path();
  cmd.out_json = dir / "stats.json";
  CHECK(run_stats(cmd) != 0);
  CHECK(read_json_file(dir / "stats.json")["aggregate"]["count"] == 2);
  CHECK_THROWS_AS(compute_mask_stats(dir / "nope", Neighborhood::Four), InvalidInput);
}

TEST_CASE("build and eval commands") {
  QuietLogs logs;
  testing::ScratchDir dir("cmd_build");
  const fs::path manifest = testing::write_synthetic_dataset(dir / "src", 4, 10, 8, 12);
  testing::write_text(dir / "split.json", R"({"val": ["frame_0001"]})");

  BuildCommand build;
  build.manifest = manifest;
  build.split = "train";
  build.split_file = dir / "split.json";
  build.out_dir = dir / "train";
  CHECK(run_build(build) == 0);
  const CocoDocument doc = read_coco(dir / "train" / "annotations.json");
  CHECK(doc.images.size() == 9);

  BuildCommand no_file = build;
  no_file.split_file.reset();
  CHECK_THROWS_AS(run_build(no_file), InvalidInput);
  BuildCommand bad_set = build;
  bad_set.categories = "sunrgbd79";
  CHECK_THROWS_AS(run_build(bad_set), InvalidInput);

  std::vector<Detection> dets;
  for (const auto& g : doc.ground_truth()) dets.push_back({g.image_id, g.category_id, g.box, 0.75});
  write_json_file(dir / "dets.json", detections_to_json(dets));
  EvalCommand eval;
  eval.gt = dir / "train" / "annotations.json";
  eval.dets = dir / "dets.json";
  eval.out_json = dir / "report.json";
  eval.out_table = dir / "report.txt";
  CHECK(run_eval(eval) == 0);
  const auto report = read_json_file(dir / "report.json");
  bool saw_subgroup = false;
  for (const auto& row : report["rows"]) {
    if (row["type"] == "subgroup" && !row["map"].is_null()) {
      CHECK(row["map"] == 1.0);
      saw_subgroup = true;
    }
  }
  CHECK(saw_subgroup);
  CHECK(testing::read_bytes(dir / "report.txt").find("AP@[.50:.95]") != std::string::npos);

  eval.subgroup = "sunrgbd66";
  CHECK_THROWS_AS(run_eval(eval), InvalidInput);
}

TEST_CASE("threshold parsing") {
  CHECK(parse_thresholds("coco").size() == 10);
  CHECK(parse_thresholds("0.5") == std::vector<double>{0.5});
  CHECK(parse_thresholds("0.5,0.75") == std::vector<double>{0.5, 0.75});
  CHECK_THROWS_AS(parse_thresholds("half"), InvalidInput);
  CHECK_THROWS_AS(parse_thresholds("0.5x"), InvalidInput);
  CHECK_THROWS_AS(parse_thresholds(""), InvalidInput);
}
