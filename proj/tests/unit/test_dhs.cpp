#include <doctest.h>

#include <random>

#include "modmix/dhs.hpp"
#include "modmix/error.hpp"
#include "oracles/dhs_oracle.hpp"
#include "test_support.hpp"

using namespace modmix;

namespace {

OrganizedPointCloud row_cloud(std::vector<std::optional<Vec3>> pts) {
  const std::size_t n = pts.size();
  return OrganizedPointCloud(n, 1, std::move(pts));
}

OrganizedPointCloud transformed(const OrganizedPointCloud& c, Vec3 shift) {
  std::vector<std::optional<Vec3>> pts(c.points().begin(), c.points().end());
  for (auto& p : pts) {
    if (p) *p = *p + shift;
  }
  return OrganizedPointCloud(c.width(), c.height(), std::move(pts));
}

OrganizedPointCloud reversed_rows(const OrganizedPointCloud& c) {
  std::vector<std::optional<Vec3>> pts(c.size());
  for (std::size_t r = 0; r < c.height(); ++r) {
    for (std::size_t k = 0; k < c.width(); ++k) pts[r * c.width() + (c.width() - 1 - k)] = c.at(r, k);
  }
  return OrganizedPointCloud(c.width(), c.height(), std::move(pts));
}

}  // namespace

TEST_CASE("depth channel") {
  const auto cloud = row_cloud({Vec3{0, 0, 2}, Vec3{3, 4, 0}, std::nullopt});
  const RawChannel d = depth_channel(cloud);
  CHECK(d.values[0] == 2.0);
  CHECK(d.values[1] == 5.0);
  CHECK(d.valid[0] == 1);
  CHECK(d.valid[2] == 0);
  const RawChannel f = depth_channel(cloud, DepthMode::Forward);
  CHECK(f.values[1] == 4.0);
  CHECK(f.valid[2] == 0);
}

TEST_CASE("height channel") {
  const auto cloud = row_cloud({Vec3{1, 1, 0.7}, Vec3{5, -2, -0.3}, std::nullopt});
  const RawChannel h = height_channel(cloud);
  CHECK(h.values[0] == 0.7);
  CHECK(h.values[1] == -0.3);
  CHECK(h.valid[2] == 0);
  CHECK(h.valid_count() == 2);
}

TEST_CASE("signed angle worked examples") {
  SUBCASE("colinear along z") {
    const auto s = signed_angle_channel(row_cloud({Vec3{0, 0, 0}, Vec3{0, 0, 1}, Vec3{0, 0, 2}}));
    CHECK(s.valid == std::vector<std::uint8_t>{0, 1, 0});
    CHECK(s.values[1] == 0.0);
    CHECK_FALSE(std::signbit(s.values[1]));
  }
  SUBCASE("same orientation gives a positive angle") {
    const auto s = signed_angle_channel(row_cloud({Vec3{0, 0, 0}, Vec3{0, 1, 1}, Vec3{0, 2, 3}}));
    REQUIRE(s.valid[1]);
    CHECK(s.values[1] == doctest::Approx(26.565051177077994).epsilon(1e-12));
  }
  SUBCASE("opposite orientation gives a negative angle") {
    const auto s = signed_angle_channel(row_cloud({Vec3{0, 0, 0}, Vec3{0, 1, 1}, Vec3{0, 2, -1}}));
    REQUIRE(s.valid[1]);
    CHECK(s.values[1] == doctest::Approx(-153.434948822922).epsilon(1e-12));
  }
  SUBCASE("perpendicular steps give exactly zero") {
    const auto s = signed_angle_channel(row_cloud({Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{1, 0, 1}}));
    REQUIRE(s.valid[1]);
    CHECK(s.values[1] == 0.0);
  }
}

TEST_CASE("signed angle degenerate pixels are invalid") {
  CHECK(signed_angle_channel(row_cloud({Vec3{0, 0, 0}, Vec3{0, 0, 0}, Vec3{0, 0, 1}})).valid_count() == 0);
  CHECK(signed_angle_channel(row_cloud({Vec3{0, 0, 0}, Vec3{0, 0, 1}, Vec3{0, 0, 1}})).valid_count() == 0);
  CHECK(signed_angle_channel(row_cloud({std::nullopt, Vec3{0, 0, 1}, Vec3{0, 0, 2}})).valid_count() == 0);
  CHECK(signed_angle_channel(row_cloud({Vec3{0, 0, 0}, Vec3{0, 0, 1}})).valid_count() == 0);
  CHECK_THROWS_AS(signed_angle_channel(row_cloud({Vec3{0, 0, 0}})), InvalidInput);
}

TEST_CASE("signed angle stays in [-180, 180]") {
  std::mt19937_64 gen(21);
  for (int i = 0; i < 200; ++i) {
    const auto s = signed_angle_channel(testing::random_smooth_cloud(gen, 9, 4, 0.2));
    for (std::size_t p = 0; p < s.values.size(); ++p) {
      if (!s.valid[p]) continue;
      REQUIRE(s.values[p] >= -180.0);
      REQUIRE(s.values[p] <= 180.0);
    }
  }
}

TEST_CASE("normalize_channel") {
  const RawChannel raw{3, 1, {2, 4, 6}, {1, 1, 1}};
  CHECK(normalize_channel(raw, Normalization::min_max()).values == std::vector<double>{0.0, 0.5, 1.0});

  const RawChannel flat{3, 1, {7, 7, 7}, {1, 1, 1}};
  CHECK(normalize_channel(flat, Normalization::min_max()).values == std::vector<double>{0.5, 0.5, 0.5});

  const RawChannel angles{4, 1, {0, -180, 360, 42}, {1, 1, 1, 0}};
  const auto fixed = normalize_channel(angles, Normalization::fixed_range(-180, 180));
  CHECK(fixed.values[0] == 0.5);
  CHECK(fixed.values[1] == 0.0);
  CHECK(fixed.values[2] == 1.0);  // clamped
  CHECK(fixed.values[3] == 0.0);  // invalid

  const RawChannel none{2, 1, {3, 4}, {0, 0}};
  CHECK(normalize_channel(none, Normalization::min_max()).values == std::vector<double>{0.0, 0.0});
  CHECK_THROWS_AS(normalize_channel(raw, Normalization::fixed_range(1, 1)), InvalidInput);
}

TEST_CASE("encode_dhs on a horizontal plane gives a mid-range height channel") {
  std::vector<std::optional<Vec3>> pts;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 5; ++c) pts.push_back(Vec3{c * 0.1, r * 0.1, 1.25});
  }
  const PseudoImage img = encode_dhs(OrganizedPointCloud(5, 4, pts));
  for (std::size_t i = 0; i < img.valid.size(); ++i) {
    if (!img.valid[i]) continue;
    CHECK(img.channels[kHeight][i] == 0.5);
    CHECK(img.channels[kSignedAngle][i] == 0.75);  // steps are horizontal: +90 degrees
  }
}

TEST_CASE("encode_dhs matches the brute-force oracle on a staircase") {
  std::vector<std::optional<Vec3>> pts;
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 12; ++c) {
      const double step = (c / 3) * 0.2;
      pts.push_back(Vec3{r * 0.05, 1.0 + c * 0.1, step + ((c % 3 == 0) ? 0.05 : 0.0)});
    }
  }
  pts[15].reset();
  const OrganizedPointCloud cloud(12, 6, pts);
  const PseudoImage img = encode_dhs(cloud);
  const auto ref = oracle::encode_dhs_bruteforce(cloud);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    REQUIRE(static_cast<bool>(img.valid[i]) == ref.valid[i]);
    for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(img.channels[c][i] - ref.pixels[i][c]) <= 1e-9);
  }
}

TEST_CASE("encode_dhs output contract on random clouds") {
  std::mt19937_64 gen(99);
  std::uniform_int_distribution<std::size_t> dim(2, 16);
  for (int n = 0; n < 200; ++n) {
    const auto cloud = testing::random_cloud(gen, dim(gen), dim(gen), 0.35);
    const PseudoImage img = encode_dhs(cloud);
    const auto ref = oracle::encode_dhs_bruteforce(cloud);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      REQUIRE(static_cast<bool>(img.valid[i]) == ref.valid[i]);
      for (std::size_t c = 0; c < 3; ++c) {
        const double v = img.channels[c][i];
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
        if (!img.valid[i]) REQUIRE(v == 0.0);
        REQUIRE(std::abs(v - ref.pixels[i][c]) <= 1e-9);
      }
    }
  }
}

TEST_CASE("all-missing cloud encodes to zeros") {
  const OrganizedPointCloud cloud(4, 3, std::vector<std::optional<Vec3>>(12));
  const PseudoImage img = encode_dhs(cloud);
  for (std::size_t c = 0; c < 3; ++c) {
    for (double v : img.channels[c]) CHECK(v == 0.0);
  }
  for (auto v : img.valid) CHECK(v == 0);
  CHECK(to_rgb8(img) == RgbImage(4, 3));
}

TEST_CASE("height channel under translation") {
  std::mt19937_64 gen(5);
  for (int n = 0; n < 50; ++n) {
    const auto cloud = testing::random_smooth_cloud(gen, 8, 6, 0.2);
    const RawChannel h = height_channel(cloud);
    const RawChannel hx = height_channel(transformed(cloud, {3.5, -7.25, 0.0}));
    CHECK(h.values == hx.values);
    const RawChannel hz = height_channel(transformed(cloud, {0.0, 0.0, 2.5}));
    for (std::size_t i = 0; i < h.values.size(); ++i) {
      if (h.valid[i]) CHECK(hz.values[i] == doctest::Approx(h.values[i] + 2.5).epsilon(1e-12));
    }
    const PseudoImage a = encode_dhs(cloud);
    const PseudoImage b = encode_dhs(transformed(cloud, {0.0, 0.0, 2.5}));
    for (std::size_t i = 0; i < h.values.size(); ++i) {
      CHECK(std::abs(a.channels[kHeight][i] - b.channels[kHeight][i]) < 1e-9);
    }
  }
}

TEST_CASE("reversing scanlines carries no hidden state") {
  std::mt19937_64 gen(8);
  for (int n = 0; n < 50; ++n) {
    const auto cloud = testing::random_cloud(gen, 9, 5, 0.25);
    const auto rev = reversed_rows(cloud);
    const RawChannel d = depth_channel(cloud);
    const RawChannel dr = depth_channel(rev);
    const RawChannel s = signed_angle_channel(rev);
    for (std::size_t r = 0; r < 5; ++r) {
      for (std::size_t k = 0; k < 9; ++k) {
        CHECK(d.values[r * 9 + k] == dr.values[r * 9 + 8 - k]);
        const std::size_t i = r * 9 + k;
        if (k == 0 || k == 8 || !rev.at(r, k - 1) || !rev.at(r, k) || !rev.at(r, k + 1)) {
          CHECK(s.valid[i] == 0);
          continue;
        }
        const auto a = *rev.at(r, k - 1), b = *rev.at(r, k), c = *rev.at(r, k + 1);
        if (a == b || b == c) {
          CHECK(s.valid[i] == 0);
          continue;
        }
        REQUIRE(s.valid[i] == 1);
        CHECK(std::abs(s.values[i] - oracle::signed_angle_deg(a, b, c)) < 1e-9);
      }
    }
  }
}

TEST_CASE("to_rgb8 rounds to the nearest byte") {
  PseudoImage img{2, 1, {std::vector<double>{0.0, 1.0}, std::vector<double>{0.5, 0.2}, std::vector<double>{0.999, 0.0}}, {1, 1}};
  const RgbImage rgb = to_rgb8(img);
  CHECK(rgb.at(0, 0, 0) == 0);
  CHECK(rgb.at(0, 1, 0) == 255);
  CHECK(rgb.at(0, 0, 1) == 128);
  CHECK(rgb.at(0, 1, 1) == 51);
  CHECK(rgb.at(0, 0, 2) == 255);
  CHECK(validity_mask8(img) == std::vector<std::uint8_t>{255, 255});
}
