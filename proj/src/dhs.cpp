#include "modmix/dhs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "modmix/error.hpp"

namespace modmix {

namespace {

RawChannel empty_like(const OrganizedPointCloud& cloud) {
  return RawChannel{cloud.width(), cloud.height(), std::vector<double>(cloud.size(), 0.0),
                    std::vector<std::uint8_t>(cloud.size(), 0)};
}

template <typename F>
RawChannel per_point(const OrganizedPointCloud& cloud, F&& f) {
  RawChannel out = empty_like(cloud);
  const auto points = cloud.points();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i]) continue;
    out.values[i] = f(*points[i]);
    out.valid[i] = 1;
  }
  return out;
}

double angle_with_up_degrees(const Vec3& d, double length) {
  const double c = std::clamp(d.z / length, -1.0, 1.0);
  return std::acos(c) * (180.0 / std::numbers::pi);
}

}  // namespace

std::size_t RawChannel::valid_count() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

RawChannel depth_channel(const OrganizedPointCloud& cloud, DepthMode mode) {
  if (mode == DepthMode::Forward) return per_point(cloud, [](const Vec3& p) { return p.y; });
  return per_point(cloud, [](const Vec3& p) { return norm(p); });
}

RawChannel height_channel(const OrganizedPointCloud& cloud) {
  return per_point(cloud, [](const Vec3& p) { return p.z; });
}

RawChannel signed_angle_channel(const OrganizedPointCloud& cloud) {
  if (cloud.width() < 2) throw InvalidInput("signed angle needs scanlines of at least 2 points");
  RawChannel out = empty_like(cloud);
  const std::size_t w = cloud.width();
  for (std::size_t row = 0; row < cloud.height(); ++row) {
    for (std::size_t k = 1; k + 1 < w; ++k) {
      const auto& prev = cloud.at(row, k - 1);
      const auto& cur = cloud.at(row, k);
      const auto& next = cloud.at(row, k + 1);
      if (!prev || !cur || !next) continue;
      const Vec3 d_back = *cur - *prev;
      const Vec3 d_fwd = *next - *cur;
      const double len = norm(d_fwd);
      if (len == 0.0 || norm(d_back) == 0.0) continue;
      const double orientation = dot(d_fwd, d_back);
      const std::size_t idx = row * w + k;
      out.valid[idx] = 1;
      if (orientation == 0.0) {
        out.values[idx] = 0.0;
      } else {
        const double angle = angle_with_up_degrees(d_fwd, len);
        out.values[idx] = orientation > 0.0 ? angle : -angle;
      }
    }
  }
  return out;
}

RawChannel normalize_channel(const RawChannel& raw, Normalization mode) {
  RawChannel out{raw.width, raw.height, std::vector<double>(raw.values.size(), 0.0), raw.valid};
  if (mode.kind == Normalization::Kind::FixedRange) {
    if (!(mode.hi > mode.lo)) throw InvalidInput("fixed normalization range must satisfy lo < hi");
    const double span = mode.hi - mode.lo;
    for (std::size_t i = 0; i < raw.values.size(); ++i) {
      if (raw.valid[i]) out.values[i] = std::clamp((raw.values[i] - mode.lo) / span, 0.0, 1.0);
    }
    return out;
  }

  double lo = 0.0;
  double hi = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < raw.values.size(); ++i) {
    if (!raw.valid[i]) continue;
    if (!any) {
      lo = hi = raw.values[i];
      any = true;
    } else {
      lo = std::min(lo, raw.values[i]);
      hi = std::max(hi, raw.values[i]);
    }
  }
  if (!any) return out;
  const double span = hi - lo;
  for (std::size_t i = 0; i < raw.values.size(); ++i) {
    if (!raw.valid[i]) continue;
    out.values[i] = span > 0.0 ? std::clamp((raw.values[i] - lo) / span, 0.0, 1.0) : 0.5;
  }
  return out;
}

PseudoImage encode_dhs(const OrganizedPointCloud& cloud, const DhsOptions& options) {
  std::array<RawChannel, 3> raw = {depth_channel(cloud, options.depth_mode), height_channel(cloud),
                                   signed_angle_channel(cloud)};
  std::vector<std::uint8_t> valid(cloud.size(), 0);
  for (std::size_t i = 0; i < valid.size(); ++i) {
    valid[i] = raw[kDepth].valid[i] && raw[kHeight].valid[i] && raw[kSignedAngle].valid[i];
  }
  for (auto& channel : raw) channel.valid = valid;

  PseudoImage out{cloud.width(), cloud.height(), {}, std::move(valid)};
  out.channels[kDepth] = normalize_channel(raw[kDepth], Normalization::min_max()).values;
  out.channels[kHeight] = normalize_channel(raw[kHeight], Normalization::min_max()).values;
  out.channels[kSignedAngle] = normalize_channel(raw[kSignedAngle], Normalization::fixed_range(-180.0, 180.0)).values;
  return out;
}

RgbImage to_rgb8(const PseudoImage& image) {
  RgbImage out(image.width, image.height);
  auto px = out.pixels();
  for (std::size_t i = 0; i < image.valid.size(); ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      px[i * 3 + c] = static_cast<std::uint8_t>(std::lround(std::clamp(image.channels[c][i], 0.0, 1.0) * 255.0));
    }
  }
  return out;
}

std::vector<std::uint8_t> validity_mask8(const PseudoImage& image) {
  std::vector<std::uint8_t> out(image.valid.size());
  std::transform(image.valid.begin(), image.valid.end(), out.begin(), [](std::uint8_t v) { return v ? 255 : 0; });
  return out;
}

}  // namespace modmix
