#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "modmix/geometry.hpp"

namespace modmix {

/// Unnormalized per-pixel scalar with a validity flag per pixel.
struct RawChannel {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;

  std::size_t valid_count() const;
};

enum class DepthMode {
  Range,    ///< Euclidean distance from the sensor origin.
  Forward,  ///< Coordinate along the optical axis (+y in the z-up sensor frame).
};

struct Normalization {
  enum class Kind { MinMax, FixedRange };
  Kind kind = Kind::MinMax;
  double lo = 0.0;
  double hi = 1.0;

  static Normalization min_max() { return {Kind::MinMax, 0.0, 0.0}; }
  static Normalization fixed_range(double lo, double hi) { return {Kind::FixedRange, lo, hi}; }
};

enum DhsChannel : std::size_t { kDepth = 0, kHeight = 1, kSignedAngle = 2 };

/// Three unit-interval channels (depth, height, signed angle). A pixel is
/// valid iff all three raw channels were computable there; invalid pixels
/// hold 0 in every channel.
struct PseudoImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::array<std::vector<double>, 3> channels;
  std::vector<std::uint8_t> valid;
};

RawChannel depth_channel(const OrganizedPointCloud& cloud, DepthMode mode = DepthMode::Range);

/// Coordinate along the up (+z) axis.
RawChannel height_channel(const OrganizedPointCloud& cloud);

/// Signed angle along each scanline (grid row).
///
/// With D_k = X_{k+1} - X_k, the value at pixel k is the angle in degrees
/// between D_k and +z, multiplied by the sign of D_k . D_{k-1}. A zero dot
/// product gives exactly 0. The pixel is invalid when X_{k-1}, X_k or
/// X_{k+1} is missing or either difference vector has zero length, so the
/// first and last column are always invalid. Throws InvalidInput if the
/// cloud is narrower than 2 pixels.
RawChannel signed_angle_channel(const OrganizedPointCloud& cloud);

/// Maps valid values into [0, 1]. Min-max: min -> 0, max -> 1, a constant
/// channel -> 0.5. Fixed range: affine map of [lo, hi] clamped to [0, 1].
/// Invalid pixels become 0.
RawChannel normalize_channel(const RawChannel& raw, Normalization mode);

struct DhsOptions {
  DepthMode depth_mode = DepthMode::Range;
};

/// Depth and height are min-max normalized over the pixels valid in all three
/// channels; the signed angle uses the fixed range [-180, 180].
PseudoImage encode_dhs(const OrganizedPointCloud& cloud, const DhsOptions& options = {});

/// value -> round(value * 255), channels in (D, H, S) order.
RgbImage to_rgb8(const PseudoImage& image);

/// 255 where valid, 0 elsewhere.
std::vector<std::uint8_t> validity_mask8(const PseudoImage& image);

}  // namespace modmix
