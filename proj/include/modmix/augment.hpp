#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "modmix/geometry.hpp"
#include "modmix/rng.hpp"

namespace modmix {

struct Annotation {
  std::int64_t category_id = 0;
  BoundingBox box;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct Augmented {
  RgbImage image;
  std::vector<Annotation> annotations;
};

/// Training-time augmentation schedule. The defaults are the detector
/// pre-training schedule: flip with probability 0.5, resize to width 1333 and
/// a random height in {480, 512, ..., 800}, crop 384 x 600 (height x width);
/// evaluation images are resized to 1120 x 800.
struct AugmentationPolicy {
  double flip_probability = 0.5;
  std::size_t resize_target_width = 1333;
  std::vector<std::size_t> resize_target_heights = {480, 512, 544, 576, 608, 640, 672, 704, 736, 768, 800};
  std::size_t crop_height = 384;
  std::size_t crop_width = 600;
  std::size_t test_width = 1120;
  std::size_t test_height = 800;
  std::uint64_t seed = kDefaultSeed;

  /// Throws InvalidInput when a probability leaves [0, 1], a dimension is
  /// zero, or a test dimension is not a multiple of 32.
  void validate() const;
};

/// Mirror about the vertical axis; box x becomes width - x - w.
Augmented horizontal_flip(const RgbImage& image, std::span<const Annotation> annotations);

/// Uniform scale min(target_width / w, target_height / h) on both axes.
/// The image is resampled bilinearly (pixel-center aligned) to
/// round(w * scale) x round(h * scale); boxes are scaled by the same factor
/// and clipped to the new image, dropping any below 1 px^2.
Augmented resize_keep_ratio(const RgbImage& image, std::span<const Annotation> annotations, std::size_t target_width,
                            std::size_t target_height);

/// Nearest-neighbor resize of a single channel grid (masks, validity).
std::vector<std::uint8_t> resize_nearest(std::span<const std::uint8_t> grid, std::size_t width, std::size_t height,
                                         std::size_t new_width, std::size_t new_height);

/// Crop with a uniform random top-left corner. The crop is clamped to the
/// image size. Boxes are shifted and clipped to the window; those whose
/// clipped area falls below 1 px^2 are dropped.
Augmented random_crop(const RgbImage& image, std::span<const Annotation> annotations, std::size_t crop_height,
                      std::size_t crop_width, Rng& rng);

/// flip (with policy probability) -> resize to a random policy height -> crop.
Augmented apply_train_augmentation(const RgbImage& image, std::span<const Annotation> annotations,
                                   const AugmentationPolicy& policy, Rng& rng);

/// Resize to the policy's evaluation size.
Augmented apply_test_resize(const RgbImage& image, std::span<const Annotation> annotations,
                            const AugmentationPolicy& policy);

}  // namespace modmix
