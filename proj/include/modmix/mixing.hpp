#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "modmix/geometry.hpp"

namespace modmix {

/// Which modality supplies a pixel. A is the first image (RGB by
/// convention), B the second (DHS).
enum class Label : std::uint8_t { A = 0, B = 1 };

constexpr Label opposite(Label l) { return l == Label::A ? Label::B : Label::A; }

enum class Neighborhood : int { Four = 4, Eight = 8 };

class MixtureMask {
 public:
  MixtureMask() = default;
  MixtureMask(std::size_t width, std::size_t height, Label fill = Label::A);
  /// Throws InvalidInput if labels.size() != width * height.
  MixtureMask(std::size_t width, std::size_t height, std::vector<Label> labels);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  Label at(std::size_t row, std::size_t col) const { return labels_[row * width_ + col]; }
  const std::vector<Label>& labels() const { return labels_; }

  /// Share of pixels labelled A; 0 for an empty mask.
  double a_fraction() const;

  friend bool operator==(const MixtureMask&, const MixtureMask&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<Label> labels_;
};

/// Chessboard per-patch mask: pixel (r, c) lies in patch (r / patch_size,
/// c / patch_size) and carries origin iff the patch row + column is even.
MixtureMask cppm_mask(std::size_t width, std::size_t height, std::size_t patch_size, Label origin = Label::A);

struct SffmParams {
  double p_a = 0.5;
  double p_b = 0.5;
  Neighborhood neighborhood = Neighborhood::Four;
  std::uint64_t seed = 0;
};

/// Stochastic flood fill mask.
///
/// Pixels are scanned in row-major order. Each unassigned pixel starts a new
/// region: the first region's label is A or B with probability 1/2
/// (rng.bernoulli(0.5) true -> A), every later region takes the opposite of
/// the previous region's label. The region grows breadth-first from its seed;
/// for each dequeued pixel the neighbors are visited in the order top, right,
/// bottom, left (then top-right, bottom-right, bottom-left, top-left in
/// 8-neighbor mode) and every unassigned in-bounds neighbor joins the region
/// if rng.bernoulli(p_label) succeeds. The draw is made per attempt, so a
/// pixel rejected from one neighbor may still be reached through another.
/// Throws InvalidInput unless both probabilities lie in (0, 1].
MixtureMask sffm_mask(std::size_t width, std::size_t height, const SffmParams& params);

struct SffmSample {
  SffmParams params;
  MixtureMask mask;
};

/// count masks whose (p_a, p_b) are drawn uniformly from [prob_low, prob_high].
/// The batch generator draws, per mask, p_a then p_b then the mask seed.
std::vector<SffmSample> sffm_batch(std::size_t width, std::size_t height, std::size_t count, double prob_low,
                                   double prob_high, Neighborhood neighborhood, std::uint64_t seed);

/// Pixel copy: a where the mask says A, b where it says B. Never blends.
/// Throws InvalidInput on any dimension mismatch.
RgbImage apply_mask(const RgbImage& a, const RgbImage& b, const MixtureMask& mask);

struct RegionStats {
  std::size_t regions = 0;
  double mean_region_size = 0.0;
};

/// Connected same-label regions.
RegionStats region_stats(const MixtureMask& mask, Neighborhood neighborhood = Neighborhood::Four);

/// 1-bit grayscale PNG; A is 0, B is 1.
void write_mask_png(const std::filesystem::path& path, const MixtureMask& mask);

/// Accepts grayscale PNGs whose samples are all 0 or the maximum value of
/// their bit depth. Throws FormatError for anything else.
MixtureMask read_mask_png(const std::filesystem::path& path);

}  // namespace modmix
