#include "modmix/augment.hpp"

#include <algorithm>
#include <cmath>

#include "modmix/error.hpp"

namespace modmix {

void AugmentationPolicy::validate() const {
  if (!(flip_probability >= 0.0 && flip_probability <= 1.0)) throw InvalidInput("flip probability must lie in [0, 1]");
  if (resize_target_width == 0 || resize_target_heights.empty() || crop_height == 0 || crop_width == 0 ||
      test_width == 0 || test_height == 0) {
    throw InvalidInput("augmentation dimensions must be positive");
  }
  if (std::find(resize_target_heights.begin(), resize_target_heights.end(), std::size_t{0}) !=
      resize_target_heights.end()) {
    throw InvalidInput("augmentation dimensions must be positive");
  }
  if (test_width % 32 != 0 || test_height % 32 != 0) throw InvalidInput("test dimensions must be divisible by 32");
}

Augmented horizontal_flip(const RgbImage& image, std::span<const Annotation> annotations) {
  const std::size_t w = image.width();
  RgbImage out(w, image.height());
  for (std::size_t r = 0; r < image.height(); ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      for (std::size_t ch = 0; ch < 3; ++ch) out.at(r, w - 1 - c, ch) = image.at(r, c, ch);
    }
  }
  std::vector<Annotation> boxes;
  boxes.reserve(annotations.size());
  for (const auto& a : annotations) {
    boxes.push_back({a.category_id, BoundingBox(static_cast<double>(w) - a.box.x() - a.box.w(), a.box.y(), a.box.w(),
                                                a.box.h())});
  }
  return {std::move(out), std::move(boxes)};
}

Augmented resize_keep_ratio(const RgbImage& image, std::span<const Annotation> annotations, std::size_t target_width,
                            std::size_t target_height) {
  if (target_width == 0 || target_height == 0) throw InvalidInput("resize targets must be positive");
  if (image.width() == 0 || image.height() == 0) throw InvalidInput("cannot resize an empty image");
  const double sw = static_cast<double>(target_width) / static_cast<double>(image.width());
  const double sh = static_cast<double>(target_height) / static_cast<double>(image.height());
  const double scale = std::min(sw, sh);
  const auto nw = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(image.width() * scale)));
  const auto nh = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(image.height() * scale)));

  RgbImage out(nw, nh);
  const auto max_c = static_cast<double>(image.width() - 1);
  const auto max_r = static_cast<double>(image.height() - 1);
  for (std::size_t r = 0; r < nh; ++r) {
    const double sy = std::clamp((static_cast<double>(r) + 0.5) / scale - 0.5, 0.0, max_r);
    const auto y0 = static_cast<std::size_t>(sy);
    const std::size_t y1 = std::min(y0 + 1, image.height() - 1);
    const double fy = sy - static_cast<double>(y0);
    for (std::size_t c = 0; c < nw; ++c) {
      const double sx = std::clamp((static_cast<double>(c) + 0.5) / scale - 0.5, 0.0, max_c);
      const auto x0 = static_cast<std::size_t>(sx);
      const std::size_t x1 = std::min(x0 + 1, image.width() - 1);
      const double fx = sx - static_cast<double>(x0);
      for (std::size_t ch = 0; ch < 3; ++ch) {
        const double top = image.at(y0, x0, ch) * (1.0 - fx) + image.at(y0, x1, ch) * fx;
        const double bottom = image.at(y1, x0, ch) * (1.0 - fx) + image.at(y1, x1, ch) * fx;
        out.at(r, c, ch) = static_cast<std::uint8_t>(std::lround(std::clamp(top * (1.0 - fy) + bottom * fy, 0.0, 255.0)));
      }
    }
  }

  std::vector<Annotation> boxes;
  for (const auto& a : annotations) {
    const BoundingBox scaled(a.box.x() * scale, a.box.y() * scale, a.box.w() * scale, a.box.h() * scale);
    if (auto clipped = clip_box(scaled, static_cast<double>(nw), static_cast<double>(nh))) {
      boxes.push_back({a.category_id, *clipped});
    }
  }
  return {std::move(out), std::move(boxes)};
}

std::vector<std::uint8_t> resize_nearest(std::span<const std::uint8_t> grid, std::size_t width, std::size_t height,
                                         std::size_t new_width, std::size_t new_height) {
  if (grid.size() != width * height) throw InvalidInput("grid size does not match its dimensions");
  if (width == 0 || height == 0 || new_width == 0 || new_height == 0) throw InvalidInput("dimensions must be positive");
  std::vector<std::uint8_t> out(new_width * new_height);
  for (std::size_t r = 0; r < new_height; ++r) {
    const std::size_t sr = std::min(height - 1, r * height / new_height);
    for (std::size_t c = 0; c < new_width; ++c) {
      const std::size_t sc = std::min(width - 1, c * width / new_width);
      out[r * new_width + c] = grid[sr * width + sc];
    }
  }
  return out;
}

Augmented random_crop(const RgbImage& image, std::span<const Annotation> annotations, std::size_t crop_height,
                      std::size_t crop_width, Rng& rng) {
  const std::size_t ch = std::min(crop_height, image.height());
  const std::size_t cw = std::min(crop_width, image.width());
  if (ch == 0 || cw == 0) throw InvalidInput("crop size must be positive");
  const std::size_t top = static_cast<std::size_t>(rng.uniform_index(image.height() - ch + 1));
  const std::size_t left = static_cast<std::size_t>(rng.uniform_index(image.width() - cw + 1));

  RgbImage out(cw, ch);
  for (std::size_t r = 0; r < ch; ++r) {
    const auto src = image.pixels().subspan(((top + r) * image.width() + left) * 3, cw * 3);
    std::copy(src.begin(), src.end(), out.pixels().begin() + static_cast<std::ptrdiff_t>(r * cw * 3));
  }
  std::vector<Annotation> boxes;
  for (const auto& a : annotations) {
    const BoundingBox shifted(a.box.x() - static_cast<double>(left), a.box.y() - static_cast<double>(top), a.box.w(),
                              a.box.h());
    if (auto clipped = clip_box(shifted, static_cast<double>(cw), static_cast<double>(ch))) {
      boxes.push_back({a.category_id, *clipped});
    }
  }
  return {std::move(out), std::move(boxes)};
}

Augmented apply_train_augmentation(const RgbImage& image, std::span<const Annotation> annotations,
                                   const AugmentationPolicy& policy, Rng& rng) {
  policy.validate();
  Augmented current{image, {annotations.begin(), annotations.end()}};
  if (rng.bernoulli(policy.flip_probability)) current = horizontal_flip(current.image, current.annotations);
  const std::size_t height = policy.resize_target_heights[rng.uniform_index(policy.resize_target_heights.size())];
  current = resize_keep_ratio(current.image, current.annotations, policy.resize_target_width, height);
  return random_crop(current.image, current.annotations, policy.crop_height, policy.crop_width, rng);
}

Augmented apply_test_resize(const RgbImage& image, std::span<const Annotation> annotations,
                            const AugmentationPolicy& policy) {
  policy.validate();
  return resize_keep_ratio(image, annotations, policy.test_width, policy.test_height);
}

}  // namespace modmix
