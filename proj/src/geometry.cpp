#include "modmix/geometry.hpp"

#include <algorithm>
#include <string>

#include "modmix/error.hpp"

namespace modmix {

OrganizedPointCloud::OrganizedPointCloud(std::size_t width, std::size_t height,
                                         std::vector<std::optional<Vec3>> points)
    : width_(width), height_(height), points_(std::move(points)) {
  if (points_.size() != width_ * height_) {
    throw InvalidInput("point grid has " + std::to_string(points_.size()) + " entries, expected " +
                       std::to_string(width_ * height_));
  }
  for (const auto& p : points_) {
    if (p && !(std::isfinite(p->x) && std::isfinite(p->y) && std::isfinite(p->z))) {
      throw InvalidInput("point cloud contains a non-finite coordinate");
    }
  }
}

std::size_t OrganizedPointCloud::present_count() const {
  return static_cast<std::size_t>(std::count_if(points_.begin(), points_.end(), [](const auto& p) { return p.has_value(); }));
}

RgbImage::RgbImage(std::size_t width, std::size_t height) : width_(width), height_(height), pixels_(width * height * 3, 0) {}

RgbImage::RgbImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (pixels_.size() != width_ * height_ * 3) {
    throw InvalidInput("RGB buffer has " + std::to_string(pixels_.size()) + " bytes, expected " +
                       std::to_string(width_ * height_ * 3));
  }
}

BoundingBox::BoundingBox(double x, double y, double w, double h) : x_(x), y_(y), w_(w), h_(h) {
  if (!(std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h))) {
    throw InvalidInput("bounding box has a non-finite coordinate");
  }
  if (!(w > 0.0 && h > 0.0)) {
    throw InvalidInput("bounding box extent must be positive");
  }
}

double box_iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.x(), b.x());
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y(), b.y());
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

std::optional<BoundingBox> clip_box(const BoundingBox& box, double width, double height, double min_area) {
  const double x0 = std::clamp(box.x(), 0.0, width);
  const double y0 = std::clamp(box.y(), 0.0, height);
  const double x1 = std::clamp(box.right(), 0.0, width);
  const double y1 = std::clamp(box.bottom(), 0.0, height);
  const double w = x1 - x0;
  const double h = y1 - y0;
  if (w <= 0.0 || h <= 0.0 || w * h < min_area) return std::nullopt;
  return BoundingBox(x0, y0, w, h);
}

}  // namespace modmix
