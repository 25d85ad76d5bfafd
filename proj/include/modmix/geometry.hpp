#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace modmix {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// Points laid out on the sensor grid, one optional point per pixel.
///
/// Rows are scanlines and are traversed left to right. The vertical (up)
/// direction is the +z coordinate axis. Missing measurements are stored as
/// empty optionals, never as sentinel coordinates.
class OrganizedPointCloud {
 public:
  OrganizedPointCloud() = default;
  /// Throws InvalidInput if the grid size does not match or a point is not finite.
  OrganizedPointCloud(std::size_t width, std::size_t height, std::vector<std::optional<Vec3>> points);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return points_.size(); }

  const std::optional<Vec3>& at(std::size_t row, std::size_t col) const { return points_[row * width_ + col]; }
  std::span<const std::optional<Vec3>> points() const { return points_; }

  std::size_t present_count() const;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::optional<Vec3>> points_;
};

/// 8-bit three channel image, row-major, interleaved RGB.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(std::size_t width, std::size_t height);
  /// Throws InvalidInput unless pixels.size() == width * height * 3.
  RgbImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::span<const std::uint8_t> pixels() const { return pixels_; }
  std::span<std::uint8_t> pixels() { return pixels_; }

  std::uint8_t at(std::size_t row, std::size_t col, std::size_t channel) const {
    return pixels_[(row * width_ + col) * 3 + channel];
  }
  std::uint8_t& at(std::size_t row, std::size_t col, std::size_t channel) {
    return pixels_[(row * width_ + col) * 3 + channel];
  }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Axis-aligned box in continuous pixel coordinates: top-left corner plus extent.
/// Area is w * h (no "+1" pixel convention).
class BoundingBox {
 public:
  /// Throws InvalidInput unless all values are finite and w > 0, h > 0.
  BoundingBox(double x, double y, double w, double h);

  double x() const { return x_; }
  double y() const { return y_; }
  double w() const { return w_; }
  double h() const { return h_; }
  double right() const { return x_ + w_; }
  double bottom() const { return y_ + h_; }
  double area() const { return w_ * h_; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;

 private:
  double x_;
  double y_;
  double w_;
  double h_;
};

/// Intersection over union; 0 for disjoint boxes, symmetric in its arguments.
double box_iou(const BoundingBox& a, const BoundingBox& b);

/// Intersection of a box with the window [0, width) x [0, height), or nullopt
/// if the clipped area falls below min_area.
std::optional<BoundingBox> clip_box(const BoundingBox& box, double width, double height, double min_area = 1.0);

}  // namespace modmix
