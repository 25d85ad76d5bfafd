#pragma once

#include <filesystem>

#include "modmix/geometry.hpp"
#include "modmix/image_io.hpp"

namespace modmix {

// OPC1 container, all integers and floats little-endian:
//   bytes 0..3   "OPC1"
//   bytes 4..7   uint32 width
//   bytes 8..11  uint32 height
//   then width*height records of three float64 (x, y, z), row-major.
// A record whose three values are all NaN is a missing point.

OrganizedPointCloud read_opc(const std::filesystem::path& path);
void write_opc(const std::filesystem::path& path, const OrganizedPointCloud& cloud);

/// Pinhole intrinsics taken from a 3x3 camera matrix
///   fx  0 cx
///    0 fy cy
///    0  0  1
struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
};

/// Parses nine whitespace separated numbers (row-major 3x3 matrix).
Intrinsics read_intrinsics(const std::filesystem::path& path);

/// Back-projects a depth map into a z-up sensor frame: x to the right,
/// y along the optical axis, z up. For pixel (u, v) with depth d meters:
///   x = (u - cx) d / fx,  y = d,  z = -(v - cy) d / fy.
/// Zero depth is a missing point. depth_scale converts raw units to meters.
OrganizedPointCloud backproject_depth(const GrayImage& depth, const Intrinsics& k, double depth_scale = 0.001);

/// 16-bit millimeter depth PNG plus intrinsics sidecar.
OrganizedPointCloud load_depth_cloud(const std::filesystem::path& depth_png, const std::filesystem::path& intrinsics);

/// Sidecar intrinsics path for a depth PNG: "<stem>.intrinsics.txt" next to it.
std::filesystem::path intrinsics_sidecar(const std::filesystem::path& depth_png);

/// OPC1 for any extension except ".png", which is read as a depth map with
/// its sidecar intrinsics.
OrganizedPointCloud load_cloud(const std::filesystem::path& path);

}  // namespace modmix
