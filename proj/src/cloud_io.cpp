#include "modmix/cloud_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "modmix/error.hpp"

namespace modmix {

namespace {

constexpr char kMagic[4] = {'O', 'P', 'C', '1'};
constexpr std::size_t kHeaderBytes = 12;

template <typename T>
T load_le(const unsigned char* p) {
  T value;
  std::memcpy(&value, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    value = std::bit_cast<T>(bytes);
  }
  return value;
}

template <typename T>
void store_le(std::string& out, T value) {
  auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.append(bytes.data(), bytes.size());
}

}  // namespace

OrganizedPointCloud read_opc(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (data.size() < kHeaderBytes || std::memcmp(data.data(), kMagic, 4) != 0) {
    throw FormatError(path.string() + ": missing OPC1 header");
  }
  const auto width = load_le<std::uint32_t>(data.data() + 4);
  const auto height = load_le<std::uint32_t>(data.data() + 8);
  const std::size_t count = static_cast<std::size_t>(width) * height;
  if (data.size() != kHeaderBytes + count * 24) {
    throw FormatError(path.string() + ": expected " + std::to_string(kHeaderBytes + count * 24) + " bytes, found " +
                      std::to_string(data.size()));
  }
  std::vector<std::optional<Vec3>> points(count);
  const unsigned char* p = data.data() + kHeaderBytes;
  for (std::size_t i = 0; i < count; ++i, p += 24) {
    const double x = load_le<double>(p);
    const double y = load_le<double>(p + 8);
    const double z = load_le<double>(p + 16);
    if (std::isnan(x) && std::isnan(y) && std::isnan(z)) continue;
    if (!(std::isfinite(x) && std::isfinite(y) && std::isfinite(z))) {
      throw FormatError(path.string() + ": record " + std::to_string(i) + " is neither finite nor missing");
    }
    points[i] = Vec3{x, y, z};
  }
  return OrganizedPointCloud(width, height, std::move(points));
}

void write_opc(const std::filesystem::path& path, const OrganizedPointCloud& cloud) {
  if (cloud.width() > std::numeric_limits<std::uint32_t>::max() || cloud.height() > std::numeric_limits<std::uint32_t>::max()) {
    throw InvalidInput("cloud too large for OPC1");
  }
  std::string out;
  out.reserve(kHeaderBytes + cloud.size() * 24);
  out.append(kMagic, 4);
  store_le(out, static_cast<std::uint32_t>(cloud.width()));
  store_le(out, static_cast<std::uint32_t>(cloud.height()));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& p : cloud.points()) {
    store_le(out, p ? p->x : nan);
    store_le(out, p ? p->y : nan);
    store_le(out, p ? p->z : nan);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw FormatError("write failed: " + path.string());
}

Intrinsics read_intrinsics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  double m[9];
  for (double& v : m) {
    if (!(in >> v)) throw FormatError(path.string() + ": expected nine numbers for a 3x3 intrinsics matrix");
  }
  std::string rest;
  if (in >> rest) throw FormatError(path.string() + ": trailing data after intrinsics matrix");
  Intrinsics k{m[0], m[4], m[2], m[5]};
  if (!(k.fx > 0.0 && k.fy > 0.0) || !std::isfinite(k.cx) || !std::isfinite(k.cy)) {
    throw FormatError(path.string() + ": focal lengths must be positive");
  }
  return k;
}

OrganizedPointCloud backproject_depth(const GrayImage& depth, const Intrinsics& k, double depth_scale) {
  if (depth.samples.size() != depth.width * depth.height) throw InvalidInput("depth buffer size mismatch");
  std::vector<std::optional<Vec3>> points(depth.samples.size());
  for (std::size_t v = 0; v < depth.height; ++v) {
    for (std::size_t u = 0; u < depth.width; ++u) {
      const std::uint16_t raw = depth.samples[v * depth.width + u];
      if (raw == 0) continue;
      const double d = raw * depth_scale;
      points[v * depth.width + u] = Vec3{(static_cast<double>(u) - k.cx) * d / k.fx, d,
                                         -(static_cast<double>(v) - k.cy) * d / k.fy};
    }
  }
  return OrganizedPointCloud(depth.width, depth.height, std::move(points));
}

OrganizedPointCloud load_depth_cloud(const std::filesystem::path& depth_png, const std::filesystem::path& intrinsics) {
  GrayImage depth = read_gray_png(depth_png);
  if (depth.bit_depth != 16) throw FormatError(depth_png.string() + ": depth map must be a 16-bit grayscale PNG");
  return backproject_depth(depth, read_intrinsics(intrinsics));
}

std::filesystem::path intrinsics_sidecar(const std::filesystem::path& depth_png) {
  auto p = depth_png;
  p.replace_extension(".intrinsics.txt");
  return p;
}

OrganizedPointCloud load_cloud(const std::filesystem::path& path) {
  if (path.extension() == ".png") return load_depth_cloud(path, intrinsics_sidecar(path));
  return read_opc(path);
}

}  // namespace modmix
