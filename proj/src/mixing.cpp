#include "modmix/mixing.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <string>

#include "modmix/error.hpp"
#include "modmix/image_io.hpp"
#include "modmix/rng.hpp"

namespace modmix {

namespace {

struct Offset {
  int dr;
  int dc;
};

constexpr std::array<Offset, 8> kNeighborOffsets = {{
    {-1, 0}, {0, 1}, {1, 0}, {0, -1},    // top, right, bottom, left
    {-1, 1}, {1, 1}, {1, -1}, {-1, -1},  // diagonals
}};

std::size_t neighbor_count(Neighborhood n) { return n == Neighborhood::Eight ? 8 : 4; }

void check_probability(double p, const char* name) {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidInput(std::string(name) + " must lie in (0, 1]");
}

}  // namespace

MixtureMask::MixtureMask(std::size_t width, std::size_t height, Label fill)
    : width_(width), height_(height), labels_(width * height, fill) {}

MixtureMask::MixtureMask(std::size_t width, std::size_t height, std::vector<Label> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
  if (labels_.size() != width_ * height_) throw InvalidInput("mask label count does not match its dimensions");
}

double MixtureMask::a_fraction() const {
  if (labels_.empty()) return 0.0;
  const auto a = std::count(labels_.begin(), labels_.end(), Label::A);
  return static_cast<double>(a) / static_cast<double>(labels_.size());
}

MixtureMask cppm_mask(std::size_t width, std::size_t height, std::size_t patch_size, Label origin) {
  if (width == 0 || height == 0) throw InvalidInput("mask dimensions must be positive");
  if (patch_size == 0) throw InvalidInput("patch size must be at least 1");
  std::vector<Label> labels(width * height);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const bool even = ((r / patch_size) + (c / patch_size)) % 2 == 0;
      labels[r * width + c] = even ? origin : opposite(origin);
    }
  }
  return MixtureMask(width, height, std::move(labels));
}

MixtureMask sffm_mask(std::size_t width, std::size_t height, const SffmParams& params) {
  if (width == 0 || height == 0) throw InvalidInput("mask dimensions must be positive");
  check_probability(params.p_a, "p_a");
  check_probability(params.p_b, "p_b");

  Rng rng(params.seed);
  constexpr std::uint8_t kUnassigned = 2;
  std::vector<std::uint8_t> cells(width * height, kUnassigned);
  const std::size_t n_neighbors = neighbor_count(params.neighborhood);
  std::deque<std::size_t> frontier;
  std::optional<Label> previous;

  for (std::size_t start = 0; start < cells.size(); ++start) {
    if (cells[start] != kUnassigned) continue;
    const Label label = previous ? opposite(*previous) : (rng.bernoulli(0.5) ? Label::A : Label::B);
    previous = label;
    const double p = label == Label::A ? params.p_a : params.p_b;
    const auto value = static_cast<std::uint8_t>(label);

    cells[start] = value;
    frontier.push_back(start);
    while (!frontier.empty()) {
      const std::size_t idx = frontier.front();
      frontier.pop_front();
      const auto r = static_cast<long long>(idx / width);
      const auto c = static_cast<long long>(idx % width);
      for (std::size_t k = 0; k < n_neighbors; ++k) {
        const long long nr = r + kNeighborOffsets[k].dr;
        const long long nc = c + kNeighborOffsets[k].dc;
        if (nr < 0 || nc < 0 || nr >= static_cast<long long>(height) || nc >= static_cast<long long>(width)) continue;
        const auto nidx = static_cast<std::size_t>(nr) * width + static_cast<std::size_t>(nc);
        if (cells[nidx] != kUnassigned) continue;
        if (!rng.bernoulli(p)) continue;
        cells[nidx] = value;
        frontier.push_back(nidx);
      }
    }
  }

  std::vector<Label> labels(cells.size());
  std::transform(cells.begin(), cells.end(), labels.begin(), [](std::uint8_t v) { return static_cast<Label>(v); });
  return MixtureMask(width, height, std::move(labels));
}

std::vector<SffmSample> sffm_batch(std::size_t width, std::size_t height, std::size_t count, double prob_low,
                                   double prob_high, Neighborhood neighborhood, std::uint64_t seed) {
  if (count == 0) throw InvalidInput("SFFM batch count must be at least 1");
  if (!(prob_low > 0.0 && prob_low <= prob_high && prob_high <= 1.0)) {
    throw InvalidInput("SFFM probability range must satisfy 0 < low <= high <= 1");
  }
  Rng rng(seed);
  std::vector<SffmSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    SffmParams params;
    params.p_a = rng.uniform(prob_low, prob_high);
    params.p_b = rng.uniform(prob_low, prob_high);
    params.neighborhood = neighborhood;
    params.seed = rng.next();
    out.push_back({params, sffm_mask(width, height, params)});
  }
  return out;
}

RgbImage apply_mask(const RgbImage& a, const RgbImage& b, const MixtureMask& mask) {
  if (a.width() != b.width() || a.height() != b.height() || a.width() != mask.width() ||
      a.height() != mask.height()) {
    throw InvalidInput("images and mask must share dimensions");
  }
  std::vector<std::uint8_t> out(a.pixels().begin(), a.pixels().end());
  const auto pb = b.pixels();
  const auto& labels = mask.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == Label::B) std::copy_n(pb.begin() + static_cast<std::ptrdiff_t>(i * 3), 3, out.begin() + static_cast<std::ptrdiff_t>(i * 3));
  }
  return RgbImage(a.width(), a.height(), std::move(out));
}

RegionStats region_stats(const MixtureMask& mask, Neighborhood neighborhood) {
  const std::size_t w = mask.width();
  const std::size_t h = mask.height();
  const auto& labels = mask.labels();
  std::vector<std::uint8_t> seen(labels.size(), 0);
  std::vector<std::size_t> stack;
  const std::size_t n_neighbors = neighbor_count(neighborhood);
  RegionStats stats;
  for (std::size_t start = 0; start < labels.size(); ++start) {
    if (seen[start]) continue;
    ++stats.regions;
    seen[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t idx = stack.back();
      stack.pop_back();
      const auto r = static_cast<long long>(idx / w);
      const auto c = static_cast<long long>(idx % w);
      for (std::size_t k = 0; k < n_neighbors; ++k) {
        const long long nr = r + kNeighborOffsets[k].dr;
        const long long nc = c + kNeighborOffsets[k].dc;
        if (nr < 0 || nc < 0 || nr >= static_cast<long long>(h) || nc >= static_cast<long long>(w)) continue;
        const auto nidx = static_cast<std::size_t>(nr) * w + static_cast<std::size_t>(nc);
        if (seen[nidx] || labels[nidx] != labels[idx]) continue;
        seen[nidx] = 1;
        stack.push_back(nidx);
      }
    }
  }
  if (stats.regions) stats.mean_region_size = static_cast<double>(labels.size()) / static_cast<double>(stats.regions);
  return stats;
}

void write_mask_png(const std::filesystem::path& path, const MixtureMask& mask) {
  GrayImage gray{mask.width(), mask.height(), 1, {}};
  gray.samples.resize(mask.labels().size());
  std::transform(mask.labels().begin(), mask.labels().end(), gray.samples.begin(),
                 [](Label l) { return static_cast<std::uint16_t>(l == Label::B ? 1 : 0); });
  write_gray_png(path, gray);
}

MixtureMask read_mask_png(const std::filesystem::path& path) {
  const GrayImage gray = read_gray_png(path);
  const std::uint16_t high = static_cast<std::uint16_t>((1u << gray.bit_depth) - 1);
  std::vector<Label> labels(gray.samples.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::uint16_t v = gray.samples[i];
    if (v != 0 && v != high) throw FormatError(path.string() + " is not a binary mask");
    labels[i] = v == 0 ? Label::A : Label::B;
  }
  return MixtureMask(gray.width, gray.height, std::move(labels));
}

}  // namespace modmix
