#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "modmix/eval.hpp"
#include "modmix/geometry.hpp"

namespace modmix {

/// Where a dataset image came from. Written as "provenance" on each image.
struct Provenance {
  std::string source_id;
  std::string modality;  ///< rgb, dhs, cppm or sffm
  std::optional<std::size_t> patch_size;
  std::optional<double> p_a;
  std::optional<double> p_b;
  std::optional<std::uint64_t> seed;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct CocoImage {
  std::int64_t id = 0;
  std::string file_name;
  std::size_t width = 0;
  std::size_t height = 0;
  std::optional<Provenance> provenance;
};

struct CocoAnnotation {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  BoundingBox bbox;
  double area = 0.0;
  int iscrowd = 0;
};

struct CocoDocument {
  std::vector<CocoImage> images;
  std::vector<CocoAnnotation> annotations;
  std::vector<CategoryInfo> categories;

  nlohmann::json to_json() const;
  /// Throws FormatError on missing or ill-typed fields.
  static CocoDocument from_json(const nlohmann::json& doc);

  std::vector<GroundTruth> ground_truth() const;
};

CocoDocument read_coco(const std::filesystem::path& path);
/// Two-space indented JSON followed by a newline.
void write_coco(const std::filesystem::path& path, const CocoDocument& doc);

/// Problems found: duplicate ids, annotations pointing at missing images or
/// categories, boxes outside their image. Empty when the document is sound.
std::vector<std::string> check_referential_integrity(const CocoDocument& doc);

/// COCO results format: array of {image_id, category_id, bbox, score}.
std::vector<Detection> detections_from_json(const nlohmann::json& doc);
nlohmann::json detections_to_json(const std::vector<Detection>& detections);
std::vector<Detection> read_detections(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace modmix
