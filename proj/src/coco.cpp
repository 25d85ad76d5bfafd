#include "modmix/coco.hpp"

#include <fstream>
#include <set>

#include "modmix/error.hpp"

namespace modmix {

namespace {

using nlohmann::json;

const json& field(const json& obj, const char* name, const char* where) {
  if (!obj.is_object() || !obj.contains(name)) {
    throw FormatError(std::string(where) + ": missing field '" + name + "'");
  }
  return obj.at(name);
}

template <typename T>
T get(const json& obj, const char* name, const char* where) {
  try {
    return field(obj, name, where).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string(where) + ": field '" + name + "' has the wrong type");
  }
}

BoundingBox bbox_from(const json& obj, const char* where) {
  const json& b = field(obj, "bbox", where);
  if (!b.is_array() || b.size() != 4 || !std::all_of(b.begin(), b.end(), [](const json& v) { return v.is_number(); })) {
    throw FormatError(std::string(where) + ": bbox must be [x, y, w, h]");
  }
  try {
    return BoundingBox(b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>());
  } catch (const InvalidInput& e) {
    throw FormatError(std::string(where) + ": " + e.what());
  }
}

json bbox_to(const BoundingBox& b) { return json::array({b.x(), b.y(), b.w(), b.h()}); }

json provenance_to(const Provenance& p) {
  json j = {{"source_id", p.source_id}, {"modality", p.modality}};
  if (p.patch_size) j["patch_size"] = *p.patch_size;
  if (p.p_a) j["p_a"] = *p.p_a;
  if (p.p_b) j["p_b"] = *p.p_b;
  if (p.seed) j["seed"] = *p.seed;
  return j;
}

Provenance provenance_from(const json& j) {
  const char* where = "image provenance";
  Provenance p{get<std::string>(j, "source_id", where), get<std::string>(j, "modality", where), {}, {}, {}, {}};
  if (j.contains("patch_size")) p.patch_size = get<std::size_t>(j, "patch_size", where);
  if (j.contains("p_a")) p.p_a = get<double>(j, "p_a", where);
  if (j.contains("p_b")) p.p_b = get<double>(j, "p_b", where);
  if (j.contains("seed")) p.seed = get<std::uint64_t>(j, "seed", where);
  return p;
}

}  // namespace

json CocoDocument::to_json() const {
  json imgs = json::array();
  for (const auto& im : images) {
    json j = {{"id", im.id}, {"file_name", im.file_name}, {"width", im.width}, {"height", im.height}};
    if (im.provenance) j["provenance"] = provenance_to(*im.provenance);
    imgs.push_back(std::move(j));
  }
  json anns = json::array();
  for (const auto& a : annotations) {
    anns.push_back({{"id", a.id},
                    {"image_id", a.image_id},
                    {"category_id", a.category_id},
                    {"bbox", bbox_to(a.bbox)},
                    {"area", a.area},
                    {"iscrowd", a.iscrowd}});
  }
  json cats = json::array();
  for (const auto& c : categories) cats.push_back({{"id", c.id}, {"name", c.name}});
  return {{"images", imgs}, {"annotations", anns}, {"categories", cats}};
}

CocoDocument CocoDocument::from_json(const json& doc) {
  if (!doc.is_object()) throw FormatError("COCO document must be a JSON object");
  CocoDocument out;
  for (const char* key : {"images", "annotations", "categories"}) {
    if (!doc.contains(key) || !doc.at(key).is_array()) {
      throw FormatError(std::string("COCO document: '") + key + "' must be an array");
    }
  }
  for (const auto& j : doc.at("images")) {
    CocoImage im{get<std::int64_t>(j, "id", "image"), get<std::string>(j, "file_name", "image"),
                 get<std::size_t>(j, "width", "image"), get<std::size_t>(j, "height", "image"), std::nullopt};
    if (j.contains("provenance")) im.provenance = provenance_from(j.at("provenance"));
    out.images.push_back(std::move(im));
  }
  for (const auto& j : doc.at("annotations")) {
    CocoAnnotation a{get<std::int64_t>(j, "id", "annotation"),
                     get<std::int64_t>(j, "image_id", "annotation"),
                     get<std::int64_t>(j, "category_id", "annotation"),
                     bbox_from(j, "annotation"),
                     0.0,
                     0};
    a.area = j.contains("area") ? get<double>(j, "area", "annotation") : a.bbox.area();
    if (j.contains("iscrowd")) a.iscrowd = get<int>(j, "iscrowd", "annotation");
    out.annotations.push_back(a);
  }
  for (const auto& j : doc.at("categories")) {
    out.categories.push_back({get<std::int64_t>(j, "id", "category"), get<std::string>(j, "name", "category")});
  }
  return out;
}

std::vector<GroundTruth> CocoDocument::ground_truth() const {
  std::vector<GroundTruth> out;
  out.reserve(annotations.size());
  for (const auto& a : annotations) {
    if (a.iscrowd) continue;
    out.push_back({a.image_id, a.category_id, a.bbox});
  }
  return out;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw FormatError("write failed: " + path.string());
}

CocoDocument read_coco(const std::filesystem::path& path) {
  try {
    return CocoDocument::from_json(read_json_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_coco(const std::filesystem::path& path, const CocoDocument& doc) { write_json_file(path, doc.to_json()); }

std::vector<std::string> check_referential_integrity(const CocoDocument& doc) {
  std::vector<std::string> problems;
  std::map<std::int64_t, const CocoImage*> images;
  std::set<std::int64_t> categories;
  std::set<std::int64_t> annotation_ids;
  for (const auto& im : doc.images) {
    if (!images.emplace(im.id, &im).second) problems.push_back("duplicate image id " + std::to_string(im.id));
  }
  for (const auto& c : doc.categories) {
    if (!categories.insert(c.id).second) problems.push_back("duplicate category id " + std::to_string(c.id));
  }
  for (const auto& a : doc.annotations) {
    const std::string tag = "annotation " + std::to_string(a.id);
    if (!annotation_ids.insert(a.id).second) problems.push_back("duplicate " + tag);
    if (!categories.count(a.category_id)) problems.push_back(tag + " has unknown category " + std::to_string(a.category_id));
    auto it = images.find(a.image_id);
    if (it == images.end()) {
      problems.push_back(tag + " references missing image " + std::to_string(a.image_id));
      continue;
    }
    const CocoImage& im = *it->second;
    if (a.bbox.x() < 0.0 || a.bbox.y() < 0.0 || a.bbox.right() > static_cast<double>(im.width) ||
        a.bbox.bottom() > static_cast<double>(im.height)) {
      problems.push_back(tag + " lies outside image " + std::to_string(im.id));
    }
  }
  return problems;
}

std::vector<Detection> detections_from_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw FormatError("detections must be a JSON array");
  std::vector<Detection> out;
  out.reserve(doc.size());
  for (const auto& j : doc) {
    out.push_back({get<std::int64_t>(j, "image_id", "detection"), get<std::int64_t>(j, "category_id", "detection"),
                   bbox_from(j, "detection"), get<double>(j, "score", "detection")});
  }
  return out;
}

nlohmann::json detections_to_json(const std::vector<Detection>& detections) {
  json out = json::array();
  for (const auto& d : detections) {
    out.push_back(
        {{"image_id", d.image_id}, {"category_id", d.category_id}, {"bbox", bbox_to(d.box)}, {"score", d.score}});
  }
  return out;
}

std::vector<Detection> read_detections(const std::filesystem::path& path) {
  try {
    return detections_from_json(read_json_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace modmix
