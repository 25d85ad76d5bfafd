#include "modmix/categories.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include <json.hpp>

#include "modmix/error.hpp"

namespace modmix {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool is_subset(const CategorySet& small, const CategorySet& large) {
  return std::all_of(small.categories.begin(), small.categories.end(),
                     [&](const std::string& c) { return large.contains(c); });
}

}  // namespace

bool CategorySet::contains(const std::string& category) const {
  return std::find(categories.begin(), categories.end(), category) != categories.end();
}

void CategorySet::validate() const {
  if (categories.empty()) throw InvalidInput("category set '" + name + "' is empty");
  std::set<std::string> seen;
  for (const auto& c : categories) {
    if (!seen.insert(c).second) throw InvalidInput("category set '" + name + "' lists '" + c + "' twice");
  }
}

const CategorySet& sunrgbd16() {
  static const CategorySet set{"sunrgbd16",
                               {"bed", "toilet", "night stand", "bathtub", "chair", "dresser", "sofa", "table", "desk",
                                "bookshelf", "sofa chair", "kitchen counter", "kitchen cabinet", "garbage bin",
                                "microwave", "sink"}};
  return set;
}

const CategorySet& sunrgbd10() {
  static const CategorySet set{"sunrgbd10",
                               {sunrgbd16().categories.begin(), sunrgbd16().categories.begin() + 10}};
  return set;
}

std::vector<CategorySet> load_category_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw FormatError(path.string() + ": expected an object of subgroup lists");
  std::vector<CategorySet> sets;
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_array()) throw FormatError(path.string() + ": subgroup '" + key + "' is not a list");
    CategorySet set{lower(key), {}};
    for (const auto& name : value) {
      if (!name.is_string()) throw FormatError(path.string() + ": subgroup '" + key + "' has a non-string entry");
      set.categories.push_back(name.get<std::string>());
    }
    set.validate();
    sets.push_back(std::move(set));
  }
  return sets;
}

std::vector<CategorySet> make_subgroups(const std::vector<CategorySet>& configured) {
  std::vector<CategorySet> out = {sunrgbd10(), sunrgbd16()};
  for (const auto& set : configured) {
    if (set.name == "sunrgbd10" || set.name == "sunrgbd16") {
      throw InvalidInput("subgroup '" + set.name + "' is built in and cannot be redefined");
    }
    if (find_subgroup(out, set.name)) throw InvalidInput("subgroup '" + set.name + "' configured twice");
    set.validate();
    out.push_back(set);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const CategorySet& a, const CategorySet& b) { return a.categories.size() < b.categories.size(); });

  const std::vector<std::string> chain = {"sunrgbd10", "sunrgbd16", "sunrgbd66", "sunrgbd79"};
  std::optional<CategorySet> previous;
  for (const auto& name : chain) {
    auto set = find_subgroup(out, name);
    if (!set) continue;
    if (previous && !is_subset(*previous, *set)) {
      throw InvalidInput("subgroup " + previous->name + " is not contained in " + set->name);
    }
    previous = std::move(set);
  }
  return out;
}

std::optional<CategorySet> find_subgroup(const std::vector<CategorySet>& subgroups, const std::string& name) {
  const std::string key = lower(name);
  for (const auto& s : subgroups) {
    if (s.name == key) return s;
  }
  return std::nullopt;
}

}  // namespace modmix
