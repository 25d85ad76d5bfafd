#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace modmix {

/// A named, ordered list of category names (an evaluation subgroup).
struct CategorySet {
  std::string name;
  std::vector<std::string> categories;

  bool contains(const std::string& category) const;
  /// Throws InvalidInput on duplicate names or an empty list.
  void validate() const;
};

/// The sixteen categories reported per column in the SUN RGB-D 2D detection
/// comparison, in that order.
const CategorySet& sunrgbd16();

/// First ten entries of sunrgbd16().
const CategorySet& sunrgbd10();

/// Loads subgroups from a JSON object mapping subgroup name to a list of
/// category names, e.g. {"sunrgbd66": [...], "sunrgbd79": [...]}. Keys are
/// lower-cased. The built-in sunrgbd10/16 sets are not overridable.
std::vector<CategorySet> load_category_config(const std::filesystem::path& path);

/// Built-in sets followed by configured ones, sorted by size. Checks
/// sunrgbd10 < sunrgbd16 < sunrgbd66 < sunrgbd79 (subset chain) for the
/// sets present; throws InvalidInput when the chain is broken.
std::vector<CategorySet> make_subgroups(const std::vector<CategorySet>& configured = {});

/// Finds a subgroup by case-insensitive name.
std::optional<CategorySet> find_subgroup(const std::vector<CategorySet>& subgroups, const std::string& name);

}  // namespace modmix
