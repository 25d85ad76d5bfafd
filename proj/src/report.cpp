#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "modmix/eval.hpp"

namespace modmix {

namespace {

std::string cell(const std::optional<double>& v) {
  if (!v) return "N/A";
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.1f", *v * 100.0);
  return buf;
}

std::string row_label(double t) {
  if (std::abs(t - 0.5) < 1e-9) return "AP50";
  if (std::abs(t - 0.75) < 1e-9) return "AP75";
  char buf[16];
  std::snprintf(buf, sizeof buf, "AP@%.2f", t);
  return buf;
}

}  // namespace

std::string EvalReport::to_text_table() const {
  std::vector<const CategoryResult*> columns;
  for (const auto& c : categories) columns.push_back(&c);

  std::vector<std::string> header = {"metric"};
  for (const auto* c : columns) header.push_back(c->name);
  for (const auto& s : subgroups) header.push_back(s.name);

  std::vector<std::vector<std::string>> rows;
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    std::vector<std::string> row = {row_label(thresholds[t])};
    for (const auto* c : columns) row.push_back(cell(c->ap[t]));
    for (const auto& s : subgroups) row.push_back(cell(s.mean_ap[t]));
    rows.push_back(std::move(row));
  }
  const bool has_coco = std::any_of(categories.begin(), categories.end(), [](const auto& c) { return c.coco_ap; });
  if (has_coco) {
    std::vector<std::string> row = {"AP@[.50:.95]"};
    for (const auto* c : columns) row.push_back(cell(c->coco_ap));
    for (const auto& s : subgroups) row.push_back(cell(s.map));
    rows.push_back(std::move(row));
  }

  std::vector<std::size_t> widths(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) {
    widths[i] = header[i].size();
    for (const auto& r : rows) widths[i] = std::max(widths[i], r[i].size());
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out << " | ";
      out << r[i] << std::string(widths[i] - r[i].size(), ' ');
    }
    out << '\n';
  };
  emit(header);
  std::size_t total = 0;
  for (std::size_t w : widths) total += w;
  out << std::string(total + 3 * (widths.size() - 1), '-') << '\n';
  for (const auto& r : rows) emit(r);
  out << "(AP x 100; categories without ground truth are "
      << (zero_fill_empty ? "counted as 0" : "excluded from subgroup means") << ")\n";
  return out.str();
}

}  // namespace modmix
