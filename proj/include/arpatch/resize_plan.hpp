#pragma once

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "arpatch/corpus.hpp"
#include "arpatch/kmeans.hpp"

namespace arpatch {

struct ResizeEntry {
  double aspect_ratio = 1.0;
  int target_height = 0;
  int target_width = 0;
};

struct ResizePlan {
  int base_height = 0;
  std::vector<ResizeEntry> entries;  // ascending aspect ratio
};

// Aspect ratio convention throughout: width / height.
inline std::vector<double> compute_ratios(const std::vector<ImageRecord>& records) {
  if (records.empty()) throw UsageError("compute_ratios: empty record list");
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records)
    out.push_back(static_cast<double>(r.width) / static_cast<double>(r.height));
  return out;
}

// Snap to the nearest even integer. Ties (exact odd values) round up.
inline int nearest_even(double x) {
  return 2 * static_cast<int>(std::lround(x / 2.0));
}

// One entry per centroid: height fixed at base_height, width = base_height
// times the ratio snapped to the nearest even integer.
inline ResizePlan make_resize_plan(const AspectClusters& clusters, int base_height) {
  if (base_height < 16 || base_height % 16 != 0)
    throw UsageError("make_resize_plan: base_height must be a positive multiple of 16");
  ResizePlan plan;
  plan.base_height = base_height;
  for (double ar : clusters.centroids) {
    ResizeEntry e;
    e.aspect_ratio = ar;
    e.target_height = base_height;
    e.target_width = nearest_even(static_cast<double>(base_height) * ar);
    if (e.target_width < 16)
      throw UsageError("make_resize_plan: target width " + std::to_string(e.target_width) +
                       " below minimum 16 for aspect ratio " + std::to_string(ar));
    plan.entries.push_back(e);
  }
  return plan;
}

inline nlohmann::json to_json(const ResizePlan& p) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : p.entries)
    entries.push_back({{"aspect_ratio", e.aspect_ratio},
                       {"target_height", e.target_height},
                       {"target_width", e.target_width}});
  return {{"base_height", p.base_height}, {"entries", entries}};
}

inline ResizePlan plan_from_json(const nlohmann::json& j) {
  ResizePlan p;
  p.base_height = j.at("base_height").get<int>();
  for (const auto& e : j.at("entries")) {
    p.entries.push_back({e.at("aspect_ratio").get<double>(),
                         e.at("target_height").get<int>(),
                         e.at("target_width").get<int>()});
  }
  return p;
}

inline ResizePlan load_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open resize plan: " + path);
  nlohmann::json j;
  in >> j;
  const nlohmann::json& plan_node = j.contains("plan") ? j.at("plan") : j;
  return plan_from_json(plan_node);
}

}  // namespace arpatch
