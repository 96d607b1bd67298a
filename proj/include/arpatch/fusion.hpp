#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "arpatch/vit.hpp"

namespace arpatch {

enum class FusionMode { weighted_sum, weighted_concat };

inline FusionMode fusion_mode_from_string(const std::string& s) {
  if (s == "sum" || s == "weighted_sum") return FusionMode::weighted_sum;
  if (s == "concat" || s == "weighted_concat") return FusionMode::weighted_concat;
  throw UsageError("unknown fusion mode: " + s + " (expected sum or concat)");
}

struct FusionConfig {
  FusionMode mode = FusionMode::weighted_sum;
  double t1 = 0.3;
  double t2 = 0.6;
  double w_near = 1.3;
  double w_mid = 1.0;
  double w_far = 0.9;
  bool normalize_output = true;

  void validate() const {
    if (!(t1 < t2)) throw UsageError("FusionConfig: thresholds must satisfy t1 < t2");
    if (w_near <= 0.0 || w_mid <= 0.0 || w_far <= 0.0)
      throw UsageError("FusionConfig: weights must be positive");
  }
};

struct FusedFeature {
  std::vector<double> values;
  FusionMode mode = FusionMode::weighted_sum;
  std::vector<std::pair<double, double>> contributions;  // (model_ar, weight)
};

// Step function of |model_ar - image_ar|: w_near inside t1, w_mid inside t2,
// w_far beyond. Boundaries take the inner branch.
inline double adaptive_weight(double model_ar, double image_ar, const FusionConfig& config) {
  if (model_ar <= 0.0 || image_ar <= 0.0)
    throw UsageError("adaptive_weight: ratios must be positive");
  const double delta = std::abs(model_ar - image_ar);
  if (delta <= config.t1) return config.w_near;
  if (delta <= config.t2) return config.w_mid;
  return config.w_far;
}

namespace detail {

inline void l2_normalize(std::vector<double>& v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm > 0.0)
    for (double& x : v) x /= norm;
}

// Canonical order for fusion: ascending model aspect ratio.
inline std::vector<std::size_t> canonical_order(const std::vector<FeatureVector>& features) {
  std::vector<std::size_t> idx(features.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return features[a].source_model_ar < features[b].source_model_ar;
  });
  return idx;
}

}  // namespace detail

// Elementwise weighted sum over models, each weighted by how close its bound
// aspect ratio sits to the query image's.
inline FusedFeature fuse_sum(const std::vector<FeatureVector>& features, double image_ar,
                             const FusionConfig& config) {
  config.validate();
  if (features.empty()) throw UsageError("fuse_sum: no input features");
  const std::size_t dim = features[0].values.size();
  for (const auto& f : features)
    if (f.values.size() != dim)
      throw UsageError("fuse_sum: dimension mismatch (" + std::to_string(dim) + " vs " +
                       std::to_string(f.values.size()) + ")");

  FusedFeature out;
  out.mode = FusionMode::weighted_sum;
  out.values.assign(dim, 0.0);
  for (std::size_t i : detail::canonical_order(features)) {
    const double w = adaptive_weight(features[i].source_model_ar, image_ar, config);
    out.contributions.emplace_back(features[i].source_model_ar, w);
    for (std::size_t c = 0; c < dim; ++c) out.values[c] += w * features[i].values[c];
  }
  if (config.normalize_output) detail::l2_normalize(out.values);
  return out;
}

// Weighted segments stacked in canonical (ascending model_ar) order.
inline FusedFeature fuse_concat(const std::vector<FeatureVector>& features, double image_ar,
                                const FusionConfig& config) {
  config.validate();
  if (features.empty()) throw UsageError("fuse_concat: no input features");

  FusedFeature out;
  out.mode = FusionMode::weighted_concat;
  for (std::size_t i : detail::canonical_order(features)) {
    const double w = adaptive_weight(features[i].source_model_ar, image_ar, config);
    out.contributions.emplace_back(features[i].source_model_ar, w);
    for (double v : features[i].values) out.values.push_back(w * v);
  }
  if (config.normalize_output) detail::l2_normalize(out.values);
  return out;
}

}  // namespace arpatch
