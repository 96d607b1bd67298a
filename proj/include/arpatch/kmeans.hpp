#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <vector>

#include <json.hpp>

#include "arpatch/common.hpp"
#include "arpatch/rng.hpp"

namespace arpatch {

struct AspectClusters {
  std::vector<double> centroids;   // sorted ascending
  std::vector<int> assignments;    // per input index, nearest centroid
  int k = 0;
  std::uint64_t seed = 0;
  // Sum of squared distances after each Lloyd iteration (diagnostic, not
  // serialized). Non-increasing by construction.
  std::vector<double> inertia_history;
};

namespace detail {

inline int nearest_centroid(double x, const std::vector<double>& centroids) {
  int best = 0;
  double best_d = std::abs(x - centroids[0]);
  for (int j = 1; j < static_cast<int>(centroids.size()); ++j) {
    double d = std::abs(x - centroids[j]);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

// k-means++ seeding: first center uniform, then proportional to squared
// distance from the nearest chosen center.
inline std::vector<double> kmeanspp_init(const std::vector<double>& xs, int k, Rng& rng) {
  std::vector<double> centers;
  centers.reserve(k);
  centers.push_back(xs[rng.bounded_uint(xs.size())]);
  std::vector<double> d2(xs.size());
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double best = std::abs(xs[i] - centers[0]);
      for (std::size_t j = 1; j < centers.size(); ++j)
        best = std::min(best, std::abs(xs[i] - centers[j]));
      d2[i] = best * best;
      total += d2[i];
    }
    if (total <= 0.0) {
      // All mass on chosen centers; fall back to the first unchosen distinct value.
      for (double x : xs) {
        if (std::find(centers.begin(), centers.end(), x) == centers.end()) {
          centers.push_back(x);
          break;
        }
      }
      continue;
    }
    double target = rng.canonical_double() * total;
    double acc = 0.0;
    std::size_t pick = xs.size() - 1;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      acc += d2[i];
      if (acc >= target) {
        pick = i;
        break;
      }
    }
    centers.push_back(xs[pick]);
  }
  return centers;
}

}  // namespace detail

// Lloyd's algorithm on 1-D data, k-means++ seeded, at most 300 iterations,
// converged when assignments stop changing. Deterministic for a fixed seed.
// Centroids come back sorted ascending with assignments remapped to match.
inline AspectClusters cluster_ratios(const std::vector<double>& ratios, int k,
                                     std::uint64_t seed) {
  if (ratios.empty()) throw UsageError("cluster_ratios: empty input");
  if (k < 1) throw UsageError("cluster_ratios: k must be >= 1");
  std::set<double> distinct(ratios.begin(), ratios.end());
  if (static_cast<std::size_t>(k) > distinct.size())
    throw UsageError("cluster_ratios: k=" + std::to_string(k) + " exceeds " +
                     std::to_string(distinct.size()) + " distinct values");

  Rng rng(seed);
  std::vector<double> centers = detail::kmeanspp_init(ratios, k, rng);
  std::vector<int> assign(ratios.size(), -1);
  std::vector<double> inertia_history;

  for (int iter = 0; iter < 300; ++iter) {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < ratios.size(); ++i) {
      int a = detail::nearest_centroid(ratios[i], centers);
      if (a != assign[i]) {
        assign[i] = a;
        changed = true;
      }
      double d = ratios[i] - centers[a];
      inertia += d * d;
    }
    inertia_history.push_back(inertia);
    if (!changed) break;

    std::vector<double> sums(k, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < ratios.size(); ++i) {
      sums[assign[i]] += ratios[i];
      counts[assign[i]]++;
    }
    for (int j = 0; j < k; ++j) {
      if (counts[j] > 0) {
        centers[j] = sums[j] / static_cast<double>(counts[j]);
      } else {
        // Re-seed an emptied cluster at the point farthest from its centroid.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < ratios.size(); ++i) {
          double d = std::abs(ratios[i] - centers[assign[i]]);
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        centers[j] = ratios[far];
      }
    }
  }

  // Sort centroids ascending, remap assignments.
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return centers[a] < centers[b]; });
  std::vector<double> sorted_centers(k);
  std::vector<int> remap(k);
  for (int pos = 0; pos < k; ++pos) {
    sorted_centers[pos] = centers[order[pos]];
    remap[order[pos]] = pos;
  }
  for (auto& a : assign) a = remap[a];

  AspectClusters out;
  out.centroids = std::move(sorted_centers);
  out.assignments = std::move(assign);
  out.k = k;
  out.seed = seed;
  out.inertia_history = std::move(inertia_history);
  return out;
}

inline nlohmann::json to_json(const AspectClusters& c) {
  return {{"centroids", c.centroids},
          {"assignments", c.assignments},
          {"k", c.k},
          {"seed", c.seed}};
}

inline AspectClusters clusters_from_json(const nlohmann::json& j) {
  AspectClusters c;
  c.centroids = j.at("centroids").get<std::vector<double>>();
  c.assignments = j.at("assignments").get<std::vector<int>>();
  c.k = j.at("k").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace arpatch
