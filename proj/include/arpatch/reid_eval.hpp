#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "arpatch/common.hpp"
#include "arpatch/feature_store.hpp"

namespace arpatch {

enum class Metric { euclidean, cosine };

inline Metric metric_from_string(const std::string& s) {
  if (s == "euclidean") return Metric::euclidean;
  if (s == "cosine") return Metric::cosine;
  throw UsageError("unknown metric: " + s + " (expected euclidean or cosine)");
}

enum class JunkFilter { automatic, on, off };

inline JunkFilter junk_filter_from_string(const std::string& s) {
  if (s == "auto") return JunkFilter::automatic;
  if (s == "on") return JunkFilter::on;
  if (s == "off") return JunkFilter::off;
  throw UsageError("unknown junk-filter setting: " + s + " (expected auto, on or off)");
}

struct EvalConfig {
  Metric metric = Metric::euclidean;
  JunkFilter junk = JunkFilter::automatic;
};

namespace detail {

inline double euclidean_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

inline double cosine_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 1.0;  // zero vector: no direction, maximal distance
  return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace detail

// Row q, column g: distance between query q and gallery entry g.
inline std::vector<std::vector<double>> pairwise_distances(const FeatureStore& queries,
                                                           const FeatureStore& gallery,
                                                           Metric metric) {
  if (queries.dim != gallery.dim)
    throw UsageError("pairwise_distances: query dim " + std::to_string(queries.dim) +
                     " vs gallery dim " + std::to_string(gallery.dim));
  std::vector<std::vector<double>> d(queries.entries.size(),
                                     std::vector<double>(gallery.entries.size()));
  for (std::size_t q = 0; q < queries.entries.size(); ++q)
    for (std::size_t g = 0; g < gallery.entries.size(); ++g)
      d[q][g] = metric == Metric::euclidean
                    ? detail::euclidean_distance(queries.entries[q].values, gallery.entries[g].values)
                    : detail::cosine_distance(queries.entries[q].values, gallery.entries[g].values);
  return d;
}

// Full gallery ordering for one query, ascending distance with stable
// index tiebreak. Junk positions are kept in the order but flagged and
// skipped by the metrics:
//   - a gallery entry with the query's own image id is always junk;
//   - with junk filtering on, entries sharing both vehicle and camera with
//     the query are junk too (cameras must be present on both sides).
struct RankedResult {
  std::string query_image_id;
  std::vector<int> order;       // permutation of gallery indices
  std::vector<bool> relevant;   // per position: same vehicle id
  std::vector<bool> junk;       // per position: excluded from metrics
};

inline RankedResult rank_gallery(const std::vector<double>& distances,
                                 const FeatureStore& gallery, const StoreEntry& query,
                                 bool junk_filter) {
  if (distances.size() != gallery.entries.size())
    throw UsageError("rank_gallery: distance row does not match gallery size");
  RankedResult r;
  r.query_image_id = query.image_id;
  r.order.resize(gallery.entries.size());
  std::iota(r.order.begin(), r.order.end(), 0);
  std::stable_sort(r.order.begin(), r.order.end(), [&](int a, int b) {
    if (distances[a] != distances[b]) return distances[a] < distances[b];
    return a < b;
  });
  r.relevant.resize(r.order.size());
  r.junk.resize(r.order.size());
  for (std::size_t pos = 0; pos < r.order.size(); ++pos) {
    const StoreEntry& g = gallery.entries[r.order[pos]];
    r.relevant[pos] = g.vehicle_id == query.vehicle_id;
    bool junk = g.image_id == query.image_id;
    if (junk_filter && query.camera_id >= 0 && g.camera_id >= 0 &&
        g.vehicle_id == query.vehicle_id && g.camera_id == query.camera_id)
      junk = true;
    r.junk[pos] = junk;
  }
  return r;
}

// AP = (1/R) * sum over relevant hits of precision-at-hit, with positions
// counted after junk removal. Returns -1 when the query has no relevant
// retained entry (callers skip such queries).
inline double average_precision(const RankedResult& result) {
  int retained = 0;
  int relevant_seen = 0;
  double ap = 0.0;
  int total_relevant = 0;
  for (std::size_t pos = 0; pos < result.order.size(); ++pos)
    if (!result.junk[pos] && result.relevant[pos]) ++total_relevant;
  if (total_relevant == 0) return -1.0;
  for (std::size_t pos = 0; pos < result.order.size(); ++pos) {
    if (result.junk[pos]) continue;
    ++retained;
    if (result.relevant[pos]) {
      ++relevant_seen;
      ap += static_cast<double>(relevant_seen) / retained;
    }
  }
  return ap / total_relevant;
}

struct MetricsReport {
  double mAP = 0.0;
  std::vector<double> cmc;  // cmc[k-1] = fraction of valid queries with a hit in top k
  double r1 = 0.0, r5 = 0.0, r10 = 0.0;
  int num_queries = 0;  // valid (scored) queries
  int num_skipped = 0;  // queries with no relevant retained entry
  std::string metric = "euclidean";
  bool junk_filter = false;
};

namespace detail {

inline double cmc_at(const std::vector<double>& cmc, std::size_t rank) {
  if (cmc.empty()) return 0.0;
  return rank <= cmc.size() ? cmc[rank - 1] : cmc.back();
}

}  // namespace detail

// mAP + CMC over all queries. Junk filtering follows EvalConfig: "auto"
// enables it only when both stores carry camera ids.
inline MetricsReport evaluate(const FeatureStore& queries, const FeatureStore& gallery,
                              const EvalConfig& config = {}) {
  if (queries.entries.empty() || gallery.entries.empty())
    throw UsageError("evaluate: empty query or gallery store");
  queries.validate();
  gallery.validate();

  bool junk_on = false;
  switch (config.junk) {
    case JunkFilter::on: junk_on = true; break;
    case JunkFilter::off: junk_on = false; break;
    case JunkFilter::automatic:
      junk_on = queries.has_cameras() && gallery.has_cameras();
      break;
  }

  const auto distances = pairwise_distances(queries, gallery, config.metric);
  const std::size_t gallery_size = gallery.entries.size();

  MetricsReport report;
  report.metric = config.metric == Metric::euclidean ? "euclidean" : "cosine";
  report.junk_filter = junk_on;
  std::vector<long> first_hit_counts(gallery_size, 0);
  double ap_sum = 0.0;

  for (std::size_t q = 0; q < queries.entries.size(); ++q) {
    const RankedResult ranked =
        rank_gallery(distances[q], gallery, queries.entries[q], junk_on);
    const double ap = average_precision(ranked);
    if (ap < 0.0) {
      ++report.num_skipped;
      continue;
    }
    ap_sum += ap;
    ++report.num_queries;
    int retained_pos = 0;
    for (std::size_t pos = 0; pos < ranked.order.size(); ++pos) {
      if (ranked.junk[pos]) continue;
      ++retained_pos;
      if (ranked.relevant[pos]) {
        first_hit_counts[retained_pos - 1]++;
        break;
      }
    }
  }
  if (report.num_queries == 0)
    throw UsageError("evaluate: no valid queries (every query lacked relevant gallery entries)");

  report.mAP = ap_sum / report.num_queries;
  report.cmc.resize(gallery_size);
  long cum = 0;
  for (std::size_t k = 0; k < gallery_size; ++k) {
    cum += first_hit_counts[k];
    report.cmc[k] = static_cast<double>(cum) / report.num_queries;
  }
  report.r1 = detail::cmc_at(report.cmc, 1);
  report.r5 = detail::cmc_at(report.cmc, 5);
  report.r10 = detail::cmc_at(report.cmc, 10);
  return report;
}

inline nlohmann::json to_json(const MetricsReport& r) {
  return {{"map", r.mAP},          {"cmc", r.cmc},
          {"r1", r.r1},            {"r5", r.r5},
          {"r10", r.r10},          {"num_queries", r.num_queries},
          {"num_skipped", r.num_skipped}, {"metric", r.metric},
          {"junk_filter", r.junk_filter}};
}

}  // namespace arpatch
