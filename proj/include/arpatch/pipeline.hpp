#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "arpatch/config.hpp"
#include "arpatch/corpus.hpp"
#include "arpatch/feature_store.hpp"
#include "arpatch/fusion.hpp"
#include "arpatch/kmeans.hpp"
#include "arpatch/losses.hpp"
#include "arpatch/patch_mixup.hpp"
#include "arpatch/reid_eval.hpp"
#include "arpatch/resize.hpp"
#include "arpatch/resize_plan.hpp"
#include "arpatch/synthetic.hpp"
#include "arpatch/vit.hpp"

namespace arpatch {

// "c0" or "0" -> 0; absent -> -1.
inline int parse_camera(const std::optional<std::string>& camera) {
  if (!camera || camera->empty()) return -1;
  std::size_t i = 0;
  while (i < camera->size() && !std::isdigit(static_cast<unsigned char>((*camera)[i]))) ++i;
  if (i == camera->size())
    throw UsageError("camera id \"" + *camera + "\" has no numeric part");
  return std::stoi(camera->substr(i));
}

inline std::optional<std::string> default_manifest(const std::string& corpus_root) {
  const auto p = std::filesystem::path(corpus_root) / "manifest.csv";
  if (std::filesystem::exists(p)) return p.string();
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// analyze: corpus scan -> ratios -> clusters -> resize plan (+ histogram)
// ---------------------------------------------------------------------------

struct AnalyzeResult {
  ScanResult scan;
  AspectClusters clusters;
  ResizePlan plan;
  std::map<long, long> histogram;  // bin index (ratio / 0.05) -> count
};

inline AnalyzeResult run_analyze(const PipelineConfig& config) {
  if (config.corpus.empty()) throw UsageError("analyze: config has no corpus path");
  AnalyzeResult res;
  res.scan = scan_corpus(config.corpus, default_manifest(config.corpus));
  const std::vector<double> ratios = compute_ratios(res.scan.records);

  if (!config.manual_ratios.empty()) {
    // Manual override: caller-provided centroids, nearest assignment.
    res.clusters.centroids = config.manual_ratios;
    std::sort(res.clusters.centroids.begin(), res.clusters.centroids.end());
    res.clusters.k = static_cast<int>(res.clusters.centroids.size());
    res.clusters.seed = config.seed;
    res.clusters.assignments.reserve(ratios.size());
    for (double r : ratios)
      res.clusters.assignments.push_back(detail::nearest_centroid(r, res.clusters.centroids));
  } else {
    res.clusters = cluster_ratios(ratios, config.k, config.seed);
  }
  res.plan = make_resize_plan(res.clusters, config.base_height);
  for (double r : ratios) res.histogram[static_cast<long>(std::floor(r / 0.05))]++;
  return res;
}

inline nlohmann::json analyze_to_json(const AnalyzeResult& res) {
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& [bin, count] : res.histogram)
    hist.push_back({{"lo", bin * 0.05}, {"count", count}});
  return {{"clusters", to_json(res.clusters)},
          {"plan", to_json(res.plan)},
          {"histogram", {{"bin_width", 0.05}, {"bins", hist}}},
          {"warnings", res.scan.warnings}};
}

inline AnalyzeResult cmd_analyze(const PipelineConfig& config, const std::string& out_path) {
  AnalyzeResult res = run_analyze(config);
  std::ofstream out(out_path);
  if (!out) throw UsageError("analyze: cannot write " + out_path);
  out << analyze_to_json(res).dump(2) << "\n";
  out.flush();
  if (!out) throw std::runtime_error("analyze: write failed: " + out_path);
  return res;
}

// ---------------------------------------------------------------------------
// augment: 50% horizontal flip + patch mixup per image, derived seeds
// ---------------------------------------------------------------------------

inline std::uint64_t flip_seed(std::uint64_t image_seed) {
  return splitmix64(image_seed ^ 0x464c4950ULL);  // "FLIP"
}
inline std::uint64_t mixup_seed(std::uint64_t image_seed) {
  return splitmix64(image_seed ^ 0x4d495855ULL);  // "MIXU"
}

inline void cmd_augment(const PipelineConfig& config, const std::string& in_dir,
                        const std::string& out_dir) {
  namespace fs = std::filesystem;
  ScanResult scan = scan_corpus(in_dir, default_manifest(in_dir));
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  {
    std::ofstream probe(fs::path(out_dir) / ".arpatch_probe");
    if (!probe) throw UsageError("augment: output directory not writable: " + out_dir);
  }
  fs::remove(fs::path(out_dir) / ".arpatch_probe");

  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& rec : scan.records)
    seeds.push_back({{"id", rec.id}, {"seed", seed_for_image(config.seed, rec.id)}});

  parallel_for(scan.records.size(), [&](std::size_t i) {
    const ImageRecord& rec = scan.records[i];
    ImageTensor img = read_image(rec.path);
    const std::uint64_t s = seed_for_image(config.seed, rec.id);
    img = random_hflip(img, flip_seed(s), config.flip_prob);
    const double ar = static_cast<double>(img.width) / img.height;
    const StrideSpec stride =
        choose_strides(ar, config.stride_long, config.stride_short, config.patch_size);
    img = apply_patch_mixup(img, stride, config.mix_prob, mixup_seed(s));
    const fs::path out_path = fs::path(out_dir) / rec.id;
    fs::create_directories(out_path.parent_path(), ec);
    write_png(out_path.string(), img);
  });

  // Seed manifest for reproducibility, plus the corpus manifest so the
  // augmented tree is itself a valid corpus.
  std::ofstream seed_out(fs::path(out_dir) / "augment_seeds.json");
  if (!seed_out) throw UsageError("augment: cannot write seed manifest under " + out_dir);
  seed_out << nlohmann::json{{"global_seed", config.seed},
                             {"flip_prob", config.flip_prob},
                             {"mix_prob", config.mix_prob},
                             {"images", seeds}}
                  .dump(2)
           << "\n";
  seed_out.flush();
  if (!seed_out) throw std::runtime_error("augment: seed manifest write failed");
  if (auto manifest = default_manifest(in_dir))
    fs::copy_file(*manifest, fs::path(out_dir) / "manifest.csv",
                  fs::copy_options::overwrite_existing);
}

// ---------------------------------------------------------------------------
// encode: one aspect-ratio-bound encoder per resize-plan entry
// ---------------------------------------------------------------------------

inline BoundModel build_model_for_entry(const PipelineConfig& config, const ResizeEntry& entry,
                                        std::size_t entry_index) {
  const StrideSpec stride = choose_strides(entry.aspect_ratio, config.stride_long,
                                           config.stride_short, config.patch_size);
  const PatchGrid grid = plan_grid(entry.target_height, entry.target_width, stride);
  const int patch_dim = config.patch_size * config.patch_size * 3;
  const EncoderConfig enc =
      EncoderConfig::from_preset(config.preset, grid.rows, grid.cols, patch_dim);
  return bind_model(enc, seed_for_model(config.seed, entry_index), stride, entry.target_height,
                    entry.target_width, entry.aspect_ratio);
}

inline FeatureStore encode_corpus(const PipelineConfig& config, const BoundModel& model) {
  ScanResult scan = scan_corpus(config.corpus, default_manifest(config.corpus));
  std::vector<StoreEntry> slots(scan.records.size());
  parallel_for(scan.records.size(), [&](std::size_t i) {
    const ImageRecord& rec = scan.records[i];
    const ImageTensor img = read_image(rec.path);
    FeatureVector f = encode_image(img, model, rec.id);
    StoreEntry e;
    e.image_id = rec.id;
    e.vehicle_id = rec.vehicle_id;
    e.camera_id = parse_camera(rec.camera_id);
    e.values = std::move(f.values);
    slots[i] = std::move(e);
  });
  FeatureStore store;
  for (auto& e : slots) store.add(std::move(e));
  return store;
}

inline void cmd_encode(const PipelineConfig& config, const ResizePlan& plan,
                       std::size_t entry_index, const std::string& out_path) {
  if (entry_index >= plan.entries.size())
    throw UsageError("encode: entry index " + std::to_string(entry_index) +
                     " out of range for plan with " + std::to_string(plan.entries.size()) +
                     " entries");
  const ResizeEntry& entry = plan.entries[entry_index];
  const BoundModel model = build_model_for_entry(config, entry, entry_index);
  FeatureStore store = encode_corpus(config, model);
  save_store(out_path, store);
  save_store_meta(out_path, {entry.aspect_ratio, "encoder"});
}

// ---------------------------------------------------------------------------
// fuse: align stores by image id, weight by aspect-ratio proximity
// ---------------------------------------------------------------------------

inline FeatureStore fuse_stores(const std::vector<FeatureStore>& stores,
                                const std::vector<double>& model_ars,
                                const std::map<std::string, double>& image_ars,
                                const FusionConfig& fusion) {
  if (stores.empty()) throw UsageError("fuse: no input stores");
  const FeatureStore& first = stores[0];
  for (std::size_t s = 1; s < stores.size(); ++s) {
    if (stores[s].entries.size() != first.entries.size()) {
      std::string missing;
      std::set<std::string> have;
      for (const auto& e : stores[s].entries) have.insert(e.image_id);
      int listed = 0;
      for (const auto& e : first.entries) {
        if (!have.count(e.image_id) && listed < 5) {
          missing += (listed ? ", " : "") + e.image_id;
          ++listed;
        }
      }
      throw UsageError("fuse: store " + std::to_string(s) + " id set mismatch; missing: " +
                       (missing.empty() ? "(extra ids present)" : missing));
    }
  }

  // Index every store by image id; ids must match exactly.
  std::vector<std::map<std::string, const StoreEntry*>> index(stores.size());
  for (std::size_t s = 0; s < stores.size(); ++s)
    for (const auto& e : stores[s].entries) index[s][e.image_id] = &e;

  FeatureStore fused;
  for (const auto& anchor : first.entries) {
    std::vector<FeatureVector> features;
    features.reserve(stores.size());
    for (std::size_t s = 0; s < stores.size(); ++s) {
      auto it = index[s].find(anchor.image_id);
      if (it == index[s].end())
        throw UsageError("fuse: store " + std::to_string(s) + " missing id " + anchor.image_id);
      FeatureVector f;
      f.values = it->second->values;
      f.source_model_ar = model_ars[s];
      f.image_id = anchor.image_id;
      features.push_back(std::move(f));
    }
    auto ar_it = image_ars.find(anchor.image_id);
    if (ar_it == image_ars.end())
      throw UsageError("fuse: no corpus record for image id " + anchor.image_id);
    const FusedFeature f = fusion.mode == FusionMode::weighted_sum
                               ? fuse_sum(features, ar_it->second, fusion)
                               : fuse_concat(features, ar_it->second, fusion);
    StoreEntry e;
    e.image_id = anchor.image_id;
    e.vehicle_id = anchor.vehicle_id;
    e.camera_id = anchor.camera_id;
    e.values = f.values;
    fused.add(std::move(e));
  }
  return fused;
}

inline void cmd_fuse(const PipelineConfig& config, const std::vector<std::string>& store_paths,
                     const std::string& out_path) {
  if (store_paths.empty()) throw UsageError("fuse: no input stores given");
  std::vector<FeatureStore> stores;
  std::vector<double> model_ars;
  for (const auto& p : store_paths) {
    stores.push_back(load_store(p));
    const auto meta = load_store_meta(p);
    if (!meta || !meta->model_ar)
      throw UsageError("fuse: " + p + " has no model_ar metadata (" + p + ".meta.json)");
    model_ars.push_back(*meta->model_ar);
  }
  ScanResult scan = scan_corpus(config.corpus, default_manifest(config.corpus));
  std::map<std::string, double> image_ars;
  for (const auto& rec : scan.records)
    image_ars[rec.id] = static_cast<double>(rec.width) / rec.height;

  FeatureStore fused = fuse_stores(stores, model_ars, image_ars, config.fusion());
  save_store(out_path, fused);
  save_store_meta(out_path, {std::nullopt, "fused"});
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

inline MetricsReport cmd_evaluate(const std::string& query_path, const std::string& gallery_path,
                                  const PipelineConfig& config, const std::string& out_path) {
  const FeatureStore queries = load_store(query_path);
  const FeatureStore gallery = load_store(gallery_path);
  const MetricsReport report = evaluate(queries, gallery, config.eval());
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw UsageError("evaluate: cannot write " + out_path);
    out << to_json(report).dump(2) << "\n";
    out.flush();
    if (!out) throw std::runtime_error("evaluate: write failed: " + out_path);
  }
  return report;
}

// ---------------------------------------------------------------------------
// bench: encode-time scaling with patch count
// ---------------------------------------------------------------------------

struct BenchSetting {
  int height = 224;
  int width = 224;
  int s_h = 16;
  int s_w = 16;
};

struct BenchRow {
  BenchSetting setting;
  int patch_count = 0;
  double median_ms = 0.0;
};

inline std::vector<BenchRow> cmd_bench(const PipelineConfig& config,
                                       const std::vector<BenchSetting>& settings,
                                       int runs = 5, int batch = 2) {
  if (runs < 1) throw UsageError("bench: runs must be >= 1");
  std::vector<BenchRow> rows;
  for (std::size_t si = 0; si < settings.size(); ++si) {
    const BenchSetting& s = settings[si];
    StrideSpec stride;
    stride.s_h = s.s_h;
    stride.s_w = s.s_w;
    stride.p = config.patch_size;
    const PatchGrid grid = plan_grid(s.height, s.width, stride);
    const int patch_dim = config.patch_size * config.patch_size * 3;
    const EncoderConfig enc =
        EncoderConfig::from_preset(config.preset, grid.rows, grid.cols, patch_dim);
    const BoundModel model = bind_model(enc, seed_for_model(config.seed, si), stride, s.height,
                                        s.width, static_cast<double>(s.width) / s.height);

    std::vector<ImageTensor> batch_images;
    for (int b = 0; b < batch; ++b)
      batch_images.push_back(
          draw_vehicle_image(b, s.height, s.width, splitmix64(config.seed ^ (b + 1))));

    auto run_once = [&]() {
      for (const auto& img : batch_images) (void)encode_image(img, model, "bench");
    };
    run_once();  // warmup
    std::vector<double> times;
    for (int r = 0; r < runs; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      run_once();
      const auto t1 = std::chrono::steady_clock::now();
      times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    std::sort(times.begin(), times.end());
    BenchRow row;
    row.setting = s;
    row.patch_count = grid.n;
    row.median_ms = times[times.size() / 2];
    rows.push_back(row);
  }
  return rows;
}

inline std::string bench_to_csv(const std::vector<BenchRow>& rows, int patch_size) {
  std::string out = "H,W,s_h,s_w,p,n,median_ms\n";
  char line[128];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%d,%d,%d,%d,%d,%d,%.3f\n", r.setting.height,
                  r.setting.width, r.setting.s_h, r.setting.s_w, patch_size, r.patch_count,
                  r.median_ms);
    out += line;
  }
  return out;
}

// ---------------------------------------------------------------------------
// verify-losses: finite-difference report
// ---------------------------------------------------------------------------

struct LossCheckReport {
  double triplet_max_rel_err = 0.0;
  double id_max_rel_err = 0.0;
  int instances = 0;
};

inline LossCheckReport run_loss_checks(std::uint64_t seed, int instances = 50) {
  Rng rng(seed);
  LossCheckReport rep;
  rep.instances = instances;
  for (int i = 0; i < instances; ++i) {
    TripletSample t;
    for (int d = 0; d < 8; ++d) {
      t.anchor.push_back(rng.gaussian());
      t.positive.push_back(rng.gaussian());
      t.negative.push_back(rng.gaussian());
    }
    const double err = finite_diff_check(
        [](const std::vector<std::vector<double>>& in) {
          return triplet_loss_soft({in[0], in[1], in[2]});
        },
        {t.anchor, t.positive, t.negative});
    rep.triplet_max_rel_err = std::max(rep.triplet_max_rel_err, err);

    std::vector<double> logits;
    for (int d = 0; d < 10; ++d) logits.push_back(rng.gaussian() * 2.0);
    const int label = static_cast<int>(rng.bounded_uint(10));
    const double id_err = finite_diff_check(
        [label](const std::vector<std::vector<double>>& in) { return id_loss(in[0], label); },
        {logits});
    rep.id_max_rel_err = std::max(rep.id_max_rel_err, id_err);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// pipeline: analyze -> augment -> encode per entry -> fuse -> split -> evaluate
// ---------------------------------------------------------------------------

// Query/gallery split for self-contained evaluation: when cameras exist, one
// camera's images (configured or the smallest id) become queries and the
// rest the gallery; without cameras, the first image of each vehicle is the
// query.
inline std::pair<FeatureStore, FeatureStore> split_query_gallery(
    const FeatureStore& store, const std::string& query_camera) {
  FeatureStore queries, gallery;
  bool cameras = store.has_cameras();
  int qcam = -1;
  if (cameras) {
    if (!query_camera.empty()) {
      qcam = parse_camera(query_camera);
    } else {
      qcam = INT32_MAX;
      for (const auto& e : store.entries)
        if (e.camera_id >= 0) qcam = std::min(qcam, e.camera_id);
    }
  }
  std::set<std::string> seen_vehicles;
  for (const auto& e : store.entries) {
    const bool is_query = cameras ? e.camera_id == qcam : seen_vehicles.insert(e.vehicle_id).second;
    (is_query ? queries : gallery).add(e);
  }
  if (queries.entries.empty() || gallery.entries.empty())
    throw UsageError("pipeline: query/gallery split produced an empty side");
  return {std::move(queries), std::move(gallery)};
}

inline MetricsReport cmd_pipeline(const PipelineConfig& config, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const AnalyzeResult analysis = cmd_analyze(config, (fs::path(out_dir) / "analysis.json").string());
  cmd_augment(config, config.corpus, (fs::path(out_dir) / "augmented").string());

  std::vector<std::string> store_paths;
  for (std::size_t i = 0; i < analysis.plan.entries.size(); ++i) {
    const std::string path = (fs::path(out_dir) / ("model_" + std::to_string(i) + ".fstr")).string();
    cmd_encode(config, analysis.plan, i, path);
    store_paths.push_back(path);
  }
  const std::string fused_path = (fs::path(out_dir) / "fused.fstr").string();
  cmd_fuse(config, store_paths, fused_path);

  const FeatureStore fused = load_store(fused_path);
  auto [queries, gallery] = split_query_gallery(fused, config.query_camera);
  save_store((fs::path(out_dir) / "query.fstr").string(), queries);
  save_store((fs::path(out_dir) / "gallery.fstr").string(), gallery);

  return cmd_evaluate((fs::path(out_dir) / "query.fstr").string(),
                      (fs::path(out_dir) / "gallery.fstr").string(), config,
                      (fs::path(out_dir) / "report.json").string());
}

}  // namespace arpatch
