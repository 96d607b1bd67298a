#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "arpatch/fusion.hpp"
#include "arpatch/reid_eval.hpp"

namespace arpatch {

// Flat key/value pipeline configuration. Every field has a default; unknown
// keys in a config file are rejected so typos fail loudly.
struct PipelineConfig {
  std::string corpus;
  int base_height = 224;
  int k = 3;
  std::vector<double> manual_ratios;  // non-empty overrides clustering
  int stride_long = 16;
  int stride_short = 12;
  int patch_size = 16;
  double mix_prob = 0.5;
  double flip_prob = 0.5;
  std::string preset = "toy";
  std::string mode = "sum";
  std::vector<double> thresholds = {0.3, 0.6};
  std::vector<double> weights = {1.3, 1.0, 0.9};
  bool normalize_output = true;
  std::string metric = "euclidean";
  std::string junk_filter = "auto";
  std::string query_camera;  // pipeline split; empty = smallest camera id
  std::uint64_t seed = 42;

  FusionConfig fusion() const {
    FusionConfig f;
    f.mode = fusion_mode_from_string(mode);
    if (thresholds.size() != 2) throw UsageError("config: thresholds must have 2 values");
    f.t1 = thresholds[0];
    f.t2 = thresholds[1];
    if (weights.size() != 3) throw UsageError("config: weights must have 3 values");
    f.w_near = weights[0];
    f.w_mid = weights[1];
    f.w_far = weights[2];
    f.normalize_output = normalize_output;
    f.validate();
    return f;
  }

  EvalConfig eval() const {
    EvalConfig e;
    e.metric = metric_from_string(metric);
    e.junk = junk_filter_from_string(junk_filter);
    return e;
  }

  void validate() const {
    if (base_height < 16 || base_height % 16 != 0)
      throw UsageError("config: base_height must be a positive multiple of 16");
    if (k < 1) throw UsageError("config: k must be >= 1");
    if (patch_size < 1) throw UsageError("config: patch_size must be >= 1");
    if (stride_short < 1 || stride_short > stride_long || stride_long > patch_size)
      throw UsageError("config: need 1 <= stride_short <= stride_long <= patch_size");
    if (mix_prob < 0.0 || mix_prob > 1.0) throw UsageError("config: mix_prob must be in [0,1]");
    if (flip_prob < 0.0 || flip_prob > 1.0) throw UsageError("config: flip_prob must be in [0,1]");
    fusion();
    eval();
  }
};

inline PipelineConfig config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {
      "corpus",        "base_height", "k",          "manual_ratios", "stride_long",
      "stride_short",  "patch_size",  "mix_prob",   "flip_prob",     "preset",
      "mode",          "thresholds",  "weights",    "normalize_output",
      "metric",        "junk_filter", "query_camera", "seed"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw UsageError("config: unknown key \"" + key + "\"");

  PipelineConfig c;
  c.corpus = j.value("corpus", c.corpus);
  c.base_height = j.value("base_height", c.base_height);
  c.k = j.value("k", c.k);
  if (j.contains("manual_ratios")) c.manual_ratios = j.at("manual_ratios").get<std::vector<double>>();
  c.stride_long = j.value("stride_long", c.stride_long);
  c.stride_short = j.value("stride_short", c.stride_short);
  c.patch_size = j.value("patch_size", c.patch_size);
  c.mix_prob = j.value("mix_prob", c.mix_prob);
  c.flip_prob = j.value("flip_prob", c.flip_prob);
  c.preset = j.value("preset", c.preset);
  c.mode = j.value("mode", c.mode);
  if (j.contains("thresholds")) c.thresholds = j.at("thresholds").get<std::vector<double>>();
  if (j.contains("weights")) c.weights = j.at("weights").get<std::vector<double>>();
  c.normalize_output = j.value("normalize_output", c.normalize_output);
  c.metric = j.value("metric", c.metric);
  c.junk_filter = j.value("junk_filter", c.junk_filter);
  c.query_camera = j.value("query_camera", c.query_camera);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

inline PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config parse error in " + path + ": " + e.what());
  }
  return config_from_json(j);
}

inline nlohmann::json to_json(const PipelineConfig& c) {
  return {{"corpus", c.corpus},
          {"base_height", c.base_height},
          {"k", c.k},
          {"manual_ratios", c.manual_ratios},
          {"stride_long", c.stride_long},
          {"stride_short", c.stride_short},
          {"patch_size", c.patch_size},
          {"mix_prob", c.mix_prob},
          {"flip_prob", c.flip_prob},
          {"preset", c.preset},
          {"mode", c.mode},
          {"thresholds", c.thresholds},
          {"weights", c.weights},
          {"normalize_output", c.normalize_output},
          {"metric", c.metric},
          {"junk_filter", c.junk_filter},
          {"query_camera", c.query_camera},
          {"seed", c.seed}};
}

}  // namespace arpatch
