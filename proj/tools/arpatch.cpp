// arpatch CLI: aspect-ratio profiling, patch-mixup augmentation, encoding,
// feature fusion, retrieval evaluation and the patch-count benchmark.
//
// Exit codes: 0 success, 1 internal error, 2 usage/input error.

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "arpatch/arpatch.hpp"

namespace {

using arpatch::PipelineConfig;
using arpatch::UsageError;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> k;
  std::optional<double> mix_prob;
  std::optional<std::string> mode;
  std::optional<std::string> metric;
  std::optional<std::string> junk_filter;
  std::optional<int> stride_long;
  std::optional<int> stride_short;
  std::optional<int> patch_size;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "Pipeline config file (JSON)");
  cmd->add_option("--seed", flags.seed, "Global seed override");
  cmd->add_option("--k", flags.k, "Cluster count override");
  cmd->add_option("--mix-prob", flags.mix_prob, "Patch mixup probability override")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--mode", flags.mode, "Fusion mode override")
      ->check(CLI::IsMember({"sum", "concat"}));
  cmd->add_option("--metric", flags.metric, "Distance metric override")
      ->check(CLI::IsMember({"euclidean", "cosine"}));
  cmd->add_option("--junk-filter", flags.junk_filter, "Junk filter override")
      ->check(CLI::IsMember({"auto", "on", "off"}));
  cmd->add_option("--stride-long", flags.stride_long, "Long-dimension stride override");
  cmd->add_option("--stride-short", flags.stride_short, "Short-dimension stride override");
  cmd->add_option("--patch-size", flags.patch_size, "Patch side length override");
}

PipelineConfig resolve_config(const CommonFlags& flags) {
  PipelineConfig config =
      flags.config_path.empty() ? PipelineConfig{} : arpatch::load_config(flags.config_path);
  if (flags.seed) config.seed = *flags.seed;
  if (flags.k) config.k = *flags.k;
  if (flags.mix_prob) config.mix_prob = *flags.mix_prob;
  if (flags.mode) config.mode = *flags.mode;
  if (flags.metric) config.metric = *flags.metric;
  if (flags.junk_filter) config.junk_filter = *flags.junk_filter;
  if (flags.stride_long) config.stride_long = *flags.stride_long;
  if (flags.stride_short) config.stride_short = *flags.stride_short;
  if (flags.patch_size) config.patch_size = *flags.patch_size;
  config.validate();
  return config;
}

// "224x298:12x16" -> one bench setting; items separated by commas.
std::vector<arpatch::BenchSetting> parse_bench_grid(const std::string& grid) {
  std::vector<arpatch::BenchSetting> settings;
  std::stringstream ss(grid);
  std::string item;
  while (std::getline(ss, item, ',')) {
    arpatch::BenchSetting s;
    if (std::sscanf(item.c_str(), "%dx%d:%dx%d", &s.height, &s.width, &s.s_h, &s.s_w) != 4)
      throw UsageError("bench: bad grid item \"" + item + "\" (expected HxW:s_hxs_w)");
    settings.push_back(s);
  }
  if (settings.empty()) throw UsageError("bench: empty settings grid");
  return settings;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aspect-ratio-aware vehicle re-identification pipeline"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string corpus_override;
  std::string out_path;
  std::string in_dir;
  std::string plan_path;
  int entry_index = 0;
  std::vector<std::string> store_paths;
  std::string query_path, gallery_path;
  std::string bench_grid = "224x224:16x16,224x298:12x16,384x384:16x16";
  int bench_runs = 5;

  auto* analyze = app.add_subcommand("analyze", "Profile corpus aspect ratios, emit a resize plan");
  add_common_flags(analyze, flags);
  analyze->add_option("--corpus", corpus_override, "Corpus directory (overrides config)");
  analyze->add_option("--out", out_path, "Output JSON path")->required();

  auto* augment = app.add_subcommand("augment", "Flip + patch-mixup a corpus into a new tree");
  add_common_flags(augment, flags);
  augment->add_option("--in", in_dir, "Input image directory")->required();
  augment->add_option("--out", out_path, "Output directory")->required();

  auto* encode = app.add_subcommand("encode", "Encode a corpus with one plan-entry model");
  add_common_flags(encode, flags);
  encode->add_option("--corpus", corpus_override, "Corpus directory (overrides config)");
  encode->add_option("--plan", plan_path, "Resize plan JSON (from analyze)")->required();
  encode->add_option("--entry", entry_index, "Plan entry index")->required();
  encode->add_option("--out", out_path, "Output feature store path")->required();

  auto* fuse = app.add_subcommand("fuse", "Fuse per-model stores into one feature store");
  add_common_flags(fuse, flags);
  fuse->add_option("--corpus", corpus_override, "Corpus directory (overrides config)");
  fuse->add_option("--stores", store_paths, "Input feature stores")->required()->expected(-1);
  fuse->add_option("--out", out_path, "Output feature store path")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Compute mAP/CMC for query vs gallery stores");
  add_common_flags(evaluate, flags);
  evaluate->add_option("--query", query_path, "Query feature store")->required();
  evaluate->add_option("--gallery", gallery_path, "Gallery feature store")->required();
  evaluate->add_option("--out", out_path, "Report JSON path")->required();

  auto* bench = app.add_subcommand("bench", "Time encoding across patch-count settings");
  add_common_flags(bench, flags);
  bench->add_option("--grid", bench_grid, "Comma list of HxW:s_hxs_w settings");
  bench->add_option("--runs", bench_runs, "Timed runs per setting (median reported)");
  bench->add_option("--out", out_path, "CSV output path (default stdout)");

  auto* verify = app.add_subcommand("verify-losses", "Finite-difference gradient report");
  add_common_flags(verify, flags);

  auto* pipeline = app.add_subcommand("pipeline", "Run analyze/augment/encode/fuse/evaluate");
  add_common_flags(pipeline, flags);
  pipeline->add_option("--corpus", corpus_override, "Corpus directory (overrides config)");
  pipeline->add_option("--out", out_path, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    PipelineConfig config = resolve_config(flags);
    if (!corpus_override.empty()) config.corpus = corpus_override;

    if (analyze->parsed()) {
      const auto res = arpatch::cmd_analyze(config, out_path);
      std::printf("analyze: %zu images, k=%d, plan entries=%zu -> %s\n",
                  res.scan.records.size(), res.clusters.k, res.plan.entries.size(),
                  out_path.c_str());
      for (const auto& w : res.scan.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    } else if (augment->parsed()) {
      arpatch::cmd_augment(config, in_dir, out_path);
      std::printf("augment: %s -> %s\n", in_dir.c_str(), out_path.c_str());
    } else if (encode->parsed()) {
      const auto plan = arpatch::load_plan(plan_path);
      if (entry_index < 0) throw UsageError("encode: entry index must be >= 0");
      arpatch::cmd_encode(config, plan, static_cast<std::size_t>(entry_index), out_path);
      std::printf("encode: entry %d -> %s\n", entry_index, out_path.c_str());
    } else if (fuse->parsed()) {
      arpatch::cmd_fuse(config, store_paths, out_path);
      std::printf("fuse: %zu stores -> %s\n", store_paths.size(), out_path.c_str());
    } else if (evaluate->parsed()) {
      const auto report = arpatch::cmd_evaluate(query_path, gallery_path, config, out_path);
      std::printf("evaluate: mAP=%.4f R1=%.4f R5=%.4f R10=%.4f queries=%d skipped=%d\n",
                  report.mAP, report.r1, report.r5, report.r10, report.num_queries,
                  report.num_skipped);
    } else if (bench->parsed()) {
      const auto rows = arpatch::cmd_bench(config, parse_bench_grid(bench_grid), bench_runs);
      const std::string csv = arpatch::bench_to_csv(rows, config.patch_size);
      if (out_path.empty()) {
        std::fputs(csv.c_str(), stdout);
      } else {
        std::ofstream out(out_path);
        if (!out) throw UsageError("bench: cannot write " + out_path);
        out << csv;
        out.flush();
        if (!out) throw std::runtime_error("bench: write failed: " + out_path);
        std::printf("bench: %zu settings -> %s\n", rows.size(), out_path.c_str());
      }
    } else if (verify->parsed()) {
      const auto rep = arpatch::run_loss_checks(config.seed);
      std::printf("verify-losses: instances=%d triplet_max_rel_err=%.3e id_max_rel_err=%.3e\n",
                  rep.instances, rep.triplet_max_rel_err, rep.id_max_rel_err);
      if (rep.triplet_max_rel_err >= 1e-4 || rep.id_max_rel_err >= 1e-4) {
        std::fprintf(stderr, "verify-losses: gradient check FAILED\n");
        return 1;
      }
    } else if (pipeline->parsed()) {
      const auto report = arpatch::cmd_pipeline(config, out_path);
      std::printf("pipeline: mAP=%.4f R1=%.4f queries=%d skipped=%d -> %s\n", report.mAP,
                  report.r1, report.num_queries, report.num_skipped, out_path.c_str());
    }
    return 0;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
}
