// Acceptance suite: one test per release criterion, each printing a
// PASS/FAIL line with its runtime so the whole gate is auditable from the
// ctest log.

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstdio>

#include "arpatch/arpatch.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace arpatch;

namespace {

class Criterion : public ::testing::Test {
 protected:
  void SetUp() override { start_ = std::chrono::steady_clock::now(); }
  void TearDown() override {
    const double sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    std::printf("[ACCEPTANCE] %s: %s (%.2fs)\n", info->name(),
                HasFailure() ? "FAIL" : "PASS", sec);
    std::fflush(stdout);
  }
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

StrideSpec spec(int s_h, int s_w, int p) {
  StrideSpec s;
  s.s_h = s_h;
  s.s_w = s_w;
  s.p = p;
  return s;
}

TEST_F(Criterion, C01_ResizePlanFidelity) {
  AspectClusters c224;
  c224.centroids = {0.95, 1.33};
  c224.k = 2;
  const auto p224 = make_resize_plan(c224, 224);
  EXPECT_EQ(p224.entries[0].target_width, 212);
  EXPECT_EQ(p224.entries[1].target_width, 298);

  AspectClusters c384;
  c384.centroids = {0.80, 1.03};
  c384.k = 2;
  const auto p384 = make_resize_plan(c384, 384);
  EXPECT_EQ(p384.entries[0].target_width, 308);
  EXPECT_EQ(p384.entries[1].target_width, 396);
  EXPECT_LT(elapsed(), 1.0);
}

TEST_F(Criterion, C02_StrideAssignmentFidelity) {
  const struct {
    double ar;
    int s_h, s_w;
  } expected[] = {
      {1.0, 16, 16}, {0.95, 16, 12}, {1.33, 12, 16}, {0.80, 16, 12}, {1.03, 12, 16}};
  for (const auto& e : expected) {
    const auto s = choose_strides(e.ar, 16, 12);
    EXPECT_EQ(s.s_h, e.s_h) << "ar " << e.ar;
    EXPECT_EQ(s.s_w, e.s_w) << "ar " << e.ar;
  }
  EXPECT_LT(elapsed(), 1.0);
}

TEST_F(Criterion, C03_AdaptiveWeightFidelity) {
  const FusionConfig cfg;
  // Pairs built so the computed |model_ar - image_ar| is exactly the double
  // nearest each target delta (Sterbenz: 2d - d is exact).
  const struct {
    double delta;
    double expected;
  } sweep[] = {{0.0, 1.3},     {0.05, 1.3}, {0.3, 1.3}, {0.30001, 1.0}, {0.45, 1.0},
               {0.6, 1.0},     {0.60001, 0.9}, {0.7, 0.9}, {2.0, 0.9}};
  for (const auto& s : sweep) {
    const double model_ar = s.delta == 0.0 ? 1.0 : s.delta;
    const double image_ar = s.delta == 0.0 ? 1.0 : 2.0 * s.delta;
    EXPECT_DOUBLE_EQ(adaptive_weight(model_ar, image_ar, cfg), s.expected)
        << "delta " << s.delta;
  }
  EXPECT_LT(elapsed(), 1.0);
}

TEST_F(Criterion, C04_PatchMixupMatchesOracle) {
  float worst = 0.0f;
  for (int trial = 0; trial < 20; ++trial) {
    const auto img = testutil::random_image(64, 64, 9000 + trial);
    const auto mine = apply_patch_mixup(img, spec(8, 8, 8), 0.5, 500 + trial);
    const auto ref = oracle::mixup_reference(img, 8, 8, 8, 0.5, 500 + trial);
    ASSERT_TRUE(mine.same_shape(ref));
    for (std::size_t i = 0; i < mine.data.size(); ++i)
      worst = std::max(worst, std::abs(mine.data[i] - ref.data[i]));
  }
  EXPECT_LE(worst, 1e-9f);
  EXPECT_LT(elapsed(), 10.0);
}

TEST_F(Criterion, C05_MixupInvariants) {
  // Identity permutation (mix_prob 0) leaves an exactly-covered image bit-identical.
  const auto img = testutil::random_image(224, 224, 21);
  EXPECT_TRUE(bitwise_equal(img, apply_patch_mixup(img, spec(16, 16, 16), 0.0, 3)));

  // Constant image unchanged for any seed.
  const auto flat = testutil::constant_image(64, 64, 0.375f);
  for (std::uint64_t s : {0ull, 9ull}) {
    const auto out = apply_patch_mixup(flat, spec(8, 8, 8), 1.0, s);
    for (float v : out.data) EXPECT_EQ(v, 0.375f);
  }

  // Output range contained in input range.
  for (int t = 0; t < 5; ++t) {
    const auto x = testutil::random_image(64, 80, 300 + t);
    const auto [lo, hi] = value_range(x);
    const auto out = apply_patch_mixup(x, spec(6, 8, 8), 0.8, t);
    const auto [olo, ohi] = value_range(out);
    EXPECT_GE(olo, lo);
    EXPECT_LE(ohi, hi);
  }

  // Score symmetry and unit diagonal on every grid up to 20x20.
  for (int rows = 1; rows <= 20; ++rows) {
    for (int cols = 1; cols <= 20; ++cols) {
      const auto g = plan_grid(rows * 8, cols * 8, spec(8, 8, 8));
      const auto S = attention_scores(distance_matrix(g), 8);
      for (int i = 0; i < g.n; ++i) {
        if (S[i][i] != 1.0) FAIL() << "diagonal at " << rows << "x" << cols;
        for (int j = i + 1; j < g.n; ++j) {
          if (S[i][j] != S[j][i]) FAIL() << "symmetry at " << rows << "x" << cols;
          if (!(S[i][j] > 0.0 && S[i][j] <= 1.0)) FAIL() << "range";
        }
      }
    }
  }

  // Lambda strictly decreasing in partner distance.
  const auto g = plan_grid(160, 160, spec(16, 16, 16));
  const auto plan = build_mixup_plan(g, 1.0, 77);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const double di = plan.distances[i][plan.perm[i]];
      const double dj = plan.distances[j][plan.perm[j]];
      if (di < dj) EXPECT_GT(plan.lambdas[i], plan.lambdas[j]);
    }
  EXPECT_LT(elapsed(), 30.0);
}

TEST_F(Criterion, C06_PatchCountFormula) {
  Rng rng(606);
  for (int trial = 0; trial < 200; ++trial) {
    const int p = 2 + static_cast<int>(rng.bounded_uint(15));
    const int s_h = 1 + static_cast<int>(rng.bounded_uint(p));
    const int s_w = 1 + static_cast<int>(rng.bounded_uint(p));
    const int H = p + static_cast<int>(rng.bounded_uint(120));
    const int W = p + static_cast<int>(rng.bounded_uint(120));
    const auto g = plan_grid(H, W, spec(s_h, s_w, p));
    std::vector<std::pair<int, int>> enumerated;
    for (int y = 0; y + p <= H; y += s_h)
      for (int x = 0; x + p <= W; x += s_w) enumerated.emplace_back(x, y);
    ASSERT_EQ(g.n, static_cast<int>(enumerated.size()));
    ASSERT_EQ(g.coords, enumerated);
  }
  EXPECT_LT(elapsed(), 5.0);
}

TEST_F(Criterion, C07_LossCorrectness) {
  TripletSample sym;
  sym.anchor = {0.4, -1.0, 2.0};
  sym.positive = {1.0, 1.0, 0.0};
  sym.negative = sym.positive;
  EXPECT_NEAR(triplet_loss_soft(sym).value, std::log(2.0), 1e-9);

  for (int k : {3, 17, 101})
    EXPECT_NEAR(id_loss(std::vector<double>(k, 1.23), 0).value, std::log(double(k)), 1e-9);

  const auto rep = run_loss_checks(4242, 50);
  EXPECT_LT(rep.triplet_max_rel_err, 1e-4);
  EXPECT_LT(rep.id_max_rel_err, 1e-4);
  EXPECT_LT(elapsed(), 10.0);
}

TEST_F(Criterion, C08_MetricOracleEquivalence) {
  Rng rng(808);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int nq = 5 + static_cast<int>(rng.bounded_uint(26));   // <= 30
    const int ng = 20 + static_cast<int>(rng.bounded_uint(61));  // <= 80
    const int dim = 4 + static_cast<int>(rng.bounded_uint(9));
    const bool cameras = trial % 3 == 0;
    const bool cosine = trial % 2 == 0;
    FeatureStore q, g;
    for (int i = 0; i < nq; ++i) {
      StoreEntry e;
      e.image_id = "q" + std::to_string(i);
      e.vehicle_id = "v" + std::to_string(rng.bounded_uint(6));
      e.camera_id = cameras ? static_cast<int>(rng.bounded_uint(3)) : -1;
      for (int d = 0; d < dim; ++d) e.values.push_back(rng.gaussian());
      q.add(std::move(e));
    }
    for (int i = 0; i < ng; ++i) {
      StoreEntry e;
      e.image_id = "g" + std::to_string(i);
      e.vehicle_id = "v" + std::to_string(rng.bounded_uint(6));
      e.camera_id = cameras ? static_cast<int>(rng.bounded_uint(3)) : -1;
      for (int d = 0; d < dim; ++d) e.values.push_back(rng.gaussian());
      g.add(std::move(e));
    }
    EvalConfig cfg;
    cfg.metric = cosine ? Metric::cosine : Metric::euclidean;
    MetricsReport rep;
    try {
      rep = evaluate(q, g, cfg);
    } catch (const UsageError&) {
      continue;
    }
    ++checked;
    const auto ref = oracle::retrieval_reference(q, g, cosine, rep.junk_filter);
    ASSERT_NEAR(rep.mAP, ref.mAP, 1e-12);
    ASSERT_EQ(rep.cmc.size(), ref.cmc.size());
    for (std::size_t k = 0; k < ref.cmc.size(); ++k) {
      ASSERT_NEAR(rep.cmc[k], ref.cmc[k], 1e-12);
      if (k > 0) ASSERT_GE(rep.cmc[k] + 1e-15, rep.cmc[k - 1]);
    }
  }
  EXPECT_GE(checked, 90);

  // Cosine rankings are invariant under a global positive feature scale.
  FeatureStore q = FeatureStore{}, g = FeatureStore{};
  for (int i = 0; i < 10; ++i) {
    StoreEntry e;
    e.image_id = "q" + std::to_string(i);
    e.vehicle_id = "v" + std::to_string(i % 4);
    for (int d = 0; d < 8; ++d) e.values.push_back(rng.gaussian());
    q.add(e);
    e.image_id = "g" + std::to_string(i);
    for (auto& v : e.values) v = rng.gaussian();
    g.add(e);
  }
  EvalConfig cfg;
  cfg.metric = Metric::cosine;
  const auto dist_base = pairwise_distances(q, g, Metric::cosine);
  FeatureStore q2 = q, g2 = g;
  for (auto& e : q2.entries)
    for (auto& v : e.values) v *= 1000.0;
  for (auto& e : g2.entries)
    for (auto& v : e.values) v *= 1000.0;
  const auto dist_scaled = pairwise_distances(q2, g2, Metric::cosine);
  for (std::size_t i = 0; i < dist_base.size(); ++i) {
    const auto a = rank_gallery(dist_base[i], g, q.entries[i], false);
    const auto b = rank_gallery(dist_scaled[i], g2, q2.entries[i], false);
    ASSERT_EQ(a.order, b.order);  // argsort equality
  }
  EXPECT_LT(elapsed(), 30.0);
}

TEST_F(Criterion, C09_EncoderSanity) {
  const auto cfg = EncoderConfig::toy(3, 4, 8 * 8 * 3);
  const auto w = init_weights(cfg, 909);
  const auto img = testutil::random_image(24, 32, 910);
  const auto set = extract_patches(img, plan_grid(24, 32, spec(8, 8, 8)));
  const auto tokens = embed_patches(set, w);
  const auto pos = interpolate_pos_embeddings(w, set.grid);

  // Reference forward within 1e-6.
  ForwardTrace trace;
  const auto fast = encoder_forward(tokens, pos, w, &trace);
  const auto ref = oracle::forward_reference(set, w, pos);
  for (std::size_t i = 0; i < ref.size(); ++i) ASSERT_NEAR(fast.values[i], ref[i], 1e-6);

  // Attention rows sum to one.
  for (const auto& layer : trace.attention)
    for (const auto& head : layer)
      for (int t = 0; t < head.rows; ++t) {
        double sum = 0;
        for (int u = 0; u < head.cols; ++u) sum += head.at(t, u);
        ASSERT_NEAR(sum, 1.0, 1e-6);
      }

  // Layer norm statistics.
  Rng rng(911);
  Mat x(8, 64);
  for (auto& v : x.v) v = rng.gaussian() * 2.0 - 0.5;
  const Mat y = detail::layer_norm(x, std::vector<double>(64, 1.0), std::vector<double>(64, 0.0));
  for (int t = 0; t < y.rows; ++t) {
    double mean = 0;
    for (int c = 0; c < 64; ++c) mean += y.at(t, c);
    mean /= 64;
    double var = 0;
    for (int c = 0; c < 64; ++c) var += (y.at(t, c) - mean) * (y.at(t, c) - mean);
    var /= 64;
    ASSERT_NEAR(mean, 0.0, 1e-6);
    ASSERT_NEAR(var, 1.0, 1e-4);
  }

  // Bit-identical across repeat runs and across worker thread counts.
  const auto again = encoder_forward(tokens, pos, w);
  ASSERT_EQ(fast.values, again.values);

  const auto model = bind_model(cfg, 912, spec(8, 8, 8), 24, 32, 1.33);
  std::vector<ImageTensor> batch;
  for (int i = 0; i < 6; ++i) batch.push_back(testutil::random_image(24, 32, 920 + i));
  std::vector<std::vector<double>> out1(batch.size()), out2(batch.size());
  parallel_for(batch.size(), [&](std::size_t i) {
    out1[i] = encode_image(batch[i], model, "img").values;
  }, 1);
  parallel_for(batch.size(), [&](std::size_t i) {
    out2[i] = encode_image(batch[i], model, "img").values;
  }, 2);
  ASSERT_EQ(out1, out2);
  EXPECT_LT(elapsed(), 30.0);
}

TEST_F(Criterion, C10_EndToEndRetrievalSanity) {
  testutil::TempDir dir("accept_e2e");
  SyntheticSpec spec;
  spec.num_vehicles = 10;
  spec.images_per_vehicle = 6;
  generate_synthetic_corpus(dir.file("corpus"), spec);

  PipelineConfig config;
  config.corpus = dir.file("corpus");
  config.preset = "toy";
  config.base_height = 224;
  config.k = 3;
  config.seed = 1010;
  const MetricsReport fused_report = cmd_pipeline(config, dir.file("out"));
  EXPECT_EQ(fused_report.num_queries + fused_report.num_skipped, 30);
  EXPECT_GE(fused_report.mAP, 0.0);
  EXPECT_LE(fused_report.mAP, 1.0);

  // Control: analytic features distilled from the drawn vehicle color must
  // retrieve perfectly.
  const ScanResult scan = scan_corpus(config.corpus, default_manifest(config.corpus));
  auto color_feature = [](const ImageTensor& img) {
    double r = 0, g = 0, b = 0;
    long count = 0;
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        const float rr = img.at(y, x, 0), gg = img.at(y, x, 1), bb = img.at(y, x, 2);
        const float spread = std::max({rr, gg, bb}) - std::min({rr, gg, bb});
        if (spread > 0.1f) {  // saturated pixels belong to the vehicle body
          r += rr;
          g += gg;
          b += bb;
          ++count;
        }
      }
    if (count == 0) return std::vector<double>{0.0, 0.0, 0.0};
    return std::vector<double>{r / count, g / count, b / count};
  };
  FeatureStore queries, gallery;
  for (const auto& rec : scan.records) {
    StoreEntry e;
    e.image_id = rec.id;
    e.vehicle_id = rec.vehicle_id;
    e.camera_id = parse_camera(rec.camera_id);
    e.values = color_feature(read_image(rec.path));
    (e.camera_id == 0 ? queries : gallery).add(std::move(e));
  }
  EvalConfig eval_cfg;
  eval_cfg.junk = JunkFilter::off;
  const auto control = evaluate(queries, gallery, eval_cfg);
  EXPECT_DOUBLE_EQ(control.mAP, 1.0);
  EXPECT_DOUBLE_EQ(control.r1, 1.0);
  EXPECT_LT(elapsed(), 120.0);
}

TEST_F(Criterion, C11_EncodeTimeGrowsWithPatchCount) {
  PipelineConfig config;
  config.preset = "toy";
  std::vector<BenchSetting> settings = {
      {224, 224, 16, 16},  // 196 patches
      {224, 298, 12, 16},  // 324 patches
      {384, 384, 16, 16},  // 576 patches
  };
  const auto rows = cmd_bench(config, settings, 5, 2);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].patch_count, 196);
  EXPECT_EQ(rows[1].patch_count, 324);
  EXPECT_EQ(rows[2].patch_count, 576);
  EXPECT_LT(rows[0].median_ms, rows[1].median_ms);
  EXPECT_LT(rows[1].median_ms, rows[2].median_ms);
  EXPECT_LT(elapsed(), 60.0);
}

}  // namespace
