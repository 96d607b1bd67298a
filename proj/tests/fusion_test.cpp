#include <gtest/gtest.h>

#include <cmath>

#include "arpatch/fusion.hpp"
#include "arpatch/rng.hpp"

using namespace arpatch;

namespace {

FeatureVector fv(std::vector<double> values, double model_ar) {
  FeatureVector f;
  f.values = std::move(values);
  f.source_model_ar = model_ar;
  return f;
}

// Pairs whose difference is exactly the double nearest delta: model = delta,
// image = 2 * delta (the subtraction is exact by Sterbenz's lemma).
std::pair<double, double> exact_delta_pair(double delta) { return {delta, 2.0 * delta}; }

TEST(AdaptiveWeight, ThreeCasesWithInclusiveBoundaries) {
  const FusionConfig cfg;
  EXPECT_DOUBLE_EQ(adaptive_weight(1.0, 1.0, cfg), 1.3);      // delta 0
  EXPECT_DOUBLE_EQ(adaptive_weight(1.0, 0.95, cfg), 1.3);     // delta 0.05
  for (double delta : {0.05, 0.1, 0.25, 0.3}) {
    auto [m, i] = exact_delta_pair(delta);
    EXPECT_DOUBLE_EQ(adaptive_weight(m, i, cfg), 1.3) << delta;
  }
  for (double delta : {0.30001, 0.45, 0.6}) {
    auto [m, i] = exact_delta_pair(delta);
    EXPECT_DOUBLE_EQ(adaptive_weight(m, i, cfg), delta <= 0.3 ? 1.3 : (delta <= 0.6 ? 1.0 : 0.9))
        << delta;
  }
  for (double delta : {0.60001, 0.7, 2.0}) {
    auto [m, i] = exact_delta_pair(delta);
    EXPECT_DOUBLE_EQ(adaptive_weight(m, i, cfg), 0.9) << delta;
  }
}

TEST(AdaptiveWeight, OutputSetIsExactlyThreeLevels) {
  const FusionConfig cfg;
  Rng rng(1);
  for (int i = 0; i < 500; ++i) {
    const double m = 0.1 + rng.canonical_double() * 3.0;
    const double im = 0.1 + rng.canonical_double() * 3.0;
    const double w = adaptive_weight(m, im, cfg);
    EXPECT_TRUE(w == 1.3 || w == 1.0 || w == 0.9);
  }
  EXPECT_THROW(adaptive_weight(-1.0, 1.0, cfg), UsageError);
}

TEST(FuseSum, IdenticalVectorsWithUnitWeights) {
  FusionConfig cfg;
  cfg.w_near = 1.0;  // force all weights to 1 (every delta lands in t1)
  cfg.normalize_output = false;
  const std::vector<double> unit = {1.0, 0.0, 0.0, 0.0};
  const auto out = fuse_sum({fv(unit, 1.0), fv(unit, 1.0), fv(unit, 1.0)}, 1.0, cfg);
  EXPECT_DOUBLE_EQ(out.values[0], 3.0);
  EXPECT_DOUBLE_EQ(out.values[1], 0.0);
}

TEST(FuseSum, SingleModelIsScaledCopy) {
  FusionConfig cfg;
  cfg.normalize_output = false;
  const auto out = fuse_sum({fv({0.5, -1.0}, 1.33)}, 1.0, cfg);
  // |1.33 - 1.0| = 0.33 -> mid weight 1.0
  EXPECT_DOUBLE_EQ(out.values[0], 0.5);
  EXPECT_DOUBLE_EQ(out.values[1], -1.0);
  ASSERT_EQ(out.contributions.size(), 1u);
  EXPECT_DOUBLE_EQ(out.contributions[0].second, 1.0);
}

TEST(FuseSum, StockTrioHandComputed) {
  // Models at 1.0/0.95/1.33 against a square image: weights 1.3, 1.3, 1.0.
  FusionConfig cfg;
  cfg.normalize_output = false;
  const auto f1 = fv({1.0, 0.0, 0.0, 2.0}, 1.0);
  const auto f2 = fv({0.0, 1.0, 0.0, -1.0}, 0.95);
  const auto f3 = fv({0.0, 0.0, 1.0, 0.5}, 1.33);
  const auto out = fuse_sum({f1, f2, f3}, 1.0, cfg);
  EXPECT_DOUBLE_EQ(out.values[0], 1.3);
  EXPECT_DOUBLE_EQ(out.values[1], 1.3);
  EXPECT_DOUBLE_EQ(out.values[2], 1.0);
  EXPECT_DOUBLE_EQ(out.values[3], 1.3 * 2.0 + 1.3 * -1.0 + 1.0 * 0.5);
  ASSERT_EQ(out.contributions.size(), 3u);
  EXPECT_DOUBLE_EQ(out.contributions[0].first, 0.95);  // canonical ascending order
  EXPECT_DOUBLE_EQ(out.contributions[0].second, 1.3);
  EXPECT_DOUBLE_EQ(out.contributions[2].second, 1.0);
}

TEST(FuseSum, LinearInEachInput) {
  FusionConfig cfg;
  cfg.normalize_output = false;
  Rng rng(2);
  std::vector<double> a(6), b(6), zero(6, 0.0);
  for (int i = 0; i < 6; ++i) {
    a[i] = rng.gaussian();
    b[i] = rng.gaussian();
  }
  const double alpha = 0.7, beta = -1.4;
  std::vector<double> combo(6);
  for (int i = 0; i < 6; ++i) combo[i] = alpha * a[i] + beta * b[i];
  const auto lhs = fuse_sum({fv(combo, 1.0), fv(zero, 0.8)}, 1.0, cfg);
  const auto fa = fuse_sum({fv(a, 1.0), fv(zero, 0.8)}, 1.0, cfg);
  const auto fb = fuse_sum({fv(b, 1.0), fv(zero, 0.8)}, 1.0, cfg);
  for (int i = 0; i < 6; ++i)
    EXPECT_NEAR(lhs.values[i], alpha * fa.values[i] + beta * fb.values[i], 1e-12);
}

TEST(FuseSum, InputOrderDoesNotMatter) {
  FusionConfig cfg;
  Rng rng(3);
  std::vector<FeatureVector> fs;
  for (double ar : {0.9, 1.1, 1.4}) {
    std::vector<double> v(8);
    for (auto& x : v) x = rng.gaussian();
    fs.push_back(fv(v, ar));
  }
  const auto a = fuse_sum(fs, 1.05, cfg);
  std::swap(fs[0], fs[2]);
  const auto b = fuse_sum(fs, 1.05, cfg);
  for (int i = 0; i < 8; ++i) EXPECT_DOUBLE_EQ(a.values[i], b.values[i]);
}

TEST(FuseSum, DimensionMismatchListsDims) {
  try {
    (void)fuse_sum({fv({1.0, 2.0}, 1.0), fv({1.0}, 0.9)}, 1.0, FusionConfig{});
    FAIL();
  } catch (const UsageError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2"), std::string::npos);
    EXPECT_NE(msg.find("1"), std::string::npos);
  }
}

TEST(FuseSum, NormalizedOutputIsUnitLength) {
  FusionConfig cfg;
  cfg.normalize_output = true;
  Rng rng(4);
  std::vector<double> v(16);
  for (auto& x : v) x = rng.gaussian();
  const auto out = fuse_sum({fv(v, 1.0), fv(v, 1.2)}, 1.0, cfg);
  double norm = 0;
  for (double x : out.values) norm += x * x;
  EXPECT_NEAR(std::sqrt(norm), 1.0, 1e-9);
}

TEST(FuseConcat, ShapeAndSegments) {
  FusionConfig cfg;
  cfg.normalize_output = false;
  std::vector<double> v768(768, 0.5);
  const auto out =
      fuse_concat({fv(v768, 1.0), fv(v768, 0.95), fv(v768, 1.33)}, 1.0, cfg);
  EXPECT_EQ(out.values.size(), 2304u);

  // Same toy trio as the sum test: segment i equals w_i * f_i in canonical order.
  const auto f1 = fv({1.0, 0.0}, 1.0);
  const auto f2 = fv({0.0, 1.0}, 0.95);
  const auto f3 = fv({2.0, 2.0}, 1.33);
  const auto cat = fuse_concat({f1, f2, f3}, 1.0, cfg);
  ASSERT_EQ(cat.values.size(), 6u);
  EXPECT_DOUBLE_EQ(cat.values[0], 1.3 * 0.0);  // f2 first (ar 0.95)
  EXPECT_DOUBLE_EQ(cat.values[1], 1.3 * 1.0);
  EXPECT_DOUBLE_EQ(cat.values[2], 1.3 * 1.0);  // then f1 (ar 1.0)
  EXPECT_DOUBLE_EQ(cat.values[3], 1.3 * 0.0);
  EXPECT_DOUBLE_EQ(cat.values[4], 1.0 * 2.0);  // then f3 (ar 1.33)
  EXPECT_DOUBLE_EQ(cat.values[5], 1.0 * 2.0);
}

TEST(FuseConcat, InputOrderCanonicalized) {
  FusionConfig cfg;
  cfg.normalize_output = false;
  const auto a = fuse_concat({fv({1.0}, 0.9), fv({2.0}, 1.2)}, 1.0, cfg);
  const auto b = fuse_concat({fv({2.0}, 1.2), fv({1.0}, 0.9)}, 1.0, cfg);
  EXPECT_EQ(a.values, b.values);
}

TEST(FusionConfig, RankingInvariantUnderCommonWeightScale) {
  // With normalization on, scaling all weight levels by one constant leaves
  // the fused direction, and therefore any distance ranking, unchanged.
  FusionConfig cfg;
  FusionConfig scaled = cfg;
  scaled.w_near *= 4.0;
  scaled.w_mid *= 4.0;
  scaled.w_far *= 4.0;
  Rng rng(5);
  std::vector<FeatureVector> fs;
  for (double ar : {0.8, 1.0, 1.3}) {
    std::vector<double> v(12);
    for (auto& x : v) x = rng.gaussian();
    fs.push_back(fv(v, ar));
  }
  const auto base = fuse_sum(fs, 1.0, cfg);
  const auto big = fuse_sum(fs, 1.0, scaled);
  for (std::size_t i = 0; i < base.values.size(); ++i)
    EXPECT_NEAR(base.values[i], big.values[i], 1e-12);
}

TEST(FusionConfig, BadThresholdsRejected) {
  FusionConfig cfg;
  cfg.t1 = 0.7;
  cfg.t2 = 0.6;
  EXPECT_THROW(cfg.validate(), UsageError);
}

}  // namespace
