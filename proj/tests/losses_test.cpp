#include <gtest/gtest.h>

#include <cmath>

#include "arpatch/losses.hpp"
#include "arpatch/pipeline.hpp"
#include "arpatch/rng.hpp"

using namespace arpatch;

namespace {

TEST(IdLoss, UniformLogitsGiveLogK) {
  for (int k : {2, 5, 10, 100}) {
    const std::vector<double> logits(k, 0.7);
    const auto loss = id_loss(logits, 0);
    EXPECT_NEAR(loss.value, std::log(static_cast<double>(k)), 1e-9);
  }
}

TEST(IdLoss, ConfidentCorrectLogit) {
  const auto loss = id_loss({10.0, -10.0}, 0);
  // -log(sigmoid(20)) evaluated directly.
  EXPECT_NEAR(loss.value, 2.061153622438558e-9, 1e-12);
}

TEST(IdLoss, GradientSumsToZero) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> logits;
    for (int i = 0; i < 12; ++i) logits.push_back(rng.gaussian() * 3.0);
    const auto loss = id_loss(logits, static_cast<int>(rng.bounded_uint(12)));
    double sum = 0.0;
    for (double g : loss.gradients[0]) sum += g;
    EXPECT_NEAR(sum, 0.0, 1e-9);
  }
}

TEST(IdLoss, LargeLogitsDoNotOverflow) {
  const auto loss = id_loss({1e4, -1e4, 5e3}, 1);
  EXPECT_TRUE(std::isfinite(loss.value));
  EXPECT_GE(loss.value, 0.0);
}

TEST(IdLoss, OutOfRangeLabelRejected) {
  EXPECT_THROW(id_loss({1.0, 2.0}, 2), UsageError);
  EXPECT_THROW(id_loss({1.0, 2.0}, -1), UsageError);
}

TEST(TripletLoss, SymmetryPointIsLogTwo) {
  TripletSample t;
  t.anchor = {0.3, -0.2, 1.0};
  t.positive = {1.0, 0.5, -0.4};
  t.negative = t.positive;  // d_ap == d_an
  const auto loss = triplet_loss_soft(t);
  EXPECT_NEAR(loss.value, std::log(2.0), 1e-9);
}

TEST(TripletLoss, ExtremeGapDoesNotOverflow) {
  TripletSample t;
  t.anchor = {0.0};
  t.positive = {0.0};
  t.negative = {10.0};  // d_ap - d_an = -100
  const auto loss = triplet_loss_soft(t);
  EXPECT_NEAR(loss.value, 3.7200759760208356e-44, 1e-50);
  t.negative = {0.0};
  t.positive = {100.0};  // gap = +10000, softplus ~ gap
  const auto big = triplet_loss_soft(t);
  EXPECT_TRUE(std::isfinite(big.value));
  EXPECT_NEAR(big.value, 10000.0, 1e-6);
}

TEST(TripletLoss, HandComputedValue) {
  TripletSample t;
  t.anchor = {0.0, 0.0};
  t.positive = {1.0, 0.0};
  t.negative = {0.0, 2.0};
  const auto loss = triplet_loss_soft(t);
  EXPECT_NEAR(loss.value, std::log1p(std::exp(-3.0)), 1e-12);
  EXPECT_NEAR(loss.value, 0.048587, 1e-6);
}

TEST(TripletLoss, TranslationInvariant) {
  Rng rng(2);
  TripletSample t;
  for (int i = 0; i < 6; ++i) {
    t.anchor.push_back(rng.gaussian());
    t.positive.push_back(rng.gaussian());
    t.negative.push_back(rng.gaussian());
  }
  const double base = triplet_loss_soft(t).value;
  TripletSample shifted = t;
  for (int i = 0; i < 6; ++i) {
    shifted.anchor[i] += 3.7;
    shifted.positive[i] += 3.7;
    shifted.negative[i] += 3.7;
  }
  EXPECT_NEAR(triplet_loss_soft(shifted).value, base, 1e-9);
}

TEST(TripletLoss, MonotoneInDistances) {
  // Strictly increasing in d_ap, strictly decreasing in d_an.
  TripletSample t;
  t.anchor = {0.0};
  t.positive = {1.0};
  t.negative = {2.0};
  const double base = triplet_loss_soft(t).value;
  t.positive = {1.2};
  EXPECT_GT(triplet_loss_soft(t).value, base);
  t.positive = {1.0};
  t.negative = {2.5};
  EXPECT_LT(triplet_loss_soft(t).value, base);
}

TEST(FiniteDiff, TripletGradientsMatch) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    TripletSample t;
    for (int i = 0; i < 8; ++i) {
      t.anchor.push_back(rng.gaussian());
      t.positive.push_back(rng.gaussian());
      t.negative.push_back(rng.gaussian());
    }
    const double err = finite_diff_check(
        [](const std::vector<std::vector<double>>& in) {
          return triplet_loss_soft({in[0], in[1], in[2]});
        },
        {t.anchor, t.positive, t.negative});
    EXPECT_LT(err, 1e-4) << "trial " << trial;
  }
}

TEST(FiniteDiff, IdGradientsMatch) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> logits;
    for (int i = 0; i < 10; ++i) logits.push_back(rng.gaussian() * 2.0);
    const int label = static_cast<int>(rng.bounded_uint(10));
    const double err = finite_diff_check(
        [label](const std::vector<std::vector<double>>& in) { return id_loss(in[0], label); },
        {logits});
    EXPECT_LT(err, 1e-4) << "trial " << trial;
  }
}

TEST(FiniteDiff, UniformLogitsStationaryCoordinate) {
  // At uniform logits the label-coordinate gradient is (K-1)/K times -1/K
  // offset: softmax = 1/K everywhere, so grad[label] = 1/K - 1.
  const int K = 8;
  const std::vector<double> logits(K, 0.0);
  const auto loss = id_loss(logits, 3);
  EXPECT_NEAR(loss.gradients[0][3], 1.0 / K - 1.0, 1e-12);
  const double err = finite_diff_check(
      [](const std::vector<std::vector<double>>& in) { return id_loss(in[0], 3); }, {logits});
  EXPECT_LT(err, 1e-4);
}

TEST(LossCheckReport, CliHelperStaysTight) {
  const auto rep = run_loss_checks(123);
  EXPECT_EQ(rep.instances, 50);
  EXPECT_LT(rep.triplet_max_rel_err, 1e-4);
  EXPECT_LT(rep.id_max_rel_err, 1e-4);
}

}  // namespace
