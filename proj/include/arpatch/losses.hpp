#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "arpatch/common.hpp"

namespace arpatch {

struct LossValue {
  double value = 0.0;
  // One gradient array per input, in the loss's documented input order.
  std::vector<std::vector<double>> gradients;
};

struct TripletSample {
  std::vector<double> anchor;
  std::vector<double> positive;
  std::vector<double> negative;

  void validate() const {
    if (anchor.empty() || anchor.size() != positive.size() || anchor.size() != negative.size())
      throw UsageError("TripletSample: anchor/positive/negative dims must match");
  }
};

namespace detail {

// log(1 + exp(x)) without overflow on either side.
inline double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace detail

// Cross-entropy on raw logits, no label smoothing. Stabilized by max
// subtraction. gradients[0] = softmax(logits) - onehot(label).
inline LossValue id_loss(const std::vector<double>& logits, int label) {
  if (logits.empty()) throw UsageError("id_loss: empty logits");
  if (label < 0 || label >= static_cast<int>(logits.size()))
    throw UsageError("id_loss: label " + std::to_string(label) + " out of range for " +
                     std::to_string(logits.size()) + " classes");
  double max_l = logits[0];
  for (double l : logits) max_l = std::max(max_l, l);
  double denom = 0.0;
  for (double l : logits) denom += std::exp(l - max_l);
  const double log_denom = std::log(denom);

  LossValue out;
  out.value = -(logits[label] - max_l - log_denom);
  out.gradients.emplace_back(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double soft = std::exp(logits[i] - max_l) / denom;
    out.gradients[0][i] = soft - (static_cast<int>(i) == label ? 1.0 : 0.0);
  }
  return out;
}

// Soft-margin triplet loss: softplus of the gap between anchor-positive and
// anchor-negative squared distances. gradients are [anchor, positive,
// negative].
inline LossValue triplet_loss_soft(const TripletSample& t) {
  t.validate();
  const double d_ap = detail::squared_distance(t.anchor, t.positive);
  const double d_an = detail::squared_distance(t.anchor, t.negative);
  const double gap = d_ap - d_an;

  LossValue out;
  out.value = detail::softplus(gap);
  const double sig = detail::logistic(gap);
  const std::size_t dim = t.anchor.size();
  out.gradients.assign(3, std::vector<double>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    out.gradients[0][i] = sig * 2.0 * (t.negative[i] - t.positive[i]);
    out.gradients[1][i] = sig * -2.0 * (t.anchor[i] - t.positive[i]);
    out.gradients[2][i] = sig * 2.0 * (t.anchor[i] - t.negative[i]);
  }
  return out;
}

// Central-difference verification of analytic gradients. loss_fn maps the
// flattened inputs to (value, gradients) with the same flattening. Returns
// max over coordinates of |analytic - numeric| / (|numeric| + 1e-12).
inline double finite_diff_check(
    const std::function<LossValue(const std::vector<std::vector<double>>&)>& loss_fn,
    std::vector<std::vector<double>> inputs, double eps = 1e-5) {
  if (eps <= 0.0) throw UsageError("finite_diff_check: eps must be > 0");
  const LossValue base = loss_fn(inputs);
  double worst = 0.0;
  for (std::size_t g = 0; g < inputs.size(); ++g) {
    for (std::size_t i = 0; i < inputs[g].size(); ++i) {
      const double saved = inputs[g][i];
      inputs[g][i] = saved + eps;
      const double up = loss_fn(inputs).value;
      inputs[g][i] = saved - eps;
      const double down = loss_fn(inputs).value;
      inputs[g][i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = base.gradients[g][i];
      const double rel = std::abs(analytic - numeric) / (std::abs(numeric) + 1e-12);
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace arpatch
