#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "arpatch/patchify.hpp"
#include "arpatch/rng.hpp"

namespace arpatch {

// Intra-image patch mixup: each participating patch i blends with a partner
// patch perm[i] from the same image, weighted by a spatial proximity score.
struct MixupPlan {
  int n = 0;
  std::vector<int> perm;              // bijection on {0..n-1}; perm[i] == i where masked off
  std::vector<std::vector<double>> distances;  // grid-unit center distances
  std::vector<std::vector<double>> scores;     // 1 / (1 + p * distance), in (0, 1]
  std::vector<double> lambdas;        // scores[i][perm[i]]
  std::vector<bool> mix_mask;         // true = patch participates
};

// D[i][j] = Euclidean distance between grid positions (row, col) of patches
// i and j, in grid units. Symmetric with a zero diagonal.
inline std::vector<std::vector<double>> distance_matrix(const PatchGrid& grid) {
  const int n = grid.n;
  const int cols = grid.cols;
  std::vector<std::vector<double>> D(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    const int ri = i / cols, ci = i % cols;
    for (int j = i + 1; j < n; ++j) {
      const int rj = j / cols, cj = j % cols;
      const double dr = ri - rj, dc = ci - cj;
      const double d = std::sqrt(dr * dr + dc * dc);
      D[i][j] = d;
      D[j][i] = d;
    }
  }
  return D;
}

// S[i][j] = 1 / (1 + p * D[i][j]). The factor p converts grid steps to
// pixels; it is applied exactly once, here.
inline std::vector<std::vector<double>> attention_scores(
    const std::vector<std::vector<double>>& D, int p) {
  if (p < 1) throw UsageError("attention_scores: p must be >= 1");
  std::vector<std::vector<double>> S(D.size(), std::vector<double>(D.size()));
  for (std::size_t i = 0; i < D.size(); ++i)
    for (std::size_t j = 0; j < D.size(); ++j)
      S[i][j] = 1.0 / (1.0 + static_cast<double>(p) * D[i][j]);
  return S;
}

struct PermutationDraw {
  std::vector<int> perm;
  std::vector<bool> mix_mask;
};

// Draws a uniform permutation of all n indices (Fisher-Yates), then marks
// each patch as participating with independent probability mix_prob; where a
// patch sits out, perm[i] is overwritten to i. Draw order is fixed:
// permutation first, then n Bernoulli draws.
inline PermutationDraw sample_permutation(int n, double mix_prob, std::uint64_t seed) {
  if (n < 1) throw UsageError("sample_permutation: n must be >= 1");
  if (mix_prob < 0.0 || mix_prob > 1.0)
    throw UsageError("sample_permutation: mix_prob must be in [0,1]");
  Rng rng(seed);
  PermutationDraw out;
  out.perm.resize(n);
  std::iota(out.perm.begin(), out.perm.end(), 0);
  rng.shuffle(out.perm);
  out.mix_mask.resize(n);
  for (int i = 0; i < n; ++i) out.mix_mask[i] = rng.canonical_double() < mix_prob;
  for (int i = 0; i < n; ++i)
    if (!out.mix_mask[i]) out.perm[i] = i;
  return out;
}

// lambda[i] = S[i][perm[i]]: the blend weight for pairing patch i with its
// shuffled partner.
inline std::vector<double> adjusted_scores(const std::vector<std::vector<double>>& S,
                                           const std::vector<int>& perm) {
  std::vector<double> lambdas(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) lambdas[i] = S[i][perm[i]];
  return lambdas;
}

// out[i] = (1 - lambda[i]) * A[i] + lambda[i] * A[perm[i]] for participating
// patches, A[i] otherwise. Blending runs in double and stores float, so each
// output pixel stays inside the interval spanned by its two sources.
inline PatchSet mix_patches(const PatchSet& patches, const std::vector<int>& perm,
                            const std::vector<double>& lambdas,
                            const std::vector<bool>& mix_mask) {
  const int n = patches.grid.n;
  if (static_cast<int>(perm.size()) != n || static_cast<int>(lambdas.size()) != n ||
      static_cast<int>(mix_mask.size()) != n)
    throw UsageError("mix_patches: plan length does not match patch count");
  PatchSet out;
  out.grid = patches.grid;
  out.data.resize(n);
  for (int i = 0; i < n; ++i) {
    if (!mix_mask[i] || perm[i] == i) {
      out.data[i] = patches.data[i];
      continue;
    }
    const std::vector<float>& a = patches.data[i];
    const std::vector<float>& b = patches.data[perm[i]];
    const double lam = lambdas[i];
    std::vector<float>& dst = out.data[i];
    dst.resize(a.size());
    for (std::size_t k = 0; k < a.size(); ++k)
      dst[k] = static_cast<float>((1.0 - lam) * a[k] + lam * b[k]);
  }
  return out;
}

inline MixupPlan build_mixup_plan(const PatchGrid& grid, double mix_prob, std::uint64_t seed) {
  MixupPlan plan;
  plan.n = grid.n;
  plan.distances = distance_matrix(grid);
  plan.scores = attention_scores(plan.distances, grid.stride.p);
  PermutationDraw draw = sample_permutation(grid.n, mix_prob, seed);
  plan.perm = std::move(draw.perm);
  plan.mix_mask = std::move(draw.mix_mask);
  plan.lambdas = adjusted_scores(plan.scores, plan.perm);
  return plan;
}

// Full augmentation: patchify, blend each participating patch with its
// sampled partner, and recompose (overlaps averaged, dropped margins filled
// from the input). Deterministic for a fixed seed.
inline ImageTensor apply_patch_mixup(const ImageTensor& image, const StrideSpec& stride,
                                     double mix_prob, std::uint64_t seed) {
  PatchGrid grid = plan_grid(image.height, image.width, stride);
  PatchSet patches = extract_patches(image, grid);
  MixupPlan plan = build_mixup_plan(grid, mix_prob, seed);
  PatchSet mixed = mix_patches(patches, plan.perm, plan.lambdas, plan.mix_mask);
  return reconstruct(mixed, image);
}

}  // namespace arpatch
