#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "arpatch/image.hpp"

namespace arpatch {

// Patch side length p with independent vertical/horizontal steps. Steps of
// less than p overlap; steps above p are rejected (they would skip pixels).
struct StrideSpec {
  int s_h = 16;
  int s_w = 16;
  int p = 16;

  void validate() const {
    if (p < 1) throw UsageError("StrideSpec: patch size must be >= 1");
    if (s_h < 1 || s_h > p || s_w < 1 || s_w > p)
      throw UsageError("StrideSpec: strides must satisfy 1 <= s <= p");
  }
};

struct PatchGrid {
  int rows = 0;
  int cols = 0;
  int n = 0;                                 // rows * cols
  std::vector<std::pair<int, int>> coords;   // (x, y) top-left corners, row-major
  StrideSpec stride;
  int image_height = 0;
  int image_width = 0;
};

// Per-patch pixel blocks of p x p x C, in grid order.
struct PatchSet {
  PatchGrid grid;
  std::vector<std::vector<float>> data;
};

// Stride assignment by aspect ratio: the shorter image dimension gets the
// smaller step. Square inputs use the long stride in both directions.
inline StrideSpec choose_strides(double ar, int long_stride, int short_stride, int p = 16) {
  if (!(short_stride >= 1 && short_stride <= long_stride && long_stride <= p))
    throw UsageError("choose_strides: need 1 <= short <= long <= p");
  StrideSpec s;
  s.p = p;
  if (ar > 1.0) {        // width is the longer dimension
    s.s_h = short_stride;
    s.s_w = long_stride;
  } else if (ar < 1.0) {
    s.s_h = long_stride;
    s.s_w = short_stride;
  } else {
    s.s_h = long_stride;
    s.s_w = long_stride;
  }
  return s;
}

// rows = floor((H - p) / s_h) + 1 and likewise for columns; trailing pixels
// that do not fit a full patch are dropped.
inline PatchGrid plan_grid(int H, int W, const StrideSpec& stride) {
  stride.validate();
  if (H < stride.p)
    throw UsageError("plan_grid: image height " + std::to_string(H) +
                     " smaller than patch size " + std::to_string(stride.p));
  if (W < stride.p)
    throw UsageError("plan_grid: image width " + std::to_string(W) +
                     " smaller than patch size " + std::to_string(stride.p));
  PatchGrid g;
  g.rows = (H - stride.p) / stride.s_h + 1;
  g.cols = (W - stride.p) / stride.s_w + 1;
  g.n = g.rows * g.cols;
  g.stride = stride;
  g.image_height = H;
  g.image_width = W;
  g.coords.reserve(g.n);
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c)
      g.coords.emplace_back(c * stride.s_w, r * stride.s_h);
  return g;
}

inline PatchSet extract_patches(const ImageTensor& image, const PatchGrid& grid) {
  if (image.height != grid.image_height || image.width != grid.image_width)
    throw UsageError("extract_patches: image dimensions do not match grid");
  const int p = grid.stride.p;
  const int C = image.channels;
  PatchSet set;
  set.grid = grid;
  set.data.resize(grid.n);
  for (int i = 0; i < grid.n; ++i) {
    auto [px, py] = grid.coords[i];
    std::vector<float>& block = set.data[i];
    block.resize(static_cast<std::size_t>(p) * p * C);
    std::size_t k = 0;
    for (int v = 0; v < p; ++v)
      for (int u = 0; u < p; ++u)
        for (int c = 0; c < C; ++c) block[k++] = image.at(py + v, px + u, c);
  }
  return set;
}

// Recomposes an image from patches. Overlapping pixels take the mean of all
// covering patches (summed in double); pixels outside every patch (trailing
// margins dropped by plan_grid) are copied from background, which must be
// the original image. With a non-overlapping full-coverage grid this is an
// exact inverse of extract_patches.
inline ImageTensor reconstruct(const PatchSet& patches, const ImageTensor& background) {
  const PatchGrid& g = patches.grid;
  if (background.height != g.image_height || background.width != g.image_width)
    throw UsageError("reconstruct: background dimensions do not match grid");
  const int p = g.stride.p;
  const int C = background.channels;
  ImageTensor out(g.image_height, g.image_width, C);
  std::vector<double> acc(out.size(), 0.0);
  std::vector<std::uint32_t> cover(static_cast<std::size_t>(g.image_height) * g.image_width, 0);

  for (int i = 0; i < g.n; ++i) {
    auto [px, py] = g.coords[i];
    const std::vector<float>& block = patches.data[i];
    std::size_t k = 0;
    for (int v = 0; v < p; ++v) {
      for (int u = 0; u < p; ++u) {
        const std::size_t pix = static_cast<std::size_t>(py + v) * g.image_width + (px + u);
        cover[pix]++;
        for (int c = 0; c < C; ++c) acc[pix * C + c] += block[k++];
      }
    }
  }
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      const std::size_t pix = static_cast<std::size_t>(y) * out.width + x;
      for (int c = 0; c < C; ++c) {
        out.at(y, x, c) = cover[pix] == 0
                              ? background.at(y, x, c)
                              : static_cast<float>(acc[pix * C + c] / cover[pix]);
      }
    }
  }
  return out;
}

inline nlohmann::json to_json(const PatchGrid& g) {
  return {{"rows", g.rows},   {"cols", g.cols},          {"n", g.n},
          {"s_h", g.stride.s_h}, {"s_w", g.stride.s_w},  {"p", g.stride.p},
          {"H", g.image_height}, {"W", g.image_width}};
}

}  // namespace arpatch
