#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#include "arpatch/common.hpp"

namespace arpatch {

// H x W x C raster, float values in [0, 1], row-major with interleaved
// channels: data[(y * width + x) * channels + c].
struct ImageTensor {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> data;

  ImageTensor() = default;
  ImageTensor(int h, int w, int c, float fill = 0.0f)
      : height(h), width(w), channels(c),
        data(static_cast<std::size_t>(h) * w * c, fill) {
    if (h < 1 || w < 1 || c < 1) throw UsageError("ImageTensor: dimensions must be >= 1");
  }

  float& at(int y, int x, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  std::size_t size() const { return data.size(); }

  bool same_shape(const ImageTensor& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
};

inline std::pair<float, float> value_range(const ImageTensor& img) {
  float lo = std::numeric_limits<float>::infinity();
  float hi = -std::numeric_limits<float>::infinity();
  for (float v : img.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

inline bool bitwise_equal(const ImageTensor& a, const ImageTensor& b) {
  return a.same_shape(b) && a.data == b.data;
}

}  // namespace arpatch
