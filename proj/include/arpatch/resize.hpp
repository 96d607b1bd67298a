#pragma once

#include <cmath>
#include <cstdint>

#include "arpatch/image.hpp"
#include "arpatch/rng.hpp"

namespace arpatch {

// Bilinear resize with corner-aligned sampling: output corner pixels map to
// input corner pixels, source coordinate = i * (in-1) / (out-1). A target of
// size 1 samples coordinate 0. Same-size targets return a bit-identical
// copy. Interpolation runs in double and cannot leave the input value range.
inline ImageTensor resize_image(const ImageTensor& image, int target_height, int target_width) {
  if (target_height < 1 || target_width < 1)
    throw UsageError("resize_image: target dimensions must be >= 1");
  if (target_height == image.height && target_width == image.width) return image;

  ImageTensor out(target_height, target_width, image.channels);
  const double sy = target_height > 1
                        ? static_cast<double>(image.height - 1) / (target_height - 1)
                        : 0.0;
  const double sx = target_width > 1
                        ? static_cast<double>(image.width - 1) / (target_width - 1)
                        : 0.0;
  for (int y = 0; y < target_height; ++y) {
    const double fy = y * sy;
    int y0 = static_cast<int>(fy);
    if (y0 > image.height - 2) y0 = image.height > 1 ? image.height - 2 : 0;
    const int y1 = image.height > 1 ? y0 + 1 : y0;
    const double wy = fy - y0;
    for (int x = 0; x < target_width; ++x) {
      const double fx = x * sx;
      int x0 = static_cast<int>(fx);
      if (x0 > image.width - 2) x0 = image.width > 1 ? image.width - 2 : 0;
      const int x1 = image.width > 1 ? x0 + 1 : x0;
      const double wx = fx - x0;
      for (int c = 0; c < image.channels; ++c) {
        const double top = (1.0 - wx) * image.at(y0, x0, c) + wx * image.at(y0, x1, c);
        const double bot = (1.0 - wx) * image.at(y1, x0, c) + wx * image.at(y1, x1, c);
        out.at(y, x, c) = static_cast<float>((1.0 - wy) * top + wy * bot);
      }
    }
  }
  return out;
}

inline ImageTensor flip_horizontal(const ImageTensor& image) {
  ImageTensor out(image.height, image.width, image.channels);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < image.channels; ++c)
        out.at(y, x, c) = image.at(y, image.width - 1 - x, c);
  return out;
}

// Mirrors columns with probability prob, drawn from the seeded stream
// (one canonical double, flip when it falls below prob).
inline ImageTensor random_hflip(const ImageTensor& image, std::uint64_t seed, double prob) {
  if (prob < 0.0 || prob > 1.0) throw UsageError("random_hflip: prob must be in [0,1]");
  Rng rng(seed);
  if (rng.canonical_double() < prob) return flip_horizontal(image);
  return image;
}

}  // namespace arpatch
