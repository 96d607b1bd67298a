#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "arpatch/image_io.hpp"
#include "arpatch/rng.hpp"

namespace arpatch {

// Self-contained test corpus: procedurally drawn "vehicles" (one saturated
// rectangle color per vehicle id) over a noisy gray background, spread over
// three aspect-ratio groups and two cameras, with a manifest. No external
// datasets needed.
struct SyntheticSpec {
  int num_vehicles = 10;
  int images_per_vehicle = 6;  // cycles through ar groups x cameras
  std::vector<double> aspect_groups = {0.95, 1.0, 1.33};
  int num_cameras = 2;
  int base_height = 224;
  std::uint64_t seed = 7;
};

inline std::array<float, 3> vehicle_color(int vehicle_index) {
  // Distinct, saturated hues; full-value HSV wheel stepped per vehicle.
  const double hue = std::fmod(vehicle_index * 0.61803398875, 1.0) * 6.0;
  const int sector = static_cast<int>(hue);
  const double frac = hue - sector;
  const float q = static_cast<float>(1.0 - frac);
  const float t = static_cast<float>(frac);
  switch (sector % 6) {
    case 0: return {1.0f, t, 0.0f};
    case 1: return {q, 1.0f, 0.0f};
    case 2: return {0.0f, 1.0f, t};
    case 3: return {0.0f, q, 1.0f};
    case 4: return {t, 0.0f, 1.0f};
    default: return {1.0f, 0.0f, q};
  }
}

inline ImageTensor draw_vehicle_image(int vehicle_index, int height, int width,
                                      std::uint64_t seed) {
  Rng rng(seed);
  ImageTensor img(height, width, 3);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const float shade = 0.78f + static_cast<float>(rng.canonical_double()) * 0.1f;
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = shade;
    }
  }
  const auto color = vehicle_color(vehicle_index);
  // Rectangle body with jittered placement and size.
  const int bw = width / 3 + static_cast<int>(rng.bounded_uint(width / 6 + 1));
  const int bh = height / 3 + static_cast<int>(rng.bounded_uint(height / 6 + 1));
  const int x0 = static_cast<int>(rng.bounded_uint(width - bw));
  const int y0 = static_cast<int>(rng.bounded_uint(height - bh));
  for (int y = y0; y < y0 + bh; ++y)
    for (int x = x0; x < x0 + bw; ++x)
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = color[c];
  // Dark "wheels" anchor the bottom edge of the body.
  const int wheel = std::max(2, bh / 6);
  for (int y = y0 + bh - wheel; y < y0 + bh; ++y) {
    for (int x = x0; x < x0 + wheel * 2 && x < width; ++x)
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = 0.05f;
    for (int x = std::max(0, x0 + bw - wheel * 2); x < x0 + bw; ++x)
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = 0.05f;
  }
  return img;
}

// Writes PNGs plus manifest.csv under root; returns the manifest path.
inline std::string generate_synthetic_corpus(const std::string& root,
                                             const SyntheticSpec& spec = {}) {
  namespace fs = std::filesystem;
  fs::create_directories(root);
  std::ofstream manifest(fs::path(root) / "manifest.csv");
  if (!manifest) throw UsageError("cannot write manifest under " + root);

  Rng rng(spec.seed);
  for (int v = 0; v < spec.num_vehicles; ++v) {
    for (int i = 0; i < spec.images_per_vehicle; ++i) {
      const double group_ar = spec.aspect_groups[i % spec.aspect_groups.size()];
      const int camera = i % spec.num_cameras;
      // Jitter the size while keeping the ratio near its group.
      const int h = spec.base_height - 24 + static_cast<int>(rng.bounded_uint(49));
      const double ar = group_ar + (rng.canonical_double() - 0.5) * 0.02;
      const int w = std::max(32, static_cast<int>(std::lround(h * ar)));
      char name[64];
      std::snprintf(name, sizeof(name), "v%02d_c%d_%02d.png", v, camera, i);
      const ImageTensor img = draw_vehicle_image(v, h, w, rng.next());
      write_png((fs::path(root) / name).string(), img);
      char vid[16], cid[16];
      std::snprintf(vid, sizeof(vid), "v%02d", v);
      std::snprintf(cid, sizeof(cid), "c%d", camera);
      manifest << name << "," << vid << "," << cid << "\n";
    }
  }
  manifest.close();
  return (fs::path(root) / "manifest.csv").string();
}

}  // namespace arpatch
