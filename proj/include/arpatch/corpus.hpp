#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "arpatch/image_io.hpp"

namespace arpatch {

struct ImageRecord {
  std::string id;          // relative path, unique within the corpus
  int width = 0;
  int height = 0;
  std::string vehicle_id;
  std::optional<std::string> camera_id;
  std::string path;        // absolute or root-relative locator
};

struct ScanResult {
  std::vector<ImageRecord> records;
  std::vector<std::string> warnings;  // one entry per skipped file
};

namespace detail {

inline bool has_image_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

struct ManifestLine {
  std::string path;
  std::string vehicle_id;
  std::optional<std::string> camera_id;
};

// One record per line: path,vehicle_id[,camera_id]. Blank lines and lines
// starting with '#' are skipped.
inline std::vector<ManifestLine> parse_manifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw UsageError("cannot open manifest: " + manifest_path);
  std::vector<ManifestLine> lines;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() < 2 || fields.size() > 3)
      throw UsageError("manifest line " + std::to_string(lineno) +
                       ": expected path,vehicle_id[,camera_id]");
    ManifestLine m;
    m.path = fields[0];
    m.vehicle_id = fields[1];
    if (fields.size() == 3 && !fields[2].empty()) m.camera_id = fields[2];
    lines.push_back(std::move(m));
  }
  return lines;
}

}  // namespace detail

// Scans an image directory (or a manifest of files under it) and returns one
// record per decodable image, sorted lexicographically by relative path.
// Undecodable files become warnings and are excluded. An empty corpus is an
// error.
//
// Without a manifest the vehicle_id defaults to the file stem and no camera
// is assigned.
inline ScanResult scan_corpus(const std::string& root,
                              const std::optional<std::string>& manifest = std::nullopt) {
  namespace fs = std::filesystem;
  if (!fs::exists(root) || !fs::is_directory(root))
    throw UsageError("corpus directory does not exist: " + root);

  struct Pending {
    std::string rel;
    std::string vehicle_id;
    std::optional<std::string> camera_id;
  };
  std::vector<Pending> pending;

  if (manifest) {
    for (const auto& m : detail::parse_manifest(*manifest))
      pending.push_back({m.path, m.vehicle_id, m.camera_id});
  } else {
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
      if (!entry.is_regular_file() || !detail::has_image_extension(entry.path())) continue;
      std::string rel = fs::relative(entry.path(), root).generic_string();
      pending.push_back({rel, entry.path().stem().string(), std::nullopt});
    }
  }
  std::sort(pending.begin(), pending.end(),
            [](const Pending& a, const Pending& b) { return a.rel < b.rel; });

  ScanResult out;
  for (const auto& p : pending) {
    fs::path full = fs::path(root) / p.rel;
    try {
      auto [w, h] = read_image_dims(full.string());
      if (w < 1 || h < 1) throw UsageError("degenerate dimensions");
      ImageRecord rec;
      rec.id = p.rel;
      rec.width = w;
      rec.height = h;
      rec.vehicle_id = p.vehicle_id;
      rec.camera_id = p.camera_id;
      rec.path = full.string();
      out.records.push_back(std::move(rec));
    } catch (const std::exception& e) {
      out.warnings.push_back(p.rel + ": " + e.what());
    }
  }
  if (out.records.empty()) throw UsageError("empty corpus: no decodable images under " + root);
  return out;
}

}  // namespace arpatch
