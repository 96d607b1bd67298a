#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "arpatch/common.hpp"

namespace arpatch {

struct StoreEntry {
  std::string image_id;
  std::string vehicle_id;
  int camera_id = -1;  // -1 = none
  std::vector<double> values;
};

struct FeatureStore {
  int dim = 0;
  std::vector<StoreEntry> entries;

  void add(StoreEntry e) {
    if (dim == 0) dim = static_cast<int>(e.values.size());
    if (static_cast<int>(e.values.size()) != dim)
      throw UsageError("FeatureStore: entry dim " + std::to_string(e.values.size()) +
                       " does not match store dim " + std::to_string(dim));
    entries.push_back(std::move(e));
  }

  void validate() const {
    std::set<std::string> ids;
    for (const auto& e : entries) {
      if (static_cast<int>(e.values.size()) != dim)
        throw UsageError("FeatureStore: inconsistent dimensions");
      if (!ids.insert(e.image_id).second)
        throw UsageError("FeatureStore: duplicate image id " + e.image_id);
    }
  }

  bool has_cameras() const {
    for (const auto& e : entries)
      if (e.camera_id >= 0) return true;
    return false;
  }
};

namespace detail {

inline void store_u16(std::ostream& out, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
  out.write(reinterpret_cast<const char*>(b), 2);
}

inline std::uint16_t load_u16(std::istream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  if (!in) throw UsageError("feature store truncated");
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

inline void store_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t load_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw UsageError("feature store truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

inline void store_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint64_t load_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw UsageError("feature store truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace detail

// Binary layout, little-endian:
//   magic "FSTR", u32 version = 1, u32 dim, u64 count;
//   per entry: u16 id length + UTF-8 bytes, u16 vehicle-id length + UTF-8
//   bytes, i32 camera id (-1 = none), dim x f32 values.
inline void save_store(const std::string& path, const FeatureStore& store) {
  store.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open store for writing: " + path);
  out.write("FSTR", 4);
  detail::store_u32(out, 1);
  detail::store_u32(out, static_cast<std::uint32_t>(store.dim));
  detail::store_u64(out, store.entries.size());
  for (const auto& e : store.entries) {
    if (e.image_id.size() > UINT16_MAX || e.vehicle_id.size() > UINT16_MAX)
      throw UsageError("feature store: id longer than 65535 bytes");
    detail::store_u16(out, static_cast<std::uint16_t>(e.image_id.size()));
    out.write(e.image_id.data(), static_cast<std::streamsize>(e.image_id.size()));
    detail::store_u16(out, static_cast<std::uint16_t>(e.vehicle_id.size()));
    out.write(e.vehicle_id.data(), static_cast<std::streamsize>(e.vehicle_id.size()));
    detail::store_u32(out, static_cast<std::uint32_t>(e.camera_id));
    for (double v : e.values) {
      const float f = static_cast<float>(v);
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      detail::store_u32(out, bits);
    }
  }
  if (!out) throw std::runtime_error("feature store write failed: " + path);
}

inline FeatureStore load_store(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open store: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "FSTR", 4) != 0)
    throw UsageError("not a FSTR feature store: " + path);
  const std::uint32_t version = detail::load_u32(in);
  if (version != 1) throw UsageError("unsupported FSTR version " + std::to_string(version));
  FeatureStore store;
  store.dim = static_cast<int>(detail::load_u32(in));
  const std::uint64_t count = detail::load_u64(in);
  store.entries.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    StoreEntry e;
    const std::uint16_t id_len = detail::load_u16(in);
    e.image_id.resize(id_len);
    in.read(e.image_id.data(), id_len);
    const std::uint16_t vid_len = detail::load_u16(in);
    e.vehicle_id.resize(vid_len);
    in.read(e.vehicle_id.data(), vid_len);
    e.camera_id = static_cast<std::int32_t>(detail::load_u32(in));
    e.values.resize(store.dim);
    for (int c = 0; c < store.dim; ++c) {
      const std::uint32_t bits = detail::load_u32(in);
      float f;
      std::memcpy(&f, &bits, 4);
      e.values[c] = static_cast<double>(f);
    }
    if (!in) throw UsageError("feature store truncated: " + path);
    store.entries.push_back(std::move(e));
  }
  store.validate();
  return store;
}

// Sidecar metadata (<store path>.meta.json). The FSTR layout itself has no
// field for the producing model's aspect ratio, so the encode command tags
// stores through this file and fuse reads it back.
struct StoreMeta {
  std::optional<double> model_ar;
  std::string kind;  // "encoder" or "fused"
};

inline void save_store_meta(const std::string& store_path, const StoreMeta& meta) {
  nlohmann::json j;
  j["kind"] = meta.kind;
  if (meta.model_ar) j["model_ar"] = *meta.model_ar;
  std::ofstream out(store_path + ".meta.json");
  if (!out) throw UsageError("cannot write store metadata for " + store_path);
  out << j.dump(2) << "\n";
}

inline std::optional<StoreMeta> load_store_meta(const std::string& store_path) {
  std::ifstream in(store_path + ".meta.json");
  if (!in) return std::nullopt;
  nlohmann::json j;
  in >> j;
  StoreMeta meta;
  meta.kind = j.value("kind", "");
  if (j.contains("model_ar")) meta.model_ar = j.at("model_ar").get<double>();
  return meta;
}

}  // namespace arpatch
