#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "arpatch/patchify.hpp"
#include "arpatch/resize.hpp"
#include "arpatch/rng.hpp"

namespace arpatch {

struct EncoderConfig {
  int depth = 12;
  int dim = 768;
  int heads = 12;
  double mlp_ratio = 4.0;
  int patch_dim = 16 * 16 * 3;  // p * p * C
  int base_rows = 14;           // positional-table grid
  int base_cols = 14;
  std::string preset = "vit-b-16";

  static EncoderConfig vit_b_16(int base_rows = 14, int base_cols = 14,
                                int patch_dim = 16 * 16 * 3) {
    EncoderConfig c;
    c.depth = 12;
    c.dim = 768;
    c.heads = 12;
    c.mlp_ratio = 4.0;
    c.patch_dim = patch_dim;
    c.base_rows = base_rows;
    c.base_cols = base_cols;
    c.preset = "vit-b-16";
    return c;
  }

  static EncoderConfig toy(int base_rows, int base_cols, int patch_dim) {
    EncoderConfig c;
    c.depth = 2;
    c.dim = 64;
    c.heads = 4;
    c.mlp_ratio = 4.0;
    c.patch_dim = patch_dim;
    c.base_rows = base_rows;
    c.base_cols = base_cols;
    c.preset = "toy";
    return c;
  }

  static EncoderConfig from_preset(const std::string& name, int base_rows, int base_cols,
                                   int patch_dim) {
    if (name == "vit-b-16") return vit_b_16(base_rows, base_cols, patch_dim);
    if (name == "toy") return toy(base_rows, base_cols, patch_dim);
    throw UsageError("unknown encoder preset: " + name + " (expected vit-b-16 or toy)");
  }

  int head_dim() const { return dim / heads; }
  int mlp_hidden() const { return static_cast<int>(std::lround(dim * mlp_ratio)); }

  void validate() const {
    if (depth < 0) throw UsageError("EncoderConfig: depth must be >= 0");
    if (dim < 1 || heads < 1 || dim % heads != 0)
      throw UsageError("EncoderConfig: dim must be a positive multiple of heads");
    if (patch_dim < 1 || base_rows < 1 || base_cols < 1 || mlp_ratio <= 0.0)
      throw UsageError("EncoderConfig: invalid dimensions");
  }
};

// Row-major matrix of doubles. Values are kept on the f32 grid (init and
// file I/O both quantize), so save/load round-trips are lossless.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}
  double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
};

struct LayerWeights {
  std::vector<double> ln1_gamma, ln1_beta;
  Mat wq, wk, wv, wo;                  // dim x dim
  std::vector<double> bq, bk, bv, bo;  // dim
  std::vector<double> ln2_gamma, ln2_beta;
  Mat mlp_w1;                          // dim x hidden
  std::vector<double> mlp_b1;
  Mat mlp_w2;                          // hidden x dim
  std::vector<double> mlp_b2;
};

struct ViTWeights {
  EncoderConfig config;
  Mat patch_proj;                   // patch_dim x dim
  std::vector<double> patch_bias;   // dim
  std::vector<double> cls_token;    // dim
  Mat pos_table;                    // (base_rows * base_cols + 1) x dim
  std::vector<LayerWeights> layers;
  std::vector<double> final_ln_gamma, final_ln_beta;
  std::uint64_t seed = 0;
};

struct FeatureVector {
  std::vector<double> values;
  double source_model_ar = 1.0;  // aspect ratio the producing model is bound to
  std::string image_id;
};

namespace detail {

inline void fill_gaussian(Mat& m, Rng& rng, double scale) {
  for (double& x : m.v) x = static_cast<double>(static_cast<float>(rng.gaussian() * scale));
}

inline void fill_gaussian(std::vector<double>& v, Rng& rng, double scale) {
  for (double& x : v) x = static_cast<double>(static_cast<float>(rng.gaussian() * scale));
}

}  // namespace detail

// Seeded initialization: weight matrices are N(0, 1/sqrt(fan_in)), biases
// zero, layer norms identity, class token and positional table N(0,
// 1/sqrt(dim)). Draw order: patch projection, class token, positional
// table, then per layer q, k, v, o, mlp_w1, mlp_w2.
inline ViTWeights init_weights(const EncoderConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  const int dim = config.dim;
  const int hidden = config.mlp_hidden();
  const double inv_sqrt_dim = 1.0 / std::sqrt(static_cast<double>(dim));

  ViTWeights w;
  w.config = config;
  w.seed = seed;
  w.patch_proj = Mat(config.patch_dim, dim);
  detail::fill_gaussian(w.patch_proj, rng, 1.0 / std::sqrt(static_cast<double>(config.patch_dim)));
  w.patch_bias.assign(dim, 0.0);
  w.cls_token.resize(dim);
  detail::fill_gaussian(w.cls_token, rng, inv_sqrt_dim);
  w.pos_table = Mat(config.base_rows * config.base_cols + 1, dim);
  detail::fill_gaussian(w.pos_table, rng, inv_sqrt_dim);

  w.layers.resize(config.depth);
  for (auto& layer : w.layers) {
    layer.ln1_gamma.assign(dim, 1.0);
    layer.ln1_beta.assign(dim, 0.0);
    layer.wq = Mat(dim, dim);
    layer.wk = Mat(dim, dim);
    layer.wv = Mat(dim, dim);
    layer.wo = Mat(dim, dim);
    detail::fill_gaussian(layer.wq, rng, inv_sqrt_dim);
    detail::fill_gaussian(layer.wk, rng, inv_sqrt_dim);
    detail::fill_gaussian(layer.wv, rng, inv_sqrt_dim);
    detail::fill_gaussian(layer.wo, rng, inv_sqrt_dim);
    layer.bq.assign(dim, 0.0);
    layer.bk.assign(dim, 0.0);
    layer.bv.assign(dim, 0.0);
    layer.bo.assign(dim, 0.0);
    layer.ln2_gamma.assign(dim, 1.0);
    layer.ln2_beta.assign(dim, 0.0);
    layer.mlp_w1 = Mat(dim, hidden);
    detail::fill_gaussian(layer.mlp_w1, rng, inv_sqrt_dim);
    layer.mlp_b1.assign(hidden, 0.0);
    layer.mlp_w2 = Mat(hidden, dim);
    detail::fill_gaussian(layer.mlp_w2, rng, 1.0 / std::sqrt(static_cast<double>(hidden)));
    layer.mlp_b2.assign(dim, 0.0);
  }
  w.final_ln_gamma.assign(dim, 1.0);
  w.final_ln_beta.assign(dim, 0.0);
  return w;
}

// Token sequence: row 0 is the class token, rows 1..n are flattened patches
// through the shared linear projection.
inline Mat embed_patches(const PatchSet& patches, const ViTWeights& weights) {
  const EncoderConfig& cfg = weights.config;
  const int n = patches.grid.n;
  if (n > 0 && static_cast<int>(patches.data[0].size()) != cfg.patch_dim)
    throw UsageError("embed_patches: patch dim " + std::to_string(patches.data[0].size()) +
                     " does not match config patch_dim " + std::to_string(cfg.patch_dim));
  Mat tokens(n + 1, cfg.dim);
  for (int c = 0; c < cfg.dim; ++c) tokens.at(0, c) = weights.cls_token[c];
  for (int i = 0; i < n; ++i) {
    const std::vector<float>& block = patches.data[i];
    for (int c = 0; c < cfg.dim; ++c) {
      double acc = weights.patch_bias[c];
      for (int k = 0; k < cfg.patch_dim; ++k)
        acc += static_cast<double>(block[k]) * weights.patch_proj.at(k, c);
      tokens.at(i + 1, c) = acc;
    }
  }
  return tokens;
}

// Resamples the base positional grid to the target grid, bilinear per
// channel with corner alignment; the class-token row passes through.
// Identical grids return the table unchanged.
inline Mat interpolate_pos_embeddings(const ViTWeights& weights, const PatchGrid& target) {
  const EncoderConfig& cfg = weights.config;
  if (target.rows < 1 || target.cols < 1)
    throw UsageError("interpolate_pos_embeddings: target grid must be >= 1x1");
  if (target.rows == cfg.base_rows && target.cols == cfg.base_cols) return weights.pos_table;

  Mat out(target.rows * target.cols + 1, cfg.dim);
  for (int c = 0; c < cfg.dim; ++c) out.at(0, c) = weights.pos_table.at(0, c);

  const double sy = target.rows > 1
                        ? static_cast<double>(cfg.base_rows - 1) / (target.rows - 1)
                        : 0.0;
  const double sx = target.cols > 1
                        ? static_cast<double>(cfg.base_cols - 1) / (target.cols - 1)
                        : 0.0;
  for (int r = 0; r < target.rows; ++r) {
    const double fy = r * sy;
    int y0 = static_cast<int>(fy);
    if (y0 > cfg.base_rows - 2) y0 = cfg.base_rows > 1 ? cfg.base_rows - 2 : 0;
    const int y1 = cfg.base_rows > 1 ? y0 + 1 : y0;
    const double wy = fy - y0;
    for (int col = 0; col < target.cols; ++col) {
      const double fx = col * sx;
      int x0 = static_cast<int>(fx);
      if (x0 > cfg.base_cols - 2) x0 = cfg.base_cols > 1 ? cfg.base_cols - 2 : 0;
      const int x1 = cfg.base_cols > 1 ? x0 + 1 : x0;
      const double wx = fx - x0;
      const int out_row = 1 + r * target.cols + col;
      for (int c = 0; c < cfg.dim; ++c) {
        const double tl = weights.pos_table.at(1 + y0 * cfg.base_cols + x0, c);
        const double tr = weights.pos_table.at(1 + y0 * cfg.base_cols + x1, c);
        const double bl = weights.pos_table.at(1 + y1 * cfg.base_cols + x0, c);
        const double br = weights.pos_table.at(1 + y1 * cfg.base_cols + x1, c);
        const double top = (1.0 - wx) * tl + wx * tr;
        const double bot = (1.0 - wx) * bl + wx * br;
        out.at(out_row, c) = (1.0 - wy) * top + wy * bot;
      }
    }
  }
  return out;
}

// Optional capture of attention matrices for inspection; only sensible at
// toy sizes.
struct ForwardTrace {
  // attention[layer][head] is a T x T row-stochastic matrix.
  std::vector<std::vector<Mat>> attention;
};

namespace detail {

inline void layer_norm_row(const double* x, double* y, int dim,
                           const std::vector<double>& gamma,
                           const std::vector<double>& beta) {
  constexpr double eps = 1e-6;
  double mean = 0.0;
  for (int c = 0; c < dim; ++c) mean += x[c];
  mean /= dim;
  double var = 0.0;
  for (int c = 0; c < dim; ++c) {
    const double d = x[c] - mean;
    var += d * d;
  }
  var /= dim;
  const double inv = 1.0 / std::sqrt(var + eps);
  for (int c = 0; c < dim; ++c) y[c] = (x[c] - mean) * inv * gamma[c] + beta[c];
}

inline Mat layer_norm(const Mat& x, const std::vector<double>& gamma,
                      const std::vector<double>& beta) {
  Mat y(x.rows, x.cols);
  for (int t = 0; t < x.rows; ++t)
    layer_norm_row(&x.v[static_cast<std::size_t>(t) * x.cols],
                   &y.v[static_cast<std::size_t>(t) * x.cols], x.cols, gamma, beta);
  return y;
}

// y = x * w + b, serial loops in a fixed order.
inline Mat linear(const Mat& x, const Mat& w, const std::vector<double>& b) {
  Mat y(x.rows, w.cols);
  for (int t = 0; t < x.rows; ++t) {
    for (int c = 0; c < w.cols; ++c) {
      double acc = b.empty() ? 0.0 : b[c];
      for (int k = 0; k < x.cols; ++k) acc += x.at(t, k) * w.at(k, c);
      y.at(t, c) = acc;
    }
  }
  return y;
}

inline double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

inline bool all_finite(const Mat& m) {
  for (double x : m.v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline Mat mhsa(const Mat& x_norm, const LayerWeights& lw, int heads,
                std::vector<Mat>* attn_out) {
  const int T = x_norm.rows;
  const int dim = x_norm.cols;
  const int dh = dim / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Mat q = linear(x_norm, lw.wq, lw.bq);
  Mat k = linear(x_norm, lw.wk, lw.bk);
  Mat v = linear(x_norm, lw.wv, lw.bv);

  Mat ctx(T, dim);
  std::vector<double> row(T);
  for (int h = 0; h < heads; ++h) {
    const int off = h * dh;
    Mat* attn = nullptr;
    if (attn_out) {
      attn_out->emplace_back(T, T);
      attn = &attn_out->back();
    }
    for (int t = 0; t < T; ++t) {
      double max_s = -std::numeric_limits<double>::infinity();
      for (int u = 0; u < T; ++u) {
        double s = 0.0;
        for (int c = 0; c < dh; ++c) s += q.at(t, off + c) * k.at(u, off + c);
        row[u] = s * scale;
        if (row[u] > max_s) max_s = row[u];
      }
      double denom = 0.0;
      for (int u = 0; u < T; ++u) {
        row[u] = std::exp(row[u] - max_s);
        denom += row[u];
      }
      for (int u = 0; u < T; ++u) row[u] /= denom;
      if (attn)
        for (int u = 0; u < T; ++u) attn->at(t, u) = row[u];
      for (int c = 0; c < dh; ++c) {
        double acc = 0.0;
        for (int u = 0; u < T; ++u) acc += row[u] * v.at(u, off + c);
        ctx.at(t, off + c) = acc;
      }
    }
  }
  return linear(ctx, lw.wo, lw.bo);
}

}  // namespace detail

// Pre-norm transformer stack: x += MHSA(LN(x)); x += MLP(LN(x)); final
// layer norm; the class-token row is the feature. Single-threaded with a
// fixed reduction order, so results are bit-identical across runs and
// thread counts.
inline FeatureVector encoder_forward(const Mat& tokens, const Mat& positions,
                                     const ViTWeights& weights,
                                     ForwardTrace* trace = nullptr) {
  const EncoderConfig& cfg = weights.config;
  if (tokens.cols != cfg.dim || positions.cols != cfg.dim || tokens.rows != positions.rows)
    throw UsageError("encoder_forward: token/position shapes mismatch");

  Mat x(tokens.rows, tokens.cols);
  for (std::size_t i = 0; i < x.v.size(); ++i) x.v[i] = tokens.v[i] + positions.v[i];

  for (int layer = 0; layer < cfg.depth; ++layer) {
    const LayerWeights& lw = weights.layers[layer];
    std::vector<Mat>* attn = nullptr;
    if (trace) {
      trace->attention.emplace_back();
      attn = &trace->attention.back();
    }
    Mat attn_out = detail::mhsa(detail::layer_norm(x, lw.ln1_gamma, lw.ln1_beta), lw, cfg.heads, attn);
    for (std::size_t i = 0; i < x.v.size(); ++i) x.v[i] += attn_out.v[i];

    Mat h = detail::linear(detail::layer_norm(x, lw.ln2_gamma, lw.ln2_beta), lw.mlp_w1, lw.mlp_b1);
    for (double& val : h.v) val = detail::gelu(val);
    Mat mlp_out = detail::linear(h, lw.mlp_w2, lw.mlp_b2);
    for (std::size_t i = 0; i < x.v.size(); ++i) x.v[i] += mlp_out.v[i];

    if (!detail::all_finite(x))
      throw std::runtime_error("encoder_forward: non-finite activation after layer " +
                               std::to_string(layer));
  }

  Mat normed = detail::layer_norm(x, weights.final_ln_gamma, weights.final_ln_beta);
  FeatureVector f;
  f.values.assign(normed.v.begin(), normed.v.begin() + cfg.dim);
  return f;
}

// An encoder bound to one aspect ratio: resize target and strides are fixed
// at creation.
struct BoundModel {
  EncoderConfig config;
  ViTWeights weights;
  StrideSpec stride;
  int target_height = 0;
  int target_width = 0;
  double model_ar = 1.0;
};

inline BoundModel bind_model(const EncoderConfig& config, std::uint64_t seed,
                             const StrideSpec& stride, int target_height, int target_width,
                             double model_ar) {
  BoundModel m;
  m.config = config;
  m.weights = init_weights(config, seed);
  m.stride = stride;
  m.target_height = target_height;
  m.target_width = target_width;
  m.model_ar = model_ar;
  return m;
}

// resize -> patchify -> embed -> positions -> forward. Mixup is a training
// augmentation and does not run here.
inline FeatureVector encode_image(const ImageTensor& image, const BoundModel& model,
                                  const std::string& image_id = "") {
  ImageTensor resized = resize_image(image, model.target_height, model.target_width);
  PatchGrid grid = plan_grid(resized.height, resized.width, model.stride);
  PatchSet patches = extract_patches(resized, grid);
  Mat tokens = embed_patches(patches, model.weights);
  Mat positions = interpolate_pos_embeddings(model.weights, grid);
  FeatureVector f = encoder_forward(tokens, positions, model.weights);
  f.source_model_ar = model.model_ar;
  f.image_id = image_id;
  return f;
}

// ---------------------------------------------------------------------------
// Weight file format (little-endian):
//   magic "VITW", u32 version = 1,
//   u32 depth, u32 dim, u32 heads, f64 mlp_ratio, u32 patch_dim,
//   u32 base_rows, u32 base_cols,
//   then tensors in fixed order, each as u32 rank, u32 dims[rank], f32 data:
//     patch_proj, patch_bias, cls_token, pos_table,
//     per layer: ln1_gamma, ln1_beta, wq, bq, wk, bk, wv, bv, wo, bo,
//                ln2_gamma, ln2_beta, mlp_w1, mlp_b1, mlp_w2, mlp_b2,
//     final_ln_gamma, final_ln_beta.
// ---------------------------------------------------------------------------

namespace detail {

inline void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw UsageError("weight file truncated");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void write_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

inline double read_f64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw UsageError("weight file truncated");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

inline void write_f32(std::ostream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32(out, bits);
}

inline float read_f32(std::istream& in) {
  std::uint32_t bits = read_u32(in);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

inline void write_tensor(std::ostream& out, const std::vector<std::uint32_t>& dims,
                         const std::vector<double>& data) {
  write_u32(out, static_cast<std::uint32_t>(dims.size()));
  std::size_t expect = 1;
  for (auto d : dims) {
    write_u32(out, d);
    expect *= d;
  }
  if (expect != data.size()) throw std::runtime_error("write_tensor: shape/data mismatch");
  for (double x : data) write_f32(out, static_cast<float>(x));
}

inline std::vector<double> read_tensor(std::istream& in, const std::vector<std::uint32_t>& expect,
                                       const char* name) {
  const std::uint32_t rank = read_u32(in);
  if (rank != expect.size())
    throw UsageError(std::string("weight file: tensor ") + name + " has rank " +
                     std::to_string(rank) + ", expected " + std::to_string(expect.size()));
  std::size_t count = 1;
  for (std::size_t i = 0; i < expect.size(); ++i) {
    const std::uint32_t d = read_u32(in);
    if (d != expect[i])
      throw UsageError(std::string("weight file: tensor ") + name + " dim " + std::to_string(i) +
                       " is " + std::to_string(d) + ", expected " + std::to_string(expect[i]));
    count *= d;
  }
  std::vector<double> out(count);
  for (auto& x : out) x = static_cast<double>(read_f32(in));
  return out;
}

}  // namespace detail

inline void save_weights(const std::string& path, const ViTWeights& w) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open weight file for writing: " + path);
  out.write("VITW", 4);
  detail::write_u32(out, 1);
  const EncoderConfig& c = w.config;
  detail::write_u32(out, static_cast<std::uint32_t>(c.depth));
  detail::write_u32(out, static_cast<std::uint32_t>(c.dim));
  detail::write_u32(out, static_cast<std::uint32_t>(c.heads));
  detail::write_f64(out, c.mlp_ratio);
  detail::write_u32(out, static_cast<std::uint32_t>(c.patch_dim));
  detail::write_u32(out, static_cast<std::uint32_t>(c.base_rows));
  detail::write_u32(out, static_cast<std::uint32_t>(c.base_cols));

  auto dim_u = static_cast<std::uint32_t>(c.dim);
  detail::write_tensor(out, {static_cast<std::uint32_t>(c.patch_dim), dim_u}, w.patch_proj.v);
  detail::write_tensor(out, {dim_u}, w.patch_bias);
  detail::write_tensor(out, {dim_u}, w.cls_token);
  detail::write_tensor(out, {static_cast<std::uint32_t>(w.pos_table.rows), dim_u}, w.pos_table.v);
  const auto hidden_u = static_cast<std::uint32_t>(c.mlp_hidden());
  for (const auto& l : w.layers) {
    detail::write_tensor(out, {dim_u}, l.ln1_gamma);
    detail::write_tensor(out, {dim_u}, l.ln1_beta);
    detail::write_tensor(out, {dim_u, dim_u}, l.wq.v);
    detail::write_tensor(out, {dim_u}, l.bq);
    detail::write_tensor(out, {dim_u, dim_u}, l.wk.v);
    detail::write_tensor(out, {dim_u}, l.bk);
    detail::write_tensor(out, {dim_u, dim_u}, l.wv.v);
    detail::write_tensor(out, {dim_u}, l.bv);
    detail::write_tensor(out, {dim_u, dim_u}, l.wo.v);
    detail::write_tensor(out, {dim_u}, l.bo);
    detail::write_tensor(out, {dim_u}, l.ln2_gamma);
    detail::write_tensor(out, {dim_u}, l.ln2_beta);
    detail::write_tensor(out, {dim_u, hidden_u}, l.mlp_w1.v);
    detail::write_tensor(out, {hidden_u}, l.mlp_b1);
    detail::write_tensor(out, {hidden_u, dim_u}, l.mlp_w2.v);
    detail::write_tensor(out, {dim_u}, l.mlp_b2);
  }
  detail::write_tensor(out, {dim_u}, w.final_ln_gamma);
  detail::write_tensor(out, {dim_u}, w.final_ln_beta);
  if (!out) throw std::runtime_error("weight file write failed: " + path);
}

inline ViTWeights load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open weight file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "VITW", 4) != 0)
    throw UsageError("not a VITW weight file: " + path);
  const std::uint32_t version = detail::read_u32(in);
  if (version != 1) throw UsageError("unsupported VITW version " + std::to_string(version));

  EncoderConfig c;
  c.depth = static_cast<int>(detail::read_u32(in));
  c.dim = static_cast<int>(detail::read_u32(in));
  c.heads = static_cast<int>(detail::read_u32(in));
  c.mlp_ratio = detail::read_f64(in);
  c.patch_dim = static_cast<int>(detail::read_u32(in));
  c.base_rows = static_cast<int>(detail::read_u32(in));
  c.base_cols = static_cast<int>(detail::read_u32(in));
  c.preset = "custom";
  c.validate();

  ViTWeights w;
  w.config = c;
  w.seed = 0;
  const auto dim_u = static_cast<std::uint32_t>(c.dim);
  const auto hidden_u = static_cast<std::uint32_t>(c.mlp_hidden());
  const auto pos_rows = static_cast<std::uint32_t>(c.base_rows * c.base_cols + 1);

  w.patch_proj = Mat(c.patch_dim, c.dim);
  w.patch_proj.v = detail::read_tensor(in, {static_cast<std::uint32_t>(c.patch_dim), dim_u}, "patch_proj");
  w.patch_bias = detail::read_tensor(in, {dim_u}, "patch_bias");
  w.cls_token = detail::read_tensor(in, {dim_u}, "cls_token");
  w.pos_table = Mat(static_cast<int>(pos_rows), c.dim);
  w.pos_table.v = detail::read_tensor(in, {pos_rows, dim_u}, "pos_table");

  w.layers.resize(c.depth);
  for (auto& l : w.layers) {
    l.ln1_gamma = detail::read_tensor(in, {dim_u}, "ln1_gamma");
    l.ln1_beta = detail::read_tensor(in, {dim_u}, "ln1_beta");
    l.wq = Mat(c.dim, c.dim);
    l.wq.v = detail::read_tensor(in, {dim_u, dim_u}, "wq");
    l.bq = detail::read_tensor(in, {dim_u}, "bq");
    l.wk = Mat(c.dim, c.dim);
    l.wk.v = detail::read_tensor(in, {dim_u, dim_u}, "wk");
    l.bk = detail::read_tensor(in, {dim_u}, "bk");
    l.wv = Mat(c.dim, c.dim);
    l.wv.v = detail::read_tensor(in, {dim_u, dim_u}, "wv");
    l.bv = detail::read_tensor(in, {dim_u}, "bv");
    l.wo = Mat(c.dim, c.dim);
    l.wo.v = detail::read_tensor(in, {dim_u, dim_u}, "wo");
    l.bo = detail::read_tensor(in, {dim_u}, "bo");
    l.ln2_gamma = detail::read_tensor(in, {dim_u}, "ln2_gamma");
    l.ln2_beta = detail::read_tensor(in, {dim_u}, "ln2_beta");
    l.mlp_w1 = Mat(c.dim, c.mlp_hidden());
    l.mlp_w1.v = detail::read_tensor(in, {dim_u, hidden_u}, "mlp_w1");
    l.mlp_b1 = detail::read_tensor(in, {hidden_u}, "mlp_b1");
    l.mlp_w2 = Mat(c.mlp_hidden(), c.dim);
    l.mlp_w2.v = detail::read_tensor(in, {hidden_u, dim_u}, "mlp_w2");
    l.mlp_b2 = detail::read_tensor(in, {dim_u}, "mlp_b2");
  }
  w.final_ln_gamma = detail::read_tensor(in, {dim_u}, "final_ln_gamma");
  w.final_ln_beta = detail::read_tensor(in, {dim_u}, "final_ln_beta");
  return w;
}

}  // namespace arpatch
