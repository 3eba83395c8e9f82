#pragma once

// Stride-4 heatmap bundle: ground-truth encoding and the WFHM container.
//
// WFHM layout (all little-endian):
//   "WFHM" | u16 version=1 | u16 stride | u32 W | u32 H
//   f32 planes, row-major Hs x Ws each, in order:
//     jmap C, jmap T, offset C.x, offset C.y, offset T.x, offset T.y,
//     emap, jdepth C, jdepth T
//   f32 3x3 VP matrix, rows v1, v2, v3

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "wf3d/core.hpp"
#include "wf3d/errors.hpp"
#include "wf3d/geometry.hpp"
#include "wf3d/io.hpp"

namespace wf3d {

/// Row-major single-channel f32 grid.
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, float fill = 0.0f)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return data_.size(); }

  float& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  float operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

  std::vector<float>& data() { return data_; }
  const std::vector<float>& data() const { return data_; }

  bool same_shape(const Grid& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<float> data_;
};

struct HeatmapBundle {
  static constexpr int kStride = 4;

  ImageSize image_size;
  int stride = kStride;
  std::array<Grid, 2> jmap;      // per junction type
  std::array<Grid, 2> offset_x;  // sub-cell offsets in [0, 1)
  std::array<Grid, 2> offset_y;
  Grid emap;
  std::array<Grid, 2> jdepth;
  VanishingPoints vps;

  int rows() const { return emap.rows(); }
  int cols() const { return emap.cols(); }

  static HeatmapBundle zeros(ImageSize size, int stride = kStride) {
    if (stride <= 0 || size.width <= 0 || size.height <= 0 || size.width % stride != 0 ||
        size.height % stride != 0) {
      fail(ErrorKind::kDimension, "image size " + std::to_string(size.width) + "x" +
                                      std::to_string(size.height) +
                                      " is not divisible by stride " + std::to_string(stride));
    }
    HeatmapBundle b;
    b.image_size = size;
    b.stride = stride;
    const int hs = size.height / stride;
    const int ws = size.width / stride;
    for (int t = 0; t < 2; ++t) {
      b.jmap[t] = Grid(hs, ws);
      b.offset_x[t] = Grid(hs, ws);
      b.offset_y[t] = Grid(hs, ws);
      b.jdepth[t] = Grid(hs, ws);
    }
    b.emap = Grid(hs, ws);
    return b;
  }

  friend bool operator==(const HeatmapBundle& a, const HeatmapBundle& b) {
    if (!(a.image_size == b.image_size) || a.stride != b.stride) return false;
    for (int i = 0; i < 3; ++i) {
      if (a.vps.v[i].cast<float>() != b.vps.v[i].cast<float>()) return false;
    }
    return a.jmap == b.jmap && a.offset_x == b.offset_x && a.offset_y == b.offset_y &&
           a.emap == b.emap && a.jdepth == b.jdepth;
  }
};

/// Rasterizes the edge map: each cell center holds max over lines of
/// 1 - dist (in cell units) when that distance is below one cell.
inline void rasterize_edges(const Wireframe& wf, Grid& emap, int stride) {
  const double inv = 1.0 / stride;
  for (const auto& e : wf.edges) {
    const Vec2 a = wf.vertices[e.a].position * inv;
    const Vec2 b = wf.vertices[e.b].position * inv;
    const int c0 = std::max(0, static_cast<int>(std::floor(std::min(a.x(), b.x()) - 1.0)));
    const int c1 = std::min(emap.cols() - 1, static_cast<int>(std::ceil(std::max(a.x(), b.x()) + 1.0)));
    const int r0 = std::max(0, static_cast<int>(std::floor(std::min(a.y(), b.y()) - 1.0)));
    const int r1 = std::min(emap.rows() - 1, static_cast<int>(std::ceil(std::max(a.y(), b.y()) + 1.0)));
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        const double d = geom::point_segment_distance(Vec2(c + 0.5, r + 0.5), a, b);
        if (d < 1.0) {
          const auto value = static_cast<float>(1.0 - d);
          emap(r, c) = std::max(emap(r, c), value);
        }
      }
    }
  }
}

/// Ground-truth encoding. Two same-type junctions in one cell: the one with
/// the smaller y (then x) wins.
inline HeatmapBundle encode(const Wireframe& wf, const VanishingPoints& vps) {
  auto bundle = HeatmapBundle::zeros(wf.image_size);
  const int stride = bundle.stride;
  for (const auto& v : wf.vertices) {
    if (!v.depth || !(*v.depth > 0.0)) {
      fail(ErrorKind::kNonPositiveDepth, "every vertex needs a positive depth to be encoded");
    }
  }

  std::vector<int> order(wf.vertices.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    const auto& p = wf.vertices[i].position;
    const auto& q = wf.vertices[j].position;
    if (p.y() != q.y()) return p.y() < q.y();
    if (p.x() != q.x()) return p.x() < q.x();
    return i < j;
  });

  for (int idx : order) {
    const auto& v = wf.vertices[idx];
    const int t = type_index(v.type);
    const double sx = v.position.x() / stride;
    const double sy = v.position.y() / stride;
    const int c = static_cast<int>(std::floor(sx));
    const int r = static_cast<int>(std::floor(sy));
    if (r < 0 || c < 0 || r >= bundle.rows() || c >= bundle.cols()) {
      fail(ErrorKind::kInvalidArgument, "vertex outside the image");
    }
    if (bundle.jmap[t](r, c) != 0.0f) continue;
    bundle.jmap[t](r, c) = 1.0f;
    // f32 rounding must not push an offset to 1.0.
    auto off = [](double x) {
      auto f = static_cast<float>(x);
      if (f >= 1.0f) f = std::nextafter(1.0f, 0.0f);
      return f;
    };
    bundle.offset_x[t](r, c) = off(sx - c);
    bundle.offset_y[t](r, c) = off(sy - r);
    bundle.jdepth[t](r, c) = static_cast<float>(*v.depth);
  }
  rasterize_edges(wf, bundle.emap, stride);
  bundle.vps = vps;
  return bundle;
}

// --- WFHM container ------------------------------------------------------------

namespace detail {

inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::vector<const Grid*> planes(const HeatmapBundle& b) {
  return {&b.jmap[0],     &b.jmap[1],     &b.offset_x[0], &b.offset_y[0], &b.offset_x[1],
          &b.offset_y[1], &b.emap,        &b.jdepth[0],   &b.jdepth[1]};
}

}  // namespace detail

inline constexpr std::uint16_t kWfhmVersion = 1;
inline constexpr size_t kWfhmHeaderBytes = 16;
inline constexpr int kWfhmPlanes = 9;

inline std::string serialize_wfhm(const HeatmapBundle& b) {
  std::string out;
  const size_t cells = static_cast<size_t>(b.rows()) * b.cols();
  out.reserve(kWfhmHeaderBytes + 4 * (kWfhmPlanes * cells + 9));
  out.append("WFHM", 4);
  detail::put_u16(out, kWfhmVersion);
  detail::put_u16(out, static_cast<std::uint16_t>(b.stride));
  detail::put_u32(out, static_cast<std::uint32_t>(b.image_size.width));
  detail::put_u32(out, static_cast<std::uint32_t>(b.image_size.height));
  for (const Grid* g : detail::planes(b)) {
    for (float f : g->data()) detail::put_f32(out, f);
  }
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) detail::put_f32(out, static_cast<float>(b.vps.v[i][k]));
  }
  return out;
}

inline HeatmapBundle deserialize_wfhm(std::string_view bytes) {
  if (bytes.size() < kWfhmHeaderBytes) fail(ErrorKind::kTruncatedFile, "header shorter than 16 bytes");
  if (bytes.substr(0, 4) != "WFHM") fail(ErrorKind::kMagicMismatch, "missing WFHM magic");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const auto version = detail::get_u16(p + 4);
  if (version != kWfhmVersion) {
    fail(ErrorKind::kMagicMismatch, "unsupported WFHM version " + std::to_string(version));
  }
  const int stride = detail::get_u16(p + 6);
  const auto w = detail::get_u32(p + 8);
  const auto h = detail::get_u32(p + 12);
  if (stride == 0 || w == 0 || h == 0 || w % stride != 0 || h % stride != 0 ||
      w > (1u << 20) || h > (1u << 20)) {
    fail(ErrorKind::kDimMismatch, "header dims " + std::to_string(w) + "x" + std::to_string(h) +
                                      " inconsistent with stride " + std::to_string(stride));
  }
  const size_t cells = static_cast<size_t>(w / stride) * (h / stride);
  const size_t expected = kWfhmHeaderBytes + 4 * (kWfhmPlanes * cells + 9);
  if (bytes.size() != expected) {
    fail(ErrorKind::kTruncatedFile, "payload is " + std::to_string(bytes.size()) +
                                        " bytes, header implies " + std::to_string(expected));
  }
  auto b = HeatmapBundle::zeros({static_cast<int>(w), static_cast<int>(h)}, stride);
  const unsigned char* cur = p + kWfhmHeaderBytes;
  auto next_f32 = [&cur]() {
    const float f = std::bit_cast<float>(detail::get_u32(cur));
    cur += 4;
    return f;
  };
  std::array<Grid*, kWfhmPlanes> planes = {&b.jmap[0],     &b.jmap[1], &b.offset_x[0],
                                           &b.offset_y[0], &b.offset_x[1], &b.offset_y[1],
                                           &b.emap,        &b.jdepth[0], &b.jdepth[1]};
  for (Grid* g : planes) {
    for (auto& f : g->data()) f = next_f32();
  }
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) b.vps.v[i][k] = next_f32();
  }
  return b;
}

inline HeatmapBundle read_wfhm(const std::filesystem::path& path) {
  return deserialize_wfhm(read_text_file(path));
}

inline void write_wfhm(const std::filesystem::path& path, const HeatmapBundle& b) {
  write_file_atomic(path, serialize_wfhm(b));
}

}  // namespace wf3d
