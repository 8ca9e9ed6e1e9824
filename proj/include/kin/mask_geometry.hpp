// Copyright 2026 The Kinetrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Bounding-box and binary-mask algebra.
//
// Masks are run-length encoded over a row-major scan. The first run counts
// background pixels (and may be zero), after which runs alternate
// foreground/background. Every run but the leading one is strictly positive
// and the runs sum to height * width.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace kin {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

double distance(const Point& a, const Point& b);

/// Axis-aligned box in image space (origin top-left), x1 <= x2, y1 <= y2.
struct BBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  /// Throws InputError unless x1 <= x2 and y1 <= y2 (and all finite).
  static BBox make(double x1, double y1, double x2, double y2);

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  bool valid() const;

  friend bool operator==(const BBox&, const BBox&) = default;
};

Point bbox_center(const BBox& b);

/// Overlap area over union area. Two zero-area boxes give 0.
double bbox_iou(const BBox& a, const BBox& b);

/// Uncompressed binary mask, row-major, one byte per cell (0 or 1).
class DenseMask {
 public:
  DenseMask(int height, int width);

  int height() const { return height_; }
  int width() const { return width_; }
  bool at(int row, int col) const { return cells_[index(row, col)] != 0; }
  void set(int row, int col, bool value = true) { cells_[index(row, col)] = value ? 1 : 0; }
  std::span<const std::uint8_t> cells() const { return cells_; }
  std::uint64_t count() const;

  friend bool operator==(const DenseMask&, const DenseMask&) = default;

 private:
  std::size_t index(int row, int col) const;

  int height_;
  int width_;
  std::vector<std::uint8_t> cells_;
};

class RleMask {
 public:
  using Run = std::uint32_t;

  /// Validates the run list; throws MalformedMaskError on any violation.
  static RleMask from_runs(int height, int width, std::vector<Run> runs);
  static RleMask encode(const DenseMask& dense);
  static RleMask empty(int height, int width);
  /// Solid rectangle of `rect_width` x `rect_height` cells with its top-left
  /// cell at (left, top). The rectangle must lie inside the mask.
  static RleMask rectangle(int height, int width, int left, int top, int rect_width,
                           int rect_height);

  DenseMask decode() const;

  int height() const { return height_; }
  int width() const { return width_; }
  std::span<const Run> runs() const { return runs_; }
  /// Foreground pixel count.
  std::uint64_t area() const { return area_; }
  bool same_shape(const RleMask& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const RleMask& a, const RleMask& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ && a.runs_ == b.runs_;
  }

 private:
  RleMask(int height, int width, std::vector<Run> runs, std::uint64_t area)
      : height_(height), width_(width), runs_(std::move(runs)), area_(area) {}

  int height_;
  int width_;
  std::vector<Run> runs_;
  std::uint64_t area_;
};

/// Area plus centroid; the centroid is absent exactly when the mask is empty.
/// Pixel (row i, col j) contributes the coordinate (x = j, y = i).
struct MaskStats {
  std::uint64_t area = 0;
  std::optional<Point> centroid;

  bool empty() const { return area == 0; }
};

MaskStats mask_stats(const RleMask& mask);

struct OverlapCounts {
  std::uint64_t intersection = 0;
  std::uint64_t xor_count = 0;
  std::uint64_t union_count = 0;
};

/// Walks both run lists once; throws DimensionMismatchError on shape mismatch.
OverlapCounts mask_overlap(const RleMask& a, const RleMask& b);

struct XorUnion {
  std::uint64_t xor_count = 0;
  std::uint64_t union_count = 0;
};

XorUnion mask_xor_union(const RleMask& a, const RleMask& b);

/// |a & b| / |a | b|. Two empty masks agree perfectly and give 1.
double mask_iou(const RleMask& a, const RleMask& b);

}  // namespace kin
