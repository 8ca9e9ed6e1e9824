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

#include "kin/mask_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kin/errors.hpp"

namespace kin {

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

BBox BBox::make(double x1, double y1, double x2, double y2) {
  BBox b{x1, y1, x2, y2};
  if (!b.valid()) {
    throw InputError("invalid bbox: need finite x1 <= x2 and y1 <= y2");
  }
  return b;
}

bool BBox::valid() const {
  return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2) &&
         x1 <= x2 && y1 <= y2;
}

Point bbox_center(const BBox& b) { return {(b.x1 + b.x2) / 2.0, (b.y1 + b.y2) / 2.0}; }

double bbox_iou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  const double inter = (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) {
    return 0.0;
  }
  return std::clamp(inter / uni, 0.0, 1.0);
}

DenseMask::DenseMask(int height, int width) : height_(height), width_(width) {
  if (height <= 0 || width <= 0) {
    throw MalformedMaskError("mask dimensions must be positive");
  }
  cells_.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), 0);
}

std::size_t DenseMask::index(int row, int col) const {
  return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
         static_cast<std::size_t>(col);
}

std::uint64_t DenseMask::count() const {
  return static_cast<std::uint64_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

RleMask RleMask::from_runs(int height, int width, std::vector<Run> runs) {
  if (height <= 0 || width <= 0) {
    throw MalformedMaskError("mask dimensions must be positive, got " + std::to_string(height) +
                             "x" + std::to_string(width));
  }
  const auto total = static_cast<std::uint64_t>(height) * static_cast<std::uint64_t>(width);
  std::uint64_t sum = 0;
  std::uint64_t area = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (i > 0 && runs[i] == 0) {
      throw MalformedMaskError("zero-length run at position " + std::to_string(i));
    }
    sum += runs[i];
    if (i % 2 == 1) {
      area += runs[i];
    }
  }
  if (sum != total) {
    throw MalformedMaskError("runs sum to " + std::to_string(sum) + ", expected " +
                             std::to_string(total) + " (" + std::to_string(height) + "x" +
                             std::to_string(width) + ")");
  }
  return RleMask(height, width, std::move(runs), area);
}

RleMask RleMask::encode(const DenseMask& dense) {
  std::vector<Run> runs;
  bool current = false;
  Run length = 0;
  std::uint64_t area = 0;
  for (const auto cell : dense.cells()) {
    const bool value = cell != 0;
    if (value != current) {
      runs.push_back(length);
      current = value;
      length = 0;
    }
    ++length;
    if (value) {
      ++area;
    }
  }
  runs.push_back(length);
  return RleMask(dense.height(), dense.width(), std::move(runs), area);
}

RleMask RleMask::empty(int height, int width) {
  return from_runs(height, width,
                   {static_cast<Run>(static_cast<std::uint64_t>(height) *
                                     static_cast<std::uint64_t>(width))});
}

RleMask RleMask::rectangle(int height, int width, int left, int top, int rect_width,
                           int rect_height) {
  if (rect_width <= 0 || rect_height <= 0) {
    return empty(height, width);
  }
  if (left < 0 || top < 0 || left + rect_width > width || top + rect_height > height) {
    throw MalformedMaskError("rectangle extends outside the mask");
  }
  std::vector<Run> runs{0};
  // Appends `n` cells of `fg`, extending the last run when the value repeats.
  auto append = [&runs](bool fg, Run n) {
    if (n == 0) {
      return;
    }
    const bool last_fg = runs.size() % 2 == 0;
    if (last_fg == fg) {
      runs.back() += n;
    } else {
      runs.push_back(n);
    }
  };
  const auto w = static_cast<Run>(width);
  const auto rw = static_cast<Run>(rect_width);
  append(false, static_cast<Run>(top) * w + static_cast<Run>(left));
  for (int r = 0; r < rect_height; ++r) {
    append(true, rw);
    if (r + 1 < rect_height) {
      append(false, w - rw);
    }
  }
  const auto bottom_right = static_cast<Run>(top + rect_height - 1) * w +
                            static_cast<Run>(left + rect_width);
  append(false, static_cast<Run>(height) * w - bottom_right);
  return from_runs(height, width, std::move(runs));
}

DenseMask RleMask::decode() const {
  DenseMask dense(height_, width_);
  std::uint64_t pos = 0;
  bool value = false;
  for (const auto run : runs_) {
    if (value) {
      for (std::uint64_t k = pos; k < pos + run; ++k) {
        dense.set(static_cast<int>(k / static_cast<std::uint64_t>(width_)),
                  static_cast<int>(k % static_cast<std::uint64_t>(width_)));
      }
    }
    pos += run;
    value = !value;
  }
  return dense;
}

MaskStats mask_stats(const RleMask& mask) {
  const auto w = static_cast<std::uint64_t>(mask.width());
  std::uint64_t pos = 0;
  bool value = false;
  // Exact integer accumulation; fits 64 bits for any mask under ~2^20 per side.
  std::uint64_t sum_x = 0;
  std::uint64_t sum_y = 0;
  for (const auto run : mask.runs()) {
    if (value) {
      std::uint64_t start = pos;
      const std::uint64_t end = pos + run;
      while (start < end) {
        const std::uint64_t row = start / w;
        const std::uint64_t seg_end = std::min(end, (row + 1) * w);
        const std::uint64_t len = seg_end - start;
        const std::uint64_t col0 = start - row * w;
        sum_x += len * col0 + len * (len - 1) / 2;
        sum_y += len * row;
        start = seg_end;
      }
    }
    pos += run;
    value = !value;
  }
  MaskStats stats;
  stats.area = mask.area();
  if (stats.area > 0) {
    const auto n = static_cast<double>(stats.area);
    stats.centroid = Point{static_cast<double>(sum_x) / n, static_cast<double>(sum_y) / n};
  }
  return stats;
}

namespace {

// Cursor over a run list yielding (value, remaining) segments.
class RunCursor {
 public:
  explicit RunCursor(std::span<const RleMask::Run> runs) : runs_(runs) { skip_empty(); }

  bool value() const { return index_ % 2 == 1; }
  std::uint64_t remaining() const { return remaining_; }
  bool done() const { return index_ >= runs_.size(); }

  void advance(std::uint64_t n) {
    remaining_ -= n;
    if (remaining_ == 0) {
      ++index_;
      skip_empty();
    }
  }

 private:
  void skip_empty() {
    while (index_ < runs_.size() && runs_[index_] == 0) {
      ++index_;
    }
    remaining_ = done() ? 0 : runs_[index_];
  }

  std::span<const RleMask::Run> runs_;
  std::size_t index_ = 0;
  std::uint64_t remaining_ = 0;
};

}  // namespace

OverlapCounts mask_overlap(const RleMask& a, const RleMask& b) {
  if (!a.same_shape(b)) {
    throw DimensionMismatchError("mask shapes differ: " + std::to_string(a.height()) + "x" +
                                 std::to_string(a.width()) + " vs " +
                                 std::to_string(b.height()) + "x" + std::to_string(b.width()));
  }
  OverlapCounts counts;
  RunCursor ca(a.runs());
  RunCursor cb(b.runs());
  while (!ca.done() && !cb.done()) {
    const std::uint64_t n = std::min(ca.remaining(), cb.remaining());
    const bool va = ca.value();
    const bool vb = cb.value();
    if (va && vb) {
      counts.intersection += n;
      counts.union_count += n;
    } else if (va || vb) {
      counts.xor_count += n;
      counts.union_count += n;
    }
    ca.advance(n);
    cb.advance(n);
  }
  return counts;
}

XorUnion mask_xor_union(const RleMask& a, const RleMask& b) {
  const auto counts = mask_overlap(a, b);
  return {counts.xor_count, counts.union_count};
}

double mask_iou(const RleMask& a, const RleMask& b) {
  const auto counts = mask_overlap(a, b);
  if (counts.union_count == 0) {
    return 1.0;
  }
  return static_cast<double>(counts.intersection) / static_cast<double>(counts.union_count);
}

}  // namespace kin
