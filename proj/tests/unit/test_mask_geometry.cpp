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

#include <random>

#include "doctest.h"
#include "kin/errors.hpp"
#include "kin/mask_geometry.hpp"
#include "support/oracles.hpp"

using namespace kin;

namespace {

DenseMask block(int h, int w, int left, int top, int bw, int bh) {
  DenseMask m(h, w);
  for (int r = top; r < top + bh; ++r) {
    for (int c = left; c < left + bw; ++c) {
      m.set(r, c);
    }
  }
  return m;
}

}  // namespace

TEST_CASE("rle decode") {
  SUBCASE("single background run is empty") {
    const auto d = RleMask::from_runs(2, 2, {4}).decode();
    CHECK(d.count() == 0);
  }
  SUBCASE("leading zero run then full foreground") {
    const auto d = RleMask::from_runs(2, 2, {0, 4}).decode();
    CHECK(d.count() == 4);
  }
  SUBCASE("row-major scan with a leading background run") {
    const auto d = RleMask::from_runs(2, 3, {1, 2, 3}).decode();
    const std::vector<std::uint8_t> expected{0, 1, 1, 0, 0, 0};
    CHECK(std::vector<std::uint8_t>(d.cells().begin(), d.cells().end()) == expected);
  }
  SUBCASE("malformed run lists") {
    CHECK_THROWS_AS(RleMask::from_runs(2, 2, {3}), MalformedMaskError);
    CHECK_THROWS_AS(RleMask::from_runs(2, 2, {2, 0, 2}), MalformedMaskError);
    CHECK_THROWS_AS(RleMask::from_runs(2, 2, {4, 0}), MalformedMaskError);
    CHECK_THROWS_AS(RleMask::from_runs(0, 2, {}), MalformedMaskError);
  }
}

TEST_CASE("mask stats") {
  SUBCASE("full 4x4") {
    const auto s = mask_stats(RleMask::from_runs(4, 4, {0, 16}));
    CHECK(s.area == 16);
    REQUIRE(s.centroid);
    CHECK(s.centroid->x == doctest::Approx(1.5));
    CHECK(s.centroid->y == doctest::Approx(1.5));
  }
  SUBCASE("single pixel at x=2, y=3") {
    DenseMask m(5, 5);
    m.set(3, 2);
    const auto s = mask_stats(RleMask::encode(m));
    CHECK(s.area == 1);
    REQUIRE(s.centroid);
    CHECK(s.centroid->x == 2.0);
    CHECK(s.centroid->y == 3.0);
  }
  SUBCASE("empty mask has no centroid") {
    const auto s = mask_stats(RleMask::empty(3, 3));
    CHECK(s.empty());
    CHECK_FALSE(s.centroid);
  }
}

TEST_CASE("bbox iou and center") {
  const BBox a{0, 0, 10, 10};
  CHECK(bbox_iou(a, a) == 1.0);
  CHECK(bbox_iou(a, BBox{20, 20, 30, 30}) == 0.0);
  CHECK(bbox_iou(BBox{0, 0, 10, 10}, BBox{10, 0, 20, 10}) == 0.0);

  const BBox b{5, 0, 15, 10};
  CHECK(oracle::pixel_bbox_iou(a, b) == doctest::Approx(50.0 / 150.0));
  CHECK(bbox_iou(a, b) == doctest::Approx(50.0 / 150.0));
  CHECK(bbox_iou(a, b) == bbox_iou(b, a));

  CHECK(bbox_iou(BBox{2, 2, 2, 2}, BBox{2, 2, 2, 2}) == 0.0);

  CHECK(bbox_center(a) == Point{5, 5});
  CHECK(bbox_center(BBox{2, 4, 2, 4}) == Point{2, 4});
  CHECK(bbox_center(BBox{0, 0, 3, 7}) == Point{1.5, 3.5});

  CHECK_THROWS_AS(BBox::make(3, 0, 1, 1), InputError);
}

TEST_CASE("bbox iou matches pixel counting on integer boxes") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    auto box = [&] {
      const double x1 = static_cast<double>(rng() % 20);
      const double y1 = static_cast<double>(rng() % 20);
      return BBox{x1, y1, x1 + static_cast<double>(rng() % 12),
                  y1 + static_cast<double>(rng() % 12)};
    };
    const auto a = box();
    const auto b = box();
    CHECK(bbox_iou(a, b) == doctest::Approx(oracle::pixel_bbox_iou(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("mask iou and xor/union on shifted blocks") {
  const auto a = RleMask::encode(block(20, 20, 0, 0, 10, 10));
  const auto b = RleMask::encode(block(20, 20, 5, 0, 10, 10));
  CHECK(mask_iou(a, a) == 1.0);
  CHECK(mask_iou(a, b) == doctest::Approx(50.0 / 150.0));
  const auto xu = mask_xor_union(a, b);
  CHECK(xu.xor_count == 100);
  CHECK(xu.union_count == 150);

  const auto same = mask_xor_union(a, a);
  CHECK(same.xor_count == 0);
  CHECK(same.union_count == a.area());

  const auto far = RleMask::encode(block(20, 20, 10, 10, 10, 10));
  CHECK(mask_iou(a, far) == 0.0);
  const auto disjoint = mask_xor_union(a, far);
  CHECK(disjoint.xor_count == a.area() + far.area());
  CHECK(disjoint.union_count == a.area() + far.area());

  CHECK(mask_iou(RleMask::empty(4, 4), RleMask::empty(4, 4)) == 1.0);
  CHECK_THROWS_AS(mask_iou(a, RleMask::empty(20, 21)), DimensionMismatchError);
  CHECK_THROWS_AS(mask_xor_union(a, RleMask::empty(19, 20)), DimensionMismatchError);
}

TEST_CASE("rectangle encoder agrees with dense construction") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const int h = 1 + static_cast<int>(rng() % 16);
    const int w = 1 + static_cast<int>(rng() % 16);
    const int left = static_cast<int>(rng() % w);
    const int top = static_cast<int>(rng() % h);
    const int bw = 1 + static_cast<int>(rng() % (w - left));
    const int bh = 1 + static_cast<int>(rng() % (h - top));
    CHECK(RleMask::rectangle(h, w, left, top, bw, bh) ==
          RleMask::encode(block(h, w, left, top, bw, bh)));
  }
  CHECK_THROWS_AS(RleMask::rectangle(4, 4, 2, 0, 3, 1), MalformedMaskError);
}

TEST_CASE("property: round trip, run merge and centroid against dense brute force") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 400; ++i) {
    const int h = 1 + static_cast<int>(rng() % 64);
    const int w = 1 + static_cast<int>(rng() % 64);
    const auto da = oracle::random_mask(rng, h, w);
    const auto db = oracle::random_mask(rng, h, w);
    const auto ra = RleMask::encode(da);
    const auto rb = RleMask::encode(db);

    CHECK(ra.decode() == da);
    CHECK(RleMask::encode(ra.decode()) == ra);
    CHECK(RleMask::from_runs(h, w, {ra.runs().begin(), ra.runs().end()}) == ra);

    const auto dense = oracle::dense_counts(da, db);
    const auto overlap = mask_overlap(ra, rb);
    CHECK(ra.area() == dense.a);
    CHECK(overlap.intersection == dense.intersection);
    CHECK(overlap.xor_count == dense.xor_count);
    CHECK(overlap.union_count == dense.union_count);
    // Inclusion-exclusion ties the independently accumulated counts together.
    CHECK(overlap.xor_count == ra.area() + rb.area() - 2 * overlap.intersection);
    CHECK(overlap.union_count == ra.area() + rb.area() - overlap.intersection);

    const double iou = mask_iou(ra, rb);
    CHECK(iou == mask_iou(rb, ra));
    CHECK(iou >= 0.0);
    CHECK(iou <= 1.0);
    if (ra.area() > 0) {
      CHECK(mask_iou(ra, ra) == 1.0);
      const auto s = mask_stats(ra);
      const auto [cx, cy] = oracle::dense_centroid(da);
      CHECK(s.centroid->x == doctest::Approx(cx).epsilon(1e-12));
      CHECK(s.centroid->y == doctest::Approx(cy).epsilon(1e-12));
      CHECK(s.centroid->x >= 0.0);
      CHECK(s.centroid->x < w);
      CHECK(s.centroid->y < h);
    }
  }
}
