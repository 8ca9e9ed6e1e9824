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

#include <cmath>
#include <random>

#include "doctest.h"
#include "kin/errors.hpp"
#include "kin/kinetics.hpp"
#include "support/oracles.hpp"

using namespace kin;

namespace {

Observation obs_with(std::int64_t frame, std::optional<RleMask> mask, Point pos = {}) {
  Observation o;
  o.frame_index = frame;
  o.timestamp = static_cast<double>(frame) / 30.0;
  o.mask = std::move(mask);
  o.position = pos;
  return o;
}

Track track_of(std::vector<RleMask> masks, int stride = 1) {
  Track t;
  t.track_id = 1;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    t.history.push_back(obs_with(static_cast<std::int64_t>(i) * stride, masks[i]));
  }
  return t;
}

std::vector<MotionSample> samples(const std::vector<double>& values, int stride) {
  std::vector<MotionSample> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto frame = static_cast<std::int64_t>(i) * stride;
    out.push_back({1, frame, static_cast<double>(frame) / 30.0, values[i]});
  }
  return out;
}

std::vector<StepEvent> steps_at(const std::vector<double>& times) {
  std::vector<StepEvent> out;
  for (const double t : times) {
    out.push_back({1, 0, t, 0.1});
  }
  return out;
}

// Rectangle with pixels removed from the end of its last row.
RleMask block_minus(int removed) {
  DenseMask d(20, 20);
  int left = 200 - removed;
  for (int y = 0; y < 20 && left > 0; ++y) {
    for (int x = 0; x < 10 && left > 0; ++x, --left) {
      d.set(y, x, true);
    }
  }
  return RleMask::encode(d);
}

}  // namespace

TEST_CASE("motion_intensity") {
  const auto a = RleMask::rectangle(20, 20, 0, 0, 10, 10);
  const auto b = RleMask::rectangle(20, 20, 5, 0, 10, 10);
  const auto far = RleMask::rectangle(20, 20, 10, 10, 10, 10);
  CHECK(*motion_intensity(obs_with(0, a), obs_with(1, a)) == 0.0);
  CHECK(*motion_intensity(obs_with(0, a), obs_with(1, far)) == 1.0);
  CHECK(*motion_intensity(obs_with(0, a), obs_with(1, b)) == doctest::Approx(100.0 / 150.0));
  CHECK_FALSE(motion_intensity(obs_with(0, a), obs_with(1, std::nullopt)));
  CHECK_FALSE(motion_intensity(obs_with(0, RleMask::empty(20, 20)),
                               obs_with(1, RleMask::empty(20, 20))));
  CHECK_THROWS_AS(motion_intensity(obs_with(0, a), obs_with(1, RleMask::empty(20, 21))),
                  DimensionMismatchError);
}

TEST_CASE("property: intensity lies in [0,1] and equals the dense ratio") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const int h = 1 + static_cast<int>(rng() % 24);
    const int w = 1 + static_cast<int>(rng() % 24);
    const auto da = oracle::random_mask(rng, h, w);
    const auto db = oracle::random_mask(rng, h, w);
    const auto value =
        motion_intensity(obs_with(0, RleMask::encode(da)), obs_with(1, RleMask::encode(db)));
    const auto counts = oracle::dense_counts(da, db);
    if (counts.union_count == 0) {
      CHECK_FALSE(value);
      continue;
    }
    REQUIRE(value);
    CHECK(*value >= 0.0);
    CHECK(*value <= 1.0);
    CHECK(*value == static_cast<double>(counts.xor_count) /
                        static_cast<double>(counts.union_count));
  }
}

TEST_CASE("motion_series") {
  PipelineConfig cfg;
  SUBCASE("values under the motion threshold are floored") {
    // Raw intensities 1/200, 4/199 and 0.
    const auto t = track_of({block_minus(0), block_minus(1), block_minus(5), block_minus(5)});
    const auto s = motion_series(t, cfg);
    REQUIRE(s.size() == 3);
    CHECK(s[0].intensity == 0.0);
    CHECK(s[1].intensity == doctest::Approx(4.0 / 199.0));
    CHECK(s[2].intensity == 0.0);
    CHECK(s[1].frame_index == 2);
  }
  SUBCASE("single observation") {
    CHECK(motion_series(track_of({block_minus(0)}), cfg).empty());
  }
  SUBCASE("pairs without masks are skipped") {
    auto t = track_of({block_minus(0), block_minus(0), block_minus(0)});
    t.history[1].mask.reset();
    CHECK(motion_series(t, cfg).empty());
  }
}

TEST_CASE("detect_steps") {
  PipelineConfig cfg;  // stride 5, cooldown 5, threshold 0.03
  SUBCASE("constant series above threshold") {
    const auto s = samples(std::vector<double>(20, 0.05), cfg.sampling_stride);
    const auto steps = detect_steps(s, cfg);
    REQUIRE(steps.size() == 4);
    CHECK(steps[0].frame_index == 0);
    CHECK(steps[1].frame_index == 25);
    CHECK(steps[2].frame_index == 50);
    CHECK(steps[3].frame_index == 75);
  }
  SUBCASE("below threshold") {
    CHECK(detect_steps(samples(std::vector<double>(20, 0.029), 5), cfg).empty());
  }
  SUBCASE("threshold is inclusive") {
    CHECK(detect_steps(samples({0.03}, 5), cfg).size() == 1);
  }
  SUBCASE("second sample inside the cooldown") {
    CHECK(detect_steps(samples({0.05, 0.05}, 5), cfg).size() == 1);
  }
}

TEST_CASE("property: detect_steps equals the rule re-simulation and is monotone") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> value(0.0, 0.2);
  for (int trial = 0; trial < 500; ++trial) {
    PipelineConfig cfg;
    cfg.sampling_stride = 1 + static_cast<int>(rng() % 6);
    cfg.step_cooldown_frames = static_cast<int>(rng() % 8);
    std::vector<std::pair<std::int64_t, double>> raw;
    std::vector<MotionSample> series;
    std::int64_t frame = 0;
    const int n = static_cast<int>(rng() % 60);
    for (int i = 0; i < n; ++i) {
      // Gaps in the series come from observations without masks.
      frame += cfg.sampling_stride * (1 + static_cast<std::int64_t>(rng() % 3));
      const double v = value(rng);
      raw.emplace_back(frame, v);
      series.push_back({1, frame, static_cast<double>(frame) / 30.0, v});
    }
    std::size_t previous = std::numeric_limits<std::size_t>::max();
    for (const double thr : {0.0, 0.02, 0.05, 0.1, 0.15, 0.2}) {
      cfg.step_threshold = thr;
      const auto steps = detect_steps(series, cfg);
      const auto want =
          oracle::step_frames_by_rule(raw, thr, cfg.step_cooldown_frames, cfg.sampling_stride);
      REQUIRE(steps.size() == want.size());
      for (std::size_t k = 0; k < steps.size(); ++k) {
        CHECK(steps[k].frame_index == want[k]);
        if (k > 0) {
          CHECK(steps[k].frame_index - steps[k - 1].frame_index >=
                cfg.step_cooldown_frames * cfg.sampling_stride);
        }
      }
      CHECK(steps.size() <= previous);
      previous = steps.size();
    }
  }
}

TEST_CASE("motion_statistics") {
  const auto constant = motion_statistics(samples({0.1, 0.1, 0.1}, 1));
  CHECK(constant.average == doctest::Approx(0.1));
  CHECK(constant.maximum == 0.1);
  CHECK(constant.std_dev == doctest::Approx(0.0));
  const auto two = motion_statistics(samples({0.0, 0.2}, 1));
  CHECK(two.average == doctest::Approx(0.1));
  CHECK(two.maximum == 0.2);
  CHECK(two.std_dev == doctest::Approx(0.1));
  CHECK_FALSE(two.empty);
  const auto none = motion_statistics({});
  CHECK(none.empty);
  CHECK(none.average == 0.0);
  CHECK(cumulative_motion(samples({0.1, 0.2, 0.3}, 1)) == doctest::Approx(0.6));
}

TEST_CASE("classify_dancers") {
  SUBCASE("five performers split 1/2/2") {
    const std::vector<double> c{10, 6, 5, 2, 1};
    const std::vector<TrackId> ids{1, 2, 3, 4, 5};
    const auto out = classify_dancers(c, ids, 0.5);
    CHECK(out.has_primary);
    CHECK(out.roles == std::vector<Role>{Role::Primary, Role::Secondary, Role::Secondary,
                                         Role::Background, Role::Background});
  }
  SUBCASE("single track") {
    const std::vector<double> c{0.3};
    const std::vector<TrackId> ids{7};
    CHECK(classify_dancers(c, ids, 0.5).roles == std::vector<Role>{Role::Primary});
  }
  SUBCASE("ties go to the lower id") {
    const std::vector<double> c{2, 2};
    const std::vector<TrackId> ids{8, 3};
    CHECK(classify_dancers(c, ids, 0.5).roles ==
          std::vector<Role>{Role::Secondary, Role::Primary});
  }
  SUBCASE("nobody moved") {
    const std::vector<double> c{0, 0};
    const std::vector<TrackId> ids{1, 2};
    const auto out = classify_dancers(c, ids, 0.5);
    CHECK_FALSE(out.has_primary);
    CHECK(out.roles == std::vector<Role>{Role::Background, Role::Background});
  }
  SUBCASE("mismatched inputs") {
    const std::vector<double> c{1};
    CHECK_THROWS_AS(classify_dancers(c, {}, 0.5), InvariantError);
  }
}

TEST_CASE("property: classification is scale invariant") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> value(0.0, 10.0);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = 1 + static_cast<std::size_t>(rng() % 8);
    std::vector<double> c(n);
    std::vector<TrackId> ids(n);
    for (std::size_t i = 0; i < n; ++i) {
      c[i] = std::round(value(rng));  // integers keep scaling exact enough for ties
      ids[i] = static_cast<TrackId>(i + 1);
    }
    const auto base = classify_dancers(c, ids, 0.5);
    for (const double k : {0.25, 2.0, 8.0}) {
      std::vector<double> scaled(c);
      for (auto& v : scaled) v *= k;
      CHECK(classify_dancers(scaled, ids, 0.5).roles == base.roles);
    }
    const auto shares = movement_percentages(c);
    double sum = 0.0;
    for (const auto& s : shares) {
      if (s) sum += *s;
    }
    if (base.has_primary) {
      CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("movement_percentages") {
  const std::vector<double> one{4};
  CHECK(*movement_percentages(one)[0] == 1.0);
  const std::vector<double> two{3, 1};
  const auto p = movement_percentages(two);
  CHECK(*p[0] == 0.75);
  CHECK(*p[1] == 0.25);
  const std::vector<double> zero{0, 0};
  CHECK_FALSE(movement_percentages(zero)[0]);
}

TEST_CASE("coverage, distance and efficiency") {
  const std::vector<Point> single{{4, 4}};
  CHECK(spatial_coverage(single, std::nullopt) == 0.0);
  CHECK(total_distance(single, std::nullopt) == 0.0);

  const std::vector<Point> triangle{{0, 0}, {3, 4}, {3, 4}};
  CHECK(spatial_coverage(triangle, std::nullopt) == 12.0);
  CHECK(total_distance(triangle, std::nullopt) == 5.0);

  const std::vector<Point> square{{0, 0}, {10, 0}, {10, 10}, {0, 10}, {0, 0}};
  const double cov = spatial_coverage(square, std::nullopt);
  const double dist = total_distance(square, std::nullopt);
  CHECK(cov == 100.0);
  CHECK(dist == 40.0);
  CHECK(*movement_efficiency(cov, dist) == 2.5);
  CHECK(spatial_coverage(square, 10.0) == doctest::Approx(1.0));
  CHECK(total_distance(square, 10.0) == doctest::Approx(4.0));

  const std::vector<Point> line{{0, 0}, {5, 0}};
  CHECK(*movement_efficiency(spatial_coverage(line, std::nullopt),
                             total_distance(line, std::nullopt)) == 0.0);
  CHECK_FALSE(movement_efficiency(0.0, 0.0));
}

TEST_CASE("property: coverage and distance under translation and scaling") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> coord(-100.0, 100.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Point> pts(1 + rng() % 20);
    for (auto& p : pts) p = {coord(rng), coord(rng)};
    const double dx = coord(rng);
    const double dy = coord(rng);
    const double s = 0.5 + static_cast<double>(rng() % 5);
    std::vector<Point> moved;
    std::vector<Point> scaled;
    for (const auto& p : pts) {
      moved.push_back({p.x + dx, p.y + dy});
      scaled.push_back({p.x * s, p.y * s});
    }
    const double cov = spatial_coverage(pts, std::nullopt);
    const double dist = total_distance(pts, std::nullopt);
    CHECK(spatial_coverage(moved, std::nullopt) == doctest::Approx(cov).epsilon(1e-9));
    CHECK(total_distance(moved, std::nullopt) == doctest::Approx(dist).epsilon(1e-9));
    CHECK(spatial_coverage(scaled, std::nullopt) == doctest::Approx(cov * s * s).epsilon(1e-9));
    CHECK(total_distance(scaled, std::nullopt) == doctest::Approx(dist * s).epsilon(1e-9));
  }
}

TEST_CASE("rhythm_consistency") {
  const auto r = rhythm_consistency(steps_at({0, 1, 2, 3, 5}));
  REQUIRE(r.kind == Rhythm::Kind::Finite);
  CHECK(r.value == doctest::Approx(1.25 / std::sqrt(0.1875)));
  CHECK(r.value == doctest::Approx(2.8868).epsilon(1e-4));

  CHECK(rhythm_consistency(steps_at({0.5, 1.0, 1.5, 2.0})).kind == Rhythm::Kind::Infinite);
  // Timestamps derived from frame/fps are regular up to rounding only.
  CHECK(rhythm_consistency(steps_at({25 / 30.0, 50 / 30.0, 75 / 30.0})).kind ==
        Rhythm::Kind::Infinite);
  CHECK(rhythm_consistency(steps_at({0, 1})).kind == Rhythm::Kind::Absent);
  CHECK_FALSE(rhythm_consistency(steps_at({})).finite());
}

TEST_CASE("step_frequency and duration") {
  Track t;
  t.history.push_back(obs_with(0, std::nullopt));
  t.history.push_back(obs_with(240, std::nullopt));
  CHECK(track_duration(t) == doctest::Approx(8.0));
  CHECK(*step_frequency(4, t) == doctest::Approx(0.5));
  CHECK(*step_frequency(0, t) == 0.0);
  t.history.pop_back();
  CHECK_FALSE(step_frequency(3, t));
}

TEST_CASE("metric ratios") {
  CHECK(*metric_ratio(87.0, 71.0) == doctest::Approx(1.2254).epsilon(1e-4));
  CHECK(*metric_ratio(0.079, 0.058) == doctest::Approx(1.3621).epsilon(1e-4));
  CHECK(*metric_ratio(9.8, 6.9) == doctest::Approx(1.4203).epsilon(1e-4));
  CHECK_FALSE(metric_ratio(1.0, 0.0));
  CHECK_FALSE(metric_ratio(std::nullopt, 1.0));
}

TEST_CASE("build_profiles") {
  PipelineConfig cfg;
  cfg.sampling_stride = 1;
  cfg.step_cooldown_frames = 2;
  TrackSet set;
  set.sampling_stride = 1;

  // Tracks 1 and 2 jitter by 4 and 2 px every frame; track 3 never moves.
  for (TrackId id = 1; id <= 3; ++id) {
    Track t;
    t.track_id = id;
    for (int f = 0; f < 12; ++f) {
      int left = 10;
      if (id == 1) left += 4 * (f % 2);
      if (id == 2) left += 2 * (f % 2);
      t.history.push_back(
          obs_with(f, RleMask::rectangle(40, 40, left, 10, 10, 10), {left + 5.0, 15.0}));
    }
    set.tracks.push_back(std::move(t));
  }
  // Shuffle to confirm the report orders by id.
  std::swap(set.tracks[0], set.tracks[2]);

  const auto report = build_profiles(set, cfg);
  REQUIRE(report.profiles.size() == 3);
  CHECK(report.profiles[0].track_id == 1);
  CHECK(report.profiles[0].role == Role::Primary);
  CHECK(report.profiles[1].role == Role::Secondary);
  CHECK(report.profiles[2].role == Role::Background);
  CHECK(report.primary_id == TrackId{1});
  CHECK(report.secondary_id == TrackId{2});

  const double shift = 80.0 / 140.0;
  CHECK(report.profiles[0].motion.average == doctest::Approx(shift));
  CHECK(report.profiles[0].step_count == 6);  // frames 1, 3, ..., 11
  CHECK(report.profiles[2].cumulative_motion == 0.0);
  CHECK(report.profiles[2].step_count == 0);
  CHECK_FALSE(report.profiles[2].movement_efficiency);
  CHECK(report.profiles[0].duration == doctest::Approx(11.0 / 30.0));

  double share = 0.0;
  for (const auto& p : report.profiles) share += p.movement_percentage.value_or(0.0);
  CHECK(share == doctest::Approx(1.0));

  CHECK(report.profiles[1].motion.average == doctest::Approx(40.0 / 120.0));
  REQUIRE(report.ratios.size() == 11);
  REQUIRE(report.ratios[6].ratio);
  CHECK(report.ratios[0].metric == "step_count");
  CHECK(*report.ratios[6].ratio ==
        doctest::Approx(report.profiles[0].cumulative_motion / report.profiles[1].cumulative_motion));
  CHECK_FALSE(report.metric_units);
}
