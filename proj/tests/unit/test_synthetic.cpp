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
#include "kin/synthetic.hpp"
#include "support/oracles.hpp"
#include "support/scenarios.hpp"

using namespace kin;
using namespace kin::synth;

namespace {

ScenarioSpec one_dancer(std::vector<std::int64_t> steps) {
  ScenarioSpec spec;
  spec.frame_count = 150;
  spec.width = 320;
  spec.height = 240;
  spec.seed = 1;
  DancerScript d;
  d.gt_id = "solo";
  d.trajectory = {{0, 160, 120}};
  d.body_width = 40;
  d.body_height = 100;
  d.step_schedule = std::move(steps);
  spec.dancers.push_back(d);
  return spec;
}

}  // namespace

TEST_CASE("shifted rectangle closed form against the dense grid") {
  CHECK(shifted_rectangle_intensity(10, 10, 5) == doctest::Approx(2.0 / 3.0));
  for (int w = 1; w <= 12; ++w) {
    for (int h = 1; h <= 6; ++h) {
      for (int d = 1; d < w; ++d) {
        DenseMask a(h, w + d);
        DenseMask b(h, w + d);
        for (int y = 0; y < h; ++y) {
          for (int x = 0; x < w; ++x) {
            a.set(y, x, true);
            b.set(y, x + d, true);
          }
        }
        const auto c = oracle::dense_counts(a, b);
        CHECK(shifted_rectangle_intensity(w, h, d) ==
              doctest::Approx(static_cast<double>(c.xor_count) / c.union_count).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("solve_step_shift") {
  for (int w = 2; w <= 60; ++w) {
    for (const double t : {0.03, 0.1, 0.2, 0.5}) {
      int want = 0;
      for (int d = 1; d < w; ++d) {
        if (shifted_rectangle_intensity(w, 1, d) > t) {
          want = d;
          break;
        }
      }
      if (want == 0) {
        CHECK_THROWS_AS(solve_step_shift(w, t), InputError);
      } else {
        CHECK(solve_step_shift(w, t) == want);
      }
    }
  }
  CHECK_THROWS_AS(solve_step_shift(10, 0.95), InputError);
  CHECK_THROWS_AS(solve_step_shift(10, 1.0), InputError);
}

TEST_CASE("generate") {
  SUBCASE("stationary dancer") {
    const auto s = generate(one_dancer({}));
    CHECK(s.stream.size() == 150);
    CHECK(s.truth.frames.size() == 150);
    CHECK(s.expected_steps.at("solo") == 0);
    const auto run = testing::run_pipeline(s, PipelineConfig{});
    REQUIRE(run.tracks.tracks.size() == 1);
    CHECK(run.report.profiles[0].step_count == 0);
    CHECK(*run.evaluation.identity.value == 1.0);
  }
  SUBCASE("four scheduled jitters") {
    const auto s = generate(one_dancer({25, 55, 85, 115}));
    CHECK(s.expected_steps.at("solo") == 4);
    const auto run = testing::run_pipeline(s, PipelineConfig{});
    REQUIRE(run.tracks.tracks.size() == 1);
    CHECK(run.report.profiles[0].step_count == 4);
  }
  SUBCASE("a jitter near the right edge goes left") {
    auto spec = one_dancer({50});
    spec.dancers[0].trajectory = {{0, 300, 120}};
    const auto s = generate(spec);
    const auto shift = s.step_shift.at("solo");
    CHECK(s.stream[50].detections[0].bbox.x1 == 280 - shift);
  }
  SUBCASE("deterministic under a seed") {
    auto spec = one_dancer({25});
    spec.position_noise = 3;
    const auto a = generate(spec);
    const auto b = generate(spec);
    for (std::size_t f = 0; f < a.stream.size(); ++f) {
      CHECK(a.stream[f].detections[0].bbox == b.stream[f].detections[0].bbox);
    }
    spec.seed = 2;
    const auto c = generate(spec);
    bool differs = false;
    for (std::size_t f = 0; f < a.stream.size(); ++f) {
      differs = differs || !(a.stream[f].detections[0].bbox == c.stream[f].detections[0].bbox);
    }
    CHECK(differs);
  }
  SUBCASE("dropouts remove detections but not truth") {
    auto spec = one_dancer({});
    spec.dancers[0].dropouts = {{10, 20}};
    const auto s = generate(spec);
    CHECK(s.stream[9].detections.size() == 1);
    CHECK(s.stream[10].detections.empty());
    CHECK(s.stream[19].detections.empty());
    CHECK(s.truth.frames[15].entities.size() == 1);
  }
}

TEST_CASE("generate rejects bad scenarios") {
  SUBCASE("leaves the frame") {
    auto spec = one_dancer({});
    spec.dancers[0].trajectory = {{0, 160, 120}, {100, 400, 120}};
    CHECK_THROWS_AS(generate(spec), InputError);
  }
  SUBCASE("infeasible shift") {
    auto spec = one_dancer({25});
    spec.step_intensity = 0.99;
    CHECK_THROWS_AS(generate(spec), InputError);
  }
  SUBCASE("no room to step") {
    auto spec = one_dancer({25});
    spec.width = 40;
    spec.dancers[0].trajectory = {{0, 20, 120}};
    CHECK_THROWS_AS(generate(spec), InputError);
  }
  SUBCASE("steps off the sampling grid or inside the cooldown") {
    CHECK_THROWS_AS(generate(one_dancer({26})), InputError);
    CHECK_THROWS_AS(generate(one_dancer({25, 35})), InputError);
    CHECK_THROWS_AS(generate(one_dancer({150})), InputError);
  }
  SUBCASE("duplicate ids") {
    auto spec = one_dancer({});
    spec.dancers.push_back(spec.dancers[0]);
    CHECK_THROWS_AS(generate(spec), InputError);
  }
  SUBCASE("keyframes out of order") {
    auto spec = one_dancer({});
    spec.dancers[0].trajectory = {{10, 160, 120}, {10, 170, 120}};
    CHECK_THROWS_AS(generate(spec), InputError);
  }
}

TEST_CASE("property: the pipeline recovers scripted scenarios") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const int dancers = 1 + static_cast<int>(rng() % 5);
    const auto spec = testing::lane_scenario(rng, 300, dancers);
    const auto scenario = generate(spec);
    const auto run = testing::run_pipeline(scenario, spec.analysis);
    CHECK(run.tracks.tracks.size() == static_cast<std::size_t>(dancers));
    CHECK(run.evaluation.identity.correct == run.evaluation.identity.transitions);
    CHECK(run.owner.size() == static_cast<std::size_t>(dancers));
    for (const auto& [gt_id, track] : run.owner) {
      CHECK(testing::steps_of(run.report, track) == scenario.expected_steps.at(gt_id));
    }
  }
}

TEST_CASE("property: crossing dancers conserve detections") {
  auto spec = one_dancer({});
  spec.dancers[0].trajectory = {{0, 40, 120}, {149, 280, 120}};
  DancerScript other = spec.dancers[0];
  other.gt_id = "other";
  other.trajectory = {{0, 280, 120}, {149, 40, 120}};
  spec.dancers.push_back(other);
  const auto s = generate(spec);
  const auto prepared = prepare(s.stream, spec.analysis);
  const auto tracks = run_tracking(prepared.frames, spec.analysis);
  std::size_t observed = 0;
  for (const auto& t : tracks.tracks) observed += t.history.size();
  std::size_t detections = 0;
  for (const auto& f : prepared.frames) detections += f.detections.size();
  CHECK(observed == detections);
}
