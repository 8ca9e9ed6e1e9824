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

// Scripted multi-dancer scenarios with exactly known ground truth.
//
// Bodies are solid axis-aligned rectangles, so the motion of a rectangle of
// w x h cells shifted horizontally by d < w has the closed form
//   xor / union = 2dh / (wh + dh) = 2d / (w + d),
// which is how scheduled steps are sized.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kin/evaluation.hpp"
#include "kin/ingestion.hpp"

namespace kin::synth {

/// Body center at a given source frame; positions between keyframes are
/// interpolated linearly and held constant outside them.
struct Keyframe {
  std::int64_t frame = 0;
  double x = 0.0;
  double y = 0.0;
};

struct DancerScript {
  std::string gt_id;
  std::vector<Keyframe> trajectory;
  int body_width = 0;
  int body_height = 0;
  /// Source frames (on the sampling grid) where the body jitters sideways.
  std::vector<std::int64_t> step_schedule;
  /// Jitter displacement in px; solved from step_intensity when unset.
  std::optional<int> step_shift;
  /// Half-open [begin, end) source-frame ranges where the detector misses
  /// the dancer. Ground truth still contains it.
  std::vector<std::pair<std::int64_t, std::int64_t>> dropouts;
  double confidence = 0.9;
};

struct ScenarioSpec {
  std::int64_t frame_count = 0;
  double fps = 30.0;
  int width = 0;
  int height = 0;
  std::vector<DancerScript> dancers;
  std::uint64_t seed = 0;
  /// Uniform integer noise in [-n, n] px added to each body position.
  int position_noise = 0;
  /// Intensity a scheduled jitter must exceed (together with step_threshold).
  double step_intensity = 0.1;
  PipelineConfig analysis;
};

struct Scenario {
  std::vector<FrameRecord> stream;
  GroundTruth truth;
  std::map<std::string, std::size_t> expected_steps;
  std::map<std::string, int> step_shift;
  std::map<std::string, double> step_intensity;
  std::size_t dancer_count = 0;
};

double shifted_rectangle_intensity(int width, int height, int shift);

/// Smallest integer shift whose intensity strictly exceeds `target`. Throws
/// InputError when no shift below the body width does.
int solve_step_shift(int body_width, double target);

/// Throws InputError describing the first violated constraint.
void validate(const ScenarioSpec& spec);

Scenario generate(const ScenarioSpec& spec);

}  // namespace kin::synth
