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

#include "kin/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "kin/errors.hpp"

namespace kin::synth {

double shifted_rectangle_intensity(int width, int height, int shift) {
  const double w = width;
  const double h = height;
  const double d = shift;
  return 2.0 * d * h / (w * h + d * h);
}

int solve_step_shift(int body_width, double target) {
  if (body_width <= 0) {
    throw InputError("body width must be positive");
  }
  if (!(target < 1.0)) {
    throw InputError("step intensity target must be below 1");
  }
  const double t = std::max(target, 0.0);
  auto d = static_cast<int>(std::floor(t * body_width / (2.0 - t)));
  while (d < 1 || 2.0 * d / (body_width + d) <= t) {
    ++d;
  }
  if (d >= body_width) {
    throw InputError("step shift of " + std::to_string(d) + " px does not fit a body " +
                     std::to_string(body_width) + " px wide");
  }
  return d;
}

namespace {

[[noreturn]] void bad(const std::string& what) { throw InputError("invalid scenario: " + what); }

Point interpolate(const std::vector<Keyframe>& keys, std::int64_t frame) {
  if (frame <= keys.front().frame) {
    return {keys.front().x, keys.front().y};
  }
  if (frame >= keys.back().frame) {
    return {keys.back().x, keys.back().y};
  }
  const auto next = std::upper_bound(keys.begin(), keys.end(), frame,
                                     [](std::int64_t f, const Keyframe& k) { return f < k.frame; });
  const auto& b = *next;
  const auto& a = *(next - 1);
  const double u = static_cast<double>(frame - a.frame) / static_cast<double>(b.frame - a.frame);
  return {a.x + u * (b.x - a.x), a.y + u * (b.y - a.y)};
}

struct Rect {
  int left;
  int top;
  int width;
  int height;
};

bool in_dropout(const DancerScript& dancer, std::int64_t frame) {
  return std::any_of(dancer.dropouts.begin(), dancer.dropouts.end(),
                     [frame](const auto& r) { return frame >= r.first && frame < r.second; });
}

// Dense cell-by-cell XOR and union over the window covering both rectangles.
std::pair<std::uint64_t, std::uint64_t> dense_xor_union(const Rect& a, const Rect& b) {
  const int x0 = std::min(a.left, b.left);
  const int y0 = std::min(a.top, b.top);
  const int x1 = std::max(a.left + a.width, b.left + b.width);
  const int y1 = std::max(a.top + a.height, b.top + b.height);
  auto inside = [](const Rect& r, int x, int y) {
    return x >= r.left && x < r.left + r.width && y >= r.top && y < r.top + r.height;
  };
  std::uint64_t xr = 0;
  std::uint64_t un = 0;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const bool ia = inside(a, x, y);
      const bool ib = inside(b, x, y);
      xr += (ia != ib) ? 1 : 0;
      un += (ia || ib) ? 1 : 0;
    }
  }
  return {xr, un};
}

// Re-applies the threshold and cooldown rule to the scripted rectangles.
std::size_t resimulate_steps(const std::vector<std::pair<std::int64_t, Rect>>& seen,
                             const PipelineConfig& cfg) {
  std::size_t steps = 0;
  std::optional<std::int64_t> last_step;
  for (std::size_t i = 1; i < seen.size(); ++i) {
    const auto [xr, un] = dense_xor_union(seen[i - 1].second, seen[i].second);
    if (un == 0) {
      continue;
    }
    double value = static_cast<double>(xr) / static_cast<double>(un);
    if (value < cfg.motion_threshold) {
      value = 0.0;
    }
    const std::int64_t frame = seen[i].first;
    const bool cooled =
        !last_step || (frame - *last_step) >=
                          static_cast<std::int64_t>(cfg.step_cooldown_frames) * cfg.sampling_stride;
    if (value >= cfg.step_threshold && cooled) {
      ++steps;
      last_step = frame;
    }
  }
  return steps;
}

}  // namespace

void validate(const ScenarioSpec& spec) {
  spec.analysis.validate();
  if (spec.frame_count < 0) {
    bad("frame_count must be >= 0");
  }
  if (!(spec.fps > 0.0)) {
    bad("fps must be > 0");
  }
  if (spec.width <= 0 || spec.height <= 0) {
    bad("width and height must be positive");
  }
  if (spec.position_noise < 0) {
    bad("position_noise must be >= 0");
  }
  const auto stride = spec.analysis.sampling_stride;
  const auto min_gap = static_cast<std::int64_t>(spec.analysis.step_cooldown_frames) * stride;
  std::set<std::string> ids;
  for (const auto& d : spec.dancers) {
    const std::string who = "dancer \"" + d.gt_id + "\"";
    if (d.gt_id.empty() || !ids.insert(d.gt_id).second) {
      bad("gt_id must be unique and non-empty (" + who + ")");
    }
    if (d.body_width <= 0 || d.body_height <= 0) {
      bad(who + ": body dimensions must be positive");
    }
    if (d.body_width > spec.width || d.body_height > spec.height) {
      bad(who + ": body larger than the frame");
    }
    if (d.trajectory.empty()) {
      bad(who + ": trajectory needs at least one keyframe");
    }
    for (std::size_t i = 1; i < d.trajectory.size(); ++i) {
      if (d.trajectory[i].frame <= d.trajectory[i - 1].frame) {
        bad(who + ": keyframes must have increasing frames");
      }
    }
    for (std::size_t i = 0; i < d.step_schedule.size(); ++i) {
      const auto f = d.step_schedule[i];
      if (f < 0 || f >= spec.frame_count) {
        bad(who + ": step frame " + std::to_string(f) + " outside the scenario");
      }
      if (f % stride != 0) {
        bad(who + ": step frame " + std::to_string(f) + " is not on the sampling grid");
      }
      if (i > 0 && f - d.step_schedule[i - 1] < std::max<std::int64_t>(min_gap, 1)) {
        bad(who + ": step frames must increase by at least the step cooldown");
      }
    }
    if (d.step_shift && (*d.step_shift < 1 || *d.step_shift >= d.body_width)) {
      bad(who + ": step_shift must lie in [1, body width)");
    }
    for (const auto& [b, e] : d.dropouts) {
      if (b >= e) {
        bad(who + ": dropout ranges must be non-empty");
      }
    }
    if (d.confidence < 0.0 || d.confidence > 1.0) {
      bad(who + ": confidence must lie in [0, 1]");
    }
  }
}

Scenario generate(const ScenarioSpec& spec) {
  validate(spec);
  const auto& cfg = spec.analysis;
  Scenario out;
  out.dancer_count = spec.dancers.size();

  std::vector<int> shifts;
  for (const auto& d : spec.dancers) {
    const int shift = d.step_shift ? *d.step_shift
                                   : solve_step_shift(d.body_width,
                                                      std::max(spec.step_intensity,
                                                               cfg.step_threshold));
    shifts.push_back(shift);
    out.step_shift[d.gt_id] = shift;
    out.step_intensity[d.gt_id] = shifted_rectangle_intensity(d.body_width, d.body_height, shift);
  }

  std::mt19937_64 rng(spec.seed);
  const auto span = static_cast<std::uint64_t>(2 * spec.position_noise + 1);
  auto noise = [&]() {
    return static_cast<int>(rng() % span) - spec.position_noise;
  };

  const bool masks_survive = cfg.mask_min_area_ratio <= 1.0 && cfg.mask_max_area_ratio >= 1.0;
  std::vector<std::vector<std::pair<std::int64_t, Rect>>> seen(spec.dancers.size());

  for (std::int64_t f = 0; f < spec.frame_count; ++f) {
    FrameRecord frame;
    frame.frame_index = f;
    frame.fps = spec.fps;
    frame.width = spec.width;
    frame.height = spec.height;
    GroundTruthFrame gt;
    gt.frame_index = f;

    for (std::size_t i = 0; i < spec.dancers.size(); ++i) {
      const auto& d = spec.dancers[i];
      const Point c = interpolate(d.trajectory, f);
      Rect r{static_cast<int>(std::lround(c.x - d.body_width / 2.0)),
             static_cast<int>(std::lround(c.y - d.body_height / 2.0)), d.body_width,
             d.body_height};
      const int nx = noise();
      const int ny = noise();
      r.left += nx;
      r.top += ny;
      if (r.left < 0 || r.top < 0 || r.left + r.width > spec.width ||
          r.top + r.height > spec.height) {
        bad("dancer \"" + d.gt_id + "\" leaves the frame at frame " + std::to_string(f));
      }
      if (std::binary_search(d.step_schedule.begin(), d.step_schedule.end(), f)) {
        if (r.left + shifts[i] + r.width <= spec.width) {
          r.left += shifts[i];
        } else if (r.left - shifts[i] >= 0) {
          r.left -= shifts[i];
        } else {
          bad("dancer \"" + d.gt_id + "\" has no room to step at frame " + std::to_string(f));
        }
      }

      const BBox box{static_cast<double>(r.left), static_cast<double>(r.top),
                     static_cast<double>(r.left + r.width),
                     static_cast<double>(r.top + r.height)};
      const auto mask =
          RleMask::rectangle(spec.height, spec.width, r.left, r.top, r.width, r.height);
      gt.entities.push_back({d.gt_id, box, mask});
      if (!in_dropout(d, f)) {
        frame.detections.push_back({box, d.confidence, mask});
        if (f % cfg.sampling_stride == 0 && d.confidence >= cfg.confidence_threshold &&
            masks_survive) {
          seen[i].emplace_back(f, r);
        }
      }
    }
    out.stream.push_back(std::move(frame));
    out.truth.frames.push_back(std::move(gt));
  }

  for (std::size_t i = 0; i < spec.dancers.size(); ++i) {
    out.expected_steps[spec.dancers[i].gt_id] = resimulate_steps(seen[i], cfg);
  }
  return out;
}

}  // namespace kin::synth
