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

#include "kin/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kin/errors.hpp"

namespace kin {

const char* to_string(Role role) {
  switch (role) {
    case Role::Primary:
      return "primary";
    case Role::Secondary:
      return "secondary";
    case Role::Background:
      return "background";
  }
  return "unknown";
}

std::optional<double> motion_intensity(const Observation& prev, const Observation& curr) {
  if (!prev.mask || !curr.mask) {
    return std::nullopt;
  }
  const auto counts = mask_xor_union(*prev.mask, *curr.mask);
  if (counts.union_count == 0) {
    return std::nullopt;
  }
  return static_cast<double>(counts.xor_count) / static_cast<double>(counts.union_count);
}

std::vector<MotionSample> motion_series(const Track& track, const PipelineConfig& config) {
  std::vector<MotionSample> series;
  for (std::size_t i = 1; i < track.history.size(); ++i) {
    const auto& curr = track.history[i];
    const auto value = motion_intensity(track.history[i - 1], curr);
    if (!value) {
      continue;
    }
    const double floored = *value < config.motion_threshold ? 0.0 : *value;
    series.push_back({track.track_id, curr.frame_index, curr.timestamp, floored});
  }
  return series;
}

std::vector<StepEvent> detect_steps(std::span<const MotionSample> series,
                                    const PipelineConfig& config) {
  std::vector<StepEvent> steps;
  const auto min_gap = static_cast<std::int64_t>(config.step_cooldown_frames) *
                       static_cast<std::int64_t>(config.sampling_stride);
  for (const auto& s : series) {
    if (s.intensity < config.step_threshold) {
      continue;
    }
    if (!steps.empty() && s.frame_index - steps.back().frame_index < min_gap) {
      continue;
    }
    steps.push_back({s.track_id, s.frame_index, s.timestamp, s.intensity});
  }
  return steps;
}

MotionStatistics motion_statistics(std::span<const MotionSample> series) {
  MotionStatistics stats;
  if (series.empty()) {
    return stats;
  }
  stats.empty = false;
  double sum = 0.0;
  stats.maximum = series.front().intensity;
  for (const auto& s : series) {
    sum += s.intensity;
    stats.maximum = std::max(stats.maximum, s.intensity);
  }
  const auto n = static_cast<double>(series.size());
  stats.average = sum / n;
  double sq = 0.0;
  for (const auto& s : series) {
    const double d = s.intensity - stats.average;
    sq += d * d;
  }
  stats.std_dev = std::sqrt(sq / n);
  return stats;
}

double cumulative_motion(std::span<const MotionSample> series) {
  double sum = 0.0;
  for (const auto& s : series) {
    sum += s.intensity;
  }
  return sum;
}

Classification classify_dancers(std::span<const double> cumulative,
                                std::span<const TrackId> track_ids, double secondary_fraction) {
  if (cumulative.size() != track_ids.size()) {
    throw InvariantError("classify_dancers: one id per track required");
  }
  Classification out;
  out.roles.assign(cumulative.size(), Role::Background);
  if (cumulative.empty()) {
    return out;
  }
  std::vector<std::size_t> order(cumulative.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (cumulative[a] != cumulative[b]) {
      return cumulative[a] > cumulative[b];
    }
    return track_ids[a] < track_ids[b];
  });
  const double top = cumulative[order.front()];
  if (!(top > 0.0)) {
    return out;
  }
  out.has_primary = true;
  out.roles[order.front()] = Role::Primary;
  for (std::size_t k = 1; k < order.size(); ++k) {
    const auto i = order[k];
    if (cumulative[i] >= secondary_fraction * top) {
      out.roles[i] = Role::Secondary;
    }
  }
  return out;
}

std::vector<std::optional<double>> movement_percentages(std::span<const double> cumulative) {
  const double total = std::accumulate(cumulative.begin(), cumulative.end(), 0.0);
  std::vector<std::optional<double>> out(cumulative.size());
  if (!(total > 0.0)) {
    return out;
  }
  for (std::size_t i = 0; i < cumulative.size(); ++i) {
    out[i] = cumulative[i] / total;
  }
  return out;
}

namespace {

std::vector<Point> positions_of(const Track& track) {
  std::vector<Point> pts;
  pts.reserve(track.history.size());
  for (const auto& obs : track.history) {
    pts.push_back(obs.position);
  }
  return pts;
}

}  // namespace

double spatial_coverage(std::span<const Point> positions, std::optional<double> pixels_per_meter) {
  if (positions.empty()) {
    return 0.0;
  }
  auto [min_x, max_x] = std::minmax_element(positions.begin(), positions.end(),
                                            [](auto& a, auto& b) { return a.x < b.x; });
  auto [min_y, max_y] = std::minmax_element(positions.begin(), positions.end(),
                                            [](auto& a, auto& b) { return a.y < b.y; });
  const double area = (max_x->x - min_x->x) * (max_y->y - min_y->y);
  if (pixels_per_meter) {
    return area / (*pixels_per_meter * *pixels_per_meter);
  }
  return area;
}

double spatial_coverage(const Track& track, std::optional<double> pixels_per_meter) {
  const auto pts = positions_of(track);
  return spatial_coverage(pts, pixels_per_meter);
}

double total_distance(std::span<const Point> positions, std::optional<double> pixels_per_meter) {
  double sum = 0.0;
  for (std::size_t i = 1; i < positions.size(); ++i) {
    sum += distance(positions[i - 1], positions[i]);
  }
  return pixels_per_meter ? sum / *pixels_per_meter : sum;
}

double total_distance(const Track& track, std::optional<double> pixels_per_meter) {
  const auto pts = positions_of(track);
  return total_distance(pts, pixels_per_meter);
}

std::optional<double> movement_efficiency(double coverage, double distance) {
  if (!(distance > 0.0)) {
    return std::nullopt;
  }
  return coverage / distance;
}

Rhythm rhythm_consistency(std::span<const StepEvent> steps) {
  Rhythm out;
  if (steps.size() < 3) {
    return out;
  }
  std::vector<double> intervals;
  intervals.reserve(steps.size() - 1);
  for (std::size_t i = 1; i < steps.size(); ++i) {
    intervals.push_back(steps[i].timestamp - steps[i - 1].timestamp);
  }
  const auto n = static_cast<double>(intervals.size());
  const double mean = std::accumulate(intervals.begin(), intervals.end(), 0.0) / n;
  double sq = 0.0;
  for (const double v : intervals) {
    sq += (v - mean) * (v - mean);
  }
  const double sd = std::sqrt(sq / n);
  // Deviations at rounding level come from timestamps that are exactly regular.
  if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) {
    out.kind = Rhythm::Kind::Infinite;
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  out.kind = Rhythm::Kind::Finite;
  out.value = mean / sd;
  return out;
}

double track_duration(const Track& track) {
  if (track.history.size() < 2) {
    return 0.0;
  }
  return track.history.back().timestamp - track.history.front().timestamp;
}

std::optional<double> step_frequency(std::size_t step_count, const Track& track) {
  const double duration = track_duration(track);
  if (!(duration > 0.0)) {
    return std::nullopt;
  }
  return static_cast<double>(step_count) / duration;
}

std::optional<double> metric_ratio(std::optional<double> a, std::optional<double> b) {
  if (!a || !b || *b == 0.0 || !std::isfinite(*a) || !std::isfinite(*b)) {
    return std::nullopt;
  }
  return *a / *b;
}

ProfileReport build_profiles(const TrackSet& tracks, const PipelineConfig& config) {
  ProfileReport report;
  report.metric_units = config.pixels_per_meter.has_value();

  std::vector<const Track*> ordered;
  for (const auto& t : tracks.tracks) {
    ordered.push_back(&t);
  }
  std::sort(ordered.begin(), ordered.end(),
            [](const Track* a, const Track* b) { return a->track_id < b->track_id; });

  // Per-track metrics are independent of one another.
  std::vector<double> cumulative;
  std::vector<TrackId> ids;
  const auto min_gap = static_cast<std::int64_t>(config.step_cooldown_frames) *
                       static_cast<std::int64_t>(config.sampling_stride);
  for (const Track* track : ordered) {
    TrackKinetics kin;
    kin.track_id = track->track_id;
    kin.series = motion_series(*track, config);
    kin.steps = detect_steps(kin.series, config);
    for (std::size_t i = 1; i < kin.steps.size(); ++i) {
      if (kin.steps[i].frame_index - kin.steps[i - 1].frame_index < min_gap) {
        throw InvariantError("step cooldown violated on track " +
                             std::to_string(track->track_id));
      }
    }

    DancerProfile p;
    p.track_id = track->track_id;
    p.observation_count = track->history.size();
    p.duration = track_duration(*track);
    p.step_count = kin.steps.size();
    p.step_frequency = step_frequency(p.step_count, *track);
    p.rhythm_consistency = rhythm_consistency(kin.steps);
    p.motion = motion_statistics(kin.series);
    p.cumulative_motion = cumulative_motion(kin.series);
    p.spatial_coverage = spatial_coverage(*track, config.pixels_per_meter);
    p.total_distance = total_distance(*track, config.pixels_per_meter);
    p.movement_efficiency = movement_efficiency(p.spatial_coverage, p.total_distance);
    if (p.movement_efficiency && *p.movement_efficiency > 0.0) {
      p.distance_per_coverage = 1.0 / *p.movement_efficiency;
    }

    cumulative.push_back(p.cumulative_motion);
    ids.push_back(p.track_id);
    report.profiles.push_back(p);
    report.kinetics.push_back(std::move(kin));
  }

  const auto roles = classify_dancers(cumulative, ids, config.secondary_fraction);
  const auto shares = movement_percentages(cumulative);
  report.has_primary = roles.has_primary;
  double share_sum = 0.0;
  for (std::size_t i = 0; i < report.profiles.size(); ++i) {
    report.profiles[i].role = roles.roles[i];
    report.profiles[i].movement_percentage = shares[i];
    if (shares[i]) {
      share_sum += *shares[i];
    }
  }
  if (roles.has_primary && std::abs(share_sum - 1.0) > 1e-9) {
    throw InvariantError("movement percentages do not sum to 1");
  }

  const DancerProfile* primary = nullptr;
  const DancerProfile* secondary = nullptr;
  for (const auto& p : report.profiles) {
    if (p.role == Role::Primary) {
      primary = &p;
    } else if (p.role == Role::Secondary &&
               (secondary == nullptr || p.cumulative_motion > secondary->cumulative_motion)) {
      secondary = &p;
    }
  }
  if (primary != nullptr) {
    report.primary_id = primary->track_id;
  }
  if (secondary != nullptr) {
    report.secondary_id = secondary->track_id;
  }

  using Getter = std::optional<double> (*)(const DancerProfile&);
  const std::pair<const char*, Getter> metrics[] = {
      {"step_count", [](const DancerProfile& p) -> std::optional<double> {
         return static_cast<double>(p.step_count);
       }},
      {"step_frequency", [](const DancerProfile& p) { return p.step_frequency; }},
      {"rhythm_consistency", [](const DancerProfile& p) { return p.rhythm_consistency.finite(); }},
      {"avg_motion",
       [](const DancerProfile& p) -> std::optional<double> { return p.motion.average; }},
      {"max_motion",
       [](const DancerProfile& p) -> std::optional<double> { return p.motion.maximum; }},
      {"motion_std",
       [](const DancerProfile& p) -> std::optional<double> { return p.motion.std_dev; }},
      {"cumulative_motion",
       [](const DancerProfile& p) -> std::optional<double> { return p.cumulative_motion; }},
      {"movement_percentage", [](const DancerProfile& p) { return p.movement_percentage; }},
      {"spatial_coverage",
       [](const DancerProfile& p) -> std::optional<double> { return p.spatial_coverage; }},
      {"total_distance",
       [](const DancerProfile& p) -> std::optional<double> { return p.total_distance; }},
      {"movement_efficiency", [](const DancerProfile& p) { return p.movement_efficiency; }},
  };
  if (primary != nullptr) {
    for (const auto& [name, get] : metrics) {
      RatioEntry entry;
      entry.metric = name;
      entry.primary = get(*primary);
      if (secondary != nullptr) {
        entry.secondary = get(*secondary);
      }
      entry.ratio = metric_ratio(entry.primary, entry.secondary);
      report.ratios.push_back(std::move(entry));
    }
  }
  return report;
}

}  // namespace kin
