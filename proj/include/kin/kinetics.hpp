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

// Movement metrics per track and ensemble role classification.
//
// Motion intensity between two consecutive masks of a track is the XOR pixel
// count over the union pixel count, so it lies in [0, 1]: 0 for an unchanged
// body, 1 for no overlap at all. Steps fire on intensity peaks separated by a
// refractory cooldown counted in analysed (sampled) frames.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kin/ingestion.hpp"
#include "kin/tracker.hpp"

namespace kin {

struct MotionSample {
  TrackId track_id = 0;
  std::int64_t frame_index = 0;
  double timestamp = 0.0;
  double intensity = 0.0;
};

struct StepEvent {
  TrackId track_id = 0;
  std::int64_t frame_index = 0;
  double timestamp = 0.0;
  double intensity_at_step = 0.0;
};

enum class Role { Primary, Secondary, Background };

const char* to_string(Role role);

/// Absent when either observation lacks a mask or both masks are empty.
/// Throws DimensionMismatchError when the masks differ in shape.
std::optional<double> motion_intensity(const Observation& prev, const Observation& curr);

/// One sample per consecutive pair with masks on both sides. Values below the
/// motion threshold are floored to zero.
std::vector<MotionSample> motion_series(const Track& track, const PipelineConfig& config);

std::vector<StepEvent> detect_steps(std::span<const MotionSample> series,
                                    const PipelineConfig& config);

struct MotionStatistics {
  double average = 0.0;
  double maximum = 0.0;
  double std_dev = 0.0;  // population
  bool empty = true;
};

MotionStatistics motion_statistics(std::span<const MotionSample> series);

double cumulative_motion(std::span<const MotionSample> series);

struct Classification {
  std::vector<Role> roles;  // parallel to the input
  bool has_primary = false;
};

/// Highest cumulative motion is Primary (ties: lower id). Others reaching
/// `secondary_fraction` of the Primary's total are Secondary, the rest
/// Background. When nobody moved at all there is no Primary.
Classification classify_dancers(std::span<const double> cumulative,
                                std::span<const TrackId> track_ids, double secondary_fraction);

/// Share of the ensemble's total motion; all absent when the total is zero.
std::vector<std::optional<double>> movement_percentages(std::span<const double> cumulative);

/// Area of the axis-aligned rectangle around all positions. Divided by the
/// squared scale when pixels_per_meter is set.
double spatial_coverage(std::span<const Point> positions, std::optional<double> pixels_per_meter);
double spatial_coverage(const Track& track, std::optional<double> pixels_per_meter);

/// Path length through consecutive positions.
double total_distance(std::span<const Point> positions, std::optional<double> pixels_per_meter);
double total_distance(const Track& track, std::optional<double> pixels_per_meter);

/// coverage / distance; absent for zero distance.
std::optional<double> movement_efficiency(double coverage, double distance);

struct Rhythm {
  enum class Kind { Absent, Finite, Infinite };
  Kind kind = Kind::Absent;
  double value = 0.0;

  std::optional<double> finite() const {
    return kind == Kind::Finite ? std::optional<double>(value) : std::nullopt;
  }
};

/// Mean inter-step interval over its population standard deviation. Needs at
/// least two intervals; a zero deviation reads as perfectly regular.
Rhythm rhythm_consistency(std::span<const StepEvent> steps);

double track_duration(const Track& track);

/// Steps per second of observed track duration; absent for zero duration.
std::optional<double> step_frequency(std::size_t step_count, const Track& track);

/// a / b, absent when either side is absent or b is zero.
std::optional<double> metric_ratio(std::optional<double> a, std::optional<double> b);

struct DancerProfile {
  TrackId track_id = 0;
  Role role = Role::Background;
  std::size_t observation_count = 0;
  double duration = 0.0;
  std::size_t step_count = 0;
  std::optional<double> step_frequency;
  Rhythm rhythm_consistency;
  MotionStatistics motion;
  double cumulative_motion = 0.0;
  std::optional<double> movement_percentage;
  double spatial_coverage = 0.0;
  double total_distance = 0.0;
  std::optional<double> movement_efficiency;
  /// Reciprocal of movement_efficiency.
  std::optional<double> distance_per_coverage;
};

struct TrackKinetics {
  TrackId track_id = 0;
  std::vector<MotionSample> series;
  std::vector<StepEvent> steps;
};

struct RatioEntry {
  std::string metric;
  std::optional<double> primary;
  std::optional<double> secondary;
  std::optional<double> ratio;
};

struct ProfileReport {
  std::vector<DancerProfile> profiles;  // ascending track id
  std::vector<TrackKinetics> kinetics;  // parallel to profiles
  bool has_primary = false;
  std::optional<TrackId> primary_id;
  /// Highest-ranked Secondary, the comparison baseline for the ratio table.
  std::optional<TrackId> secondary_id;
  std::vector<RatioEntry> ratios;
  bool metric_units = false;
};

ProfileReport build_profiles(const TrackSet& tracks, const PipelineConfig& config);

}  // namespace kin
