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

// Identity tracking over sampled frames: greedy bounding-box IoU association
// against each track's last box, with a cooldown during which unmatched
// tracks stay inactive and can be picked up again.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "kin/ingestion.hpp"
#include "kin/mask_geometry.hpp"

namespace kin {

using TrackId = std::int64_t;

enum class TrackStatus { Active, Inactive, Terminated };

const char* to_string(TrackStatus status);

struct TrackState {
  TrackStatus status = TrackStatus::Active;
  /// In [1, cooldown] while Inactive, 0 otherwise.
  int frames_inactive = 0;

  bool live() const { return status != TrackStatus::Terminated; }

  friend bool operator==(const TrackState&, const TrackState&) = default;
};

struct Observation {
  std::int64_t frame_index = 0;
  double timestamp = 0.0;
  BBox bbox;
  std::optional<RleMask> mask;
  /// Mask centroid when a mask is present, box center otherwise.
  Point position;
};

Observation make_observation(const FrameRecord& frame, const DetectionRecord& detection);

struct Track {
  TrackId track_id = 0;
  TrackState state;
  std::vector<Observation> history;
  BBox last_bbox;
};

/// Row-major detections x tracks score matrix.
class IouMatrix {
 public:
  IouMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), values_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  void set(std::size_t r, std::size_t c, double v) { values_[r * cols_ + c] = v; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
};

struct Assignment {
  /// (row, column) pairs in the order they were selected.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;
};

enum class MatchRule { Greater, GreaterOrEqual };

/// Repeatedly takes the highest remaining score that passes the threshold.
/// Ties go to the lower column key, then the lower row index. Unmatched index
/// lists come back sorted.
Assignment greedy_assign(const IouMatrix& scores, std::span<const std::int64_t> column_keys,
                         double threshold, MatchRule rule = MatchRule::Greater);

/// Detections are rows; tracks are columns keyed by track id and scored
/// against their last box.
Assignment greedy_match(std::span<const DetectionRecord> detections,
                        std::span<const Track* const> tracks, double iou_threshold);

struct FrameUpdate {
  std::size_t matched = 0;
  std::size_t reactivated = 0;
  std::size_t spawned = 0;
  std::size_t deactivated = 0;
  std::size_t terminated = 0;
};

struct TrackSet {
  std::vector<Track> tracks;
  /// Every frame index the tracker consumed, detections or not.
  std::vector<std::int64_t> processed_frames;
  int sampling_stride = 1;
};

/// Sequential single-writer state machine; feed validated, sampled frames in
/// index order.
class Tracker {
 public:
  explicit Tracker(const PipelineConfig& config);

  /// Throws OrderError if the frame index does not increase.
  FrameUpdate step(const FrameRecord& frame);

  const std::vector<Track>& tracks() const { return tracks_; }
  TrackSet finish() &&;

 private:
  PipelineConfig config_;
  std::vector<Track> tracks_;
  std::vector<std::int64_t> processed_;
  TrackId next_id_ = 1;
};

TrackSet run_tracking(std::span<const FrameRecord> frames, const PipelineConfig& config);

}  // namespace kin
