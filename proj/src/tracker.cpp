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

#include "kin/tracker.hpp"

#include <algorithm>
#include <string>
#include <tuple>

#include "kin/errors.hpp"

namespace kin {

const char* to_string(TrackStatus status) {
  switch (status) {
    case TrackStatus::Active:
      return "active";
    case TrackStatus::Inactive:
      return "inactive";
    case TrackStatus::Terminated:
      return "terminated";
  }
  return "unknown";
}

Observation make_observation(const FrameRecord& frame, const DetectionRecord& detection) {
  Observation obs;
  obs.frame_index = frame.frame_index;
  obs.timestamp = frame.timestamp();
  obs.bbox = detection.bbox;
  obs.mask = detection.mask;
  obs.position = bbox_center(detection.bbox);
  if (detection.mask) {
    const auto stats = mask_stats(*detection.mask);
    if (stats.centroid) {
      obs.position = *stats.centroid;
    }
  }
  return obs;
}

Assignment greedy_assign(const IouMatrix& scores, std::span<const std::int64_t> column_keys,
                         double threshold, MatchRule rule) {
  if (column_keys.size() != scores.cols()) {
    throw InvariantError("greedy_assign: one key per column required");
  }
  struct Candidate {
    double score;
    std::int64_t key;
    std::size_t row;
    std::size_t col;
  };
  std::vector<Candidate> candidates;
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    for (std::size_t c = 0; c < scores.cols(); ++c) {
      const double s = scores.at(r, c);
      const bool passes = rule == MatchRule::Greater ? s > threshold : s >= threshold;
      if (passes) {
        candidates.push_back({s, column_keys[c], r, c});
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tuple(-a.score, a.key, a.row) < std::tuple(-b.score, b.key, b.row);
  });

  Assignment out;
  std::vector<bool> row_used(scores.rows(), false);
  std::vector<bool> col_used(scores.cols(), false);
  for (const auto& cand : candidates) {
    if (row_used[cand.row] || col_used[cand.col]) {
      continue;
    }
    row_used[cand.row] = true;
    col_used[cand.col] = true;
    out.pairs.emplace_back(cand.row, cand.col);
  }
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    if (!row_used[r]) {
      out.unmatched_rows.push_back(r);
    }
  }
  for (std::size_t c = 0; c < scores.cols(); ++c) {
    if (!col_used[c]) {
      out.unmatched_cols.push_back(c);
    }
  }
  return out;
}

Assignment greedy_match(std::span<const DetectionRecord> detections,
                        std::span<const Track* const> tracks, double iou_threshold) {
  IouMatrix scores(detections.size(), tracks.size());
  std::vector<std::int64_t> keys;
  keys.reserve(tracks.size());
  for (std::size_t c = 0; c < tracks.size(); ++c) {
    keys.push_back(tracks[c]->track_id);
    for (std::size_t r = 0; r < detections.size(); ++r) {
      scores.set(r, c, bbox_iou(detections[r].bbox, tracks[c]->last_bbox));
    }
  }
  return greedy_assign(scores, keys, iou_threshold, MatchRule::Greater);
}

Tracker::Tracker(const PipelineConfig& config) : config_(config) { config_.validate(); }

FrameUpdate Tracker::step(const FrameRecord& frame) {
  if (!processed_.empty() && frame.frame_index <= processed_.back()) {
    throw OrderError("frame " + std::to_string(frame.frame_index) + " arrived after frame " +
                     std::to_string(processed_.back()));
  }
  processed_.push_back(frame.frame_index);

  FrameUpdate update;
  std::vector<Track*> active;
  std::vector<Track*> inactive;
  for (auto& t : tracks_) {
    if (t.state.status == TrackStatus::Active) {
      active.push_back(&t);
    } else if (t.state.status == TrackStatus::Inactive) {
      inactive.push_back(&t);
    }
  }

  const auto& dets = frame.detections;
  auto attach = [&](Track& track, const DetectionRecord& det) {
    track.history.push_back(make_observation(frame, det));
    track.last_bbox = det.bbox;
    track.state = TrackState{TrackStatus::Active, 0};
  };

  // Live tracks first, at the configured threshold.
  const std::vector<const Track*> active_view(active.begin(), active.end());
  const auto first = greedy_match(dets, active_view, config_.iou_threshold);
  for (const auto& [d, t] : first.pairs) {
    attach(*active[t], dets[d]);
    ++update.matched;
  }

  // Leftover detections may revive an inactive track at a relaxed threshold.
  std::vector<DetectionRecord> leftover;
  leftover.reserve(first.unmatched_rows.size());
  for (const auto d : first.unmatched_rows) {
    leftover.push_back(dets[d]);
  }
  const std::vector<const Track*> inactive_view(inactive.begin(), inactive.end());
  const auto second = greedy_match(leftover, inactive_view, config_.iou_threshold / 2.0);
  std::vector<bool> spawned_from(leftover.size(), true);
  for (const auto& [d, t] : second.pairs) {
    attach(*inactive[t], leftover[d]);
    spawned_from[d] = false;
    ++update.reactivated;
  }

  const int cooldown = config_.track_cooldown_frames;
  for (const auto t : first.unmatched_cols) {
    if (cooldown >= 1) {
      active[t]->state = TrackState{TrackStatus::Inactive, 1};
      ++update.deactivated;
    } else {
      active[t]->state = TrackState{TrackStatus::Terminated, 0};
      ++update.terminated;
    }
  }
  for (const auto t : second.unmatched_cols) {
    auto& state = inactive[t]->state;
    ++state.frames_inactive;
    if (state.frames_inactive > cooldown) {
      state = TrackState{TrackStatus::Terminated, 0};
      ++update.terminated;
    }
  }

  for (std::size_t d = 0; d < leftover.size(); ++d) {
    if (!spawned_from[d]) {
      continue;
    }
    Track track;
    track.track_id = next_id_++;
    track.last_bbox = leftover[d].bbox;
    track.history.push_back(make_observation(frame, leftover[d]));
    // Pushing may reallocate; the pointer vectors above are not used past here.
    tracks_.push_back(std::move(track));
    ++update.spawned;
  }

  if (update.matched + update.reactivated + update.spawned != dets.size()) {
    throw InvariantError("tracker lost a detection in frame " +
                         std::to_string(frame.frame_index));
  }
  return update;
}

TrackSet Tracker::finish() && {
  TrackSet out;
  out.tracks = std::move(tracks_);
  out.processed_frames = std::move(processed_);
  out.sampling_stride = config_.sampling_stride;
  return out;
}

TrackSet run_tracking(std::span<const FrameRecord> frames, const PipelineConfig& config) {
  Tracker tracker(config);
  for (const auto& frame : frames) {
    tracker.step(frame);
  }
  return std::move(tracker).finish();
}

}  // namespace kin
