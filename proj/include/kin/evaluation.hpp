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

// Scoring pipeline output against annotated ground truth: detection
// confusion counts, mask IoU of matched pairs, box-center positional error,
// identity preservation across frame transitions and how long a track holds
// an identity before it switches or drops it.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "kin/mask_geometry.hpp"
#include "kin/tracker.hpp"

namespace kin {

struct GroundTruthEntity {
  std::string gt_id;
  BBox bbox;
  std::optional<RleMask> mask;
};

struct GroundTruthFrame {
  std::int64_t frame_index = 0;
  std::vector<GroundTruthEntity> entities;
};

struct GroundTruth {
  std::vector<GroundTruthFrame> frames;
  /// Supplied by the annotator; cannot be derived from detections.
  std::optional<std::int64_t> true_negatives;
};

GroundTruth parse_ground_truth(std::istream& in);
GroundTruth parse_ground_truth_file(const std::string& path);

struct Prediction {
  BBox bbox;
  std::optional<RleMask> mask;
  std::optional<TrackId> track_id;
};

struct MatchedPair {
  std::size_t prediction = 0;
  std::size_t entity = 0;
  double iou = 0.0;
};

struct FrameMatch {
  std::vector<MatchedPair> true_positives;
  std::vector<std::size_t> false_positives;
  std::vector<std::size_t> false_negatives;
};

/// Greedy highest-IoU matching; a pair counts when IoU >= match_iou.
FrameMatch match_to_gt(std::span<const Prediction> predictions, const GroundTruthFrame& truth,
                       double match_iou = 0.5);

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::optional<std::uint64_t> tn;
};

struct DetectionScores {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

DetectionScores precision_recall_f1(const ConfusionCounts& c);

/// (tp + tn) / total; needs an externally supplied tn.
std::optional<double> detection_accuracy(const ConfusionCounts& c);

struct MaskPair {
  const RleMask* predicted = nullptr;
  const RleMask* truth = nullptr;
};

/// Mean mask IoU; absent without pairs.
std::optional<double> segmentation_iou_eval(std::span<const MaskPair> pairs);

struct BoxPair {
  BBox predicted;
  BBox truth;
};

struct PositionalErrors {
  std::vector<double> errors;
  std::optional<double> mean;
};

PositionalErrors positional_error(std::span<const BoxPair> pairs);

/// Counts per [k * bin_width, (k + 1) * bin_width) bin, from zero up to the
/// largest error.
std::vector<std::uint64_t> error_histogram(std::span<const double> errors,
                                           double bin_width = 1.0);

/// Which track held each ground-truth identity in one evaluated frame.
struct IdentityFrame {
  std::int64_t frame_index = 0;
  std::map<std::string, TrackId> holder;
};

/// Matches each evaluated frame's track observations to its ground truth.
std::vector<IdentityFrame> identity_timeline(const TrackSet& tracks, const GroundTruth& truth,
                                             double match_iou = 0.5);

struct IdentityAccuracy {
  std::uint64_t correct = 0;
  std::uint64_t transitions = 0;
  std::optional<double> value;
};

/// Over consecutive evaluated frames, an identity matched in both frames is
/// preserved when the same track holds it in both.
IdentityAccuracy identity_accuracy(std::span<const IdentityFrame> timeline);

struct TrackDurations {
  /// Source-frame length of every uninterrupted hold of an identity.
  std::vector<std::int64_t> spans;
  std::optional<double> mean;
};

TrackDurations mean_track_duration(std::span<const IdentityFrame> timeline, int sampling_stride);

struct EvaluationReport {
  double match_iou = 0.5;
  std::vector<std::int64_t> evaluated_frames;
  ConfusionCounts confusion;
  DetectionScores scores;
  std::optional<double> accuracy;
  std::optional<double> segmentation_iou;
  std::size_t segmentation_pairs = 0;
  PositionalErrors positional;
  std::vector<std::uint64_t> positional_histogram;
  IdentityAccuracy identity;
  TrackDurations durations;
};

/// Evaluates over ground-truth frames the tracker processed. Throws
/// InputError when the two frame sets do not overlap.
EvaluationReport evaluate(const TrackSet& tracks, const GroundTruth& truth,
                          double match_iou = 0.5);

}  // namespace kin
