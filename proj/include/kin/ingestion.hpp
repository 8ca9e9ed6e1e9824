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

// Reading, validating and sampling per-frame detection streams.
//
// The interchange format is JSON Lines, one object per source frame:
//   {"frame": int, "fps": float, "w": int, "h": int,
//    "dets": [{"bbox": [x1,y1,x2,y2], "conf": float,
//              "mask": {"h": int, "w": int, "runs": [int,...]} | null}]}
// Ground-truth files share the envelope; each entity carries "gt_id" and the
// file may contain one {"tn": int} metadata line.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kin/mask_geometry.hpp"

namespace kin {

struct DetectionRecord {
  BBox bbox;
  double confidence = 1.0;
  std::optional<RleMask> mask;
};

struct FrameRecord {
  std::int64_t frame_index = 0;
  double fps = 30.0;
  int width = 0;
  int height = 0;
  std::vector<DetectionRecord> detections;

  double timestamp() const { return static_cast<double>(frame_index) / fps; }
};

struct PipelineConfig {
  double confidence_threshold = 0.4;
  double iou_threshold = 0.3;
  int track_cooldown_frames = 5;
  double motion_threshold = 0.01;
  double step_threshold = 0.03;
  int step_cooldown_frames = 5;
  int sampling_stride = 5;
  std::optional<double> pixels_per_meter;

  // Mask sanity checks (advanced).
  double mask_min_area_ratio = 0.05;
  double mask_max_area_ratio = 1.0;
  double centroid_margin = 0.10;

  // Role classification (advanced).
  double secondary_fraction = 0.5;

  /// Throws InputError when a field is out of range.
  void validate() const;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

enum class LineKind { Interchange, GroundTruth };

struct ParsedLine {
  /// Absent for a ground-truth metadata line.
  std::optional<FrameRecord> frame;
  /// Per-detection identity labels, ground truth only.
  std::vector<std::string> labels;
  std::optional<std::int64_t> true_negatives;
};

/// Parses a single non-blank line. Throws ParseError naming `line_no`.
ParsedLine parse_envelope_line(std::string_view text, std::size_t line_no, LineKind kind);

/// Enforces the stream-level invariants: strictly increasing frame indices
/// and constant frame dimensions.
class StreamOrderCheck {
 public:
  void check(const FrameRecord& frame, std::size_t line_no);

 private:
  std::optional<std::int64_t> last_index_;
  int width_ = 0;
  int height_ = 0;
};

/// Pull-based reader: frames come out in file order, one line at a time, so
/// the consumer sets the pace.
class FrameReader {
 public:
  explicit FrameReader(std::istream& in) : in_(in) {}

  std::optional<FrameRecord> next();
  std::size_t line() const { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
  StreamOrderCheck order_;
};

std::vector<FrameRecord> parse_stream(std::istream& in);
std::vector<FrameRecord> parse_stream_file(const std::string& path);

bool is_sampled(std::int64_t frame_index, int stride);

/// Keeps frames with index divisible by the stride, then drops detections
/// whose confidence is below the threshold (the threshold itself survives).
std::vector<FrameRecord> preprocess(std::span<const FrameRecord> frames,
                                    const PipelineConfig& config);

enum class MaskVerdict { Kept, NoMask, AreaTooSmall, AreaTooLarge, CentroidOutside };

const char* to_string(MaskVerdict verdict);

struct ValidatedDetection {
  DetectionRecord detection;
  MaskVerdict verdict = MaskVerdict::NoMask;
};

/// Checks the mask against its box. A failing mask is dropped and the
/// detection falls back to its box; box and confidence are never touched.
ValidatedDetection validate_detection(DetectionRecord detection, const PipelineConfig& config);

struct PreparedStream {
  std::vector<FrameRecord> frames;
  std::size_t masks_kept = 0;
  std::size_t masks_rejected = 0;
  std::size_t detections_without_mask = 0;
};

/// preprocess followed by validate_detection on every surviving detection.
PreparedStream prepare(std::span<const FrameRecord> frames, const PipelineConfig& config);

}  // namespace kin
