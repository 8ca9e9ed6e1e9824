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

#include "kin/ingestion.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <set>

#include "json.hpp"
#include "kin/errors.hpp"

namespace kin {

using nlohmann::json;

void PipelineConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) {
      throw InputError(std::string("invalid config: ") + what);
    }
  };
  auto nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  require(nonneg(confidence_threshold), "confidence_threshold must be >= 0");
  require(nonneg(iou_threshold), "iou_threshold must be >= 0");
  require(nonneg(motion_threshold), "motion_threshold must be >= 0");
  require(nonneg(step_threshold), "step_threshold must be >= 0");
  require(track_cooldown_frames >= 0, "track_cooldown_frames must be >= 0");
  require(step_cooldown_frames >= 0, "step_cooldown_frames must be >= 0");
  require(sampling_stride >= 1, "sampling_stride must be >= 1");
  require(!pixels_per_meter || (std::isfinite(*pixels_per_meter) && *pixels_per_meter > 0.0),
          "pixels_per_meter must be > 0");
  require(nonneg(mask_min_area_ratio) && nonneg(mask_max_area_ratio) &&
              mask_min_area_ratio <= mask_max_area_ratio,
          "mask area ratios must satisfy 0 <= min <= max");
  require(nonneg(centroid_margin), "centroid_margin must be >= 0");
  require(nonneg(secondary_fraction) && secondary_fraction <= 1.0,
          "secondary_fraction must lie in [0, 1]");
}

namespace {

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw ParseError(line_no, what);
}

std::int64_t get_int(const json& obj, const char* key, std::size_t line_no) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    fail(line_no, std::string("missing \"") + key + "\"");
  }
  if (!it->is_number_integer()) {
    fail(line_no, std::string("\"") + key + "\" must be an integer");
  }
  return it->get<std::int64_t>();
}

double get_number(const json& value, const std::string& what, std::size_t line_no) {
  if (!value.is_number()) {
    fail(line_no, what + " must be a number");
  }
  const double v = value.get<double>();
  if (!std::isfinite(v)) {
    fail(line_no, what + " must be finite");
  }
  return v;
}

RleMask parse_mask(const json& m, int frame_w, int frame_h, std::size_t line_no,
                   const std::string& where) {
  if (!m.is_object()) {
    fail(line_no, where + ": mask must be an object or null");
  }
  const auto h = get_int(m, "h", line_no);
  const auto w = get_int(m, "w", line_no);
  if (h != frame_h || w != frame_w) {
    fail(line_no, where + ": mask is " + std::to_string(h) + "x" + std::to_string(w) +
                      " but frame is " + std::to_string(frame_h) + "x" + std::to_string(frame_w));
  }
  const auto it = m.find("runs");
  if (it == m.end() || !it->is_array()) {
    fail(line_no, where + ": mask \"runs\" must be an array");
  }
  std::vector<RleMask::Run> runs;
  runs.reserve(it->size());
  for (const auto& r : *it) {
    if (!r.is_number_integer() || r.get<std::int64_t>() < 0 ||
        r.get<std::int64_t>() > std::numeric_limits<RleMask::Run>::max()) {
      fail(line_no, where + ": runs must be non-negative integers");
    }
    runs.push_back(static_cast<RleMask::Run>(r.get<std::int64_t>()));
  }
  try {
    return RleMask::from_runs(static_cast<int>(h), static_cast<int>(w), std::move(runs));
  } catch (const MalformedMaskError& e) {
    fail(line_no, where + ": " + e.what());
  }
}

std::string parse_label(const json& det, std::size_t line_no, const std::string& where) {
  const auto it = det.find("gt_id");
  if (it == det.end()) {
    fail(line_no, where + ": missing \"gt_id\"");
  }
  if (it->is_string()) {
    return it->get<std::string>();
  }
  if (it->is_number_integer()) {
    return std::to_string(it->get<std::int64_t>());
  }
  fail(line_no, where + ": \"gt_id\" must be a string or integer");
}

}  // namespace

ParsedLine parse_envelope_line(std::string_view text, std::size_t line_no, LineKind kind) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(line_no, std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) {
    fail(line_no, "expected a JSON object");
  }

  ParsedLine parsed;
  if (kind == LineKind::GroundTruth && !root.contains("frame") && root.contains("tn")) {
    const auto tn = get_int(root, "tn", line_no);
    if (tn < 0) {
      fail(line_no, "\"tn\" must be >= 0");
    }
    parsed.true_negatives = tn;
    return parsed;
  }

  FrameRecord frame;
  frame.frame_index = get_int(root, "frame", line_no);
  if (frame.frame_index < 0) {
    fail(line_no, "\"frame\" must be >= 0");
  }
  if (!root.contains("fps")) {
    fail(line_no, "missing \"fps\"");
  }
  frame.fps = get_number(root["fps"], "\"fps\"", line_no);
  if (frame.fps <= 0.0) {
    fail(line_no, "\"fps\" must be > 0");
  }
  const auto w = get_int(root, "w", line_no);
  const auto h = get_int(root, "h", line_no);
  if (w <= 0 || h <= 0 || w > std::numeric_limits<int>::max() ||
      h > std::numeric_limits<int>::max()) {
    fail(line_no, "\"w\" and \"h\" must be positive");
  }
  frame.width = static_cast<int>(w);
  frame.height = static_cast<int>(h);

  const auto dets = root.find("dets");
  if (dets == root.end() || !dets->is_array()) {
    fail(line_no, "\"dets\" must be an array");
  }
  std::set<std::string> seen_labels;
  for (std::size_t i = 0; i < dets->size(); ++i) {
    const auto& det = (*dets)[i];
    const std::string where = "dets[" + std::to_string(i) + "]";
    if (!det.is_object()) {
      fail(line_no, where + " must be an object");
    }
    DetectionRecord record;
    const auto bbox = det.find("bbox");
    if (bbox == det.end() || !bbox->is_array() || bbox->size() != 4) {
      fail(line_no, where + ": \"bbox\" must be [x1, y1, x2, y2]");
    }
    const double x1 = get_number((*bbox)[0], where + ".bbox", line_no);
    const double y1 = get_number((*bbox)[1], where + ".bbox", line_no);
    const double x2 = get_number((*bbox)[2], where + ".bbox", line_no);
    const double y2 = get_number((*bbox)[3], where + ".bbox", line_no);
    record.bbox = BBox{x1, y1, x2, y2};
    if (!record.bbox.valid()) {
      fail(line_no, where + ": bbox needs x1 <= x2 and y1 <= y2");
    }
    if (x1 < 0.0 || y1 < 0.0 || x2 > frame.width || y2 > frame.height) {
      fail(line_no, where + ": bbox lies outside the frame");
    }

    const auto conf = det.find("conf");
    if (conf != det.end()) {
      record.confidence = get_number(*conf, where + ".conf", line_no);
      if (record.confidence < 0.0 || record.confidence > 1.0) {
        fail(line_no, where + ": \"conf\" must lie in [0, 1]");
      }
    } else if (kind == LineKind::Interchange) {
      fail(line_no, where + ": missing \"conf\"");
    }

    const auto mask = det.find("mask");
    if (mask != det.end() && !mask->is_null()) {
      record.mask = parse_mask(*mask, frame.width, frame.height, line_no, where);
    }

    if (kind == LineKind::GroundTruth) {
      auto label = parse_label(det, line_no, where);
      if (!seen_labels.insert(label).second) {
        fail(line_no, where + ": duplicate gt_id \"" + label + "\"");
      }
      parsed.labels.push_back(std::move(label));
    }
    frame.detections.push_back(std::move(record));
  }
  parsed.frame = std::move(frame);
  return parsed;
}

void StreamOrderCheck::check(const FrameRecord& frame, std::size_t line_no) {
  if (last_index_) {
    if (frame.frame_index <= *last_index_) {
      throw ParseError(line_no, "frame index " + std::to_string(frame.frame_index) +
                                    " does not increase (previous " +
                                    std::to_string(*last_index_) + ")");
    }
    if (frame.width != width_ || frame.height != height_) {
      throw ParseError(line_no, "frame dimensions changed from " + std::to_string(width_) + "x" +
                                    std::to_string(height_) + " to " +
                                    std::to_string(frame.width) + "x" +
                                    std::to_string(frame.height));
    }
  }
  last_index_ = frame.frame_index;
  width_ = frame.width;
  height_ = frame.height;
}

namespace {

bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

}  // namespace

std::optional<FrameRecord> FrameReader::next() {
  std::string text;
  while (std::getline(in_, text)) {
    ++line_no_;
    if (is_blank(text)) {
      continue;
    }
    auto parsed = parse_envelope_line(text, line_no_, LineKind::Interchange);
    order_.check(*parsed.frame, line_no_);
    return std::move(parsed.frame);
  }
  return std::nullopt;
}

std::vector<FrameRecord> parse_stream(std::istream& in) {
  FrameReader reader(in);
  std::vector<FrameRecord> frames;
  while (auto frame = reader.next()) {
    frames.push_back(std::move(*frame));
  }
  return frames;
}

std::vector<FrameRecord> parse_stream_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open " + path);
  }
  return parse_stream(in);
}

bool is_sampled(std::int64_t frame_index, int stride) { return frame_index % stride == 0; }

std::vector<FrameRecord> preprocess(std::span<const FrameRecord> frames,
                                    const PipelineConfig& config) {
  std::vector<FrameRecord> out;
  for (const auto& frame : frames) {
    if (!is_sampled(frame.frame_index, config.sampling_stride)) {
      continue;
    }
    FrameRecord kept = frame;
    std::erase_if(kept.detections, [&](const DetectionRecord& d) {
      return d.confidence < config.confidence_threshold;
    });
    out.push_back(std::move(kept));
  }
  return out;
}

const char* to_string(MaskVerdict verdict) {
  switch (verdict) {
    case MaskVerdict::Kept:
      return "kept";
    case MaskVerdict::NoMask:
      return "no_mask";
    case MaskVerdict::AreaTooSmall:
      return "area_too_small";
    case MaskVerdict::AreaTooLarge:
      return "area_too_large";
    case MaskVerdict::CentroidOutside:
      return "centroid_outside";
  }
  return "unknown";
}

ValidatedDetection validate_detection(DetectionRecord detection, const PipelineConfig& config) {
  ValidatedDetection out;
  if (!detection.mask) {
    out.verdict = MaskVerdict::NoMask;
    out.detection = std::move(detection);
    return out;
  }
  const auto stats = mask_stats(*detection.mask);
  const double box_area = detection.bbox.area();
  const auto area = static_cast<double>(stats.area);
  if (stats.empty() || area < config.mask_min_area_ratio * box_area) {
    out.verdict = MaskVerdict::AreaTooSmall;
  } else if (area > config.mask_max_area_ratio * box_area) {
    out.verdict = MaskVerdict::AreaTooLarge;
  } else {
    const auto& b = detection.bbox;
    const double mx = config.centroid_margin * b.width();
    const double my = config.centroid_margin * b.height();
    const auto& c = *stats.centroid;
    const bool inside =
        c.x >= b.x1 - mx && c.x <= b.x2 + mx && c.y >= b.y1 - my && c.y <= b.y2 + my;
    out.verdict = inside ? MaskVerdict::Kept : MaskVerdict::CentroidOutside;
  }
  if (out.verdict != MaskVerdict::Kept) {
    detection.mask.reset();
  }
  out.detection = std::move(detection);
  return out;
}

PreparedStream prepare(std::span<const FrameRecord> frames, const PipelineConfig& config) {
  PreparedStream out;
  out.frames = preprocess(frames, config);
  for (auto& frame : out.frames) {
    for (auto& det : frame.detections) {
      auto checked = validate_detection(std::move(det), config);
      switch (checked.verdict) {
        case MaskVerdict::Kept:
          ++out.masks_kept;
          break;
        case MaskVerdict::NoMask:
          ++out.detections_without_mask;
          break;
        default:
          ++out.masks_rejected;
          break;
      }
      det = std::move(checked.detection);
    }
  }
  return out;
}

}  // namespace kin
