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

#include "kin/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <unordered_map>

#include "kin/errors.hpp"
#include "kin/ingestion.hpp"

namespace kin {

GroundTruth parse_ground_truth(std::istream& in) {
  GroundTruth truth;
  StreamOrderCheck order;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
      continue;
    }
    auto parsed = parse_envelope_line(text, line_no, LineKind::GroundTruth);
    if (parsed.true_negatives) {
      if (truth.true_negatives) {
        throw ParseError(line_no, "duplicate \"tn\" metadata line");
      }
      truth.true_negatives = parsed.true_negatives;
      continue;
    }
    order.check(*parsed.frame, line_no);
    GroundTruthFrame frame;
    frame.frame_index = parsed.frame->frame_index;
    for (std::size_t i = 0; i < parsed.frame->detections.size(); ++i) {
      auto& det = parsed.frame->detections[i];
      frame.entities.push_back({std::move(parsed.labels[i]), det.bbox, std::move(det.mask)});
    }
    truth.frames.push_back(std::move(frame));
  }
  return truth;
}

GroundTruth parse_ground_truth_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open " + path);
  }
  return parse_ground_truth(in);
}

FrameMatch match_to_gt(std::span<const Prediction> predictions, const GroundTruthFrame& truth,
                       double match_iou) {
  IouMatrix scores(predictions.size(), truth.entities.size());
  std::vector<std::int64_t> keys(truth.entities.size());
  std::iota(keys.begin(), keys.end(), std::int64_t{0});
  for (std::size_t p = 0; p < predictions.size(); ++p) {
    for (std::size_t g = 0; g < truth.entities.size(); ++g) {
      scores.set(p, g, bbox_iou(predictions[p].bbox, truth.entities[g].bbox));
    }
  }
  const auto assignment = greedy_assign(scores, keys, match_iou, MatchRule::GreaterOrEqual);
  FrameMatch out;
  for (const auto& [p, g] : assignment.pairs) {
    out.true_positives.push_back({p, g, scores.at(p, g)});
  }
  out.false_positives = assignment.unmatched_rows;
  out.false_negatives = assignment.unmatched_cols;
  return out;
}

DetectionScores precision_recall_f1(const ConfusionCounts& c) {
  DetectionScores s;
  if (c.tp + c.fp > 0) {
    s.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  }
  if (c.tp + c.fn > 0) {
    s.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  }
  if (s.precision && s.recall) {
    const double sum = *s.precision + *s.recall;
    s.f1 = sum > 0.0 ? 2.0 * *s.precision * *s.recall / sum : 0.0;
  }
  return s;
}

std::optional<double> detection_accuracy(const ConfusionCounts& c) {
  if (!c.tn) {
    return std::nullopt;
  }
  const auto total = c.tp + c.fp + c.fn + *c.tn;
  if (total == 0) {
    return std::nullopt;
  }
  return static_cast<double>(c.tp + *c.tn) / static_cast<double>(total);
}

std::optional<double> segmentation_iou_eval(std::span<const MaskPair> pairs) {
  if (pairs.empty()) {
    return std::nullopt;
  }
  double sum = 0.0;
  for (const auto& pair : pairs) {
    sum += mask_iou(*pair.predicted, *pair.truth);
  }
  return sum / static_cast<double>(pairs.size());
}

PositionalErrors positional_error(std::span<const BoxPair> pairs) {
  PositionalErrors out;
  for (const auto& pair : pairs) {
    out.errors.push_back(distance(bbox_center(pair.predicted), bbox_center(pair.truth)));
  }
  if (!out.errors.empty()) {
    out.mean = std::accumulate(out.errors.begin(), out.errors.end(), 0.0) /
               static_cast<double>(out.errors.size());
  }
  return out;
}

std::vector<std::uint64_t> error_histogram(std::span<const double> errors, double bin_width) {
  std::vector<std::uint64_t> bins;
  for (const double e : errors) {
    const auto k = static_cast<std::size_t>(std::floor(e / bin_width));
    if (k >= bins.size()) {
      bins.resize(k + 1, 0);
    }
    ++bins[k];
  }
  return bins;
}

namespace {

using PredictionIndex = std::unordered_map<std::int64_t, std::vector<Prediction>>;

PredictionIndex index_predictions(const TrackSet& tracks) {
  PredictionIndex index;
  std::vector<const Track*> ordered;
  for (const auto& t : tracks.tracks) {
    ordered.push_back(&t);
  }
  std::sort(ordered.begin(), ordered.end(),
            [](const Track* a, const Track* b) { return a->track_id < b->track_id; });
  for (const Track* t : ordered) {
    for (const auto& obs : t->history) {
      index[obs.frame_index].push_back({obs.bbox, obs.mask, t->track_id});
    }
  }
  return index;
}

std::vector<const GroundTruthFrame*> evaluated_frames(const TrackSet& tracks,
                                                      const GroundTruth& truth) {
  const std::set<std::int64_t> processed(tracks.processed_frames.begin(),
                                         tracks.processed_frames.end());
  std::vector<const GroundTruthFrame*> frames;
  for (const auto& f : truth.frames) {
    if (processed.contains(f.frame_index)) {
      frames.push_back(&f);
    }
  }
  std::sort(frames.begin(), frames.end(), [](const auto* a, const auto* b) {
    return a->frame_index < b->frame_index;
  });
  return frames;
}

}  // namespace

std::vector<IdentityFrame> identity_timeline(const TrackSet& tracks, const GroundTruth& truth,
                                             double match_iou) {
  const auto index = index_predictions(tracks);
  std::vector<IdentityFrame> timeline;
  static const std::vector<Prediction> kNone;
  for (const auto* gt : evaluated_frames(tracks, truth)) {
    const auto it = index.find(gt->frame_index);
    const auto& preds = it == index.end() ? kNone : it->second;
    const auto match = match_to_gt(preds, *gt, match_iou);
    IdentityFrame frame;
    frame.frame_index = gt->frame_index;
    for (const auto& tp : match.true_positives) {
      frame.holder[gt->entities[tp.entity].gt_id] = *preds[tp.prediction].track_id;
    }
    timeline.push_back(std::move(frame));
  }
  return timeline;
}

IdentityAccuracy identity_accuracy(std::span<const IdentityFrame> timeline) {
  IdentityAccuracy out;
  for (std::size_t k = 1; k < timeline.size(); ++k) {
    const auto& prev = timeline[k - 1].holder;
    for (const auto& [gt_id, track] : timeline[k].holder) {
      const auto it = prev.find(gt_id);
      if (it == prev.end()) {
        continue;
      }
      ++out.transitions;
      if (it->second == track) {
        ++out.correct;
      }
    }
  }
  if (out.transitions > 0) {
    out.value = static_cast<double>(out.correct) / static_cast<double>(out.transitions);
  }
  return out;
}

TrackDurations mean_track_duration(std::span<const IdentityFrame> timeline, int sampling_stride) {
  struct Hold {
    TrackId track;
    std::int64_t frames;
  };
  TrackDurations out;
  std::map<std::string, Hold> open;
  auto close = [&](const Hold& h) { out.spans.push_back(h.frames * sampling_stride); };
  for (const auto& frame : timeline) {
    // Identities that vanished or went unmatched end their hold.
    for (auto it = open.begin(); it != open.end();) {
      const auto held = frame.holder.find(it->first);
      if (held == frame.holder.end() || held->second != it->second.track) {
        close(it->second);
        it = open.erase(it);
      } else {
        ++it->second.frames;
        ++it;
      }
    }
    for (const auto& [gt_id, track] : frame.holder) {
      if (!open.contains(gt_id)) {
        open.emplace(gt_id, Hold{track, 1});
      }
    }
  }
  for (const auto& [gt_id, hold] : open) {
    close(hold);
  }
  if (!out.spans.empty()) {
    out.mean = std::accumulate(out.spans.begin(), out.spans.end(), 0.0) /
               static_cast<double>(out.spans.size());
  }
  return out;
}

EvaluationReport evaluate(const TrackSet& tracks, const GroundTruth& truth, double match_iou) {
  const auto frames = evaluated_frames(tracks, truth);
  if (frames.empty()) {
    throw InputError("prediction and ground-truth frame sets do not overlap");
  }
  EvaluationReport report;
  report.match_iou = match_iou;
  const auto index = index_predictions(tracks);
  static const std::vector<Prediction> kNone;
  std::vector<MaskPair> mask_pairs;
  std::vector<BoxPair> box_pairs;
  for (const auto* gt : frames) {
    report.evaluated_frames.push_back(gt->frame_index);
    const auto it = index.find(gt->frame_index);
    const auto& preds = it == index.end() ? kNone : it->second;
    const auto match = match_to_gt(preds, *gt, match_iou);
    report.confusion.tp += match.true_positives.size();
    report.confusion.fp += match.false_positives.size();
    report.confusion.fn += match.false_negatives.size();
    for (const auto& tp : match.true_positives) {
      const auto& pred = preds[tp.prediction];
      const auto& entity = gt->entities[tp.entity];
      box_pairs.push_back({pred.bbox, entity.bbox});
      if (pred.mask && entity.mask) {
        mask_pairs.push_back({&*pred.mask, &*entity.mask});
      }
    }
  }
  if (truth.true_negatives) {
    report.confusion.tn = static_cast<std::uint64_t>(*truth.true_negatives);
  }
  report.scores = precision_recall_f1(report.confusion);
  report.accuracy = detection_accuracy(report.confusion);
  report.segmentation_iou = segmentation_iou_eval(mask_pairs);
  report.segmentation_pairs = mask_pairs.size();
  report.positional = positional_error(box_pairs);
  report.positional_histogram = error_histogram(report.positional.errors);

  const auto timeline = identity_timeline(tracks, truth, match_iou);
  report.identity = identity_accuracy(timeline);
  report.durations = mean_track_duration(timeline, tracks.sampling_stride);
  return report;
}

}  // namespace kin
