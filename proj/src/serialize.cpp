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

#include "kin/serialize.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <set>

#include "kin/errors.hpp"

namespace kin {

namespace {

Json optional_number(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) {
    return nullptr;
  }
  return *v;
}

Json bbox_to_json(const BBox& b) { return Json::array({b.x1, b.y1, b.x2, b.y2}); }

BBox bbox_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 4) {
    throw InputError("bbox must be [x1, y1, x2, y2]");
  }
  return BBox::make(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
                    j[3].get<double>());
}

Json rhythm_to_json(const Rhythm& r) {
  switch (r.kind) {
    case Rhythm::Kind::Absent:
      return nullptr;
    case Rhythm::Kind::Infinite:
      return "infinite";
    case Rhythm::Kind::Finite:
      return r.value;
  }
  return nullptr;
}

template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw InputError(std::string(what) + ": " + e.what());
  }
}

TrackStatus status_from_string(const std::string& s) {
  if (s == "active") {
    return TrackStatus::Active;
  }
  if (s == "inactive") {
    return TrackStatus::Inactive;
  }
  if (s == "terminated") {
    return TrackStatus::Terminated;
  }
  throw InputError("unknown track state \"" + s + "\"");
}

}  // namespace

std::string format_number(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

Json mask_to_json(const RleMask& mask) {
  Json runs = Json::array();
  for (const auto r : mask.runs()) {
    runs.push_back(r);
  }
  return Json{{"h", mask.height()}, {"w", mask.width()}, {"runs", std::move(runs)}};
}

RleMask mask_from_json(const Json& j) {
  return guarded("mask", [&] {
    return RleMask::from_runs(j.at("h").get<int>(), j.at("w").get<int>(),
                              j.at("runs").get<std::vector<RleMask::Run>>());
  });
}

std::string to_jsonl_line(const FrameRecord& frame) {
  Json dets = Json::array();
  for (const auto& d : frame.detections) {
    dets.push_back(Json{{"bbox", bbox_to_json(d.bbox)},
                        {"conf", d.confidence},
                        {"mask", d.mask ? mask_to_json(*d.mask) : Json(nullptr)}});
  }
  return Json{{"frame", frame.frame_index},
              {"fps", frame.fps},
              {"w", frame.width},
              {"h", frame.height},
              {"dets", std::move(dets)}}
      .dump();
}

std::string to_jsonl_line(const GroundTruthFrame& frame, double fps, int width, int height) {
  Json dets = Json::array();
  for (const auto& e : frame.entities) {
    dets.push_back(Json{{"gt_id", e.gt_id},
                        {"bbox", bbox_to_json(e.bbox)},
                        {"mask", e.mask ? mask_to_json(*e.mask) : Json(nullptr)}});
  }
  return Json{{"frame", frame.frame_index},
              {"fps", fps},
              {"w", width},
              {"h", height},
              {"dets", std::move(dets)}}
      .dump();
}

Json config_to_json(const PipelineConfig& c) {
  return Json{{"confidence_threshold", c.confidence_threshold},
              {"iou_threshold", c.iou_threshold},
              {"track_cooldown_frames", c.track_cooldown_frames},
              {"motion_threshold", c.motion_threshold},
              {"step_threshold", c.step_threshold},
              {"step_cooldown_frames", c.step_cooldown_frames},
              {"sampling_stride", c.sampling_stride},
              {"pixels_per_meter", optional_number(c.pixels_per_meter)},
              {"mask_min_area_ratio", c.mask_min_area_ratio},
              {"mask_max_area_ratio", c.mask_max_area_ratio},
              {"centroid_margin", c.centroid_margin},
              {"secondary_fraction", c.secondary_fraction}};
}

PipelineConfig config_from_json(const Json& j, PipelineConfig base) {
  if (!j.is_object()) {
    throw InputError("config must be a flat JSON object");
  }
  return guarded("config", [&] {
    for (const auto& [key, value] : j.items()) {
      if (key == "confidence_threshold") {
        base.confidence_threshold = value.get<double>();
      } else if (key == "iou_threshold") {
        base.iou_threshold = value.get<double>();
      } else if (key == "track_cooldown_frames") {
        base.track_cooldown_frames = value.get<int>();
      } else if (key == "motion_threshold") {
        base.motion_threshold = value.get<double>();
      } else if (key == "step_threshold") {
        base.step_threshold = value.get<double>();
      } else if (key == "step_cooldown_frames") {
        base.step_cooldown_frames = value.get<int>();
      } else if (key == "sampling_stride") {
        base.sampling_stride = value.get<int>();
      } else if (key == "pixels_per_meter") {
        base.pixels_per_meter =
            value.is_null() ? std::nullopt : std::optional<double>(value.get<double>());
      } else if (key == "mask_min_area_ratio") {
        base.mask_min_area_ratio = value.get<double>();
      } else if (key == "mask_max_area_ratio") {
        base.mask_max_area_ratio = value.get<double>();
      } else if (key == "centroid_margin") {
        base.centroid_margin = value.get<double>();
      } else if (key == "secondary_fraction") {
        base.secondary_fraction = value.get<double>();
      } else {
        throw InputError("unknown config key \"" + key + "\"");
      }
    }
    base.validate();
    return base;
  });
}

Json tracks_to_json(const TrackSet& tracks, const PipelineConfig& config) {
  Json list = Json::array();
  for (const auto& t : tracks.tracks) {
    Json obs = Json::array();
    for (const auto& o : t.history) {
      obs.push_back(Json{{"frame", o.frame_index},
                         {"t", o.timestamp},
                         {"bbox", bbox_to_json(o.bbox)},
                         {"position", Json::array({o.position.x, o.position.y})},
                         {"mask", o.mask ? mask_to_json(*o.mask) : Json(nullptr)}});
    }
    list.push_back(Json{{"id", t.track_id},
                        {"state", to_string(t.state.status)},
                        {"frames_inactive", t.state.frames_inactive},
                        {"last_bbox", bbox_to_json(t.last_bbox)},
                        {"observations", std::move(obs)}});
  }
  return Json{{"schema", "kinetrace.tracks/1"},
              {"config", config_to_json(config)},
              {"sampling_stride", tracks.sampling_stride},
              {"processed_frames", tracks.processed_frames},
              {"tracks", std::move(list)}};
}

TrackSet tracks_from_json(const Json& j) {
  return guarded("tracks", [&] {
    if (j.value("schema", std::string()) != "kinetrace.tracks/1") {
      throw InputError("not a kinetrace track dump");
    }
    TrackSet set;
    set.sampling_stride = j.at("sampling_stride").get<int>();
    set.processed_frames = j.at("processed_frames").get<std::vector<std::int64_t>>();
    std::set<TrackId> seen;
    for (const auto& jt : j.at("tracks")) {
      Track t;
      t.track_id = jt.at("id").get<TrackId>();
      if (!seen.insert(t.track_id).second) {
        throw InputError("duplicate track id " + std::to_string(t.track_id));
      }
      t.state.status = status_from_string(jt.at("state").get<std::string>());
      t.state.frames_inactive = jt.at("frames_inactive").get<int>();
      t.last_bbox = bbox_from_json(jt.at("last_bbox"));
      for (const auto& jo : jt.at("observations")) {
        Observation o;
        o.frame_index = jo.at("frame").get<std::int64_t>();
        if (!t.history.empty() && o.frame_index <= t.history.back().frame_index) {
          throw InputError("track " + std::to_string(t.track_id) +
                           ": observation frames must increase");
        }
        o.timestamp = jo.at("t").get<double>();
        o.bbox = bbox_from_json(jo.at("bbox"));
        o.position = {jo.at("position").at(0).get<double>(),
                      jo.at("position").at(1).get<double>()};
        if (!jo.at("mask").is_null()) {
          o.mask = mask_from_json(jo.at("mask"));
        }
        t.history.push_back(std::move(o));
      }
      set.tracks.push_back(std::move(t));
    }
    return set;
  });
}

Json profiles_to_json(const ProfileReport& report, const PipelineConfig& config) {
  Json dancers = Json::array();
  for (const auto& p : report.profiles) {
    dancers.push_back(Json{{"track_id", p.track_id},
                           {"role", to_string(p.role)},
                           {"observations", p.observation_count},
                           {"duration", p.duration},
                           {"step_count", p.step_count},
                           {"step_frequency", optional_number(p.step_frequency)},
                           {"rhythm_consistency", rhythm_to_json(p.rhythm_consistency)},
                           {"avg_motion", p.motion.average},
                           {"max_motion", p.motion.maximum},
                           {"motion_std", p.motion.std_dev},
                           {"motion_samples_empty", p.motion.empty},
                           {"cumulative_motion", p.cumulative_motion},
                           {"movement_percentage", optional_number(p.movement_percentage)},
                           {"spatial_coverage", p.spatial_coverage},
                           {"total_distance", p.total_distance},
                           {"movement_efficiency", optional_number(p.movement_efficiency)},
                           {"distance_per_coverage", optional_number(p.distance_per_coverage)}});
  }
  Json ratios = Json::array();
  for (const auto& r : report.ratios) {
    ratios.push_back(Json{{"metric", r.metric},
                          {"primary", optional_number(r.primary)},
                          {"secondary", optional_number(r.secondary)},
                          {"ratio", optional_number(r.ratio)}});
  }
  const bool m = report.metric_units;
  return Json{
      {"schema", "kinetrace.profiles/1"},
      {"config", config_to_json(config)},
      {"units",
       Json{{"spatial_coverage", m ? "m^2" : "px^2"},
            {"total_distance", m ? "m" : "px"},
            {"movement_efficiency", m ? "m" : "px"},
            {"step_frequency", "steps/s"}}},
      {"step_frequency_basis", "step_count / (last_observation_t - first_observation_t)"},
      {"has_primary", report.has_primary},
      {"primary_id", report.primary_id ? Json(*report.primary_id) : Json(nullptr)},
      {"secondary_id", report.secondary_id ? Json(*report.secondary_id) : Json(nullptr)},
      {"dancers", std::move(dancers)},
      {"ratios", std::move(ratios)}};
}

std::string timeline_csv(const ProfileReport& report) {
  std::string out = "track_id,frame,t,intensity,is_step\n";
  for (const auto& k : report.kinetics) {
    std::set<std::int64_t> step_frames;
    for (const auto& s : k.steps) {
      step_frames.insert(s.frame_index);
    }
    for (const auto& s : k.series) {
      out += std::to_string(s.track_id);
      out += ',';
      out += std::to_string(s.frame_index);
      out += ',';
      out += format_number(s.timestamp);
      out += ',';
      out += format_number(s.intensity);
      out += ',';
      out += step_frames.contains(s.frame_index) ? '1' : '0';
      out += '\n';
    }
  }
  return out;
}

Json evaluation_to_json(const EvaluationReport& r) {
  const auto& c = r.confusion;
  Json hist = Json::array();
  for (std::size_t k = 0; k < r.positional_histogram.size(); ++k) {
    hist.push_back(Json{{"bin_start", static_cast<double>(k)},
                        {"count", r.positional_histogram[k]}});
  }
  return Json{
      {"schema", "kinetrace.eval/1"},
      {"match_iou", r.match_iou},
      {"frames_evaluated", r.evaluated_frames.size()},
      {"confusion",
       Json{{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn ? Json(*c.tn) : Json(nullptr)}}},
      {"precision", optional_number(r.scores.precision)},
      {"recall", optional_number(r.scores.recall)},
      {"f1", optional_number(r.scores.f1)},
      {"accuracy", optional_number(r.accuracy)},
      {"segmentation_iou",
       Json{{"mean", optional_number(r.segmentation_iou)}, {"pairs", r.segmentation_pairs}}},
      {"positional_error",
       Json{{"mean", optional_number(r.positional.mean)},
            {"pairs", r.positional.errors.size()},
            {"bin_width", 1.0},
            {"histogram", std::move(hist)}}},
      {"identity_accuracy",
       Json{{"value", optional_number(r.identity.value)},
            {"correct", r.identity.correct},
            {"transitions", r.identity.transitions}}},
      {"mean_track_duration",
       Json{{"frames", optional_number(r.durations.mean)}, {"spans", r.durations.spans}}}};
}

synth::ScenarioSpec scenario_from_json(const Json& j) {
  return guarded("scenario", [&] {
    synth::ScenarioSpec spec;
    spec.frame_count = j.at("frame_count").get<std::int64_t>();
    spec.fps = j.value("fps", 30.0);
    spec.width = j.at("width").get<int>();
    spec.height = j.at("height").get<int>();
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.position_noise = j.value("position_noise", 0);
    spec.step_intensity = j.value("step_intensity", 0.1);
    if (j.contains("config")) {
      spec.analysis = config_from_json(j.at("config"));
    }
    for (const auto& jd : j.at("dancers")) {
      synth::DancerScript d;
      const auto& id = jd.at("gt_id");
      d.gt_id = id.is_string() ? id.get<std::string>() : std::to_string(id.get<std::int64_t>());
      d.body_width = jd.at("body").at(0).get<int>();
      d.body_height = jd.at("body").at(1).get<int>();
      for (const auto& k : jd.at("trajectory")) {
        if (k.is_array()) {
          d.trajectory.push_back(
              {k.at(0).get<std::int64_t>(), k.at(1).get<double>(), k.at(2).get<double>()});
        } else {
          d.trajectory.push_back({k.at("frame").get<std::int64_t>(), k.at("x").get<double>(),
                                  k.at("y").get<double>()});
        }
      }
      d.step_schedule = jd.value("step_schedule", std::vector<std::int64_t>{});
      if (jd.contains("step_shift") && !jd.at("step_shift").is_null()) {
        d.step_shift = jd.at("step_shift").get<int>();
      }
      for (const auto& r : jd.value("dropouts", Json::array())) {
        d.dropouts.emplace_back(r.at(0).get<std::int64_t>(), r.at(1).get<std::int64_t>());
      }
      d.confidence = jd.value("confidence", 0.9);
      spec.dancers.push_back(std::move(d));
    }
    return spec;
  });
}

Json expected_to_json(const synth::Scenario& scenario, const synth::ScenarioSpec& spec) {
  Json steps = Json::object();
  for (const auto& [id, n] : scenario.expected_steps) {
    steps[id] = n;
  }
  Json shifts = Json::object();
  for (const auto& [id, d] : scenario.step_shift) {
    shifts[id] = d;
  }
  Json intensities = Json::object();
  for (const auto& [id, v] : scenario.step_intensity) {
    intensities[id] = v;
  }
  return Json{{"schema", "kinetrace.expected/1"},
              {"seed", spec.seed},
              {"config", config_to_json(spec.analysis)},
              {"dancer_count", scenario.dancer_count},
              {"expected_steps", std::move(steps)},
              {"step_shift", std::move(shifts)},
              {"step_intensity", std::move(intensities)}};
}

}  // namespace kin
