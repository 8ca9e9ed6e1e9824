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

// JSON and CSV forms of the engine's inputs and reports.

#include <string>

#include "json.hpp"
#include "kin/evaluation.hpp"
#include "kin/ingestion.hpp"
#include "kin/kinetics.hpp"
#include "kin/synthetic.hpp"
#include "kin/tracker.hpp"

namespace kin {

using Json = nlohmann::ordered_json;

Json mask_to_json(const RleMask& mask);
RleMask mask_from_json(const Json& j);

/// One interchange line, no trailing newline.
std::string to_jsonl_line(const FrameRecord& frame);
std::string to_jsonl_line(const GroundTruthFrame& frame, double fps, int width, int height);

Json config_to_json(const PipelineConfig& config);
/// Overlays the keys present in `j` onto `base`. Unknown keys are an error.
PipelineConfig config_from_json(const Json& j, PipelineConfig base = {});

Json tracks_to_json(const TrackSet& tracks, const PipelineConfig& config);
TrackSet tracks_from_json(const Json& j);

Json profiles_to_json(const ProfileReport& report, const PipelineConfig& config);

/// track_id,frame,t,intensity,is_step with a header row and LF endings.
std::string timeline_csv(const ProfileReport& report);

Json evaluation_to_json(const EvaluationReport& report);

synth::ScenarioSpec scenario_from_json(const Json& j);
Json expected_to_json(const synth::Scenario& scenario, const synth::ScenarioSpec& spec);

/// Shortest decimal form that reads back to the same double.
std::string format_number(double value);

}  // namespace kin
