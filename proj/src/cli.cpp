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

#include "kin/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "kin/errors.hpp"
#include "kin/evaluation.hpp"
#include "kin/ingestion.hpp"
#include "kin/kinetics.hpp"
#include "kin/serialize.hpp"
#include "kin/synthetic.hpp"
#include "kin/tracker.hpp"

namespace kin::cli {

namespace fs = std::filesystem;

void write_file_atomic(const std::string& path, const std::string& contents) {
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw InputError("cannot write " + tmp.string());
    }
    out << contents;
    out.flush();
    if (!out) {
      throw InputError("failed writing " + tmp.string());
    }
  }
  fs::rename(tmp, target);
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json_file(const std::string& path) {
  const auto text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(path + ": malformed JSON: " + e.what());
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// Optional overrides; unset fields leave the file/default values alone.
struct ConfigFlags {
  std::string config_path;
  std::optional<double> confidence_threshold;
  std::optional<double> iou_threshold;
  std::optional<int> track_cooldown;
  std::optional<double> motion_threshold;
  std::optional<double> step_threshold;
  std::optional<int> step_cooldown;
  std::optional<int> stride;
  std::optional<double> pixels_per_meter;
  std::optional<double> secondary_fraction;

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "Flat JSON config file");
    app.add_option("--confidence-threshold", confidence_threshold);
    app.add_option("--iou-threshold", iou_threshold);
    app.add_option("--track-cooldown", track_cooldown);
    app.add_option("--motion-threshold", motion_threshold);
    app.add_option("--step-threshold", step_threshold);
    app.add_option("--step-cooldown", step_cooldown);
    app.add_option("--stride", stride);
    app.add_option("--pixels-per-meter", pixels_per_meter);
    app.add_option("--secondary-fraction", secondary_fraction);
  }

  PipelineConfig resolve(PipelineConfig base = {}) const {
    PipelineConfig c = base;
    if (!config_path.empty()) {
      c = config_from_json(read_json_file(config_path), c);
    }
    if (confidence_threshold) c.confidence_threshold = *confidence_threshold;
    if (iou_threshold) c.iou_threshold = *iou_threshold;
    if (track_cooldown) c.track_cooldown_frames = *track_cooldown;
    if (motion_threshold) c.motion_threshold = *motion_threshold;
    if (step_threshold) c.step_threshold = *step_threshold;
    if (step_cooldown) c.step_cooldown_frames = *step_cooldown;
    if (stride) c.sampling_stride = *stride;
    if (pixels_per_meter) c.pixels_per_meter = *pixels_per_meter;
    if (secondary_fraction) c.secondary_fraction = *secondary_fraction;
    c.validate();
    return c;
  }
};

struct AnalyzeArgs {
  std::string input;
  std::string out_dir = ".";
  ConfigFlags flags;
};

struct EvaluateArgs {
  std::string pred;
  std::string gt;
  std::string out = "eval.json";
  double match_iou = 0.5;
  ConfigFlags flags;
};

struct SynthArgs {
  std::string spec;
  std::string out_dir = ".";
  std::string stem = "scenario";
};

struct ReportArgs {
  std::string profiles;
};

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct PipelineRun {
  std::size_t frames_read = 0;
  PreparedStream prepared;
  TrackSet tracks;
};

PipelineRun run_pipeline(const std::string& input, const PipelineConfig& config) {
  PipelineRun run;
  std::vector<FrameRecord> frames;
  try {
    frames = parse_stream_file(input);
  } catch (const ParseError& e) {
    throw InputError(input + ": " + e.what());
  }
  run.frames_read = frames.size();
  run.prepared = prepare(frames, config);
  run.tracks = run_tracking(run.prepared.frames, config);
  return run;
}

int cmd_analyze(const AnalyzeArgs& args, std::ostream& out) {
  const auto started = std::chrono::steady_clock::now();
  const auto config = args.flags.resolve();
  const auto run = run_pipeline(args.input, config);
  const auto report = build_profiles(run.tracks, config);

  auto profiles = profiles_to_json(report, config);
  profiles["ingest"] = Json{{"frames_read", run.frames_read},
                            {"frames_analysed", run.prepared.frames.size()},
                            {"masks_kept", run.prepared.masks_kept},
                            {"masks_rejected", run.prepared.masks_rejected},
                            {"detections_without_mask", run.prepared.detections_without_mask}};

  fs::create_directories(args.out_dir);
  const fs::path dir(args.out_dir);
  const auto profiles_path = (dir / "profiles.json").string();
  const auto timeline_path = (dir / "motion_timeline.csv").string();
  const auto tracks_path = (dir / "tracks.json").string();
  const auto manifest_path = (dir / "manifest.json").string();
  write_file_atomic(profiles_path, dump(profiles));
  write_file_atomic(timeline_path, timeline_csv(report));
  write_file_atomic(tracks_path, dump(tracks_to_json(run.tracks, config)));

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  const Json manifest{{"tool", kToolName},
                      {"version", kVersion},
                      {"command", "analyze"},
                      {"inputs", Json::array({args.input})},
                      {"config", config_to_json(config)},
                      {"outputs", Json::array({profiles_path, timeline_path, tracks_path})},
                      {"wall_clock_seconds", elapsed}};
  write_file_atomic(manifest_path, dump(manifest));
  out << "analysed " << run.prepared.frames.size() << " of " << run.frames_read << " frames, "
      << report.profiles.size() << " tracks -> " << args.out_dir << "\n";
  return kOk;
}

int cmd_evaluate(const EvaluateArgs& args, std::ostream& out) {
  if (!(args.match_iou >= 0.0 && args.match_iou <= 1.0)) {
    throw InputError("--match-iou must lie in [0, 1]");
  }
  PipelineConfig config;
  TrackSet tracks;
  if (ends_with(args.pred, ".jsonl")) {
    config = args.flags.resolve();
    tracks = run_pipeline(args.pred, config).tracks;
  } else {
    const auto dump_json = read_json_file(args.pred);
    if (dump_json.contains("config")) {
      config = config_from_json(dump_json.at("config"));
    }
    tracks = tracks_from_json(dump_json);
  }
  GroundTruth truth;
  try {
    truth = parse_ground_truth_file(args.gt);
  } catch (const ParseError& ex) {
    throw InputError(args.gt + ": " + ex.what());
  }
  const auto report = evaluate(tracks, truth, args.match_iou);
  auto j = evaluation_to_json(report);
  j["config"] = config_to_json(config);
  j["inputs"] = Json{{"pred", args.pred}, {"gt", args.gt}};
  j["version"] = kVersion;
  write_file_atomic(args.out, dump(j));
  out << "evaluated " << report.evaluated_frames.size() << " frames -> " << args.out << "\n";
  return kOk;
}

int cmd_synth(const SynthArgs& args, std::ostream& out) {
  const auto spec = scenario_from_json(read_json_file(args.spec));
  const auto scenario = synth::generate(spec);
  fs::create_directories(args.out_dir);
  const fs::path dir(args.out_dir);

  std::string stream;
  for (const auto& f : scenario.stream) {
    stream += to_jsonl_line(f);
    stream += '\n';
  }
  std::string truth;
  for (const auto& f : scenario.truth.frames) {
    truth += to_jsonl_line(f, spec.fps, spec.width, spec.height);
    truth += '\n';
  }
  write_file_atomic((dir / (args.stem + ".kin.jsonl")).string(), stream);
  write_file_atomic((dir / (args.stem + ".gt.jsonl")).string(), truth);
  write_file_atomic((dir / "expected.json").string(), dump(expected_to_json(scenario, spec)));
  out << "wrote " << scenario.stream.size() << " frames for " << scenario.dancer_count
      << " dancers -> " << args.out_dir << "\n";
  return kOk;
}

std::string cell(const Json& v, int precision = 3) {
  if (v.is_null()) {
    return "-";
  }
  if (v.is_string()) {
    return v.get<std::string>();
  }
  if (v.is_number_integer() || v.is_number_unsigned()) {
    return std::to_string(v.get<std::int64_t>());
  }
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(precision) << v.get<double>();
  return ss.str();
}

int cmd_report(const ReportArgs& args, std::ostream& out) {
  const auto j = read_json_file(args.profiles);
  if (j.value("schema", std::string()) != "kinetrace.profiles/1") {
    throw InputError(args.profiles + ": not a profiles report");
  }
  try {
    const auto& units = j.at("units");
    out << std::left;
    out << std::setw(6) << "id" << std::setw(12) << "role" << std::setw(7) << "steps"
        << std::setw(9) << "freq" << std::setw(9) << "rhythm" << std::setw(8) << "avg"
        << std::setw(8) << "max" << std::setw(8) << "std" << std::setw(8) << "share"
        << std::setw(14) << ("cover " + units.at("spatial_coverage").get<std::string>())
        << std::setw(12) << ("dist " + units.at("total_distance").get<std::string>())
        << "efficiency\n";
    for (const auto& d : j.at("dancers")) {
      out << std::setw(6) << cell(d.at("track_id")) << std::setw(12) << cell(d.at("role"))
          << std::setw(7) << cell(d.at("step_count")) << std::setw(9)
          << cell(d.at("step_frequency")) << std::setw(9) << cell(d.at("rhythm_consistency"), 2)
          << std::setw(8) << cell(d.at("avg_motion")) << std::setw(8) << cell(d.at("max_motion"))
          << std::setw(8) << cell(d.at("motion_std")) << std::setw(8)
          << cell(d.at("movement_percentage")) << std::setw(14)
          << cell(d.at("spatial_coverage"), 1) << std::setw(12)
          << cell(d.at("total_distance"), 1) << cell(d.at("movement_efficiency"), 2) << "\n";
    }
    if (!j.at("has_primary").get<bool>()) {
      out << "\nno primary dancer: no motion detected\n";
      return kOk;
    }
    out << "\nprimary " << cell(j.at("primary_id")) << " vs secondary "
        << cell(j.at("secondary_id")) << "\n";
    for (const auto& r : j.at("ratios")) {
      out << "  " << std::setw(22) << r.at("metric").get<std::string>() << std::setw(12)
          << cell(r.at("primary")) << std::setw(12) << cell(r.at("secondary"))
          << cell(r.at("ratio"), 4) << "\n";
    }
  } catch (const Json::exception& e) {
    throw InputError(args.profiles + ": " + e.what());
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Movement analytics over per-frame dancer detections", kToolName};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  AnalyzeArgs analyze;
  auto* a = app.add_subcommand("analyze", "Track dancers and compute movement profiles");
  a->add_option("input", analyze.input, "Interchange stream (.kin.jsonl)")->required();
  a->add_option("-o,--out-dir", analyze.out_dir, "Output directory");
  analyze.flags.attach(*a);

  EvaluateArgs evaluate_args;
  auto* e = app.add_subcommand("evaluate", "Score predictions against ground truth");
  e->add_option("--pred", evaluate_args.pred, "Interchange stream or tracks.json")->required();
  e->add_option("--gt", evaluate_args.gt, "Ground truth (.gt.jsonl)")->required();
  e->add_option("-o,--out", evaluate_args.out, "Evaluation report path");
  e->add_option("--match-iou", evaluate_args.match_iou, "Box IoU needed for a true positive");
  evaluate_args.flags.attach(*e);

  SynthArgs synth_args;
  auto* s = app.add_subcommand("synth", "Generate a scripted scenario");
  s->add_option("spec", synth_args.spec, "Scenario spec (JSON)")->required();
  s->add_option("-o,--out-dir", synth_args.out_dir, "Output directory");
  s->add_option("--stem", synth_args.stem, "Output file stem");

  ReportArgs report_args;
  auto* r = app.add_subcommand("report", "Print a profiles.json as text tables");
  r->add_option("profiles", report_args.profiles, "profiles.json")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    return kInputError;
  }

  try {
    if (a->parsed()) {
      return cmd_analyze(analyze, out);
    }
    if (e->parsed()) {
      return cmd_evaluate(evaluate_args, out);
    }
    if (s->parsed()) {
      return cmd_synth(synth_args, out);
    }
    if (r->parsed()) {
      return cmd_report(report_args, out);
    }
  } catch (const InputError& ex) {
    err << "error: " << ex.what() << "\n";
    return kInputError;
  } catch (const fs::filesystem_error& ex) {
    err << "error: " << ex.what() << "\n";
    return kInputError;
  } catch (const InvariantError& ex) {
    err << "internal error: " << ex.what() << "\n";
    return kInternalError;
  } catch (const std::exception& ex) {
    err << "internal error: " << ex.what() << "\n";
    return kInternalError;
  }
  return kInternalError;
}

}  // namespace kin::cli
