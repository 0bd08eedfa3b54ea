// Copyright 2026 The STERA Authors
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

// Batch orchestration: ingest, anchoring, kinematics, label QA, hierarchy,
// trajectory metrics and export over many sessions with a worker pool.

#ifndef STERA_PIPELINE_H_
#define STERA_PIPELINE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stera/geometry.h"
#include "stera/hierarchy.h"
#include "stera/json_io.h"
#include "stera/labels.h"
#include "stera/session.h"

namespace stera {

// One session and its optional sidecars. A bare path in the config picks up
// <stem>.spans.jsonl, <stem>.tree.json and <stem>.gt.mcap next to it when
// they exist.
struct SessionInput {
  std::filesystem::path log;
  std::optional<std::filesystem::path> spans;
  std::optional<std::filesystem::path> tree;
  std::optional<std::filesystem::path> ground_truth;
};

SessionInput DiscoverSidecars(const std::filesystem::path& log);

struct PipelineConfig {
  std::vector<SessionInput> inputs;
  std::filesystem::path out_dir = "stera_out";
  std::size_t workers = 1;
  TimestampNs tolerance = kDefaultAssociationToleranceNs;
  double rpe_delta = 1.0;  // s
  double confidence_gate = 0.3;
  std::optional<std::filesystem::path> joint_limits_file;
  std::optional<std::filesystem::path> lexicon_file;
  std::int64_t episode_gap_ns = kDefaultEpisodeGapNs;
  std::int64_t subgoal_gap_ns = kDefaultSubgoalGapNs;
  // Trees come from the external generator instead of the gap builder when
  // sessions have spans but no tree file.
  std::optional<GeneratorEndpoint> generator;
  std::size_t generator_retries = 3;
  bool export_episodes = true;
  // Which findings make the run exit nonzero. Session failures always do.
  bool fail_on_tree_violations = true;
  bool fail_on_label_defects = false;
};

// Keys mirror the struct: "inputs" (strings or {"log", "spans", "tree",
// "ground_truth"}), "out_dir", "workers", "tolerance_ms", "rpe_delta_s",
// "confidence_gate", "joint_limits", "lexicon", "episode_gap_s",
// "subgoal_gap_s", "generator" {"url", "token", "timeout_s", "retries"},
// "export", "strict" {"tree", "labels"}. Relative paths resolve against
// `base_dir`. Throws Error(kInvalidArgument) on bad values.
PipelineConfig PipelineConfigFromJson(const nlohmann::json& j,
                                      const std::filesystem::path& base_dir);

struct ExportedFile {
  std::string path;    // relative to the export directory, '/' separated
  std::string sha256;  // lowercase hex
  std::size_t bytes = 0;
};

struct ExportManifest {
  std::vector<ExportedFile> files;  // sorted by path
};

// Writes meta.json, hierarchy.json, episodes/<episode-id>.jsonl and
// manifest.json under `out_dir`. Each episode file starts with a header row
// (instructions at all three levels and the episode's atomic spans) followed
// by one row per camera pose inside [episode.start, episode.end]: timestamp,
// pose, per-side world joints with validity, and the enclosing span id.
// Throws Error(kInvalidTree) if the tree fails ValidateTree against `spans`,
// Error(kIoFailure) on write errors.
ExportManifest ExportTrainingSet(const SessionLog& session,
                                 const InstructionTree& tree,
                                 std::span<const AtomicSpan> spans,
                                 std::span<const WorldHandFrame> world_hands,
                                 const std::filesystem::path& out_dir,
                                 TimestampNs tolerance = kDefaultAssociationToleranceNs);

std::string Sha256Hex(std::string_view data);

struct SessionOutcome {
  std::string session_id;  // from the log, or the file stem if unreadable
  std::string input;       // log path as configured
  bool ok = false;
  std::string error_code;  // empty when ok
  std::string error_message;
  std::size_t label_defects = 0;
  std::size_t tree_violations = 0;
  std::string report_path;  // relative to out_dir
};

struct RunResult {
  std::vector<SessionOutcome> sessions;  // sorted by (session id, input)
  int exit_code = 0;
  OJson summary;
};

// Runs every input through the per-session stages on `config.workers`
// threads and writes reports/<id>.json, export/<id>/ and summary.json under
// out_dir. Output bytes do not depend on the worker count. A failing session
// is recorded in the summary and never stops the others.
RunResult RunPipeline(const PipelineConfig& config);

// Runs fn(0..n-1) on up to `workers` threads. The first exception thrown by
// fn is rethrown after all threads join.
void ParallelFor(std::size_t n, std::size_t workers,
                 const std::function<void(std::size_t)>& fn);

}  // namespace stera

#endif  // STERA_PIPELINE_H_
