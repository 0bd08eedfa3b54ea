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

// Report serialization. Every object uses a fixed key order and nlohmann's
// shortest round-trip float formatting, so equal values give equal bytes.
// Absent optionals and non-finite numbers serialize as null.

#ifndef STERA_JSON_IO_H_
#define STERA_JSON_IO_H_

#include <filesystem>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "stera/geometry.h"
#include "stera/hand_kinematics.h"
#include "stera/hierarchy.h"
#include "stera/labels.h"
#include "stera/log_format.h"
#include "stera/traj_metrics.h"

namespace stera {

using OJson = nlohmann::ordered_json;

OJson ToJson(const CameraIntrinsics& intr);
OJson ToJson(const Pose& pose);  // {"t": [x, y, z], "q": [w, x, y, z]}
OJson ToJson(const TrajectoryMetrics& m);
OJson ToJson(const DriftReport& r);
OJson ToJson(const KinematicsReport& r);
OJson ToJson(const LabelQualityReport& r);
OJson ToJson(const LabelDefect& d);
OJson ToJson(const TreeStats& s);
OJson ToJson(const Distribution& d);

OJson DefectsToJson(std::span<const LabelDefect> defects);
OJson ViolationsToJson(std::span<const TreeViolation> violations);

// Stream counts, time range and reader diagnostics of one session.
OJson SessionSummaryJson(const SessionLog& session,
                         const ReadDiagnostics& diagnostics);

// Anchoring yield: frames, valid joints and invalid joints by status.
OJson AnchorSummaryJson(std::span<const WorldHandFrame> frames);

// Full world-hand dump used by `stera anchor`.
OJson WorldHandsToJson(std::span<const WorldHandFrame> frames);

// Two-space indented text with a trailing newline.
std::string DumpJson(const OJson& j);

// Throws Error(kIoFailure) on open/write failure.
void WriteTextFile(const std::filesystem::path& path, const std::string& text);
void WriteJsonFile(const std::filesystem::path& path, const OJson& j);

// Throws Error(kIoFailure) if unreadable, Error(kInvalidArgument) if not JSON.
nlohmann::json ReadJsonFile(const std::filesystem::path& path);

}  // namespace stera

#endif  // STERA_JSON_IO_H_
