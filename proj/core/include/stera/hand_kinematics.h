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

// Ground-truth-free consistency checks for world-frame hand trajectories:
// bone-length constancy, flexion-angle plausibility and wrist dynamics.

#ifndef STERA_HAND_KINEMATICS_H_
#define STERA_HAND_KINEMATICS_H_

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "stera/geometry.h"
#include "stera/session.h"

namespace stera {

inline constexpr std::size_t kNumFingers = 5;
inline constexpr std::size_t kNumFlexionAngles = 15;
inline constexpr double kDefaultConfidenceGate = 0.3;
inline constexpr std::size_t kWristMedianWindow = 5;

enum class Finger { kThumb, kIndex, kMiddle, kRing, kPinky };
enum class JointClass { kMcp, kPip, kDip };

std::string_view FingerName(Finger f);
std::string_view JointClassName(JointClass c);

struct Bone {
  std::size_t parent;
  std::size_t child;
};

// 21-joint MANO layout: 0 wrist, then MCP, PIP, DIP, TIP per finger
// (thumb 1-4, index 5-8, middle 9-12, ring 13-16, pinky 17-20).
class HandSkeleton {
 public:
  HandSkeleton();

  const std::array<Bone, kNumHandBones>& bones() const { return bones_; }

  static constexpr std::size_t kWrist = 0;
  static constexpr std::size_t Joint(Finger f, std::size_t k) {
    return 1 + 4 * static_cast<std::size_t>(f) + k;  // k: 0 MCP .. 3 TIP
  }
  // Flexion angle index: finger * 3 + class.
  static constexpr std::size_t AngleIndex(Finger f, JointClass c) {
    return 3 * static_cast<std::size_t>(f) + static_cast<std::size_t>(c);
  }
  // (parent, joint, child) joints defining angle `index`.
  static std::array<std::size_t, 3> AngleJoints(std::size_t index);
  static std::string AngleName(std::size_t index);
  static std::string BoneName(std::size_t index);

 private:
  std::array<Bone, kNumHandBones> bones_;
};

struct AngleLimit {
  double min_deg;
  double max_deg;
};

class JointLimits {
 public:
  // MCP [-10, 90], PIP [-5, 110], DIP [-5, 90] degrees on every finger.
  static JointLimits Default();
  // {"thumb": {"mcp": [lo, hi], "pip": [...], "dip": [...]}, ...}; fingers
  // missing from the document keep their defaults.
  static JointLimits FromJson(const nlohmann::json& doc);

  const AngleLimit& at(std::size_t angle_index) const { return limits_[angle_index]; }
  AngleLimit& at(std::size_t angle_index) { return limits_[angle_index]; }
  bool Contains(std::size_t angle_index, double deg) const {
    return deg >= limits_[angle_index].min_deg && deg <= limits_[angle_index].max_deg;
  }

 private:
  std::array<AngleLimit, kNumFlexionAngles> limits_{};
};

using BoneLengths = std::array<std::optional<double>, kNumHandBones>;
using FlexionAngles = std::array<std::optional<double>, kNumFlexionAngles>;

// Bones with an invalid endpoint are nullopt.
BoneLengths ComputeBoneLengths(const WorldHandFrame& frame,
                               const HandSkeleton& skel);

// Degrees between the incoming and outgoing bone at each MCP/PIP/DIP;
// 0 for a straight chain. Angles touching an invalid joint are nullopt.
FlexionAngles ComputeFlexionAngles(const WorldHandFrame& frame,
                                   const HandSkeleton& skel);

struct BoneCvStats {
  std::array<std::optional<double>, kNumHandBones> cv_percent{};
  std::array<std::size_t, kNumHandBones> samples{};
  double median_cv = 0.0;  // over bones with >= 2 samples
};

// CV_b = 100 * sample_std / mean per bone, per side. Sides without any bone
// measured twice are omitted; throws Error(kNoData) if nothing remains.
std::map<HandSide, BoneCvStats> ComputeBoneCv(
    std::span<const WorldHandFrame> frames, const HandSkeleton& skel);

struct JointLimitStats {
  std::array<std::optional<double>, kNumFlexionAngles> within_fraction{};
  std::array<std::size_t, kNumFlexionAngles> measured{};
  std::optional<double> pooled_fraction;
  std::size_t pooled_measured = 0;
};

struct JointLimitReport {
  std::map<HandSide, JointLimitStats> per_side;
  JointLimitStats pooled;  // both hands together
};

JointLimitReport ComputeJointLimitReport(std::span<const WorldHandFrame> frames,
                                         const HandSkeleton& skel,
                                         const JointLimits& limits);

struct Distribution {
  double median = 0.0;
  double p90 = 0.0;
  double p99 = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

// Linear-interpolated percentile, q in [0, 100]. `values` must be non-empty.
double Percentile(std::vector<double> values, double q);
Distribution Summarize(const std::vector<double>& values);

struct WristDynamics {
  Distribution velocity;      // m/s
  Distribution acceleration;  // m/s^2
  std::vector<double> speeds; // per wrist sample, time order
};

// Wrist positions are median-filtered (window 5, shrinking at the ends),
// differentiated with central differences over the actual timestamps
// (one-sided at the ends), then differentiated again for acceleration.
// Sides with fewer than 3 valid wrist samples are omitted; throws
// Error(kNoData) when no side qualifies.
std::map<HandSide, WristDynamics> ComputeWristDynamics(
    std::span<const WorldHandFrame> frames);

struct FilterResult {
  std::vector<WorldHandFrame> kept;
  std::size_t low_confidence_hands = 0;
  std::size_t depth_invalid_joints = 0;  // kNoDepth joints among confident hands
  std::size_t fully_invalid_frames = 0;  // confident hands with no valid joint
};

// Drops hands below `conf_min` and hands with no valid joint.
FilterResult FilterFrames(std::span<const WorldHandFrame> frames,
                          double conf_min);

struct SideKinematics {
  std::optional<BoneCvStats> bone_cv;
  std::optional<JointLimitStats> joint_limits;
  std::optional<WristDynamics> wrist;
};

struct KinematicsReport {
  std::map<HandSide, SideKinematics> sides;
  std::optional<double> pooled_within_limit;
  std::size_t hand_frames = 0;       // hand-stream entries
  double detection_rate = 0.0;       // entries with >= 1 detected hand
  double mean_confidence = 0.0;      // over all detections
  std::size_t low_confidence_hands = 0;
  std::size_t depth_invalid_joints = 0;
  std::size_t discarded_frames = 0;  // depth-floor rule: no valid joint
};

struct KinematicsOptions {
  double confidence_gate = kDefaultConfidenceGate;
  JointLimits limits = JointLimits::Default();
};

// Full report for one session's anchored hands. Sections lacking data stay
// empty rather than failing.
KinematicsReport ComputeKinematicsReport(
    std::span<const HandFrame> hand_stream,
    std::span<const WorldHandFrame> world_frames,
    const KinematicsOptions& options = {});

}  // namespace stera

#endif  // STERA_HAND_KINEMATICS_H_
