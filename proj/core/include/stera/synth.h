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

// Deterministic synthetic sessions with known ground truth. Every generator
// is a pure function of its arguments; randomness comes from stera::Rng.

#ifndef STERA_SYNTH_H_
#define STERA_SYNTH_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "stera/geometry.h"
#include "stera/hierarchy.h"
#include "stera/labels.h"
#include "stera/session.h"

namespace stera {

enum class MotionKind { kLine, kLoop, kSpin, kStationary, kReachCycle };

std::string_view MotionKindName(MotionKind kind);

// Camera motion. Samples: round(duration * rate) poses spanning [0, duration]
// with both endpoints included, so a line covers exactly speed * duration and
// a loop closes on its first pose.
//   line        constant velocity `speed` along +x, identity rotation
//   loop        circle of circumference speed * duration in the x-y plane,
//               heading tangent to the path
//   spin        fixed position, yaw at `yaw_rate` about +z
//   stationary  identity poses
//   reach_cycle seated capture: small head sway (2 cm, 3 deg) around the
//               origin; hands perform reach cycles at `speed`
struct MotionProfile {
  MotionKind kind = MotionKind::kStationary;
  double speed = 0.0;     // m/s
  double yaw_rate = 0.0;  // rad/s
  double duration = 10.0; // s
  double rate = 30.0;     // Hz
  std::uint64_t seed = 0;

  std::size_t NumSamples() const;
};

struct NoiseModel {
  double position_sigma = 0.0;      // per axis, m
  double rotation_sigma_deg = 0.0;  // per axis, small-angle
  double drift_rate = 0.0;          // m of drift per m travelled
  std::uint64_t seed = 0;
};

Trajectory GenTrajectory(const MotionProfile& profile);

// Adds Gaussian position noise, small-angle rotation noise and a drift of
// drift_rate * (distance travelled so far) along a seeded unit direction.
// An all-zero model returns the input unchanged.
Trajectory PerturbTrajectory(const Trajectory& traj, const NoiseModel& noise);

using HandTemplate = std::array<double, kNumHandBones>;  // bone lengths, m

// Adult-sized MANO-like bone lengths in skeleton bone order.
HandTemplate DefaultHandTemplate();

struct HandSessionOptions {
  // 256x192 pinhole, the depth resolution of phone LiDAR.
  CameraIntrinsics intrinsics{220.0, 220.0, 128.0, 96.0, 256, 192};
  // true: hands stay where they start in the world while the camera moves.
  // false: hands perform reach cycles relative to the camera.
  bool static_in_world = false;
  bool both_hands = true;
  double hand_depth = 0.5;  // wrist distance in front of the camera, m
  std::string session_id = "synthetic";
};

struct GroundTruthHand {
  TimestampNs ts = 0;
  HandSide side = HandSide::kRight;
  std::array<Vec3, kNumHandJoints> joints{};  // world frame
};

struct HandSession {
  SessionLog session;
  std::vector<GroundTruthHand> truth;  // sorted by (ts, side)
};

// Camera from GenTrajectory(profile); rigid-bone hands posed from the
// template with sinusoidal finger flexion inside the default joint limits;
// pixels by projection; sparse depth maps holding the true z at every joint
// pixel. Throws Error(kJointBehindCamera) if any joint lands at z <= 0.01 m.
HandSession GenHandSession(const MotionProfile& profile,
                           const HandTemplate& bone_lengths, std::uint64_t seed,
                           const HandSessionOptions& options = {});

// World-frame hand frames posed straight from the template (no camera, no
// depth), optionally with i.i.d. per-axis Gaussian joint noise. Both hands,
// `num_frames` frames at `rate` Hz.
std::vector<WorldHandFrame> GenWorldHands(const HandTemplate& bone_lengths,
                                          std::size_t num_frames, double rate,
                                          double joint_noise_sigma,
                                          std::uint64_t seed);

struct DefectPlan {
  std::size_t zero_duration = 0;
  std::size_t overlap = 0;
};

// `n` spans, sorted by start, whose DetectDefects output contains exactly
// the planned ZeroDuration and Overlap counts. Durations are 2-8 s; pauses
// are mostly 0.2-2 s with occasional 11-30 s and 125-150 s breaks. Throws Error(kInfeasiblePlan)
// when overlap > n - 1 or zero_duration > n - overlap.
std::vector<AtomicSpan> GenLabelCorpus(std::size_t n, const DefectPlan& plan,
                                       std::uint64_t seed);

struct MarkerSessionOptions {
  std::int64_t marker_id = 0;
  double marker_distance = 1.0;  // m in front of the first camera pose
  // Sightings at the first, middle and last pose.
  Vec3 revisit_offset = Vec3::Zero();  // added to the poses of revisits
  std::string session_id = "synthetic-marker";
};

// A static marker sighted at session start, midpoint and end, with exact
// camera-frame observations from the true trajectory. The revisit poses are
// then shifted by `revisit_offset`, which is the drift MarkerDrift recovers.
SessionLog GenMarkerSession(const MotionProfile& profile,
                            const MarkerSessionOptions& options = {});

// Everything `stera synth` writes for one session.
struct SynthSpec {
  std::string session_id = "synthetic";
  MotionProfile motion;
  NoiseModel noise;
  bool hands = true;
  bool static_hands = false;
  bool markers = true;
  std::size_t label_count = 20;
  DefectPlan label_defects;
};

struct SynthOutput {
  SessionLog session;      // estimated poses (noise applied), hands, markers
  Trajectory ground_truth; // clean poses
  std::vector<AtomicSpan> spans;
  InstructionTree tree;    // gap-built over `spans`
};

SynthSpec SynthSpecFromJson(const nlohmann::json& j);
SynthOutput GenSynthetic(const SynthSpec& spec);

MotionProfile MotionProfileFromJson(const nlohmann::json& j);
NoiseModel NoiseModelFromJson(const nlohmann::json& j);

}  // namespace stera

#endif  // STERA_SYNTH_H_
