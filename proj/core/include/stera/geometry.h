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

#ifndef STERA_GEOMETRY_H_
#define STERA_GEOMETRY_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "stera/pose.h"
#include "stera/session.h"

namespace stera {

// Depth returns at or below this range are treated as missing.
inline constexpr double kDepthFloorMeters = 0.01;

// Roughly half a 30 Hz frame interval.
inline constexpr TimestampNs kDefaultAssociationToleranceNs = 20'000'000;

// R(q) * p + t, camera frame to world frame.
Vec3 TransformPoint(const Pose& pose, const Vec3& p_cam);

// Pinhole back-projection. Throws Error(kInvalidDepth) when z <= 0.01 m.
Vec3 Unproject(const CameraIntrinsics& intr, double u, double v, double z);

// Forward pinhole map; p.z() must be positive.
Vec2 Project(const CameraIntrinsics& intr, const Vec3& p_cam);

// Median of the valid (> 0) depths in the 3x3 window around
// (round(u), round(v)), clipped to the image. Even counts average the two
// middle values. nullopt when the window holds no valid return.
// Throws Error(kOutOfBounds) when the rounded center lies outside the map.
std::optional<double> SampleDepth(const DepthMap& depth, double u, double v);

// Greedy one-to-one nearest-neighbour matching of two sorted timestamp lists.
// Candidate pairs within `tolerance` are accepted in order of increasing
// |ta - tb|; the result is sorted by the index into `a`.
std::vector<std::pair<std::size_t, std::size_t>> Associate(
    std::span<const TimestampNs> a, std::span<const TimestampNs> b,
    TimestampNs tolerance);

// Index of the element of `sorted` closest to `t`, if within `tolerance`.
std::optional<std::size_t> NearestIndex(std::span<const TimestampNs> sorted,
                                        TimestampNs t, TimestampNs tolerance);

enum class JointStatus : std::uint8_t {
  kValid,
  kNoDepth,       // empty window or depth at or below the floor
  kOutOfImage,    // joint pixel outside the depth map
  kNoPose,        // no camera pose within tolerance
  kNoDepthFrame,  // no depth map within tolerance
};

std::string_view JointStatusName(JointStatus status);

struct WorldHandFrame {
  TimestampNs ts = 0;
  HandSide side = HandSide::kRight;
  double confidence = 0.0;
  // Invalid joints hold NaN, never a finite placeholder.
  std::array<Vec3, kNumHandJoints> joints{};
  std::array<JointStatus, kNumHandJoints> status{};

  bool valid(std::size_t joint) const {
    return status[joint] == JointStatus::kValid;
  }
  std::size_t NumValid() const;
};

struct AnchorOptions {
  TimestampNs tolerance = kDefaultAssociationToleranceNs;
};

// Places every detected hand joint in the world frame from depth and the
// camera pose nearest to the hand frame. One output per detected hand,
// sorted by (timestamp, side). Throws Error(kMissingStream) when the pose or
// depth stream is empty.
std::vector<WorldHandFrame> AnchorHands(const SessionLog& session,
                                        const AnchorOptions& options = {});

}  // namespace stera

#endif  // STERA_GEOMETRY_H_
