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

// In-memory model of one capture session: every stream the phone exports,
// each independently time-sorted.

#ifndef STERA_SESSION_H_
#define STERA_SESSION_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "stera/pose.h"

namespace stera {

inline constexpr std::size_t kNumHandJoints = 21;
inline constexpr std::size_t kNumHandBones = 20;

// Pinhole model in pixels of the RGB image.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  std::uint32_t width = 1;
  std::uint32_t height = 1;

  bool IsValid() const;

  friend bool operator==(const CameraIntrinsics&,
                         const CameraIntrinsics&) = default;
};

// Row-major metric depth. A value of 0 marks a missing return.
struct DepthMap {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<float> values;

  DepthMap() = default;
  DepthMap(std::uint32_t w, std::uint32_t h)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, 0.0f) {}

  float at(std::uint32_t x, std::uint32_t y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  float& at(std::uint32_t x, std::uint32_t y) {
    return values[static_cast<std::size_t>(y) * width + x];
  }

  bool IsValid() const;

  friend bool operator==(const DepthMap&, const DepthMap&) = default;
};

struct StampedDepth {
  TimestampNs ts = 0;
  DepthMap depth;

  friend bool operator==(const StampedDepth&, const StampedDepth&) = default;
};

enum class HandSide { kLeft, kRight };

std::string_view HandSideName(HandSide side);

// One detected hand as produced by the upstream estimator.
struct HandObservation {
  HandSide side = HandSide::kRight;
  double confidence = 0.0;
  std::array<Vec2, kNumHandJoints> pixels{};
  // Joint positions in the estimator's local frame (meters). Used for shape
  // only; absolute placement always comes from depth and camera pose.
  std::array<Vec3, kNumHandJoints> relative{};

  friend bool operator==(const HandObservation&,
                         const HandObservation&) = default;
};

struct HandFrame {
  TimestampNs ts = 0;
  std::vector<HandObservation> hands;

  friend bool operator==(const HandFrame&, const HandFrame&) = default;
};

// Pass-through only; nothing in the toolkit fuses IMU data.
struct ImuSample {
  TimestampNs ts = 0;
  Vec3 accel = Vec3::Zero();  // m/s^2
  Vec3 gyro = Vec3::Zero();   // rad/s

  friend bool operator==(const ImuSample&, const ImuSample&) = default;
};

struct MarkerSighting {
  TimestampNs ts = 0;
  std::int64_t marker_id = 0;
  Vec3 p_cam = Vec3::Zero();  // marker position in the camera frame

  friend bool operator==(const MarkerSighting&,
                         const MarkerSighting&) = default;
};

struct SessionLog {
  std::string session_id;
  CameraIntrinsics intrinsics;
  Trajectory poses;
  std::vector<StampedDepth> depth;
  std::vector<HandFrame> hands;
  std::vector<ImuSample> imu;
  std::vector<MarkerSighting> markers;

  friend bool operator==(const SessionLog&, const SessionLog&) = default;
};

// Stable-sorts every stream by timestamp.
void SortStreams(SessionLog& session);

// True when each stream is non-decreasing in time.
bool StreamsSorted(const SessionLog& session);

}  // namespace stera

#endif  // STERA_SESSION_H_
