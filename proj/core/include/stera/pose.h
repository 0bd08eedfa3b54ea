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

#ifndef STERA_POSE_H_
#define STERA_POSE_H_

#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace stera {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

// Nanoseconds since the session epoch.
using TimestampNs = std::uint64_t;

inline constexpr double kNsPerSecond = 1e9;

inline double NsToSeconds(TimestampNs t) {
  return static_cast<double>(t) / kNsPerSecond;
}

// Rigid camera-to-world transform: p_world = rotation * p_cam + translation.
// The rotation is a unit quaternion stored (w, x, y, z) on disk.
struct Pose {
  Vec3 translation = Vec3::Zero();
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();

  static Pose Identity() { return Pose{}; }
  static Pose FromRotationTranslation(const Eigen::Matrix3d& r, const Vec3& t);

  Pose Inverse() const;
  Eigen::Matrix3d RotationMatrix() const { return rotation.toRotationMatrix(); }

  // Composition: (a * b) applies b first, then a.
  Pose operator*(const Pose& other) const;
  Vec3 operator*(const Vec3& p) const { return rotation * p + translation; }

  // Exact coefficient equality (no tolerance).
  friend bool operator==(const Pose& a, const Pose& b) {
    return a.translation == b.translation &&
           a.rotation.coeffs() == b.rotation.coeffs();
  }
};

// Angle of the rotation in radians, in [0, pi].
double RotationAngle(const Eigen::Quaterniond& q);

struct StampedPose {
  TimestampNs ts = 0;
  Pose pose;

  friend bool operator==(const StampedPose&, const StampedPose&) = default;
};

using Trajectory = std::vector<StampedPose>;

std::vector<TimestampNs> Timestamps(const Trajectory& traj);

// Applies `g` on the left of every pose (g * P_i).
Trajectory TransformTrajectory(const Pose& g, const Trajectory& traj);

}  // namespace stera

#endif  // STERA_POSE_H_
