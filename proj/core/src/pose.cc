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

#include "stera/pose.h"

#include <algorithm>
#include <cmath>

namespace stera {

Pose Pose::FromRotationTranslation(const Eigen::Matrix3d& r, const Vec3& t) {
  Pose p;
  p.rotation = Eigen::Quaterniond(r).normalized();
  p.translation = t;
  return p;
}

Pose Pose::Inverse() const {
  Pose inv;
  inv.rotation = rotation.conjugate();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

Pose Pose::operator*(const Pose& other) const {
  Pose out;
  out.rotation = (rotation * other.rotation).normalized();
  out.translation = rotation * other.translation + translation;
  return out;
}

double RotationAngle(const Eigen::Quaterniond& q) {
  // atan2 form stays accurate near zero, where acos(w) loses precision.
  const double vec_norm = q.vec().norm();
  return 2.0 * std::atan2(vec_norm, std::abs(q.w()));
}

std::vector<TimestampNs> Timestamps(const Trajectory& traj) {
  std::vector<TimestampNs> out;
  out.reserve(traj.size());
  for (const auto& sp : traj) out.push_back(sp.ts);
  return out;
}

Trajectory TransformTrajectory(const Pose& g, const Trajectory& traj) {
  Trajectory out;
  out.reserve(traj.size());
  for (const auto& sp : traj) out.push_back({sp.ts, g * sp.pose});
  return out;
}

}  // namespace stera
