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

// Trajectory accuracy and drift metrics: rigid alignment, ATE, RPE and
// marker-revisit drift.

#ifndef STERA_TRAJ_METRICS_H_
#define STERA_TRAJ_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "stera/geometry.h"
#include "stera/pose.h"
#include "stera/session.h"

namespace stera {

inline constexpr double kDefaultRpeDeltaSeconds = 1.0;

struct TrajectoryMetrics {
  double ate_rmse = 0.0;    // meters
  double rel_ate = 0.0;     // percent of ground-truth path length
  double rpe_trans = 0.0;   // meters, RMSE
  double rpe_rot = 0.0;     // degrees, RMSE
  std::size_t n_pairs = 0;  // associated pose pairs
  double traj_length = 0.0; // ground-truth path length, meters
};

struct AteResult {
  double ate_rmse = 0.0;
  double rel_ate = 0.0;
  std::size_t n_pairs = 0;
  double traj_length = 0.0;
  Pose alignment;  // maps est into the gt frame
};

struct RpeResult {
  double rpe_trans = 0.0;
  double rpe_rot = 0.0;
  std::size_t n_intervals = 0;
};

// Sum of consecutive translation deltas; 0 for fewer than two poses.
double TrajectoryLength(const Trajectory& traj);

// 100 * ate_rmse / traj_length, or 0 when the length is 0.
double RelativeAte(double ate_rmse, double traj_length);

// Least-squares rigid transform T (no scale) minimising sum |T*est_i - gt_i|^2.
// Rotation from the SVD of the centred cross-covariance with a reflection
// guard. Throws Error(kDegenerateInput) for fewer than three pairs,
// mismatched sizes or a zero covariance.
Pose UmeyamaAlign(std::span<const Vec3> est, std::span<const Vec3> gt);

// Throws Error(kInsufficientOverlap) with fewer than 3 associated pairs.
AteResult ComputeAte(const Trajectory& est, const Trajectory& gt,
                     TimestampNs tolerance = kDefaultAssociationToleranceNs);

// Relative pose error over a fixed time interval. For each associated pair i
// with another associated pair j whose gt time is nearest t_i + delta (within
// tolerance): E = (Q_i^-1 Q_j)^-1 (P_i^-1 P_j), P estimate, Q ground truth.
// Throws Error(kInsufficientOverlap) when no interval can be formed.
RpeResult ComputeRpe(const Trajectory& est, const Trajectory& gt,
                     double delta_seconds = kDefaultRpeDeltaSeconds,
                     TimestampNs tolerance = kDefaultAssociationToleranceNs);

TrajectoryMetrics EvaluateTrajectory(
    const Trajectory& est, const Trajectory& gt,
    double rpe_delta_seconds = kDefaultRpeDeltaSeconds,
    TimestampNs tolerance = kDefaultAssociationToleranceNs);

struct DriftEntry {
  std::int64_t marker_id = 0;
  TimestampNs t_reference = 0;
  TimestampNs t_revisit = 0;
  double drift = 0.0;  // meters
  // 100 * drift / camera path length in [t_reference, t_revisit];
  // nullopt when the camera did not move.
  std::optional<double> drift_percent;
};

struct DriftReport {
  std::vector<DriftEntry> entries;  // sorted by (marker id, revisit time)
};

// World position of each sighting from the nearest pose; the first sighting
// of a marker is its reference. Throws Error(kNoRevisit) when no marker is
// seen twice with a pose, Error(kMissingStream) without poses.
DriftReport MarkerDrift(const SessionLog& session,
                        TimestampNs tolerance = kDefaultAssociationToleranceNs);

// Log-linear data scaling law L(D) = 0.024 - 0.003 ln(D), D in hours.
// Throws Error(kNonPositiveHours) for D <= 0.
double ScalingLawLoss(double hours);

}  // namespace stera

#endif  // STERA_TRAJ_METRICS_H_
