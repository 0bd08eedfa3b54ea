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

#include "stera/traj_metrics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include <Eigen/SVD>

#include "stera/error.h"

namespace stera {
namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Cumulative path length at each pose index.
std::vector<double> CumulativeLength(const Trajectory& traj) {
  std::vector<double> cum(traj.size(), 0.0);
  for (std::size_t i = 1; i < traj.size(); ++i) {
    cum[i] = cum[i - 1] +
             (traj[i].pose.translation - traj[i - 1].pose.translation).norm();
  }
  return cum;
}

}  // namespace

double TrajectoryLength(const Trajectory& traj) {
  double length = 0.0;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    length += (traj[i].pose.translation - traj[i - 1].pose.translation).norm();
  }
  return length;
}

double RelativeAte(double ate_rmse, double traj_length) {
  return traj_length > 0.0 ? 100.0 * ate_rmse / traj_length : 0.0;
}

Pose UmeyamaAlign(std::span<const Vec3> est, std::span<const Vec3> gt) {
  if (est.size() != gt.size()) {
    throw Error(ErrorCode::kDegenerateInput,
                "point lists differ in length: " + std::to_string(est.size()) +
                    " vs " + std::to_string(gt.size()));
  }
  if (est.size() < 3) {
    throw Error(ErrorCode::kDegenerateInput,
                "need at least 3 point pairs, got " + std::to_string(est.size()));
  }
  const double n = static_cast<double>(est.size());
  Vec3 mu_est = Vec3::Zero();
  Vec3 mu_gt = Vec3::Zero();
  for (std::size_t i = 0; i < est.size(); ++i) {
    mu_est += est[i];
    mu_gt += gt[i];
  }
  mu_est /= n;
  mu_gt /= n;

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < est.size(); ++i) {
    cov += (gt[i] - mu_gt) * (est[i] - mu_est).transpose();
  }
  cov /= n;
  if (!cov.allFinite() || cov.norm() == 0.0) {
    throw Error(ErrorCode::kDegenerateInput, "zero cross-covariance");
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov,
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d& u = svd.matrixU();
  const Eigen::Matrix3d& v = svd.matrixV();
  Eigen::Matrix3d s = Eigen::Matrix3d::Identity();
  if (u.determinant() * v.determinant() < 0.0) s(2, 2) = -1.0;
  const Eigen::Matrix3d r = u * s * v.transpose();
  return Pose::FromRotationTranslation(r, mu_gt - r * mu_est);
}

AteResult ComputeAte(const Trajectory& est, const Trajectory& gt,
                     TimestampNs tolerance) {
  const auto est_ts = Timestamps(est);
  const auto gt_ts = Timestamps(gt);
  const auto pairs = Associate(est_ts, gt_ts, tolerance);
  if (pairs.size() < 3) {
    throw Error(ErrorCode::kInsufficientOverlap,
                "only " + std::to_string(pairs.size()) +
                    " associated pose pairs (need 3)");
  }
  std::vector<Vec3> est_pts, gt_pts;
  est_pts.reserve(pairs.size());
  gt_pts.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    est_pts.push_back(est[i].pose.translation);
    gt_pts.push_back(gt[j].pose.translation);
  }

  AteResult r;
  r.alignment = UmeyamaAlign(est_pts, gt_pts);
  double sq = 0.0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    sq += (r.alignment * est_pts[k] - gt_pts[k]).squaredNorm();
  }
  r.n_pairs = pairs.size();
  r.ate_rmse = std::sqrt(sq / static_cast<double>(pairs.size()));
  r.traj_length = TrajectoryLength(gt);
  r.rel_ate = RelativeAte(r.ate_rmse, r.traj_length);
  return r;
}

RpeResult ComputeRpe(const Trajectory& est, const Trajectory& gt,
                     double delta_seconds, TimestampNs tolerance) {
  if (!(delta_seconds > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "RPE delta must be positive");
  }
  const auto pairs = Associate(Timestamps(est), Timestamps(gt), tolerance);
  std::vector<TimestampNs> paired_gt_ts;
  paired_gt_ts.reserve(pairs.size());
  for (const auto& [i, j] : pairs) paired_gt_ts.push_back(gt[j].ts);

  const auto delta_ns =
      static_cast<TimestampNs>(std::llround(delta_seconds * kNsPerSecond));
  double sq_trans = 0.0;
  double sq_rot = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto next = NearestIndex(paired_gt_ts, paired_gt_ts[k] + delta_ns,
                                   tolerance);
    if (!next || *next <= k) continue;
    const Pose& p_i = est[pairs[k].first].pose;
    const Pose& p_j = est[pairs[*next].first].pose;
    const Pose& q_i = gt[pairs[k].second].pose;
    const Pose& q_j = gt[pairs[*next].second].pose;
    const Pose e = (q_i.Inverse() * q_j).Inverse() * (p_i.Inverse() * p_j);
    sq_trans += e.translation.squaredNorm();
    const double angle = RotationAngle(e.rotation) * kRadToDeg;
    sq_rot += angle * angle;
    ++count;
  }
  if (count == 0) {
    throw Error(ErrorCode::kInsufficientOverlap,
                "no associated pose pair spans the RPE interval");
  }
  RpeResult r;
  r.n_intervals = count;
  r.rpe_trans = std::sqrt(sq_trans / static_cast<double>(count));
  r.rpe_rot = std::sqrt(sq_rot / static_cast<double>(count));
  return r;
}

TrajectoryMetrics EvaluateTrajectory(const Trajectory& est,
                                     const Trajectory& gt,
                                     double rpe_delta_seconds,
                                     TimestampNs tolerance) {
  const AteResult ate = ComputeAte(est, gt, tolerance);
  const RpeResult rpe = ComputeRpe(est, gt, rpe_delta_seconds, tolerance);
  TrajectoryMetrics m;
  m.ate_rmse = ate.ate_rmse;
  m.rel_ate = ate.rel_ate;
  m.rpe_trans = rpe.rpe_trans;
  m.rpe_rot = rpe.rpe_rot;
  m.n_pairs = ate.n_pairs;
  m.traj_length = ate.traj_length;
  return m;
}

DriftReport MarkerDrift(const SessionLog& session, TimestampNs tolerance) {
  if (session.poses.empty()) {
    throw Error(ErrorCode::kMissingStream, "session has no pose stream");
  }
  const auto pose_ts = Timestamps(session.poses);
  const auto cum = CumulativeLength(session.poses);

  struct Located {
    TimestampNs ts;
    std::size_t pose_idx;
    Vec3 world;
  };
  std::map<std::int64_t, std::vector<Located>> by_marker;
  for (const auto& m : session.markers) {
    const auto idx = NearestIndex(pose_ts, m.ts, tolerance);
    if (!idx) continue;
    by_marker[m.marker_id].push_back(
        {m.ts, *idx, TransformPoint(session.poses[*idx].pose, m.p_cam)});
  }

  DriftReport report;
  for (auto& [id, sightings] : by_marker) {
    std::stable_sort(sightings.begin(), sightings.end(),
                     [](const Located& a, const Located& b) { return a.ts < b.ts; });
    const Located& ref = sightings.front();
    for (std::size_t k = 1; k < sightings.size(); ++k) {
      const Located& s = sightings[k];
      if (s.ts <= ref.ts) continue;
      DriftEntry e;
      e.marker_id = id;
      e.t_reference = ref.ts;
      e.t_revisit = s.ts;
      e.drift = (s.world - ref.world).norm();
      const double path = cum[s.pose_idx] - cum[ref.pose_idx];
      if (path > 0.0) e.drift_percent = 100.0 * e.drift / path;
      report.entries.push_back(e);
    }
  }
  if (report.entries.empty()) {
    throw Error(ErrorCode::kNoRevisit,
                "no marker was sighted twice with an associated pose");
  }
  return report;
}

double ScalingLawLoss(double hours) {
  if (!(hours > 0.0)) {
    throw Error(ErrorCode::kNonPositiveHours,
                "hours must be positive, got " + std::to_string(hours));
  }
  return 0.024 - 0.003 * std::log(hours);
}

}  // namespace stera
