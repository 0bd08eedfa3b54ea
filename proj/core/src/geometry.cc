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

#include "stera/geometry.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>

#include "stera/error.h"

namespace stera {
namespace {

TimestampNs AbsDiff(TimestampNs a, TimestampNs b) { return a > b ? a - b : b - a; }

}  // namespace

std::string_view JointStatusName(JointStatus status) {
  switch (status) {
    case JointStatus::kValid: return "valid";
    case JointStatus::kNoDepth: return "no_depth";
    case JointStatus::kOutOfImage: return "out_of_image";
    case JointStatus::kNoPose: return "no_pose";
    case JointStatus::kNoDepthFrame: return "no_depth_frame";
  }
  return "?";
}

Vec3 TransformPoint(const Pose& pose, const Vec3& p_cam) {
  return pose.rotation * p_cam + pose.translation;
}

Vec3 Unproject(const CameraIntrinsics& intr, double u, double v, double z) {
  if (!(z > kDepthFloorMeters)) {
    throw Error(ErrorCode::kInvalidDepth,
                "depth " + std::to_string(z) + " m is at or below the floor");
  }
  return {(u - intr.cx) * z / intr.fx, (v - intr.cy) * z / intr.fy, z};
}

Vec2 Project(const CameraIntrinsics& intr, const Vec3& p_cam) {
  return {intr.fx * p_cam.x() / p_cam.z() + intr.cx,
          intr.fy * p_cam.y() / p_cam.z() + intr.cy};
}

std::optional<double> SampleDepth(const DepthMap& depth, double u, double v) {
  const double ru = std::round(u);
  const double rv = std::round(v);
  if (!(ru >= 0 && rv >= 0 && ru < depth.width && rv < depth.height)) {
    throw Error(ErrorCode::kOutOfBounds,
                "pixel (" + std::to_string(u) + ", " + std::to_string(v) +
                    ") outside depth map");
  }
  const auto cu = static_cast<std::int64_t>(ru);
  const auto cv = static_cast<std::int64_t>(rv);
  std::array<double, 9> window{};
  std::size_t n = 0;
  for (std::int64_t y = std::max<std::int64_t>(0, cv - 1);
       y <= std::min<std::int64_t>(depth.height - 1, cv + 1); ++y) {
    for (std::int64_t x = std::max<std::int64_t>(0, cu - 1);
         x <= std::min<std::int64_t>(depth.width - 1, cu + 1); ++x) {
      const float d = depth.at(static_cast<std::uint32_t>(x),
                               static_cast<std::uint32_t>(y));
      if (d > 0.0f) window[n++] = d;
    }
  }
  if (n == 0) return std::nullopt;
  std::sort(window.begin(), window.begin() + n);
  if (n % 2 == 1) return window[n / 2];
  return 0.5 * (window[n / 2 - 1] + window[n / 2]);
}

std::vector<std::pair<std::size_t, std::size_t>> Associate(
    std::span<const TimestampNs> a, std::span<const TimestampNs> b,
    TimestampNs tolerance) {
  struct Candidate {
    TimestampNs diff, lo, hi;
    std::size_t i, j;
  };
  std::vector<Candidate> candidates;
  std::size_t start = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const TimestampNs lower = a[i] > tolerance ? a[i] - tolerance : 0;
    while (start < b.size() && b[start] < lower) ++start;
    for (std::size_t j = start; j < b.size(); ++j) {
      if (b[j] > a[i] && b[j] - a[i] > tolerance) break;
      candidates.push_back({AbsDiff(a[i], b[j]), std::min(a[i], b[j]),
                            std::max(a[i], b[j]), i, j});
    }
  }
  // The (diff, lo, hi) key depends only on the timestamp values, so swapping
  // the roles of a and b visits pairs in the same order.
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& x, const Candidate& y) {
              return std::tie(x.diff, x.lo, x.hi, x.i, x.j) <
                     std::tie(y.diff, y.lo, y.hi, y.i, y.j);
            });
  std::vector<bool> used_a(a.size(), false);
  std::vector<bool> used_b(b.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& c : candidates) {
    if (used_a[c.i] || used_b[c.j]) continue;
    used_a[c.i] = used_b[c.j] = true;
    pairs.emplace_back(c.i, c.j);
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

std::optional<std::size_t> NearestIndex(std::span<const TimestampNs> sorted,
                                        TimestampNs t, TimestampNs tolerance) {
  if (sorted.empty()) return std::nullopt;
  auto it = std::lower_bound(sorted.begin(), sorted.end(), t);
  std::size_t best = sorted.size();
  TimestampNs best_diff = std::numeric_limits<TimestampNs>::max();
  if (it != sorted.end()) {
    best = static_cast<std::size_t>(it - sorted.begin());
    best_diff = *it - t;
  }
  if (it != sorted.begin()) {
    const auto prev = static_cast<std::size_t>(it - sorted.begin()) - 1;
    // Ties go to the earlier sample.
    if (t - sorted[prev] <= best_diff) {
      best = prev;
      best_diff = t - sorted[prev];
    }
  }
  if (best_diff > tolerance) return std::nullopt;
  return best;
}

std::size_t WorldHandFrame::NumValid() const {
  return static_cast<std::size_t>(
      std::count(status.begin(), status.end(), JointStatus::kValid));
}

std::vector<WorldHandFrame> AnchorHands(const SessionLog& session,
                                        const AnchorOptions& options) {
  if (session.poses.empty()) {
    throw Error(ErrorCode::kMissingStream, "session has no pose stream");
  }
  if (session.depth.empty()) {
    throw Error(ErrorCode::kMissingStream, "session has no depth stream");
  }
  const auto& intr = session.intrinsics;
  const auto pose_ts = Timestamps(session.poses);
  std::vector<TimestampNs> depth_ts;
  depth_ts.reserve(session.depth.size());
  for (const auto& d : session.depth) depth_ts.push_back(d.ts);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<WorldHandFrame> out;
  for (const auto& frame : session.hands) {
    const auto pose_idx = NearestIndex(pose_ts, frame.ts, options.tolerance);
    const auto depth_idx = NearestIndex(depth_ts, frame.ts, options.tolerance);
    for (const auto& obs : frame.hands) {
      WorldHandFrame w;
      w.ts = frame.ts;
      w.side = obs.side;
      w.confidence = obs.confidence;
      w.joints.fill(Vec3::Constant(nan));
      for (std::size_t k = 0; k < kNumHandJoints; ++k) {
        if (!pose_idx) {
          w.status[k] = JointStatus::kNoPose;
          continue;
        }
        if (!depth_idx) {
          w.status[k] = JointStatus::kNoDepthFrame;
          continue;
        }
        const DepthMap& dm = session.depth[*depth_idx].depth;
        // Depth maps may be lower resolution than the RGB image.
        const double su = static_cast<double>(dm.width) / intr.width;
        const double sv = static_cast<double>(dm.height) / intr.height;
        const double du = (obs.pixels[k].x() + 0.5) * su - 0.5;
        const double dv = (obs.pixels[k].y() + 0.5) * sv - 0.5;
        std::optional<double> z;
        try {
          z = SampleDepth(dm, du, dv);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kOutOfBounds) throw;
          w.status[k] = JointStatus::kOutOfImage;
          continue;
        }
        if (!z || *z <= kDepthFloorMeters) {
          w.status[k] = JointStatus::kNoDepth;
          continue;
        }
        const Vec3 p_cam =
            Unproject(intr, obs.pixels[k].x(), obs.pixels[k].y(), *z);
        w.joints[k] = TransformPoint(session.poses[*pose_idx].pose, p_cam);
        w.status[k] = JointStatus::kValid;
      }
      out.push_back(w);
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const WorldHandFrame& x, const WorldHandFrame& y) {
                     return std::tie(x.ts, x.side) < std::tie(y.ts, y.side);
                   });
  return out;
}

}  // namespace stera
