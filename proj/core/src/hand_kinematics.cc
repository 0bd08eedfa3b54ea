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

#include "stera/hand_kinematics.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stera/error.h"

namespace stera {
namespace {

constexpr std::array<Finger, kNumFingers> kFingers = {
    Finger::kThumb, Finger::kIndex, Finger::kMiddle, Finger::kRing,
    Finger::kPinky};
constexpr std::array<JointClass, 3> kClasses = {JointClass::kMcp,
                                                JointClass::kPip,
                                                JointClass::kDip};

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct WristSample {
  TimestampNs ts;
  Vec3 p;
};

std::vector<Vec3> MedianFilter(const std::vector<WristSample>& s,
                               std::size_t window) {
  const std::size_t half = window / 2;
  const std::size_t n = s.size();
  std::vector<Vec3> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Symmetric shrink at the ends keeps the filter time-reversible.
    const std::size_t h = std::min({half, i, n - 1 - i});
    for (int axis = 0; axis < 3; ++axis) {
      std::vector<double> w;
      w.reserve(2 * h + 1);
      for (std::size_t k = i - h; k <= i + h; ++k) w.push_back(s[k].p[axis]);
      out[i][axis] = Median(std::move(w));
    }
  }
  return out;
}

// Central differences over uneven timestamps, one-sided at the ends.
std::vector<Vec3> Differentiate(const std::vector<Vec3>& x,
                                const std::vector<double>& t) {
  const std::size_t n = x.size();
  std::vector<Vec3> d(n, Vec3::Zero());
  if (n < 2) return d;
  d[0] = (x[1] - x[0]) / (t[1] - t[0]);
  d[n - 1] = (x[n - 1] - x[n - 2]) / (t[n - 1] - t[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    d[i] = (x[i + 1] - x[i - 1]) / (t[i + 1] - t[i - 1]);
  }
  return d;
}

void AccumulateLimits(const WorldHandFrame& f, const HandSkeleton& skel,
                      const JointLimits& limits, JointLimitStats& stats,
                      std::array<std::size_t, kNumFlexionAngles>& inside) {
  const auto angles = ComputeFlexionAngles(f, skel);
  for (std::size_t a = 0; a < kNumFlexionAngles; ++a) {
    if (!angles[a]) continue;
    ++stats.measured[a];
    if (limits.Contains(a, *angles[a])) ++inside[a];
  }
}

void FinalizeLimits(JointLimitStats& stats,
                    const std::array<std::size_t, kNumFlexionAngles>& inside) {
  std::size_t total = 0;
  std::size_t total_inside = 0;
  for (std::size_t a = 0; a < kNumFlexionAngles; ++a) {
    if (stats.measured[a] > 0) {
      stats.within_fraction[a] =
          static_cast<double>(inside[a]) / static_cast<double>(stats.measured[a]);
    }
    total += stats.measured[a];
    total_inside += inside[a];
  }
  stats.pooled_measured = total;
  if (total > 0) {
    stats.pooled_fraction =
        static_cast<double>(total_inside) / static_cast<double>(total);
  }
}

}  // namespace

std::string_view FingerName(Finger f) {
  switch (f) {
    case Finger::kThumb: return "thumb";
    case Finger::kIndex: return "index";
    case Finger::kMiddle: return "middle";
    case Finger::kRing: return "ring";
    case Finger::kPinky: return "pinky";
  }
  return "?";
}

std::string_view JointClassName(JointClass c) {
  switch (c) {
    case JointClass::kMcp: return "mcp";
    case JointClass::kPip: return "pip";
    case JointClass::kDip: return "dip";
  }
  return "?";
}

HandSkeleton::HandSkeleton() {
  for (Finger f : kFingers) {
    const std::size_t base = 4 * static_cast<std::size_t>(f);
    bones_[base] = {kWrist, Joint(f, 0)};
    for (std::size_t k = 1; k < 4; ++k) {
      bones_[base + k] = {Joint(f, k - 1), Joint(f, k)};
    }
  }
}

std::array<std::size_t, 3> HandSkeleton::AngleJoints(std::size_t index) {
  const auto f = static_cast<Finger>(index / 3);
  const std::size_t k = index % 3;
  const std::size_t parent = k == 0 ? kWrist : Joint(f, k - 1);
  return {parent, Joint(f, k), Joint(f, k + 1)};
}

std::string HandSkeleton::AngleName(std::size_t index) {
  return std::string(FingerName(static_cast<Finger>(index / 3))) + "_" +
         std::string(JointClassName(static_cast<JointClass>(index % 3)));
}

std::string HandSkeleton::BoneName(std::size_t index) {
  static constexpr std::array<std::string_view, 4> kSegments = {
      "metacarpal", "proximal", "intermediate", "distal"};
  return std::string(FingerName(static_cast<Finger>(index / 4))) + "_" +
         std::string(kSegments[index % 4]);
}

JointLimits JointLimits::Default() {
  JointLimits l;
  for (Finger f : kFingers) {
    l.at(HandSkeleton::AngleIndex(f, JointClass::kMcp)) = {-10.0, 90.0};
    l.at(HandSkeleton::AngleIndex(f, JointClass::kPip)) = {-5.0, 110.0};
    l.at(HandSkeleton::AngleIndex(f, JointClass::kDip)) = {-5.0, 90.0};
  }
  return l;
}

JointLimits JointLimits::FromJson(const nlohmann::json& doc) {
  if (!doc.is_object()) {
    throw Error(ErrorCode::kInvalidArgument, "joint limits must be a JSON object");
  }
  JointLimits l = Default();
  for (const auto& [key, value] : doc.items()) {
    auto it = std::find_if(kFingers.begin(), kFingers.end(),
                           [&](Finger f) { return FingerName(f) == key; });
    if (it == kFingers.end()) {
      throw Error(ErrorCode::kInvalidArgument, "unknown finger '" + key + "'");
    }
    for (JointClass c : kClasses) {
      const std::string cls(JointClassName(c));
      if (!value.contains(cls)) continue;
      const auto& range = value.at(cls);
      if (!range.is_array() || range.size() != 2 || !range[0].is_number() ||
          !range[1].is_number()) {
        throw Error(ErrorCode::kInvalidArgument,
                    key + "." + cls + " must be [lo, hi]");
      }
      AngleLimit lim{range[0].get<double>(), range[1].get<double>()};
      if (!(lim.min_deg < lim.max_deg)) {
        throw Error(ErrorCode::kInvalidArgument, key + "." + cls + ": lo >= hi");
      }
      l.at(HandSkeleton::AngleIndex(*it, c)) = lim;
    }
  }
  return l;
}

BoneLengths ComputeBoneLengths(const WorldHandFrame& frame,
                               const HandSkeleton& skel) {
  BoneLengths out;
  for (std::size_t b = 0; b < kNumHandBones; ++b) {
    const Bone& bone = skel.bones()[b];
    if (frame.valid(bone.parent) && frame.valid(bone.child)) {
      out[b] = (frame.joints[bone.child] - frame.joints[bone.parent]).norm();
    }
  }
  return out;
}

FlexionAngles ComputeFlexionAngles(const WorldHandFrame& frame,
                                   const HandSkeleton& /*skel*/) {
  FlexionAngles out;
  for (std::size_t a = 0; a < kNumFlexionAngles; ++a) {
    const auto [p, j, c] = HandSkeleton::AngleJoints(a);
    if (!frame.valid(p) || !frame.valid(j) || !frame.valid(c)) continue;
    const Vec3 in = frame.joints[j] - frame.joints[p];
    const Vec3 outv = frame.joints[c] - frame.joints[j];
    if (in.norm() == 0.0 || outv.norm() == 0.0) continue;
    out[a] = std::atan2(in.cross(outv).norm(), in.dot(outv)) * 180.0 /
             std::numbers::pi;
  }
  return out;
}

std::map<HandSide, BoneCvStats> ComputeBoneCv(
    std::span<const WorldHandFrame> frames, const HandSkeleton& skel) {
  std::map<HandSide, std::array<std::vector<double>, kNumHandBones>> lengths;
  for (const auto& f : frames) {
    const auto bl = ComputeBoneLengths(f, skel);
    auto& side = lengths[f.side];
    for (std::size_t b = 0; b < kNumHandBones; ++b) {
      if (bl[b]) side[b].push_back(*bl[b]);
    }
  }
  std::map<HandSide, BoneCvStats> out;
  for (const auto& [side, per_bone] : lengths) {
    BoneCvStats stats;
    std::vector<double> cvs;
    for (std::size_t b = 0; b < kNumHandBones; ++b) {
      const auto& v = per_bone[b];
      stats.samples[b] = v.size();
      if (v.size() < 2) continue;
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      if (!(mean > 0.0)) continue;
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
      stats.cv_percent[b] = 100.0 * sd / mean;
      cvs.push_back(*stats.cv_percent[b]);
    }
    if (cvs.empty()) continue;
    stats.median_cv = Median(std::move(cvs));
    out[side] = stats;
  }
  if (out.empty()) {
    throw Error(ErrorCode::kNoData, "no bone measured in two or more frames");
  }
  return out;
}

JointLimitReport ComputeJointLimitReport(std::span<const WorldHandFrame> frames,
                                         const HandSkeleton& skel,
                                         const JointLimits& limits) {
  JointLimitReport report;
  std::map<HandSide, std::array<std::size_t, kNumFlexionAngles>> inside;
  std::array<std::size_t, kNumFlexionAngles> pooled_inside{};
  for (const auto& f : frames) {
    auto& stats = report.per_side[f.side];
    auto& in = inside[f.side];
    AccumulateLimits(f, skel, limits, stats, in);
    AccumulateLimits(f, skel, limits, report.pooled, pooled_inside);
  }
  for (auto& [side, stats] : report.per_side) FinalizeLimits(stats, inside[side]);
  FinalizeLimits(report.pooled, pooled_inside);
  return report;
}

double Percentile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Distribution Summarize(const std::vector<double>& values) {
  Distribution d;
  d.count = values.size();
  if (values.empty()) return d;
  d.median = Percentile(values, 50.0);
  d.p90 = Percentile(values, 90.0);
  d.p99 = Percentile(values, 99.0);
  d.max = *std::max_element(values.begin(), values.end());
  return d;
}

std::map<HandSide, WristDynamics> ComputeWristDynamics(
    std::span<const WorldHandFrame> frames) {
  std::map<HandSide, std::vector<WristSample>> samples;
  for (const auto& f : frames) {
    if (f.valid(HandSkeleton::kWrist)) {
      samples[f.side].push_back({f.ts, f.joints[HandSkeleton::kWrist]});
    }
  }
  std::map<HandSide, WristDynamics> out;
  for (auto& [side, s] : samples) {
    std::stable_sort(s.begin(), s.end(), [](const WristSample& a, const WristSample& b) {
      return a.ts < b.ts;
    });
    // Duplicate timestamps would make the differences singular.
    s.erase(std::unique(s.begin(), s.end(),
                        [](const WristSample& a, const WristSample& b) {
                          return a.ts == b.ts;
                        }),
            s.end());
    if (s.size() < 3) continue;
    std::vector<double> t(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) t[i] = NsToSeconds(s[i].ts);
    const auto smoothed = MedianFilter(s, kWristMedianWindow);
    const auto vel = Differentiate(smoothed, t);
    const auto acc = Differentiate(vel, t);
    WristDynamics wd;
    std::vector<double> acc_mag;
    wd.speeds.reserve(vel.size());
    for (const auto& v : vel) wd.speeds.push_back(v.norm());
    for (const auto& a : acc) acc_mag.push_back(a.norm());
    wd.velocity = Summarize(wd.speeds);
    wd.acceleration = Summarize(acc_mag);
    out[side] = std::move(wd);
  }
  if (out.empty()) {
    throw Error(ErrorCode::kNoData, "fewer than 3 valid wrist samples per hand");
  }
  return out;
}

FilterResult FilterFrames(std::span<const WorldHandFrame> frames,
                          double conf_min) {
  FilterResult r;
  for (const auto& f : frames) {
    if (f.confidence < conf_min) {
      ++r.low_confidence_hands;
      continue;
    }
    r.depth_invalid_joints += static_cast<std::size_t>(
        std::count(f.status.begin(), f.status.end(), JointStatus::kNoDepth));
    if (f.NumValid() == 0) {
      ++r.fully_invalid_frames;
      continue;
    }
    r.kept.push_back(f);
  }
  return r;
}

KinematicsReport ComputeKinematicsReport(
    std::span<const HandFrame> hand_stream,
    std::span<const WorldHandFrame> world_frames,
    const KinematicsOptions& options) {
  KinematicsReport report;
  report.hand_frames = hand_stream.size();
  std::size_t detected_frames = 0;
  std::size_t detections = 0;
  double conf_sum = 0.0;
  for (const auto& hf : hand_stream) {
    if (!hf.hands.empty()) ++detected_frames;
    for (const auto& h : hf.hands) {
      ++detections;
      conf_sum += h.confidence;
    }
  }
  if (!hand_stream.empty()) {
    report.detection_rate = static_cast<double>(detected_frames) /
                            static_cast<double>(hand_stream.size());
  }
  if (detections > 0) report.mean_confidence = conf_sum / static_cast<double>(detections);

  const FilterResult filtered = FilterFrames(world_frames, options.confidence_gate);
  report.low_confidence_hands = filtered.low_confidence_hands;
  report.depth_invalid_joints = filtered.depth_invalid_joints;
  report.discarded_frames = filtered.fully_invalid_frames;

  const HandSkeleton skel;
  std::map<HandSide, BoneCvStats> cv;
  std::map<HandSide, WristDynamics> wrist;
  try {
    cv = ComputeBoneCv(filtered.kept, skel);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoData) throw;
  }
  try {
    wrist = ComputeWristDynamics(filtered.kept);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoData) throw;
  }
  const auto limits = ComputeJointLimitReport(filtered.kept, skel, options.limits);

  for (const auto& f : filtered.kept) report.sides[f.side];
  for (auto& [side, sk] : report.sides) {
    if (auto it = cv.find(side); it != cv.end()) sk.bone_cv = it->second;
    if (auto it = wrist.find(side); it != wrist.end()) {
      sk.wrist = std::move(it->second);
      sk.wrist->speeds.clear();  // per-sample speeds are not part of the report
    }
    if (auto it = limits.per_side.find(side); it != limits.per_side.end()) {
      sk.joint_limits = it->second;
    }
  }
  report.pooled_within_limit = limits.pooled.pooled_fraction;
  return report;
}

}  // namespace stera
