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

#include "stera/json_io.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <string>

#include "stera/error.h"

namespace stera {
namespace {

OJson Num(double v) { return std::isfinite(v) ? OJson(v) : OJson(nullptr); }

OJson Num(const std::optional<double>& v) {
  return v ? Num(*v) : OJson(nullptr);
}

OJson Vec(const Vec3& v) { return OJson::array({Num(v.x()), Num(v.y()), Num(v.z())}); }

OJson ToJson(const BoneCvStats& s) {
  OJson bones = OJson::array();
  for (std::size_t b = 0; b < kNumHandBones; ++b) {
    OJson e;
    e["bone"] = HandSkeleton::BoneName(b);
    e["cv_percent"] = Num(s.cv_percent[b]);
    e["samples"] = s.samples[b];
    bones.push_back(std::move(e));
  }
  OJson j;
  j["median_cv_percent"] = Num(s.median_cv);
  j["bones"] = std::move(bones);
  return j;
}

OJson ToJson(const JointLimitStats& s) {
  OJson angles = OJson::array();
  for (std::size_t a = 0; a < kNumFlexionAngles; ++a) {
    OJson e;
    e["angle"] = HandSkeleton::AngleName(a);
    e["within_fraction"] = Num(s.within_fraction[a]);
    e["measured"] = s.measured[a];
    angles.push_back(std::move(e));
  }
  OJson j;
  j["pooled_fraction"] = Num(s.pooled_fraction);
  j["pooled_measured"] = s.pooled_measured;
  j["angles"] = std::move(angles);
  return j;
}

OJson ToJson(const WristDynamics& w) {
  OJson j;
  j["velocity_mps"] = ToJson(w.velocity);
  j["acceleration_mps2"] = ToJson(w.acceleration);
  return j;
}

OJson ToJson(const LevelDurations& d) {
  OJson j;
  j["count"] = d.count;
  j["mean_s"] = Num(d.mean_s);
  j["median_s"] = Num(d.median_s);
  return j;
}

template <typename T>
OJson Optional(const std::optional<T>& v) {
  return v ? ToJson(*v) : OJson(nullptr);
}

}  // namespace

OJson ToJson(const CameraIntrinsics& intr) {
  OJson j;
  j["fx"] = intr.fx;
  j["fy"] = intr.fy;
  j["cx"] = intr.cx;
  j["cy"] = intr.cy;
  j["width"] = intr.width;
  j["height"] = intr.height;
  return j;
}

OJson ToJson(const Pose& pose) {
  const auto& q = pose.rotation;
  OJson j;
  j["t"] = Vec(pose.translation);
  j["q"] = OJson::array({q.w(), q.x(), q.y(), q.z()});
  return j;
}

OJson ToJson(const TrajectoryMetrics& m) {
  OJson j;
  j["ate_rmse_m"] = Num(m.ate_rmse);
  j["rel_ate_percent"] = Num(m.rel_ate);
  j["rpe_trans_m"] = Num(m.rpe_trans);
  j["rpe_rot_deg"] = Num(m.rpe_rot);
  j["n_pairs"] = m.n_pairs;
  j["traj_length_m"] = Num(m.traj_length);
  return j;
}

OJson ToJson(const DriftReport& r) {
  OJson entries = OJson::array();
  double max_drift = 0.0;
  for (const auto& e : r.entries) {
    OJson je;
    je["marker_id"] = e.marker_id;
    je["t_reference_ns"] = e.t_reference;
    je["t_revisit_ns"] = e.t_revisit;
    je["drift_m"] = Num(e.drift);
    je["drift_percent"] = Num(e.drift_percent);
    entries.push_back(std::move(je));
    max_drift = std::max(max_drift, e.drift);
  }
  OJson j;
  j["revisits"] = r.entries.size();
  j["max_drift_m"] = Num(max_drift);
  j["entries"] = std::move(entries);
  return j;
}

OJson ToJson(const Distribution& d) {
  OJson j;
  j["median"] = Num(d.median);
  j["p90"] = Num(d.p90);
  j["p99"] = Num(d.p99);
  j["max"] = Num(d.max);
  j["count"] = d.count;
  return j;
}

OJson ToJson(const KinematicsReport& r) {
  OJson sides = OJson::object();
  for (const auto& [side, k] : r.sides) {
    OJson js;
    js["bone_cv"] = Optional(k.bone_cv);
    js["joint_limits"] = Optional(k.joint_limits);
    js["wrist"] = Optional(k.wrist);
    sides[std::string(HandSideName(side))] = std::move(js);
  }
  OJson j;
  j["hand_frames"] = r.hand_frames;
  j["detection_rate"] = Num(r.detection_rate);
  j["mean_confidence"] = Num(r.mean_confidence);
  j["low_confidence_hands"] = r.low_confidence_hands;
  j["depth_invalid_joints"] = r.depth_invalid_joints;
  j["discarded_frames"] = r.discarded_frames;
  j["pooled_within_limit"] = Num(r.pooled_within_limit);
  j["sides"] = std::move(sides);
  return j;
}

OJson ToJson(const LabelQualityReport& r) {
  OJson j;
  j["span_count"] = r.span_count;
  j["zero_duration_count"] = r.zero_duration_count;
  j["overlap_count"] = r.overlap_count;
  j["overlap_fraction"] = Num(r.overlap_fraction);
  j["mean_words"] = Num(r.mean_words);
  j["mean_modifiers"] = Num(r.mean_modifiers);
  j["preposition_fraction"] = Num(r.preposition_fraction);
  return j;
}

OJson ToJson(const LabelDefect& d) {
  OJson j;
  j["kind"] = DefectKindName(d.kind);
  j["span_ids"] = d.span_ids;
  return j;
}

OJson ToJson(const TreeStats& s) {
  OJson hist = OJson::array();
  for (const auto& [size, count] : s.spans_per_episode) {
    hist.push_back(OJson::array({size, count}));
  }
  OJson j;
  j["atomic"] = ToJson(s.atomic);
  j["episode"] = ToJson(s.episode);
  j["sub_goal"] = ToJson(s.sub_goal);
  j["session"] = ToJson(s.session);
  j["episode_to_atomic"] = Num(s.episode_to_atomic);
  j["subgoal_to_episode"] = Num(s.subgoal_to_episode);
  j["session_to_subgoal"] = Num(s.session_to_subgoal);
  j["spans_per_episode_histogram"] = std::move(hist);
  j["spans_per_episode_median"] = Num(s.spans_per_episode_median);
  j["spans_per_episode_mean"] = Num(s.spans_per_episode_mean);
  j["fraction_le_10"] = Num(s.fraction_le_10);
  return j;
}

OJson DefectsToJson(std::span<const LabelDefect> defects) {
  OJson a = OJson::array();
  for (const auto& d : defects) a.push_back(ToJson(d));
  return a;
}

OJson ViolationsToJson(std::span<const TreeViolation> violations) {
  OJson a = OJson::array();
  for (const auto& v : violations) a.push_back(ViolationToJson(v));
  return a;
}

OJson SessionSummaryJson(const SessionLog& session,
                         const ReadDiagnostics& diagnostics) {
  std::optional<TimestampNs> first, last;
  auto extend = [&](TimestampNs t) {
    first = first ? std::min(*first, t) : t;
    last = last ? std::max(*last, t) : t;
  };
  for (const auto& p : session.poses) extend(p.ts);
  for (const auto& d : session.depth) extend(d.ts);
  for (const auto& h : session.hands) extend(h.ts);
  for (const auto& i : session.imu) extend(i.ts);
  for (const auto& m : session.markers) extend(m.ts);

  std::size_t detections = 0;
  for (const auto& h : session.hands) detections += h.hands.size();

  OJson streams;
  streams["poses"] = session.poses.size();
  streams["depth"] = session.depth.size();
  streams["hands"] = session.hands.size();
  streams["hand_detections"] = detections;
  streams["imu"] = session.imu.size();
  streams["markers"] = session.markers.size();

  OJson diag;
  diag["skipped_channels"] = diagnostics.skipped_channels;
  diag["skipped_messages"] = diagnostics.skipped_messages;
  diag["ignored_records"] = diagnostics.ignored_records;

  OJson j;
  j["session_id"] = session.session_id;
  j["intrinsics"] = ToJson(session.intrinsics);
  j["streams"] = std::move(streams);
  j["start_ns"] = first ? OJson(*first) : OJson(nullptr);
  j["end_ns"] = last ? OJson(*last) : OJson(nullptr);
  j["diagnostics"] = std::move(diag);
  return j;
}

OJson AnchorSummaryJson(std::span<const WorldHandFrame> frames) {
  std::map<JointStatus, std::size_t> by_status;
  for (const auto& f : frames) {
    for (JointStatus s : f.status) ++by_status[s];
  }
  OJson invalid = OJson::object();
  for (JointStatus s : {JointStatus::kNoDepth, JointStatus::kOutOfImage,
                        JointStatus::kNoPose, JointStatus::kNoDepthFrame}) {
    invalid[std::string(JointStatusName(s))] = by_status[s];
  }
  OJson j;
  j["world_hand_frames"] = frames.size();
  j["joints"] = frames.size() * kNumHandJoints;
  j["valid_joints"] = by_status[JointStatus::kValid];
  j["invalid_joints"] = std::move(invalid);
  return j;
}

OJson WorldHandsToJson(std::span<const WorldHandFrame> frames) {
  OJson a = OJson::array();
  for (const auto& f : frames) {
    OJson joints = OJson::array();
    OJson status = OJson::array();
    for (std::size_t k = 0; k < kNumHandJoints; ++k) {
      joints.push_back(f.valid(k) ? Vec(f.joints[k]) : OJson(nullptr));
      status.push_back(JointStatusName(f.status[k]));
    }
    OJson j;
    j["ts_ns"] = f.ts;
    j["side"] = HandSideName(f.side);
    j["confidence"] = Num(f.confidence);
    j["joints"] = std::move(joints);
    j["status"] = std::move(status);
    a.push_back(std::move(j));
  }
  return a;
}

std::string DumpJson(const OJson& j) { return j.dump(2) + "\n"; }

void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string() + " for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  f.close();
  if (!f) throw Error(ErrorCode::kIoFailure, "write failed: " + path.string());
}

void WriteJsonFile(const std::filesystem::path& path, const OJson& j) {
  WriteTextFile(path, DumpJson(j));
}

nlohmann::json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw Error(ErrorCode::kInvalidArgument, path.string() + " is not valid JSON");
  }
  return j;
}

}  // namespace stera
