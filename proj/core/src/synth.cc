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

#include "stera/synth.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <tuple>

#include "stera/error.h"
#include "stera/hand_kinematics.h"
#include "stera/rng.h"

namespace stera {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDegToRad = kPi / 180.0;

// Seeds for independent sub-streams derived from one user seed.
std::uint64_t SubSeed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed ^ (0xA5A5A5A5A5A5A5A5ULL * (stream + 1));
  return SplitMix64(s);
}

Eigen::Quaterniond YawQuat(double yaw) {
  return Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
}

// In-plane direction of each finger's metacarpal for a right hand, measured
// from camera-up (-y) towards +x. Left hands mirror it. The fan is wide enough
// that neighbouring fingertips rarely share a depth patch.
constexpr std::array<double, kNumFingers> kFingerSpreadDeg = {-60.0, -20.0, 0.0,
                                                              18.0, 36.0};
// Peak flexion per joint class. Keeping the sum at 60 degrees stops distal
// bones from foreshortening to a single pixel.
constexpr std::array<double, 3> kMaxFlexionDeg = {25.0, 25.0, 10.0};

struct HandPoseParams {
  std::array<double, kNumFingers> phase{};
  Eigen::Matrix3d tilt = Eigen::Matrix3d::Identity();
  Vec3 wrist_base = Vec3::Zero();
  std::array<double, 3> lissajous_phase{};
  double flex_freq = 0.5;
};

// Joints in the camera-aligned hand frame, wrist at the origin. Flexion bends
// each finger towards the camera (-z) within its spread plane.
std::array<Vec3, kNumHandJoints> PoseHandLocal(
    const HandTemplate& bones, HandSide side,
    const std::array<std::array<double, 3>, kNumFingers>& flexion_deg) {
  std::array<Vec3, kNumHandJoints> j{};
  j[HandSkeleton::kWrist] = Vec3::Zero();
  const double mirror = side == HandSide::kLeft ? -1.0 : 1.0;
  for (std::size_t f = 0; f < kNumFingers; ++f) {
    const double phi = mirror * kFingerSpreadDeg[f] * kDegToRad;
    const Vec3 d0(std::sin(phi), -std::cos(phi), 0.0);
    const Vec3 toward_camera(0.0, 0.0, -1.0);
    double bend = 0.0;
    Vec3 prev = Vec3::Zero();
    for (std::size_t k = 0; k < 4; ++k) {
      if (k > 0) bend += flexion_deg[f][k - 1] * kDegToRad;
      const Vec3 dir = std::cos(bend) * d0 + std::sin(bend) * toward_camera;
      const Vec3 next = prev + bones[4 * f + k] * dir;
      j[HandSkeleton::Joint(static_cast<Finger>(f), k)] = next;
      prev = next;
    }
  }
  return j;
}

HandPoseParams DrawHandParams(Rng& rng, HandSide side, double depth) {
  HandPoseParams p;
  for (auto& ph : p.phase) ph = rng.Uniform(0.0, 2.0 * kPi);
  const double rx = rng.Uniform(-10.0, 10.0) * kDegToRad;
  const double ry = rng.Uniform(-10.0, 10.0) * kDegToRad;
  const double rz = rng.Uniform(-8.0, 8.0) * kDegToRad;
  p.tilt = (Eigen::AngleAxisd(rz, Vec3::UnitZ()) *
            Eigen::AngleAxisd(ry, Vec3::UnitY()) *
            Eigen::AngleAxisd(rx, Vec3::UnitX()))
               .toRotationMatrix();
  const double x = side == HandSide::kLeft ? -0.15 : 0.15;
  p.wrist_base = Vec3(x, 0.09, depth);
  for (auto& ph : p.lissajous_phase) ph = rng.Uniform(0.0, 2.0 * kPi);
  p.flex_freq = rng.Uniform(0.3, 0.7);
  return p;
}

std::array<std::array<double, 3>, kNumFingers> FlexionAt(
    const HandPoseParams& p, double t) {
  std::array<std::array<double, 3>, kNumFingers> out{};
  for (std::size_t f = 0; f < kNumFingers; ++f) {
    const double s = 0.5 * (1.0 - std::cos(2.0 * kPi * p.flex_freq * t + p.phase[f]));
    for (std::size_t c = 0; c < 3; ++c) out[f][c] = kMaxFlexionDeg[c] * s;
  }
  return out;
}

// Wrist offset of a reach cycle; amplitudes (2, 2, 3) cm, peak speed of the
// dominant axis roughly `speed`.
Vec3 ReachOffset(const HandPoseParams& p, double speed, double t) {
  const Vec3 amp(0.02, 0.02, 0.03);
  const double base_freq = std::max(speed, 0.05) / (2.0 * kPi * amp.z());
  const Vec3 freq(base_freq * 0.8, base_freq * 0.6, base_freq);
  Vec3 off;
  for (int a = 0; a < 3; ++a) {
    off[a] = amp[a] * std::sin(2.0 * kPi * freq[a] * t + p.lissajous_phase[a]);
  }
  return off;
}

std::array<Vec3, kNumHandJoints> HandInCamera(const HandTemplate& bones,
                                              HandSide side,
                                              const HandPoseParams& p,
                                              double speed, double t) {
  const auto local = PoseHandLocal(bones, side, FlexionAt(p, t));
  const Vec3 wrist = p.wrist_base + ReachOffset(p, speed, t);
  std::array<Vec3, kNumHandJoints> out{};
  for (std::size_t k = 0; k < kNumHandJoints; ++k) out[k] = p.tilt * local[k] + wrist;
  return out;
}

// A joint covers a 3x3 patch around its rounded pixel. Overlapping patches
// keep the nearer surface, as a depth sensor would, so a joint hidden behind
// another reads the occluder's depth.
void SplatDepth(DepthMap& depth, const Vec2& px, float z) {
  const auto cu = static_cast<std::int64_t>(std::round(px.x()));
  const auto cv = static_cast<std::int64_t>(std::round(px.y()));
  for (std::int64_t v = cv - 1; v <= cv + 1; ++v) {
    for (std::int64_t u = cu - 1; u <= cu + 1; ++u) {
      if (u < 0 || v < 0 || u >= depth.width || v >= depth.height) continue;
      float& d = depth.at(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v));
      if (d == 0.0f || z < d) d = z;
    }
  }
}

}  // namespace


std::string_view MotionKindName(MotionKind kind) {
  switch (kind) {
    case MotionKind::kLine: return "line";
    case MotionKind::kLoop: return "loop";
    case MotionKind::kSpin: return "spin";
    case MotionKind::kStationary: return "stationary";
    case MotionKind::kReachCycle: return "reach_cycle";
  }
  return "?";
}

std::size_t MotionProfile::NumSamples() const {
  return static_cast<std::size_t>(std::llround(duration * rate));
}

Trajectory GenTrajectory(const MotionProfile& profile) {
  if (!(profile.duration > 0.0) || !(profile.rate > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "duration and rate must be positive");
  }
  const std::size_t n = profile.NumSamples();
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "profile yields fewer than 2 samples");
  const double dt = profile.duration / static_cast<double>(n - 1);
  const double dt_ns = dt * kNsPerSecond;

  Trajectory traj;
  traj.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = dt * static_cast<double>(i);
    StampedPose sp;
    sp.ts = static_cast<TimestampNs>(std::llround(dt_ns * static_cast<double>(i)));
    switch (profile.kind) {
      case MotionKind::kStationary:
        break;
      case MotionKind::kLine:
        sp.pose.translation = Vec3(profile.speed * t, 0.0, 0.0);
        break;
      case MotionKind::kLoop: {
        const double radius = profile.speed * profile.duration / (2.0 * kPi);
        // Last sample lands exactly on the first.
        const double theta = i + 1 == n ? 0.0 : 2.0 * kPi * t / profile.duration;
        sp.pose.translation =
            Vec3(radius * std::sin(theta), radius * (1.0 - std::cos(theta)), 0.0);
        sp.pose.rotation = YawQuat(theta);
        break;
      }
      case MotionKind::kSpin:
        sp.pose.rotation = YawQuat(profile.yaw_rate * t);
        break;
      case MotionKind::kReachCycle:
        sp.pose.translation = Vec3(0.02 * std::sin(2.0 * kPi * 0.2 * t), 0.0,
                                   0.01 * std::sin(2.0 * kPi * 0.35 * t));
        sp.pose.rotation = YawQuat(3.0 * kDegToRad * std::sin(2.0 * kPi * 0.25 * t));
        break;
    }
    traj.push_back(sp);
  }
  return traj;
}

Trajectory PerturbTrajectory(const Trajectory& traj, const NoiseModel& noise) {
  if (noise.position_sigma < 0 || noise.rotation_sigma_deg < 0 || noise.drift_rate < 0) {
    throw Error(ErrorCode::kInvalidArgument, "noise parameters must be >= 0");
  }
  Rng rng(noise.seed);
  Vec3 drift_dir(rng.Gaussian(), rng.Gaussian(), rng.Gaussian());
  drift_dir.normalize();
  const double rot_sigma = noise.rotation_sigma_deg * kDegToRad;

  Trajectory out = traj;
  double travelled = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i > 0) {
      travelled += (traj[i].pose.translation - traj[i - 1].pose.translation).norm();
    }
    Pose& p = out[i].pose;
    if (noise.position_sigma > 0.0) {
      for (int a = 0; a < 3; ++a) p.translation[a] += rng.Gaussian(0.0, noise.position_sigma);
    }
    if (rot_sigma > 0.0) {
      const Vec3 w(rng.Gaussian(0.0, rot_sigma), rng.Gaussian(0.0, rot_sigma),
                   rng.Gaussian(0.0, rot_sigma));
      const double angle = w.norm();
      if (angle > 0.0) {
        p.rotation = (p.rotation * Eigen::Quaterniond(Eigen::AngleAxisd(angle, w / angle)))
                         .normalized();
      }
    }
    if (noise.drift_rate > 0.0) p.translation += noise.drift_rate * travelled * drift_dir;
  }
  return out;
}

HandTemplate DefaultHandTemplate() {
  // Per finger: wrist->MCP, MCP->PIP, PIP->DIP, DIP->TIP.
  return {0.040, 0.035, 0.030, 0.025,   // thumb
          0.085, 0.040, 0.025, 0.020,   // index
          0.085, 0.045, 0.028, 0.021,   // middle
          0.080, 0.041, 0.027, 0.020,   // ring
          0.075, 0.033, 0.020, 0.019};  // pinky
}

HandSession GenHandSession(const MotionProfile& profile,
                           const HandTemplate& bone_lengths, std::uint64_t seed,
                           const HandSessionOptions& options) {
  for (double b : bone_lengths) {
    if (!(b > 0.0)) throw Error(ErrorCode::kInvalidArgument, "bone lengths must be positive");
  }
  const auto& intr = options.intrinsics;
  if (!intr.IsValid()) throw Error(ErrorCode::kInvalidArgument, "invalid intrinsics");

  Rng rng(SubSeed(seed, 1));
  std::vector<HandSide> sides = {HandSide::kLeft, HandSide::kRight};
  if (!options.both_hands) sides = {HandSide::kRight};
  std::vector<HandPoseParams> params;
  for (HandSide s : sides) params.push_back(DrawHandParams(rng, s, options.hand_depth));

  HandSession out;
  SessionLog& session = out.session;
  session.session_id = options.session_id;
  session.intrinsics = intr;
  session.poses = GenTrajectory(profile);

  // World joints held fixed when hands are static in the world.
  std::vector<std::array<Vec3, kNumHandJoints>> static_world;
  if (options.static_in_world) {
    const Pose& first = session.poses.front().pose;
    for (std::size_t h = 0; h < sides.size(); ++h) {
      auto cam = HandInCamera(bone_lengths, sides[h], params[h], profile.speed, 0.0);
      for (auto& p : cam) p = TransformPoint(first, p);
      static_world.push_back(cam);
    }
  }

  for (const auto& sp : session.poses) {
    const double t = NsToSeconds(sp.ts);
    const Pose cam_from_world = sp.pose.Inverse();
    DepthMap depth(intr.width, intr.height);
    HandFrame frame;
    frame.ts = sp.ts;
    for (std::size_t h = 0; h < sides.size(); ++h) {
      std::array<Vec3, kNumHandJoints> cam{};
      GroundTruthHand truth;
      truth.ts = sp.ts;
      truth.side = sides[h];
      if (options.static_in_world) {
        truth.joints = static_world[h];
        for (std::size_t k = 0; k < kNumHandJoints; ++k) {
          cam[k] = cam_from_world * truth.joints[k];
        }
      } else {
        cam = HandInCamera(bone_lengths, sides[h], params[h], profile.speed, t);
        for (std::size_t k = 0; k < kNumHandJoints; ++k) {
          truth.joints[k] = TransformPoint(sp.pose, cam[k]);
        }
      }
      HandObservation obs;
      obs.side = sides[h];
      obs.confidence = rng.Uniform(0.55, 0.95);
      for (std::size_t k = 0; k < kNumHandJoints; ++k) {
        if (!(cam[k].z() > kDepthFloorMeters)) {
          throw Error(ErrorCode::kJointBehindCamera,
                      "joint " + std::to_string(k) + " at z=" +
                          std::to_string(cam[k].z()) + " m, t=" + std::to_string(t) +
                          " s; use a gentler camera profile");
        }
        obs.pixels[k] = Project(intr, cam[k]);
        obs.relative[k] = cam[k] - cam[HandSkeleton::kWrist];
        SplatDepth(depth, obs.pixels[k], static_cast<float>(cam[k].z()));
      }
      frame.hands.push_back(obs);
      out.truth.push_back(truth);
    }
    session.depth.push_back({sp.ts, std::move(depth)});
    session.hands.push_back(std::move(frame));
    session.imu.push_back({sp.ts, Vec3::Zero(), Vec3::Zero()});
  }
  return out;
}

std::vector<WorldHandFrame> GenWorldHands(const HandTemplate& bone_lengths,
                                          std::size_t num_frames, double rate,
                                          double joint_noise_sigma,
                                          std::uint64_t seed) {
  if (!(rate > 0.0)) throw Error(ErrorCode::kInvalidArgument, "rate must be positive");
  Rng rng(SubSeed(seed, 2));
  const std::array<HandSide, 2> sides = {HandSide::kLeft, HandSide::kRight};
  std::array<HandPoseParams, 2> params = {DrawHandParams(rng, sides[0], 0.5),
                                          DrawHandParams(rng, sides[1], 0.5)};
  std::vector<WorldHandFrame> out;
  out.reserve(2 * num_frames);
  for (std::size_t i = 0; i < num_frames; ++i) {
    const double t = static_cast<double>(i) / rate;
    for (std::size_t h = 0; h < 2; ++h) {
      WorldHandFrame f;
      f.ts = static_cast<TimestampNs>(std::llround(t * kNsPerSecond));
      f.side = sides[h];
      f.confidence = 0.9;
      f.joints = HandInCamera(bone_lengths, sides[h], params[h], 0.3, t);
      if (joint_noise_sigma > 0.0) {
        for (auto& j : f.joints) {
          for (int a = 0; a < 3; ++a) j[a] += rng.Gaussian(0.0, joint_noise_sigma);
        }
      }
      f.status.fill(JointStatus::kValid);
      out.push_back(f);
    }
  }
  return out;
}

std::vector<AtomicSpan> GenLabelCorpus(std::size_t n, const DefectPlan& plan,
                                       std::uint64_t seed) {
  if (plan.overlap > (n == 0 ? 0 : n - 1) || plan.zero_duration > n - plan.overlap) {
    throw Error(ErrorCode::kInfeasiblePlan,
                "plan (" + std::to_string(plan.zero_duration) + " zero-duration, " +
                    std::to_string(plan.overlap) + " overlap) does not fit " +
                    std::to_string(n) + " spans");
  }
  Rng rng(SubSeed(seed, 3));
  static constexpr std::array<const char*, 10> kVerbs = {
      "pick up", "place", "transfer", "move", "wipe", "pour", "stir", "fold",
      "slide", "lift"};
  static constexpr std::array<const char*, 12> kObjects = {
      "bowl", "plate", "cup", "dough", "towel", "spoon", "lid", "box", "bottle",
      "shirt", "knife", "pan"};
  static constexpr std::array<const char*, 8> kModifiers = {
      "red", "metal", "large", "wooden", "small", "blue", "glass", "white"};
  static constexpr std::array<const char*, 6> kPreps = {"from", "to", "into",
                                                        "onto", "beside", "under"};

  std::vector<AtomicSpan> spans(n);
  TimestampNs cursor = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto& s = spans[i];
    s.id = static_cast<SpanId>(i);
    // Mostly short pauses, with occasional episode- and sub-goal-sized breaks
    // so gap-built trees have several levels.
    const double u = rng.Uniform01();
    const double gap_s = u < 0.04   ? rng.Uniform(125.0, 150.0)
                         : u < 0.25 ? rng.Uniform(11.0, 30.0)
                                    : rng.Uniform(0.2, 2.0);
    if (i > 0) cursor += static_cast<TimestampNs>(gap_s * kNsPerSecond);
    s.start = cursor;
    cursor += static_cast<TimestampNs>(rng.Uniform(2.0, 8.0) * kNsPerSecond);
    s.end = cursor;
    std::string text = kVerbs[rng.UniformIndex(kVerbs.size())];
    if (rng.Uniform01() < 0.6) text += std::string(" ") + kModifiers[rng.UniformIndex(kModifiers.size())];
    text += std::string(" ") + kObjects[rng.UniformIndex(kObjects.size())];
    if (rng.Uniform01() < 0.7) {
      text += std::string(" ") + kPreps[rng.UniformIndex(kPreps.size())];
      if (rng.Uniform01() < 0.5) text += std::string(" ") + kModifiers[rng.UniformIndex(kModifiers.size())];
      text += std::string(" ") + kObjects[rng.UniformIndex(kObjects.size())];
    }
    s.text = std::move(text);
  }

  // Overlap pairs (i, i+1) first, then zero-duration spans among indices that
  // do not start an overlap pair (a zero-length span cannot overlap its
  // successor).
  std::vector<std::size_t> pair_starts;
  for (std::size_t i = 0; i + 1 < n; ++i) pair_starts.push_back(i);
  for (std::size_t i = 0; i < pair_starts.size(); ++i) {
    std::swap(pair_starts[i], pair_starts[i + rng.UniformIndex(pair_starts.size() - i)]);
  }
  pair_starts.resize(plan.overlap);
  std::vector<bool> starts_overlap(n, false);
  for (std::size_t i : pair_starts) starts_overlap[i] = true;

  std::vector<std::size_t> zero_candidates;
  for (std::size_t i = 0; i < n; ++i) {
    if (!starts_overlap[i]) zero_candidates.push_back(i);
  }
  for (std::size_t i = 0; i < zero_candidates.size(); ++i) {
    std::swap(zero_candidates[i],
              zero_candidates[i + rng.UniformIndex(zero_candidates.size() - i)]);
  }
  zero_candidates.resize(plan.zero_duration);
  std::vector<bool> zero(n, false);
  for (std::size_t i : zero_candidates) zero[i] = true;

  for (std::size_t i = 0; i < n; ++i) {
    if (starts_overlap[i]) {
      // Pull the successor's start back inside span i, keeping it after
      // span i's start so the corpus stays sorted.
      const TimestampNs dur = spans[i].end - spans[i].start;
      const auto back = static_cast<TimestampNs>(
          std::max(1.0, rng.Uniform(0.1, 0.9) * static_cast<double>(dur)));
      spans[i + 1].start = spans[i].end - std::min(back, dur - 1);
    }
    if (zero[i]) spans[i].end = spans[i].start;
  }
  return spans;
}

SessionLog GenMarkerSession(const MotionProfile& profile,
                            const MarkerSessionOptions& options) {
  SessionLog s;
  s.session_id = options.session_id;
  s.intrinsics = HandSessionOptions{}.intrinsics;
  s.poses = GenTrajectory(profile);
  const std::size_t n = s.poses.size();
  const Vec3 marker_world =
      TransformPoint(s.poses.front().pose, Vec3(0.0, 0.0, options.marker_distance));
  const std::array<std::size_t, 3> at = {0, n / 2, n - 1};
  for (std::size_t k : at) {
    const Pose& pose = s.poses[k].pose;
    s.markers.push_back({s.poses[k].ts, options.marker_id, pose.Inverse() * marker_world});
  }
  for (std::size_t k : {at[1], at[2]}) s.poses[k].pose.translation += options.revisit_offset;
  for (const auto& sp : s.poses) s.imu.push_back({sp.ts, Vec3::Zero(), Vec3::Zero()});
  return s;
}

MotionProfile MotionProfileFromJson(const nlohmann::json& j) {
  MotionProfile p;
  const std::string kind = j.value("kind", std::string("stationary"));
  bool found = false;
  for (MotionKind k : {MotionKind::kLine, MotionKind::kLoop, MotionKind::kSpin,
                       MotionKind::kStationary, MotionKind::kReachCycle}) {
    if (MotionKindName(k) == kind) {
      p.kind = k;
      found = true;
    }
  }
  if (!found) throw Error(ErrorCode::kInvalidArgument, "unknown motion kind '" + kind + "'");
  p.speed = j.value("speed", 0.0);
  p.yaw_rate = j.value("yaw_rate", 0.0);
  p.duration = j.value("duration", 10.0);
  p.rate = j.value("rate", 30.0);
  p.seed = j.value("seed", std::uint64_t{0});
  if (!(p.duration > 0.0) || !(p.rate > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "duration and rate must be positive");
  }
  return p;
}

NoiseModel NoiseModelFromJson(const nlohmann::json& j) {
  NoiseModel n;
  n.position_sigma = j.value("position_sigma", 0.0);
  n.rotation_sigma_deg = j.value("rotation_sigma_deg", 0.0);
  n.drift_rate = j.value("drift_rate", 0.0);
  n.seed = j.value("seed", std::uint64_t{0});
  return n;
}

SynthSpec SynthSpecFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "profile must be a JSON object");
  SynthSpec spec;
  try {
    spec.session_id = j.value("session_id", std::string("synthetic"));
    // A bare motion profile is accepted as the whole document.
    spec.motion = MotionProfileFromJson(j.contains("motion") ? j.at("motion") : j);
    if (j.contains("noise")) spec.noise = NoiseModelFromJson(j.at("noise"));
    spec.hands = j.value("hands", true);
    spec.static_hands = j.value("static_hands", false);
    spec.markers = j.value("markers", true);
    if (j.contains("labels")) {
      const auto& l = j.at("labels");
      spec.label_count = l.value("count", spec.label_count);
      spec.label_defects.zero_duration = l.value("zero_duration", std::size_t{0});
      spec.label_defects.overlap = l.value("overlap", std::size_t{0});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad profile: ") + e.what());
  }
  return spec;
}

SynthOutput GenSynthetic(const SynthSpec& spec) {
  SynthOutput out;
  const Trajectory clean = GenTrajectory(spec.motion);
  if (spec.hands) {
    HandSessionOptions opts;
    opts.static_in_world = spec.static_hands;
    opts.session_id = spec.session_id;
    out.session = GenHandSession(spec.motion, DefaultHandTemplate(), spec.motion.seed, opts).session;
  } else {
    out.session.session_id = spec.session_id;
    out.session.intrinsics = HandSessionOptions{}.intrinsics;
    out.session.poses = clean;
    for (const auto& sp : clean) out.session.imu.push_back({sp.ts, Vec3::Zero(), Vec3::Zero()});
  }
  if (spec.markers && clean.size() >= 3) {
    const Vec3 marker_world = TransformPoint(clean.front().pose, Vec3(0.0, 0.0, 1.0));
    for (std::size_t k : {std::size_t{0}, clean.size() / 2, clean.size() - 1}) {
      out.session.markers.push_back(
          {clean[k].ts, 0, clean[k].pose.Inverse() * marker_world});
    }
  }
  out.ground_truth = clean;
  out.session.poses = PerturbTrajectory(clean, spec.noise);
  if (spec.label_count > 0) {
    out.spans = GenLabelCorpus(spec.label_count, spec.label_defects, spec.motion.seed);
    out.tree = BuildTreeGap(out.spans);
  }
  return out;
}

}  // namespace stera
