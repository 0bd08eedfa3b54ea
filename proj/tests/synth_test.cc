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

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "stera/error.h"
#include "stera/hand_kinematics.h"
#include "stera/log_format.h"
#include "stera/traj_metrics.h"
#include "test_util.h"

namespace stera {
namespace {

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no stera::Error thrown";
  return ErrorCode::kInvalidArgument;
}

MotionProfile Profile(MotionKind kind, double speed, double duration, double rate = 30.0) {
  MotionProfile p;
  p.kind = kind;
  p.speed = speed;
  p.duration = duration;
  p.rate = rate;
  return p;
}

TEST(GenTrajectoryTest, StationaryIsIdentity) {
  const auto t = GenTrajectory(Profile(MotionKind::kStationary, 0, 10));
  ASSERT_EQ(t.size(), 300u);
  for (const auto& p : t) EXPECT_EQ(p.pose, Pose::Identity());
  EXPECT_EQ(t.front().ts, 0u);
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_GT(t[i].ts, t[i - 1].ts);
}

TEST(GenTrajectoryTest, LineLength) {
  const auto t = GenTrajectory(Profile(MotionKind::kLine, 0.5, 10));
  EXPECT_NEAR(TrajectoryLength(t), 5.0, 1e-6);
  for (const auto& p : t) {
    EXPECT_EQ(p.pose.translation.y(), 0.0);
    EXPECT_EQ(p.pose.translation.z(), 0.0);
  }
}

TEST(GenTrajectoryTest, LoopCloses) {
  const auto t = GenTrajectory(Profile(MotionKind::kLoop, 1.0, 20));
  const double step = 1.0 / 30.0;
  EXPECT_LE((t.front().pose.translation - t.back().pose.translation).norm(), step);
  EXPECT_NEAR(TrajectoryLength(t), 20.0, 20.0 * 1e-3);
}

TEST(GenTrajectoryTest, SpinStaysPut) {
  auto p = Profile(MotionKind::kSpin, 0, 5);
  p.yaw_rate = 0.5;
  const auto t = GenTrajectory(p);
  EXPECT_EQ(TrajectoryLength(t), 0.0);
  const Pose rel = t[0].pose.Inverse() * t.back().pose;
  EXPECT_NEAR(RotationAngle(rel.rotation), 0.5 * 5.0, 1e-9);
}

TEST(GenTrajectoryTest, DeterministicAndValidated) {
  auto p = Profile(MotionKind::kReachCycle, 0.3, 4);
  p.seed = 5;
  EXPECT_EQ(GenTrajectory(p), GenTrajectory(p));
  EXPECT_EQ(CodeOf([] { GenTrajectory(Profile(MotionKind::kLine, 1, 0.01)); }),
            ErrorCode::kInvalidArgument);
}

TEST(PerturbTest, ZeroNoiseIsIdentity) {
  const auto t = GenTrajectory(Profile(MotionKind::kLoop, 1.0, 5));
  EXPECT_EQ(PerturbTrajectory(t, NoiseModel{}), t);
}

TEST(PerturbTest, GaussianRmse) {
  const auto t = GenTrajectory(Profile(MotionKind::kLine, 1.0, 10'000.0 / 30.0));
  ASSERT_EQ(t.size(), 10'000u);
  NoiseModel n;
  n.position_sigma = 0.05;
  n.seed = 3;
  const auto r = ComputeAte(PerturbTrajectory(t, n), t);
  EXPECT_NEAR(r.ate_rmse, 0.05 * std::sqrt(3.0), 0.1 * 0.05 * std::sqrt(3.0));
}

TEST(PerturbTest, DriftAccumulatesWithDistance) {
  const auto t = GenTrajectory(Profile(MotionKind::kLine, 1.0, 100.0));
  NoiseModel n;
  n.drift_rate = 0.001;
  n.seed = 4;
  const auto p = PerturbTrajectory(t, n);
  const double end_err = (p.back().pose.translation - t.back().pose.translation).norm();
  EXPECT_NEAR(end_err, 0.1, 0.005);
  EXPECT_EQ((p.front().pose.translation - t.front().pose.translation).norm(), 0.0);
}

TEST(PerturbTest, RotationNoiseKeepsUnitQuaternions) {
  const auto t = GenTrajectory(Profile(MotionKind::kLoop, 1.0, 5));
  NoiseModel n;
  n.rotation_sigma_deg = 1.0;
  for (const auto& p : PerturbTrajectory(t, n)) {
    EXPECT_NEAR(p.pose.rotation.norm(), 1.0, 1e-12);
  }
}

TEST(HandSessionTest, StaticHandAtOneMeter) {
  HandSessionOptions opts;
  opts.static_in_world = true;
  opts.hand_depth = 1.0;
  const auto hs = GenHandSession(Profile(MotionKind::kStationary, 0, 2), DefaultHandTemplate(), 3,
                                 opts);
  const auto world = AnchorHands(hs.session);
  ASSERT_EQ(world.size(), hs.truth.size());
  for (std::size_t i = 0; i < world.size(); ++i) {
    for (std::size_t j = 0; j < kNumHandJoints; ++j) {
      ASSERT_TRUE(world[i].valid(j));
      EXPECT_LT((world[i].joints[j] - hs.truth[i].joints[j]).norm(), 1e-3);
    }
  }
}

TEST(HandSessionTest, MovingCameraStaticHand) {
  HandSessionOptions opts;
  opts.static_in_world = true;
  const auto hs = GenHandSession(Profile(MotionKind::kLine, 0.1, 2), DefaultHandTemplate(), 4,
                                 opts);
  const auto world = AnchorHands(hs.session);
  ASSERT_FALSE(world.empty());
  const auto& first = world.front();
  for (const auto& f : world) {
    if (f.side != first.side) continue;
    for (std::size_t j = 0; j < kNumHandJoints; ++j) {
      if (!f.valid(j) || !first.valid(j)) continue;
      EXPECT_LT((f.joints[j] - first.joints[j]).norm(), 1e-3);
    }
  }
}

TEST(HandSessionTest, TruthMatchesTemplate) {
  const HandTemplate tmpl = DefaultHandTemplate();
  const auto hs = GenHandSession(Profile(MotionKind::kReachCycle, 0.3, 2), tmpl, 8);
  const HandSkeleton skel;
  for (const auto& g : hs.truth) {
    for (std::size_t b = 0; b < kNumHandBones; ++b) {
      const auto& bone = skel.bones()[b];
      EXPECT_NEAR((g.joints[bone.child] - g.joints[bone.parent]).norm(), tmpl[b], 1e-9);
    }
  }
  EXPECT_EQ(hs.session.hands.size(), hs.session.poses.size());
  EXPECT_EQ(hs.session.depth.size(), hs.session.poses.size());
}

TEST(HandSessionTest, Deterministic) {
  const auto p = Profile(MotionKind::kLoop, 0.2, 1);
  const auto a = GenHandSession(p, DefaultHandTemplate(), 9);
  const auto b = GenHandSession(p, DefaultHandTemplate(), 9);
  EXPECT_EQ(a.session, b.session);
  EXPECT_EQ(EncodeSession(a.session), EncodeSession(b.session));
}

TEST(WorldHandsTest, NoiseRaisesBoneCv) {
  const HandSkeleton skel;
  const auto clean = ComputeBoneCv(GenWorldHands(DefaultHandTemplate(), 200, 30, 0.0, 1), skel);
  const auto noisy = ComputeBoneCv(GenWorldHands(DefaultHandTemplate(), 200, 30, 0.001, 1), skel);
  for (const auto& [side, s] : clean) EXPECT_LT(s.median_cv, 1e-9);
  for (const auto& [side, s] : noisy) EXPECT_GT(s.median_cv, 0.5);
}

TEST(MarkerSessionTest, Layout) {
  const auto s = GenMarkerSession(Profile(MotionKind::kLine, 0.5, 4));
  ASSERT_EQ(s.markers.size(), 3u);
  EXPECT_EQ(s.markers[0].ts, s.poses.front().ts);
  EXPECT_EQ(s.markers[2].ts, s.poses.back().ts);
  EXPECT_TRUE(s.markers[0].p_cam.isApprox(Vec3(0, 0, 1)));
}

TEST(SynthSpecTest, FromJson) {
  const auto spec = SynthSpecFromJson(nlohmann::json::parse(R"({
    "session_id": "demo",
    "motion": {"kind": "loop", "speed": 0.4, "duration": 6, "seed": 2},
    "noise": {"position_sigma": 0.01},
    "labels": {"count": 12, "zero_duration": 1, "overlap": 2}
  })"));
  EXPECT_EQ(spec.session_id, "demo");
  EXPECT_EQ(spec.motion.kind, MotionKind::kLoop);
  EXPECT_EQ(spec.motion.speed, 0.4);
  EXPECT_EQ(spec.noise.position_sigma, 0.01);
  EXPECT_EQ(spec.label_count, 12u);
  EXPECT_EQ(spec.label_defects.overlap, 2u);
  EXPECT_EQ(CodeOf([] { MotionProfileFromJson(nlohmann::json::parse(R"({"kind": "zigzag"})")); }),
            ErrorCode::kInvalidArgument);
}

TEST(SynthSpecTest, GenSynthetic) {
  SynthSpec spec;
  spec.motion = Profile(MotionKind::kLoop, 0.3, 4);
  spec.noise.position_sigma = 0.01;
  spec.label_count = 15;
  const auto out = GenSynthetic(spec);
  EXPECT_EQ(out.session.poses.size(), out.ground_truth.size());
  EXPECT_NE(out.session.poses, out.ground_truth);
  EXPECT_EQ(out.spans.size(), 15u);
  EXPECT_TRUE(ValidateTree(out.tree, out.spans).empty());
  EXPECT_FALSE(out.session.markers.empty());
  EXPECT_FALSE(out.session.hands.empty());
  const auto again = GenSynthetic(spec);
  EXPECT_EQ(EncodeSession(out.session), EncodeSession(again.session));
}

}  // namespace
}  // namespace stera
