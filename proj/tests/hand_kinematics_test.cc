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

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "stera/error.h"
#include "stera/synth.h"

namespace stera {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Every finger a straight chain of `bone` m segments fanning out in the xy
// plane from a wrist at `origin`.
WorldHandFrame StraightHand(TimestampNs ts, Vec3 origin = Vec3::Zero(),
                            double bone = 1.0, HandSide side = HandSide::kRight) {
  WorldHandFrame f;
  f.ts = ts;
  f.side = side;
  f.confidence = 0.9;
  f.joints[0] = origin;
  for (std::size_t fi = 0; fi < kNumFingers; ++fi) {
    const double phi = 0.3 * static_cast<double>(fi);
    const Vec3 dir(std::sin(phi), std::cos(phi), 0);
    for (std::size_t k = 0; k < 4; ++k) {
      f.joints[HandSkeleton::Joint(static_cast<Finger>(fi), k)] =
          origin + bone * static_cast<double>(k + 1) * dir;
    }
  }
  f.status.fill(JointStatus::kValid);
  return f;
}

void Invalidate(WorldHandFrame& f, std::size_t joint) {
  f.status[joint] = JointStatus::kNoDepth;
  f.joints[joint] = Vec3::Constant(kNaN);
}

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no stera::Error thrown";
  return ErrorCode::kInvalidArgument;
}

TEST(HandSkeletonTest, IndexMap) {
  const HandSkeleton skel;
  EXPECT_EQ(HandSkeleton::Joint(Finger::kThumb, 0), 1u);
  EXPECT_EQ(HandSkeleton::Joint(Finger::kIndex, 0), 5u);
  EXPECT_EQ(HandSkeleton::Joint(Finger::kPinky, 3), 20u);
  // Every non-wrist joint is the child of exactly one bone.
  std::array<int, kNumHandJoints> children{};
  for (const Bone& b : skel.bones()) {
    EXPECT_LT(b.parent, b.child);
    ++children[b.child];
  }
  EXPECT_EQ(children[0], 0);
  for (std::size_t j = 1; j < kNumHandJoints; ++j) EXPECT_EQ(children[j], 1);
  EXPECT_EQ(HandSkeleton::AngleName(HandSkeleton::AngleIndex(Finger::kRing, JointClass::kPip)),
            "ring_pip");
  const auto aj = HandSkeleton::AngleJoints(HandSkeleton::AngleIndex(Finger::kIndex, JointClass::kMcp));
  EXPECT_EQ(aj[0], 0u);
  EXPECT_EQ(aj[1], 5u);
  EXPECT_EQ(aj[2], 6u);
}

TEST(BoneLengthsTest, UnitChain) {
  const auto bl = ComputeBoneLengths(StraightHand(0), HandSkeleton());
  for (const auto& l : bl) {
    ASSERT_TRUE(l.has_value());
    EXPECT_NEAR(*l, 1.0, 1e-12);
  }
}

TEST(BoneLengthsTest, InvalidWristDropsRootedBones) {
  auto f = StraightHand(0);
  Invalidate(f, HandSkeleton::kWrist);
  const HandSkeleton skel;
  const auto bl = ComputeBoneLengths(f, skel);
  for (std::size_t b = 0; b < kNumHandBones; ++b) {
    EXPECT_EQ(bl[b].has_value(), skel.bones()[b].parent != HandSkeleton::kWrist) << b;
  }
}

TEST(BoneLengthsTest, GeneratorTemplate) {
  const HandTemplate tmpl = DefaultHandTemplate();
  const HandSkeleton skel;
  for (const auto& f : GenWorldHands(tmpl, 20, 30.0, 0.0, 4)) {
    const auto bl = ComputeBoneLengths(f, skel);
    for (std::size_t b = 0; b < kNumHandBones; ++b) {
      ASSERT_TRUE(bl[b].has_value());
      EXPECT_NEAR(*bl[b], tmpl[b], 1e-6);
    }
  }
}

TEST(BoneCvTest, ConstantLengthsGiveZero) {
  std::vector<WorldHandFrame> frames;
  for (int i = 0; i < 10; ++i) frames.push_back(StraightHand(i, Vec3(i, 0, 0)));
  const auto cv = ComputeBoneCv(frames, HandSkeleton());
  ASSERT_EQ(cv.size(), 1u);
  const auto& s = cv.at(HandSide::kRight);
  for (const auto& c : s.cv_percent) EXPECT_NEAR(*c, 0.0, 1e-9);
  EXPECT_NEAR(s.median_cv, 0.0, 1e-9);
}

TEST(BoneCvTest, SampleStandardDeviation) {
  // Thumb metacarpal of length 1.00 then 1.02.
  auto a = StraightHand(0);
  auto b = StraightHand(1);
  const std::size_t mcp = HandSkeleton::Joint(Finger::kThumb, 0);
  const Vec3 dir = a.joints[mcp].normalized();
  const Vec3 shift = 0.02 * dir;
  for (std::size_t k = 0; k < 4; ++k) b.joints[HandSkeleton::Joint(Finger::kThumb, k)] += shift;
  std::vector<WorldHandFrame> frames = {a, b};
  const auto cv = ComputeBoneCv(frames, HandSkeleton()).at(HandSide::kRight);
  EXPECT_NEAR(*cv.cv_percent[0], 100.0 * 0.0141421356 / 1.01, 1e-6);
  EXPECT_NEAR(*cv.cv_percent[0], 1.400, 5e-4);
  EXPECT_NEAR(*cv.cv_percent[1], 0.0, 1e-9);
}

TEST(BoneCvTest, ZeroNoiseGeneratorAndNoData) {
  const auto frames = GenWorldHands(DefaultHandTemplate(), 50, 30.0, 0.0, 1);
  const auto cv = ComputeBoneCv(frames, HandSkeleton());
  ASSERT_EQ(cv.size(), 2u);
  for (const auto& [side, s] : cv) EXPECT_LT(s.median_cv, 1e-9);

  std::vector<WorldHandFrame> one = {StraightHand(0)};
  EXPECT_EQ(CodeOf([&] { ComputeBoneCv(one, HandSkeleton()); }), ErrorCode::kNoData);
}

TEST(FlexionTest, StraightAndBent) {
  const HandSkeleton skel;
  auto f = StraightHand(0);
  for (const auto& a : ComputeFlexionAngles(f, skel)) EXPECT_NEAR(*a, 0.0, 1e-6);

  // Right angle at the index PIP.
  const std::size_t pip = HandSkeleton::Joint(Finger::kIndex, 1);
  const Vec3 in = f.joints[pip] - f.joints[pip - 1];
  const Vec3 perp = in.cross(Vec3::UnitZ());
  f.joints[pip + 1] = f.joints[pip] + perp;
  f.joints[pip + 2] = f.joints[pip + 1] + perp;
  const auto angles = ComputeFlexionAngles(f, skel);
  EXPECT_NEAR(*angles[HandSkeleton::AngleIndex(Finger::kIndex, JointClass::kPip)], 90.0, 1e-9);
  EXPECT_NEAR(*angles[HandSkeleton::AngleIndex(Finger::kIndex, JointClass::kDip)], 0.0, 1e-6);
}

TEST(FlexionTest, McpAt45Degrees) {
  auto f = StraightHand(0);
  f.joints[0] = Vec3(0, 0, 0);
  f.joints[HandSkeleton::Joint(Finger::kMiddle, 0)] = Vec3(1, 0, 0);
  f.joints[HandSkeleton::Joint(Finger::kMiddle, 1)] = Vec3(2, 1, 0);
  const auto a = ComputeFlexionAngles(f, HandSkeleton());
  EXPECT_NEAR(*a[HandSkeleton::AngleIndex(Finger::kMiddle, JointClass::kMcp)], 45.0, 1e-9);
}

TEST(FlexionTest, MissingJointGivesAbsentAngle) {
  auto f = StraightHand(0);
  Invalidate(f, HandSkeleton::Joint(Finger::kRing, 1));
  const auto a = ComputeFlexionAngles(f, HandSkeleton());
  EXPECT_FALSE(a[HandSkeleton::AngleIndex(Finger::kRing, JointClass::kMcp)].has_value());
  EXPECT_FALSE(a[HandSkeleton::AngleIndex(Finger::kRing, JointClass::kPip)].has_value());
  EXPECT_FALSE(a[HandSkeleton::AngleIndex(Finger::kRing, JointClass::kDip)].has_value());
  EXPECT_TRUE(a[HandSkeleton::AngleIndex(Finger::kPinky, JointClass::kDip)].has_value());
}

TEST(JointLimitTest, StraightHandsAreWithinDefaults) {
  std::vector<WorldHandFrame> frames;
  for (int i = 0; i < 20; ++i) frames.push_back(StraightHand(i));
  const auto r = ComputeJointLimitReport(frames, HandSkeleton(), JointLimits::Default());
  EXPECT_EQ(*r.pooled.pooled_fraction, 1.0);
  EXPECT_EQ(r.pooled.pooled_measured, 20u * kNumFlexionAngles);
}

TEST(JointLimitTest, OneHyperflexedPip) {
  std::vector<WorldHandFrame> frames;
  for (int i = 0; i < 1000; ++i) frames.push_back(StraightHand(i));
  // Fold the index finger back on itself at the PIP: 170 degrees.
  auto& f = frames[500];
  const std::size_t pip = HandSkeleton::Joint(Finger::kIndex, 1);
  const Vec3 in = (f.joints[pip] - f.joints[pip - 1]).normalized();
  const Vec3 perp = in.cross(Vec3::UnitZ()).normalized();
  const double th = 170.0 * std::numbers::pi / 180.0;
  const Vec3 out = std::cos(th) * in + std::sin(th) * perp;
  f.joints[pip + 1] = f.joints[pip] + out;
  f.joints[pip + 2] = f.joints[pip + 1] + out;

  const auto r = ComputeJointLimitReport(frames, HandSkeleton(), JointLimits::Default());
  const std::size_t idx = HandSkeleton::AngleIndex(Finger::kIndex, JointClass::kPip);
  EXPECT_DOUBLE_EQ(*r.per_side.at(HandSide::kRight).within_fraction[idx], 0.999);
  EXPECT_EQ(*r.pooled.within_fraction[HandSkeleton::AngleIndex(Finger::kIndex, JointClass::kDip)], 1.0);
}

TEST(JointLimitsTest, FromJson) {
  const auto l = JointLimits::FromJson(nlohmann::json::parse(R"({"thumb": {"mcp": [0, 60]}})"));
  EXPECT_EQ(l.at(HandSkeleton::AngleIndex(Finger::kThumb, JointClass::kMcp)).max_deg, 60.0);
  EXPECT_EQ(l.at(HandSkeleton::AngleIndex(Finger::kThumb, JointClass::kPip)).max_deg, 110.0);
  EXPECT_EQ(CodeOf([] { JointLimits::FromJson(nlohmann::json::parse(R"({"toe": {}})")); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] {
              JointLimits::FromJson(nlohmann::json::parse(R"({"thumb": {"mcp": [5, 1]}})"));
            }),
            ErrorCode::kInvalidArgument);
}

TEST(PercentileTest, LinearInterpolation) {
  EXPECT_EQ(Percentile({3, 1, 2}, 50), 2.0);
  EXPECT_EQ(Percentile({1, 2, 3, 4}, 50), 2.5);
  EXPECT_NEAR(Percentile({0, 10}, 90), 9.0, 1e-12);
  const auto d = Summarize({5});
  EXPECT_EQ(d.median, 5.0);
  EXPECT_EQ(d.max, 5.0);
  EXPECT_EQ(d.count, 1u);
}

TEST(WristDynamicsTest, Stationary) {
  std::vector<WorldHandFrame> frames;
  for (int i = 0; i < 30; ++i) frames.push_back(StraightHand(i * 33'333'333LL, Vec3(1, 2, 3), 0.04));
  const auto w = ComputeWristDynamics(frames).at(HandSide::kRight);
  EXPECT_EQ(w.velocity.median, 0.0);
  EXPECT_EQ(w.acceleration.median, 0.0);
}

TEST(WristDynamicsTest, ConstantVelocity) {
  std::vector<WorldHandFrame> frames;
  for (int i = 0; i < 300; ++i) {
    const TimestampNs ts = static_cast<TimestampNs>(std::llround(i * 1e9 / 30.0));
    frames.push_back(StraightHand(ts, Vec3(0.3 * NsToSeconds(ts), 0, 0), 0.04));
  }
  const auto w = ComputeWristDynamics(frames).at(HandSide::kRight);
  EXPECT_NEAR(w.velocity.median, 0.3, 0.003);
  EXPECT_LT(w.acceleration.median, 0.01);
}

TEST(WristDynamicsTest, SinusoidPeakSpeed) {
  // x = A sin(wt): the fastest samples approach A*w.
  const double amp = 0.1;
  const double omega = 2 * std::numbers::pi * 0.5;
  std::vector<WorldHandFrame> frames;
  for (int i = 0; i < 600; ++i) {
    const TimestampNs ts = static_cast<TimestampNs>(std::llround(i * 1e9 / 60.0));
    frames.push_back(StraightHand(ts, Vec3(amp * std::sin(omega * NsToSeconds(ts)), 0, 0), 0.04));
  }
  const auto w = ComputeWristDynamics(frames).at(HandSide::kRight);
  EXPECT_NEAR(w.velocity.max, amp * omega, 0.02 * amp * omega);
}

TEST(WristDynamicsTest, TooFewSamples) {
  std::vector<WorldHandFrame> frames = {StraightHand(0), StraightHand(1)};
  EXPECT_EQ(CodeOf([&] { ComputeWristDynamics(frames); }), ErrorCode::kNoData);
  Invalidate(frames[0], 0);
  frames.push_back(StraightHand(2));
  EXPECT_EQ(CodeOf([&] { ComputeWristDynamics(frames); }), ErrorCode::kNoData);
}

TEST(FilterFramesTest, Thresholds) {
  std::vector<WorldHandFrame> frames;
  for (int i = 0; i < 10; ++i) {
    frames.push_back(StraightHand(i));
    frames.back().confidence = 0.5;
  }
  EXPECT_EQ(FilterFrames(frames, 0.0).kept.size(), 10u);
  const auto none = FilterFrames(frames, 0.6);
  EXPECT_TRUE(none.kept.empty());
  EXPECT_EQ(none.low_confidence_hands, 10u);

  frames[2].confidence = 0.1;
  frames[5].confidence = 0.29;
  frames[7].confidence = 0.0;
  frames[8].confidence = 0.3;  // at the gate, kept
  const auto mixed = FilterFrames(frames, 0.3);
  EXPECT_EQ(mixed.low_confidence_hands, 3u);
  EXPECT_EQ(mixed.kept.size(), 7u);
}

TEST(FilterFramesTest, DepthFloorAccounting) {
  std::vector<WorldHandFrame> frames = {StraightHand(0), StraightHand(1)};
  for (std::size_t j = 0; j < kNumHandJoints; ++j) Invalidate(frames[0], j);
  Invalidate(frames[1], 3);
  const auto r = FilterFrames(frames, 0.3);
  EXPECT_EQ(r.kept.size(), 1u);
  EXPECT_EQ(r.fully_invalid_frames, 1u);
  EXPECT_EQ(r.depth_invalid_joints, kNumHandJoints + 1);
}

TEST(KinematicsReportTest, SyntheticSession) {
  MotionProfile p;
  p.duration = 3.0;
  const auto hs = GenHandSession(p, DefaultHandTemplate(), 5);
  const auto world = AnchorHands(hs.session);
  const auto r = ComputeKinematicsReport(hs.session.hands, world);
  EXPECT_EQ(r.hand_frames, hs.session.hands.size());
  EXPECT_EQ(r.detection_rate, 1.0);
  EXPECT_GT(r.mean_confidence, 0.5);
  ASSERT_EQ(r.sides.size(), 2u);
  for (const auto& [side, k] : r.sides) {
    ASSERT_TRUE(k.bone_cv.has_value());
    EXPECT_LT(k.bone_cv->median_cv, 0.1);
    ASSERT_TRUE(k.wrist.has_value());
  }
  ASSERT_TRUE(r.pooled_within_limit.has_value());
  EXPECT_EQ(*r.pooled_within_limit, 1.0);
}

TEST(KinematicsReportTest, EmptyInputs) {
  const auto r = ComputeKinematicsReport({}, {});
  EXPECT_EQ(r.hand_frames, 0u);
  EXPECT_EQ(r.detection_rate, 0.0);
  EXPECT_TRUE(r.sides.empty());
  EXPECT_FALSE(r.pooled_within_limit.has_value());
}

}  // namespace
}  // namespace stera
