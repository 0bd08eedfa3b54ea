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

#include "stera/log_format.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <string>

#include "stera/error.h"
#include "stera/synth.h"
#include "test_util.h"

namespace stera {
namespace {

using testing::McapBuilder;
using testing::TempDir;

template <typename Fn>
ErrorCode CodeOf(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no stera::Error thrown";
  return ErrorCode::kInvalidArgument;
}

SessionLog MinimalSession() {
  SessionLog s;
  s.session_id = "minimal";
  s.intrinsics = {500, 500, 320, 240, 640, 480};
  return s;
}

// Opcodes of the top-level records, in file order.
std::vector<std::uint8_t> TopLevelOpcodes(const std::vector<std::uint8_t>& bytes) {
  std::vector<std::uint8_t> ops;
  std::size_t pos = kMcapMagic.size();
  while (pos + 9 <= bytes.size() - kMcapMagic.size()) {
    ops.push_back(bytes[pos]);
    std::uint64_t len = 0;
    for (int i = 0; i < 8; ++i) len |= std::uint64_t{bytes[pos + 1 + i]} << (8 * i);
    pos += 9 + len;
  }
  return ops;
}

TEST(LogFormatTest, RoundTripsSyntheticHandSession) {
  MotionProfile profile;
  profile.kind = MotionKind::kReachCycle;
  profile.speed = 0.3;
  profile.duration = 2.0;
  const auto hs = GenHandSession(profile, DefaultHandTemplate(), 11);
  TempDir dir;
  WriteSession(hs.session, dir / "s.mcap");
  EXPECT_EQ(ReadSession(dir / "s.mcap"), hs.session);
}

TEST(LogFormatTest, RoundTripsRandomSessions) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const SessionLog s = testing::RandomSession(seed);
    const auto bytes = EncodeSession(s);
    EXPECT_EQ(DecodeSession(bytes), s) << "seed " << seed;
  }
}

TEST(LogFormatTest, WriteIsByteDeterministic) {
  const SessionLog s = testing::RandomSession(42);
  TempDir dir;
  WriteSession(s, dir / "a.mcap");
  WriteSession(s, dir / "b.mcap");
  EXPECT_EQ(testing::ReadFileBytes(dir / "a.mcap"), testing::ReadFileBytes(dir / "b.mcap"));
}

TEST(LogFormatTest, EmptySessionHasOnlyFramingRecords) {
  const auto bytes = EncodeSession(MinimalSession());
  ASSERT_TRUE(std::equal(kMcapMagic.begin(), kMcapMagic.end(), bytes.begin()));
  ASSERT_TRUE(std::equal(kMcapMagic.begin(), kMcapMagic.end(), bytes.end() - 8));
  const auto ops = TopLevelOpcodes(bytes);
  // The intrinsics message is the only message: intrinsics are a required
  // stream even for an otherwise empty session.
  const auto count = [&](Opcode op) {
    return std::count(ops.begin(), ops.end(), static_cast<std::uint8_t>(op));
  };
  EXPECT_EQ(ops.front(), static_cast<std::uint8_t>(Opcode::kHeader));
  EXPECT_EQ(ops.back(), static_cast<std::uint8_t>(Opcode::kFooter));
  EXPECT_EQ(count(Opcode::kMessage), 1);
  EXPECT_EQ(count(Opcode::kChunk), 0);
  EXPECT_EQ(count(Opcode::kChannel), count(Opcode::kSchema));
  EXPECT_GE(count(Opcode::kChannel), 1);
  const SessionLog back = DecodeSession(bytes);
  EXPECT_EQ(back, MinimalSession());
}

TEST(LogFormatTest, OnePoseGivesOneMessageOnPoseChannel) {
  SessionLog s = MinimalSession();
  s.poses.push_back({123, Pose::Identity()});
  const auto with_pose = TopLevelOpcodes(EncodeSession(s));
  const auto without = TopLevelOpcodes(EncodeSession(MinimalSession()));
  const auto messages = [](const std::vector<std::uint8_t>& ops) {
    return std::count(ops.begin(), ops.end(), static_cast<std::uint8_t>(Opcode::kMessage));
  };
  EXPECT_EQ(messages(with_pose) - messages(without), 1);
  const SessionLog back = DecodeSession(EncodeSession(s));
  ASSERT_EQ(back.poses.size(), 1u);
  EXPECT_EQ(back.poses[0].ts, 123u);
}

TEST(LogFormatTest, ZeroMagicIsBadMagic) {
  TempDir dir;
  auto bytes = EncodeSession(MinimalSession());
  std::fill(bytes.begin(), bytes.begin() + 8, 0);
  testing::WriteFileBytes(dir / "z.mcap", std::string(bytes.begin(), bytes.end()));
  EXPECT_EQ(CodeOf([&] { ReadSession(dir / "z.mcap"); }), ErrorCode::kBadMagic);
}

TEST(LogFormatTest, MissingTrailingMagicIsBadMagic) {
  auto bytes = EncodeSession(MinimalSession());
  bytes.back() = 0;
  EXPECT_EQ(CodeOf([&] { DecodeSession(bytes); }), ErrorCode::kBadMagic);
}

TEST(LogFormatTest, ZstdChunkIsUnsupportedCompression) {
  McapBuilder inner;
  inner.Message(1, 0, R"({"fx":1})");
  McapBuilder b;
  b.Magic().Header().Intrinsics().Chunk("zstd", inner.bytes()).Footer().Magic();
  EXPECT_EQ(CodeOf([&] { DecodeSession(b.bytes()); }), ErrorCode::kUnsupportedCompression);
}

TEST(LogFormatTest, UncompressedChunkIsDecoded) {
  McapBuilder::Bytes records = McapBuilder::ChannelRecord(2, topics::kPose, "json");
  const auto msg = McapBuilder::MessageRecord(
      2, 7, R"({"ts":7,"t":[1,2,3],"q":[1,0,0,0]})");
  records.insert(records.end(), msg.begin(), msg.end());
  McapBuilder b;
  b.Magic().Header().Intrinsics().Chunk("", records).Footer().Magic();
  const SessionLog s = DecodeSession(b.bytes());
  ASSERT_EQ(s.poses.size(), 1u);
  EXPECT_EQ(s.poses[0].pose.translation, Vec3(1, 2, 3));
}

TEST(LogFormatTest, UnknownChannelIsSkippedAndCounted) {
  McapBuilder b;
  b.Magic().Header().Intrinsics().Channel(9, "/rgb/frames", "json");
  b.Message(9, 5, R"({"frame": 0, "file": "rgb_000000.jpg"})");
  b.Message(9, 6, "not even json");
  b.Footer().Magic();
  ReadDiagnostics diag;
  const SessionLog s = DecodeSession(b.bytes(), &diag);
  EXPECT_EQ(diag.skipped_channels, 1u);
  EXPECT_EQ(diag.skipped_messages, 2u);
  EXPECT_TRUE(s.poses.empty());
}

TEST(LogFormatTest, UnknownChannelChangesNoDecodedValues) {
  const SessionLog s = testing::RandomSession(5);
  auto bytes = EncodeSession(s);
  // Splice an unknown channel and message in front of the footer.
  McapBuilder extra;
  extra.Channel(77, "/unknown", "cbor").Message(77, 1, "\x01\x02");
  const auto ops_end = bytes.end() - 8;
  // Footer record: opcode + u64 length + 20-byte body.
  bytes.insert(ops_end - 29, extra.bytes().begin(), extra.bytes().end());
  EXPECT_EQ(DecodeSession(bytes), s);
}

TEST(LogFormatTest, InterleavedMessagesAreSorted) {
  McapBuilder b;
  b.Magic().Header().Intrinsics().Channel(2, topics::kPose, "json");
  for (int t : {30, 10, 20}) {
    b.Message(2, t,
              R"({"ts":)" + std::to_string(t) + R"(,"t":[0,0,0],"q":[1,0,0,0]})");
  }
  b.Footer().Magic();
  const SessionLog s = DecodeSession(b.bytes());
  ASSERT_EQ(s.poses.size(), 3u);
  EXPECT_TRUE(StreamsSorted(s));
  EXPECT_EQ(s.poses[0].ts, 10u);
  EXPECT_EQ(s.poses[2].ts, 30u);
}

TEST(LogFormatTest, MissingIntrinsics) {
  McapBuilder b;
  b.Magic().Header().Footer().Magic();
  EXPECT_EQ(CodeOf([&] { DecodeSession(b.bytes()); }), ErrorCode::kMissingIntrinsics);
}

TEST(LogFormatTest, DuplicateIntrinsicsIsSchemaMismatch) {
  McapBuilder b;
  b.Magic().Header().Intrinsics();
  b.Message(1, 1, R"({"fx":500,"fy":500,"cx":320,"cy":240,"w":640,"h":480})");
  b.Footer().Magic();
  EXPECT_EQ(CodeOf([&] { DecodeSession(b.bytes()); }), ErrorCode::kSchemaMismatch);
}

TEST(LogFormatTest, SchemaViolationsAreRejected) {
  const std::vector<std::string> bad_payloads = {
      R"({"ts":1,"t":[0,0],"q":[1,0,0,0]})",        // short translation
      R"({"ts":1,"t":[0,0,0],"q":[2,0,0,0]})",      // non-unit quaternion
      R"({"ts":-1,"t":[0,0,0],"q":[1,0,0,0]})",     // negative timestamp
      R"({"t":[0,0,0],"q":[1,0,0,0]})",             // no timestamp
      R"({"ts":1,"t":[0,"x",0],"q":[1,0,0,0]})",    // non-numeric
      "{not json",
  };
  for (const auto& payload : bad_payloads) {
    McapBuilder b;
    b.Magic().Header().Intrinsics().Channel(2, topics::kPose, "json");
    b.Message(2, 1, payload).Footer().Magic();
    EXPECT_EQ(CodeOf([&] { DecodeSession(b.bytes()); }), ErrorCode::kSchemaMismatch)
        << payload;
  }
}

TEST(LogFormatTest, WrongEncodingOnKnownTopicIsSchemaMismatch) {
  McapBuilder b;
  b.Magic().Header().Intrinsics().Channel(2, topics::kPose, "protobuf").Footer().Magic();
  EXPECT_EQ(CodeOf([&] { DecodeSession(b.bytes()); }), ErrorCode::kSchemaMismatch);
}

TEST(LogFormatTest, TruncatedFileIsMalformed) {
  auto bytes = EncodeSession(testing::RandomSession(3));
  bytes.resize(bytes.size() / 2);
  bytes.insert(bytes.end(), kMcapMagic.begin(), kMcapMagic.end());
  const ErrorCode code = CodeOf([&] { DecodeSession(bytes); });
  EXPECT_TRUE(code == ErrorCode::kMalformedRecord || code == ErrorCode::kSchemaMismatch)
      << ErrorCodeName(code);
}

TEST(LogFormatTest, DepthCodecPicksSparseOnlyWhenSmaller) {
  DepthMap sparse(8, 8);
  sparse.at(3, 4) = 1.25f;
  const auto sp = EncodeDepthPayload(sparse);
  EXPECT_EQ(sp[8], 1);
  EXPECT_LT(sp.size(), 9u + 64u * 4u);
  EXPECT_EQ(DecodeDepthPayload(sp), sparse);

  DepthMap dense(4, 2);
  std::fill(dense.values.begin(), dense.values.end(), 2.0f);
  const auto dp = EncodeDepthPayload(dense);
  EXPECT_EQ(dp[8], 0);
  EXPECT_EQ(dp.size(), 9u + 8u * 4u);
  EXPECT_EQ(DecodeDepthPayload(dp), dense);
}

TEST(LogFormatTest, DepthPayloadErrors) {
  DepthMap d(2, 2);
  auto p = EncodeDepthPayload(d);
  p[8] = 7;  // unknown format
  EXPECT_EQ(CodeOf([&] { DecodeDepthPayload(p); }), ErrorCode::kSchemaMismatch);
  DepthMap neg(1, 1);
  neg.values[0] = -1.0f;
  EXPECT_EQ(CodeOf([&] { EncodeDepthPayload(neg); }), ErrorCode::kInvalidArgument);
}

TEST(LogFormatTest, UnwritablePathIsIoFailure) {
  EXPECT_EQ(CodeOf([] { WriteSession(MinimalSession(), "/nonexistent-dir/x/y.mcap"); }),
            ErrorCode::kIoFailure);
  EXPECT_EQ(CodeOf([] { ReadSession("/nonexistent-dir/x/y.mcap"); }), ErrorCode::kIoFailure);
}

TEST(LogFormatTest, SessionIdSurvivesRoundTrip) {
  SessionLog s = MinimalSession();
  s.session_id = "kitchen/2026-01-01 #3";
  EXPECT_EQ(DecodeSession(EncodeSession(s)).session_id, s.session_id);
}

}  // namespace
}  // namespace stera
