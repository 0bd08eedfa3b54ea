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

// Reader and writer for the capture container: a subset of MCAP.
//
// Supported records: Header, Schema, Channel, Message, Chunk (uncompressed
// only), Metadata, DataEnd and Footer. Index and summary records are skipped.
//
// Topics and payloads:
//   /intrinsics     json  {"fx","fy","cx","cy","w","h"}
//   /camera/pose    json  {"ts", "t":[x,y,z], "q":[w,x,y,z]}
//   /camera/depth   binary: u32 width, u32 height, u8 format, body
//                     format 0: width*height float32 LE, row-major
//                     format 1: u32 count, then count x (u32 index, f32 value)
//   /hands          json  {"ts", "hands":[{"side","conf","px","rel"}]}
//   /imu            json  {"ts", "accel":[..], "gyro":[..]}
//   /markers        json  {"ts", "id", "p_cam":[x,y,z]}
// The session id travels in a Metadata record named "stera.session".

#ifndef STERA_LOG_FORMAT_H_
#define STERA_LOG_FORMAT_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "stera/session.h"

namespace stera {

inline constexpr std::array<std::uint8_t, 8> kMcapMagic = {
    0x89, 'M', 'C', 'A', 'P', 0x30, '\r', '\n'};

namespace topics {
inline constexpr std::string_view kPose = "/camera/pose";
inline constexpr std::string_view kDepth = "/camera/depth";
inline constexpr std::string_view kHands = "/hands";
inline constexpr std::string_view kImu = "/imu";
inline constexpr std::string_view kMarkers = "/markers";
inline constexpr std::string_view kIntrinsics = "/intrinsics";
}  // namespace topics

// MCAP record opcodes used by this subset.
enum class Opcode : std::uint8_t {
  kHeader = 0x01,
  kFooter = 0x02,
  kSchema = 0x03,
  kChannel = 0x04,
  kMessage = 0x05,
  kChunk = 0x06,
  kMetadata = 0x0C,
  kDataEnd = 0x0F,
};

struct ReadDiagnostics {
  std::size_t skipped_channels = 0;  // channels on unrecognized topics
  std::size_t skipped_messages = 0;  // messages on those channels
  std::size_t ignored_records = 0;   // index/summary/attachment records
};

std::vector<std::uint8_t> EncodeSession(const SessionLog& session);
SessionLog DecodeSession(std::span<const std::uint8_t> bytes,
                         ReadDiagnostics* diagnostics = nullptr);

// Throws Error(kIoFailure) when the file cannot be written.
void WriteSession(const SessionLog& session, const std::filesystem::path& path);
SessionLog ReadSession(const std::filesystem::path& path,
                       ReadDiagnostics* diagnostics = nullptr);

// Depth payload codec, exposed for tests and tools.
std::vector<std::uint8_t> EncodeDepthPayload(const DepthMap& depth);
DepthMap DecodeDepthPayload(std::span<const std::uint8_t> payload);

}  // namespace stera

#endif  // STERA_LOG_FORMAT_H_
