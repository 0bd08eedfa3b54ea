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

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>

#include <nlohmann/json.hpp>

#include "stera/error.h"

namespace stera {
namespace {

using Json = nlohmann::ordered_json;

constexpr std::string_view kProfile = "stera";
constexpr std::string_view kLibrary = "stera-core 0.1";
constexpr std::string_view kSessionMetadataName = "stera.session";
constexpr std::string_view kJsonEncoding = "json";
constexpr std::string_view kDepthEncoding = "stera.depth.v1";

constexpr std::uint8_t kDepthDense = 0;
constexpr std::uint8_t kDepthSparse = 1;

// Channel ids are fixed so that output is byte-deterministic.
enum ChannelId : std::uint16_t {
  kChIntrinsics = 1,
  kChPose = 2,
  kChDepth = 3,
  kChHands = 4,
  kChImu = 5,
  kChMarkers = 6,
};

struct ChannelSpec {
  std::uint16_t id;
  std::string_view topic;
  std::string_view schema_name;
  std::string_view schema_encoding;
  std::string_view message_encoding;
  std::string_view schema_data;
};

constexpr ChannelSpec kChannels[] = {
    {kChIntrinsics, topics::kIntrinsics, "stera.CameraIntrinsics",
     "jsonschema", kJsonEncoding,
     R"({"type":"object","required":["fx","fy","cx","cy","w","h"]})"},
    {kChPose, topics::kPose, "stera.Pose", "jsonschema", kJsonEncoding,
     R"({"type":"object","required":["ts","t","q"]})"},
    {kChDepth, topics::kDepth, "stera.DepthMap", kDepthEncoding,
     kDepthEncoding,
     "u32 width, u32 height, u8 format (0 dense f32, 1 sparse), body LE"},
    {kChHands, topics::kHands, "stera.Hands", "jsonschema", kJsonEncoding,
     R"({"type":"object","required":["ts","hands"]})"},
    {kChImu, topics::kImu, "stera.Imu", "jsonschema", kJsonEncoding,
     R"({"type":"object","required":["ts","accel","gyro"]})"},
    {kChMarkers, topics::kMarkers, "stera.Marker", "jsonschema",
     kJsonEncoding, R"({"type":"object","required":["ts","id","p_cam"]})"},
};

const ChannelSpec* FindSpecByTopic(std::string_view topic) {
  for (const auto& spec : kChannels) {
    if (spec.topic == topic) return &spec;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Little-endian primitives.

class ByteWriter {
 public:
  void U8(std::uint8_t v) { buf_.push_back(v); }
  void U16(std::uint16_t v) { Le(v, 2); }
  void U32(std::uint32_t v) { Le(v, 4); }
  void U64(std::uint64_t v) { Le(v, 8); }
  void F32(float v) { U32(std::bit_cast<std::uint32_t>(v)); }
  void Bytes(std::span<const std::uint8_t> b) {
    buf_.insert(buf_.end(), b.begin(), b.end());
  }
  void Str(std::string_view s) {
    U32(static_cast<std::uint32_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }
  void StringMap(const std::map<std::string, std::string>& m) {
    ByteWriter body;
    for (const auto& [k, v] : m) {
      body.Str(k);
      body.Str(v);
    }
    U32(static_cast<std::uint32_t>(body.size()));
    Bytes(body.data());
  }

  std::size_t size() const { return buf_.size(); }
  const std::vector<std::uint8_t>& data() const { return buf_; }
  std::vector<std::uint8_t> Take() { return std::move(buf_); }

 private:
  void Le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ >= data_.size(); }

  std::uint8_t U8() { return static_cast<std::uint8_t>(Le(1)); }
  std::uint16_t U16() { return static_cast<std::uint16_t>(Le(2)); }
  std::uint32_t U32() { return static_cast<std::uint32_t>(Le(4)); }
  std::uint64_t U64() { return Le(8); }
  float F32() { return std::bit_cast<float>(U32()); }

  std::span<const std::uint8_t> Bytes(std::uint64_t n) {
    Need(n);
    auto out = data_.subspan(pos_, static_cast<std::size_t>(n));
    pos_ += static_cast<std::size_t>(n);
    return out;
  }
  std::span<const std::uint8_t> Rest() { return Bytes(remaining()); }
  std::string Str() {
    auto b = Bytes(U32());
    return std::string(b.begin(), b.end());
  }
  std::map<std::string, std::string> StringMap() {
    ByteReader body(Bytes(U32()));
    std::map<std::string, std::string> out;
    while (!body.done()) {
      std::string k = body.Str();
      out[k] = body.Str();
    }
    return out;
  }

 private:
  void Need(std::uint64_t n) const {
    if (n > remaining()) {
      throw Error(ErrorCode::kMalformedRecord,
                  "record truncated: need " + std::to_string(n) +
                      " bytes, have " + std::to_string(remaining()));
    }
  }
  std::uint64_t Le(int n) {
    Need(static_cast<std::uint64_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

void WriteRecord(ByteWriter& out, Opcode op, const ByteWriter& body) {
  out.U8(static_cast<std::uint8_t>(op));
  out.U64(body.size());
  out.Bytes(body.data());
}

// ---------------------------------------------------------------------------
// JSON payloads.

Json Vec3Json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

std::vector<std::uint8_t> JsonBytes(const Json& j) {
  const std::string s = j.dump();
  return std::vector<std::uint8_t>(s.begin(), s.end());
}

[[noreturn]] void Mismatch(std::string_view topic, const std::string& what) {
  throw Error(ErrorCode::kSchemaMismatch,
              std::string(topic) + ": " + what);
}

double Num(const Json& j, std::string_view topic, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    Mismatch(topic, std::string("missing numeric field '") + key + "'");
  }
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) Mismatch(topic, std::string("non-finite '") + key + "'");
  return v;
}

TimestampNs Ts(const Json& j, std::string_view topic) {
  if (!j.contains("ts") || !j.at("ts").is_number_unsigned()) {
    // Non-negative integers parse as unsigned; anything else is rejected.
    if (j.contains("ts") && j.at("ts").is_number_integer() &&
        j.at("ts").get<std::int64_t>() >= 0) {
      return j.at("ts").get<std::uint64_t>();
    }
    Mismatch(topic, "missing unsigned field 'ts'");
  }
  return j.at("ts").get<std::uint64_t>();
}

template <int N>
Eigen::Matrix<double, N, 1> FixedVec(const Json& j, std::string_view topic,
                                     const char* what) {
  if (!j.is_array() || j.size() != N) {
    Mismatch(topic, std::string(what) + " must be an array of " +
                        std::to_string(N) + " numbers");
  }
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) {
    if (!j[i].is_number()) Mismatch(topic, std::string(what) + " element not numeric");
    v[i] = j[i].get<double>();
    if (!std::isfinite(v[i])) Mismatch(topic, std::string(what) + " non-finite");
  }
  return v;
}

const Json& Field(const Json& j, std::string_view topic, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    Mismatch(topic, std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

Json ParseJson(std::span<const std::uint8_t> payload, std::string_view topic) {
  Json j = Json::parse(payload.begin(), payload.end(), nullptr,
                       /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) Mismatch(topic, "payload is not a JSON object");
  return j;
}

std::vector<std::uint8_t> EncodeIntrinsics(const CameraIntrinsics& in) {
  Json j;
  j["fx"] = in.fx;
  j["fy"] = in.fy;
  j["cx"] = in.cx;
  j["cy"] = in.cy;
  j["w"] = in.width;
  j["h"] = in.height;
  return JsonBytes(j);
}

CameraIntrinsics DecodeIntrinsics(const Json& j) {
  const auto topic = topics::kIntrinsics;
  CameraIntrinsics in;
  in.fx = Num(j, topic, "fx");
  in.fy = Num(j, topic, "fy");
  in.cx = Num(j, topic, "cx");
  in.cy = Num(j, topic, "cy");
  const auto& w = Field(j, topic, "w");
  const auto& h = Field(j, topic, "h");
  if (!w.is_number_unsigned() || !h.is_number_unsigned()) {
    Mismatch(topic, "w/h must be unsigned integers");
  }
  in.width = w.get<std::uint32_t>();
  in.height = h.get<std::uint32_t>();
  if (!in.IsValid()) Mismatch(topic, "intrinsics violate fx,fy>0, 0<=c<size");
  return in;
}

std::vector<std::uint8_t> EncodePose(const StampedPose& sp) {
  const auto& q = sp.pose.rotation;
  Json j;
  j["ts"] = sp.ts;
  j["t"] = Vec3Json(sp.pose.translation);
  j["q"] = Json::array({q.w(), q.x(), q.y(), q.z()});
  return JsonBytes(j);
}

StampedPose DecodePose(const Json& j) {
  const auto topic = topics::kPose;
  StampedPose sp;
  sp.ts = Ts(j, topic);
  sp.pose.translation = FixedVec<3>(Field(j, topic, "t"), topic, "t");
  const Eigen::Vector4d q = FixedVec<4>(Field(j, topic, "q"), topic, "q");
  sp.pose.rotation = Eigen::Quaterniond(q[0], q[1], q[2], q[3]);
  if (std::abs(q.norm() - 1.0) > 1e-6) Mismatch(topic, "q is not a unit quaternion");
  return sp;
}

std::vector<std::uint8_t> EncodeHands(const HandFrame& frame) {
  Json hands = Json::array();
  for (const auto& h : frame.hands) {
    Json px = Json::array();
    Json rel = Json::array();
    for (std::size_t k = 0; k < kNumHandJoints; ++k) {
      px.push_back(Json::array({h.pixels[k].x(), h.pixels[k].y()}));
      rel.push_back(Vec3Json(h.relative[k]));
    }
    Json jh;
    jh["side"] = HandSideName(h.side);
    jh["conf"] = h.confidence;
    jh["px"] = std::move(px);
    jh["rel"] = std::move(rel);
    hands.push_back(std::move(jh));
  }
  Json j;
  j["ts"] = frame.ts;
  j["hands"] = std::move(hands);
  return JsonBytes(j);
}

HandFrame DecodeHands(const Json& j) {
  const auto topic = topics::kHands;
  HandFrame frame;
  frame.ts = Ts(j, topic);
  const auto& hands = Field(j, topic, "hands");
  if (!hands.is_array()) Mismatch(topic, "'hands' must be an array");
  for (const auto& jh : hands) {
    HandObservation h;
    const auto& side = Field(jh, topic, "side");
    if (side == "left") {
      h.side = HandSide::kLeft;
    } else if (side == "right") {
      h.side = HandSide::kRight;
    } else {
      Mismatch(topic, "side must be \"left\" or \"right\"");
    }
    h.confidence = Num(jh, topic, "conf");
    if (h.confidence < 0.0 || h.confidence > 1.0) Mismatch(topic, "conf outside [0,1]");
    const auto& px = Field(jh, topic, "px");
    const auto& rel = Field(jh, topic, "rel");
    if (!px.is_array() || px.size() != kNumHandJoints || !rel.is_array() ||
        rel.size() != kNumHandJoints) {
      Mismatch(topic, "px and rel must hold exactly 21 joints");
    }
    for (std::size_t k = 0; k < kNumHandJoints; ++k) {
      h.pixels[k] = FixedVec<2>(px[k], topic, "px");
      h.relative[k] = FixedVec<3>(rel[k], topic, "rel");
    }
    frame.hands.push_back(h);
  }
  return frame;
}

std::vector<std::uint8_t> EncodeImu(const ImuSample& s) {
  Json j;
  j["ts"] = s.ts;
  j["accel"] = Vec3Json(s.accel);
  j["gyro"] = Vec3Json(s.gyro);
  return JsonBytes(j);
}

ImuSample DecodeImu(const Json& j) {
  const auto topic = topics::kImu;
  ImuSample s;
  s.ts = Ts(j, topic);
  s.accel = FixedVec<3>(Field(j, topic, "accel"), topic, "accel");
  s.gyro = FixedVec<3>(Field(j, topic, "gyro"), topic, "gyro");
  return s;
}

std::vector<std::uint8_t> EncodeMarker(const MarkerSighting& m) {
  Json j;
  j["ts"] = m.ts;
  j["id"] = m.marker_id;
  j["p_cam"] = Vec3Json(m.p_cam);
  return JsonBytes(j);
}

MarkerSighting DecodeMarker(const Json& j) {
  const auto topic = topics::kMarkers;
  MarkerSighting m;
  m.ts = Ts(j, topic);
  const auto& id = Field(j, topic, "id");
  if (!id.is_number_integer() || id.get<std::int64_t>() < 0) {
    Mismatch(topic, "id must be a non-negative integer");
  }
  m.marker_id = id.get<std::int64_t>();
  m.p_cam = FixedVec<3>(Field(j, topic, "p_cam"), topic, "p_cam");
  return m;
}

// ---------------------------------------------------------------------------
// Reader state.

struct ChannelInfo {
  const ChannelSpec* spec = nullptr;  // null: unrecognized topic
};

class SessionDecoder {
 public:
  explicit SessionDecoder(ReadDiagnostics* diag) : diag_(diag) {}

  // Parses records until Footer. Returns true when the Footer was seen.
  bool ParseRecords(ByteReader& in, bool inside_chunk) {
    while (!in.done()) {
      const auto op = in.U8();
      const auto len = in.U64();
      ByteReader body(in.Bytes(len));
      switch (static_cast<Opcode>(op)) {
        case Opcode::kHeader:
          if (inside_chunk) Malformed("Header inside chunk");
          body.Str();  // profile
          body.Str();  // library
          break;
        case Opcode::kFooter:
          if (inside_chunk) Malformed("Footer inside chunk");
          return true;
        case Opcode::kSchema:
          body.U16();
          body.Str();
          body.Str();
          body.Bytes(body.U32());
          break;
        case Opcode::kChannel:
          OnChannel(body);
          break;
        case Opcode::kMessage:
          OnMessage(body);
          break;
        case Opcode::kChunk:
          if (inside_chunk) Malformed("nested chunk");
          OnChunk(body);
          break;
        case Opcode::kMetadata:
          OnMetadata(body);
          break;
        case Opcode::kDataEnd:
          break;
        default:
          ++ignored_records_;
          break;
      }
    }
    return false;
  }

  SessionLog Finish() {
    if (!intrinsics_) {
      throw Error(ErrorCode::kMissingIntrinsics,
                  "no message on " + std::string(topics::kIntrinsics));
    }
    session_.intrinsics = *intrinsics_;
    SortStreams(session_);
    if (diag_ != nullptr) {
      diag_->skipped_channels = skipped_channels_;
      diag_->skipped_messages = skipped_messages_;
      diag_->ignored_records = ignored_records_;
    }
    return std::move(session_);
  }

 private:
  [[noreturn]] static void Malformed(const std::string& what) {
    throw Error(ErrorCode::kMalformedRecord, what);
  }

  void OnChannel(ByteReader& body) {
    const auto id = body.U16();
    body.U16();  // schema id
    const std::string topic = body.Str();
    const std::string encoding = body.Str();
    body.StringMap();
    ChannelInfo info;
    info.spec = FindSpecByTopic(topic);
    if (info.spec == nullptr) {
      ++skipped_channels_;
    } else if (encoding != info.spec->message_encoding) {
      throw Error(ErrorCode::kSchemaMismatch,
                  topic + ": message encoding '" + encoding + "', expected '" +
                      std::string(info.spec->message_encoding) + "'");
    }
    channels_[id] = info;
  }

  void OnMetadata(ByteReader& body) {
    const std::string name = body.Str();
    auto m = body.StringMap();
    if (name == kSessionMetadataName) {
      if (auto it = m.find("session_id"); it != m.end()) {
        session_.session_id = it->second;
      }
    }
  }

  void OnChunk(ByteReader& body) {
    body.U64();  // message_start_time
    body.U64();  // message_end_time
    body.U64();  // uncompressed_size
    body.U32();  // uncompressed_crc
    const std::string compression = body.Str();
    if (!compression.empty()) {
      throw Error(ErrorCode::kUnsupportedCompression,
                  "chunk compression '" + compression + "' is not supported");
    }
    ByteReader records(body.Bytes(body.U64()));
    ParseRecords(records, /*inside_chunk=*/true);
  }

  void OnMessage(ByteReader& body) {
    const auto channel_id = body.U16();
    body.U32();  // sequence
    const auto log_time = body.U64();
    body.U64();  // publish_time
    auto payload = body.Rest();
    auto it = channels_.find(channel_id);
    if (it == channels_.end()) {
      Malformed("message on undeclared channel " + std::to_string(channel_id));
    }
    const ChannelSpec* spec = it->second.spec;
    if (spec == nullptr) {
      ++skipped_messages_;
      return;
    }
    if (spec->topic == topics::kDepth) {
      session_.depth.push_back({log_time, DecodeDepthPayload(payload)});
      return;
    }
    const Json j = ParseJson(payload, spec->topic);
    if (spec->topic == topics::kIntrinsics) {
      if (intrinsics_) {
        throw Error(ErrorCode::kSchemaMismatch,
                    "intrinsics must appear exactly once");
      }
      intrinsics_ = DecodeIntrinsics(j);
    } else if (spec->topic == topics::kPose) {
      session_.poses.push_back(DecodePose(j));
    } else if (spec->topic == topics::kHands) {
      session_.hands.push_back(DecodeHands(j));
    } else if (spec->topic == topics::kImu) {
      session_.imu.push_back(DecodeImu(j));
    } else if (spec->topic == topics::kMarkers) {
      session_.markers.push_back(DecodeMarker(j));
    }
  }

  ReadDiagnostics* diag_;
  SessionLog session_;
  std::optional<CameraIntrinsics> intrinsics_;
  std::map<std::uint16_t, ChannelInfo> channels_;
  std::size_t skipped_channels_ = 0;
  std::size_t skipped_messages_ = 0;
  std::size_t ignored_records_ = 0;
};

struct PendingMessage {
  TimestampNs log_time;
  std::uint16_t channel;
  std::uint32_t sequence;
  std::vector<std::uint8_t> payload;
};

}  // namespace

std::vector<std::uint8_t> EncodeDepthPayload(const DepthMap& depth) {
  if (!depth.IsValid()) {
    throw Error(ErrorCode::kInvalidArgument,
                "depth map must be finite, non-negative and width*height sized");
  }
  std::size_t nonzero = 0;
  for (float v : depth.values) nonzero += (v != 0.0f) ? 1 : 0;
  ByteWriter w;
  w.U32(depth.width);
  w.U32(depth.height);
  // Sparse whenever it is strictly smaller than the dense body.
  if (2 * nonzero < depth.values.size()) {
    w.U8(kDepthSparse);
    w.U32(static_cast<std::uint32_t>(nonzero));
    for (std::size_t i = 0; i < depth.values.size(); ++i) {
      if (depth.values[i] != 0.0f) {
        w.U32(static_cast<std::uint32_t>(i));
        w.F32(depth.values[i]);
      }
    }
  } else {
    w.U8(kDepthDense);
    for (float v : depth.values) w.F32(v);
  }
  return w.Take();
}

DepthMap DecodeDepthPayload(std::span<const std::uint8_t> payload) {
  const auto topic = topics::kDepth;
  try {
    ByteReader r(payload);
    const auto width = r.U32();
    const auto height = r.U32();
    const auto format = r.U8();
    const std::uint64_t n = static_cast<std::uint64_t>(width) * height;
    DepthMap depth;
    depth.width = width;
    depth.height = height;
    if (format == kDepthDense) {
      if (r.remaining() != n * 4) Mismatch(topic, "dense body size mismatch");
      depth.values.resize(static_cast<std::size_t>(n));
      for (auto& v : depth.values) v = r.F32();
    } else if (format == kDepthSparse) {
      const auto count = r.U32();
      if (r.remaining() != static_cast<std::uint64_t>(count) * 8) {
        Mismatch(topic, "sparse body size mismatch");
      }
      depth.values.assign(static_cast<std::size_t>(n), 0.0f);
      for (std::uint32_t k = 0; k < count; ++k) {
        const auto idx = r.U32();
        const float v = r.F32();
        if (idx >= n) Mismatch(topic, "sparse index out of range");
        depth.values[idx] = v;
      }
    } else {
      Mismatch(topic, "unknown depth format " + std::to_string(format));
    }
    if (!depth.IsValid()) Mismatch(topic, "depth values must be finite and >= 0");
    return depth;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kMalformedRecord) Mismatch(topic, e.what());
    throw;
  }
}

std::vector<std::uint8_t> EncodeSession(const SessionLog& session) {
  ByteWriter out;
  out.Bytes(kMcapMagic);

  {
    ByteWriter h;
    h.Str(kProfile);
    h.Str(kLibrary);
    WriteRecord(out, Opcode::kHeader, h);
  }
  {
    ByteWriter m;
    m.Str(kSessionMetadataName);
    m.StringMap({{"session_id", session.session_id}});
    WriteRecord(out, Opcode::kMetadata, m);
  }
  for (const auto& spec : kChannels) {
    ByteWriter s;
    s.U16(spec.id);
    s.Str(spec.schema_name);
    s.Str(spec.schema_encoding);
    s.Str(spec.schema_data);
    WriteRecord(out, Opcode::kSchema, s);
  }
  for (const auto& spec : kChannels) {
    ByteWriter c;
    c.U16(spec.id);
    c.U16(spec.id);  // schema id mirrors channel id
    c.Str(spec.topic);
    c.Str(spec.message_encoding);
    c.StringMap({});
    WriteRecord(out, Opcode::kChannel, c);
  }

  std::vector<PendingMessage> pending;
  pending.push_back({0, kChIntrinsics, 0, EncodeIntrinsics(session.intrinsics)});
  auto add_stream = [&pending](const auto& stream, std::uint16_t channel,
                               auto encode) {
    std::uint32_t seq = 0;
    for (const auto& item : stream) {
      pending.push_back({item.ts, channel, seq++, encode(item)});
    }
  };
  add_stream(session.poses, kChPose, EncodePose);
  add_stream(session.depth, kChDepth,
             [](const StampedDepth& d) { return EncodeDepthPayload(d.depth); });
  add_stream(session.hands, kChHands, EncodeHands);
  add_stream(session.imu, kChImu, EncodeImu);
  add_stream(session.markers, kChMarkers, EncodeMarker);
  // Intrinsics first, then a time-ordered interleave of all streams.
  std::stable_sort(pending.begin() + 1, pending.end(),
                   [](const PendingMessage& a, const PendingMessage& b) {
                     return std::tie(a.log_time, a.channel, a.sequence) <
                            std::tie(b.log_time, b.channel, b.sequence);
                   });
  for (const auto& msg : pending) {
    ByteWriter m;
    m.U16(msg.channel);
    m.U32(msg.sequence);
    m.U64(msg.log_time);
    m.U64(msg.log_time);
    m.Bytes(msg.payload);
    WriteRecord(out, Opcode::kMessage, m);
  }

  {
    ByteWriter d;
    d.U32(0);  // data section CRC not computed
    WriteRecord(out, Opcode::kDataEnd, d);
  }
  {
    ByteWriter f;
    f.U64(0);  // no summary section
    f.U64(0);
    f.U32(0);
    WriteRecord(out, Opcode::kFooter, f);
  }
  out.Bytes(kMcapMagic);
  return out.Take();
}

SessionLog DecodeSession(std::span<const std::uint8_t> bytes,
                         ReadDiagnostics* diagnostics) {
  if (bytes.size() < kMcapMagic.size() ||
      !std::equal(kMcapMagic.begin(), kMcapMagic.end(), bytes.begin())) {
    throw Error(ErrorCode::kBadMagic, "file does not start with MCAP magic");
  }
  ByteReader in(bytes.subspan(kMcapMagic.size()));
  SessionDecoder decoder(diagnostics);
  if (!decoder.ParseRecords(in, /*inside_chunk=*/false)) {
    throw Error(ErrorCode::kMalformedRecord, "missing Footer record");
  }
  auto trailer = in.Rest();
  if (trailer.size() != kMcapMagic.size() ||
      !std::equal(kMcapMagic.begin(), kMcapMagic.end(), trailer.begin())) {
    throw Error(ErrorCode::kBadMagic, "missing trailing MCAP magic");
  }
  return decoder.Finish();
}

void WriteSession(const SessionLog& session, const std::filesystem::path& path) {
  const auto bytes = EncodeSession(session);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(ErrorCode::kIoFailure, "write failed: " + path.string());
}

SessionLog ReadSession(const std::filesystem::path& path,
                       ReadDiagnostics* diagnostics) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return DecodeSession(bytes, diagnostics);
}

}  // namespace stera
