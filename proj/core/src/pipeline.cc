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

#include "stera/pipeline.h"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>
#include <utility>

#include "stera/error.h"
#include "stera/hand_kinematics.h"
#include "stera/log_format.h"
#include "stera/traj_metrics.h"

namespace stera {
namespace fs = std::filesystem;

namespace {

fs::path Resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::optional<fs::path> OptionalPath(const nlohmann::json& j, const char* key,
                                     const fs::path& base) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return Resolve(base, j.at(key).get<std::string>());
}

// Files written by one export, kept in memory until hashed.
class ExportWriter {
 public:
  explicit ExportWriter(fs::path root) : root_(std::move(root)) {}

  void Add(const std::string& rel, std::string content) {
    WriteTextFile(root_ / rel, content);
    manifest_.files.push_back({rel, Sha256Hex(content), content.size()});
  }

  ExportManifest Finish(const std::string& session_id) {
    std::sort(manifest_.files.begin(), manifest_.files.end(),
              [](const auto& a, const auto& b) { return a.path < b.path; });
    OJson files = OJson::array();
    for (const auto& f : manifest_.files) {
      OJson e;
      e["path"] = f.path;
      e["sha256"] = f.sha256;
      e["bytes"] = f.bytes;
      files.push_back(std::move(e));
    }
    OJson m;
    m["session_id"] = session_id;
    m["files"] = std::move(files);
    WriteJsonFile(root_ / "manifest.json", m);
    return manifest_;
  }

 private:
  fs::path root_;
  ExportManifest manifest_;
};

OJson HandRow(const WorldHandFrame& f) {
  OJson joints = OJson::array();
  OJson valid = OJson::array();
  for (std::size_t k = 0; k < kNumHandJoints; ++k) {
    const Vec3& p = f.joints[k];
    joints.push_back(f.valid(k) ? OJson::array({p.x(), p.y(), p.z()}) : OJson(nullptr));
    valid.push_back(f.valid(k));
  }
  OJson j;
  j["confidence"] = f.confidence;
  j["joints"] = std::move(joints);
  j["valid"] = std::move(valid);
  return j;
}

std::string SafeFileName(const std::string& id) {
  std::string out;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
    out += ok ? c : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "session";
  return out;
}

std::string CodeName(const std::exception& e) {
  if (const auto* se = dynamic_cast<const Error*>(&e)) {
    return std::string(ErrorCodeName(se->code()));
  }
  return "Internal";
}

struct Resources {
  JointLimits limits;
  ModifierLexicon lexicon;
};

// Everything phase one computes for a session; files are written later.
struct SessionWork {
  SessionOutcome outcome;
  OJson report;
  SessionLog session;  // depth pixels dropped after anchoring
  std::vector<WorldHandFrame> world;
  std::vector<AtomicSpan> spans;
  std::optional<InstructionTree> tree;
  bool exportable = false;
};

SessionWork ProcessSession(const SessionInput& input, const PipelineConfig& config,
                           const Resources& res) {
  SessionWork w;
  w.outcome.input = input.log.generic_string();
  w.outcome.session_id = input.log.stem().string();
  OJson warnings = OJson::array();
  auto warn = [&](std::string_view stage, const std::exception& e) {
    warnings.push_back(std::string(stage) + ": " + e.what());
  };

  OJson& r = w.report;
  r["session_id"] = nullptr;
  r["input"] = w.outcome.input;
  r["status"] = "ok";
  r["error"] = nullptr;
  r["warnings"] = nullptr;
  for (const char* key : {"session", "anchoring", "kinematics", "labels",
                          "hierarchy", "trajectory", "drift", "export"}) {
    r[key] = nullptr;
  }

  try {
    ReadDiagnostics diag;
    w.session = ReadSession(input.log, &diag);
    w.outcome.session_id = w.session.session_id.empty() ? w.outcome.session_id
                                                        : w.session.session_id;
    r["session"] = SessionSummaryJson(w.session, diag);

    if (!w.session.hands.empty()) {
      try {
        w.world = AnchorHands(w.session, {config.tolerance});
        r["anchoring"] = AnchorSummaryJson(w.world);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kMissingStream) throw;
        warn("anchoring", e);
      }
    }
    for (auto& d : w.session.depth) std::vector<float>().swap(d.depth.values);

    if (!w.world.empty()) {
      try {
        r["kinematics"] = ToJson(ComputeKinematicsReport(
            w.session.hands, w.world, {config.confidence_gate, res.limits}));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNoData) throw;
        warn("kinematics", e);
      }
    }

    if (input.spans) {
      w.spans = ReadSpans(*input.spans);
      SortSpans(w.spans);
      const auto defects = DetectDefects(w.spans);
      w.outcome.label_defects = defects.size();
      OJson labels;
      try {
        labels["stats"] = ToJson(ComputeLabelStats(w.spans, res.lexicon));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kEmptyCorpus) throw;
        labels["stats"] = nullptr;
        warn("labels", e);
      }
      labels["defects"] = DefectsToJson(defects);
      r["labels"] = std::move(labels);
    }

    std::string tree_source;
    if (input.tree) {
      w.tree = ReadTree(*input.tree);
      tree_source = "file";
    } else if (!w.spans.empty()) {
      if (config.generator) {
        w.tree = BuildTreeExternal(w.spans, *config.generator, config.generator_retries);
        tree_source = "external";
      } else {
        w.tree = BuildTreeGap(w.spans, config.episode_gap_ns, config.subgoal_gap_ns);
        tree_source = "gap";
      }
    }
    if (w.tree && !input.spans) {
      warnings.push_back("hierarchy: tree given without spans; not validated");
    } else if (w.tree) {
      const auto violations = ValidateTree(*w.tree, w.spans);
      w.outcome.tree_violations = violations.size();
      OJson h;
      h["source"] = tree_source;
      h["sub_goals"] = w.tree->sub_goals.size();
      h["episodes"] = w.tree->EpisodeCount();
      h["violations"] = ViolationsToJson(violations);
      h["stats"] = violations.empty() ? ToJson(ComputeTreeStats(*w.tree, w.spans))
                                      : OJson(nullptr);
      r["hierarchy"] = std::move(h);
      w.exportable = violations.empty() && config.export_episodes;
    }

    if (input.ground_truth) {
      const Trajectory gt = ReadSession(*input.ground_truth).poses;
      try {
        r["trajectory"] = ToJson(EvaluateTrajectory(w.session.poses, gt,
                                                    config.rpe_delta, config.tolerance));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kInsufficientOverlap &&
            e.code() != ErrorCode::kDegenerateInput) {
          throw;
        }
        warn("trajectory", e);
      }
    }

    if (!w.session.markers.empty()) {
      try {
        r["drift"] = ToJson(MarkerDrift(w.session, config.tolerance));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNoRevisit && e.code() != ErrorCode::kMissingStream) {
          throw;
        }
        warn("drift", e);
      }
    }
    w.outcome.ok = true;
  } catch (const std::exception& e) {
    w.outcome.ok = false;
    w.outcome.error_code = CodeName(e);
    w.outcome.error_message = e.what();
    r["status"] = "failed";
    OJson err;
    err["code"] = w.outcome.error_code;
    err["message"] = w.outcome.error_message;
    r["error"] = std::move(err);
    w.exportable = false;
  }
  r["session_id"] = w.outcome.session_id;
  r["warnings"] = std::move(warnings);
  return w;
}

}  // namespace

SessionInput DiscoverSidecars(const fs::path& log) {
  SessionInput in;
  in.log = log;
  const fs::path dir = log.parent_path();
  const std::string stem = log.stem().string();
  auto probe = [&](const std::string& suffix) -> std::optional<fs::path> {
    fs::path p = dir / (stem + suffix);
    std::error_code ec;
    if (fs::is_regular_file(p, ec)) return p;
    return std::nullopt;
  };
  in.spans = probe(".spans.jsonl");
  in.tree = probe(".tree.json");
  in.ground_truth = probe(".gt.mcap");
  return in;
}

PipelineConfig PipelineConfigFromJson(const nlohmann::json& j, const fs::path& base) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "config must be a JSON object");
  PipelineConfig c;
  try {
    if (!j.contains("inputs") || !j.at("inputs").is_array()) {
      throw Error(ErrorCode::kInvalidArgument, "config needs an \"inputs\" array");
    }
    for (const auto& in : j.at("inputs")) {
      if (in.is_string()) {
        c.inputs.push_back(DiscoverSidecars(Resolve(base, in.get<std::string>())));
      } else if (in.is_object()) {
        SessionInput s;
        s.log = Resolve(base, in.at("log").get<std::string>());
        s.spans = OptionalPath(in, "spans", base);
        s.tree = OptionalPath(in, "tree", base);
        s.ground_truth = OptionalPath(in, "ground_truth", base);
        c.inputs.push_back(std::move(s));
      } else {
        throw Error(ErrorCode::kInvalidArgument, "inputs must be strings or objects");
      }
    }
    if (j.contains("out_dir")) c.out_dir = Resolve(base, j.at("out_dir").get<std::string>());
    if (j.contains("workers")) {
      const auto w = j.at("workers").get<std::int64_t>();
      if (w < 1) throw Error(ErrorCode::kInvalidArgument, "workers must be >= 1");
      c.workers = static_cast<std::size_t>(w);
    }
    if (j.contains("tolerance_ms")) {
      const double ms = j.at("tolerance_ms").get<double>();
      if (!(ms >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "tolerance_ms must be >= 0");
      c.tolerance = static_cast<TimestampNs>(std::llround(ms * 1e6));
    }
    c.rpe_delta = j.value("rpe_delta_s", c.rpe_delta);
    if (!(c.rpe_delta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "rpe_delta_s must be > 0");
    c.confidence_gate = j.value("confidence_gate", c.confidence_gate);
    if (!(c.confidence_gate >= 0.0 && c.confidence_gate <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "confidence_gate must be in [0, 1]");
    }
    c.joint_limits_file = OptionalPath(j, "joint_limits", base);
    c.lexicon_file = OptionalPath(j, "lexicon", base);
    if (j.contains("episode_gap_s")) {
      c.episode_gap_ns = std::llround(j.at("episode_gap_s").get<double>() * 1e9);
    }
    if (j.contains("subgoal_gap_s")) {
      c.subgoal_gap_ns = std::llround(j.at("subgoal_gap_s").get<double>() * 1e9);
    }
    if (c.episode_gap_ns >= c.subgoal_gap_ns) {
      throw Error(ErrorCode::kInvalidArgument, "episode_gap_s must be below subgoal_gap_s");
    }
    if (j.contains("generator") && !j.at("generator").is_null()) {
      const auto& g = j.at("generator");
      GeneratorEndpoint ep;
      ep.url = g.at("url").get<std::string>();
      ep.auth_token = g.value("token", std::string());
      ep.timeout = std::chrono::milliseconds(
          std::llround(g.value("timeout_s", 30.0) * 1000.0));
      c.generator = std::move(ep);
      c.generator_retries = g.value("retries", c.generator_retries);
    }
    c.export_episodes = j.value("export", c.export_episodes);
    if (j.contains("strict")) {
      c.fail_on_tree_violations = j.at("strict").value("tree", c.fail_on_tree_violations);
      c.fail_on_label_defects = j.at("strict").value("labels", c.fail_on_label_defects);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad config: ") + e.what());
  }
  return c;
}

std::string Sha256Hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIoFailure, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

ExportManifest ExportTrainingSet(const SessionLog& session, const InstructionTree& tree,
                                 std::span<const AtomicSpan> spans,
                                 std::span<const WorldHandFrame> world_hands,
                                 const fs::path& out_dir, TimestampNs tolerance) {
  const auto violations = ValidateTree(tree, spans);
  if (!violations.empty()) {
    throw Error(ErrorCode::kInvalidTree,
                std::to_string(violations.size()) + " violation(s), first: " +
                    std::string(ViolationKindName(violations.front().kind)) + " " +
                    violations.front().detail);
  }
  std::error_code ec;
  fs::remove_all(out_dir / "episodes", ec);
  fs::create_directories(out_dir / "episodes", ec);
  if (ec) throw Error(ErrorCode::kIoFailure, "cannot create " + out_dir.string() + ": " + ec.message());

  std::map<SpanId, const AtomicSpan*> by_id;
  for (const auto& s : spans) by_id[s.id] = &s;

  // Per-side hand frames sorted by time for nearest lookup.
  std::map<HandSide, std::vector<const WorldHandFrame*>> hands;
  for (const auto& f : world_hands) hands[f.side].push_back(&f);
  std::map<HandSide, std::vector<TimestampNs>> hand_ts;
  for (auto& [side, v] : hands) {
    std::stable_sort(v.begin(), v.end(), [](auto* a, auto* b) { return a->ts < b->ts; });
    for (auto* f : v) hand_ts[side].push_back(f->ts);
  }

  ExportWriter writer(out_dir);
  std::size_t frames_exported = 0;
  for (const auto& sg : tree.sub_goals) {
    for (const auto& ep : sg.episodes) {
      std::vector<const AtomicSpan*> ep_spans;
      for (SpanId id : ep.span_ids) ep_spans.push_back(by_id.at(id));
      std::stable_sort(ep_spans.begin(), ep_spans.end(), [](auto* a, auto* b) {
        return std::tie(a->start, a->end, a->id) < std::tie(b->start, b->end, b->id);
      });

      OJson atomic = OJson::array();
      for (auto* s : ep_spans) atomic.push_back(SpanToJson(*s));
      OJson instr;
      instr["session_goal"] = tree.goal;
      instr["sub_goal"] = sg.description;
      instr["episode"] = ep.description;
      OJson header;
      header["kind"] = "header";
      header["session_id"] = session.session_id;
      header["sub_goal_id"] = sg.id;
      header["episode_id"] = ep.id;
      header["start_ns"] = ep.start;
      header["end_ns"] = ep.end;
      header["instructions"] = std::move(instr);
      header["atomic_spans"] = std::move(atomic);
      std::string text = header.dump() + "\n";

      for (const auto& sp : session.poses) {
        if (sp.ts < ep.start || sp.ts > ep.end) continue;
        OJson row;
        row["kind"] = "frame";
        row["ts_ns"] = sp.ts;
        row["pose"] = ToJson(sp.pose);
        for (HandSide side : {HandSide::kLeft, HandSide::kRight}) {
          OJson h = nullptr;
          if (auto it = hand_ts.find(side); it != hand_ts.end()) {
            if (auto idx = NearestIndex(it->second, sp.ts, tolerance)) {
              h = HandRow(*hands[side][*idx]);
            }
          }
          row[std::string(HandSideName(side))] = std::move(h);
        }
        OJson span_id = nullptr;
        for (auto* s : ep_spans) {
          if (s->start <= sp.ts && sp.ts <= s->end) {
            span_id = s->id;
            break;
          }
        }
        row["span_id"] = std::move(span_id);
        text += row.dump() + "\n";
        ++frames_exported;
      }
      writer.Add("episodes/" + SafeFileName(ep.id) + ".jsonl", std::move(text));
    }
  }

  std::size_t detections = 0;
  for (const auto& h : session.hands) detections += h.hands.size();
  OJson streams;
  streams["poses"] = session.poses.size();
  streams["depth"] = session.depth.size();
  streams["hands"] = session.hands.size();
  streams["hand_detections"] = detections;
  streams["imu"] = session.imu.size();
  streams["markers"] = session.markers.size();
  OJson meta;
  meta["format"] = "stera.export.v1";
  meta["session_id"] = session.session_id;
  meta["intrinsics"] = ToJson(session.intrinsics);
  meta["streams"] = std::move(streams);
  meta["atomic_spans"] = spans.size();
  meta["episodes"] = tree.EpisodeCount();
  meta["frames_exported"] = frames_exported;
  writer.Add("meta.json", DumpJson(meta));
  writer.Add("hierarchy.json", DumpJson(TreeToJson(tree)));
  return writer.Finish(session.session_id);
}

void ParallelFor(std::size_t n, std::size_t workers,
                 const std::function<void(std::size_t)>& fn) {
  const std::size_t threads = std::min(std::max<std::size_t>(workers, 1), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

RunResult RunPipeline(const PipelineConfig& config) {
  if (config.workers < 1) throw Error(ErrorCode::kInvalidArgument, "workers must be >= 1");
  Resources res{JointLimits::Default(), ModifierLexicon::Default()};
  if (config.joint_limits_file) {
    res.limits = JointLimits::FromJson(ReadJsonFile(*config.joint_limits_file));
  }
  if (config.lexicon_file) {
    res.lexicon = ModifierLexicon::FromJson(ReadJsonFile(*config.lexicon_file));
  }

  std::vector<SessionWork> work(config.inputs.size());
  ParallelFor(work.size(), config.workers, [&](std::size_t i) {
    work[i] = ProcessSession(config.inputs[i], config, res);
  });

  std::sort(work.begin(), work.end(), [](const SessionWork& a, const SessionWork& b) {
    return std::tie(a.outcome.session_id, a.outcome.input) <
           std::tie(b.outcome.session_id, b.outcome.input);
  });
  // Unique, filesystem-safe names in sorted order.
  std::vector<std::string> names(work.size());
  std::set<std::string> used;
  for (std::size_t i = 0; i < work.size(); ++i) {
    const std::string base = SafeFileName(work[i].outcome.session_id);
    std::string name = base;
    for (int k = 2; used.contains(name); ++k) name = base + "-" + std::to_string(k);
    used.insert(name);
    names[i] = name;
  }

  std::error_code ec;
  fs::create_directories(config.out_dir / "reports", ec);
  if (ec) {
    throw Error(ErrorCode::kIoFailure,
                "cannot create " + config.out_dir.string() + ": " + ec.message());
  }

  ParallelFor(work.size(), config.workers, [&](std::size_t i) {
    SessionWork& w = work[i];
    if (w.exportable) {
      const std::string rel = "export/" + names[i];
      try {
        const auto manifest = ExportTrainingSet(w.session, *w.tree, w.spans, w.world,
                                                config.out_dir / rel, config.tolerance);
        OJson files = OJson::array();
        for (const auto& f : manifest.files) {
          OJson e;
          e["path"] = f.path;
          e["sha256"] = f.sha256;
          files.push_back(std::move(e));
        }
        OJson ex;
        ex["dir"] = rel;
        ex["files"] = std::move(files);
        w.report["export"] = std::move(ex);
      } catch (const std::exception& e) {
        w.outcome.ok = false;
        w.outcome.error_code = CodeName(e);
        w.outcome.error_message = e.what();
        w.report["status"] = "failed";
        OJson err;
        err["code"] = w.outcome.error_code;
        err["message"] = w.outcome.error_message;
        w.report["error"] = std::move(err);
      }
    }
    w.outcome.report_path = "reports/" + names[i] + ".json";
    WriteJsonFile(config.out_dir / w.outcome.report_path, w.report);
    // Release the bulky per-session data early.
    w.session = SessionLog{};
    w.world.clear();
  });

  RunResult result;
  std::size_t failed = 0, defects = 0, violations = 0;
  OJson sessions = OJson::array();
  for (auto& w : work) {
    const auto& o = w.outcome;
    failed += o.ok ? 0 : 1;
    defects += o.label_defects;
    violations += o.tree_violations;
    OJson s;
    s["session_id"] = o.session_id;
    s["input"] = o.input;
    s["status"] = o.ok ? "ok" : "failed";
    if (o.ok) {
      s["error"] = nullptr;
    } else {
      OJson err;
      err["code"] = o.error_code;
      err["message"] = o.error_message;
      s["error"] = std::move(err);
    }
    s["label_defects"] = o.label_defects;
    s["tree_violations"] = o.tree_violations;
    s["report"] = o.report_path;
    sessions.push_back(std::move(s));
    result.sessions.push_back(o);
  }
  const bool bad = failed > 0 || (config.fail_on_tree_violations && violations > 0) ||
                   (config.fail_on_label_defects && defects > 0);
  result.exit_code = bad ? 1 : 0;

  OJson totals;
  totals["sessions"] = work.size();
  totals["ok"] = work.size() - failed;
  totals["failed"] = failed;
  totals["label_defects"] = defects;
  totals["tree_violations"] = violations;
  result.summary["sessions"] = std::move(sessions);
  result.summary["totals"] = std::move(totals);
  result.summary["exit_code"] = result.exit_code;
  WriteJsonFile(config.out_dir / "summary.json", result.summary);
  return result;
}

}  // namespace stera
