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

#include <gtest/gtest.h>

#include <atomic>
#include <functional>
#include <set>
#include <sstream>

#include "stera/error.h"
#include "stera/synth.h"
#include "test_util.h"

namespace stera {
namespace {

namespace fs = std::filesystem;

constexpr TimestampNs kSec = 1'000'000'000;

SynthSpec SmallSpec(const std::string& id, std::uint64_t seed) {
  SynthSpec spec;
  spec.session_id = id;
  spec.motion.kind = MotionKind::kLoop;
  spec.motion.speed = 0.3;
  spec.motion.duration = 2.0;
  spec.motion.seed = seed;
  spec.noise.position_sigma = 0.005;
  spec.noise.seed = seed;
  spec.label_count = 10;
  return spec;
}

PipelineConfig ConfigFor(const std::vector<fs::path>& logs, const fs::path& out,
                         std::size_t workers) {
  PipelineConfig c;
  for (const auto& l : logs) c.inputs.push_back(DiscoverSidecars(l));
  c.out_dir = out;
  c.workers = workers;
  return c;
}

std::vector<nlohmann::json> ReadJsonLines(const fs::path& p) {
  std::vector<nlohmann::json> rows;
  std::istringstream in(testing::ReadFileBytes(p));
  std::string line;
  while (std::getline(in, line)) rows.push_back(nlohmann::json::parse(line));
  return rows;
}

TEST(DiscoverSidecarsTest, FindsSiblings) {
  testing::TempDir dir;
  const auto log = testing::WriteSynthetic(dir.path(), SmallSpec("a", 1));
  const auto in = DiscoverSidecars(log);
  EXPECT_EQ(in.spans, dir / "a.spans.jsonl");
  EXPECT_EQ(in.tree, dir / "a.tree.json");
  EXPECT_EQ(in.ground_truth, dir / "a.gt.mcap");
  fs::remove(dir / "a.tree.json");
  EXPECT_FALSE(DiscoverSidecars(log).tree.has_value());
}

TEST(PipelineConfigTest, FromJson) {
  const auto c = PipelineConfigFromJson(nlohmann::json::parse(R"({
    "inputs": ["logs/a.mcap", {"log": "b.mcap", "spans": "b.jsonl"}],
    "out_dir": "out", "workers": 4, "tolerance_ms": 15,
    "episode_gap_s": 3, "subgoal_gap_s": 30,
    "strict": {"labels": true, "tree": false},
    "generator": {"url": "http://localhost:9/x", "retries": 1}
  })"),
                                        "/base");
  ASSERT_EQ(c.inputs.size(), 2u);
  EXPECT_EQ(c.inputs[0].log, fs::path("/base/logs/a.mcap"));
  EXPECT_EQ(c.inputs[1].spans, fs::path("/base/b.jsonl"));
  EXPECT_FALSE(c.inputs[1].tree.has_value());
  EXPECT_EQ(c.out_dir, fs::path("/base/out"));
  EXPECT_EQ(c.workers, 4u);
  EXPECT_EQ(c.tolerance, 15'000'000u);
  EXPECT_EQ(c.episode_gap_ns, 3 * static_cast<std::int64_t>(kSec));
  EXPECT_TRUE(c.fail_on_label_defects);
  EXPECT_FALSE(c.fail_on_tree_violations);
  ASSERT_TRUE(c.generator.has_value());
  EXPECT_EQ(c.generator_retries, 1u);

  auto bad = [](const char* text) {
    try {
      PipelineConfigFromJson(nlohmann::json::parse(text), ".");
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIoFailure;
  };
  EXPECT_EQ(bad(R"({})"), ErrorCode::kInvalidArgument);
  EXPECT_EQ(bad(R"({"inputs": [], "workers": 0})"), ErrorCode::kInvalidArgument);
  EXPECT_EQ(bad(R"({"inputs": [3]})"), ErrorCode::kInvalidArgument);
  EXPECT_EQ(bad(R"({"inputs": [], "episode_gap_s": 9, "subgoal_gap_s": 9})"),
            ErrorCode::kInvalidArgument);
}

TEST(ParallelForTest, VisitsEveryIndexOnce) {
  for (std::size_t workers : {1u, 3u, 16u}) {
    std::vector<std::atomic<int>> hits(100);
    ParallelFor(hits.size(), workers, [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
  EXPECT_THROW(ParallelFor(10, 4, [](std::size_t i) {
                 if (i == 7) throw Error(ErrorCode::kNoData, "x");
               }),
               Error);
}

TEST(Sha256Test, KnownVectors) {
  EXPECT_EQ(Sha256Hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(Sha256Hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(RunPipelineTest, DefectFreeSessionExitsZero) {
  testing::TempDir dir;
  const auto log = testing::WriteSynthetic(dir.path(), SmallSpec("clean", 3));
  const auto r = RunPipeline(ConfigFor({log}, dir / "out", 1));
  EXPECT_EQ(r.exit_code, 0);
  ASSERT_EQ(r.sessions.size(), 1u);
  EXPECT_TRUE(r.sessions[0].ok) << r.sessions[0].error_message;
  EXPECT_EQ(r.sessions[0].tree_violations, 0u);

  const auto report = ReadJsonFile(dir / "out" / r.sessions[0].report_path);
  EXPECT_EQ(report.at("status"), "ok");
  EXPECT_TRUE(report.at("hierarchy").at("violations").empty());
  EXPECT_EQ(report.at("hierarchy").at("source"), "file");
  EXPECT_FALSE(report.at("trajectory").is_null());
  EXPECT_FALSE(report.at("drift").is_null());
  EXPECT_FALSE(report.at("kinematics").is_null());
  EXPECT_TRUE(fs::exists(dir / "out" / "export" / "clean" / "meta.json"));
  EXPECT_TRUE(fs::exists(dir / "out" / "summary.json"));
}

TEST(RunPipelineTest, DuplicateAssignmentFailsRun) {
  testing::TempDir dir;
  const auto log = testing::WriteSynthetic(dir.path(), SmallSpec("dup", 4));
  auto tree = ReadTree(dir / "dup.tree.json");
  ASSERT_GE(tree.EpisodeCount(), 1u);
  auto& ep = tree.sub_goals.back().episodes.back();
  ep.span_ids.push_back(tree.sub_goals.front().episodes.front().span_ids.front());
  WriteTree(tree, dir / "dup.tree.json");

  const auto r = RunPipeline(ConfigFor({log}, dir / "out", 1));
  EXPECT_NE(r.exit_code, 0);
  const auto report = ReadJsonFile(dir / "out" / r.sessions[0].report_path);
  bool found = false;
  for (const auto& v : report.at("hierarchy").at("violations")) {
    found |= v.at("kind") == "DuplicateAssignment";
  }
  EXPECT_TRUE(found);
  // Invalid trees are never exported.
  EXPECT_TRUE(report.at("export").is_null());

  auto lenient = ConfigFor({log}, dir / "out2", 1);
  lenient.fail_on_tree_violations = false;
  EXPECT_EQ(RunPipeline(lenient).exit_code, 0);
}

TEST(RunPipelineTest, LabelDefectsOnlyFailWhenStrict) {
  testing::TempDir dir;
  auto spec = SmallSpec("defects", 5);
  spec.label_defects = {1, 2};
  const auto log = testing::WriteSynthetic(dir.path(), spec);
  auto config = ConfigFor({log}, dir / "out", 1);
  const auto r = RunPipeline(config);
  EXPECT_EQ(r.sessions[0].label_defects, 3u);
  EXPECT_EQ(r.exit_code, 0);
  config.fail_on_label_defects = true;
  EXPECT_EQ(RunPipeline(config).exit_code, 1);
}

TEST(RunPipelineTest, WorkerCountDoesNotChangeOutput) {
  testing::TempDir dir;
  std::vector<fs::path> logs;
  for (int i = 0; i < 10; ++i) {
    logs.push_back(testing::WriteSynthetic(dir.path(), SmallSpec("s" + std::to_string(i), 100 + i)));
  }
  const auto r1 = RunPipeline(ConfigFor(logs, dir / "w1", 1));
  const auto r8 = RunPipeline(ConfigFor(logs, dir / "w8", 8));
  EXPECT_EQ(r1.exit_code, 0);
  const std::string s1 = testing::ReadFileBytes(dir / "w1" / "summary.json");
  EXPECT_FALSE(s1.empty());
  EXPECT_EQ(s1, testing::ReadFileBytes(dir / "w8" / "summary.json"));
  for (const auto& o : r1.sessions) {
    EXPECT_EQ(testing::ReadFileBytes(dir / "w1" / o.report_path),
              testing::ReadFileBytes(dir / "w8" / o.report_path));
  }
}

TEST(RunPipelineTest, MalformedSessionIsIsolated) {
  testing::TempDir dir;
  const auto good = testing::WriteSynthetic(dir.path(), SmallSpec("good", 6));
  testing::WriteFileBytes(dir / "broken.mcap", std::string(64, '\0'));
  testing::WriteFileBytes(dir / "cut.mcap", testing::ReadFileBytes(good).substr(0, 200));
  const auto r = RunPipeline(ConfigFor({dir / "broken.mcap", good, dir / "cut.mcap"}, dir / "out", 3));
  EXPECT_EQ(r.exit_code, 1);
  ASSERT_EQ(r.sessions.size(), 3u);
  std::map<std::string, const SessionOutcome*> by_id;
  for (const auto& o : r.sessions) by_id[o.session_id] = &o;
  EXPECT_FALSE(by_id.at("broken")->ok);
  EXPECT_EQ(by_id.at("broken")->error_code, "BadMagic");
  EXPECT_FALSE(by_id.at("cut")->ok);
  EXPECT_TRUE(by_id.at("good")->ok);
  for (const auto& o : r.sessions) EXPECT_TRUE(fs::exists(dir / "out" / o.report_path));
}

TEST(RunPipelineTest, DuplicateSessionIdsGetDistinctReports) {
  testing::TempDir dir;
  fs::create_directories(dir / "a");
  fs::create_directories(dir / "b");
  const auto la = testing::WriteSynthetic(dir / "a", SmallSpec("same", 7));
  const auto lb = testing::WriteSynthetic(dir / "b", SmallSpec("same", 8));
  const auto r = RunPipeline(ConfigFor({lb, la}, dir / "out", 2));
  ASSERT_EQ(r.sessions.size(), 2u);
  EXPECT_NE(r.sessions[0].report_path, r.sessions[1].report_path);
  EXPECT_EQ(r.sessions[0].report_path, "reports/same.json");
  EXPECT_EQ(r.sessions[1].report_path, "reports/same-2.json");
  EXPECT_LT(r.sessions[0].input, r.sessions[1].input);
}

// Poses every 0.5 s over 10 s; spans [1, 2], [2, 3] and [5, 6] and [8.2, 8.8].
struct ExportFixture {
  SessionLog session;
  std::vector<AtomicSpan> spans;
  InstructionTree tree;

  ExportFixture() {
    session.session_id = "exp";
    session.intrinsics = {200, 200, 64, 48, 128, 96};
    for (int i = 0; i <= 20; ++i) {
      Pose p;
      p.translation = Vec3(0.1 * i, 0, 0);
      session.poses.push_back({static_cast<TimestampNs>(i) * kSec / 2, p});
    }
    spans = {{1, 1 * kSec, 2 * kSec, "open drawer"},
             {2, 2 * kSec, 3 * kSec, "take spoon"},
             {3, 5 * kSec, 6 * kSec, "stir tea"},
             {4, 8'200'000'000, 8'800'000'000, "close drawer"}};
    tree = BuildTreeGap(spans, kSec, 60 * kSec);
  }
};

TEST(ExportTest, OneFilePerEpisode) {
  testing::TempDir dir;
  ExportFixture fx;
  ASSERT_EQ(fx.tree.EpisodeCount(), 3u);
  const auto m = ExportTrainingSet(fx.session, fx.tree, fx.spans, {}, dir / "x");
  std::size_t episode_files = 0;
  for (const auto& e : fs::directory_iterator(dir / "x" / "episodes")) {
    EXPECT_EQ(e.path().extension(), ".jsonl");
    ++episode_files;
  }
  EXPECT_EQ(episode_files, 3u);
  EXPECT_TRUE(fs::exists(dir / "x" / "meta.json"));
  EXPECT_TRUE(fs::exists(dir / "x" / "hierarchy.json"));
  ASSERT_EQ(m.files.size(), 5u);
  EXPECT_EQ(m.files[3].path, "hierarchy.json");
  for (const auto& f : m.files) {
    EXPECT_EQ(f.sha256, Sha256Hex(testing::ReadFileBytes(dir / "x" / f.path)));
  }
  const auto meta = ReadJsonFile(dir / "x" / "meta.json");
  EXPECT_EQ(meta.at("episodes"), 3);
  EXPECT_EQ(ReadTree(dir / "x" / "hierarchy.json"), fx.tree);
}

TEST(ExportTest, ReExportIsIdentical) {
  testing::TempDir dir;
  ExportFixture fx;
  const auto a = ExportTrainingSet(fx.session, fx.tree, fx.spans, {}, dir / "x");
  const auto b = ExportTrainingSet(fx.session, fx.tree, fx.spans, {}, dir / "x");
  ASSERT_EQ(a.files.size(), b.files.size());
  for (std::size_t i = 0; i < a.files.size(); ++i) {
    EXPECT_EQ(a.files[i].path, b.files[i].path);
    EXPECT_EQ(a.files[i].sha256, b.files[i].sha256);
  }
}

TEST(ExportTest, FramesOutsideEpisodesAreExcluded) {
  testing::TempDir dir;
  ExportFixture fx;
  ExportTrainingSet(fx.session, fx.tree, fx.spans, {}, dir / "x");
  std::set<TimestampNs> exported;
  std::set<SpanId> header_spans;
  for (const auto& e : fs::directory_iterator(dir / "x" / "episodes")) {
    const auto rows = ReadJsonLines(e.path());
    ASSERT_FALSE(rows.empty());
    ASSERT_EQ(rows[0].at("kind"), "header");
    const TimestampNs start = rows[0].at("start_ns");
    const TimestampNs end = rows[0].at("end_ns");
    for (const auto& s : rows[0].at("atomic_spans")) {
      EXPECT_TRUE(header_spans.insert(s.at("id").get<SpanId>()).second);
    }
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const TimestampNs ts = rows[i].at("ts_ns");
      EXPECT_GE(ts, start);
      EXPECT_LE(ts, end);
      EXPECT_TRUE(exported.insert(ts).second);
      EXPECT_FALSE(rows[i].at("span_id").is_null());
      EXPECT_TRUE(rows[i].at("left").is_null());
    }
  }
  EXPECT_EQ(header_spans.size(), fx.spans.size());
  // [1, 3] has 5 poses, [5, 6] has 3; [8.2, 8.8] catches 8.5 only.
  EXPECT_EQ(exported.size(), 9u);
  for (TimestampNs outside : {0 * kSec, 4 * kSec, 7 * kSec, 8 * kSec, 9 * kSec, 10 * kSec}) {
    EXPECT_FALSE(exported.contains(outside));
  }
}

TEST(ExportTest, InvalidTreeIsRejected) {
  testing::TempDir dir;
  ExportFixture fx;
  fx.tree.sub_goals[0].episodes[0].end += 1;
  try {
    ExportTrainingSet(fx.session, fx.tree, fx.spans, {}, dir / "x");
    FAIL() << "expected InvalidTree";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidTree);
  }
}

}  // namespace
}  // namespace stera
