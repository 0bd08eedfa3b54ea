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

// stera: command-line front end for the toolkit.
//
// Results go to stdout as JSON unless --out names a directory. Exit status
// is 0 on success, 1 when the command ran but found a failure (tree
// violations, failed sessions), 2 on usage errors and 3 on runtime errors.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stera/error.h"
#include "stera/geometry.h"
#include "stera/hand_kinematics.h"
#include "stera/hierarchy.h"
#include "stera/json_io.h"
#include "stera/labels.h"
#include "stera/log_format.h"
#include "stera/pipeline.h"
#include "stera/synth.h"
#include "stera/traj_metrics.h"

namespace fs = std::filesystem;
using stera::OJson;

namespace {

constexpr int kExitFindings = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct Globals {
  std::size_t workers = 1;
  std::string out;
  double tolerance_ms = 20.0;
};

stera::TimestampNs ToleranceNs(const Globals& g) {
  return static_cast<stera::TimestampNs>(std::llround(g.tolerance_ms * 1e6));
}

// Prints to stdout, or writes `name` under --out when it is set.
void Emit(const Globals& g, const std::string& name, const OJson& j) {
  if (g.out.empty()) {
    std::cout << stera::DumpJson(j);
    return;
  }
  fs::create_directories(g.out);
  const fs::path path = fs::path(g.out) / name;
  stera::WriteJsonFile(path, j);
  std::cerr << "wrote " << path.string() << "\n";
}

std::vector<stera::AtomicSpan> LoadSortedSpans(const std::string& path) {
  auto spans = stera::ReadSpans(path);
  stera::SortSpans(spans);
  return spans;
}

int CmdIngest(const Globals& g, const std::string& file) {
  stera::ReadDiagnostics diag;
  const auto session = stera::ReadSession(file, &diag);
  Emit(g, session.session_id + ".ingest.json", stera::SessionSummaryJson(session, diag));
  return 0;
}

int CmdMetrics(const Globals& g, const std::string& gt_file, const std::string& est_file,
               double rpe_delta) {
  const auto gt = stera::ReadSession(gt_file).poses;
  const auto est = stera::ReadSession(est_file).poses;
  const auto m = stera::EvaluateTrajectory(est, gt, rpe_delta, ToleranceNs(g));
  Emit(g, "metrics.json", stera::ToJson(m));
  return 0;
}

int CmdAnchor(const Globals& g, const std::string& file) {
  const auto session = stera::ReadSession(file);
  const auto world = stera::AnchorHands(session, {ToleranceNs(g)});
  OJson j;
  j["session_id"] = session.session_id;
  j["summary"] = stera::AnchorSummaryJson(world);
  j["frames"] = stera::WorldHandsToJson(world);
  Emit(g, session.session_id + ".anchor.json", j);
  return 0;
}

int CmdKinematics(const Globals& g, const std::vector<std::string>& files,
                  double gate, const std::string& limits_file) {
  stera::KinematicsOptions opts;
  opts.confidence_gate = gate;
  if (!limits_file.empty()) {
    opts.limits = stera::JointLimits::FromJson(stera::ReadJsonFile(limits_file));
  }
  std::vector<OJson> reports(files.size());
  stera::ParallelFor(files.size(), g.workers, [&](std::size_t i) {
    const auto session = stera::ReadSession(files[i]);
    const auto world = stera::AnchorHands(session, {ToleranceNs(g)});
    OJson j;
    j["session_id"] = session.session_id;
    j["input"] = files[i];
    j["kinematics"] = stera::ToJson(stera::ComputeKinematicsReport(session.hands, world, opts));
    reports[i] = std::move(j);
  });
  OJson out;
  out["sessions"] = reports;
  Emit(g, "kinematics.json", out);
  return 0;
}

int CmdLabels(const Globals& g, const std::string& file, const std::string& lexicon_file) {
  const auto spans = LoadSortedSpans(file);
  auto lexicon = stera::ModifierLexicon::Default();
  if (!lexicon_file.empty()) {
    lexicon = stera::ModifierLexicon::FromJson(stera::ReadJsonFile(lexicon_file));
  }
  OJson j;
  j["stats"] = stera::ToJson(stera::ComputeLabelStats(spans, lexicon));
  j["defects"] = stera::DefectsToJson(stera::DetectDefects(spans));
  Emit(g, "labels.json", j);
  return 0;
}

int CmdValidate(const Globals& g, const std::string& spans_file,
                const std::string& tree_file) {
  const auto spans = LoadSortedSpans(spans_file);
  const auto tree = stera::ReadTree(tree_file);
  const auto violations = stera::ValidateTree(tree, spans);
  OJson j;
  j["valid"] = violations.empty();
  j["violations"] = stera::ViolationsToJson(violations);
  j["stats"] = violations.empty() ? stera::ToJson(stera::ComputeTreeStats(tree, spans))
                                  : OJson(nullptr);
  Emit(g, "validation.json", j);
  return violations.empty() ? 0 : kExitFindings;
}

int CmdBuildGap(const Globals& g, const std::string& spans_file, double ep_gap,
                double sg_gap) {
  const auto spans = LoadSortedSpans(spans_file);
  const auto tree = stera::BuildTreeGap(spans, std::llround(ep_gap * 1e9),
                                        std::llround(sg_gap * 1e9));
  Emit(g, "tree.json", stera::TreeToJson(tree));
  return 0;
}

int CmdBuildExt(const Globals& g, const std::string& spans_file, const std::string& url,
                std::string token, std::size_t retries, double timeout_s) {
  const auto spans = LoadSortedSpans(spans_file);
  if (token.empty()) {
    if (const char* env = std::getenv("STERA_GENERATOR_TOKEN")) token = env;
  }
  stera::GeneratorEndpoint ep;
  ep.url = url;
  ep.auth_token = token;
  ep.timeout = std::chrono::milliseconds(std::llround(timeout_s * 1000.0));
  ep.log = [](std::string_view msg) { std::cerr << msg << "\n"; };
  try {
    const auto tree = stera::BuildTreeExternal(spans, ep, retries);
    Emit(g, "tree.json", stera::TreeToJson(tree));
  } catch (const stera::ValidationExhaustedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    OJson j;
    j["attempts"] = e.attempts();
    j["violations"] = stera::ViolationsToJson(e.violations());
    std::cout << stera::DumpJson(j);
    return kExitFindings;
  }
  return 0;
}

int CmdDrift(const Globals& g, const std::string& file) {
  const auto session = stera::ReadSession(file);
  OJson j;
  j["session_id"] = session.session_id;
  j["drift"] = stera::ToJson(stera::MarkerDrift(session, ToleranceNs(g)));
  Emit(g, session.session_id + ".drift.json", j);
  return 0;
}

struct SynthFlags {
  std::string profile;
  std::optional<std::string> kind;
  std::optional<double> speed, yaw_rate, duration, rate, position_sigma;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> session_id;
  std::size_t count = 1;
};

int CmdSynth(const Globals& g, const SynthFlags& f) {
  nlohmann::json doc = nlohmann::json::object();
  if (!f.profile.empty()) doc = stera::ReadJsonFile(f.profile);
  if (!doc.contains("motion") && !doc.contains("kind")) doc["motion"] = nlohmann::json::object();
  nlohmann::json& motion = doc.contains("motion") ? doc["motion"] : doc;
  if (f.kind) motion["kind"] = *f.kind;
  if (f.speed) motion["speed"] = *f.speed;
  if (f.yaw_rate) motion["yaw_rate"] = *f.yaw_rate;
  if (f.duration) motion["duration"] = *f.duration;
  if (f.rate) motion["rate"] = *f.rate;
  if (f.seed) motion["seed"] = *f.seed;
  if (f.session_id) doc["session_id"] = *f.session_id;
  if (f.position_sigma) doc["noise"]["position_sigma"] = *f.position_sigma;

  const stera::SynthSpec base = stera::SynthSpecFromJson(doc);
  const fs::path out = g.out.empty() ? fs::path(".") : fs::path(g.out);
  fs::create_directories(out);
  OJson written = OJson::array();
  for (std::size_t i = 0; i < f.count; ++i) {
    stera::SynthSpec spec = base;
    if (f.count > 1) {
      char suffix[16];
      std::snprintf(suffix, sizeof(suffix), "-%03zu", i);
      spec.session_id += suffix;
      spec.motion.seed += i;
      spec.noise.seed += i;
    }
    const auto result = stera::GenSynthetic(spec);
    const fs::path stem = out / spec.session_id;
    stera::WriteSession(result.session, stem.string() + ".mcap");
    stera::SessionLog gt;
    gt.session_id = spec.session_id;
    gt.intrinsics = result.session.intrinsics;
    gt.poses = result.ground_truth;
    stera::WriteSession(gt, stem.string() + ".gt.mcap");
    if (!result.spans.empty()) {
      stera::WriteSpans(result.spans, stem.string() + ".spans.jsonl");
      stera::WriteTree(result.tree, stem.string() + ".tree.json");
    }
    written.push_back(stem.string() + ".mcap");
  }
  OJson j;
  j["sessions"] = std::move(written);
  std::cout << stera::DumpJson(j);
  return 0;
}

int CmdRun(const Globals& g, const std::string& config_file, bool workers_set) {
  const fs::path cfg_path(config_file);
  auto config = stera::PipelineConfigFromJson(stera::ReadJsonFile(cfg_path),
                                              cfg_path.parent_path());
  if (workers_set) config.workers = g.workers;
  if (!g.out.empty()) config.out_dir = g.out;
  const auto result = stera::RunPipeline(config);
  std::cout << stera::DumpJson(result.summary);
  return result.exit_code;
}

int CmdExport(const Globals& g, const std::string& file, const std::string& tree_file,
              std::string spans_file) {
  if (spans_file.empty()) {
    const auto sidecars = stera::DiscoverSidecars(file);
    if (!sidecars.spans) {
      throw stera::Error(stera::ErrorCode::kInvalidArgument,
                         "no spans file; pass --spans or place <stem>.spans.jsonl next to the log");
    }
    spans_file = sidecars.spans->string();
  }
  const auto session = stera::ReadSession(file);
  const auto spans = LoadSortedSpans(spans_file);
  const auto tree = stera::ReadTree(tree_file);
  std::vector<stera::WorldHandFrame> world;
  if (!session.hands.empty()) world = stera::AnchorHands(session, {ToleranceNs(g)});
  const fs::path out = g.out.empty() ? fs::path("export") / session.session_id : fs::path(g.out);
  const auto manifest = stera::ExportTrainingSet(session, tree, spans, world, out, ToleranceNs(g));
  OJson files = OJson::array();
  for (const auto& f : manifest.files) {
    OJson e;
    e["path"] = f.path;
    e["sha256"] = f.sha256;
    e["bytes"] = f.bytes;
    files.push_back(std::move(e));
  }
  OJson j;
  j["dir"] = out.string();
  j["files"] = std::move(files);
  std::cout << stera::DumpJson(j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stera: egocentric capture processing toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  auto* workers_opt = app.add_option("--workers", g.workers, "Worker threads")
                          ->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output directory (default: stdout or command default)");
  app.add_option("--tolerance-ms", g.tolerance_ms, "Timestamp association tolerance")
      ->check(CLI::NonNegativeNumber);

  std::function<int()> action;

  std::string file;
  auto* ingest = app.add_subcommand("ingest", "Read a session log and summarize its streams");
  ingest->add_option("file", file)->required()->check(CLI::ExistingFile);
  ingest->callback([&] { action = [&] { return CmdIngest(g, file); }; });

  std::string gt_file, est_file;
  double rpe_delta = stera::kDefaultRpeDeltaSeconds;
  auto* metrics = app.add_subcommand("metrics", "ATE / RPE of an estimate against ground truth");
  metrics->add_option("--gt", gt_file)->required()->check(CLI::ExistingFile);
  metrics->add_option("--est", est_file)->required()->check(CLI::ExistingFile);
  metrics->add_option("--rpe-delta", rpe_delta, "RPE interval in seconds")
      ->check(CLI::PositiveNumber);
  metrics->callback([&] { action = [&] { return CmdMetrics(g, gt_file, est_file, rpe_delta); }; });

  auto* anchor = app.add_subcommand("anchor", "Lift 2D hand keypoints to world coordinates");
  anchor->add_option("file", file)->required()->check(CLI::ExistingFile);
  anchor->callback([&] { action = [&] { return CmdAnchor(g, file); }; });

  std::vector<std::string> files;
  double gate = stera::kDefaultConfidenceGate;
  std::string limits_file;
  auto* kin = app.add_subcommand("kinematics", "Bone-length CV, joint limits and wrist dynamics");
  kin->add_option("files", files)->required()->check(CLI::ExistingFile);
  kin->add_option("--conf-gate", gate)->check(CLI::Range(0.0, 1.0));
  kin->add_option("--limits", limits_file)->check(CLI::ExistingFile);
  kin->callback([&] { action = [&] { return CmdKinematics(g, files, gate, limits_file); }; });

  std::string lexicon_file;
  auto* labels = app.add_subcommand("labels", "Label defects and language statistics");
  labels->add_option("spans", file)->required()->check(CLI::ExistingFile);
  labels->add_option("--lexicon", lexicon_file)->check(CLI::ExistingFile);
  labels->callback([&] { action = [&] { return CmdLabels(g, file, lexicon_file); }; });

  auto* hier = app.add_subcommand("hierarchy", "Instruction tree tools");
  hier->require_subcommand(1);
  std::string tree_file;
  auto* validate = hier->add_subcommand("validate", "Check a tree against its spans");
  validate->add_option("spans", file)->required()->check(CLI::ExistingFile);
  validate->add_option("--tree", tree_file)->required()->check(CLI::ExistingFile);
  validate->callback([&] { action = [&] { return CmdValidate(g, file, tree_file); }; });

  double ep_gap = 10.0, sg_gap = 120.0;
  auto* gap = hier->add_subcommand("build-gap", "Group spans by temporal gaps");
  gap->add_option("spans", file)->required()->check(CLI::ExistingFile);
  gap->add_option("--episode-gap", ep_gap, "Seconds")->check(CLI::NonNegativeNumber);
  gap->add_option("--subgoal-gap", sg_gap, "Seconds")->check(CLI::NonNegativeNumber);
  gap->callback([&] { action = [&] { return CmdBuildGap(g, file, ep_gap, sg_gap); }; });

  std::string url, token;
  std::size_t retries = 3;
  double timeout_s = 30.0;
  auto* ext = hier->add_subcommand("build-ext", "Request a tree from an external generator");
  ext->add_option("spans", file)->required()->check(CLI::ExistingFile);
  ext->add_option("--url", url, "http://host:port/path")->required();
  ext->add_option("--token", token, "Bearer token (default: $STERA_GENERATOR_TOKEN)");
  ext->add_option("--retries", retries);
  ext->add_option("--timeout", timeout_s, "Seconds")->check(CLI::PositiveNumber);
  ext->callback([&] {
    action = [&] { return CmdBuildExt(g, file, url, token, retries, timeout_s); };
  });

  auto* drift = app.add_subcommand("drift", "Marker-revisit drift");
  drift->add_option("file", file)->required()->check(CLI::ExistingFile);
  drift->callback([&] { action = [&] { return CmdDrift(g, file); }; });

  SynthFlags sf;
  auto* synth = app.add_subcommand("synth", "Generate synthetic sessions with ground truth");
  synth->add_option("profile", sf.profile, "JSON profile")->check(CLI::ExistingFile);
  synth->add_option("--kind", sf.kind, "line|loop|spin|stationary|reach_cycle");
  synth->add_option("--speed", sf.speed);
  synth->add_option("--yaw-rate", sf.yaw_rate);
  synth->add_option("--duration", sf.duration);
  synth->add_option("--rate", sf.rate);
  synth->add_option("--seed", sf.seed);
  synth->add_option("--position-sigma", sf.position_sigma);
  synth->add_option("--session-id", sf.session_id);
  synth->add_option("--count", sf.count, "Number of sessions")->check(CLI::PositiveNumber);
  synth->callback([&] { action = [&] { return CmdSynth(g, sf); }; });

  std::string config_file;
  auto* run = app.add_subcommand("run", "Run the full pipeline from a config file");
  run->add_option("config", config_file)->required()->check(CLI::ExistingFile);
  run->callback([&] {
    action = [&] { return CmdRun(g, config_file, workers_opt->count() > 0); };
  });

  std::string spans_file;
  auto* exp = app.add_subcommand("export", "Write the training-ready episode export");
  exp->add_option("file", file)->required()->check(CLI::ExistingFile);
  exp->add_option("--tree", tree_file)->required()->check(CLI::ExistingFile);
  exp->add_option("--spans", spans_file)->check(CLI::ExistingFile);
  exp->callback([&] { action = [&] { return CmdExport(g, file, tree_file, spans_file); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }
  try {
    return action ? action() : 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
