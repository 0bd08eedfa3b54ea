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

// Three-level instruction tree (session goal -> sub-goals -> episodes) over
// atomic spans.
//
// A tree is valid when
//   * every span belongs to exactly one episode,
//   * each episode's start/end equal its first/last span's start/end, and
//   * the episodes, read in order, tile the time-sorted span sequence with
//     no span skipped. Idle time between two spans may fall inside an
//     episode or between two episodes; nothing else may.

#ifndef STERA_HIERARCHY_H_
#define STERA_HIERARCHY_H_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "stera/error.h"
#include "stera/labels.h"

namespace stera {

struct Episode {
  std::string id;
  std::string description;
  std::vector<SpanId> span_ids;
  TimestampNs start = 0;
  TimestampNs end = 0;

  friend bool operator==(const Episode&, const Episode&) = default;
};

struct SubGoal {
  std::string id;
  std::string description;
  std::vector<Episode> episodes;

  friend bool operator==(const SubGoal&, const SubGoal&) = default;
};

struct InstructionTree {
  std::string goal;
  std::vector<SubGoal> sub_goals;

  std::size_t EpisodeCount() const;

  friend bool operator==(const InstructionTree&, const InstructionTree&) = default;
};

enum class ViolationKind {
  kDuplicateAssignment,
  kUnassigned,
  kBoundaryMismatch,
  kCoverageGap,
  kUnknownSpan,   // episode references an id absent from the corpus
  kEmptyEpisode,
  kMalformedTree, // generator output that does not parse as a tree
};

std::string_view ViolationKindName(ViolationKind kind);

struct TreeViolation {
  ViolationKind kind;
  std::string episode_id;  // empty when not tied to one episode
  std::vector<SpanId> span_ids;
  std::string detail;
};

// Empty result means the tree is valid. Independent of the order of `spans`.
std::vector<TreeViolation> ValidateTree(const InstructionTree& tree,
                                        std::span<const AtomicSpan> spans);

struct LevelDurations {
  std::size_t count = 0;
  double mean_s = 0.0;
  double median_s = 0.0;
};

struct TreeStats {
  LevelDurations atomic;
  LevelDurations episode;
  LevelDurations sub_goal;
  LevelDurations session;
  // mean(level k+1) / mean(level k); nullopt when the lower mean is 0.
  std::optional<double> episode_to_atomic;
  std::optional<double> subgoal_to_episode;
  std::optional<double> session_to_subgoal;
  std::map<std::size_t, std::size_t> spans_per_episode;  // size -> episodes
  double spans_per_episode_median = 0.0;
  double spans_per_episode_mean = 0.0;
  double fraction_le_10 = 0.0;
};

// Throws Error(kInvalidTree) when ValidateTree reports violations.
TreeStats ComputeTreeStats(const InstructionTree& tree,
                           std::span<const AtomicSpan> spans);

inline constexpr std::int64_t kDefaultEpisodeGapNs = 10'000'000'000;    // 10 s
inline constexpr std::int64_t kDefaultSubgoalGapNs = 120'000'000'000;   // 120 s
inline constexpr std::size_t kDescriptionMaxChars = 120;

// Deterministic grouping: consecutive spans whose gap (next start minus
// previous end) is <= episode_gap share an episode; consecutive episodes
// whose gap is <= subgoal_gap share a sub-goal. Throws Error(kEmptyInput)
// for no spans, Error(kInvalidArgument) unless episode_gap < subgoal_gap.
InstructionTree BuildTreeGap(std::span<const AtomicSpan> spans,
                             std::int64_t episode_gap_ns = kDefaultEpisodeGapNs,
                             std::int64_t subgoal_gap_ns = kDefaultSubgoalGapNs);

struct GeneratorEndpoint {
  std::string url;  // http://host[:port]/path
  std::string auth_token;  // sent as "Authorization: Bearer <token>" if set
  std::chrono::milliseconds timeout{30'000};
  // Receives request/response bodies of rejected attempts. Defaults to stderr.
  std::function<void(std::string_view)> log;
};

class ValidationExhaustedError : public Error {
 public:
  ValidationExhaustedError(std::size_t attempts,
                           std::vector<TreeViolation> violations);

  std::size_t attempts() const { return attempts_; }
  const std::vector<TreeViolation>& violations() const { return violations_; }

 private:
  std::size_t attempts_;
  std::vector<TreeViolation> violations_;
};

// POSTs {"spans": [...]} to the endpoint and parses the tree JSON reply.
// Invalid replies are retried up to `max_retries` more times, each retry
// carrying the previous violations under "violations". Throws
// Error(kServiceUnreachable) on transport failure or a non-2xx status and
// ValidationExhaustedError when every attempt is invalid.
InstructionTree BuildTreeExternal(std::span<const AtomicSpan> spans,
                                  const GeneratorEndpoint& endpoint,
                                  std::size_t max_retries);

nlohmann::ordered_json TreeToJson(const InstructionTree& tree);
// Throws Error(kInvalidArgument) on a structurally malformed document.
InstructionTree TreeFromJson(const nlohmann::json& j);
InstructionTree ReadTree(const std::filesystem::path& path);
void WriteTree(const InstructionTree& tree, const std::filesystem::path& path);

nlohmann::ordered_json ViolationToJson(const TreeViolation& v);

}  // namespace stera

#endif  // STERA_HIERARCHY_H_
