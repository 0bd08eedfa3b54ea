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

#include "stera/hierarchy.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <regex>
#include <unordered_map>
#include <utility>

#include <httplib.h>

namespace stera {
namespace {

using OJson = nlohmann::ordered_json;

double Median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

LevelDurations Level(const std::vector<double>& durations) {
  LevelDurations l;
  l.count = durations.size();
  if (durations.empty()) return l;
  double sum = 0.0;
  for (double d : durations) sum += d;
  l.mean_s = sum / static_cast<double>(durations.size());
  l.median_s = Median(durations);
  return l;
}

std::optional<double> Ratio(const LevelDurations& upper,
                            const LevelDurations& lower) {
  if (!(lower.mean_s > 0.0)) return std::nullopt;
  return upper.mean_s / lower.mean_s;
}

double DurationSeconds(TimestampNs start, TimestampNs end) {
  return end > start ? NsToSeconds(end - start) : 0.0;
}

// Truncates to at most `max_chars` code points without splitting a UTF-8
// sequence.
std::string TruncateUtf8(const std::string& s, std::size_t max_chars) {
  std::size_t chars = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto c = static_cast<unsigned char>(s[i]);
    if ((c & 0xC0) != 0x80) {
      if (chars == max_chars) return s.substr(0, i);
      ++chars;
    }
  }
  return s;
}

std::string JoinTexts(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += "; ";
    out += p;
    if (out.size() > 4 * kDescriptionMaxChars) break;
  }
  return TruncateUtf8(out, kDescriptionMaxChars);
}

std::string PaddedId(const char* prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%04zu", prefix, n);
  return buf;
}

struct ParsedUrl {
  std::string host;
  int port = 80;
  std::string path;
};

ParsedUrl ParseUrl(const std::string& url) {
  static const std::regex kUrl(R"(^http://([^/:]+)(?::(\d+))?(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) {
    throw Error(ErrorCode::kInvalidArgument,
                "endpoint must be an http://host[:port]/path URL: " + url);
  }
  ParsedUrl p;
  p.host = m[1].str();
  if (m[2].matched) p.port = std::stoi(m[2].str());
  p.path = m[3].matched ? m[3].str() : "/";
  return p;
}

}  // namespace

std::size_t InstructionTree::EpisodeCount() const {
  std::size_t n = 0;
  for (const auto& sg : sub_goals) n += sg.episodes.size();
  return n;
}

std::string_view ViolationKindName(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kDuplicateAssignment: return "DuplicateAssignment";
    case ViolationKind::kUnassigned: return "Unassigned";
    case ViolationKind::kBoundaryMismatch: return "BoundaryMismatch";
    case ViolationKind::kCoverageGap: return "CoverageGap";
    case ViolationKind::kUnknownSpan: return "UnknownSpan";
    case ViolationKind::kEmptyEpisode: return "EmptyEpisode";
    case ViolationKind::kMalformedTree: return "MalformedTree";
  }
  return "Unknown";
}

std::vector<TreeViolation> ValidateTree(const InstructionTree& tree,
                                        std::span<const AtomicSpan> spans) {
  std::vector<AtomicSpan> sorted(spans.begin(), spans.end());
  SortSpans(sorted);
  std::unordered_map<SpanId, std::size_t> position;
  for (std::size_t i = 0; i < sorted.size(); ++i) position[sorted[i].id] = i;

  std::vector<TreeViolation> out;
  std::vector<std::size_t> times_assigned(sorted.size(), 0);
  std::vector<std::string> first_owner(sorted.size());
  // Positions in tree order, first assignments only.
  std::vector<std::pair<std::size_t, const Episode*>> walk;

  for (const auto& sg : tree.sub_goals) {
    for (const auto& ep : sg.episodes) {
      if (ep.span_ids.empty()) {
        out.push_back({ViolationKind::kEmptyEpisode, ep.id, {}, "episode has no spans"});
        continue;
      }
      std::optional<std::size_t> first_pos, last_pos;
      for (SpanId id : ep.span_ids) {
        auto it = position.find(id);
        if (it == position.end()) {
          out.push_back({ViolationKind::kUnknownSpan, ep.id, {id},
                         "span id not present in the corpus"});
          continue;
        }
        const std::size_t p = it->second;
        if (!first_pos) first_pos = p;
        last_pos = p;
        if (times_assigned[p]++ == 0) {
          first_owner[p] = ep.id;
          walk.emplace_back(p, &ep);
        } else {
          out.push_back({ViolationKind::kDuplicateAssignment, ep.id, {id},
                         "span already assigned to episode " + first_owner[p]});
        }
      }
      if (first_pos && (ep.start != sorted[*first_pos].start ||
                        ep.end != sorted[*last_pos].end)) {
        out.push_back({ViolationKind::kBoundaryMismatch, ep.id,
                       {sorted[*first_pos].id, sorted[*last_pos].id},
                       "episode [" + std::to_string(ep.start) + ", " +
                           std::to_string(ep.end) + "] vs spans [" +
                           std::to_string(sorted[*first_pos].start) + ", " +
                           std::to_string(sorted[*last_pos].end) + "]"});
      }
    }
  }

  for (std::size_t p = 0; p < sorted.size(); ++p) {
    if (times_assigned[p] == 0) {
      out.push_back({ViolationKind::kUnassigned, "", {sorted[p].id},
                     "span belongs to no episode"});
    }
  }

  // Tiling: the walk must visit assigned positions in increasing order with
  // nothing skipped. Unassigned spans are reported above and not repeated.
  auto next_assigned = [&](std::optional<std::size_t> after) {
    std::size_t p = after ? *after + 1 : 0;
    while (p < sorted.size() && times_assigned[p] == 0) ++p;
    return p;
  };
  std::optional<std::size_t> prev;
  for (const auto& [p, ep] : walk) {
    const std::size_t expected = next_assigned(prev);
    if (p != expected) {
      std::vector<SpanId> ids = {sorted[p].id};
      if (expected < sorted.size()) ids.push_back(sorted[expected].id);
      out.push_back({ViolationKind::kCoverageGap, ep->id, ids,
                     "episodes do not tile the span sequence: found span " +
                         std::to_string(sorted[p].id) + " where " +
                         (expected < sorted.size()
                              ? "span " + std::to_string(sorted[expected].id)
                              : std::string("end of corpus")) +
                         " was expected"});
    }
    prev = p;
  }
  return out;
}

TreeStats ComputeTreeStats(const InstructionTree& tree,
                           std::span<const AtomicSpan> spans) {
  const auto violations = ValidateTree(tree, spans);
  if (!violations.empty()) {
    throw Error(ErrorCode::kInvalidTree,
                std::to_string(violations.size()) + " violation(s), first: " +
                    std::string(ViolationKindName(violations.front().kind)) +
                    " " + violations.front().detail);
  }
  TreeStats s;
  std::vector<double> atomic, episode, sub_goal, per_episode;
  TimestampNs session_start = spans.empty() ? 0 : spans.front().start;
  TimestampNs session_end = 0;
  for (const auto& sp : spans) {
    atomic.push_back(DurationSeconds(sp.start, sp.end));
    session_start = std::min(session_start, sp.start);
    session_end = std::max(session_end, sp.end);
  }
  for (const auto& sg : tree.sub_goals) {
    if (sg.episodes.empty()) continue;
    sub_goal.push_back(
        DurationSeconds(sg.episodes.front().start, sg.episodes.back().end));
    for (const auto& ep : sg.episodes) {
      episode.push_back(DurationSeconds(ep.start, ep.end));
      per_episode.push_back(static_cast<double>(ep.span_ids.size()));
      ++s.spans_per_episode[ep.span_ids.size()];
    }
  }
  s.atomic = Level(atomic);
  s.episode = Level(episode);
  s.sub_goal = Level(sub_goal);
  s.session = Level({DurationSeconds(session_start, session_end)});
  s.episode_to_atomic = Ratio(s.episode, s.atomic);
  s.subgoal_to_episode = Ratio(s.sub_goal, s.episode);
  s.session_to_subgoal = Ratio(s.session, s.sub_goal);
  if (!per_episode.empty()) {
    s.spans_per_episode_median = Median(per_episode);
    double sum = 0.0;
    std::size_t le10 = 0;
    for (double n : per_episode) {
      sum += n;
      if (n <= 10.0) ++le10;
    }
    s.spans_per_episode_mean = sum / static_cast<double>(per_episode.size());
    s.fraction_le_10 =
        static_cast<double>(le10) / static_cast<double>(per_episode.size());
  }
  return s;
}

InstructionTree BuildTreeGap(std::span<const AtomicSpan> spans,
                             std::int64_t episode_gap_ns,
                             std::int64_t subgoal_gap_ns) {
  if (spans.empty()) throw Error(ErrorCode::kEmptyInput, "no spans to group");
  if (!(episode_gap_ns < subgoal_gap_ns)) {
    throw Error(ErrorCode::kInvalidArgument,
                "episode gap must be smaller than sub-goal gap");
  }
  std::vector<AtomicSpan> sorted(spans.begin(), spans.end());
  SortSpans(sorted);
  auto gap = [](TimestampNs prev_end, TimestampNs next_start) {
    return static_cast<std::int64_t>(next_start) -
           static_cast<std::int64_t>(prev_end);
  };

  std::vector<Episode> episodes;
  std::vector<std::vector<std::string>> texts;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& sp = sorted[i];
    if (episodes.empty() || gap(episodes.back().end, sp.start) > episode_gap_ns) {
      Episode ep;
      ep.id = PaddedId("ep", episodes.size());
      ep.start = sp.start;
      episodes.push_back(std::move(ep));
      texts.emplace_back();
    }
    Episode& ep = episodes.back();
    ep.span_ids.push_back(sp.id);
    ep.end = sp.end;
    texts.back().push_back(sp.text);
  }

  InstructionTree tree;
  std::vector<std::string> sub_goal_texts;
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    episodes[e].description = JoinTexts(texts[e]);
    if (tree.sub_goals.empty() ||
        gap(tree.sub_goals.back().episodes.back().end, episodes[e].start) >
            subgoal_gap_ns) {
      SubGoal sg;
      sg.id = PaddedId("sg", tree.sub_goals.size());
      tree.sub_goals.push_back(std::move(sg));
    }
    tree.sub_goals.back().episodes.push_back(std::move(episodes[e]));
  }
  for (auto& sg : tree.sub_goals) {
    std::vector<std::string> parts;
    for (const auto& ep : sg.episodes) parts.push_back(ep.description);
    sg.description = JoinTexts(parts);
    sub_goal_texts.push_back(sg.description);
  }
  tree.goal = JoinTexts(sub_goal_texts);
  return tree;
}

ValidationExhaustedError::ValidationExhaustedError(
    std::size_t attempts, std::vector<TreeViolation> violations)
    : Error(ErrorCode::kValidationExhausted,
            "no valid tree after " + std::to_string(attempts) + " attempt(s); " +
                std::to_string(violations.size()) + " violation(s) in the last"),
      attempts_(attempts),
      violations_(std::move(violations)) {}

InstructionTree BuildTreeExternal(std::span<const AtomicSpan> spans,
                                  const GeneratorEndpoint& endpoint,
                                  std::size_t max_retries) {
  if (spans.empty()) throw Error(ErrorCode::kEmptyInput, "no spans to group");
  const ParsedUrl url = ParseUrl(endpoint.url);
  auto log = endpoint.log ? endpoint.log
                          : [](std::string_view s) { std::cerr << s << '\n'; };

  httplib::Client client(url.host, url.port);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
      endpoint.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!endpoint.auth_token.empty()) {
    headers.emplace("Authorization", "Bearer " + endpoint.auth_token);
  }

  OJson span_array = OJson::array();
  for (const auto& s : spans) span_array.push_back(SpanToJson(s));

  std::vector<TreeViolation> last;
  const std::size_t attempts = max_retries + 1;
  for (std::size_t attempt = 1; attempt <= attempts; ++attempt) {
    OJson request;
    request["spans"] = span_array;
    if (!last.empty()) {
      OJson v = OJson::array();
      for (const auto& x : last) v.push_back(ViolationToJson(x));
      request["violations"] = std::move(v);
    }
    const std::string body = request.dump();
    auto res = client.Post(url.path, headers, body, "application/json");
    if (!res) {
      throw Error(ErrorCode::kServiceUnreachable,
                  endpoint.url + ": " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
      throw Error(ErrorCode::kServiceUnreachable,
                  endpoint.url + ": HTTP " + std::to_string(res->status));
    }

    std::vector<TreeViolation> violations;
    std::optional<InstructionTree> tree;
    auto parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded()) {
      violations.push_back({ViolationKind::kMalformedTree, "", {}, "reply is not JSON"});
    } else {
      try {
        tree = TreeFromJson(parsed);
        violations = ValidateTree(*tree, spans);
      } catch (const Error& e) {
        violations.push_back({ViolationKind::kMalformedTree, "", {}, e.what()});
      }
    }
    if (violations.empty()) return *tree;

    log("tree generator attempt " + std::to_string(attempt) + "/" +
        std::to_string(attempts) + " rejected with " +
        std::to_string(violations.size()) + " violation(s)\nrequest: " + body +
        "\nresponse: " + res->body);
    last = std::move(violations);
  }
  throw ValidationExhaustedError(attempts, std::move(last));
}

nlohmann::ordered_json TreeToJson(const InstructionTree& tree) {
  OJson j;
  j["goal"] = tree.goal;
  OJson sgs = OJson::array();
  for (const auto& sg : tree.sub_goals) {
    OJson jsg;
    jsg["id"] = sg.id;
    jsg["description"] = sg.description;
    OJson eps = OJson::array();
    for (const auto& ep : sg.episodes) {
      OJson jep;
      jep["id"] = ep.id;
      jep["description"] = ep.description;
      jep["span_ids"] = ep.span_ids;
      jep["start_ns"] = ep.start;
      jep["end_ns"] = ep.end;
      eps.push_back(std::move(jep));
    }
    jsg["episodes"] = std::move(eps);
    sgs.push_back(std::move(jsg));
  }
  j["sub_goals"] = std::move(sgs);
  return j;
}

InstructionTree TreeFromJson(const nlohmann::json& j) {
  try {
    InstructionTree tree;
    tree.goal = j.at("goal").get<std::string>();
    for (const auto& jsg : j.at("sub_goals")) {
      SubGoal sg;
      sg.id = jsg.at("id").get<std::string>();
      sg.description = jsg.value("description", std::string());
      for (const auto& jep : jsg.at("episodes")) {
        Episode ep;
        ep.id = jep.at("id").get<std::string>();
        ep.description = jep.value("description", std::string());
        ep.span_ids = jep.at("span_ids").get<std::vector<SpanId>>();
        ep.start = jep.at("start_ns").get<TimestampNs>();
        ep.end = jep.at("end_ns").get<TimestampNs>();
        sg.episodes.push_back(std::move(ep));
      }
      tree.sub_goals.push_back(std::move(sg));
    }
    return tree;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed tree: ") + e.what());
  }
}

InstructionTree ReadTree(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  auto j = nlohmann::json::parse(f, nullptr, false);
  if (j.is_discarded()) {
    throw Error(ErrorCode::kInvalidArgument, path.string() + ": invalid JSON");
  }
  return TreeFromJson(j);
}

void WriteTree(const InstructionTree& tree, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  f << TreeToJson(tree).dump(2) << '\n';
  if (!f) throw Error(ErrorCode::kIoFailure, "write failed: " + path.string());
}

nlohmann::ordered_json ViolationToJson(const TreeViolation& v) {
  OJson j;
  j["kind"] = ViolationKindName(v.kind);
  j["episode_id"] = v.episode_id;
  j["span_ids"] = v.span_ids;
  j["detail"] = v.detail;
  return j;
}

}  // namespace stera
