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

// Structural QA and richness statistics for atomic action labels.

#ifndef STERA_LABELS_H_
#define STERA_LABELS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "stera/pose.h"

namespace stera {

using SpanId = std::int64_t;

struct AtomicSpan {
  SpanId id = 0;
  TimestampNs start = 0;
  TimestampNs end = 0;
  std::string text;

  friend bool operator==(const AtomicSpan&, const AtomicSpan&) = default;
};

enum class DefectKind { kZeroDuration, kOverlap };

std::string_view DefectKindName(DefectKind kind);

struct LabelDefect {
  DefectKind kind;
  std::vector<SpanId> span_ids;  // one id, or the overlapping pair in order
};

// ZeroDuration for every span with end <= start; Overlap for every adjacent
// pair with end_i > start_{i+1}. Spans must be sorted by start.
std::vector<LabelDefect> DetectDefects(std::span<const AtomicSpan> spans);

class ModifierLexicon {
 public:
  // Bundled word lists: colors, materials, sizes and spatial prepositions.
  static ModifierLexicon Default();
  // {"colors": [...], "materials": [...], "sizes": [...], "prepositions": [...]}
  static ModifierLexicon FromJson(const nlohmann::json& doc);

  const std::set<std::string>& colors() const { return colors_; }
  const std::set<std::string>& materials() const { return materials_; }
  const std::set<std::string>& sizes() const { return sizes_; }
  const std::set<std::string>& prepositions() const { return prepositions_; }

  bool IsModifier(const std::string& token) const {
    return colors_.contains(token) || materials_.contains(token) ||
           sizes_.contains(token);
  }
  bool IsPreposition(const std::string& token) const {
    return prepositions_.contains(token);
  }

 private:
  std::set<std::string> colors_;
  std::set<std::string> materials_;
  std::set<std::string> sizes_;
  std::set<std::string> prepositions_;
};

// Lowercase, drop ASCII punctuation, split on whitespace.
std::vector<std::string> Tokenize(std::string_view text);

struct LabelQualityReport {
  std::size_t span_count = 0;
  std::size_t zero_duration_count = 0;
  std::size_t overlap_count = 0;
  double overlap_fraction = 0.0;  // of adjacent pairs
  double mean_words = 0.0;
  double mean_modifiers = 0.0;
  double preposition_fraction = 0.0;  // labels with >= 1 spatial preposition
};

// Throws Error(kEmptyCorpus) for an empty span list. Spans are sorted by
// start internally for the defect counts.
LabelQualityReport ComputeLabelStats(std::span<const AtomicSpan> spans,
                                     const ModifierLexicon& lexicon);

// JSON Lines, one {"id", "start_ns", "end_ns", "text"} per line.
std::vector<AtomicSpan> ReadSpans(const std::filesystem::path& path);
void WriteSpans(std::span<const AtomicSpan> spans,
                const std::filesystem::path& path);
nlohmann::ordered_json SpanToJson(const AtomicSpan& span);
AtomicSpan SpanFromJson(const nlohmann::json& j);

// Sorted by (start, end, id).
void SortSpans(std::vector<AtomicSpan>& spans);

}  // namespace stera

#endif  // STERA_LABELS_H_
