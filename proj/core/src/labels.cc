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

#include "stera/labels.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <tuple>

#include "stera/error.h"

namespace stera {
namespace {

// clang-format off
const char* const kColors[] = {
    "red", "green", "blue", "yellow", "orange", "purple", "pink", "brown",
    "black", "white", "gray", "grey", "silver", "gold", "golden", "beige",
    "tan", "cream", "ivory", "navy", "teal", "turquoise", "cyan", "magenta",
    "maroon", "burgundy", "crimson", "scarlet", "violet", "lavender", "lilac",
    "indigo", "olive", "lime", "mint", "emerald", "khaki", "coral", "salmon",
    "peach", "amber", "bronze", "copper", "charcoal", "taupe", "mauve",
    "aqua", "azure", "cobalt", "mustard", "plum", "rose", "ruby", "sapphire",
    "jade", "fuchsia", "transparent", "clear", "colorful", "multicolored",
    "dark", "light",
};
const char* const kMaterials[] = {
    "metal", "metallic", "steel", "aluminum", "aluminium", "iron", "tin",
    "wooden", "wood", "bamboo", "plastic", "glass", "ceramic", "porcelain",
    "stone", "marble", "granite", "concrete", "clay", "paper", "cardboard",
    "fabric", "cloth", "cotton", "wool", "woolen", "silk", "linen", "denim",
    "leather", "rubber", "silicone", "foam", "nylon", "polyester", "velvet",
    "wicker", "mesh", "acrylic", "cork", "felt", "terracotta",
};
const char* const kSizes[] = {
    "small", "large", "big", "tiny", "huge", "little", "medium", "mini",
    "giant", "tall", "short", "long", "wide", "narrow", "thick", "thin",
    "deep", "shallow", "oversized", "compact", "miniature",
};
const char* const kPrepositions[] = {
    "from", "to", "into", "onto", "on", "in", "under", "over", "beside",
    "behind", "inside", "next",
};
// clang-format on

std::set<std::string> WordSet(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key) || !doc.at(key).is_array() || doc.at(key).empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("lexicon field '") + key + "' must be a non-empty array");
  }
  std::set<std::string> out;
  for (const auto& w : doc.at(key)) {
    if (!w.is_string()) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string("lexicon field '") + key + "' holds a non-string");
    }
    auto tokens = Tokenize(w.get<std::string>());
    if (tokens.size() != 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "lexicon entries must be single words: '" +
                      w.get<std::string>() + "'");
    }
    out.insert(tokens.front());
  }
  return out;
}

}  // namespace

std::string_view DefectKindName(DefectKind kind) {
  return kind == DefectKind::kZeroDuration ? "ZeroDuration" : "Overlap";
}

std::vector<LabelDefect> DetectDefects(std::span<const AtomicSpan> spans) {
  std::vector<LabelDefect> out;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (spans[i].end <= spans[i].start) {
      out.push_back({DefectKind::kZeroDuration, {spans[i].id}});
    }
    if (i + 1 < spans.size() && spans[i].end > spans[i + 1].start) {
      out.push_back({DefectKind::kOverlap, {spans[i].id, spans[i + 1].id}});
    }
  }
  return out;
}

ModifierLexicon ModifierLexicon::Default() {
  ModifierLexicon l;
  l.colors_.insert(std::begin(kColors), std::end(kColors));
  l.materials_.insert(std::begin(kMaterials), std::end(kMaterials));
  l.sizes_.insert(std::begin(kSizes), std::end(kSizes));
  l.prepositions_.insert(std::begin(kPrepositions), std::end(kPrepositions));
  return l;
}

ModifierLexicon ModifierLexicon::FromJson(const nlohmann::json& doc) {
  if (!doc.is_object()) {
    throw Error(ErrorCode::kInvalidArgument, "lexicon must be a JSON object");
  }
  ModifierLexicon l;
  l.colors_ = WordSet(doc, "colors");
  l.materials_ = WordSet(doc, "materials");
  l.sizes_ = WordSet(doc, "sizes");
  l.prepositions_ = WordSet(doc, "prepositions");
  return l;
}

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isspace(c)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else if (c < 0x80 && std::ispunct(c)) {
      continue;
    } else {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

LabelQualityReport ComputeLabelStats(std::span<const AtomicSpan> spans,
                                     const ModifierLexicon& lexicon) {
  if (spans.empty()) throw Error(ErrorCode::kEmptyCorpus, "no spans");
  std::vector<AtomicSpan> sorted(spans.begin(), spans.end());
  SortSpans(sorted);

  LabelQualityReport r;
  r.span_count = sorted.size();
  for (const auto& d : DetectDefects(sorted)) {
    if (d.kind == DefectKind::kZeroDuration) {
      ++r.zero_duration_count;
    } else {
      ++r.overlap_count;
    }
  }
  if (sorted.size() > 1) {
    r.overlap_fraction = static_cast<double>(r.overlap_count) /
                         static_cast<double>(sorted.size() - 1);
  }
  std::size_t words = 0;
  std::size_t modifiers = 0;
  std::size_t with_prep = 0;
  for (const auto& s : sorted) {
    const auto tokens = Tokenize(s.text);
    words += tokens.size();
    bool has_prep = false;
    for (const auto& t : tokens) {
      if (lexicon.IsModifier(t)) ++modifiers;
      if (lexicon.IsPreposition(t)) has_prep = true;
    }
    if (has_prep) ++with_prep;
  }
  const auto n = static_cast<double>(sorted.size());
  r.mean_words = static_cast<double>(words) / n;
  r.mean_modifiers = static_cast<double>(modifiers) / n;
  r.preposition_fraction = static_cast<double>(with_prep) / n;
  return r;
}

nlohmann::ordered_json SpanToJson(const AtomicSpan& span) {
  nlohmann::ordered_json j;
  j["id"] = span.id;
  j["start_ns"] = span.start;
  j["end_ns"] = span.end;
  j["text"] = span.text;
  return j;
}

AtomicSpan SpanFromJson(const nlohmann::json& j) {
  try {
    AtomicSpan s;
    s.id = j.at("id").get<SpanId>();
    s.start = j.at("start_ns").get<TimestampNs>();
    s.end = j.at("end_ns").get<TimestampNs>();
    s.text = j.at("text").get<std::string>();
    if (Tokenize(s.text).empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "span " + std::to_string(s.id) + " has empty text");
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad span: ") + e.what());
  }
}

std::vector<AtomicSpan> ReadSpans(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  std::vector<AtomicSpan> spans;
  std::set<SpanId> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      throw Error(ErrorCode::kInvalidArgument,
                  path.string() + ":" + std::to_string(line_no) + ": invalid JSON");
    }
    spans.push_back(SpanFromJson(j));
    if (!ids.insert(spans.back().id).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate span id " + std::to_string(spans.back().id));
    }
  }
  return spans;
}

void WriteSpans(std::span<const AtomicSpan> spans,
                const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  for (const auto& s : spans) f << SpanToJson(s).dump() << '\n';
  if (!f) throw Error(ErrorCode::kIoFailure, "write failed: " + path.string());
}

void SortSpans(std::vector<AtomicSpan>& spans) {
  std::sort(spans.begin(), spans.end(), [](const AtomicSpan& a, const AtomicSpan& b) {
    return std::tie(a.start, a.end, a.id) < std::tie(b.start, b.end, b.id);
  });
}

}  // namespace stera
