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

#include "stera/session.h"

#include <algorithm>
#include <cmath>

namespace stera {
namespace {

template <typename T>
void SortByTs(std::vector<T>& v) {
  std::stable_sort(v.begin(), v.end(),
                   [](const T& a, const T& b) { return a.ts < b.ts; });
}

template <typename T>
bool IsSortedByTs(const std::vector<T>& v) {
  return std::is_sorted(v.begin(), v.end(),
                        [](const T& a, const T& b) { return a.ts < b.ts; });
}

}  // namespace

bool CameraIntrinsics::IsValid() const {
  return std::isfinite(fx) && std::isfinite(fy) && fx > 0 && fy > 0 &&
         cx >= 0 && cx < width && cy >= 0 && cy < height;
}

bool DepthMap::IsValid() const {
  if (values.size() != static_cast<std::size_t>(width) * height) return false;
  return std::all_of(values.begin(), values.end(),
                     [](float v) { return std::isfinite(v) && v >= 0.0f; });
}

std::string_view HandSideName(HandSide side) {
  return side == HandSide::kLeft ? "left" : "right";
}

void SortStreams(SessionLog& session) {
  SortByTs(session.poses);
  SortByTs(session.depth);
  SortByTs(session.hands);
  SortByTs(session.imu);
  SortByTs(session.markers);
}

bool StreamsSorted(const SessionLog& session) {
  return IsSortedByTs(session.poses) && IsSortedByTs(session.depth) &&
         IsSortedByTs(session.hands) && IsSortedByTs(session.imu) &&
         IsSortedByTs(session.markers);
}

}  // namespace stera
