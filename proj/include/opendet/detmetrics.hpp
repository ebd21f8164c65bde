// Copyright 2026 opendet contributors
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

#ifndef OPENDET_DETMETRICS_HPP
#define OPENDET_DETMETRICS_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "opendet/types.hpp"

namespace opendet::detmetrics {

/// Outcome of matching detections against ground-truth unknown objects.
///   tp_u       unknown-tagged detections matched one-to-one to GT unknowns
///   fn_u       GT unknowns left unmatched by unknown-tagged detections
///   fn_star_u  the subset of fn_u covered by some known-tagged detection
/// Invariants: fn_star_u <= fn_u and tp_u + fn_u == number of GT unknowns.
struct UnknownMatchCounts {
  int tp_u = 0;
  int fn_star_u = 0;
  int fn_u = 0;
};

/// One-to-one pairing produced by the unknown matching sweep.
struct MatchedPair {
  std::string detection_id;
  std::string gt_id;
};

struct DetectionScores {
  std::optional<double> udr;
  std::optional<double> udp;
  std::optional<double> map_previous;
  std::optional<double> map_current;
};

double iou(const BoundingBox& a, const BoundingBox& b);

/// Greedy one-to-one matching of Unknown-tagged detections to GT unknowns,
/// in descending score order (ties by object_id), accepting IoU > iou_thresh.
UnknownMatchCounts match_unknown(const std::vector<ObjectRecord>& detections,
                                 const std::vector<ObjectRecord>& gt_unknown,
                                 double iou_thresh);

/// The matched (detection, gt) pairs from the same sweep as match_unknown.
std::vector<MatchedPair> match_unknown_pairs(
    const std::vector<ObjectRecord>& detections,
    const std::vector<ObjectRecord>& gt_unknown, double iou_thresh);

/// Best-IoU pairing of every Unknown-tagged detection to a GT unknown at
/// IoU > iou_thresh, duplicates allowed. Used by the widened clustering
/// evaluation mode.
std::vector<MatchedPair> match_unknown_all(
    const std::vector<ObjectRecord>& detections,
    const std::vector<ObjectRecord>& gt_unknown, double iou_thresh);

/// UDR = (tp_u + fn*_u) / (tp_u + fn_u), UDP = tp_u / (tp_u + fn*_u).
/// Each component is nullopt when its denominator is zero.
std::pair<std::optional<double>, std::optional<double>> udr_udp(
    const UnknownMatchCounts& counts);

/// All-point interpolated average precision for one known class at the given
/// IoU threshold. nullopt when the class has no ground-truth instances.
std::optional<double> average_precision(const std::vector<ObjectRecord>& detections,
                                        const std::vector<ObjectRecord>& gt,
                                        int class_id, double iou_thresh);

/// Unweighted mean AP over previously known and newly introduced known
/// classes. Classes without ground truth are skipped; a group with no
/// scored class yields nullopt (task 1 has no previous group).
std::pair<std::optional<double>, std::optional<double>> mean_ap(
    const std::vector<ObjectRecord>& detections, const std::vector<ObjectRecord>& gt,
    const TaskSplit& split, double iou_thresh);

}  // namespace opendet::detmetrics

#endif  // OPENDET_DETMETRICS_HPP
