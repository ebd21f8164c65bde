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

#include "opendet/detmetrics.hpp"

#include <algorithm>
#include <cassert>

#include "opendet/task_splits.hpp"

namespace opendet::detmetrics {

namespace {

/// Descending score, ties broken by object_id so the sweep order is total.
std::vector<const ObjectRecord*> rank_by_score(
    const std::vector<ObjectRecord>& detections, TagKind kind) {
  std::vector<const ObjectRecord*> ranked;
  for (const auto& det : detections) {
    if (det.tag.kind == kind) ranked.push_back(&det);
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const ObjectRecord* a, const ObjectRecord* b) {
              if (a->score != b->score) return a->score > b->score;
              return a->object_id < b->object_id;
            });
  return ranked;
}

/// Index of the best unmatched GT for one detection: IoU must exceed the
/// threshold; larger IoU wins, equal IoU resolves to the earlier GT.
int best_gt_match(const ObjectRecord& det, const std::vector<ObjectRecord>& gt,
                  const std::vector<bool>& taken, double iou_thresh) {
  int best = -1;
  double best_iou = iou_thresh;
  for (std::size_t g = 0; g < gt.size(); ++g) {
    if (taken[g]) continue;
    const double overlap = iou(det.box, gt[g].box);
    if (overlap > best_iou) {
      best_iou = overlap;
      best = static_cast<int>(g);
    }
  }
  return best;
}

struct UnknownMatchResult {
  UnknownMatchCounts counts;
  std::vector<MatchedPair> pairs;
};

UnknownMatchResult run_unknown_match(const std::vector<ObjectRecord>& detections,
                                     const std::vector<ObjectRecord>& gt_unknown,
                                     double iou_thresh) {
  UnknownMatchResult result;
  std::vector<bool> taken(gt_unknown.size(), false);

  for (const ObjectRecord* det : rank_by_score(detections, TagKind::kUnknown)) {
    const int g = best_gt_match(*det, gt_unknown, taken, iou_thresh);
    if (g >= 0) {
      taken[g] = true;
      ++result.counts.tp_u;
      result.pairs.push_back({det->object_id, gt_unknown[g].object_id});
    }
  }

  const auto known_dets = rank_by_score(detections, TagKind::kKnown);
  for (std::size_t g = 0; g < gt_unknown.size(); ++g) {
    if (taken[g]) continue;
    ++result.counts.fn_u;
    const bool covered_by_known =
        std::any_of(known_dets.begin(), known_dets.end(),
                    [&](const ObjectRecord* det) {
                      return iou(det->box, gt_unknown[g].box) > iou_thresh;
                    });
    if (covered_by_known) ++result.counts.fn_star_u;
  }
  return result;
}

}  // namespace

double iou(const BoundingBox& a, const BoundingBox& b) {
  assert(a.valid() && b.valid());
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  if (inter <= 0.0) return 0.0;
  return inter / (a.area() + b.area() - inter);
}

UnknownMatchCounts match_unknown(const std::vector<ObjectRecord>& detections,
                                 const std::vector<ObjectRecord>& gt_unknown,
                                 double iou_thresh) {
  return run_unknown_match(detections, gt_unknown, iou_thresh).counts;
}

std::vector<MatchedPair> match_unknown_pairs(
    const std::vector<ObjectRecord>& detections,
    const std::vector<ObjectRecord>& gt_unknown, double iou_thresh) {
  return run_unknown_match(detections, gt_unknown, iou_thresh).pairs;
}

std::vector<MatchedPair> match_unknown_all(
    const std::vector<ObjectRecord>& detections,
    const std::vector<ObjectRecord>& gt_unknown, double iou_thresh) {
  std::vector<MatchedPair> pairs;
  const std::vector<bool> none(gt_unknown.size(), false);
  for (const ObjectRecord* det : rank_by_score(detections, TagKind::kUnknown)) {
    const int g = best_gt_match(*det, gt_unknown, none, iou_thresh);
    if (g >= 0) pairs.push_back({det->object_id, gt_unknown[g].object_id});
  }
  return pairs;
}

std::pair<std::optional<double>, std::optional<double>> udr_udp(
    const UnknownMatchCounts& c) {
  std::optional<double> udr;
  std::optional<double> udp;
  if (c.tp_u + c.fn_u > 0) {
    udr = static_cast<double>(c.tp_u + c.fn_star_u) / (c.tp_u + c.fn_u);
  }
  if (c.tp_u + c.fn_star_u > 0) {
    udp = static_cast<double>(c.tp_u) / (c.tp_u + c.fn_star_u);
  }
  return {udr, udp};
}

std::optional<double> average_precision(const std::vector<ObjectRecord>& detections,
                                        const std::vector<ObjectRecord>& gt,
                                        int class_id, double iou_thresh) {
  std::vector<ObjectRecord> gt_class;
  for (const auto& g : gt) {
    if (g.tag == ClassTag::known(class_id)) gt_class.push_back(g);
  }
  if (gt_class.empty()) return std::nullopt;

  std::vector<const ObjectRecord*> ranked;
  for (const auto& det : detections) {
    if (det.tag == ClassTag::known(class_id)) ranked.push_back(&det);
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const ObjectRecord* a, const ObjectRecord* b) {
              if (a->score != b->score) return a->score > b->score;
              return a->object_id < b->object_id;
            });
  if (ranked.empty()) return 0.0;

  std::vector<bool> taken(gt_class.size(), false);
  std::vector<bool> is_tp(ranked.size(), false);
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const int g = best_gt_match(*ranked[i], gt_class, taken, iou_thresh);
    if (g >= 0) {
      taken[g] = true;
      is_tp[i] = true;
    }
  }

  const double n_gt = static_cast<double>(gt_class.size());
  std::vector<double> precision(ranked.size());
  std::vector<double> recall(ranked.size());
  int tp = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (is_tp[i]) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / n_gt;
  }

  // All-point interpolation: running max of precision from the right, then
  // integrate over the recall increments.
  double ap = 0.0;
  double max_prec = 0.0;
  for (std::size_t i = ranked.size(); i-- > 0;) {
    max_prec = std::max(max_prec, precision[i]);
    const double prev_recall = i == 0 ? 0.0 : recall[i - 1];
    if (recall[i] > prev_recall) {
      ap += (recall[i] - prev_recall) * max_prec;
    }
  }
  return ap;
}

std::pair<std::optional<double>, std::optional<double>> mean_ap(
    const std::vector<ObjectRecord>& detections, const std::vector<ObjectRecord>& gt,
    const TaskSplit& split, double iou_thresh) {
  auto group_mean = [&](const std::vector<int>& class_ids) -> std::optional<double> {
    double sum = 0.0;
    int n = 0;
    for (int id : class_ids) {
      if (auto ap = average_precision(detections, gt, id, iou_thresh)) {
        sum += *ap;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / n;
  };
  return {group_mean(previous_known_class_ids(split)),
          group_mean(current_known_class_ids(split))};
}

}  // namespace opendet::detmetrics
