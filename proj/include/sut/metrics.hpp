#pragma once

// Tracking evaluation against ground truth: event-based counts (false
// positives, misses, identity switches, fragmentations) with the summary
// MOTA score, and globally matched identity metrics (IDF1 and friends).
// Box correspondence uses plain IoU so the evaluation stays neutral toward
// whatever similarity the tracker itself used.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sut/geometry.hpp"
#include "sut/hungarian.hpp"
#include "sut/trajectory.hpp"

namespace sut {

struct EvalReport {
  double mota = 0.0;
  double idf1 = 0.0;
  double idp = 0.0;
  double idr = 0.0;
  long long fp = 0;
  long long fn = 0;
  long long idsw = 0;
  long long frag = 0;
  long long idfp = 0;
  long long idfn = 0;
  long long idtp = 0;
  long long gt_count = 0;
};

namespace detail {

inline void check_threshold(double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw std::invalid_argument("metrics: iou_threshold must lie in (0, 1)");
  }
}

inline std::vector<int> merged_frames(const TrajectorySet& a,
                                      const TrajectorySet& b) {
  std::vector<int> out;
  auto ia = a.frames.begin();
  auto ib = b.frames.begin();
  while (ia != a.frames.end() || ib != b.frames.end()) {
    if (ib == b.frames.end() ||
        (ia != a.frames.end() && ia->first <= ib->first)) {
      const int f = ia->first;
      if (out.empty() || out.back() != f) out.push_back(f);
      ++ia;
    } else {
      const int f = ib->first;
      if (out.empty() || out.back() != f) out.push_back(f);
      ++ib;
    }
  }
  return out;
}

inline const std::vector<TrackedBox>& frame_or_empty(const TrajectorySet& t,
                                                     int frame) {
  static const std::vector<TrackedBox> kEmpty;
  const auto it = t.frames.find(frame);
  return it == t.frames.end() ? kEmpty : it->second;
}

}  // namespace detail

/// Event-based evaluation. Correspondences persist across frames: a pair
/// established earlier is kept as long as it still clears the IoU gate, and
/// only the remainder is re-assigned each frame. An identity switch is
/// counted when a ground-truth track is matched to a different prediction
/// identity than at its previous match (gaps included); a fragmentation is
/// counted when a still-present ground-truth track goes from matched to
/// unmatched. MOTA = 1 - (FN + FP + IDSW) / GT; with no ground truth at all
/// it is 1 when no errors occurred, -inf otherwise.
inline EvalReport clear_metrics(const TrajectorySet& gt,
                                const TrajectorySet& pred,
                                double iou_threshold = 0.5) {
  detail::check_threshold(iou_threshold);
  EvalReport r;
  std::map<int, int> corresponding;    // gt id -> carried pred id
  std::map<int, int> last_matched_to;  // gt id -> pred id at last match
  std::map<int, bool> was_matched;     // gt id -> matched at last appearance

  for (const int frame : detail::merged_frames(gt, pred)) {
    const auto& gts = detail::frame_or_empty(gt, frame);
    const auto& preds = detail::frame_or_empty(pred, frame);
    r.gt_count += static_cast<long long>(gts.size());

    std::map<int, int> pred_index;  // pred id -> position in preds
    for (int j = 0; j < static_cast<int>(preds.size()); ++j) {
      pred_index[preds[j].id] = j;
    }

    std::vector<bool> gt_taken(gts.size(), false);
    std::vector<bool> pred_taken(preds.size(), false);
    std::vector<std::pair<int, int>> pairs;  // (gt idx, pred idx)

    // Keep valid previous correspondences before assigning anything new;
    // iterate ground truth in identity order so the pass is deterministic.
    std::vector<int> gt_order(gts.size());
    for (int i = 0; i < static_cast<int>(gts.size()); ++i) gt_order[i] = i;
    std::sort(gt_order.begin(), gt_order.end(),
              [&](int a, int b) { return gts[a].id < gts[b].id; });
    for (const int i : gt_order) {
      const auto carried = corresponding.find(gts[i].id);
      if (carried == corresponding.end()) continue;
      const auto j_it = pred_index.find(carried->second);
      if (j_it == pred_index.end() || pred_taken[j_it->second]) continue;
      if (iou(gts[i].box, preds[j_it->second].box) >= iou_threshold) {
        gt_taken[i] = true;
        pred_taken[j_it->second] = true;
        pairs.emplace_back(i, j_it->second);
      }
    }

    // Optimal assignment over the remainder, gated at the same threshold.
    std::vector<int> free_gt;
    std::vector<int> free_pred;
    for (int i = 0; i < static_cast<int>(gts.size()); ++i) {
      if (!gt_taken[i]) free_gt.push_back(i);
    }
    for (int j = 0; j < static_cast<int>(preds.size()); ++j) {
      if (!pred_taken[j]) free_pred.push_back(j);
    }
    if (!free_gt.empty() && !free_pred.empty()) {
      Eigen::MatrixXd sim(free_gt.size(), free_pred.size());
      for (std::size_t a = 0; a < free_gt.size(); ++a) {
        for (std::size_t b = 0; b < free_pred.size(); ++b) {
          sim(a, b) = iou(gts[free_gt[a]].box, preds[free_pred[b]].box);
        }
      }
      for (const auto& [a, b] : hungarian(sim).matches) {
        if (sim(a, b) >= iou_threshold) {
          pairs.emplace_back(free_gt[a], free_pred[b]);
          gt_taken[free_gt[a]] = true;
          pred_taken[free_pred[b]] = true;
        }
      }
    }

    for (const auto& [i, j] : pairs) {
      const int gid = gts[i].id;
      const int pid = preds[j].id;
      const auto prev = last_matched_to.find(gid);
      if (prev != last_matched_to.end() && prev->second != pid) ++r.idsw;
      last_matched_to[gid] = pid;
      corresponding[gid] = pid;
    }
    for (int i = 0; i < static_cast<int>(gts.size()); ++i) {
      const int gid = gts[i].id;
      if (!gt_taken[i]) {
        ++r.fn;
        const auto prev = was_matched.find(gid);
        if (prev != was_matched.end() && prev->second) ++r.frag;
      }
      was_matched[gid] = gt_taken[i];
    }
    for (int j = 0; j < static_cast<int>(preds.size()); ++j) {
      if (!pred_taken[j]) ++r.fp;
    }
  }

  const long long errors = r.fn + r.fp + r.idsw;
  if (r.gt_count > 0) {
    r.mota = 1.0 - static_cast<double>(errors) / r.gt_count;
  } else {
    r.mota = errors == 0 ? 1.0 : -std::numeric_limits<double>::infinity();
  }
  return r;
}

/// Identity-level evaluation: each ground-truth identity is matched to at
/// most one predicted identity by a single global assignment maximizing the
/// number of frames where their boxes coincide (IoU at or above the gate).
/// IDTP is that total; leftovers of either side count as IDFN / IDFP.
inline EvalReport id_metrics(const TrajectorySet& gt, const TrajectorySet& pred,
                             double iou_threshold = 0.5) {
  detail::check_threshold(iou_threshold);
  EvalReport r;

  std::map<int, int> gt_slot;
  std::map<int, int> pred_slot;
  long long pred_count = 0;
  for (const auto& [frame, list] : gt.frames) {
    r.gt_count += static_cast<long long>(list.size());
    for (const TrackedBox& t : list) {
      gt_slot.emplace(t.id, static_cast<int>(gt_slot.size()));
    }
  }
  for (const auto& [frame, list] : pred.frames) {
    pred_count += static_cast<long long>(list.size());
    for (const TrackedBox& t : list) {
      pred_slot.emplace(t.id, static_cast<int>(pred_slot.size()));
    }
  }

  Eigen::MatrixXd overlap =
      Eigen::MatrixXd::Zero(gt_slot.size(), pred_slot.size());
  for (const auto& [frame, gts] : gt.frames) {
    const auto pit = pred.frames.find(frame);
    if (pit == pred.frames.end()) continue;
    for (const TrackedBox& g : gts) {
      for (const TrackedBox& p : pit->second) {
        if (iou(g.box, p.box) >= iou_threshold) {
          overlap(gt_slot[g.id], pred_slot[p.id]) += 1.0;
        }
      }
    }
  }

  if (overlap.rows() > 0 && overlap.cols() > 0) {
    for (const auto& [a, b] : hungarian(overlap).matches) {
      r.idtp += static_cast<long long>(std::llround(overlap(a, b)));
    }
  }
  r.idfn = r.gt_count - r.idtp;
  r.idfp = pred_count - r.idtp;
  r.idp = (r.idtp + r.idfp) > 0
              ? static_cast<double>(r.idtp) / (r.idtp + r.idfp)
              : 1.0;
  r.idr = (r.idtp + r.idfn) > 0
              ? static_cast<double>(r.idtp) / (r.idtp + r.idfn)
              : 1.0;
  const long long denom = 2 * r.idtp + r.idfp + r.idfn;
  r.idf1 = denom > 0 ? 2.0 * static_cast<double>(r.idtp) / denom : 1.0;
  return r;
}

/// Full report: event-based and identity-based metrics over the same pair.
inline EvalReport evaluate(const TrajectorySet& gt, const TrajectorySet& pred,
                           double iou_threshold = 0.5) {
  EvalReport r = clear_metrics(gt, pred, iou_threshold);
  const EvalReport ids = id_metrics(gt, pred, iou_threshold);
  r.idtp = ids.idtp;
  r.idfp = ids.idfp;
  r.idfn = ids.idfn;
  r.idf1 = ids.idf1;
  r.idp = ids.idp;
  r.idr = ids.idr;
  return r;
}

}  // namespace sut
