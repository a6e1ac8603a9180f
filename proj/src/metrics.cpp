#include "sr3d/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace sr3d {

namespace {

std::vector<std::size_t> order_by_score_desc(std::span<const Detection> dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&dets](std::size_t a, std::size_t b) {
                     return dets[a].score > dets[b].score;
                   });
  return order;
}

double best_same_class_iou(const Detection& det,
                           std::span<const GroundTruthObject> gts) {
  double best = 0.0;
  for (const GroundTruthObject& gt : gts) {
    if (gt.class_id != det.class_id) continue;
    best = std::max(best, iou3d(det.box, gt.box));
  }
  return best;
}

}  // namespace

std::vector<Detection> nms(std::vector<Detection> dets, double iou_threshold,
                           double score_threshold) {
  if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0) ||
      !(score_threshold >= 0.0 && score_threshold <= 1.0)) {
    throw std::invalid_argument("nms: thresholds must lie in [0,1]");
  }
  std::erase_if(dets,
                [score_threshold](const Detection& d) {
                  return d.score < score_threshold;
                });
  const auto order = order_by_score_desc(dets);
  std::vector<bool> suppressed(dets.size(), false);
  std::vector<Detection> kept;
  for (std::size_t a = 0; a < order.size(); ++a) {
    const std::size_t idx = order[a];
    if (suppressed[idx]) continue;
    kept.push_back(dets[idx]);
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      const std::size_t other = order[b];
      if (suppressed[other]) continue;
      if (dets[other].class_id != dets[idx].class_id) continue;
      if (iou3d(dets[other].box, dets[idx].box) >= iou_threshold) {
        suppressed[other] = true;
      }
    }
  }
  return kept;
}

namespace {

struct RankedDet {
  double score;
  std::size_t scene;
  std::size_t index;  // position within the scene's detection list
};

double all_point_area(const std::vector<bool>& is_tp, int num_gt) {
  // Precision envelope over the ranked list, integrated across recall.
  const std::size_t n = is_tp.size();
  std::vector<double> precision(n), recall(n);
  int tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (is_tp[i]) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(num_gt);
  }
  double area = 0.0;
  double envelope = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    envelope = std::max(envelope, precision[i]);
    const double prev_recall = i == 0 ? 0.0 : recall[i - 1];
    if (recall[i] > prev_recall) {
      area += (recall[i] - prev_recall) * envelope;
    }
  }
  return area;
}

}  // namespace

ApResult average_precision_pooled(
    const std::vector<std::vector<Detection>>& dets_per_scene,
    const std::vector<std::vector<GroundTruthObject>>& gts_per_scene,
    double iou_threshold) {
  // Classes are evaluated over every scene that annotates them.
  std::map<int, int> gt_counts;
  for (const auto& gts : gts_per_scene) {
    for (const GroundTruthObject& gt : gts) ++gt_counts[gt.class_id];
  }
  if (gt_counts.empty()) {
    throw std::runtime_error("average_precision: no ground truths to evaluate");
  }

  ApResult result;
  for (const auto& [class_id, num_gt] : gt_counts) {
    std::vector<RankedDet> ranked;
    for (std::size_t s = 0; s < dets_per_scene.size(); ++s) {
      const auto& dets = dets_per_scene[s];
      for (std::size_t d = 0; d < dets.size(); ++d) {
        if (dets[d].class_id == class_id) {
          ranked.push_back({dets[d].score, s, d});
        }
      }
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const RankedDet& a, const RankedDet& b) {
                       return a.score > b.score;
                     });

    // matched[s][g] marks scene s's g-th ground truth of this class.
    std::vector<std::vector<bool>> matched(gts_per_scene.size());
    for (std::size_t s = 0; s < gts_per_scene.size(); ++s) {
      matched[s].assign(gts_per_scene[s].size(), false);
    }

    std::vector<bool> is_tp(ranked.size(), false);
    for (std::size_t r = 0; r < ranked.size(); ++r) {
      const auto& entry = ranked[r];
      const Detection& det = dets_per_scene[entry.scene][entry.index];
      const auto& gts = gts_per_scene[entry.scene];
      double best_iou = 0.0;
      std::size_t best_g = gts.size();
      for (std::size_t g = 0; g < gts.size(); ++g) {
        if (gts[g].class_id != class_id || matched[entry.scene][g]) continue;
        const double iou = iou3d(det.box, gts[g].box);
        if (iou > best_iou) {  // ties resolve to the earlier (lower-id) gt
          best_iou = iou;
          best_g = g;
        }
      }
      if (best_g < gts.size() && best_iou >= iou_threshold) {
        matched[entry.scene][best_g] = true;
        is_tp[r] = true;
      }
    }
    result.per_class.push_back({class_id, all_point_area(is_tp, num_gt), num_gt});
  }

  for (const ClassAp& c : result.per_class) result.mean_ap += c.ap;
  result.mean_ap /= static_cast<double>(result.per_class.size());
  return result;
}

ApResult average_precision(std::span<const Detection> dets,
                           std::span<const GroundTruthObject> gts,
                           double iou_threshold) {
  return average_precision_pooled(
      {std::vector<Detection>(dets.begin(), dets.end())},
      {std::vector<GroundTruthObject>(gts.begin(), gts.end())}, iou_threshold);
}

double aic(std::span<const ConsistencyRecord> records) {
  if (records.empty()) {
    throw std::runtime_error("aic: empty record list");
  }
  double acc = 0.0;
  for (const ConsistencyRecord& r : records) acc += std::abs(r.p - r.q);
  return acc / static_cast<double>(records.size());
}

PceResult pce(std::span<const Detection> dets,
              std::span<const GroundTruthObject> gts, int per_class_top_k) {
  PceResult result;
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    by_class[dets[i].class_id].push_back(i);
  }
  for (auto& [class_id, indices] : by_class) {
    std::stable_sort(indices.begin(), indices.end(),
                     [&dets](std::size_t a, std::size_t b) {
                       return dets[a].score > dets[b].score;
                     });
    const std::size_t take =
        std::min<std::size_t>(indices.size(), per_class_top_k);
    for (std::size_t r = 0; r < take; ++r) {
      const Detection& det = dets[indices[r]];
      const double q = best_same_class_iou(det, gts);
      result.pairs.push_back({det.score, q});
      result.abs_errors.push_back(std::abs(det.score - q));
    }
  }
  if (!result.abs_errors.empty()) {
    result.mean_error =
        std::accumulate(result.abs_errors.begin(), result.abs_errors.end(),
                        0.0) /
        static_cast<double>(result.abs_errors.size());
  }
  return result;
}

std::vector<Detection> gt_score_substitution(
    std::span<const Detection> dets, std::span<const GroundTruthObject> gts) {
  std::vector<Detection> out(dets.begin(), dets.end());
  for (Detection& det : out) {
    det.score = best_same_class_iou(det, gts);
  }
  return out;
}

}  // namespace sr3d
