#ifndef SR3D_METRICS_HPP_
#define SR3D_METRICS_HPP_

#include <span>
#include <vector>

#include "sr3d/assignment.hpp"
#include "sr3d/geometry.hpp"

namespace sr3d {

struct Detection {
  Box3 box;
  int class_id = 0;
  double score = 0.0;
};

/// One (classification score, localization quality) pairing.
struct ConsistencyRecord {
  double p = 0.0;
  double q = 0.0;
};

/// Per-class greedy non-maximum suppression.
///
/// Detections below score_threshold are dropped; the rest are visited by
/// descending score (ties keep input order) and a detection is suppressed
/// when a kept detection of the same class overlaps it with IoU >=
/// iou_threshold. Output is sorted by descending score. Thresholds outside
/// [0,1] throw std::invalid_argument.
std::vector<Detection> nms(std::vector<Detection> dets, double iou_threshold,
                           double score_threshold);

struct ClassAp {
  int class_id = 0;
  double ap = 0.0;
  int num_gt = 0;
};

struct ApResult {
  std::vector<ClassAp> per_class;  // classes with >= 1 gt, ascending id
  double mean_ap = 0.0;
};

/// All-point interpolated average precision at one IoU threshold.
///
/// Per class, detections are ranked by descending score and greedily matched
/// to the highest-IoU unmatched ground truth of the same class (IoU ties to
/// the lower gt id); matches below the threshold are false positives. The
/// mean is unweighted over classes with at least one ground truth. Throws
/// std::runtime_error when there are no ground truths at all.
ApResult average_precision(std::span<const Detection> dets,
                           std::span<const GroundTruthObject> gts,
                           double iou_threshold);

/// Dataset-level AP over several scenes: detections pool into one ranking
/// per class but only match ground truths of their own scene.
ApResult average_precision_pooled(
    const std::vector<std::vector<Detection>>& dets_per_scene,
    const std::vector<std::vector<GroundTruthObject>>& gts_per_scene,
    double iou_threshold);

/// Mean absolute score/quality disparity. Throws std::runtime_error on an
/// empty record list.
double aic(std::span<const ConsistencyRecord> records);

struct PceResult {
  std::vector<ConsistencyRecord> pairs;  // (score, best same-class IoU)
  std::vector<double> abs_errors;
  double mean_error = 0.0;
};

/// Prediction consistency error over the top-k highest-confidence
/// detections of each class. Unmatched detections contribute q = 0.
PceResult pce(std::span<const Detection> dets,
              std::span<const GroundTruthObject> gts, int per_class_top_k = 30);

/// Replaces every detection's score with its IoU against the best
/// same-class ground truth (0 when none overlaps). Applied to raw
/// detections before suppression to probe the ranking upper bound.
std::vector<Detection> gt_score_substitution(
    std::span<const Detection> dets, std::span<const GroundTruthObject> gts);

}  // namespace sr3d

#endif  // SR3D_METRICS_HPP_
