#ifndef SR3D_TRAINER_HPP_
#define SR3D_TRAINER_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "sr3d/assignment.hpp"
#include "sr3d/grid.hpp"
#include "sr3d/losses.hpp"
#include "sr3d/metrics.hpp"
#include "sr3d/scene.hpp"

namespace sr3d {

enum class AssignStrategy {
  FixedRadius,       // nearest gt center within a fixed radius
  Spota,             // geometric transport cost, top-k
  SpotaWithClsCost,  // geometric cost plus lambda-weighted cls cost
  SpotaWithoutRvd,   // geometric cost without the vertex-distance term
};

std::string to_string(AssignStrategy s);
AssignStrategy parse_strategy(const std::string& name);  // throws on unknown
std::string to_string(ClsLossKind k);
ClsLossKind parse_cls_loss(const std::string& name);  // throws on unknown

struct AssignParams {
  int k = 6;
  double mu = 1.0;
  double lambda = 1.0;       // cls-cost weight for SpotaWithClsCost
  double radius = 0.4;       // meters, FixedRadius only
  int refresh_interval = 1;  // recompute the assignment every n iterations
};

struct OptimizerConfig {
  double step_size = 0.01;
  int iterations = 500;
};

struct EvalConfig {
  double nms_iou = 0.5;
  double score_threshold = 0.01;
  std::vector<double> iou_thresholds{0.25, 0.5};
  int pce_top_k = 30;
  int pre_nms_per_class = 300;  // score cap before suppression
  int ap_interval = 25;         // 0 = final epoch only
};

struct ExperimentConfig {
  AssignStrategy assignment = AssignStrategy::Spota;
  ClsLossKind cls_loss = ClsLossKind::Ras;
  AssignParams assign;
  RasParams ras;
  OptimizerConfig optimizer;
  EvalConfig eval;
  std::uint64_t seed = 0;
};

/// Free per-anchor parameters of the toy detector: class logits plus a box
/// offset (center delta in meters, size in log space so decoded sizes stay
/// positive).
struct PredictorState {
  Grid2 logits;                   // [num_anchors x C]
  std::vector<Vec3> delta_center;
  std::vector<Vec3> log_size;
};

/// Logits start at -2 (sigma ~ 0.12); each anchor's log size starts at the
/// mean log size of a seeded random class plus jitter so boxes are not all
/// identical.
PredictorState init_predictor(const AnchorSet& anchors,
                              const std::vector<ClassSizeModel>& class_sizes,
                              int class_count, std::uint64_t seed);

std::vector<Box3> decode_boxes(const PredictorState& state,
                               const AnchorSet& anchors);
Grid2 decode_scores(const PredictorState& state);

/// Heuristic baseline: anchors within `radius` of a gt center become
/// positives of the nearest such gt (ties to the lower gt id); everything
/// else is negative. Throws std::invalid_argument on radius <= 0.
AssignmentResult fixed_radius_baseline_assign(
    std::span<const GroundTruthObject> gts, const AnchorSet& anchors,
    double radius);

/// Strategy dispatch used by the training loop and the assign command.
AssignmentResult assign_labels(AssignStrategy strategy,
                               std::span<const GroundTruthObject> gts,
                               const AnchorSet& anchors,
                               std::span<const Box3> pred_boxes,
                               const Grid2& scores, const AssignParams& params);

struct EpochRecord {
  int epoch = 0;
  double loss_cls = 0.0;
  double loss_reg = 0.0;
  double aic = 0.0;
  bool has_ap = false;
  double ap25 = 0.0;
  double ap50 = 0.0;
};

struct TrainResult {
  PredictorState state;
  std::vector<EpochRecord> trajectory;  // epoch 0 = initialized state
  bool diverged = false;
};

/// Full-batch gradient descent over the per-anchor parameters, with the
/// assignment recomputed from the current predictions. Trajectory rows
/// describe the state at that epoch before any further step. Divergence
/// (total loss above 1000x the initial value, or non-finite) stops the loop
/// and flags the result, keeping the partial trajectory.
TrainResult optimize(const Scene& scene, const AnchorSet& anchors,
                     const ExperimentConfig& config,
                     const std::vector<ClassSizeModel>& class_sizes);

/// Detections emitted by the toy detector: one per (anchor, class) above
/// the score threshold, capped to the per-class top-N before suppression.
std::vector<Detection> emit_detections(std::span<const Box3> boxes,
                                       const Grid2& scores,
                                       const EvalConfig& eval);

struct SceneEvalResult {
  double ap25 = 0.0;
  double ap50 = 0.0;
  double final_aic = 0.0;
  double mean_pce = 0.0;
  double ap25_gt_sub = 0.0;  // with scores replaced by true IoU pre-NMS
  double ap50_gt_sub = 0.0;
  std::vector<ConsistencyRecord> scatter;  // post-NMS (score, IoU) pairs
};

/// Post-NMS metrics of a trained state on its scene, plus the gt-IoU score
/// substitution counterfactual.
SceneEvalResult evaluate_final(const Scene& scene, const AnchorSet& anchors,
                               const PredictorState& state,
                               const ExperimentConfig& config);

}  // namespace sr3d

#endif  // SR3D_TRAINER_HPP_
