#ifndef SR3D_LOSSES_HPP_
#define SR3D_LOSSES_HPP_

#include <span>
#include <vector>

#include "sr3d/assignment.hpp"
#include "sr3d/geometry.hpp"
#include "sr3d/grid.hpp"

namespace sr3d {

// Scores are clamped to this band before any logarithm.
inline constexpr double kScoreClamp = 1e-7;

/// One assigned anchor as seen by the classification loss.
///
/// sigma is the confidence of the assigned class, q the IoU between the
/// decoded box and its ground truth. r_reg ranks q within the ground
/// truth's positives, r_cls ranks sigma within the positive pool; both are
/// treated as constants by the loss unless full-rank differentiation is
/// requested at the wiring level.
struct PositiveSample {
  int anchor_id = 0;
  int gt_id = 0;
  double sigma = 0.0;
  double q = 0.0;
  double r_reg = 1.0;
  double r_cls = 0.0;
};

struct RasParams {
  double beta = 1.0;    // rank-modulation exponent
  double tau = 0.1;     // soft-rank temperature
  double alpha = 0.25;  // focal alpha
  double gamma = 2.0;   // focal gamma
  // Min-max rescale r_cls over the positive pool to [0,1] so the blend
  // spans pure focal to pure distillation. Raw exp(-R) weights otherwise.
  bool rescale_r_cls = true;
  // Rank classification confidences per ground truth instead of globally.
  bool per_gt_r_cls = false;
  // Propagate gradients through the r_cls soft rank (full mode). Default
  // treats the blend weights as constants (frozen-rank mode).
  bool differentiate_r_cls = false;
};

enum class ClsLossKind { FocalOnly, Ras };

// Standard focal loss -alpha_t (1-p_t)^gamma ln(p_t) for a binary target.
double focal_loss(double sigma, int target, double alpha, double gamma);
double focal_loss_grad(double sigma, int target, double alpha, double gamma);

// Rank-aware self-distillation term
//   -[ (1-r_reg)^beta * q * ln(sigma) + q*(1-q) * ln(1-sigma) ],
// nonnegative for q in [0,1]. Throws std::domain_error for q or r_reg
// outside [0,1] or beta < 0.
double rdl(double sigma, double q, double r_reg, double beta);
double rdl_grad(double sigma, double q, double r_reg, double beta);

// Closed-form stationary point (1-r)^beta / ((1-r)^beta + (1-q)) of rdl in
// sigma, defined when either coefficient is positive.
double rdl_optimal_sigma(double q, double r_reg, double beta);

/// Blended classification loss over explicit sample lists.
///
/// Each positive contributes (1 - r_cls) * FL + r_cls * RDL on its assigned
/// class channel and focal loss against target 0 on every other channel;
/// negatives contribute focal loss against target 0 on all channels. The
/// assigned-class confidence is read from positive_scores; the r fields of
/// each sample are taken as given. Throws std::invalid_argument when a
/// positive references a gt id absent from `gts`.
double classification_loss(std::span<const PositiveSample> positives,
                           const Grid2& positive_scores,
                           const Grid2& negative_scores,
                           std::span<const GroundTruthObject> gts,
                           const RasParams& params);

struct ClassificationGradients {
  Grid2 d_positive_scores;
  Grid2 d_negative_scores;
};

// Frozen-rank analytic gradient of classification_loss with respect to
// every score channel.
ClassificationGradients classification_loss_gradient(
    std::span<const PositiveSample> positives, const Grid2& positive_scores,
    const Grid2& negative_scores, std::span<const GroundTruthObject> gts,
    const RasParams& params);

/// Computes q, r_reg and r_cls for the positive pairs of an assignment.
/// With kind == FocalOnly all r_cls are zero, which reduces the blend to
/// plain focal loss. gt ids in the assignment index into `gts`.
std::vector<PositiveSample> build_positive_samples(
    const AssignmentResult& assignment, std::span<const Box3> pred_boxes,
    const Grid2& scores, std::span<const GroundTruthObject> gts,
    const RasParams& params, ClsLossKind kind);

// Anchor-level wiring: builds samples from the assignment, then evaluates
// the blended loss over all anchors. `scores` is [num_anchors x C].
double ras_classification_loss(const AssignmentResult& assignment,
                               std::span<const Box3> pred_boxes,
                               const Grid2& scores,
                               std::span<const GroundTruthObject> gts,
                               const RasParams& params, ClsLossKind kind);

// Anchor-level gradient d(loss)/d(score). Includes the soft-rank Jacobian
// path of r_cls when params.differentiate_r_cls is set.
Grid2 ras_classification_gradient(const AssignmentResult& assignment,
                                  std::span<const Box3> pred_boxes,
                                  const Grid2& scores,
                                  std::span<const GroundTruthObject> gts,
                                  const RasParams& params, ClsLossKind kind);

struct LossBreakdown {
  double cls_loss = 0.0;
  double reg_loss = 0.0;
  double total = 0.0;
  // Diagnostics, aligned with the assignment's positive list.
  std::vector<double> per_positive_reg;
  std::vector<PositiveSample> samples;
};

/// Total detection loss: blended classification plus DIoU regression summed
/// over positives.
LossBreakdown total_loss(std::span<const Box3> pred_boxes, const Grid2& scores,
                         const AssignmentResult& assignment,
                         std::span<const GroundTruthObject> gts,
                         const RasParams& params, ClsLossKind kind);

struct TotalLossGradients {
  Grid2 d_scores;                // [num_anchors x C]
  std::vector<BoxGrad> d_boxes;  // per anchor; zero for negatives
};

TotalLossGradients total_loss_gradient(std::span<const Box3> pred_boxes,
                                       const Grid2& scores,
                                       const AssignmentResult& assignment,
                                       std::span<const GroundTruthObject> gts,
                                       const RasParams& params,
                                       ClsLossKind kind);

}  // namespace sr3d

#endif  // SR3D_LOSSES_HPP_
