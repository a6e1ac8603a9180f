#ifndef SR3D_ASSIGNMENT_HPP_
#define SR3D_ASSIGNMENT_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "sr3d/geometry.hpp"

namespace sr3d {

struct Anchor {
  int id = 0;
  Vec3 center;
  int level = 0;  // grid stride level
};

using AnchorSet = std::vector<Anchor>;

struct GroundTruthObject {
  int id = 0;
  Box3 box;
  int class_id = 0;
};

// IoU floor used by the -ln(IoU) regression cost so disjoint pairs stay
// finite: -ln(1e-7) ~ 16.118.
inline constexpr double kIouCostFloor = 1e-7;

/// Dense [num_gt x num_anchors] cost matrix, row-major, entries finite >= 0.
class CostMatrix {
 public:
  CostMatrix(std::size_t num_gt, std::size_t num_anchors)
      : num_gt_(num_gt),
        num_anchors_(num_anchors),
        values_(num_gt * num_anchors, 0.0) {}

  std::size_t num_gt() const { return num_gt_; }
  std::size_t num_anchors() const { return num_anchors_; }
  double& at(std::size_t gt, std::size_t anchor) {
    return values_[gt * num_anchors_ + anchor];
  }
  double at(std::size_t gt, std::size_t anchor) const {
    return values_[gt * num_anchors_ + anchor];
  }
  std::span<const double> row(std::size_t gt) const {
    return {values_.data() + gt * num_anchors_, num_anchors_};
  }
  std::span<double> row(std::size_t gt) {
    return {values_.data() + gt * num_anchors_, num_anchors_};
  }

  // Throws std::domain_error if any entry is negative or non-finite.
  void validate() const;

 private:
  std::size_t num_gt_;
  std::size_t num_anchors_;
  std::vector<double> values_;
};

struct PositivePair {
  int anchor_id = 0;
  int gt_id = 0;
  double cost = 0.0;
};

/// Positive pairs plus the negative anchor set. Together they partition the
/// anchor set: each anchor appears exactly once across both lists.
struct AssignmentResult {
  std::vector<PositivePair> positives;  // sorted by (gt_id, anchor_id)
  std::vector<int> negatives;           // ascending anchor ids
};

// Multiplicative spatial prior 1 - exp(-mu * d^2(anchor, gt center)):
// 0 at the center, asymptote 1 far away. Throws std::invalid_argument on
// mu <= 0.
double center_prior(const Vec3& anchor_center, const Vec3& gt_center,
                    double mu);

// -ln(max(IoU, 1e-7)); 0 iff the boxes coincide.
double regression_cost(const Box3& pred, const Box3& gt);

// Geometric assignment cost: C[i][j] = gamma_c * (C_reg + R_VD). Class
// scores never enter. `include_vertex_distance = false` drops the R_VD term
// for the corresponding ablation. Throws std::invalid_argument if
// pred_boxes and anchors disagree in length.
CostMatrix spota_cost_matrix(std::span<const GroundTruthObject> gts,
                             const AnchorSet& anchors,
                             std::span<const Box3> pred_boxes, double mu,
                             bool include_vertex_distance = true);

// Classification-plus-regression transport cost:
// C[i][j] = lambda * BCE(score_j[class_i], 1) + C_reg. Scores must lie
// strictly inside (0,1); otherwise throws std::domain_error.
CostMatrix ota_cost_matrix(std::span<const GroundTruthObject> gts,
                           const AnchorSet& anchors,
                           std::span<const Box3> pred_boxes,
                           const std::vector<std::vector<double>>& class_scores,
                           double lambda);

/// Top-k least-cost selection per ground truth, then duplicate resolution.
///
/// For each row the k cheapest anchors become candidates (ties broken by
/// lower anchor index, stable). An anchor claimed by several rows goes to
/// the row where its cost is minimal (ties to the lower row). No backfill
/// for rows that lose candidates. Anchor/gt ids in the result are the
/// matrix column/row indices. Throws std::invalid_argument on k < 1 and
/// std::domain_error on invalid cost entries.
AssignmentResult spota_assign(const CostMatrix& cost, int k);

}  // namespace sr3d

#endif  // SR3D_ASSIGNMENT_HPP_
