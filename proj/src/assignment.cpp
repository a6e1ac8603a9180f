#include "sr3d/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sr3d {

void CostMatrix::validate() const {
  for (const double v : values_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::domain_error("CostMatrix: entries must be finite and >= 0");
    }
  }
}

double center_prior(const Vec3& anchor_center, const Vec3& gt_center,
                    double mu) {
  if (!(mu > 0.0)) {
    throw std::invalid_argument("center_prior: mu must be > 0");
  }
  return 1.0 - std::exp(-mu * squared_distance(anchor_center, gt_center));
}

double regression_cost(const Box3& pred, const Box3& gt) {
  return -std::log(std::max(iou3d(pred, gt), kIouCostFloor));
}

CostMatrix spota_cost_matrix(std::span<const GroundTruthObject> gts,
                             const AnchorSet& anchors,
                             std::span<const Box3> pred_boxes, double mu,
                             bool include_vertex_distance) {
  if (pred_boxes.size() != anchors.size()) {
    throw std::invalid_argument(
        "spota_cost_matrix: one predicted box per anchor required");
  }
  if (!(mu > 0.0)) {
    throw std::invalid_argument("spota_cost_matrix: mu must be > 0");
  }
  CostMatrix cost(gts.size(), anchors.size());
  for (std::size_t i = 0; i < gts.size(); ++i) {
    const GroundTruthObject& gt = gts[i];
    auto row = cost.row(i);
    for (std::size_t j = 0; j < anchors.size(); ++j) {
      const BoxPairGeometry g = box_pair_geometry(pred_boxes[j], gt.box);
      const double reg = -std::log(std::max(g.iou, kIouCostFloor));
      const double gamma =
          1.0 - std::exp(-mu * squared_distance(anchors[j].center,
                                                gt.box.center()));
      const double spatial =
          reg + (include_vertex_distance ? g.vertex_distance_ratio : 0.0);
      row[j] = gamma * spatial;
    }
  }
  return cost;
}

CostMatrix ota_cost_matrix(std::span<const GroundTruthObject> gts,
                           const AnchorSet& anchors,
                           std::span<const Box3> pred_boxes,
                           const std::vector<std::vector<double>>& class_scores,
                           double lambda) {
  if (pred_boxes.size() != anchors.size() ||
      class_scores.size() != anchors.size()) {
    throw std::invalid_argument(
        "ota_cost_matrix: boxes and scores must match the anchor set");
  }
  for (const auto& s : class_scores) {
    for (const double v : s) {
      if (!(v > 0.0) || !(v < 1.0)) {
        throw std::domain_error(
            "ota_cost_matrix: class scores must lie strictly in (0,1)");
      }
    }
  }
  CostMatrix cost(gts.size(), anchors.size());
  for (std::size_t i = 0; i < gts.size(); ++i) {
    const GroundTruthObject& gt = gts[i];
    auto row = cost.row(i);
    for (std::size_t j = 0; j < anchors.size(); ++j) {
      const double cls = -std::log(class_scores[j].at(gt.class_id));
      row[j] = lambda * cls + regression_cost(pred_boxes[j], gt.box);
    }
  }
  return cost;
}

AssignmentResult spota_assign(const CostMatrix& cost, int k) {
  if (k < 1) {
    throw std::invalid_argument("spota_assign: k must be >= 1");
  }
  cost.validate();
  const std::size_t num_gt = cost.num_gt();
  const std::size_t num_anchors = cost.num_anchors();

  // owner[j] = gt row currently claiming anchor j, resolved to min cost.
  std::vector<int> owner(num_anchors, -1);
  std::vector<int> order(num_anchors);
  for (std::size_t i = 0; i < num_gt; ++i) {
    const auto row = cost.row(i);
    std::iota(order.begin(), order.end(), 0);
    const std::size_t take = std::min<std::size_t>(k, num_anchors);
    std::partial_sort(order.begin(), order.begin() + take, order.end(),
                      [&row](int a, int b) {
                        if (row[a] != row[b]) return row[a] < row[b];
                        return a < b;
                      });
    for (std::size_t c = 0; c < take; ++c) {
      const int j = order[c];
      if (owner[j] < 0 || cost.at(i, j) < cost.at(owner[j], j)) {
        owner[j] = static_cast<int>(i);
      }
    }
  }

  AssignmentResult result;
  for (std::size_t j = 0; j < num_anchors; ++j) {
    if (owner[j] >= 0) {
      result.positives.push_back({static_cast<int>(j), owner[j],
                                  cost.at(owner[j], j)});
    } else {
      result.negatives.push_back(static_cast<int>(j));
    }
  }
  std::sort(result.positives.begin(), result.positives.end(),
            [](const PositivePair& a, const PositivePair& b) {
              if (a.gt_id != b.gt_id) return a.gt_id < b.gt_id;
              return a.anchor_id < b.anchor_id;
            });
  return result;
}

}  // namespace sr3d
