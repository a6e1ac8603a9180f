#include "sr3d/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sr3d/rng.hpp"
#include "sr3d/soft_rank.hpp"

namespace sr3d {

std::string to_string(AssignStrategy s) {
  switch (s) {
    case AssignStrategy::FixedRadius: return "fixed-radius-baseline";
    case AssignStrategy::Spota: return "spota";
    case AssignStrategy::SpotaWithClsCost: return "spota-with-cls-cost";
    case AssignStrategy::SpotaWithoutRvd: return "spota-without-rvd";
  }
  return "unknown";
}

AssignStrategy parse_strategy(const std::string& name) {
  if (name == "fixed-radius-baseline" || name == "fixed-radius") {
    return AssignStrategy::FixedRadius;
  }
  if (name == "spota") return AssignStrategy::Spota;
  if (name == "spota-with-cls-cost") return AssignStrategy::SpotaWithClsCost;
  if (name == "spota-without-rvd") return AssignStrategy::SpotaWithoutRvd;
  throw std::invalid_argument("unknown assignment strategy: " + name);
}

std::string to_string(ClsLossKind k) {
  return k == ClsLossKind::FocalOnly ? "focal-only" : "ras";
}

ClsLossKind parse_cls_loss(const std::string& name) {
  if (name == "focal-only") return ClsLossKind::FocalOnly;
  if (name == "ras") return ClsLossKind::Ras;
  throw std::invalid_argument("unknown classification loss: " + name);
}

PredictorState init_predictor(const AnchorSet& anchors,
                              const std::vector<ClassSizeModel>& class_sizes,
                              int class_count, std::uint64_t seed) {
  if (class_sizes.size() != static_cast<std::size_t>(class_count)) {
    throw std::invalid_argument(
        "init_predictor: one size model per class required");
  }
  std::mt19937_64 rng(seed);
  PredictorState state;
  state.logits = Grid2(anchors.size(), class_count, -2.0);
  state.delta_center.assign(anchors.size(), Vec3{});
  state.log_size.resize(anchors.size());
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    // Jitter keeps anchors distinguishable: identical logits would make
    // score-based costs and confidence ranks degenerate across anchors.
    auto logit_row = state.logits.row(a);
    for (int c = 0; c < class_count; ++c) {
      logit_row[c] += normal(rng, 0.0, 0.1);
    }
    const int c = static_cast<int>(uniform_int(rng, 0, class_count - 1));
    for (int k = 0; k < 3; ++k) {
      state.log_size[a][k] =
          std::log(class_sizes[c].mean[k]) + normal(rng, 0.0, 0.25);
    }
  }
  return state;
}

std::vector<Box3> decode_boxes(const PredictorState& state,
                               const AnchorSet& anchors) {
  std::vector<Box3> boxes;
  boxes.reserve(anchors.size());
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    Vec3 size;
    for (int k = 0; k < 3; ++k) {
      size[k] = std::max(std::exp(state.log_size[a][k]), kMinBoxSize);
    }
    boxes.emplace_back(anchors[a].center + state.delta_center[a], size);
  }
  return boxes;
}

Grid2 decode_scores(const PredictorState& state) {
  Grid2 scores(state.logits.rows(), state.logits.cols());
  for (std::size_t a = 0; a < scores.rows(); ++a) {
    const auto in = state.logits.row(a);
    auto out = scores.row(a);
    for (std::size_t c = 0; c < in.size(); ++c) out[c] = sigmoid(in[c]);
  }
  return scores;
}

AssignmentResult fixed_radius_baseline_assign(
    std::span<const GroundTruthObject> gts, const AnchorSet& anchors,
    double radius) {
  if (!(radius > 0.0)) {
    throw std::invalid_argument(
        "fixed_radius_baseline_assign: radius must be > 0");
  }
  AssignmentResult result;
  for (std::size_t j = 0; j < anchors.size(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    int best_gt = -1;
    for (std::size_t i = 0; i < gts.size(); ++i) {
      const double d = distance(anchors[j].center, gts[i].box.center());
      if (d < best) {  // strict: ties stay with the lower gt index
        best = d;
        best_gt = static_cast<int>(i);
      }
    }
    if (best_gt >= 0 && best <= radius) {
      result.positives.push_back({static_cast<int>(j), best_gt, best});
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

namespace {

// SPOTA cost with the classification term reinstated:
// C = gamma_c * (C_reg + R_VD) + lambda * BCE(score[gt class], 1).
CostMatrix spota_with_cls_cost_matrix(std::span<const GroundTruthObject> gts,
                                      const AnchorSet& anchors,
                                      std::span<const Box3> pred_boxes,
                                      const Grid2& scores,
                                      const AssignParams& params) {
  CostMatrix cost =
      spota_cost_matrix(gts, anchors, pred_boxes, params.mu, true);
  for (std::size_t i = 0; i < gts.size(); ++i) {
    auto row = cost.row(i);
    const int cls = gts[i].class_id;
    for (std::size_t j = 0; j < anchors.size(); ++j) {
      const double s = std::clamp(scores.at(j, cls), kScoreClamp,
                                  1.0 - kScoreClamp);
      row[j] += params.lambda * -std::log(s);
    }
  }
  return cost;
}

}  // namespace

AssignmentResult assign_labels(AssignStrategy strategy,
                               std::span<const GroundTruthObject> gts,
                               const AnchorSet& anchors,
                               std::span<const Box3> pred_boxes,
                               const Grid2& scores,
                               const AssignParams& params) {
  switch (strategy) {
    case AssignStrategy::FixedRadius:
      return fixed_radius_baseline_assign(gts, anchors, params.radius);
    case AssignStrategy::Spota:
      return spota_assign(
          spota_cost_matrix(gts, anchors, pred_boxes, params.mu, true),
          params.k);
    case AssignStrategy::SpotaWithoutRvd:
      return spota_assign(
          spota_cost_matrix(gts, anchors, pred_boxes, params.mu, false),
          params.k);
    case AssignStrategy::SpotaWithClsCost:
      return spota_assign(
          spota_with_cls_cost_matrix(gts, anchors, pred_boxes, scores, params),
          params.k);
  }
  throw std::invalid_argument("assign_labels: unknown strategy");
}

namespace {

double positive_aic(const std::vector<PositiveSample>& samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (const PositiveSample& s : samples) acc += std::abs(s.sigma - s.q);
  return acc / static_cast<double>(samples.size());
}

struct ApPair {
  double ap25 = 0.0;
  double ap50 = 0.0;
};

ApPair ap_at_default_thresholds(const std::vector<Detection>& kept,
                                const Scene& scene) {
  ApPair out;
  out.ap25 = average_precision(kept, scene.objects, 0.25).mean_ap;
  out.ap50 = average_precision(kept, scene.objects, 0.5).mean_ap;
  return out;
}

}  // namespace

std::vector<Detection> emit_detections(std::span<const Box3> boxes,
                                       const Grid2& scores,
                                       const EvalConfig& eval) {
  std::vector<Detection> dets;
  for (std::size_t a = 0; a < boxes.size(); ++a) {
    const auto row = scores.row(a);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (row[c] >= eval.score_threshold) {
        dets.push_back({boxes[a], static_cast<int>(c), row[c]});
      }
    }
  }
  if (eval.pre_nms_per_class <= 0) return dets;

  // Keep the per-class top-N by score before suppression.
  std::vector<Detection> capped;
  const std::size_t num_classes = scores.cols();
  for (std::size_t c = 0; c < num_classes; ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < dets.size(); ++i) {
      if (dets[i].class_id == static_cast<int>(c)) idx.push_back(i);
    }
    const std::size_t take =
        std::min<std::size_t>(idx.size(), eval.pre_nms_per_class);
    std::partial_sort(idx.begin(), idx.begin() + take, idx.end(),
                      [&dets](std::size_t a, std::size_t b) {
                        if (dets[a].score != dets[b].score)
                          return dets[a].score > dets[b].score;
                        return a < b;
                      });
    for (std::size_t r = 0; r < take; ++r) capped.push_back(dets[idx[r]]);
  }
  return capped;
}

TrainResult optimize(const Scene& scene, const AnchorSet& anchors,
                     const ExperimentConfig& config,
                     const std::vector<ClassSizeModel>& class_sizes) {
  const int num_classes = static_cast<int>(class_sizes.size());
  TrainResult result;
  result.state = init_predictor(anchors, class_sizes, num_classes,
                                mix64(config.seed, scene.seed));

  const int refresh = std::max(1, config.assign.refresh_interval);
  AssignmentResult assignment;
  double initial_total = 0.0;

  auto record_epoch = [&](int epoch, const LossBreakdown& breakdown,
                          std::span<const Box3> boxes, const Grid2& scores) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss_cls = breakdown.cls_loss;
    rec.loss_reg = breakdown.reg_loss;
    rec.aic = positive_aic(breakdown.samples);
    const bool final_epoch = epoch == config.optimizer.iterations;
    if (final_epoch || (config.eval.ap_interval > 0 &&
                        epoch % config.eval.ap_interval == 0)) {
      const auto kept = nms(emit_detections(boxes, scores, config.eval),
                            config.eval.nms_iou, config.eval.score_threshold);
      const ApPair ap = ap_at_default_thresholds(kept, scene);
      rec.has_ap = true;
      rec.ap25 = ap.ap25;
      rec.ap50 = ap.ap50;
    }
    result.trajectory.push_back(rec);
  };

  for (int epoch = 0; epoch <= config.optimizer.iterations; ++epoch) {
    const std::vector<Box3> boxes = decode_boxes(result.state, anchors);
    const Grid2 scores = decode_scores(result.state);
    if (epoch % refresh == 0) {
      assignment = assign_labels(config.assignment, scene.objects, anchors,
                                 boxes, scores, config.assign);
    }
    const LossBreakdown breakdown =
        total_loss(boxes, scores, assignment, scene.objects, config.ras,
                   config.cls_loss);
    record_epoch(epoch, breakdown, boxes, scores);

    if (epoch == 0) initial_total = breakdown.total;
    if (!std::isfinite(breakdown.total) ||
        (epoch > 0 && breakdown.total > initial_total * 1e3)) {
      result.diverged = true;
      return result;
    }
    if (epoch == config.optimizer.iterations) break;

    const TotalLossGradients grads =
        total_loss_gradient(boxes, scores, assignment, scene.objects,
                            config.ras, config.cls_loss);
    const double lr = config.optimizer.step_size;
    for (std::size_t a = 0; a < anchors.size(); ++a) {
      auto logit_row = result.state.logits.row(a);
      const auto score_row = scores.row(a);
      const auto grad_row = grads.d_scores.row(a);
      for (std::size_t c = 0; c < logit_row.size(); ++c) {
        const double dsigma_dlogit = score_row[c] * (1.0 - score_row[c]);
        logit_row[c] -= lr * grad_row[c] * dsigma_dlogit;
      }
      const BoxGrad& bg = grads.d_boxes[a];
      for (int k = 0; k < 3; ++k) {
        result.state.delta_center[a][k] -= lr * bg.d_center[k];
        // size = exp(log_size): chain through the decoded size.
        const double size = boxes[a].size()[k];
        result.state.log_size[a][k] -= lr * bg.d_size[k] * size;
      }
    }
  }
  return result;
}

SceneEvalResult evaluate_final(const Scene& scene, const AnchorSet& anchors,
                               const PredictorState& state,
                               const ExperimentConfig& config) {
  const std::vector<Box3> boxes = decode_boxes(state, anchors);
  const Grid2 scores = decode_scores(state);

  SceneEvalResult out;
  const std::vector<Detection> raw =
      emit_detections(boxes, scores, config.eval);
  const std::vector<Detection> kept =
      nms(raw, config.eval.nms_iou, config.eval.score_threshold);
  const ApPair ap = ap_at_default_thresholds(kept, scene);
  out.ap25 = ap.ap25;
  out.ap50 = ap.ap50;

  const PceResult consistency =
      pce(kept, scene.objects, config.eval.pce_top_k);
  out.mean_pce = consistency.mean_error;
  out.scatter = consistency.pairs;

  const AssignmentResult assignment =
      assign_labels(config.assignment, scene.objects, anchors, boxes, scores,
                    config.assign);
  const auto samples = build_positive_samples(
      assignment, boxes, scores, scene.objects, config.ras, config.cls_loss);
  double acc = 0.0;
  for (const PositiveSample& s : samples) acc += std::abs(s.sigma - s.q);
  out.final_aic = samples.empty() ? 0.0 : acc / samples.size();

  // Counterfactual scores: every (anchor, class) pair re-scored by its true
  // IoU against that class before thresholding, capping and suppression, so
  // detections the learned scores buried can resurface.
  Grid2 substituted_scores(scores.rows(), scores.cols());
  for (std::size_t a = 0; a < boxes.size(); ++a) {
    for (const GroundTruthObject& gt : scene.objects) {
      double& cell = substituted_scores.at(a, gt.class_id);
      cell = std::max(cell, iou3d(boxes[a], gt.box));
    }
  }
  const std::vector<Detection> substituted =
      nms(emit_detections(boxes, substituted_scores, config.eval),
          config.eval.nms_iou, config.eval.score_threshold);
  const ApPair sub_ap = ap_at_default_thresholds(substituted, scene);
  out.ap25_gt_sub = sub_ap.ap25;
  out.ap50_gt_sub = sub_ap.ap50;
  return out;
}

}  // namespace sr3d
