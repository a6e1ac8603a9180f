#include "sr3d/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sr3d/soft_rank.hpp"

namespace sr3d {

namespace {

double clamp_score(double sigma) {
  return std::clamp(sigma, kScoreClamp, 1.0 - kScoreClamp);
}

double pow_gamma(double base, double gamma) {
  if (gamma == 2.0) return base * base;
  if (gamma == 1.0) return base;
  if (gamma == 0.0) return 1.0;
  return std::pow(base, gamma);
}

const GroundTruthObject& find_gt(std::span<const GroundTruthObject> gts,
                                 int gt_id) {
  for (const GroundTruthObject& gt : gts) {
    if (gt.id == gt_id) return gt;
  }
  throw std::invalid_argument("classification loss: positive references gt " +
                              std::to_string(gt_id) +
                              " absent from the ground-truth list");
}

void check_rdl_domain(double q, double r_reg, double beta) {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::domain_error("rdl: q must lie in [0,1]");
  }
  if (!(r_reg >= 0.0 && r_reg <= 1.0)) {
    throw std::domain_error("rdl: r_reg must lie in [0,1]");
  }
  if (!(beta >= 0.0)) {
    throw std::domain_error("rdl: beta must be >= 0");
  }
}

}  // namespace

double focal_loss(double sigma, int target, double alpha, double gamma) {
  const double s = clamp_score(sigma);
  const double p = target == 1 ? s : 1.0 - s;
  const double at = target == 1 ? alpha : 1.0 - alpha;
  return -at * pow_gamma(1.0 - p, gamma) * std::log(p);
}

double focal_loss_grad(double sigma, int target, double alpha, double gamma) {
  const double s = clamp_score(sigma);
  if (target == 1) {
    // d/ds of -a (1-s)^g ln s
    const double mod = gamma == 0.0 ? 0.0
                                    : gamma * pow_gamma(1.0 - s, gamma - 1.0) *
                                          std::log(s);
    return alpha * (mod - pow_gamma(1.0 - s, gamma) / s);
  }
  // d/ds of -(1-a) s^g ln(1-s)
  const double mod = gamma == 0.0
                         ? 0.0
                         : gamma * pow_gamma(s, gamma - 1.0) * std::log(1.0 - s);
  return -(1.0 - alpha) * (mod - pow_gamma(s, gamma) / (1.0 - s));
}

double rdl(double sigma, double q, double r_reg, double beta) {
  check_rdl_domain(q, r_reg, beta);
  const double s = clamp_score(sigma);
  const double pull_up = pow_gamma(1.0 - r_reg, beta) * q;
  const double pull_down = q * (1.0 - q);
  return -(pull_up * std::log(s) + pull_down * std::log(1.0 - s));
}

double rdl_grad(double sigma, double q, double r_reg, double beta) {
  check_rdl_domain(q, r_reg, beta);
  const double s = clamp_score(sigma);
  const double pull_up = pow_gamma(1.0 - r_reg, beta) * q;
  const double pull_down = q * (1.0 - q);
  return -pull_up / s + pull_down / (1.0 - s);
}

double rdl_optimal_sigma(double q, double r_reg, double beta) {
  check_rdl_domain(q, r_reg, beta);
  const double a = pow_gamma(1.0 - r_reg, beta);
  const double denom = a + (1.0 - q);
  if (denom <= 0.0) {
    throw std::domain_error("rdl_optimal_sigma: degenerate coefficients");
  }
  return a / denom;
}

double classification_loss(std::span<const PositiveSample> positives,
                           const Grid2& positive_scores,
                           const Grid2& negative_scores,
                           std::span<const GroundTruthObject> gts,
                           const RasParams& params) {
  if (positive_scores.rows() != positives.size()) {
    throw std::invalid_argument(
        "classification_loss: one score row per positive required");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < positives.size(); ++i) {
    const PositiveSample& sample = positives[i];
    const int cls = find_gt(gts, sample.gt_id).class_id;
    const auto row = positive_scores.row(i);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (static_cast<int>(c) == cls) {
        const double fl = focal_loss(row[c], 1, params.alpha, params.gamma);
        const double dist = rdl(row[c], sample.q, sample.r_reg, params.beta);
        loss += (1.0 - sample.r_cls) * fl + sample.r_cls * dist;
      } else {
        loss += focal_loss(row[c], 0, params.alpha, params.gamma);
      }
    }
  }
  for (std::size_t j = 0; j < negative_scores.rows(); ++j) {
    const auto row = negative_scores.row(j);
    for (const double s : row) {
      loss += focal_loss(s, 0, params.alpha, params.gamma);
    }
  }
  return loss;
}

ClassificationGradients classification_loss_gradient(
    std::span<const PositiveSample> positives, const Grid2& positive_scores,
    const Grid2& negative_scores, std::span<const GroundTruthObject> gts,
    const RasParams& params) {
  if (positive_scores.rows() != positives.size()) {
    throw std::invalid_argument(
        "classification_loss_gradient: one score row per positive required");
  }
  ClassificationGradients grads;
  grads.d_positive_scores =
      Grid2(positive_scores.rows(), positive_scores.cols());
  grads.d_negative_scores =
      Grid2(negative_scores.rows(), negative_scores.cols());
  for (std::size_t i = 0; i < positives.size(); ++i) {
    const PositiveSample& sample = positives[i];
    const int cls = find_gt(gts, sample.gt_id).class_id;
    const auto row = positive_scores.row(i);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (static_cast<int>(c) == cls) {
        const double dfl = focal_loss_grad(row[c], 1, params.alpha, params.gamma);
        const double ddist =
            rdl_grad(row[c], sample.q, sample.r_reg, params.beta);
        grads.d_positive_scores.at(i, c) =
            (1.0 - sample.r_cls) * dfl + sample.r_cls * ddist;
      } else {
        grads.d_positive_scores.at(i, c) =
            focal_loss_grad(row[c], 0, params.alpha, params.gamma);
      }
    }
  }
  for (std::size_t j = 0; j < negative_scores.rows(); ++j) {
    const auto row = negative_scores.row(j);
    for (std::size_t c = 0; c < row.size(); ++c) {
      grads.d_negative_scores.at(j, c) =
          focal_loss_grad(row[c], 0, params.alpha, params.gamma);
    }
  }
  return grads;
}

namespace {

// Min-max rescale to [0,1]; a degenerate range maps everything to 1 so a
// lone (or uniformly ranked) positive takes the pure distillation branch.
void rescale_weights(std::span<double> w) {
  const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
  const double range = *hi - *lo;
  if (range < 1e-12) {
    std::fill(w.begin(), w.end(), 1.0);
    return;
  }
  const double min = *lo;
  for (double& v : w) v = (v - min) / range;
}

// Contiguous index ranges of equal gt_id (positives are sorted by gt_id).
std::vector<std::pair<std::size_t, std::size_t>> gt_groups(
    std::span<const PositiveSample> samples) {
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= samples.size(); ++i) {
    if (i == samples.size() || samples[i].gt_id != samples[begin].gt_id) {
      groups.emplace_back(begin, i);
      begin = i;
    }
  }
  return groups;
}

}  // namespace

std::vector<PositiveSample> build_positive_samples(
    const AssignmentResult& assignment, std::span<const Box3> pred_boxes,
    const Grid2& scores, std::span<const GroundTruthObject> gts,
    const RasParams& params, ClsLossKind kind) {
  std::vector<PositiveSample> samples;
  samples.reserve(assignment.positives.size());
  for (const PositivePair& pair : assignment.positives) {
    if (pair.anchor_id < 0 ||
        static_cast<std::size_t>(pair.anchor_id) >= pred_boxes.size()) {
      throw std::invalid_argument(
          "build_positive_samples: anchor id out of range");
    }
    const GroundTruthObject& gt = find_gt(gts, pair.gt_id);
    PositiveSample s;
    s.anchor_id = pair.anchor_id;
    s.gt_id = pair.gt_id;
    s.sigma = scores.at(pair.anchor_id, gt.class_id);
    s.q = iou3d(pred_boxes[pair.anchor_id], gt.box);
    samples.push_back(s);
  }
  if (samples.empty()) return samples;

  // Localization ranks: per ground truth, over that gt's positive q values.
  for (const auto& [begin, end] : gt_groups(samples)) {
    std::vector<double> qs;
    qs.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) qs.push_back(samples[i].q);
    const RankWeights rw = soft_rank_weights(qs, params.tau);
    for (std::size_t i = begin; i < end; ++i) {
      samples[i].r_reg = rw.weight[i - begin];
    }
  }

  if (kind == ClsLossKind::FocalOnly) {
    for (PositiveSample& s : samples) s.r_cls = 0.0;
    return samples;
  }

  // Confidence ranks: global pool by default, per gt when configured.
  auto apply_cls_ranks = [&](std::size_t begin, std::size_t end) {
    std::vector<double> sigmas;
    sigmas.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) sigmas.push_back(samples[i].sigma);
    RankWeights rw = soft_rank_weights(sigmas, params.tau);
    if (params.rescale_r_cls) rescale_weights(rw.weight);
    for (std::size_t i = begin; i < end; ++i) {
      samples[i].r_cls = rw.weight[i - begin];
    }
  };
  if (params.per_gt_r_cls) {
    for (const auto& [begin, end] : gt_groups(samples)) {
      apply_cls_ranks(begin, end);
    }
  } else {
    apply_cls_ranks(0, samples.size());
  }
  return samples;
}

namespace {

struct SubsetScores {
  Grid2 positive_scores;
  Grid2 negative_scores;
};

SubsetScores split_scores(const AssignmentResult& assignment,
                          const Grid2& scores) {
  SubsetScores out;
  out.positive_scores = Grid2(assignment.positives.size(), scores.cols());
  out.negative_scores = Grid2(assignment.negatives.size(), scores.cols());
  for (std::size_t i = 0; i < assignment.positives.size(); ++i) {
    const auto src = scores.row(assignment.positives[i].anchor_id);
    std::copy(src.begin(), src.end(), out.positive_scores.row(i).begin());
  }
  for (std::size_t j = 0; j < assignment.negatives.size(); ++j) {
    const auto src = scores.row(assignment.negatives[j]);
    std::copy(src.begin(), src.end(), out.negative_scores.row(j).begin());
  }
  return out;
}

// d r_cls[i] / d sigma[j] over one rank group, honoring the optional
// min-max rescale. sigmas are the assigned-class confidences of the group.
std::vector<std::vector<double>> cls_weight_jacobian(
    std::span<const double> sigmas, const RasParams& params) {
  const std::size_t n = sigmas.size();
  const auto rank_jac = soft_rank_gradient(sigmas, params.tau);
  const std::vector<double> ranks = soft_normalized_rank(sigmas, params.tau);
  const std::vector<double> w = rank_weight(ranks);

  std::vector<std::vector<double>> dw(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      dw[i][j] = -w[i] * rank_jac[i][j];
    }
  }
  if (!params.rescale_r_cls) return dw;

  const auto [lo_it, hi_it] = std::minmax_element(w.begin(), w.end());
  const double lo = *lo_it, hi = *hi_it;
  const double range = hi - lo;
  std::vector<std::vector<double>> out(n, std::vector<double>(n, 0.0));
  if (range < 1e-12) return out;  // plateau subgradient
  const std::size_t ilo = static_cast<std::size_t>(lo_it - w.begin());
  const std::size_t ihi = static_cast<std::size_t>(hi_it - w.begin());
  for (std::size_t i = 0; i < n; ++i) {
    const double num = w[i] - lo;
    for (std::size_t j = 0; j < n; ++j) {
      out[i][j] = ((dw[i][j] - dw[ilo][j]) * range -
                   num * (dw[ihi][j] - dw[ilo][j])) /
                  (range * range);
    }
  }
  return out;
}

}  // namespace

double ras_classification_loss(const AssignmentResult& assignment,
                               std::span<const Box3> pred_boxes,
                               const Grid2& scores,
                               std::span<const GroundTruthObject> gts,
                               const RasParams& params, ClsLossKind kind) {
  const auto samples =
      build_positive_samples(assignment, pred_boxes, scores, gts, params, kind);
  const SubsetScores subset = split_scores(assignment, scores);
  return classification_loss(samples, subset.positive_scores,
                             subset.negative_scores, gts, params);
}

Grid2 ras_classification_gradient(const AssignmentResult& assignment,
                                  std::span<const Box3> pred_boxes,
                                  const Grid2& scores,
                                  std::span<const GroundTruthObject> gts,
                                  const RasParams& params, ClsLossKind kind) {
  const auto samples =
      build_positive_samples(assignment, pred_boxes, scores, gts, params, kind);
  const SubsetScores subset = split_scores(assignment, scores);
  const ClassificationGradients sub_grads = classification_loss_gradient(
      samples, subset.positive_scores, subset.negative_scores, gts, params);

  Grid2 d_scores(scores.rows(), scores.cols());
  for (std::size_t i = 0; i < assignment.positives.size(); ++i) {
    const int anchor = assignment.positives[i].anchor_id;
    const auto src = sub_grads.d_positive_scores.row(i);
    auto dst = d_scores.row(anchor);
    for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
  }
  for (std::size_t j = 0; j < assignment.negatives.size(); ++j) {
    const int anchor = assignment.negatives[j];
    const auto src = sub_grads.d_negative_scores.row(j);
    auto dst = d_scores.row(anchor);
    for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
  }

  if (kind != ClsLossKind::Ras || !params.differentiate_r_cls ||
      samples.empty()) {
    return d_scores;
  }

  // Rank path: d/dsigma_j of sum_i [(1 - r_i) FL_i + r_i RDL_i] through the
  // blend weights, added on the assigned-class channels.
  auto add_rank_path = [&](std::size_t begin, std::size_t end) {
    const std::size_t n = end - begin;
    std::vector<double> sigmas(n);
    std::vector<double> gap(n);  // RDL_i - FL_i at the assigned channel
    std::vector<int> anchor(n);
    std::vector<int> channel(n);
    for (std::size_t i = 0; i < n; ++i) {
      const PositiveSample& s = samples[begin + i];
      const int cls = find_gt(gts, s.gt_id).class_id;
      sigmas[i] = s.sigma;
      anchor[i] = s.anchor_id;
      channel[i] = cls;
      const double fl = focal_loss(s.sigma, 1, params.alpha, params.gamma);
      const double dist = rdl(s.sigma, s.q, s.r_reg, params.beta);
      gap[i] = dist - fl;
    }
    const auto dr = cls_weight_jacobian(sigmas, params);
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += gap[i] * dr[i][j];
      d_scores.at(anchor[j], channel[j]) += acc;
    }
  };
  if (params.per_gt_r_cls) {
    for (const auto& [begin, end] : gt_groups(samples)) {
      add_rank_path(begin, end);
    }
  } else {
    add_rank_path(0, samples.size());
  }
  return d_scores;
}

LossBreakdown total_loss(std::span<const Box3> pred_boxes, const Grid2& scores,
                         const AssignmentResult& assignment,
                         std::span<const GroundTruthObject> gts,
                         const RasParams& params, ClsLossKind kind) {
  LossBreakdown breakdown;
  breakdown.samples =
      build_positive_samples(assignment, pred_boxes, scores, gts, params, kind);
  const SubsetScores subset = split_scores(assignment, scores);
  breakdown.cls_loss =
      classification_loss(breakdown.samples, subset.positive_scores,
                          subset.negative_scores, gts, params);
  breakdown.per_positive_reg.reserve(assignment.positives.size());
  for (const PositivePair& pair : assignment.positives) {
    const GroundTruthObject& gt = find_gt(gts, pair.gt_id);
    const double reg = diou_loss(pred_boxes[pair.anchor_id], gt.box);
    breakdown.per_positive_reg.push_back(reg);
    breakdown.reg_loss += reg;
  }
  breakdown.total = breakdown.cls_loss + breakdown.reg_loss;
  return breakdown;
}

TotalLossGradients total_loss_gradient(std::span<const Box3> pred_boxes,
                                       const Grid2& scores,
                                       const AssignmentResult& assignment,
                                       std::span<const GroundTruthObject> gts,
                                       const RasParams& params,
                                       ClsLossKind kind) {
  TotalLossGradients grads;
  grads.d_scores = ras_classification_gradient(assignment, pred_boxes, scores,
                                               gts, params, kind);
  grads.d_boxes.assign(pred_boxes.size(), BoxGrad{});
  for (const PositivePair& pair : assignment.positives) {
    const GroundTruthObject& gt = find_gt(gts, pair.gt_id);
    grads.d_boxes[pair.anchor_id] +=
        diou_gradient(pred_boxes[pair.anchor_id], gt.box);
  }
  return grads;
}

}  // namespace sr3d
