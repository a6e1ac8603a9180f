#ifndef SR3D_SOFT_RANK_HPP_
#define SR3D_SOFT_RANK_HPP_

#include <span>
#include <vector>

namespace sr3d {

// Numerically stable logistic sigmoid.
double sigmoid(double x);

/// Differentiable normalized rank of a score sequence.
///
/// R_i = (1/N) * sum_{j != i} sigmoid((s_j - s_i) / tau), so the highest
/// score gets rank near 0 and ranks approach the normalized hard rank
/// (count of larger scores / N) as tau shrinks. Invariant to adding a
/// constant to all scores.
///
/// Throws std::invalid_argument on an empty sequence or tau <= 0.
std::vector<double> soft_normalized_rank(std::span<const double> scores,
                                         double tau);

/// Element-wise exp(-R): order-reversing in R, order-preserving in scores.
std::vector<double> rank_weight(std::span<const double> ranks);

struct RankWeights {
  std::vector<double> normalized_rank;  // in [0, (N-1)/N]
  std::vector<double> weight;           // exp(-rank), in (exp(-(N-1)/N), 1]
  double tau = 0.0;
};

RankWeights soft_rank_weights(std::span<const double> scores, double tau);

/// Jacobian J[i][j] = dR_i/ds_j of soft_normalized_rank. Each row sums to
/// zero (the rank is shift-invariant).
std::vector<std::vector<double>> soft_rank_gradient(
    std::span<const double> scores, double tau);

}  // namespace sr3d

#endif  // SR3D_SOFT_RANK_HPP_
