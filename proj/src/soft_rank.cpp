#include "sr3d/soft_rank.hpp"

#include <cmath>
#include <stdexcept>

namespace sr3d {

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

void check_args(std::span<const double> scores, double tau) {
  if (scores.empty()) {
    throw std::invalid_argument("soft rank: empty score sequence");
  }
  if (!(tau > 0.0)) {
    throw std::invalid_argument("soft rank: tau must be > 0");
  }
}

}  // namespace

std::vector<double> soft_normalized_rank(std::span<const double> scores,
                                         double tau) {
  check_args(scores, tau);
  const std::size_t n = scores.size();
  std::vector<double> ranks(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      acc += sigmoid((scores[j] - scores[i]) / tau);
    }
    ranks[i] = acc / static_cast<double>(n);
  }
  return ranks;
}

std::vector<double> rank_weight(std::span<const double> ranks) {
  std::vector<double> w(ranks.size());
  for (std::size_t i = 0; i < ranks.size(); ++i) w[i] = std::exp(-ranks[i]);
  return w;
}

RankWeights soft_rank_weights(std::span<const double> scores, double tau) {
  RankWeights out;
  out.normalized_rank = soft_normalized_rank(scores, tau);
  out.weight = rank_weight(out.normalized_rank);
  out.tau = tau;
  return out;
}

std::vector<std::vector<double>> soft_rank_gradient(
    std::span<const double> scores, double tau) {
  check_args(scores, tau);
  const std::size_t n = scores.size();
  const double scale = 1.0 / (static_cast<double>(n) * tau);
  std::vector<std::vector<double>> jac(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    double diag = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double s = sigmoid((scores[j] - scores[i]) / tau);
      const double d = s * (1.0 - s) * scale;
      jac[i][j] = d;
      diag -= d;
    }
    jac[i][i] = diag;
  }
  return jac;
}

}  // namespace sr3d
