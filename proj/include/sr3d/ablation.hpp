#ifndef SR3D_ABLATION_HPP_
#define SR3D_ABLATION_HPP_

#include <span>
#include <string>
#include <vector>

#include "sr3d/scene.hpp"
#include "sr3d/trainer.hpp"

namespace sr3d {

struct ConfigCell {
  std::string name;
  ExperimentConfig config;
};

struct SceneMetrics {
  double ap25 = 0.0;
  double ap50 = 0.0;
  double final_aic = 0.0;
  double mean_pce = 0.0;
  double ap25_gt_sub = 0.0;
  double ap50_gt_sub = 0.0;
};

struct CellResult {
  std::string name;
  bool failed = false;
  std::string error;
  std::vector<SceneMetrics> scenes;  // per scene, suite order
  std::vector<double> aic_curve;     // per-epoch mean over scenes
  // Mean AP over scenes at the epochs where it was evaluated.
  std::vector<int> ap_epochs;
  std::vector<double> ap25_curve;
  std::vector<double> ap50_curve;
  int diverged_scenes = 0;

  std::vector<double> metric(double SceneMetrics::*field) const;
};

struct ExperimentReport {
  std::vector<CellResult> cells;

  const CellResult* find(const std::string& name) const;
};

double mean(std::span<const double> values);
double sample_stddev(std::span<const double> values);

/// One-sided paired sign test: probability of at least the observed number
/// of a>b wins among non-tied pairs under a fair coin.
double paired_sign_test_p(std::span<const double> a,
                          std::span<const double> b);

/// Trains every (cell, scene) pair on one anchor grid and aggregates
/// per-cell metrics. A cell whose evaluation throws is marked failed and
/// skipped in aggregation; other cells are unaffected. Deterministic for
/// any job count.
ExperimentReport run_ablation(const std::vector<ConfigCell>& cells,
                              const std::vector<Scene>& suite,
                              const AnchorGridSpec& grid,
                              const std::vector<ClassSizeModel>& class_sizes,
                              const Vec3& room_extent, int jobs);

struct SweepPoint {
  double value = 0.0;
  double ap25_mean = 0.0;
  double ap25_std = 0.0;
  double ap50_mean = 0.0;
  double ap50_std = 0.0;
  bool failed = false;
};

struct SweepResult {
  std::string parameter;
  std::vector<SweepPoint> points;
};

/// Reruns the base config with one hyperparameter swept over `values`.
/// Supported parameters: k, mu, beta, tau. Throws std::invalid_argument on
/// any other name.
SweepResult hyperparameter_sweep(const std::string& parameter,
                                 std::span<const double> values,
                                 const ExperimentConfig& base,
                                 const std::vector<Scene>& suite,
                                 const AnchorGridSpec& grid,
                                 const std::vector<ClassSizeModel>& class_sizes,
                                 const Vec3& room_extent, int jobs);

}  // namespace sr3d

#endif  // SR3D_ABLATION_HPP_
