#include "sr3d/ablation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sr3d/parallel.hpp"

namespace sr3d {

std::vector<double> CellResult::metric(double SceneMetrics::*field) const {
  std::vector<double> out;
  out.reserve(scenes.size());
  for (const SceneMetrics& s : scenes) out.push_back(s.*field);
  return out;
}

const CellResult* ExperimentReport::find(const std::string& name) const {
  for (const CellResult& cell : cells) {
    if (cell.name == name) return &cell;
  }
  return nullptr;
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double acc = 0.0;
  for (const double v : values) acc += v;
  return acc / static_cast<double>(values.size());
}

double sample_stddev(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double acc = 0.0;
  for (const double v : values) acc += (v - m) * (v - m);
  return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

double paired_sign_test_p(std::span<const double> a,
                          std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("paired_sign_test_p: length mismatch");
  }
  int wins = 0, n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) continue;  // ties dropped
    ++n;
    if (a[i] > b[i]) ++wins;
  }
  if (n == 0) return 1.0;
  // Upper binomial tail at p = 1/2 via log binomial coefficients.
  double p = 0.0;
  for (int i = wins; i <= n; ++i) {
    const double log_choose = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) -
                              std::lgamma(n - i + 1.0);
    p += std::exp(log_choose - n * std::log(2.0));
  }
  return std::min(p, 1.0);
}

namespace {

struct SceneOutcome {
  bool ok = false;
  std::string error;
  SceneMetrics metrics;
  std::vector<EpochRecord> trajectory;
  bool diverged = false;
};

}  // namespace

ExperimentReport run_ablation(const std::vector<ConfigCell>& cells,
                              const std::vector<Scene>& suite,
                              const AnchorGridSpec& grid,
                              const std::vector<ClassSizeModel>& class_sizes,
                              const Vec3& room_extent, int jobs) {
  if (suite.empty()) {
    throw std::invalid_argument("run_ablation: empty scene suite");
  }
  const AnchorSet anchors = generate_anchors(grid, room_extent);
  const std::size_t num_cells = cells.size();
  const std::size_t num_scenes = suite.size();

  std::vector<SceneOutcome> outcomes(num_cells * num_scenes);
  parallel_for_indexed(outcomes.size(), jobs, [&](std::size_t task) {
    const std::size_t cell_idx = task / num_scenes;
    const std::size_t scene_idx = task % num_scenes;
    SceneOutcome& out = outcomes[task];
    try {
      const ConfigCell& cell = cells[cell_idx];
      const Scene& scene = suite[scene_idx];
      TrainResult trained =
          optimize(scene, anchors, cell.config, class_sizes);
      out.trajectory = std::move(trained.trajectory);
      out.diverged = trained.diverged;
      const SceneEvalResult eval =
          evaluate_final(scene, anchors, trained.state, cell.config);
      out.metrics = {eval.ap25,     eval.ap50,        eval.final_aic,
                     eval.mean_pce, eval.ap25_gt_sub, eval.ap50_gt_sub};
      out.ok = true;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  });

  ExperimentReport report;
  for (std::size_t c = 0; c < num_cells; ++c) {
    CellResult cell;
    cell.name = cells[c].name;
    for (std::size_t s = 0; s < num_scenes; ++s) {
      const SceneOutcome& out = outcomes[c * num_scenes + s];
      if (!out.ok) {
        cell.failed = true;
        if (cell.error.empty()) cell.error = out.error;
        continue;
      }
      if (out.diverged) ++cell.diverged_scenes;
      cell.scenes.push_back(out.metrics);
    }
    if (!cell.failed) {
      // Per-epoch mean curves over the suite. Diverged scenes may have
      // short trajectories; average over whichever scenes reached an epoch.
      std::size_t max_len = 0;
      for (std::size_t s = 0; s < num_scenes; ++s) {
        max_len = std::max(max_len,
                           outcomes[c * num_scenes + s].trajectory.size());
      }
      for (std::size_t e = 0; e < max_len; ++e) {
        double aic_acc = 0.0;
        int aic_n = 0;
        double ap25_acc = 0.0, ap50_acc = 0.0;
        int ap_n = 0;
        int epoch = 0;
        for (std::size_t s = 0; s < num_scenes; ++s) {
          const auto& traj = outcomes[c * num_scenes + s].trajectory;
          if (e >= traj.size()) continue;
          epoch = traj[e].epoch;
          aic_acc += traj[e].aic;
          ++aic_n;
          if (traj[e].has_ap) {
            ap25_acc += traj[e].ap25;
            ap50_acc += traj[e].ap50;
            ++ap_n;
          }
        }
        cell.aic_curve.push_back(aic_acc / std::max(aic_n, 1));
        if (ap_n > 0) {
          cell.ap_epochs.push_back(epoch);
          cell.ap25_curve.push_back(ap25_acc / ap_n);
          cell.ap50_curve.push_back(ap50_acc / ap_n);
        }
      }
    }
    report.cells.push_back(std::move(cell));
  }
  return report;
}

SweepResult hyperparameter_sweep(const std::string& parameter,
                                 std::span<const double> values,
                                 const ExperimentConfig& base,
                                 const std::vector<Scene>& suite,
                                 const AnchorGridSpec& grid,
                                 const std::vector<ClassSizeModel>& class_sizes,
                                 const Vec3& room_extent, int jobs) {
  std::vector<ConfigCell> cells;
  for (const double value : values) {
    ExperimentConfig config = base;
    if (parameter == "k") {
      config.assign.k = static_cast<int>(value);
    } else if (parameter == "mu") {
      config.assign.mu = value;
    } else if (parameter == "beta") {
      config.ras.beta = value;
    } else if (parameter == "tau") {
      config.ras.tau = value;
    } else {
      throw std::invalid_argument("hyperparameter_sweep: unknown parameter " +
                                  parameter);
    }
    char label[64];
    std::snprintf(label, sizeof(label), "%s=%.9g", parameter.c_str(), value);
    cells.push_back({label, config});
  }
  const ExperimentReport report =
      run_ablation(cells, suite, grid, class_sizes, room_extent, jobs);

  SweepResult sweep;
  sweep.parameter = parameter;
  for (std::size_t i = 0; i < values.size(); ++i) {
    SweepPoint point;
    point.value = values[i];
    const CellResult& cell = report.cells[i];
    point.failed = cell.failed;
    if (!cell.failed) {
      const auto ap25 = cell.metric(&SceneMetrics::ap25);
      const auto ap50 = cell.metric(&SceneMetrics::ap50);
      point.ap25_mean = mean(ap25);
      point.ap25_std = sample_stddev(ap25);
      point.ap50_mean = mean(ap50);
      point.ap50_std = sample_stddev(ap50);
    }
    sweep.points.push_back(point);
  }
  return sweep;
}

}  // namespace sr3d
