// Command-line driver: scene generation, label assignment, toy training,
// evaluation, ablation tables and hyperparameter sweeps.
//
// Exit codes: 0 success, 1 evaluation/runtime failure, 2 usage/validation
// error. Every command prints the digest of its fully-resolved
// configuration; outputs are deterministic given inputs and seeds at any
// --jobs value.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sr3d/ablation.hpp"
#include "sr3d/io.hpp"
#include "sr3d/metrics.hpp"
#include "sr3d/parallel.hpp"
#include "sr3d/svg.hpp"
#include "sr3d/trainer.hpp"
#include "sr3d/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sr3d;

namespace {

fs::path output_root() {
  if (const char* env = std::getenv("SR3D_OUT_ROOT")) {
    return fs::path(env);
  }
  return fs::path("out");
}

std::string print_digest(const json& resolved) {
  const std::string digest = config_digest(resolved);
  std::cout << "manifest digest: " << digest << "\n";
  return digest;
}

RunManifest make_manifest(const std::string& digest, std::uint64_t suite_seed,
                          const json& resolved) {
  RunManifest manifest;
  manifest.digest = digest;
  manifest.suite_seed = suite_seed;
  manifest.tool_version = kToolVersion;
  manifest.created_utc = utc_timestamp();
  manifest.resolved_config = resolved;
  return manifest;
}

std::string fmt(double v) { return format_double(v); }

// ---------------------------------------------------------------------------
// gen-scenes

struct GenScenesArgs {
  std::string spec_path;
  int count = 50;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void run_gen_scenes(const GenScenesArgs& args) {
  SceneSpec spec = args.spec_path.empty() ? resolve_spec(SceneSpec{})
                                          : load_scene_spec(args.spec_path);
  if (args.seed) spec.seed = *args.seed;
  if (args.count < 0) throw UsageError("gen-scenes: count must be >= 0");

  json resolved;
  resolved["command"] = "gen-scenes";
  resolved["suite"] = scene_spec_json(spec);
  resolved["count"] = args.count;
  print_digest(resolved);

  const std::vector<Scene> scenes = generate_suite(spec, args.count, spec.seed);
  const fs::path out =
      args.out.empty() ? output_root() / "scenes.jsonl" : fs::path(args.out);
  write_scenes_jsonl(out, scenes);
  std::cout << "wrote " << scenes.size() << " scenes to " << out.string()
            << "\n";
}

// ---------------------------------------------------------------------------
// assign

struct AssignArgs {
  std::string scenes_path;
  std::string predictions_path;
  std::string strategy = "spota";
  AssignParams params;
  std::string out;
};

void run_assign(const AssignArgs& args) {
  AssignStrategy strategy;
  try {
    strategy = parse_strategy(args.strategy);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  json resolved;
  resolved["command"] = "assign";
  resolved["strategy"] = to_string(strategy);
  resolved["k"] = args.params.k;
  resolved["mu"] = args.params.mu;
  resolved["lambda"] = args.params.lambda;
  resolved["radius"] = args.params.radius;
  print_digest(resolved);

  const auto scenes = load_scenes_jsonl(args.scenes_path);
  const auto predictions = load_predictions_jsonl(args.predictions_path);
  std::map<int, const ScenePredictions*> by_id;
  for (const ScenePredictions& p : predictions) by_id[p.scene_id] = &p;

  std::vector<SceneAssignment> results;
  for (const Scene& scene : scenes) {
    const auto it = by_id.find(scene.scene_id);
    if (it == by_id.end()) {
      throw UsageError("assign: no predictions for scene " +
                       std::to_string(scene.scene_id));
    }
    const ScenePredictions& preds = *it->second;
    results.push_back(
        {scene.scene_id,
         assign_labels(strategy, scene.objects, preds.anchors, preds.boxes,
                       preds.scores, args.params)});
  }
  const fs::path out = args.out.empty() ? output_root() / "assignments.jsonl"
                                        : fs::path(args.out);
  write_assignments_jsonl(out, results);
  std::cout << "wrote assignments for " << results.size() << " scenes to "
            << out.string() << "\n";
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string scenes_path;
  std::string config_path;
  std::string out;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
};

struct TrainedScene {
  bool ok = false;
  std::string error;
  TrainResult train;
  SceneEvalResult eval;
};

std::vector<TrainedScene> train_scenes(const std::vector<Scene>& scenes,
                                       const AnchorSet& anchors,
                                       const RunConfig& config, int jobs) {
  const auto class_sizes = resolve_spec(config.suite).class_sizes;
  std::vector<TrainedScene> results(scenes.size());
  parallel_for_indexed(scenes.size(), jobs, [&](std::size_t i) {
    TrainedScene& out = results[i];
    try {
      out.train = optimize(scenes[i], anchors, config.experiment, class_sizes);
      out.eval = evaluate_final(scenes[i], anchors, out.train.state,
                                config.experiment);
      out.ok = true;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  });
  return results;
}

void run_train(const TrainArgs& args) {
  RunConfig config = load_run_config(args.config_path);
  if (args.seed) config.experiment.seed = *args.seed;
  const json resolved = resolved_config_json(config);
  const std::string digest = print_digest(resolved);

  const auto scenes = load_scenes_jsonl(args.scenes_path);
  if (scenes.empty()) throw UsageError("train: empty scenes file");
  const AnchorSet anchors =
      generate_anchors(config.grid, config.suite.room_extent);

  const auto results = train_scenes(scenes, anchors, config, args.jobs);
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i].ok) {
      throw std::runtime_error("train: scene " +
                               std::to_string(scenes[i].scene_id) +
                               " failed: " + results[i].error);
    }
  }

  const fs::path out_dir =
      args.out.empty() ? output_root() / "train" : fs::path(args.out);

  // Per-epoch means over scenes; diverged trajectories may be shorter, so
  // each epoch averages the scenes that reached it.
  std::size_t max_len = 0;
  for (const TrainedScene& r : results) {
    max_len = std::max(max_len, r.train.trajectory.size());
  }
  std::string metrics_csv = "epoch,loss_cls,loss_reg,aic,ap25,ap50\n";
  std::string aic_csv = "epoch,aic\n";
  std::vector<double> aic_epochs, aic_means;
  for (std::size_t e = 0; e < max_len; ++e) {
    double cls = 0, reg = 0, aic_acc = 0, ap25 = 0, ap50 = 0;
    int n = 0, ap_n = 0, epoch = 0;
    for (const TrainedScene& r : results) {
      if (e >= r.train.trajectory.size()) continue;
      const EpochRecord& rec = r.train.trajectory[e];
      epoch = rec.epoch;
      cls += rec.loss_cls;
      reg += rec.loss_reg;
      aic_acc += rec.aic;
      ++n;
      if (rec.has_ap) {
        ap25 += rec.ap25;
        ap50 += rec.ap50;
        ++ap_n;
      }
    }
    const std::string ap25_s = ap_n ? fmt(ap25 / ap_n) : "";
    const std::string ap50_s = ap_n ? fmt(ap50 / ap_n) : "";
    const std::vector<std::string> row{std::to_string(epoch), fmt(cls / n),
                                       fmt(reg / n),          fmt(aic_acc / n),
                                       ap25_s,                ap50_s};
    metrics_csv += csv_row(row);
    const std::vector<std::string> aic_row{std::to_string(epoch),
                                           fmt(aic_acc / n)};
    aic_csv += csv_row(aic_row);
    aic_epochs.push_back(epoch);
    aic_means.push_back(aic_acc / n);
  }

  std::string scatter_csv = "score,iou\n";
  std::vector<double> scatter_x, scatter_y;
  for (const TrainedScene& r : results) {
    for (const ConsistencyRecord& rec : r.eval.scatter) {
      const std::vector<std::string> row{fmt(rec.p), fmt(rec.q)};
      scatter_csv += csv_row(row);
      scatter_x.push_back(rec.p);
      scatter_y.push_back(rec.q);
    }
  }

  write_text_file(out_dir / "metrics.csv", metrics_csv);
  write_text_file(out_dir / "aic_curve.csv", aic_csv);
  write_text_file(out_dir / "scatter.csv", scatter_csv);

  const SvgSeries series[] = {{"aic", aic_epochs, aic_means, {}}};
  write_text_file(
      out_dir / "plots" / "aic_curve.svg",
      svg_line_chart("training consistency", "epoch", "AIC", series));
  write_text_file(out_dir / "plots" / "scatter.svg",
                  svg_scatter("confidence vs IoU", "confidence", "IoU",
                              scatter_x, scatter_y));

  RunManifest manifest = make_manifest(digest, config.experiment.seed, resolved);
  manifest.outputs = {"metrics.csv", "aic_curve.csv", "scatter.csv",
                      "plots/aic_curve.svg", "plots/scatter.svg"};
  write_manifest(out_dir / "manifest.json", manifest);
  std::cout << "wrote training report to " << out_dir.string() << "\n";

  int diverged = 0;
  for (const TrainedScene& r : results) diverged += r.train.diverged ? 1 : 0;
  if (diverged > 0) {
    throw std::runtime_error("train: " + std::to_string(diverged) +
                             " scene(s) diverged; partial outputs retained in " +
                             out_dir.string());
  }
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string detections_path;
  std::string scenes_path;
  bool gt_iou_substitute = false;
  std::vector<double> iou_thresholds{0.25, 0.5};
  std::string out;
};

void run_eval(const EvalArgs& args) {
  EvalConfig eval;  // protocol defaults: nms 0.5, score floor 0.01, top-30
  json resolved;
  resolved["command"] = "eval";
  resolved["iou_thresholds"] = args.iou_thresholds;
  resolved["gt_iou_substitute"] = args.gt_iou_substitute;
  resolved["nms_iou"] = eval.nms_iou;
  resolved["score_threshold"] = eval.score_threshold;
  resolved["pce_top_k"] = eval.pce_top_k;
  print_digest(resolved);

  const auto scenes = load_scenes_jsonl(args.scenes_path);
  const auto detections = load_detections_jsonl(args.detections_path);
  std::map<int, const SceneDetections*> dets_by_id;
  for (const SceneDetections& d : detections) dets_by_id[d.scene_id] = &d;

  std::vector<std::vector<GroundTruthObject>> gts_per_scene;
  std::vector<std::vector<Detection>> raw_per_scene;
  for (const Scene& scene : scenes) {
    gts_per_scene.push_back(scene.objects);
    const auto it = dets_by_id.find(scene.scene_id);
    raw_per_scene.push_back(it == dets_by_id.end() ? std::vector<Detection>{}
                                                   : it->second->detections);
  }

  struct EvalVariant {
    std::string name;
    std::vector<std::vector<Detection>> post_nms;
  };
  std::vector<EvalVariant> variants;
  auto suppress_all = [&](const std::vector<std::vector<Detection>>& raw) {
    std::vector<std::vector<Detection>> out;
    out.reserve(raw.size());
    for (const auto& scene_dets : raw) {
      out.push_back(nms(scene_dets, eval.nms_iou, eval.score_threshold));
    }
    return out;
  };
  variants.push_back({"learned", suppress_all(raw_per_scene)});
  if (args.gt_iou_substitute) {
    std::vector<std::vector<Detection>> substituted;
    substituted.reserve(raw_per_scene.size());
    for (std::size_t s = 0; s < raw_per_scene.size(); ++s) {
      substituted.push_back(
          gt_score_substitution(raw_per_scene[s], gts_per_scene[s]));
    }
    variants.push_back({"gt_iou", suppress_all(substituted)});
  }

  std::string csv = "variant,metric,value\n";
  for (const EvalVariant& variant : variants) {
    std::cout << "== " << variant.name << " ==\n";
    for (const double thr : args.iou_thresholds) {
      const ApResult ap =
          average_precision_pooled(variant.post_nms, gts_per_scene, thr);
      const std::string prefix = "ap@" + fmt(thr);
      std::cout << "  " << prefix << ":";
      for (const ClassAp& c : ap.per_class) {
        std::cout << " class" << c.class_id << "=" << fmt(c.ap);
        const std::vector<std::string> row{
            variant.name, prefix + "_class_" + std::to_string(c.class_id),
            fmt(c.ap)};
        csv += csv_row(row);
      }
      std::cout << " mean=" << fmt(ap.mean_ap) << "\n";
      const std::vector<std::string> row{variant.name, prefix + "_mean",
                                         fmt(ap.mean_ap)};
      csv += csv_row(row);
    }
    // Score/IoU consistency: AIC over all kept detections, PCE over the
    // per-class top-k.
    std::vector<ConsistencyRecord> records;
    double pce_acc = 0.0;
    int pce_n = 0;
    for (std::size_t s = 0; s < variant.post_nms.size(); ++s) {
      for (const Detection& det : variant.post_nms[s]) {
        double best = 0.0;
        for (const GroundTruthObject& gt : gts_per_scene[s]) {
          if (gt.class_id == det.class_id) {
            best = std::max(best, iou3d(det.box, gt.box));
          }
        }
        records.push_back({det.score, best});
      }
      const PceResult scene_pce =
          pce(variant.post_nms[s], gts_per_scene[s], eval.pce_top_k);
      for (const double err : scene_pce.abs_errors) {
        pce_acc += err;
        ++pce_n;
      }
    }
    const double aic_value = records.empty() ? 0.0 : aic(records);
    const double mean_pce = pce_n ? pce_acc / pce_n : 0.0;
    std::cout << "  aic=" << fmt(aic_value) << " mean_pce=" << fmt(mean_pce)
              << "\n";
    const std::vector<std::string> aic_row{variant.name, "aic", fmt(aic_value)};
    csv += csv_row(aic_row);
    const std::vector<std::string> pce_row{variant.name, "mean_pce",
                                           fmt(mean_pce)};
    csv += csv_row(pce_row);
  }

  const fs::path out = args.out.empty() ? output_root() / "eval_metrics.csv"
                                        : fs::path(args.out);
  write_text_file(out, csv);
  std::cout << "wrote " << out.string() << "\n";
}

// ---------------------------------------------------------------------------
// ablate

struct AblateArgs {
  std::string suite_path;
  std::string matrix_path;
  std::string config_path;
  std::string out;
  int count = 50;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
};

void run_ablate(const AblateArgs& args) {
  SceneSpec spec = args.suite_path.empty() ? resolve_spec(SceneSpec{})
                                           : load_scene_spec(args.suite_path);
  if (args.seed) spec.seed = *args.seed;
  json base_doc = json::object();
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) throw UsageError("cannot open " + args.config_path);
    try {
      in >> base_doc;
    } catch (const json::parse_error& e) {
      throw UsageError(args.config_path + ": malformed JSON: " + e.what());
    }
  }
  const std::vector<MatrixCell> matrix = load_matrix(args.matrix_path, base_doc);

  json resolved;
  resolved["command"] = "ablate";
  resolved["suite"] = scene_spec_json(spec);
  resolved["count"] = args.count;
  json cells_doc = json::array();
  for (const MatrixCell& cell : matrix) {
    if (cell.valid) {
      json c = resolved_config_json(cell.config);
      c["name"] = cell.name;
      cells_doc.push_back(c);
    } else {
      cells_doc.push_back({{"name", cell.name}, {"invalid", true}});
    }
  }
  resolved["cells"] = cells_doc;
  const std::string digest = print_digest(resolved);

  const std::vector<Scene> suite = generate_suite(spec, args.count, spec.seed);
  const auto class_sizes = resolve_spec(spec).class_sizes;

  // Cells share one anchor layout, taken from the first valid cell.
  std::vector<ConfigCell> runnable;
  std::optional<AnchorGridSpec> grid;
  for (const MatrixCell& cell : matrix) {
    if (cell.valid) {
      if (!grid) grid = cell.config.grid;
      runnable.push_back({cell.name, cell.config.experiment});
    }
  }
  ExperimentReport report;
  if (!runnable.empty()) {
    report = run_ablation(runnable, suite, *grid, class_sizes,
                          spec.room_extent, args.jobs);
  }

  const CellResult* baseline = nullptr;
  for (const MatrixCell& cell : matrix) {
    const CellResult* result = cell.valid ? report.find(cell.name) : nullptr;
    if (result && !result->failed) {
      baseline = result;
      break;
    }
  }

  std::string table =
      "config,status,ap25_mean,ap25_std,ap50_mean,ap50_std,aic_mean,aic_std,"
      "pce_mean,pce_std,delta_ap25_mean,delta_ap50_mean,ap25_wins,"
      "ap25_sign_p,aic_wins,pce_wins\n";
  int succeeded = 0;
  std::vector<SvgBarGroup> bar_groups;
  std::vector<const CellResult*> ok_cells;
  std::vector<std::string> ok_names;
  for (const MatrixCell& cell : matrix) {
    const CellResult* result = cell.valid ? report.find(cell.name) : nullptr;
    if (!cell.valid || !result || result->failed) {
      const std::string reason = !cell.valid ? cell.error
                                 : result    ? result->error
                                             : "not run";
      const std::vector<std::string> row{cell.name, "FAILED", "", "", "", "",
                                         "",        "",       "", "", "", "",
                                         "",        "",       "", ""};
      table += csv_row(row);
      std::cerr << "cell '" << cell.name << "' failed: " << reason << "\n";
      continue;
    }
    ++succeeded;
    ok_cells.push_back(result);
    ok_names.push_back(cell.name);
    const auto ap25 = result->metric(&SceneMetrics::ap25);
    const auto ap50 = result->metric(&SceneMetrics::ap50);
    const auto aic_v = result->metric(&SceneMetrics::final_aic);
    const auto pce_v = result->metric(&SceneMetrics::mean_pce);
    std::string d25, d50, wins_s, sign_p, aic_wins_s, pce_wins_s;
    if (baseline && baseline != result) {
      const auto base25 = baseline->metric(&SceneMetrics::ap25);
      const auto base50 = baseline->metric(&SceneMetrics::ap50);
      const auto base_aic = baseline->metric(&SceneMetrics::final_aic);
      const auto base_pce = baseline->metric(&SceneMetrics::mean_pce);
      if (base25.size() == ap25.size()) {
        double acc25 = 0, acc50 = 0;
        int wins = 0, aic_wins = 0, pce_wins = 0;
        for (std::size_t i = 0; i < ap25.size(); ++i) {
          acc25 += ap25[i] - base25[i];
          acc50 += ap50[i] - base50[i];
          wins += ap25[i] > base25[i] ? 1 : 0;
          aic_wins += aic_v[i] < base_aic[i] ? 1 : 0;
          pce_wins += pce_v[i] < base_pce[i] ? 1 : 0;
        }
        d25 = fmt(acc25 / ap25.size());
        d50 = fmt(acc50 / ap50.size());
        wins_s = std::to_string(wins);
        sign_p = fmt(paired_sign_test_p(ap25, base25));
        aic_wins_s = std::to_string(aic_wins);
        pce_wins_s = std::to_string(pce_wins);
      }
    } else if (baseline == result) {
      d25 = d50 = fmt(0.0);
    }
    const std::vector<std::string> row{cell.name,
                                       "ok",
                                       fmt(mean(ap25)),
                                       fmt(sample_stddev(ap25)),
                                       fmt(mean(ap50)),
                                       fmt(sample_stddev(ap50)),
                                       fmt(mean(aic_v)),
                                       fmt(sample_stddev(aic_v)),
                                       fmt(mean(pce_v)),
                                       fmt(sample_stddev(pce_v)),
                                       d25,
                                       d50,
                                       wins_s,
                                       sign_p,
                                       aic_wins_s,
                                       pce_wins_s};
    table += csv_row(row);
    bar_groups.push_back({cell.name,
                          {mean(ap25), mean(ap50)},
                          {sample_stddev(ap25), sample_stddev(ap50)}});
  }

  const fs::path out_dir =
      args.out.empty() ? output_root() / "ablation" : fs::path(args.out);
  write_text_file(out_dir / "table.csv", table);

  // Per-epoch mean AIC, one column per successful cell.
  std::string curves = "epoch";
  for (const std::string& name : ok_names) curves += "," + name;
  curves += "\n";
  std::size_t curve_len = 0;
  for (const CellResult* c : ok_cells) {
    curve_len = std::max(curve_len, c->aic_curve.size());
  }
  for (std::size_t e = 0; e < curve_len; ++e) {
    curves += std::to_string(e);
    for (const CellResult* c : ok_cells) {
      curves += ",";
      if (e < c->aic_curve.size()) curves += fmt(c->aic_curve[e]);
    }
    curves += "\n";
  }
  write_text_file(out_dir / "aic_curves.csv", curves);

  // Mean AP at the evaluated epochs.
  std::string ap_curves = "epoch";
  for (const std::string& name : ok_names) {
    ap_curves += "," + name + "_ap25," + name + "_ap50";
  }
  ap_curves += "\n";
  std::size_t ap_rows = 0;
  for (const CellResult* c : ok_cells) {
    ap_rows = std::max(ap_rows, c->ap_epochs.size());
  }
  for (std::size_t r = 0; r < ap_rows; ++r) {
    std::string epoch_label;
    std::string line;
    for (const CellResult* c : ok_cells) {
      if (r < c->ap_epochs.size()) {
        if (epoch_label.empty()) epoch_label = std::to_string(c->ap_epochs[r]);
        line += "," + fmt(c->ap25_curve[r]) + "," + fmt(c->ap50_curve[r]);
      } else {
        line += ",,";
      }
    }
    ap_curves += epoch_label + line + "\n";
  }
  write_text_file(out_dir / "ap_curves.csv", ap_curves);

  const std::string metric_labels[] = {"AP25", "AP50"};
  write_text_file(out_dir / "plots" / "ablation.svg",
                  svg_bar_chart("ablation", metric_labels, bar_groups));

  RunManifest manifest = make_manifest(digest, spec.seed, resolved);
  manifest.outputs = {"table.csv", "aic_curves.csv", "ap_curves.csv",
                      "plots/ablation.svg"};
  write_manifest(out_dir / "manifest.json", manifest);
  std::cout << "wrote ablation report to " << out_dir.string() << "\n";

  if (succeeded == 0) {
    throw std::runtime_error("ablate: every cell failed");
  }
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  std::string suite_path;
  std::string config_path;
  std::string parameter;
  std::vector<double> values;
  std::string out;
  int count = 50;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
};

void run_sweep(const SweepArgs& args) {
  if (args.values.empty()) throw UsageError("sweep: --values required");
  SceneSpec spec = args.suite_path.empty() ? resolve_spec(SceneSpec{})
                                           : load_scene_spec(args.suite_path);
  if (args.seed) spec.seed = *args.seed;
  const RunConfig base = load_run_config(args.config_path);

  json resolved;
  resolved["command"] = "sweep";
  resolved["suite"] = scene_spec_json(spec);
  resolved["count"] = args.count;
  resolved["parameter"] = args.parameter;
  resolved["values"] = args.values;
  resolved["base"] = resolved_config_json(base);
  const std::string digest = print_digest(resolved);

  const std::vector<Scene> suite = generate_suite(spec, args.count, spec.seed);
  const auto class_sizes = resolve_spec(spec).class_sizes;
  SweepResult sweep;
  try {
    sweep = hyperparameter_sweep(args.parameter, args.values, base.experiment,
                                 suite, base.grid, class_sizes,
                                 spec.room_extent, args.jobs);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  std::string csv = "value,ap25_mean,ap25_std,ap50_mean,ap50_std,status\n";
  SvgSeries ap25_series{"AP25", {}, {}, {}};
  SvgSeries ap50_series{"AP50", {}, {}, {}};
  for (const SweepPoint& p : sweep.points) {
    const std::vector<std::string> row{fmt(p.value),
                                       p.failed ? "" : fmt(p.ap25_mean),
                                       p.failed ? "" : fmt(p.ap25_std),
                                       p.failed ? "" : fmt(p.ap50_mean),
                                       p.failed ? "" : fmt(p.ap50_std),
                                       p.failed ? "FAILED" : "ok"};
    csv += csv_row(row);
    if (!p.failed) {
      ap25_series.x.push_back(p.value);
      ap25_series.y.push_back(p.ap25_mean);
      ap25_series.y_err.push_back(p.ap25_std);
      ap50_series.x.push_back(p.value);
      ap50_series.y.push_back(p.ap50_mean);
      ap50_series.y_err.push_back(p.ap50_std);
    }
  }

  if (ap25_series.y.size() >= 2) {
    bool increasing = true, decreasing = true;
    for (std::size_t i = 1; i < ap25_series.y.size(); ++i) {
      increasing = increasing && ap25_series.y[i] >= ap25_series.y[i - 1];
      decreasing = decreasing && ap25_series.y[i] <= ap25_series.y[i - 1];
    }
    std::cout << "trend ap25 over " << args.parameter << ": "
              << (increasing   ? "non-decreasing"
                  : decreasing ? "non-increasing"
                               : "mixed")
              << "\n";
  }

  const fs::path out_dir =
      args.out.empty() ? output_root() / "sweep" : fs::path(args.out);
  const std::string stem = "sweep_" + args.parameter;
  write_text_file(out_dir / (stem + ".csv"), csv);
  const SvgSeries series[] = {ap25_series, ap50_series};
  write_text_file(out_dir / "plots" / (stem + ".svg"),
                  svg_line_chart(stem, args.parameter, "AP", series));

  RunManifest manifest = make_manifest(digest, spec.seed, resolved);
  manifest.outputs = {stem + ".csv", "plots/" + stem + ".svg"};
  write_manifest(out_dir / "manifest.json", manifest);
  std::cout << "wrote sweep report to " << out_dir.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial-prioritized, rank-aware 3D detection toolkit"};
  app.require_subcommand(1);

  GenScenesArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen-scenes", "generate a scene suite");
  gen->add_option("--spec", gen_args.spec_path, "suite spec JSON");
  gen->add_option("--count", gen_args.count, "number of scenes");
  gen->add_option("--seed", gen_args.seed, "suite seed (overrides spec)");
  gen->add_option("--out", gen_args.out, "output scenes JSONL");
  gen->callback([&] { run_gen_scenes(gen_args); });

  AssignArgs assign_args;
  CLI::App* assign = app.add_subcommand("assign", "assign labels to anchors");
  assign->add_option("--scenes", assign_args.scenes_path, "scenes JSONL")
      ->required();
  assign
      ->add_option("--predictions", assign_args.predictions_path,
                   "predictions JSONL")
      ->required();
  assign->add_option("--strategy", assign_args.strategy,
                     "fixed-radius-baseline|spota|spota-with-cls-cost|"
                     "spota-without-rvd");
  assign->add_option("--k", assign_args.params.k, "positives per gt");
  assign->add_option("--mu", assign_args.params.mu, "center prior scale");
  assign->add_option("--lambda", assign_args.params.lambda, "cls cost weight");
  assign->add_option("--radius", assign_args.params.radius,
                     "fixed-radius threshold (m)");
  assign->add_option("--out", assign_args.out, "output assignments JSONL");
  assign->callback([&] { run_assign(assign_args); });

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "train the toy detector");
  train->add_option("--scenes", train_args.scenes_path, "scenes JSONL")
      ->required();
  train->add_option("--config", train_args.config_path, "run config JSON")
      ->required();
  train->add_option("--out", train_args.out, "output directory");
  train->add_option("--jobs", train_args.jobs, "worker threads");
  train->add_option("--seed", train_args.seed, "seed override");
  train->callback([&] { run_train(train_args); });

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "evaluate detections");
  eval->add_option("--detections", eval_args.detections_path,
                   "detections JSONL")
      ->required();
  eval->add_option("--scenes", eval_args.scenes_path, "scenes JSONL")
      ->required();
  eval->add_flag("--gt-iou-substitute", eval_args.gt_iou_substitute,
                 "also report scores replaced by true IoU before NMS");
  eval->add_option("--iou-thresholds", eval_args.iou_thresholds,
                   "AP IoU thresholds")
      ->delimiter(',');
  eval->add_option("--out", eval_args.out, "output CSV");
  eval->callback([&] { run_eval(eval_args); });

  AblateArgs ablate_args;
  CLI::App* ablate = app.add_subcommand("ablate", "run an ablation matrix");
  ablate->add_option("--suite", ablate_args.suite_path, "suite spec JSON");
  ablate->add_option("--matrix", ablate_args.matrix_path, "matrix JSON")
      ->required();
  ablate->add_option("--config", ablate_args.config_path,
                     "base config JSON (cells override it)");
  ablate->add_option("--count", ablate_args.count, "scenes in the suite");
  ablate->add_option("--jobs", ablate_args.jobs, "worker threads");
  ablate->add_option("--seed", ablate_args.seed, "suite seed override");
  ablate->add_option("--out", ablate_args.out, "output directory");
  ablate->callback([&] { run_ablate(ablate_args); });

  SweepArgs sweep_args;
  CLI::App* sweep = app.add_subcommand("sweep", "sweep one hyperparameter");
  sweep->add_option("--suite", sweep_args.suite_path, "suite spec JSON");
  sweep->add_option("--config", sweep_args.config_path, "base config JSON")
      ->required();
  sweep->add_option("--param", sweep_args.parameter, "k|mu|beta|tau")
      ->required();
  sweep->add_option("--values", sweep_args.values, "comma-separated values")
      ->required()
      ->delimiter(',');
  sweep->add_option("--count", sweep_args.count, "scenes in the suite");
  sweep->add_option("--jobs", sweep_args.jobs, "worker threads");
  sweep->add_option("--seed", sweep_args.seed, "suite seed override");
  sweep->add_option("--out", sweep_args.out, "output directory");
  sweep->callback([&] { run_sweep(sweep_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
