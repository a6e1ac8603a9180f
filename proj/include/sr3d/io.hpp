#ifndef SR3D_IO_HPP_
#define SR3D_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "sr3d/ablation.hpp"
#include "sr3d/metrics.hpp"
#include "sr3d/scene.hpp"
#include "sr3d/trainer.hpp"

namespace sr3d {

/// Bad input from the user: malformed files, unknown names, missing config
/// fields. Mapped to exit code 2 by the CLI; other exceptions map to 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// All floating-point output goes through this (9 significant digits) so
// files are byte-stable and survive a write/load/write cycle unchanged.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Line-delimited JSON data files. Writers emit fields in a fixed order;
// loaders reject missing required fields (with the offending line number)
// and ignore unknown extra fields.

std::string scene_to_json_line(const Scene& scene);
void write_scenes_jsonl(const std::filesystem::path& path,
                        std::span<const Scene> scenes);
std::vector<Scene> load_scenes_jsonl(const std::filesystem::path& path);

/// Per-scene detector outputs consumed by the assign command.
struct ScenePredictions {
  int scene_id = 0;
  AnchorSet anchors;
  std::vector<Box3> boxes;  // one per anchor
  Grid2 scores;             // [num_anchors x class_count]
};

void write_predictions_jsonl(const std::filesystem::path& path,
                             std::span<const ScenePredictions> predictions);
std::vector<ScenePredictions> load_predictions_jsonl(
    const std::filesystem::path& path);

struct SceneAssignment {
  int scene_id = 0;
  AssignmentResult assignment;
};

void write_assignments_jsonl(const std::filesystem::path& path,
                             std::span<const SceneAssignment> assignments);
std::vector<SceneAssignment> load_assignments_jsonl(
    const std::filesystem::path& path);

struct SceneDetections {
  int scene_id = 0;
  std::vector<Detection> detections;
};

void write_detections_jsonl(const std::filesystem::path& path,
                            std::span<const SceneDetections> detections);
std::vector<SceneDetections> load_detections_jsonl(
    const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Config documents. Every hyperparameter has a documented default except
// assignment.strategy and loss.cls, which select the experiment and must be
// present. The resolved config (all fields explicit) is what gets digested
// and echoed into manifests.

struct RunConfig {
  SceneSpec suite;  // used by commands that generate their own scenes
  AnchorGridSpec grid;
  ExperimentConfig experiment;
};

SceneSpec parse_scene_spec(const nlohmann::json& doc);
SceneSpec load_scene_spec(const std::filesystem::path& path);
nlohmann::json scene_spec_json(const SceneSpec& spec);

RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::json resolved_config_json(const RunConfig& config);

/// One ablation-matrix row: overrides applied on top of a base document. A
/// cell that fails to parse is carried as failed instead of aborting the
/// run.
struct MatrixCell {
  std::string name;
  bool valid = false;
  std::string error;
  RunConfig config;
};

std::vector<MatrixCell> load_matrix(const std::filesystem::path& path,
                                    const nlohmann::json& base_doc);

// ---------------------------------------------------------------------------
// Manifests and reports.

std::uint64_t fnv1a64(std::string_view bytes);
std::string config_digest(const nlohmann::json& resolved_config);

struct RunManifest {
  std::string digest;
  std::uint64_t suite_seed = 0;
  std::string tool_version;
  std::string created_utc;  // the single non-reproducible field
  std::vector<std::string> outputs;
  nlohmann::json resolved_config;
};

void write_manifest(const std::filesystem::path& path,
                    const RunManifest& manifest);

std::string utc_timestamp();

/// Joins one CSV row; numeric cells should already be formatted.
std::string csv_row(std::span<const std::string> cells);
void write_text_file(const std::filesystem::path& path,
                     const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace sr3d

#endif  // SR3D_IO_HPP_
