#include "sr3d/io.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace sr3d {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

namespace {

std::string vec3_json(const Vec3& v) {
  return "[" + format_double(v.x) + "," + format_double(v.y) + "," +
         format_double(v.z) + "]";
}

[[noreturn]] void line_error(const std::filesystem::path& path, int line,
                             const std::string& what) {
  throw UsageError(path.string() + ":" + std::to_string(line) + ": " + what);
}

json parse_line(const std::filesystem::path& path, int line,
                const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    line_error(path, line, std::string("malformed JSON: ") + e.what());
  }
}

const json& require_field(const json& obj, const char* key,
                          const std::filesystem::path& path, int line) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    line_error(path, line, std::string("missing field '") + key + "'");
  }
  return *it;
}

Vec3 parse_vec3(const json& arr, const std::filesystem::path& path, int line) {
  if (!arr.is_array() || arr.size() != 3) {
    line_error(path, line, "expected a 3-element array");
  }
  return {arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>()};
}

// Reads a JSONL file, applying fn(line_number, parsed_object).
template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn fn) {
  std::ifstream in(path);
  if (!in) {
    throw UsageError("cannot open " + path.string());
  }
  std::string text;
  int line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    fn(line, parse_line(path, line, text));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Scenes

std::string scene_to_json_line(const Scene& scene) {
  std::string out = "{\"scene_id\":" + std::to_string(scene.scene_id) +
                    ",\"seed\":" + std::to_string(scene.seed) + ",\"objects\":[";
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const GroundTruthObject& gt = scene.objects[i];
    if (i) out += ",";
    out += "{\"id\":" + std::to_string(gt.id) +
           ",\"class_id\":" + std::to_string(gt.class_id) +
           ",\"center\":" + vec3_json(gt.box.center()) +
           ",\"size\":" + vec3_json(gt.box.size()) + "}";
  }
  out += "],\"clutter_relaxed\":";
  out += scene.clutter_relaxed ? "true" : "false";
  out += "}";
  return out;
}

void write_scenes_jsonl(const std::filesystem::path& path,
                        std::span<const Scene> scenes) {
  std::string out;
  for (const Scene& scene : scenes) {
    out += scene_to_json_line(scene);
    out += "\n";
  }
  write_text_file(path, out);
}

std::vector<Scene> load_scenes_jsonl(const std::filesystem::path& path) {
  std::vector<Scene> scenes;
  for_each_line(path, [&](int line, const json& doc) {
    Scene scene;
    scene.scene_id = require_field(doc, "scene_id", path, line).get<int>();
    scene.seed = require_field(doc, "seed", path, line).get<std::uint64_t>();
    scene.clutter_relaxed = doc.value("clutter_relaxed", false);
    const json& objects = require_field(doc, "objects", path, line);
    if (!objects.is_array()) line_error(path, line, "'objects' must be an array");
    for (std::size_t i = 0; i < objects.size(); ++i) {
      const json& obj = objects[i];
      const int id = require_field(obj, "id", path, line).get<int>();
      if (id != static_cast<int>(i)) {
        line_error(path, line, "object ids must equal their list position");
      }
      const int class_id =
          require_field(obj, "class_id", path, line).get<int>();
      if (class_id < 0) line_error(path, line, "class_id must be >= 0");
      try {
        scene.objects.push_back(
            {id,
             Box3(parse_vec3(require_field(obj, "center", path, line), path,
                             line),
                  parse_vec3(require_field(obj, "size", path, line), path,
                             line)),
             class_id});
      } catch (const std::invalid_argument& e) {
        line_error(path, line, e.what());
      }
    }
    scenes.push_back(std::move(scene));
  });
  return scenes;
}

// ---------------------------------------------------------------------------
// Predictions

void write_predictions_jsonl(const std::filesystem::path& path,
                             std::span<const ScenePredictions> predictions) {
  std::string out;
  for (const ScenePredictions& scene : predictions) {
    out += "{\"scene_id\":" + std::to_string(scene.scene_id) +
           ",\"class_count\":" + std::to_string(scene.scores.cols()) +
           ",\"anchors\":[";
    for (std::size_t a = 0; a < scene.anchors.size(); ++a) {
      if (a) out += ",";
      out += "{\"id\":" + std::to_string(scene.anchors[a].id) +
             ",\"level\":" + std::to_string(scene.anchors[a].level) +
             ",\"center\":" + vec3_json(scene.anchors[a].center) +
             ",\"box\":{\"center\":" + vec3_json(scene.boxes[a].center()) +
             ",\"size\":" + vec3_json(scene.boxes[a].size()) +
             "},\"scores\":[";
      const auto row = scene.scores.row(a);
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) out += ",";
        out += format_double(row[c]);
      }
      out += "]}";
    }
    out += "]}\n";
  }
  write_text_file(path, out);
}

std::vector<ScenePredictions> load_predictions_jsonl(
    const std::filesystem::path& path) {
  std::vector<ScenePredictions> result;
  for_each_line(path, [&](int line, const json& doc) {
    ScenePredictions scene;
    scene.scene_id = require_field(doc, "scene_id", path, line).get<int>();
    const int class_count =
        require_field(doc, "class_count", path, line).get<int>();
    if (class_count < 1) line_error(path, line, "class_count must be >= 1");
    const json& anchors = require_field(doc, "anchors", path, line);
    if (!anchors.is_array()) line_error(path, line, "'anchors' must be an array");
    scene.scores = Grid2(anchors.size(), class_count);
    for (std::size_t a = 0; a < anchors.size(); ++a) {
      const json& doc_anchor = anchors[a];
      Anchor anchor;
      anchor.id = require_field(doc_anchor, "id", path, line).get<int>();
      if (anchor.id != static_cast<int>(a)) {
        line_error(path, line, "anchor ids must equal their list position");
      }
      anchor.level = doc_anchor.value("level", 0);
      anchor.center = parse_vec3(require_field(doc_anchor, "center", path, line),
                                 path, line);
      const json& box = require_field(doc_anchor, "box", path, line);
      try {
        scene.boxes.emplace_back(
            parse_vec3(require_field(box, "center", path, line), path, line),
            parse_vec3(require_field(box, "size", path, line), path, line));
      } catch (const std::invalid_argument& e) {
        line_error(path, line, e.what());
      }
      const json& scores = require_field(doc_anchor, "scores", path, line);
      if (!scores.is_array() ||
          scores.size() != static_cast<std::size_t>(class_count)) {
        line_error(path, line, "'scores' must list class_count values");
      }
      for (int c = 0; c < class_count; ++c) {
        const double s = scores[c].get<double>();
        if (!(s >= 0.0 && s <= 1.0)) {
          line_error(path, line, "scores must lie in [0,1]");
        }
        scene.scores.at(a, c) = s;
      }
      scene.anchors.push_back(anchor);
    }
    result.push_back(std::move(scene));
  });
  return result;
}

// ---------------------------------------------------------------------------
// Assignments

void write_assignments_jsonl(const std::filesystem::path& path,
                             std::span<const SceneAssignment> assignments) {
  std::string out;
  for (const SceneAssignment& scene : assignments) {
    out += "{\"scene_id\":" + std::to_string(scene.scene_id) +
           ",\"positives\":[";
    for (std::size_t i = 0; i < scene.assignment.positives.size(); ++i) {
      const PositivePair& p = scene.assignment.positives[i];
      if (i) out += ",";
      out += "{\"anchor_id\":" + std::to_string(p.anchor_id) +
             ",\"gt_id\":" + std::to_string(p.gt_id) +
             ",\"cost\":" + format_double(p.cost) + "}";
    }
    out += "],\"negatives\":[";
    for (std::size_t i = 0; i < scene.assignment.negatives.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(scene.assignment.negatives[i]);
    }
    out += "]}\n";
  }
  write_text_file(path, out);
}

std::vector<SceneAssignment> load_assignments_jsonl(
    const std::filesystem::path& path) {
  std::vector<SceneAssignment> result;
  for_each_line(path, [&](int line, const json& doc) {
    SceneAssignment scene;
    scene.scene_id = require_field(doc, "scene_id", path, line).get<int>();
    for (const json& p : require_field(doc, "positives", path, line)) {
      scene.assignment.positives.push_back(
          {require_field(p, "anchor_id", path, line).get<int>(),
           require_field(p, "gt_id", path, line).get<int>(),
           p.value("cost", 0.0)});
    }
    for (const json& n : require_field(doc, "negatives", path, line)) {
      scene.assignment.negatives.push_back(n.get<int>());
    }
    result.push_back(std::move(scene));
  });
  return result;
}

// ---------------------------------------------------------------------------
// Detections

void write_detections_jsonl(const std::filesystem::path& path,
                            std::span<const SceneDetections> detections) {
  std::string out;
  for (const SceneDetections& scene : detections) {
    out += "{\"scene_id\":" + std::to_string(scene.scene_id) +
           ",\"detections\":[";
    for (std::size_t i = 0; i < scene.detections.size(); ++i) {
      const Detection& det = scene.detections[i];
      if (i) out += ",";
      out += "{\"class_id\":" + std::to_string(det.class_id) +
             ",\"score\":" + format_double(det.score) +
             ",\"center\":" + vec3_json(det.box.center()) +
             ",\"size\":" + vec3_json(det.box.size()) + "}";
    }
    out += "]}\n";
  }
  write_text_file(path, out);
}

std::vector<SceneDetections> load_detections_jsonl(
    const std::filesystem::path& path) {
  std::vector<SceneDetections> result;
  for_each_line(path, [&](int line, const json& doc) {
    SceneDetections scene;
    scene.scene_id = require_field(doc, "scene_id", path, line).get<int>();
    for (const json& d : require_field(doc, "detections", path, line)) {
      const double score = require_field(d, "score", path, line).get<double>();
      if (!(score > 0.0 && score <= 1.0)) {
        line_error(path, line, "detection score must lie in (0,1]");
      }
      const int class_id = require_field(d, "class_id", path, line).get<int>();
      if (class_id < 0) line_error(path, line, "class_id must be >= 0");
      try {
        scene.detections.push_back(
            {Box3(parse_vec3(require_field(d, "center", path, line), path,
                             line),
                  parse_vec3(require_field(d, "size", path, line), path, line)),
             class_id, score});
      } catch (const std::invalid_argument& e) {
        line_error(path, line, e.what());
      }
    }
    result.push_back(std::move(scene));
  });
  return result;
}

// ---------------------------------------------------------------------------
// Config documents

namespace {

[[noreturn]] void config_error(const std::string& what) {
  throw UsageError("config: " + what);
}

Vec3 config_vec3(const json& arr, const char* field) {
  if (!arr.is_array() || arr.size() != 3) {
    config_error(std::string("field '") + field +
                 "' must be a 3-element array");
  }
  return {arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>()};
}

json section(const json& doc, const char* name) {
  const auto it = doc.find(name);
  if (it == doc.end()) return json::object();
  if (!it->is_object()) {
    config_error(std::string("section '") + name + "' must be an object");
  }
  return *it;
}

}  // namespace

SceneSpec parse_scene_spec(const json& doc) {
  SceneSpec spec;
  if (doc.contains("room_extent")) {
    spec.room_extent = config_vec3(doc["room_extent"], "room_extent");
  }
  if (doc.contains("num_objects")) {
    const json& range = doc["num_objects"];
    if (!range.is_array() || range.size() != 2) {
      config_error("field 'num_objects' must be [min, max]");
    }
    spec.min_objects = range[0].get<int>();
    spec.max_objects = range[1].get<int>();
  }
  spec.class_count = doc.value("class_count", spec.class_count);
  spec.max_pairwise_iou = doc.value("clutter_max_iou", spec.max_pairwise_iou);
  spec.seed = doc.value("seed", spec.seed);
  if (doc.contains("size_means") != doc.contains("size_stddevs")) {
    config_error("'size_means' and 'size_stddevs' must be given together");
  }
  if (doc.contains("size_means")) {
    const json& means = doc["size_means"];
    const json& stds = doc["size_stddevs"];
    if (!means.is_array() || !stds.is_array() ||
        means.size() != stds.size()) {
      config_error("'size_means' and 'size_stddevs' must be equal-length arrays");
    }
    for (std::size_t c = 0; c < means.size(); ++c) {
      spec.class_sizes.push_back({config_vec3(means[c], "size_means"),
                                  config_vec3(stds[c], "size_stddevs")});
    }
  }
  try {
    return resolve_spec(spec);
  } catch (const std::invalid_argument& e) {
    config_error(e.what());
  }
}

SceneSpec load_scene_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw UsageError(path.string() + ": malformed JSON: " + e.what());
  }
  return parse_scene_spec(doc);
}

RunConfig parse_run_config(const json& doc) {
  RunConfig config;
  config.suite = parse_scene_spec(section(doc, "suite"));

  const json anchors = section(doc, "anchors");
  if (anchors.contains("strides")) {
    config.grid.strides.clear();
    for (const json& s : anchors["strides"]) {
      config.grid.strides.push_back(s.get<double>());
    }
  }
  if (anchors.contains("origin")) {
    config.grid.origin = config_vec3(anchors["origin"], "origin");
  }
  try {
    config.grid.validate();
  } catch (const std::invalid_argument& e) {
    config_error(e.what());
  }

  const json assignment = section(doc, "assignment");
  if (!assignment.contains("strategy")) {
    config_error("missing field assignment.strategy");
  }
  ExperimentConfig& exp = config.experiment;
  try {
    exp.assignment = parse_strategy(assignment["strategy"].get<std::string>());
  } catch (const std::invalid_argument& e) {
    config_error(e.what());
  }
  exp.assign.k = assignment.value("k", exp.assign.k);
  exp.assign.mu = assignment.value("mu", exp.assign.mu);
  exp.assign.lambda = assignment.value("lambda", exp.assign.lambda);
  exp.assign.radius = assignment.value("radius", exp.assign.radius);
  exp.assign.refresh_interval =
      assignment.value("refresh_interval", exp.assign.refresh_interval);
  if (exp.assign.k < 1) config_error("assignment.k must be >= 1");
  if (!(exp.assign.mu > 0.0)) config_error("assignment.mu must be > 0");
  if (!(exp.assign.radius > 0.0)) config_error("assignment.radius must be > 0");

  const json loss = section(doc, "loss");
  if (!loss.contains("cls")) {
    config_error("missing field loss.cls");
  }
  try {
    exp.cls_loss = parse_cls_loss(loss["cls"].get<std::string>());
  } catch (const std::invalid_argument& e) {
    config_error(e.what());
  }
  exp.ras.beta = loss.value("beta", exp.ras.beta);
  exp.ras.tau = loss.value("tau", exp.ras.tau);
  exp.ras.alpha = loss.value("alpha", exp.ras.alpha);
  exp.ras.gamma = loss.value("gamma", exp.ras.gamma);
  exp.ras.rescale_r_cls = loss.value("rescale_r_cls", exp.ras.rescale_r_cls);
  exp.ras.per_gt_r_cls = loss.value("per_gt_r_cls", exp.ras.per_gt_r_cls);
  exp.ras.differentiate_r_cls =
      loss.value("differentiate_r_cls", exp.ras.differentiate_r_cls);
  if (!(exp.ras.tau > 0.0)) config_error("loss.tau must be > 0");
  if (!(exp.ras.beta >= 0.0)) config_error("loss.beta must be >= 0");

  const json optimizer = section(doc, "optimizer");
  exp.optimizer.step_size =
      optimizer.value("step_size", exp.optimizer.step_size);
  exp.optimizer.iterations =
      optimizer.value("iterations", exp.optimizer.iterations);
  if (!(exp.optimizer.step_size > 0.0)) {
    config_error("optimizer.step_size must be > 0");
  }
  if (exp.optimizer.iterations < 0) {
    config_error("optimizer.iterations must be >= 0");
  }

  const json eval = section(doc, "eval");
  exp.eval.nms_iou = eval.value("nms_iou", exp.eval.nms_iou);
  exp.eval.score_threshold =
      eval.value("score_threshold", exp.eval.score_threshold);
  exp.eval.pce_top_k = eval.value("pce_top_k", exp.eval.pce_top_k);
  exp.eval.pre_nms_per_class =
      eval.value("pre_nms_per_class", exp.eval.pre_nms_per_class);
  exp.eval.ap_interval = eval.value("ap_interval", exp.eval.ap_interval);
  if (eval.contains("iou_thresholds")) {
    exp.eval.iou_thresholds.clear();
    for (const json& t : eval["iou_thresholds"]) {
      exp.eval.iou_thresholds.push_back(t.get<double>());
    }
  }

  exp.seed = doc.value("seed", exp.seed);
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw UsageError(path.string() + ": malformed JSON: " + e.what());
  }
  return parse_run_config(doc);
}

json scene_spec_json(const SceneSpec& spec) {
  json suite;
  suite["room_extent"] = {spec.room_extent.x, spec.room_extent.y,
                          spec.room_extent.z};
  suite["num_objects"] = {spec.min_objects, spec.max_objects};
  suite["class_count"] = spec.class_count;
  suite["clutter_max_iou"] = spec.max_pairwise_iou;
  suite["seed"] = spec.seed;
  json means = json::array(), stds = json::array();
  for (const ClassSizeModel& m : resolve_spec(spec).class_sizes) {
    means.push_back({m.mean.x, m.mean.y, m.mean.z});
    stds.push_back({m.stddev.x, m.stddev.y, m.stddev.z});
  }
  suite["size_means"] = means;
  suite["size_stddevs"] = stds;
  return suite;
}

json resolved_config_json(const RunConfig& config) {
  const ExperimentConfig& exp = config.experiment;
  json doc;
  doc["suite"] = scene_spec_json(config.suite);
  doc["anchors"] = {{"strides", config.grid.strides},
                    {"origin",
                     {config.grid.origin.x, config.grid.origin.y,
                      config.grid.origin.z}}};
  doc["assignment"] = {{"strategy", to_string(exp.assignment)},
                       {"k", exp.assign.k},
                       {"mu", exp.assign.mu},
                       {"lambda", exp.assign.lambda},
                       {"radius", exp.assign.radius},
                       {"refresh_interval", exp.assign.refresh_interval}};
  doc["loss"] = {{"cls", to_string(exp.cls_loss)},
                 {"beta", exp.ras.beta},
                 {"tau", exp.ras.tau},
                 {"alpha", exp.ras.alpha},
                 {"gamma", exp.ras.gamma},
                 {"rescale_r_cls", exp.ras.rescale_r_cls},
                 {"per_gt_r_cls", exp.ras.per_gt_r_cls},
                 {"differentiate_r_cls", exp.ras.differentiate_r_cls}};
  doc["optimizer"] = {{"step_size", exp.optimizer.step_size},
                      {"iterations", exp.optimizer.iterations}};
  doc["eval"] = {{"nms_iou", exp.eval.nms_iou},
                 {"score_threshold", exp.eval.score_threshold},
                 {"iou_thresholds", exp.eval.iou_thresholds},
                 {"pce_top_k", exp.eval.pce_top_k},
                 {"pre_nms_per_class", exp.eval.pre_nms_per_class},
                 {"ap_interval", exp.eval.ap_interval}};
  doc["seed"] = exp.seed;
  return doc;
}

std::vector<MatrixCell> load_matrix(const std::filesystem::path& path,
                                    const json& base_doc) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw UsageError(path.string() + ": malformed JSON: " + e.what());
  }
  if (!doc.contains("cells") || !doc["cells"].is_array() ||
      doc["cells"].empty()) {
    throw UsageError(path.string() + ": 'cells' must be a nonempty array");
  }
  json merged_base = base_doc;
  if (doc.contains("base")) merged_base.merge_patch(doc["base"]);

  std::vector<MatrixCell> cells;
  int index = 0;
  for (const json& cell_doc : doc["cells"]) {
    MatrixCell cell;
    cell.name = cell_doc.value("name", "cell-" + std::to_string(index));
    ++index;
    json merged = merged_base;
    json overrides = cell_doc;
    overrides.erase("name");
    merged.merge_patch(overrides);
    try {
      cell.config = parse_run_config(merged);
      cell.valid = true;
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

// ---------------------------------------------------------------------------
// Manifests and misc

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (const char c : bytes) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string config_digest(const json& resolved_config) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64,
                fnv1a64(resolved_config.dump()));
  return buf;
}

void write_manifest(const std::filesystem::path& path,
                    const RunManifest& manifest) {
  json doc;
  doc["digest"] = manifest.digest;
  doc["suite_seed"] = manifest.suite_seed;
  doc["tool_version"] = manifest.tool_version;
  doc["created_utc"] = manifest.created_utc;
  doc["outputs"] = manifest.outputs;
  doc["resolved_config"] = manifest.resolved_config;
  write_text_file(path, doc.dump(2) + "\n");
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string csv_row(std::span<const std::string> cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ",";
    out += cells[i];
  }
  out += "\n";
  return out;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& contents) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << contents;
  if (!out) {
    throw std::runtime_error("failed writing " + path.string());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace sr3d
