#include "sr3d/scene.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sr3d/rng.hpp"

namespace sr3d {

namespace {

constexpr int kPlacementRetries = 100;
constexpr double kMinSampledSize = 0.05;  // meters

}  // namespace

void SceneSpec::validate() const {
  if (!(room_extent.x > 0.0 && room_extent.y > 0.0 && room_extent.z > 0.0)) {
    throw std::invalid_argument("SceneSpec: room extents must be positive");
  }
  if (min_objects < 0 || max_objects < min_objects) {
    throw std::invalid_argument("SceneSpec: invalid object-count range");
  }
  if (class_count < 1) {
    throw std::invalid_argument("SceneSpec: class_count must be >= 1");
  }
  if (!class_sizes.empty() &&
      class_sizes.size() != static_cast<std::size_t>(class_count)) {
    throw std::invalid_argument(
        "SceneSpec: class_sizes must list one model per class");
  }
  if (!(max_pairwise_iou >= 0.0 && max_pairwise_iou <= 1.0)) {
    throw std::invalid_argument("SceneSpec: clutter cap must lie in [0,1]");
  }
}

std::vector<ClassSizeModel> default_class_sizes(int class_count) {
  static const ClassSizeModel base[5] = {
      {{0.50, 0.50, 0.50}, {0.08, 0.08, 0.08}},
      {{1.40, 0.80, 0.75}, {0.20, 0.12, 0.08}},
      {{0.55, 0.55, 0.90}, {0.08, 0.08, 0.10}},
      {{1.80, 0.90, 0.80}, {0.25, 0.12, 0.10}},
      {{0.90, 0.45, 1.60}, {0.12, 0.08, 0.20}},
  };
  std::vector<ClassSizeModel> sizes;
  sizes.reserve(class_count);
  for (int c = 0; c < class_count; ++c) sizes.push_back(base[c % 5]);
  return sizes;
}

SceneSpec resolve_spec(SceneSpec spec) {
  if (spec.class_sizes.empty()) {
    spec.class_sizes = default_class_sizes(spec.class_count);
  }
  spec.validate();
  return spec;
}

Scene generate_scene(const SceneSpec& raw_spec, std::uint64_t seed,
                     int scene_id) {
  const SceneSpec spec = resolve_spec(raw_spec);
  std::mt19937_64 rng(seed);
  Scene scene;
  scene.scene_id = scene_id;
  scene.seed = seed;

  const int count = static_cast<int>(
      uniform_int(rng, spec.min_objects, spec.max_objects));
  for (int i = 0; i < count; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementRetries && !placed; ++attempt) {
      const int class_id =
          static_cast<int>(uniform_int(rng, 0, spec.class_count - 1));
      const ClassSizeModel& model = spec.class_sizes[class_id];
      Vec3 size;
      for (int k = 0; k < 3; ++k) {
        size[k] = std::max(normal(rng, model.mean[k], model.stddev[k]),
                           kMinSampledSize);
      }
      bool fits = true;
      Vec3 center;
      for (int k = 0; k < 3; ++k) {
        const double lo = size[k] * 0.5;
        const double hi = spec.room_extent[k] - size[k] * 0.5;
        if (hi < lo) {
          fits = false;
          break;
        }
        center[k] = uniform_range(rng, lo, hi);
      }
      if (!fits) continue;

      const Box3 candidate(center, size);
      const bool relax = attempt == kPlacementRetries - 1;
      bool clutter_ok = true;
      for (const GroundTruthObject& existing : scene.objects) {
        if (iou3d(candidate, existing.box) > spec.max_pairwise_iou) {
          clutter_ok = false;
          break;
        }
      }
      if (clutter_ok || relax) {
        scene.objects.push_back({i, candidate, class_id});
        if (!clutter_ok) scene.clutter_relaxed = true;
        placed = true;
      }
    }
    if (!placed) {
      throw std::runtime_error(
          "generate_scene: could not place object " + std::to_string(i) +
          " inside the room within the retry budget");
    }
  }
  return scene;
}

std::vector<Scene> generate_suite(const SceneSpec& spec, int count,
                                  std::uint64_t suite_seed) {
  std::vector<Scene> scenes;
  scenes.reserve(count);
  for (int i = 0; i < count; ++i) {
    scenes.push_back(
        generate_scene(spec, derive_seed(suite_seed, i), i));
  }
  return scenes;
}

void AnchorGridSpec::validate() const {
  if (strides.empty()) {
    throw std::invalid_argument("AnchorGridSpec: at least one stride required");
  }
  for (const double s : strides) {
    if (!(s > 0.0)) {
      throw std::invalid_argument("AnchorGridSpec: strides must be positive");
    }
  }
}

AnchorSet generate_anchors(const AnchorGridSpec& grid,
                           const Vec3& room_extent) {
  grid.validate();
  AnchorSet anchors;
  int next_id = 0;
  for (std::size_t level = 0; level < grid.strides.size(); ++level) {
    const double stride = grid.strides[level];
    int counts[3];
    for (int k = 0; k < 3; ++k) {
      // Tolerance so an extent that is an exact multiple of the stride
      // keeps its last cell despite rounding.
      counts[k] = static_cast<int>(
          std::floor(room_extent[k] / stride + 1e-9));
    }
    const std::size_t before = anchors.size();
    for (int ix = 0; ix < counts[0]; ++ix) {
      const double x = grid.origin.x + (ix + 0.5) * stride;
      if (x < 0.0 || x > room_extent.x) continue;
      for (int iy = 0; iy < counts[1]; ++iy) {
        const double y = grid.origin.y + (iy + 0.5) * stride;
        if (y < 0.0 || y > room_extent.y) continue;
        for (int iz = 0; iz < counts[2]; ++iz) {
          const double z = grid.origin.z + (iz + 0.5) * stride;
          if (z < 0.0 || z > room_extent.z) continue;
          anchors.push_back({next_id++, {x, y, z}, static_cast<int>(level)});
        }
      }
    }
    if (anchors.size() == before) {
      throw std::invalid_argument(
          "generate_anchors: level " + std::to_string(level) +
          " produces no anchors inside the room");
    }
  }
  return anchors;
}

}  // namespace sr3d
