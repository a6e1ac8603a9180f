#ifndef SR3D_SCENE_HPP_
#define SR3D_SCENE_HPP_

#include <cstdint>
#include <vector>

#include "sr3d/assignment.hpp"
#include "sr3d/geometry.hpp"

namespace sr3d {

struct ClassSizeModel {
  Vec3 mean;    // meters
  Vec3 stddev;  // meters
};

/// Parameters of the seeded indoor-scene sampler.
struct SceneSpec {
  Vec3 room_extent{6.0, 6.0, 3.0};  // room spans [0, extent] per axis
  int min_objects = 4;
  int max_objects = 12;
  int class_count = 5;
  std::vector<ClassSizeModel> class_sizes;  // one per class; see defaults
  double max_pairwise_iou = 0.3;            // clutter cap between gt boxes
  std::uint64_t seed = 0;

  // Throws std::invalid_argument on non-positive extents, empty object
  // range, class_count < 1 or a size table not matching class_count.
  void validate() const;
};

// Five box archetypes with distinct aspect ratios; cycled when class_count
// differs from five.
std::vector<ClassSizeModel> default_class_sizes(int class_count);

// Spec with class_sizes populated for its class_count.
SceneSpec resolve_spec(SceneSpec spec);

struct Scene {
  int scene_id = 0;
  std::uint64_t seed = 0;
  std::vector<GroundTruthObject> objects;  // ids are list positions
  // Set when the clutter cap had to be relaxed after the retry budget.
  bool clutter_relaxed = false;
};

/// Samples one scene: object count uniform in [min,max], classes uniform,
/// sizes per-axis normal around the class model, centers uniform with the
/// box fully inside the room. Candidates violating the pairwise-IoU cap are
/// resampled up to a retry budget, then accepted with `clutter_relaxed`.
/// Deterministic in (spec, seed). Throws std::runtime_error when an object
/// cannot be placed inside the room at all.
Scene generate_scene(const SceneSpec& spec, std::uint64_t seed,
                     int scene_id = 0);

/// Scene suite with per-scene seeds derived as mix64(suite_seed, index).
std::vector<Scene> generate_suite(const SceneSpec& spec, int count,
                                  std::uint64_t suite_seed);

struct AnchorGridSpec {
  std::vector<double> strides{0.4, 0.8};  // meters, one lattice per level
  Vec3 origin{0.0, 0.0, 0.0};

  void validate() const;
};

/// Regular per-level lattices of anchor centers at (i + 0.5) * stride +
/// origin, keeping only points inside the room. Ordering is level-major,
/// then lexicographic by (x, y, z); ids are consecutive from 0. Throws
/// std::invalid_argument when a level has no interior points.
AnchorSet generate_anchors(const AnchorGridSpec& grid, const Vec3& room_extent);

}  // namespace sr3d

#endif  // SR3D_SCENE_HPP_
