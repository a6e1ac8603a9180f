#ifndef SR3D_GEOMETRY_HPP_
#define SR3D_GEOMETRY_HPP_

#include <array>
#include <cmath>

namespace sr3d {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double& operator[](int i) { return (&x)[i]; }
  double operator[](int i) const { return (&x)[i]; }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  bool operator==(const Vec3& o) const = default;

  double squared_norm() const { return x * x + y * y + z * z; }
  double norm() const { return std::sqrt(squared_norm()); }
};

inline double squared_distance(const Vec3& a, const Vec3& b) {
  return (a - b).squared_norm();
}

inline double distance(const Vec3& a, const Vec3& b) {
  return std::sqrt(squared_distance(a, b));
}

// Smallest admissible box extent, in meters. Sizes below this are rejected
// at construction so enclosing-box diagonals can never vanish.
inline constexpr double kMinBoxSize = 1e-6;

/// Axis-aligned 3D box, stored as center and per-axis extent (meters).
class Box3 {
 public:
  // Throws std::invalid_argument if any size component is non-finite or
  // below kMinBoxSize.
  Box3(const Vec3& center, const Vec3& size);

  const Vec3& center() const { return center_; }
  const Vec3& size() const { return size_; }
  Vec3 min_corner() const { return center_ - size_ * 0.5; }
  Vec3 max_corner() const { return center_ + size_ * 0.5; }

  bool operator==(const Box3& o) const = default;

 private:
  Vec3 center_;
  Vec3 size_;
};

/// All pairwise quantities shared by the assignment costs and losses,
/// computed in one pass over the pair.
struct BoxPairGeometry {
  double iou = 0.0;                    // [0,1]
  double enclosing_diagonal = 0.0;     // meters, > 0
  double vertex_distance_ratio = 0.0;  // [0,1]
  double center_distance_ratio = 0.0;  // [0,1]
};

double volume(const Box3& box);
double intersection_volume(const Box3& a, const Box3& b);
double iou3d(const Box3& a, const Box3& b);
Box3 enclosing_box(const Box3& a, const Box3& b);
double enclosing_diagonal(const Box3& a, const Box3& b);

// Corner-alignment measure: (d(min corners) + d(max corners)) over twice the
// enclosing-box diagonal. Zero iff the boxes are identical.
double normalized_vertex_distance(const Box3& pred, const Box3& gt);

// Squared center distance over the squared enclosing-box diagonal.
double normalized_center_distance(const Box3& pred, const Box3& gt);

BoxPairGeometry box_pair_geometry(const Box3& pred, const Box3& gt);

// 1 - IoU + normalized center distance. Zero iff the boxes are identical.
double diou_loss(const Box3& pred, const Box3& gt);

struct BoxGrad {
  Vec3 d_center;
  Vec3 d_size;

  BoxGrad& operator+=(const BoxGrad& o) {
    d_center += o.d_center;
    d_size += o.d_size;
    return *this;
  }
  std::array<double, 6> flat() const {
    return {d_center.x, d_center.y, d_center.z, d_size.x, d_size.y, d_size.z};
  }
};

// Analytic gradient of diou_loss with respect to the predicted box's center
// and size. At configurations where intersection or enclosing boundaries
// coincide exactly, the returned value is one of the valid subgradients.
BoxGrad diou_gradient(const Box3& pred, const Box3& gt);

}  // namespace sr3d

#endif  // SR3D_GEOMETRY_HPP_
