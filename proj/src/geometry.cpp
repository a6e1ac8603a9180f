#include "sr3d/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sr3d {

namespace {

bool finite3(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

}  // namespace

Box3::Box3(const Vec3& center, const Vec3& size) : center_(center), size_(size) {
  if (!finite3(center) || !finite3(size)) {
    throw std::invalid_argument("Box3: non-finite component");
  }
  for (int k = 0; k < 3; ++k) {
    if (size[k] < kMinBoxSize) {
      throw std::invalid_argument("Box3: size component below 1e-6 m");
    }
  }
}

double volume(const Box3& box) {
  const Vec3& s = box.size();
  return s.x * s.y * s.z;
}

double intersection_volume(const Box3& a, const Box3& b) {
  const Vec3 alo = a.min_corner(), ahi = a.max_corner();
  const Vec3 blo = b.min_corner(), bhi = b.max_corner();
  double vol = 1.0;
  for (int k = 0; k < 3; ++k) {
    const double overlap =
        std::min(ahi[k], bhi[k]) - std::max(alo[k], blo[k]);
    if (overlap <= 0.0) return 0.0;
    vol *= overlap;
  }
  return vol;
}

double iou3d(const Box3& a, const Box3& b) {
  const double inter = intersection_volume(a, b);
  const double uni = volume(a) + volume(b) - inter;
  return inter / uni;
}

Box3 enclosing_box(const Box3& a, const Box3& b) {
  const Vec3 alo = a.min_corner(), ahi = a.max_corner();
  const Vec3 blo = b.min_corner(), bhi = b.max_corner();
  Vec3 lo, hi;
  for (int k = 0; k < 3; ++k) {
    lo[k] = std::min(alo[k], blo[k]);
    hi[k] = std::max(ahi[k], bhi[k]);
  }
  return Box3((lo + hi) * 0.5, hi - lo);
}

double enclosing_diagonal(const Box3& a, const Box3& b) {
  return enclosing_box(a, b).size().norm();
}

double normalized_vertex_distance(const Box3& pred, const Box3& gt) {
  return box_pair_geometry(pred, gt).vertex_distance_ratio;
}

double normalized_center_distance(const Box3& pred, const Box3& gt) {
  return box_pair_geometry(pred, gt).center_distance_ratio;
}

BoxPairGeometry box_pair_geometry(const Box3& pred, const Box3& gt) {
  const Vec3 plo = pred.min_corner(), phi = pred.max_corner();
  const Vec3 glo = gt.min_corner(), ghi = gt.max_corner();

  double inter = 1.0;
  double diag_sq = 0.0;
  bool disjoint = false;
  for (int k = 0; k < 3; ++k) {
    const double overlap = std::min(phi[k], ghi[k]) - std::max(plo[k], glo[k]);
    if (overlap <= 0.0) disjoint = true;
    inter *= overlap;
    const double extent = std::max(phi[k], ghi[k]) - std::min(plo[k], glo[k]);
    diag_sq += extent * extent;
  }
  if (disjoint) inter = 0.0;

  BoxPairGeometry g;
  const double uni = volume(pred) + volume(gt) - inter;
  g.iou = inter / uni;
  g.enclosing_diagonal = std::sqrt(diag_sq);
  g.vertex_distance_ratio =
      (distance(plo, glo) + distance(phi, ghi)) / (2.0 * g.enclosing_diagonal);
  g.center_distance_ratio =
      squared_distance(pred.center(), gt.center()) / diag_sq;
  return g;
}

double diou_loss(const Box3& pred, const Box3& gt) {
  const BoxPairGeometry g = box_pair_geometry(pred, gt);
  return 1.0 - g.iou + g.center_distance_ratio;
}

BoxGrad diou_gradient(const Box3& pred, const Box3& gt) {
  const Vec3 plo = pred.min_corner(), phi = pred.max_corner();
  const Vec3 glo = gt.min_corner(), ghi = gt.max_corner();

  // Per-axis overlap / enclosing extent and their derivatives with respect
  // to the predicted center and size. min/max make these piecewise linear;
  // strict comparisons pick one valid subgradient at ties.
  double overlap[3], extent[3];
  double d_overlap_dc[3], d_overlap_ds[3];
  double d_extent_dc[3], d_extent_ds[3];
  bool disjoint = false;
  for (int k = 0; k < 3; ++k) {
    const bool hi_pred = phi[k] < ghi[k];  // pred's face bounds the overlap top
    const bool lo_pred = plo[k] > glo[k];
    overlap[k] = std::min(phi[k], ghi[k]) - std::max(plo[k], glo[k]);
    d_overlap_dc[k] = (hi_pred ? 1.0 : 0.0) - (lo_pred ? 1.0 : 0.0);
    d_overlap_ds[k] = 0.5 * (hi_pred ? 1.0 : 0.0) + 0.5 * (lo_pred ? 1.0 : 0.0);
    if (overlap[k] <= 0.0) disjoint = true;

    const bool hi_out = phi[k] > ghi[k];  // pred's face bounds the enclosure
    const bool lo_out = plo[k] < glo[k];
    extent[k] = std::max(phi[k], ghi[k]) - std::min(plo[k], glo[k]);
    d_extent_dc[k] = (hi_out ? 1.0 : 0.0) - (lo_out ? 1.0 : 0.0);
    d_extent_ds[k] = 0.5 * (hi_out ? 1.0 : 0.0) + 0.5 * (lo_out ? 1.0 : 0.0);
  }

  const double vol_pred = volume(pred);
  const double vol_gt = volume(gt);
  const double inter = disjoint ? 0.0 : overlap[0] * overlap[1] * overlap[2];
  const double uni = vol_pred + vol_gt - inter;

  BoxGrad grad;
  for (int k = 0; k < 3; ++k) {
    // d(inter)/d(param_k)
    double di_dc = 0.0, di_ds = 0.0;
    if (!disjoint) {
      double rest = 1.0;
      for (int j = 0; j < 3; ++j)
        if (j != k) rest *= overlap[j];
      di_dc = d_overlap_dc[k] * rest;
      di_ds = d_overlap_ds[k] * rest;
    }
    // d(vol_pred)/d(size_k)
    const double dv_ds = vol_pred / pred.size()[k];

    // IoU = inter/union, union = vol_pred + vol_gt - inter
    const double du_dc = -di_dc;
    const double du_ds = dv_ds - di_ds;
    const double diou_dc = (di_dc * uni - inter * du_dc) / (uni * uni);
    const double diou_ds = (di_ds * uni - inter * du_ds) / (uni * uni);

    // R_CD = d^2(centers) / rho^2
    const double diag_sq =
        extent[0] * extent[0] + extent[1] * extent[1] + extent[2] * extent[2];
    const double dist_sq = squared_distance(pred.center(), gt.center());
    const double dd_dc = 2.0 * (pred.center()[k] - gt.center()[k]);
    const double drho_dc = 2.0 * extent[k] * d_extent_dc[k];
    const double drho_ds = 2.0 * extent[k] * d_extent_ds[k];
    const double drcd_dc =
        (dd_dc * diag_sq - dist_sq * drho_dc) / (diag_sq * diag_sq);
    const double drcd_ds = (-dist_sq * drho_ds) / (diag_sq * diag_sq);

    grad.d_center[k] = -diou_dc + drcd_dc;
    grad.d_size[k] = -diou_ds + drcd_ds;
  }
  return grad;
}

}  // namespace sr3d
