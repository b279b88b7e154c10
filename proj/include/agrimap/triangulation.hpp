#pragma once

#include <Eigen/Core>

#include "agrimap/camera.hpp"
#include "agrimap/error.hpp"
#include "agrimap/geometry.hpp"

namespace agrimap {

struct TriangulationResult {
  Eigen::Vector3d point;            // reference camera frame
  double reprojection_error_px;     // max of the two view residuals
};

/// Linear least-squares two-view triangulation (ray midpoint method).
///
/// `pose_ref_to_cur` maps reference-frame coordinates into the current frame:
/// x_cur = R * x_ref + t. The returned point lives in the reference frame.
/// Rays closer than `min_ray_angle_deg` to parallel, or a near-zero baseline,
/// raise DegenerateBaseline; a point behind either camera raises NegativeDepth.
inline TriangulationResult triangulate_two_view(
    const Eigen::Vector2d& pixel_ref, const Eigen::Vector2d& pixel_cur,
    const PoseSE3& pose_ref_to_cur, const CameraIntrinsics& k,
    double min_ray_angle_deg = 0.05) {
  const PoseSE3 pose_cur_to_ref = pose_ref_to_cur.inverse();
  const Eigen::Vector3d cur_center = pose_cur_to_ref.translation;
  if (cur_center.norm() < 1e-12)
    throw DegenerateBaseline("triangulate_two_view: zero baseline");

  const Eigen::Vector3d dir_ref = bearing(pixel_ref, k);
  const Eigen::Vector3d dir_cur =
      pose_cur_to_ref.rotation * bearing(pixel_cur, k);

  const double angle = vector_angle(dir_ref, dir_cur);
  if (angle < deg_to_rad(min_ray_angle_deg) ||
      angle > M_PI - deg_to_rad(min_ray_angle_deg))
    throw DegenerateBaseline(
        "triangulate_two_view: rays within angular tolerance of parallel");

  // Closest points on the two rays: minimize |s*d_ref - (c + t*d_cur)|^2.
  const double d12 = dir_ref.dot(dir_cur);
  const double b1 = dir_ref.dot(cur_center);
  const double b2 = dir_cur.dot(cur_center);
  const double det = d12 * d12 - 1.0;  // both directions are unit vectors
  const double s = (d12 * b2 - b1) / det;
  const double t = (b2 - d12 * b1) / det;

  if (s <= 0.0)
    throw NegativeDepth("triangulate_two_view: point behind reference camera");
  if (t <= 0.0)
    throw NegativeDepth("triangulate_two_view: point behind current camera");

  const Eigen::Vector3d on_ref = s * dir_ref;
  const Eigen::Vector3d on_cur = cur_center + t * dir_cur;
  const Eigen::Vector3d point = 0.5 * (on_ref + on_cur);

  if (point.z() <= 0.0)
    throw NegativeDepth("triangulate_two_view: midpoint behind reference camera");
  const Eigen::Vector3d point_cur = pose_ref_to_cur.apply(point);
  if (point_cur.z() <= 0.0)
    throw NegativeDepth("triangulate_two_view: midpoint behind current camera");

  const double err_ref = (project(point, k) - pixel_ref).norm();
  const double err_cur = (project(point_cur, k) - pixel_cur).norm();
  return {point, std::max(err_ref, err_cur)};
}

}  // namespace agrimap
