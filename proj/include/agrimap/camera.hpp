#pragma once

#include <Eigen/Core>

#include "agrimap/error.hpp"

namespace agrimap {

/// Pinhole intrinsics for rectified images (no distortion model).
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  CameraIntrinsics() = default;
  CameraIntrinsics(double fx_, double fy_, double cx_, double cy_, int width_,
                   int height_)
      : fx(fx_), fy(fy_), cx(cx_), cy(cy_), width(width_), height(height_) {
    if (fx <= 0.0 || fy <= 0.0)
      throw InvalidArgument("CameraIntrinsics: focal lengths must be positive");
    if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height)
      throw InvalidArgument(
          "CameraIntrinsics: principal point outside image bounds");
  }

  Eigen::Matrix3d matrix() const {
    Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
    k(0, 0) = fx;
    k(1, 1) = fy;
    k(0, 2) = cx;
    k(1, 2) = cy;
    return k;
  }

  bool contains(const Eigen::Vector2d& px) const {
    return px.x() >= 0.0 && px.x() < width && px.y() >= 0.0 && px.y() < height;
  }
};

/// Projects a camera-frame point to pixel coordinates.
inline Eigen::Vector2d project(const Eigen::Vector3d& point,
                               const CameraIntrinsics& k) {
  if (point.z() <= 0.0)
    throw NonPositiveDepth("project: point depth must be positive, got " +
                           std::to_string(point.z()));
  return {k.fx * point.x() / point.z() + k.cx,
          k.fy * point.y() / point.z() + k.cy};
}

/// Exact right-inverse of project at the given depth.
inline Eigen::Vector3d backproject(const Eigen::Vector2d& pixel, double depth,
                                   const CameraIntrinsics& k) {
  if (depth <= 0.0)
    throw NonPositiveDepth("backproject: depth must be positive, got " +
                           std::to_string(depth));
  return {(pixel.x() - k.cx) / k.fx * depth, (pixel.y() - k.cy) / k.fy * depth,
          depth};
}

/// Unit bearing ray through a pixel.
inline Eigen::Vector3d bearing(const Eigen::Vector2d& pixel,
                               const CameraIntrinsics& k) {
  return Eigen::Vector3d((pixel.x() - k.cx) / k.fx, (pixel.y() - k.cy) / k.fy,
                         1.0)
      .normalized();
}

}  // namespace agrimap
