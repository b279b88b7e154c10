#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <vector>

#include "agrimap/error.hpp"
#include "agrimap/geometry.hpp"

namespace agrimap {

/// Closed-form least-squares alignment of two point sets (Umeyama):
/// finds the similarity T minimizing sum_i |dst_i - T(src_i)|^2.
/// With `with_scale == false` the scale is fixed at 1 (rigid / Horn case).
///
/// Throws DegenerateGeometry when fewer than 3 pairs are given or the source
/// points are collinear (rotation unobservable), and ZeroSpread when all
/// source points coincide.
inline TransformSim3 align_point_sets(const std::vector<Eigen::Vector3d>& src,
                                      const std::vector<Eigen::Vector3d>& dst,
                                      bool with_scale) {
  if (src.size() != dst.size())
    throw InvalidArgument("align_point_sets: size mismatch");
  const std::size_t n = src.size();
  if (n < 3)
    throw DegenerateGeometry("align_point_sets: need at least 3 pairs, got " +
                             std::to_string(n));

  Eigen::Vector3d src_mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d dst_mean = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    src_mean += src[i];
    dst_mean += dst[i];
  }
  src_mean /= static_cast<double>(n);
  dst_mean /= static_cast<double>(n);

  double src_var = 0.0;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d s = src[i] - src_mean;
    const Eigen::Vector3d d = dst[i] - dst_mean;
    src_var += s.squaredNorm();
    cov += d * s.transpose();
  }
  src_var /= static_cast<double>(n);
  cov /= static_cast<double>(n);

  if (src_var < 1e-24)
    throw ZeroSpread("align_point_sets: all source positions coincide");

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  // Collinear source points leave the rotation about the line free.
  if (sv(1) <= 1e-12 * std::max(sv(0), src_var))
    throw DegenerateGeometry("align_point_sets: positions are collinear");

  Eigen::Matrix3d correction = Eigen::Matrix3d::Identity();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0)
    correction(2, 2) = -1.0;

  const Eigen::Matrix3d rot =
      svd.matrixU() * correction * svd.matrixV().transpose();

  double scale = 1.0;
  if (with_scale) scale = (sv.asDiagonal() * correction).trace() / src_var;
  if (!(scale > 0.0))
    throw DegenerateGeometry("align_point_sets: non-positive recovered scale");

  const Eigen::Vector3d t = dst_mean - scale * (rot * src_mean);
  return TransformSim3(scale, Eigen::Quaterniond(rot), t);
}

}  // namespace agrimap
