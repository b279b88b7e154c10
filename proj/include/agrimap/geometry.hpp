#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cmath>
#include <limits>
#include <vector>

#include "agrimap/error.hpp"

namespace agrimap {

/// Rigid-body transform / timestamped camera pose.
///
/// Quaternion storage order is (w,x,y,z) throughout the library; the TUM file
/// order (qx qy qz qw) is converted at the I/O boundary. Applied as
/// y = R * x + t.
struct PoseSE3 {
  Eigen::Quaterniond rotation{1.0, 0.0, 0.0, 0.0};  // (w,x,y,z)
  Eigen::Vector3d translation{0.0, 0.0, 0.0};
  double timestamp = std::numeric_limits<double>::quiet_NaN();

  PoseSE3() = default;
  PoseSE3(const Eigen::Quaterniond& q, const Eigen::Vector3d& t,
          double ts = std::numeric_limits<double>::quiet_NaN())
      : rotation(q.normalized()), translation(t), timestamp(ts) {}

  bool has_timestamp() const { return std::isfinite(timestamp); }

  Eigen::Matrix3d rotation_matrix() const { return rotation.toRotationMatrix(); }

  Eigen::Vector3d apply(const Eigen::Vector3d& x) const {
    return rotation * x + translation;
  }

  PoseSE3 inverse() const {
    const Eigen::Quaterniond q_inv = rotation.conjugate();
    return PoseSE3(q_inv, -(q_inv * translation), timestamp);
  }

  /// Composition: (a * b).apply(x) == a.apply(b.apply(x)).
  friend PoseSE3 operator*(const PoseSE3& a, const PoseSE3& b) {
    return PoseSE3(a.rotation * b.rotation,
                   a.rotation * b.translation + a.translation, b.timestamp);
  }
};

/// Similarity transform: y = s * R * x + t. Used for scale-corrected
/// trajectory alignment and geo-registration.
struct TransformSim3 {
  double scale = 1.0;
  Eigen::Quaterniond rotation{1.0, 0.0, 0.0, 0.0};
  Eigen::Vector3d translation{0.0, 0.0, 0.0};

  TransformSim3() = default;
  TransformSim3(double s, const Eigen::Quaterniond& q, const Eigen::Vector3d& t)
      : scale(s), rotation(q.normalized()), translation(t) {
    if (!(scale > 0.0))
      throw InvalidArgument("TransformSim3: scale must be positive");
  }

  static TransformSim3 identity() { return {}; }

  Eigen::Vector3d apply(const Eigen::Vector3d& x) const {
    return scale * (rotation * x) + translation;
  }

  TransformSim3 inverse() const {
    const Eigen::Quaterniond q_inv = rotation.conjugate();
    return TransformSim3(1.0 / scale, q_inv,
                         -(q_inv * translation) / scale);
  }

  friend TransformSim3 operator*(const TransformSim3& a,
                                 const TransformSim3& b) {
    return TransformSim3(a.scale * b.scale, a.rotation * b.rotation,
                         a.scale * (a.rotation * b.translation) +
                             a.translation);
  }

  /// Applies the similarity to a pose interpreted as camera-to-world:
  /// rotation is left-composed, the center is mapped through the similarity.
  PoseSE3 apply(const PoseSE3& pose) const {
    return PoseSE3(rotation * pose.rotation, apply(pose.translation),
                   pose.timestamp);
  }
};

/// Ordered list of timestamped poses with strictly increasing timestamps.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<PoseSE3> poses) {
    for (auto& p : poses) append(std::move(p));
  }

  void append(PoseSE3 pose) {
    if (!pose.has_timestamp())
      throw InvalidArgument("Trajectory: pose without timestamp");
    if (!poses_.empty() && pose.timestamp <= poses_.back().timestamp)
      throw NonMonotonicTimestamps(
          "Trajectory: timestamps must be strictly increasing (" +
          std::to_string(pose.timestamp) + " after " +
          std::to_string(poses_.back().timestamp) + ")");
    poses_.push_back(std::move(pose));
  }

  const std::vector<PoseSE3>& poses() const { return poses_; }
  std::size_t size() const { return poses_.size(); }
  bool empty() const { return poses_.empty(); }
  const PoseSE3& operator[](std::size_t i) const { return poses_[i]; }

  /// Sum of consecutive position gaps in meters.
  double path_length() const {
    double length = 0.0;
    for (std::size_t i = 1; i < poses_.size(); ++i)
      length += (poses_[i].translation - poses_[i - 1].translation).norm();
    return length;
  }

 private:
  std::vector<PoseSE3> poses_;
};

inline double deg_to_rad(double deg) { return deg * M_PI / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / M_PI; }

/// Rotation angle between two quaternions in radians.
inline double rotation_angle(const Eigen::Quaterniond& a,
                             const Eigen::Quaterniond& b) {
  const double dot = std::min(1.0, std::abs(a.normalized().dot(b.normalized())));
  return 2.0 * std::acos(dot);
}

/// Angle between two direction vectors in radians.
inline double vector_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double denom = a.norm() * b.norm();
  if (denom == 0.0) return 0.0;
  return std::acos(std::clamp(a.dot(b) / denom, -1.0, 1.0));
}

}  // namespace agrimap
