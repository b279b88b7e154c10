#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <vector>

#include "agrimap/error.hpp"

namespace agrimap {

/// Dense map points with optional per-point color and scalar channel.
/// The scalar channel carries density values in the analysis tools.
struct PointCloud {
  std::vector<Eigen::Vector3d> positions;
  std::vector<std::array<std::uint8_t, 3>> colors;  // empty or one per point
  std::vector<double> scalars;                      // empty or one per point
  std::string scalar_name = "density";

  std::size_t size() const { return positions.size(); }
  bool empty() const { return positions.empty(); }

  bool has_colors() const { return !colors.empty(); }
  bool has_scalars() const { return !scalars.empty(); }

  void validate() const {
    if (has_colors() && colors.size() != positions.size())
      throw InvalidArgument("PointCloud: color channel length mismatch");
    if (has_scalars() && scalars.size() != positions.size())
      throw InvalidArgument("PointCloud: scalar channel length mismatch");
    for (const auto& p : positions)
      if (!p.allFinite())
        throw InvalidArgument("PointCloud: non-finite coordinates");
  }
};

}  // namespace agrimap
