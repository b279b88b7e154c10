#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "agrimap/camera.hpp"
#include "agrimap/error.hpp"
#include "agrimap/geometry.hpp"
#include "agrimap/point_cloud.hpp"
#include "agrimap/triangulation.hpp"

namespace agrimap {

/// One triangulated depth observation with its geometric variance.
struct DepthMeasurement {
  double d_tilde = 0.0;  // triangulated depth, meters
  double tau_sq = 0.0;   // measurement variance, meters^2

  DepthMeasurement() = default;
  DepthMeasurement(double d, double tau2) : d_tilde(d), tau_sq(tau2) {
    if (!(d_tilde > 0.0))
      throw InvalidRange("DepthMeasurement: depth must be positive");
    if (!(tau_sq > 0.0))
      throw InvalidRange("DepthMeasurement: variance must be positive");
  }
};

enum class FilterStatus { Active, Converged, Diverged };

struct DepthFilterConfig {
  /// Converged once sqrt(sigma_sq) / (d_max - d_min) drops below this.
  double convergence_sigma_fraction = 0.005;
  /// Diverged once the inlier-ratio mean a/(a+b) drops below this ...
  double divergence_inlier_mean = 0.1;
  /// ... after at least this many updates.
  int min_updates_for_divergence = 10;
};

/// Per-pixel posterior state: Gaussian over the depth, Beta evidence over the
/// inlier ratio, and the admissible depth interval of the uniform outlier
/// component.
struct DepthFilterState {
  double mu = 0.0;
  double sigma_sq = 0.0;
  double a = 10.0;
  double b = 10.0;
  double d_min = 0.0;
  double d_max = 0.0;
  FilterStatus status = FilterStatus::Active;
  int num_updates = 0;

  double inlier_ratio_mean() const { return a / (a + b); }
};

/// Fresh filter centered at the average scene depth with +-3 sigma spanning
/// the admissible interval and an uninformative Beta(10, 10) inlier prior.
inline DepthFilterState init_filter(double average_scene_depth, double d_min,
                                    double d_max) {
  if (!(0.0 < d_min && d_min < average_scene_depth &&
        average_scene_depth < d_max))
    throw InvalidRange("init_filter: need 0 < d_min < average depth < d_max");
  DepthFilterState state;
  state.mu = average_scene_depth;
  const double sigma = (d_max - d_min) / 6.0;
  state.sigma_sq = sigma * sigma;
  state.a = 10.0;
  state.b = 10.0;
  state.d_min = d_min;
  state.d_max = d_max;
  state.status = FilterStatus::Active;
  return state;
}

/// Variance of a triangulated depth at the given pixel/depth/relative pose:
/// the current-frame observation is perturbed by one pixel along the epipolar
/// direction and the depth difference of the re-triangulated point is squared.
inline double measurement_variance(const Eigen::Vector2d& pixel_ref,
                                   double depth,
                                   const PoseSE3& pose_ref_to_cur,
                                   const CameraIntrinsics& k) {
  const Eigen::Vector3d point_ref = backproject(pixel_ref, depth, k);
  const Eigen::Vector3d point_cur = pose_ref_to_cur.apply(point_ref);
  if (point_cur.z() <= 0.0)
    throw DegenerateBaseline(
        "measurement_variance: point behind current camera");
  const Eigen::Vector2d pixel_cur = project(point_cur, k);

  // Epipolar direction: image motion of the observation as depth changes.
  const Eigen::Vector3d nudged_ref = backproject(pixel_ref, depth * 1.01, k);
  const Eigen::Vector2d nudged_cur = project(pose_ref_to_cur.apply(nudged_ref), k);
  const Eigen::Vector2d epipolar_dir = nudged_cur - pixel_cur;
  if (epipolar_dir.norm() < 1e-12)
    throw DegenerateBaseline(
        "measurement_variance: observation insensitive to depth (zero "
        "baseline)");

  const Eigen::Vector2d perturbed = pixel_cur + epipolar_dir.normalized();
  const auto tri = triangulate_two_view(pixel_ref, perturbed, pose_ref_to_cur, k);
  const double tau = std::abs(tri.point.z() - depth);
  return tau * tau;
}

namespace detail {

inline double normal_pdf(double x, double mean, double sigma) {
  const double z = (x - mean) / sigma;
  return std::exp(-0.5 * z * z) /
         (sigma * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace detail

/// One recursive Bayesian update under the Gaussian + Uniform mixture
/// likelihood. The Gaussian depth posterior is matched on its first two
/// moments; the Beta evidence is matched on its mean with the total a + b
/// growing by exactly one per update.
inline DepthFilterState update(const DepthFilterState& state,
                               const DepthMeasurement& m,
                               const DepthFilterConfig& config = {}) {
  if (state.status != FilterStatus::Active) return state;

  DepthFilterState out = state;
  const double range = state.d_max - state.d_min;
  const double norm_scale = std::sqrt(state.sigma_sq + m.tau_sq);

  // Posterior of a pure-Gaussian update (the inlier branch).
  const double s2 = 1.0 / (1.0 / state.sigma_sq + 1.0 / m.tau_sq);
  const double mean_inlier =
      s2 * (state.mu / state.sigma_sq + m.d_tilde / m.tau_sq);

  // Responsibilities of the two mixture components.
  double c_inlier = state.inlier_ratio_mean() *
                    detail::normal_pdf(m.d_tilde, state.mu, norm_scale);
  double c_outlier = (1.0 - state.inlier_ratio_mean()) / range;
  const double normalizer = c_inlier + c_outlier;
  if (normalizer <= 0.0 || !std::isfinite(normalizer)) {
    // Measurement carries no usable information; keep the prior.
    out.num_updates += 1;
    return out;
  }
  c_inlier /= normalizer;
  c_outlier /= normalizer;

  // Moment-matched Gaussian over depth.
  const double mu_new = c_inlier * mean_inlier + c_outlier * state.mu;
  const double second_moment =
      c_inlier * (s2 + mean_inlier * mean_inlier) +
      c_outlier * (state.sigma_sq + state.mu * state.mu);
  out.mu = mu_new;
  out.sigma_sq = std::max(second_moment - mu_new * mu_new, 0.0);

  // Mean-matched Beta evidence, conserving a + b + 1.
  const double total = state.a + state.b;
  const double mean_rho = c_inlier * (state.a + 1.0) / (total + 1.0) +
                          c_outlier * state.a / (total + 1.0);
  out.a = mean_rho * (total + 1.0);
  out.b = (1.0 - mean_rho) * (total + 1.0);
  out.num_updates = state.num_updates + 1;

  if (std::sqrt(out.sigma_sq) < config.convergence_sigma_fraction * range)
    out.status = FilterStatus::Converged;
  else if (out.num_updates >= config.min_updates_for_divergence &&
           out.inlier_ratio_mean() < config.divergence_inlier_mean)
    out.status = FilterStatus::Diverged;
  return out;
}

struct GridBayesResult {
  double depth_mean = 0.0;
  double rho_mean = 0.0;
};

/// Exact-Bayes reference for `update`: evaluates the mixture likelihood of the
/// full measurement list on a discretized (depth, rho) grid under a uniform
/// prior and returns the posterior expectations. Deliberately brute force; it
/// exists to audit the parametric recursion, not to be fast.
inline GridBayesResult grid_bayes_oracle(
    std::span<const DepthMeasurement> measurements, double d_min, double d_max,
    int grid_resolution = 200, std::optional<double> fixed_rho = {}) {
  if (measurements.empty())
    throw InvalidArgument("grid_bayes_oracle: need at least one measurement");
  if (grid_resolution < 100)
    throw InvalidArgument("grid_bayes_oracle: grid resolution below 100");
  if (!(d_min < d_max)) throw InvalidRange("grid_bayes_oracle: d_min >= d_max");

  const int nd = grid_resolution;
  const int nr = fixed_rho ? 1 : grid_resolution;
  const double d_step = (d_max - d_min) / nd;
  const double uniform_density = 1.0 / (d_max - d_min);

  std::vector<double> log_post(static_cast<std::size_t>(nd) * nr, 0.0);
  double max_log = -std::numeric_limits<double>::infinity();
  for (int di = 0; di < nd; ++di) {
    const double depth = d_min + (di + 0.5) * d_step;
    for (int ri = 0; ri < nr; ++ri) {
      const double rho = fixed_rho ? *fixed_rho : (ri + 0.5) / nr;
      double log_p = 0.0;
      for (const auto& m : measurements) {
        const double likelihood =
            rho * detail::normal_pdf(m.d_tilde, depth, std::sqrt(m.tau_sq)) +
            (1.0 - rho) * uniform_density;
        log_p += std::log(std::max(likelihood, 1e-300));
      }
      log_post[static_cast<std::size_t>(di) * nr + ri] = log_p;
      max_log = std::max(max_log, log_p);
    }
  }

  double mass = 0.0, depth_acc = 0.0, rho_acc = 0.0;
  for (int di = 0; di < nd; ++di) {
    const double depth = d_min + (di + 0.5) * d_step;
    for (int ri = 0; ri < nr; ++ri) {
      const double rho = fixed_rho ? *fixed_rho : (ri + 0.5) / nr;
      const double w =
          std::exp(log_post[static_cast<std::size_t>(di) * nr + ri] - max_log);
      mass += w;
      depth_acc += w * depth;
      rho_acc += w * rho;
    }
  }
  return {depth_acc / mass, rho_acc / mass};
}

/// Per-pixel filter bank over one reference keyframe.
struct FilterGrid {
  int width = 0;
  int height = 0;
  int reference_keyframe_id = 0;
  std::vector<DepthFilterState> states;

  FilterGrid() = default;
  FilterGrid(int w, int h, int keyframe_id, const DepthFilterState& seed)
      : width(w),
        height(h),
        reference_keyframe_id(keyframe_id),
        states(static_cast<std::size_t>(w) * h, seed) {
    if (w <= 0 || h <= 0)
      throw InvalidArgument("FilterGrid: dimensions must be positive");
  }

  DepthFilterState& at(int x, int y) {
    return states[static_cast<std::size_t>(y) * width + x];
  }
  const DepthFilterState& at(int x, int y) const {
    return states[static_cast<std::size_t>(y) * width + x];
  }
};

struct StepStats {
  int converged = 0;
  int diverged = 0;
  int active = 0;
};

/// Supplies at most one measurement for a pixel of the reference grid given
/// the current frame's pose relative to the grid keyframe.
using MeasurementSource = std::function<std::optional<DepthMeasurement>(
    int x, int y, const PoseSE3& pose_ref_to_cur)>;

/// Feeds one frame into the grid: every Active pixel receives at most one
/// measurement and one update. Pixels are independent; the result does not
/// depend on traversal order.
inline StepStats step_grid(FilterGrid& grid, const PoseSE3& pose_ref_to_cur,
                           const MeasurementSource& source,
                           const DepthFilterConfig& config = {}) {
  for (int y = 0; y < grid.height; ++y)
    for (int x = 0; x < grid.width; ++x) {
      DepthFilterState& state = grid.at(x, y);
      if (state.status != FilterStatus::Active) continue;
      if (auto m = source(x, y, pose_ref_to_cur))
        state = update(state, *m, config);
    }

  StepStats stats;
  for (const auto& s : grid.states) {
    if (s.status == FilterStatus::Converged)
      ++stats.converged;
    else if (s.status == FilterStatus::Diverged)
      ++stats.diverged;
    else
      ++stats.active;
  }
  return stats;
}

/// One world-frame point per Converged pixel, backprojected at the posterior
/// mean and mapped through the grid keyframe pose (camera-to-world).
inline PointCloud extract_points(const FilterGrid& grid,
                                 const CameraIntrinsics& k,
                                 const PoseSE3& grid_pose) {
  PointCloud cloud;
  for (int y = 0; y < grid.height; ++y)
    for (int x = 0; x < grid.width; ++x) {
      const DepthFilterState& s = grid.at(x, y);
      if (s.status != FilterStatus::Converged) continue;
      const Eigen::Vector3d local =
          backproject(Eigen::Vector2d(x, y), s.mu, k);
      cloud.positions.push_back(grid_pose.apply(local));
    }
  return cloud;
}

}  // namespace agrimap
