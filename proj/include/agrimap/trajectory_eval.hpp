#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <vector>

#include "agrimap/alignment.hpp"
#include "agrimap/error.hpp"
#include "agrimap/geometry.hpp"

namespace agrimap {

/// Estimate/ground-truth pose pairs matched by timestamp.
struct AssociatedPairs {
  struct Pair {
    PoseSE3 est;
    PoseSE3 gt;
  };
  std::vector<Pair> pairs;
  double max_time_offset = 0.0;

  std::size_t size() const { return pairs.size(); }
};

enum class AlignmentKind { SE3, Sim3 };

struct AteReport {
  double rmse = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double max = 0.0;
  double trajectory_length = 0.0;  // sum of consecutive ground-truth gaps
  double ratio_percent = 0.0;      // 100 * rmse / trajectory_length
  double recovered_scale = 1.0;    // 1.0 for SE3 alignment
  AlignmentKind alignment = AlignmentKind::SE3;
  std::size_t pair_count = 0;
};

/// Greedy one-to-one nearest-timestamp matching within `max_time_offset`.
/// Candidate pairs are consumed in order of ascending time difference, so no
/// ground-truth pose is matched twice. Output is sorted by estimate time.
inline AssociatedPairs associate(const Trajectory& est, const Trajectory& gt,
                                 double max_time_offset) {
  if (est.empty() || gt.empty())
    throw InvalidArgument("associate: empty trajectory");

  struct Candidate {
    double dt;
    std::size_t ei, gi;
  };
  std::vector<Candidate> candidates;
  std::size_t lo = 0;
  for (std::size_t ei = 0; ei < est.size(); ++ei) {
    const double t = est[ei].timestamp;
    while (lo < gt.size() && gt[lo].timestamp < t - max_time_offset) ++lo;
    for (std::size_t gi = lo;
         gi < gt.size() && gt[gi].timestamp <= t + max_time_offset; ++gi)
      candidates.push_back({std::abs(gt[gi].timestamp - t), ei, gi});
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.dt != b.dt) return a.dt < b.dt;
              if (a.ei != b.ei) return a.ei < b.ei;
              return a.gi < b.gi;
            });

  std::vector<bool> est_used(est.size(), false), gt_used(gt.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> matched;
  for (const auto& cand : candidates) {
    if (est_used[cand.ei] || gt_used[cand.gi]) continue;
    est_used[cand.ei] = true;
    gt_used[cand.gi] = true;
    matched.emplace_back(cand.ei, cand.gi);
  }
  if (matched.empty())
    throw NoOverlap("associate: no pose pairs within max time offset " +
                    std::to_string(max_time_offset));
  std::sort(matched.begin(), matched.end());

  AssociatedPairs out;
  out.max_time_offset = max_time_offset;
  out.pairs.reserve(matched.size());
  for (const auto& [ei, gi] : matched) out.pairs.push_back({est[ei], gt[gi]});
  return out;
}

namespace detail {

inline void split_positions(const AssociatedPairs& pairs,
                            std::vector<Eigen::Vector3d>* est,
                            std::vector<Eigen::Vector3d>* gt) {
  est->reserve(pairs.size());
  gt->reserve(pairs.size());
  for (const auto& p : pairs.pairs) {
    est->push_back(p.est.translation);
    gt->push_back(p.gt.translation);
  }
}

}  // namespace detail

/// Least-squares rigid alignment (Horn closed form) of estimate onto ground
/// truth; scale fixed at 1.
inline TransformSim3 align_se3(const AssociatedPairs& pairs) {
  std::vector<Eigen::Vector3d> est, gt;
  detail::split_positions(pairs, &est, &gt);
  return align_point_sets(est, gt, /*with_scale=*/false);
}

/// Least-squares similarity alignment (Umeyama) of estimate onto ground truth
/// with scale correction; resolves the monocular scale ambiguity.
inline TransformSim3 align_sim3(const AssociatedPairs& pairs) {
  std::vector<Eigen::Vector3d> est, gt;
  detail::split_positions(pairs, &est, &gt);
  return align_point_sets(est, gt, /*with_scale=*/true);
}

/// Position-only absolute trajectory error of the aligned estimate, plus the
/// ratio over the ground-truth path length.
inline AteReport compute_ate(const AssociatedPairs& pairs,
                             const TransformSim3& transform,
                             AlignmentKind alignment) {
  if (pairs.pairs.empty()) throw InvalidArgument("compute_ate: no pairs");

  std::vector<double> errors;
  errors.reserve(pairs.size());
  double sum = 0.0, sum_sq = 0.0, max_err = 0.0;
  for (const auto& p : pairs.pairs) {
    const double e =
        (p.gt.translation - transform.apply(p.est.translation)).norm();
    errors.push_back(e);
    sum += e;
    sum_sq += e * e;
    max_err = std::max(max_err, e);
  }
  std::sort(errors.begin(), errors.end());
  const std::size_t n = errors.size();
  const double median = n % 2 == 1
                            ? errors[n / 2]
                            : 0.5 * (errors[n / 2 - 1] + errors[n / 2]);

  AteReport report;
  report.rmse = std::sqrt(sum_sq / static_cast<double>(n));
  report.mean = sum / static_cast<double>(n);
  report.median = median;
  report.max = max_err;
  for (std::size_t i = 1; i < pairs.size(); ++i)
    report.trajectory_length +=
        (pairs.pairs[i].gt.translation - pairs.pairs[i - 1].gt.translation)
            .norm();
  report.ratio_percent = ate_ratio_percent(report.rmse, report.trajectory_length);
  report.recovered_scale = alignment == AlignmentKind::Sim3 ? transform.scale : 1.0;
  report.alignment = alignment;
  report.pair_count = n;
  return report;
}

/// Ratio of ATE over trajectory length in percent, as reported alongside the
/// absolute error.
inline double ate_ratio_percent(double rmse, double trajectory_length) {
  if (trajectory_length <= 0.0) return 0.0;
  return 100.0 * rmse / trajectory_length;
}

}  // namespace agrimap
