#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "agrimap/camera.hpp"
#include "agrimap/error.hpp"
#include "agrimap/geometry.hpp"
#include "agrimap/rng.hpp"
#include "agrimap/triangulation.hpp"

namespace agrimap {

struct Correspondence {
  Eigen::Vector2d ref;
  Eigen::Vector2d cur;
};
using Correspondences = std::vector<Correspondence>;

enum class ModelChoice { Homography, Fundamental };

/// Paired model scores of the initialization selection heuristic.
/// r_h = s_h / (s_h + s_f); the homography model is selected when r_h exceeds
/// the configured threshold.
struct TwoViewScore {
  double s_h = 0.0;
  double s_f = 0.0;
  double r_h = 0.0;
  ModelChoice selected_model = ModelChoice::Fundamental;
};

struct RelativePose {
  Eigen::Quaterniond rotation{1.0, 0.0, 0.0, 0.0};
  Eigen::Vector3d translation_direction{0.0, 0.0, 1.0};  // unit, scale-free
  int num_cheirality_inliers = 0;
};

struct RansacOptions {
  int iterations = 200;
  double inlier_threshold_px = 2.0;
  double confidence = 0.99;  // early exit once this is reached
  std::uint64_t seed = 42;
};

struct ScoreOptions {
  double sigma_px = 1.0;
  double selection_threshold = 0.5;  // up to 0.8 for extreme cases
};

struct RansacResult {
  Eigen::Matrix3d model;
  std::vector<bool> inlier_mask;
  int inlier_count = 0;
};

// Truncated chi-square limits at 95%: 2 dof for point transfer errors,
// 1 dof for point-to-epipolar-line distances. Fundamental inliers score
// against the 2-dof limit so both model scores share one scale.
inline constexpr double kChi2Limit2Dof = 5.991;
inline constexpr double kChi2Limit1Dof = 3.841;

namespace detail {

/// Hartley normalization: centroid to origin, mean distance sqrt(2).
inline Eigen::Matrix3d normalize_points(const Correspondences& c, bool use_ref,
                                        std::vector<Eigen::Vector2d>* out) {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& m : c) mean += use_ref ? m.ref : m.cur;
  mean /= static_cast<double>(c.size());

  double mean_dist = 0.0;
  for (const auto& m : c) mean_dist += ((use_ref ? m.ref : m.cur) - mean).norm();
  mean_dist /= static_cast<double>(c.size());
  const double s = mean_dist > 0.0 ? std::sqrt(2.0) / mean_dist : 1.0;

  out->resize(c.size());
  for (std::size_t i = 0; i < c.size(); ++i)
    (*out)[i] = s * ((use_ref ? c[i].ref : c[i].cur) - mean);

  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
  t(0, 0) = s;
  t(1, 1) = s;
  t(0, 2) = -s * mean.x();
  t(1, 2) = -s * mean.y();
  return t;
}

inline Eigen::Matrix3d homography_dlt(const std::vector<Eigen::Vector2d>& ref,
                                      const std::vector<Eigen::Vector2d>& cur,
                                      const std::vector<int>& idx) {
  const int n = static_cast<int>(idx.size());
  Eigen::MatrixXd a(2 * n, 9);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d& x = ref[idx[i]];
    const Eigen::Vector2d& y = cur[idx[i]];
    a.row(2 * i) << 0.0, 0.0, 0.0, -x.x(), -x.y(), -1.0, y.y() * x.x(),
        y.y() * x.y(), y.y();
    a.row(2 * i + 1) << x.x(), x.y(), 1.0, 0.0, 0.0, 0.0, -y.x() * x.x(),
        -y.x() * x.y(), -y.x();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d out;
  out << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  return out;
}

inline Eigen::Matrix3d fundamental_eight_point(
    const std::vector<Eigen::Vector2d>& ref,
    const std::vector<Eigen::Vector2d>& cur, const std::vector<int>& idx) {
  const int n = static_cast<int>(idx.size());
  Eigen::MatrixXd a(n, 9);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d& x = ref[idx[i]];
    const Eigen::Vector2d& y = cur[idx[i]];
    a.row(i) << y.x() * x.x(), y.x() * x.y(), y.x(), y.y() * x.x(),
        y.y() * x.y(), y.y(), x.x(), x.y(), 1.0;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd f = svd.matrixV().col(8);
  Eigen::Matrix3d pre;
  pre << f(0), f(1), f(2), f(3), f(4), f(5), f(6), f(7), f(8);

  // rank-2 enforcement
  Eigen::JacobiSVD<Eigen::Matrix3d> svd_f(
      pre, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d sv = svd_f.singularValues();
  sv(2) = 0.0;
  return svd_f.matrixU() * sv.asDiagonal() * svd_f.matrixV().transpose();
}

/// Squared symmetric transfer errors of a homography, (ref->cur, cur->ref).
inline std::array<double, 2> homography_transfer_sq(const Eigen::Matrix3d& h,
                                                    const Eigen::Matrix3d& h_inv,
                                                    const Correspondence& m) {
  const Eigen::Vector3d fwd = h * m.ref.homogeneous();
  const Eigen::Vector3d bwd = h_inv * m.cur.homogeneous();
  const double inf = std::numeric_limits<double>::infinity();
  const double d_fwd =
      fwd.z() != 0.0 ? (fwd.hnormalized() - m.cur).squaredNorm() : inf;
  const double d_bwd =
      bwd.z() != 0.0 ? (bwd.hnormalized() - m.ref).squaredNorm() : inf;
  return {d_fwd, d_bwd};
}

/// Squared point-to-epipolar-line distances, (line in cur, line in ref).
inline std::array<double, 2> epipolar_distance_sq(const Eigen::Matrix3d& f,
                                                  const Correspondence& m) {
  const Eigen::Vector3d line_cur = f * m.ref.homogeneous();
  const Eigen::Vector3d line_ref = f.transpose() * m.cur.homogeneous();
  const double algebraic = m.cur.homogeneous().dot(line_cur);
  const double inf = std::numeric_limits<double>::infinity();
  const double den_cur = line_cur.head<2>().squaredNorm();
  const double den_ref = line_ref.head<2>().squaredNorm();
  return {den_cur > 0.0 ? algebraic * algebraic / den_cur : inf,
          den_ref > 0.0 ? algebraic * algebraic / den_ref : inf};
}

inline bool sample_has_collinear_triple(const std::vector<Eigen::Vector2d>& pts,
                                        const std::vector<int>& idx) {
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = i + 1; j < idx.size(); ++j)
      for (std::size_t l = j + 1; l < idx.size(); ++l) {
        const Eigen::Vector2d ab = pts[idx[j]] - pts[idx[i]];
        const Eigen::Vector2d ac = pts[idx[l]] - pts[idx[i]];
        if (std::abs(ab.x() * ac.y() - ab.y() * ac.x()) < 1e-9) return true;
      }
  return false;
}

inline void sample_unique(Rng& rng, int n, int m, std::vector<int>* out) {
  out->clear();
  while (static_cast<int>(out->size()) < m) {
    const int candidate = static_cast<int>(rng.uniform_index(n));
    bool seen = false;
    for (int v : *out) seen |= (v == candidate);
    if (!seen) out->push_back(candidate);
  }
}

inline int required_iterations(double inlier_ratio, int sample_size,
                               double confidence) {
  const double w = std::clamp(inlier_ratio, 1e-9, 1.0 - 1e-12);
  const double p_sample = std::pow(w, sample_size);
  if (p_sample >= 1.0 - 1e-12) return 1;
  return static_cast<int>(
      std::ceil(std::log(1.0 - confidence) / std::log(1.0 - p_sample)));
}

}  // namespace detail

/// RANSAC homography with normalized DLT on minimal 4-point samples, ranked
/// by inlier count under the symmetric transfer error. Deterministic for a
/// fixed seed.
inline RansacResult estimate_homography_ransac(const Correspondences& c,
                                               const RansacOptions& opt = {}) {
  const int n = static_cast<int>(c.size());
  if (n < 4)
    throw InsufficientCorrespondences(
        "estimate_homography_ransac: need at least 4 correspondences, got " +
        std::to_string(n));

  std::vector<Eigen::Vector2d> ref_n, cur_n;
  const Eigen::Matrix3d t_ref = detail::normalize_points(c, true, &ref_n);
  const Eigen::Matrix3d t_cur = detail::normalize_points(c, false, &cur_n);
  const Eigen::Matrix3d t_cur_inv = t_cur.inverse();

  const double thr_sq = opt.inlier_threshold_px * opt.inlier_threshold_px;
  Rng rng(opt.seed);
  std::vector<int> sample;
  RansacResult best;
  best.inlier_count = -1;

  // With exactly 4 correspondences the sample is fixed; one iteration suffices.
  const int max_iter = n == 4 ? 1 : opt.iterations;
  for (int iter = 0; iter < max_iter; ++iter) {
    if (n == 4)
      sample = {0, 1, 2, 3};
    else
      detail::sample_unique(rng, n, 4, &sample);
    if (detail::sample_has_collinear_triple(ref_n, sample) ||
        detail::sample_has_collinear_triple(cur_n, sample))
      continue;

    const Eigen::Matrix3d h_norm = detail::homography_dlt(ref_n, cur_n, sample);
    const Eigen::Matrix3d h = t_cur_inv * h_norm * t_ref;
    if (!h.allFinite() || std::abs(h.determinant()) < 1e-15) continue;
    const Eigen::Matrix3d h_inv = h.inverse();

    std::vector<bool> mask(n, false);
    int count = 0;
    for (int i = 0; i < n; ++i) {
      const auto d = detail::homography_transfer_sq(h, h_inv, c[i]);
      if (d[0] <= thr_sq && d[1] <= thr_sq) {
        mask[i] = true;
        ++count;
      }
    }
    if (count > best.inlier_count) {
      best.model = h;
      best.inlier_mask = std::move(mask);
      best.inlier_count = count;
      if (iter + 1 >= detail::required_iterations(
                          static_cast<double>(count) / n, 4, opt.confidence))
        break;
    }
  }

  if (best.inlier_count < 0)
    throw DegenerateConfiguration(
        "estimate_homography_ransac: no valid minimal sample (collinear "
        "configuration)");
  return best;
}

/// RANSAC fundamental matrix via the normalized 8-point algorithm with rank-2
/// enforcement, ranked by inlier count under symmetric epipolar distance.
inline RansacResult estimate_fundamental_ransac(const Correspondences& c,
                                                const RansacOptions& opt = {}) {
  const int n = static_cast<int>(c.size());
  if (n < 8)
    throw InsufficientCorrespondences(
        "estimate_fundamental_ransac: need at least 8 correspondences, got " +
        std::to_string(n));

  std::vector<Eigen::Vector2d> ref_n, cur_n;
  const Eigen::Matrix3d t_ref = detail::normalize_points(c, true, &ref_n);
  const Eigen::Matrix3d t_cur = detail::normalize_points(c, false, &cur_n);

  const double thr_sq = opt.inlier_threshold_px * opt.inlier_threshold_px;
  Rng rng(opt.seed);
  std::vector<int> sample;
  RansacResult best;
  best.inlier_count = -1;

  const int max_iter = n == 8 ? 1 : opt.iterations;
  for (int iter = 0; iter < max_iter; ++iter) {
    if (n == 8)
      sample = {0, 1, 2, 3, 4, 5, 6, 7};
    else
      detail::sample_unique(rng, n, 8, &sample);

    const Eigen::Matrix3d f_norm =
        detail::fundamental_eight_point(ref_n, cur_n, sample);
    const Eigen::Matrix3d f = t_cur.transpose() * f_norm * t_ref;
    if (!f.allFinite() || f.norm() < 1e-15) continue;

    std::vector<bool> mask(n, false);
    int count = 0;
    for (int i = 0; i < n; ++i) {
      const auto d = detail::epipolar_distance_sq(f, c[i]);
      if (d[0] <= thr_sq && d[1] <= thr_sq) {
        mask[i] = true;
        ++count;
      }
    }
    if (count > best.inlier_count) {
      best.model = f;
      best.inlier_mask = std::move(mask);
      best.inlier_count = count;
      if (iter + 1 >= detail::required_iterations(
                          static_cast<double>(count) / n, 8, opt.confidence))
        break;
    }
  }

  if (best.inlier_count < 0)
    throw DegenerateConfiguration(
        "estimate_fundamental_ransac: no valid model found");
  return best;
}

/// Truncated chi-square scores of both models over the full correspondence
/// set and the resulting selection ratio r_h = s_h / (s_h + s_f).
/// Outlier contributions (per direction, above the respective chi-square
/// limit) are clamped to zero.
inline TwoViewScore score_models(const Correspondences& c,
                                 const Eigen::Matrix3d& h_matrix,
                                 const Eigen::Matrix3d& f_matrix,
                                 const CameraIntrinsics& k,
                                 const ScoreOptions& opt = {}) {
  if (c.empty()) throw ZeroScores("score_models: empty correspondence set");
  for (const auto& m : c)
    if (!k.contains(m.ref) || !k.contains(m.cur))
      throw InvalidArgument("score_models: correspondence outside image bounds");

  const double inv_sigma_sq = 1.0 / (opt.sigma_px * opt.sigma_px);
  const Eigen::Matrix3d h_inv = h_matrix.inverse();

  TwoViewScore score;
  for (const auto& m : c) {
    const auto transfer = detail::homography_transfer_sq(h_matrix, h_inv, m);
    for (double d_sq : transfer) {
      const double chi2 = d_sq * inv_sigma_sq;
      if (chi2 <= kChi2Limit2Dof) score.s_h += kChi2Limit2Dof - chi2;
    }
    const auto epipolar = detail::epipolar_distance_sq(f_matrix, m);
    for (double d_sq : epipolar) {
      const double chi2 = d_sq * inv_sigma_sq;
      if (chi2 <= kChi2Limit1Dof) score.s_f += kChi2Limit2Dof - chi2;
    }
  }

  if (score.s_h + score.s_f <= 0.0)
    throw ZeroScores("score_models: both model scores are zero");
  score.r_h = score.s_h / (score.s_h + score.s_f);
  score.selected_model = score.r_h > opt.selection_threshold
                             ? ModelChoice::Homography
                             : ModelChoice::Fundamental;
  return score;
}

/// Ratio of Eq-style paired scores; exposed separately so the selection rule
/// can be exercised on raw score values.
inline double score_ratio(double s_h, double s_f) {
  if (s_h + s_f <= 0.0) throw ZeroScores("score_ratio: zero scores");
  return s_h / (s_h + s_f);
}

/// Decomposes E = K^T F K into the four (R, t) hypotheses and picks the one
/// with strictly the most cheirality inliers (margin of at least 2).
/// Translation is returned as a unit direction; monocular scale is not
/// observable.
inline RelativePose recover_pose_from_fundamental(const Eigen::Matrix3d& f,
                                                  const Correspondences& c,
                                                  const CameraIntrinsics& k) {
  if (c.size() < 5)
    throw InsufficientCorrespondences(
        "recover_pose_from_fundamental: need at least 5 correspondences");

  const Eigen::Matrix3d km = k.matrix();
  const Eigen::Matrix3d e = km.transpose() * f * km;
  if (e.norm() < 1e-12)
    throw DegenerateBaseline("recover_pose_from_fundamental: essential matrix "
                             "vanishes (zero baseline)");

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      e, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  if (u.determinant() < 0.0) u = -u;
  if (v.determinant() < 0.0) v = -v;

  Eigen::Matrix3d w = Eigen::Matrix3d::Zero();
  w(0, 1) = -1.0;
  w(1, 0) = 1.0;
  w(2, 2) = 1.0;

  const Eigen::Matrix3d r1 = u * w * v.transpose();
  const Eigen::Matrix3d r2 = u * w.transpose() * v.transpose();
  const Eigen::Vector3d t = u.col(2);

  const std::array<std::pair<Eigen::Matrix3d, Eigen::Vector3d>, 4> hypotheses{{
      {r1, t},
      {r1, -t},
      {r2, t},
      {r2, -t},
  }};

  int best = -1, best_count = -1, second_count = -1;
  for (int h = 0; h < 4; ++h) {
    const PoseSE3 pose(Eigen::Quaterniond(hypotheses[h].first),
                       hypotheses[h].second);
    int count = 0;
    for (const auto& m : c) {
      try {
        triangulate_two_view(m.ref, m.cur, pose, k);
        ++count;
      } catch (const Error&) {
        // behind a camera or degenerate for this hypothesis
      }
    }
    if (count > best_count) {
      second_count = best_count;
      best_count = count;
      best = h;
    } else if (count > second_count) {
      second_count = count;
    }
  }

  if (best_count <= 0 || best_count - second_count < 2)
    throw CheiralityAmbiguous(
        "recover_pose_from_fundamental: no hypothesis wins cheirality by the "
        "required margin");

  RelativePose pose;
  pose.rotation = Eigen::Quaterniond(hypotheses[best].first);
  pose.translation_direction = hypotheses[best].second.normalized();
  pose.num_cheirality_inliers = best_count;
  return pose;
}

}  // namespace agrimap
