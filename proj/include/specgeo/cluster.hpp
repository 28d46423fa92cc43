#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "specgeo/error.hpp"
#include "specgeo/numerics/eigen.hpp"
#include "specgeo/numerics/rng.hpp"

namespace specgeo {

inline constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();

inline double angle_between(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) fail(ErrorKind::DimensionMismatch, "vectors differ in length");
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) fail(ErrorKind::ZeroVector, "angle with a zero vector");
  return std::acos(std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0));
}

struct OCSCertificate {
  Matrix basis;  // columns e_1..e_K
  double theta = 0.0;
  double alpha = 1.0;
  std::vector<double> per_cluster_alpha;
};

namespace detail {

inline std::size_t check_labels(const Matrix& points, std::span<const std::size_t> labels) {
  if (static_cast<std::size_t>(points.rows()) != labels.size())
    fail(ErrorKind::LengthMismatch, "points and labels differ in length");
  const auto K = static_cast<std::size_t>(points.cols());
  std::vector<std::size_t> count(K, 0);
  for (std::size_t z : labels) {
    if (z >= K) fail(ErrorKind::BadParameter, "label " + std::to_string(z) + " out of range for K=" + std::to_string(K));
    ++count[z];
  }
  for (std::size_t m = 0; m < K; ++m)
    if (count[m] == 0) fail(ErrorKind::EmptyCluster, "no points carry label " + std::to_string(m));
  return K;
}

inline void check_theta(double theta) {
  if (!(theta > 0.0 && theta < std::numbers::pi / 4))
    fail(ErrorKind::BadTheta, "theta must lie in (0, pi/4)");
}

// True when row i is strictly within theta of the unit vector e.
inline bool within_cone(const Matrix& points, Eigen::Index i, const Vector& e, double theta) {
  const double nr = points.row(i).norm();
  if (nr == 0.0) return false;
  const double c = std::clamp(points.row(i).dot(e) / (nr * e.norm()), -1.0, 1.0);
  return std::acos(c) < theta;
}

}  // namespace detail

inline OCSCertificate ocs_alpha(const Matrix& points, std::span<const std::size_t> labels, const Matrix& basis,
                                double theta) {
  const std::size_t K = detail::check_labels(points, labels);
  detail::check_theta(theta);
  if (basis.rows() != points.cols() || static_cast<std::size_t>(basis.cols()) != K)
    fail(ErrorKind::DimensionMismatch, "basis must be K x K");
  std::vector<std::size_t> size(K, 0), inside(K, 0);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const std::size_t z = labels[static_cast<std::size_t>(i)];
    ++size[z];
    if (detail::within_cone(points, i, basis.col(static_cast<Eigen::Index>(z)), theta)) ++inside[z];
  }
  OCSCertificate c;
  c.basis = basis;
  c.theta = theta;
  c.alpha = 0.0;
  c.per_cluster_alpha.resize(K);
  for (std::size_t m = 0; m < K; ++m) {
    c.per_cluster_alpha[m] = 1.0 - static_cast<double>(inside[m]) / static_cast<double>(size[m]);
    c.alpha = std::max(c.alpha, c.per_cluster_alpha[m]);
  }
  return c;
}

/// Basis from the per-cluster mean directions, snapped to the nearest
/// orthonormal matrix. Every assignment of basis vectors to labels is tried
/// for K <= 8 and the smallest alpha is kept.
inline OCSCertificate ocs_search(const Matrix& points, std::span<const std::size_t> labels, double theta) {
  const std::size_t K = detail::check_labels(points, labels);
  detail::check_theta(theta);
  const auto Ki = static_cast<Eigen::Index>(K);
  Matrix means = Matrix::Zero(Ki, Ki);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double nr = points.row(i).norm();
    if (nr > 0.0) means.col(static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)])) += points.row(i).transpose() / nr;
  }
  for (Eigen::Index m = 0; m < Ki; ++m) {
    const double nm = means.col(m).norm();
    if (nm > 0.0) means.col(m) /= nm;
  }
  Eigen::JacobiSVD<Matrix> svd(means, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector sv = svd.singularValues();
  if (sv.size() == 0 || sv[Ki - 1] <= 1e-12 * std::max(1.0, sv[0]))
    fail(ErrorKind::DegenerateMeans, "cluster mean directions are linearly dependent");
  const Matrix polar = svd.matrixU() * svd.matrixV().transpose();

  OCSCertificate best = ocs_alpha(points, labels, polar, theta);
  if (K > 8) return best;
  std::vector<Eigen::Index> perm(K);
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  while (std::next_permutation(perm.begin(), perm.end())) {
    Matrix b(Ki, Ki);
    for (Eigen::Index m = 0; m < Ki; ++m) b.col(m) = polar.col(perm[static_cast<std::size_t>(m)]);
    OCSCertificate c = ocs_alpha(points, labels, b, theta);
    if (c.alpha < best.alpha) best = std::move(c);
  }
  return best;
}

/// Monte Carlo fraction of diverse K-tuples (one point per label) whose
/// pairwise angles all lie within theta/2 of a right angle.
inline double theta_orthogonal_fraction(const Matrix& points, std::span<const std::size_t> labels, double theta,
                                        std::size_t n_tuples, Rng& rng) {
  const std::size_t K = detail::check_labels(points, labels);
  if (n_tuples == 0) fail(ErrorKind::BadParameter, "need at least one tuple");
  std::vector<std::vector<Eigen::Index>> members(K);
  for (Eigen::Index i = 0; i < points.rows(); ++i) members[labels[static_cast<std::size_t>(i)]].push_back(i);
  const double half_pi = std::numbers::pi / 2;
  std::vector<Eigen::Index> pick(K);
  std::size_t good = 0;
  for (std::size_t t = 0; t < n_tuples; ++t) {
    for (std::size_t m = 0; m < K; ++m) pick[m] = members[m][rng.below(members[m].size())];
    bool ok = true;
    for (std::size_t a = 0; a < K && ok; ++a) {
      const double na = points.row(pick[a]).norm();
      for (std::size_t b = a + 1; b < K && ok; ++b) {
        const double nb = points.row(pick[b]).norm();
        if (na == 0.0 || nb == 0.0) {
          ok = false;
          break;
        }
        const double c = std::clamp(points.row(pick[a]).dot(points.row(pick[b])) / (na * nb), -1.0, 1.0);
        ok = std::abs(std::acos(c) - half_pi) <= theta / 2;
      }
    }
    if (ok) ++good;
  }
  return static_cast<double>(good) / static_cast<double>(n_tuples);
}

struct KMeansState {
  Matrix means;  // columns a_1..a_K, stored as the plain averages
  std::vector<std::size_t> assignments;
  std::size_t iteration = 0;
};

/// Rows scaled to unit length. Zero rows stay zero and are reported.
inline Matrix normalize_rows(const Matrix& points, std::vector<std::size_t>* zero_rows = nullptr) {
  Matrix y = points;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const double nr = y.row(i).norm();
    if (nr > 0.0)
      y.row(i) /= nr;
    else if (zero_rows)
      zero_rows->push_back(static_cast<std::size_t>(i));
  }
  return y;
}

/// One assignment step followed by one mean step. Ties go to the lowest
/// index; a cluster that receives no points keeps its previous mean.
inline KMeansState kmeans_update(const KMeansState& state, const Matrix& y) {
  const Eigen::Index K = state.means.cols();
  if (state.means.rows() != y.cols()) fail(ErrorKind::DimensionMismatch, "means and points differ in dimension");
  KMeansState next;
  next.iteration = state.iteration + 1;
  next.assignments.assign(static_cast<std::size_t>(y.rows()), kUnassigned);
  Matrix sums = Matrix::Zero(state.means.rows(), K);
  std::vector<std::size_t> count(static_cast<std::size_t>(K), 0);
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    Eigen::Index arg = 0;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index l = 0; l < K; ++l) {
      const double d = (state.means.col(l) - y.row(i).transpose()).squaredNorm();
      if (d < best) {
        best = d;
        arg = l;
      }
    }
    next.assignments[static_cast<std::size_t>(i)] = static_cast<std::size_t>(arg);
    sums.col(arg) += y.row(i).transpose();
    ++count[static_cast<std::size_t>(arg)];
  }
  next.means = state.means;
  for (Eigen::Index m = 0; m < K; ++m)
    if (count[static_cast<std::size_t>(m)] > 0) next.means.col(m) = sums.col(m) / static_cast<double>(count[static_cast<std::size_t>(m)]);
  return next;
}

/// Haar-distributed orthogonal K x K matrix: QR of a Gaussian matrix with
/// the column signs fixed by the diagonal of R.
inline Matrix random_orthonormal(Eigen::Index K, Rng& rng) {
  Matrix g(K, K);
  for (Eigen::Index j = 0; j < K; ++j)
    for (Eigen::Index i = 0; i < K; ++i) g(i, j) = rng.gaussian();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(K, K);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < K; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

struct KMeansResult {
  std::vector<std::size_t> assignments;  // kUnassigned for dropped zero rows
  std::size_t n_iterations = 0;
  Matrix initialization;
  std::vector<std::size_t> dropped;
};

inline KMeansResult kmeans_run(const Matrix& embedded, Eigen::Index K, Rng& rng, std::size_t max_iter = 100) {
  if (K < 1 || embedded.cols() != K) fail(ErrorKind::DimensionMismatch, "embedding dimension must equal K");
  KMeansResult out;
  const Matrix all = normalize_rows(embedded, &out.dropped);
  std::vector<Eigen::Index> keep;
  keep.reserve(static_cast<std::size_t>(all.rows()));
  for (Eigen::Index i = 0, d = 0; i < all.rows(); ++i) {
    if (d < static_cast<Eigen::Index>(out.dropped.size()) && out.dropped[static_cast<std::size_t>(d)] == static_cast<std::size_t>(i)) {
      ++d;
      continue;
    }
    keep.push_back(i);
  }
  Matrix y(static_cast<Eigen::Index>(keep.size()), K);
  for (std::size_t r = 0; r < keep.size(); ++r) y.row(static_cast<Eigen::Index>(r)) = all.row(keep[r]);

  KMeansState state;
  state.means = random_orthonormal(K, rng);
  out.initialization = state.means;
  while (state.iteration < max_iter) {
    KMeansState next = kmeans_update(state, y);
    const bool fixed = next.assignments == state.assignments && next.means == state.means;
    state = std::move(next);
    if (fixed) break;
  }
  out.n_iterations = state.iteration;
  out.assignments.assign(static_cast<std::size_t>(embedded.rows()), kUnassigned);
  for (std::size_t r = 0; r < keep.size(); ++r) out.assignments[static_cast<std::size_t>(keep[r])] = state.assignments[r];
  return out;
}

/// Relabeling of the assignment alphabet that agrees with `labels` most
/// often: exhaustive over permutations for K <= 8, greedy on the agreement
/// table above that. Entry a is the label matched to assignment a.
inline std::vector<std::size_t> label_matching(std::span<const std::size_t> assignments,
                                               std::span<const std::size_t> labels) {
  if (assignments.size() != labels.size()) fail(ErrorKind::LengthMismatch, "assignments and labels differ in length");
  std::size_t K = 0;
  for (std::size_t z : labels) K = std::max(K, z + 1);
  for (std::size_t a : assignments)
    if (a != kUnassigned) K = std::max(K, a + 1);
  std::vector<std::vector<std::size_t>> agree(K, std::vector<std::size_t>(K, 0));
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (assignments[i] != kUnassigned) ++agree[assignments[i]][labels[i]];

  std::vector<std::size_t> best(K);
  std::iota(best.begin(), best.end(), std::size_t{0});
  if (K <= 8) {
    std::vector<std::size_t> perm = best;
    std::size_t best_hit = 0;
    bool first = true;
    do {
      std::size_t hit = 0;
      for (std::size_t a = 0; a < K; ++a) hit += agree[a][perm[a]];
      if (first || hit > best_hit) {
        best_hit = hit;
        best = perm;
        first = false;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }
  std::vector<bool> used_a(K, false), used_l(K, false);
  for (std::size_t step = 0; step < K; ++step) {
    std::size_t ba = 0, bl = 0, bv = 0;
    bool found = false;
    for (std::size_t a = 0; a < K; ++a) {
      if (used_a[a]) continue;
      for (std::size_t l = 0; l < K; ++l) {
        if (used_l[l]) continue;
        if (!found || agree[a][l] > bv) {
          ba = a, bl = l, bv = agree[a][l];
          found = true;
        }
      }
    }
    used_a[ba] = used_l[bl] = true;
    best[ba] = bl;
  }
  return best;
}

/// Smallest mismatch fraction over relabelings of the assignment alphabet.
/// Unassigned entries always count as mismatches.
inline double misclustering(std::span<const std::size_t> assignments, std::span<const std::size_t> labels) {
  const std::vector<std::size_t> match = label_matching(assignments, labels);
  if (labels.empty()) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (assignments[i] == kUnassigned || match[assignments[i]] != labels[i]) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

/// Both cone-separation inequalities for every cluster, inclusive.
inline bool proposition1_condition(double alpha, double theta, std::span<const std::size_t> cluster_sizes, std::size_t n) {
  if (!(alpha >= 0.0 && alpha < 1.0) || !(theta >= 0.0) || n == 0)
    fail(ErrorKind::BadParameter, "alpha must lie in [0,1), theta >= 0, n > 0");
  const double an = alpha * static_cast<double>(n);
  const double s8 = std::sin(std::numbers::pi / 8);
  for (std::size_t zs : cluster_sizes) {
    const double z = static_cast<double>(zs);
    if (z == 0.0) return false;
    const double first = (an + (1.0 - alpha) * z * std::sin(theta)) / ((1.0 - alpha) * z);
    const double second = ((1.0 - alpha) * z * std::cos(theta) - an) / (z + an);
    if (!(first <= s8) || !(second >= 0.5)) return false;
  }
  return true;
}

}  // namespace specgeo
