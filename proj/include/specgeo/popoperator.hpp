#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "specgeo/density.hpp"
#include "specgeo/error.hpp"
#include "specgeo/kernel.hpp"
#include "specgeo/mixture.hpp"
#include "specgeo/numerics/eigen.hpp"
#include "specgeo/numerics/quadrature.hpp"
#include "specgeo/params.hpp"

namespace specgeo {

inline constexpr std::size_t kDefaultGridNodes = 601;

/// Simpson grid over the hull of the (truncated) supports of `dist`.
inline QuadratureGrid operator_grid(const Mixture& dist, std::size_t n_nodes = kDefaultGridNodes) {
  return make_grid(dist.support(), n_nodes, QuadratureRule::simpson);
}

inline QuadratureGrid operator_grid(const Component& dist, std::size_t n_nodes = kDefaultGridNodes) {
  return make_grid(dist.support(), n_nodes, QuadratureRule::simpson);
}

struct OperatorOptions {
  double r_floor = kDefaultRFloor;
  // Build q from the same quadrature as the operator, which makes the top
  // eigenvalue exactly 1. Otherwise q comes from the normalized kernel.
  bool grid_consistent_density = true;
  bool full_spectrum = true;  // otherwise only the leading top_k pairs
  Eigen::Index top_k = 0;
};

/// A kernel integral operator against a distribution, written in the
/// coordinates f -> f * sqrt(p w) so that it becomes a symmetric matrix.
struct DiscretizedOperator {
  QuadratureGrid grid;  // nodes where the density is positive
  Vector density;       // p at the nodes
  Vector scale;         // sqrt(p w)
  Vector q;             // square-root kernelized density at the nodes
  Matrix matrix;
  SymEigen eigen;

  Eigen::Index size() const noexcept { return matrix.rows(); }
  const Vector& values() const noexcept { return eigen.values; }
};

namespace detail {

inline QuadratureGrid positive_part(const QuadratureGrid& grid, const Mixture& dist, Vector& density) {
  QuadratureGrid kept;
  kept.domain = grid.domain;
  std::vector<double> p;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = dist.pdf(grid.nodes[i]);
    if (v > 0.0) {
      kept.nodes.push_back(grid.nodes[i]);
      kept.weights.push_back(grid.weights[i]);
      p.push_back(v);
    }
  }
  if (kept.size() < 2) fail(ErrorKind::GridTooCoarse, "fewer than two grid nodes carry probability mass");
  density = Eigen::Map<const Vector>(p.data(), static_cast<Eigen::Index>(p.size()));
  return kept;
}

inline Matrix grid_kernel(const Kernel& k, const QuadratureGrid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Matrix km(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j)
      km(i, j) = km(j, i) = k(grid.nodes[static_cast<std::size_t>(i)], grid.nodes[static_cast<std::size_t>(j)]);
  return km;
}

inline Vector grid_weights(const QuadratureGrid& grid) {
  return Eigen::Map<const Vector>(grid.weights.data(), static_cast<Eigen::Index>(grid.size()));
}

inline DiscretizedOperator assemble(const Matrix& km, QuadratureGrid grid, Vector density, Vector q,
                                    const OperatorOptions& opt) {
  for (Eigen::Index i = 0; i < q.size(); ++i)
    if (!(q[i] >= opt.r_floor))
      fail(ErrorKind::DensityUnderflow, "kernelized density " + std::to_string(q[i]) + " below floor at x = " +
                                            std::to_string(grid.nodes[static_cast<std::size_t>(i)]));
  DiscretizedOperator op;
  op.scale = (density.array() * grid_weights(grid).array()).sqrt().matrix();
  const Vector f = op.scale.cwiseQuotient(q);
  op.matrix = f.asDiagonal() * km * f.asDiagonal();
  op.matrix = 0.5 * (op.matrix + op.matrix.transpose()).eval();
  op.grid = std::move(grid);
  op.density = std::move(density);
  op.q = std::move(q);
  if (opt.full_spectrum)
    op.eigen = sym_eigen(op.matrix);
  else
    op.eigen = sym_eigen(op.matrix, std::max<Eigen::Index>(opt.top_k, 1));
  return op;
}

}  // namespace detail

/// The normalized operator f -> integral of k(., y) f(y) / (q(.) q(y)) dP(y)
/// of `dist` on `grid`. With the default options q is the grid quadrature of
/// the kernel against P, so q itself is an exact eigenvector with eigenvalue 1.
inline DiscretizedOperator discretize_operator(const Kernel& k, const Mixture& dist, const QuadratureGrid& grid,
                                               const OperatorOptions& opt = {}) {
  require_population_kernel(k);
  Vector density;
  QuadratureGrid kept = detail::positive_part(grid, dist, density);
  const Matrix km = detail::grid_kernel(k, kept);
  Vector q;
  if (opt.grid_consistent_density) {
    const Vector pw = density.cwiseProduct(detail::grid_weights(kept));
    q = (km * pw).cwiseSqrt();
  } else {
    const KernelizedDensity qd = KernelizedDensity::make(k, dist);
    q.resize(density.size());
    for (Eigen::Index i = 0; i < q.size(); ++i) q[i] = qd(kept.nodes[static_cast<std::size_t>(i)]);
  }
  return detail::assemble(km, std::move(kept), std::move(density), std::move(q), opt);
}

/// Discretization of the operator of a given normalized kernel (q taken from
/// the kernel's left density).
inline DiscretizedOperator discretize_operator(const NormalizedKernel& nk, const Mixture& dist,
                                               const QuadratureGrid& grid, OperatorOptions opt = {}) {
  Vector density;
  QuadratureGrid kept = detail::positive_part(grid, dist, density);
  const Matrix km = detail::grid_kernel(nk.kernel(), kept);
  Vector q(density.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) q[i] = nk.left()(kept.nodes[static_cast<std::size_t>(i)]);
  opt.grid_consistent_density = false;
  return detail::assemble(km, std::move(kept), std::move(density), std::move(q), opt);
}

/// Throws GridTooCoarse when doubling the node count moves any of the
/// leading `top_k` eigenvalues by more than `tolerance`. Returns the largest
/// movement.
inline double check_refinement(const Kernel& k, const Mixture& dist, std::size_t n_nodes, Eigen::Index top_k,
                               double tolerance = 1e-4) {
  OperatorOptions opt;
  opt.full_spectrum = false;
  opt.top_k = top_k;
  const auto coarse = discretize_operator(k, dist, operator_grid(dist, n_nodes), opt);
  const auto fine = discretize_operator(k, dist, operator_grid(dist, 2 * n_nodes - 1), opt);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < top_k; ++i) worst = std::max(worst, std::abs(coarse.values()[i] - fine.values()[i]));
  if (worst > tolerance)
    fail(ErrorKind::GridTooCoarse, "doubling the grid moved a leading eigenvalue by " + std::to_string(worst));
  return worst;
}

struct Subspace {
  Matrix basis;  // orthonormal columns
  // Set when the eigengap below the subspace is (numerically) closed:
  // (lambda_K, lambda_{K+1}).
  std::optional<std::pair<double, double>> eigengap_collapse;

  Eigen::Index dim() const noexcept { return basis.cols(); }
};

/// Modified Gram-Schmidt on the columns of `v`.
inline Matrix orthonormalize(const Matrix& v) {
  Matrix b = v;
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index i = 0; i < j; ++i) b.col(j) -= b.col(i).dot(b.col(j)) * b.col(i);
    const double n = b.col(j).norm();
    if (!(n > 0.0)) fail(ErrorKind::RankDeficient, "zero vector during orthonormalization");
    b.col(j) /= n;
  }
  return b;
}

/// span{q_1, ..., q_K} in the operator's coordinates, with each q_m the
/// grid quadrature of the kernel against P_m.
inline Subspace subspace_Q(const Mixture& mix, const Kernel& k, const DiscretizedOperator& op) {
  const auto n = op.size();
  const auto K = static_cast<Eigen::Index>(mix.size());
  const Matrix km = detail::grid_kernel(k, op.grid);
  const Vector w = detail::grid_weights(op.grid);
  Matrix v(n, K);
  for (Eigen::Index m = 0; m < K; ++m) {
    Vector pw(n);
    for (Eigen::Index i = 0; i < n; ++i)
      pw[i] = mix.components[static_cast<std::size_t>(m)].pdf(op.grid.nodes[static_cast<std::size_t>(i)]) * w[i];
    v.col(m) = op.scale.cwiseProduct((km * pw).cwiseSqrt());
  }
  const Vector g = sym_eigenvalues(v.transpose() * v);
  const double cond = g[K - 1] > 0.0 ? g[0] / g[K - 1] : std::numeric_limits<double>::infinity();
  if (cond > 1e12)
    fail(ErrorKind::RankDeficient, "Gram matrix of the kernelized densities has condition " + std::to_string(cond));
  return {orthonormalize(v), std::nullopt};
}

/// Leading-K eigenvectors of the operator.
inline Subspace subspace_R(const DiscretizedOperator& op, Eigen::Index K) {
  if (K < 1 || K > op.eigen.vectors.cols()) fail(ErrorKind::BadParameter, "subspace dimension out of range");
  Subspace s{op.eigen.vectors.leftCols(K), std::nullopt};
  if (K < op.values().size()) {
    const double gap = op.values()[K - 1] - op.values()[K];
    if (gap <= 1e-10) s.eigengap_collapse = std::make_pair(op.values()[K - 1], op.values()[K]);
  }
  return s;
}

/// Frobenius norm of the difference of the orthogonal projectors, using
/// ||P_Q - P_R||^2 = dim Q + dim R - 2 ||Q^T R||^2.
inline double rho_distance(const Subspace& q, const Subspace& r) {
  if (q.basis.rows() != r.basis.rows())
    fail(ErrorKind::DimensionMismatch, "subspaces live in spaces of different dimension");
  const double cross = (q.basis.transpose() * r.basis).squaredNorm();
  const double d2 = static_cast<double>(q.dim() + r.dim()) - 2.0 * cross;
  return std::sqrt(std::max(0.0, d2));
}

struct PopulationCheckOptions {
  std::size_t grid_nodes = kDefaultGridNodes;
  bool check_refinement = false;
  ParamMethod params{};
};

struct Theorem1Report {
  Diagnostics diagnostics;
  double rho = 0.0;
  double bound = 0.0;
  double hypothesis_threshold = 0.0;  // Gamma^2 / (576 sqrt(12 + b_max))
  bool hypothesis_ok = false;
  bool holds = true;  // rho <= bound whenever the hypothesis holds
};

struct LemmaReport {
  double hs_G = 0.0;
  double hs_G_bound = 0.0;
  double sigma_min_A = 0.0;
  double sigma_min_A_bound = 0.0;
  double sigma_max_B = 0.0;
  double sigma_max_B_bound = 0.0;
  double sep = 0.0;
  double sep_bound = 0.0;
  bool hypothesis_ok = false;
  bool hs_ok = false;
  bool a_ok = false;
  bool b_ok = false;
  bool sep_ok = false;  // only asserted under the hypothesis
};

/// Operator, subspaces and distance for one mixture, shared by the
/// theorem and lemma reports.
struct PopulationAnalysis {
  DiscretizedOperator op;
  Subspace Q;
  Subspace R;
  double rho = 0.0;
};

inline PopulationAnalysis analyze_population(const Mixture& mix, const Kernel& k,
                                             const PopulationCheckOptions& opt = {}) {
  if (mix.size() < 2) fail(ErrorKind::BadParameter, "population checks need K >= 2");
  const auto K = static_cast<Eigen::Index>(mix.size());
  if (opt.check_refinement) check_refinement(k, mix, opt.grid_nodes, K);
  PopulationAnalysis a;
  a.op = discretize_operator(k, mix, operator_grid(mix, opt.grid_nodes));
  a.Q = subspace_Q(mix, k, a.op);
  a.R = subspace_R(a.op, K);
  a.rho = rho_distance(a.Q, a.R);
  return a;
}

inline double theorem1_threshold(const Diagnostics& d) {
  return d.gamma * d.gamma / (576.0 * std::sqrt(12.0 + d.b_max));
}

inline Theorem1Report theorem1_check(const Mixture& mix, const Kernel& k, const Diagnostics& d,
                                     const PopulationAnalysis& a) {
  Theorem1Report r;
  r.diagnostics = d;
  r.rho = a.rho;
  r.bound = 16.0 * std::sqrt(12.0 + d.b_max) * d.phi;
  r.hypothesis_threshold = theorem1_threshold(d);
  r.hypothesis_ok = d.phi <= r.hypothesis_threshold;
  r.holds = !r.hypothesis_ok || r.rho <= r.bound;
  (void)mix;
  (void)k;
  return r;
}

inline Theorem1Report theorem1_check(const Mixture& mix, const Kernel& k, const PopulationCheckOptions& opt = {}) {
  const Diagnostics d = difficulty(mix, k, opt.params);
  return theorem1_check(mix, k, d, analyze_population(mix, k, opt));
}

/// Finite-dimensional versions of the Hilbert-Schmidt and spectral
/// separation bounds: with B_Q an orthonormal basis of Q and C one of its
/// complement on the grid, A = B_Q^T M B_Q, G = (I - B_Q B_Q^T) M B_Q and
/// B = C^T M C.
inline LemmaReport lemma_checks(const Mixture& mix, const Diagnostics& d, const PopulationAnalysis& a) {
  const Matrix& m = a.op.matrix;
  const Matrix& bq = a.Q.basis;
  const Eigen::Index n = m.rows();
  const Eigen::Index K = bq.cols();
  const Matrix mbq = m * bq;
  const Matrix amat = bq.transpose() * mbq;
  const Matrix g = mbq - bq * (bq.transpose() * mbq);
  Eigen::HouseholderQR<Matrix> qr(bq);
  const Matrix full_q = qr.householderQ();
  const Matrix c = full_q.rightCols(n - K);
  const Matrix bmat = c.transpose() * m * c;

  const Vector a_vals = sym_eigenvalues(0.5 * (amat + amat.transpose()));
  const Vector b_vals = sym_eigenvalues(0.5 * (bmat + bmat.transpose()));

  LemmaReport r;
  const double overlap = std::sqrt(d.s_max + d.coupling);
  const auto Kd = static_cast<double>(mix.size());
  r.hs_G = g.norm();
  r.hs_G_bound = std::sqrt(Kd * (12.0 + d.b_max)) / d.w_min * overlap;
  r.sigma_min_A = a_vals.cwiseAbs().minCoeff();
  r.sigma_min_A_bound = 1.0 - 13.0 * Kd * overlap;
  r.sigma_max_B = b_vals.cwiseAbs().maxCoeff();
  r.sigma_max_B_bound = 1.0 - d.gamma * d.gamma / 8.0 + 3.0 * overlap / d.w_min;
  double sep = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < a_vals.size(); ++i)
    for (Eigen::Index j = 0; j < b_vals.size(); ++j) sep = std::min(sep, std::abs(a_vals[i] - b_vals[j]));
  r.sep = sep;
  r.sep_bound = d.gamma * d.gamma / 16.0;
  r.hypothesis_ok = d.phi <= theorem1_threshold(d);
  r.hs_ok = r.hs_G <= r.hs_G_bound;
  r.a_ok = r.sigma_min_A >= r.sigma_min_A_bound;
  r.b_ok = r.sigma_max_B <= r.sigma_max_B_bound;
  r.sep_ok = !r.hypothesis_ok || r.sep >= r.sep_bound;
  return r;
}

inline LemmaReport lemma_checks(const Mixture& mix, const Kernel& k, const PopulationCheckOptions& opt = {}) {
  const Diagnostics d = difficulty(mix, k, opt.params);
  return lemma_checks(mix, d, analyze_population(mix, k, opt));
}

struct CheegerReport {
  double gamma = 0.0;
  double lambda2 = 0.0;
  double upper = 0.0;  // 1 - Gamma^2 / 8
  double lower = 0.0;  // 1 - Gamma
  bool holds = false;
};

/// Second eigenvalue of a single component's normalized operator against the
/// sandwich 1 - Gamma^2/8 >= lambda_2 >= 1 - Gamma, up to `allowance`.
inline CheegerReport cheeger_check(const Component& dist, const Kernel& k, std::size_t grid_nodes = kDefaultGridNodes,
                                   const ParamMethod& method = {}, double allowance = 1e-3) {
  const Mixture single = Mixture::make({dist}, {1.0});
  OperatorOptions opt;
  opt.full_spectrum = false;
  opt.top_k = 2;
  const auto op = discretize_operator(k, single, operator_grid(dist, grid_nodes), opt);
  CheegerReport r;
  r.gamma = indivisibility(dist, k, method).value;
  r.lambda2 = op.values()[1];
  r.upper = 1.0 - r.gamma * r.gamma / 8.0;
  r.lower = 1.0 - r.gamma;
  r.holds = r.lambda2 <= r.upper + allowance && r.lambda2 >= r.lower - allowance;
  return r;
}

}  // namespace specgeo
