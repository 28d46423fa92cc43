#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "specgeo/error.hpp"
#include "specgeo/kernel.hpp"
#include "specgeo/numerics/eigen.hpp"

namespace specgeo {

/// L = D^{-1/2} A D^{-1/2} with D the row sums of A. Entries are computed
/// once for i <= j and mirrored, so L is exactly symmetric.
inline Matrix laplacian_matrix(const Matrix& a) {
  if (a.rows() != a.cols()) fail(ErrorKind::DimensionMismatch, "kernel matrix must be square");
  const Eigen::Index n = a.rows();
  Vector inv_sqrt(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = a.row(i).sum();
    if (!(d > 0.0)) fail(ErrorKind::ZeroRowSum, "row " + std::to_string(i) + " of the kernel matrix sums to zero");
    inv_sqrt[i] = 1.0 / std::sqrt(d);
  }
  Matrix l(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) l(i, j) = l(j, i) = inv_sqrt[i] * a(i, j) * inv_sqrt[j];
  return l;
}

struct EmbeddedDataset {
  Matrix points;       // n x K, row i is the embedding of input i
  Vector eigenvalues;  // leading K eigenvalues of L
  std::vector<std::size_t> labels;
  std::uint64_t source_seed = 0;
  // (lambda_K, lambda_{K+1}) when the gap below the embedding is closed.
  std::optional<std::pair<double, double>> eigengap_collapse;

  Eigen::Index size() const noexcept { return points.rows(); }
  Eigen::Index dim() const noexcept { return points.cols(); }
};

namespace detail {

inline EmbeddedDataset embed_from_kernel(const Matrix& a, Eigen::Index K) {
  const Eigen::Index n = a.rows();
  if (K < 1) fail(ErrorKind::BadParameter, "embedding dimension must be positive");
  if (n < K) fail(ErrorKind::BadParameter, "need at least K points");
  const Matrix l = laplacian_matrix(a);
  const Eigen::Index want = std::min<Eigen::Index>(K + 1, n);
  const SymEigen se = sym_eigen(l, want);
  EmbeddedDataset out;
  out.points = se.vectors.leftCols(K);
  out.eigenvalues = se.values.head(K);
  if (want > K && se.values[K - 1] - se.values[K] < 1e-10)
    out.eigengap_collapse = std::make_pair(se.values[K - 1], se.values[K]);
  return out;
}

}  // namespace detail

/// Normalized Laplacian embedding of one-dimensional points.
inline EmbeddedDataset embed(std::span<const double> points, const Kernel& k, Eigen::Index K) {
  return detail::embed_from_kernel(kernel_matrix(k, points), K);
}

/// Normalized Laplacian embedding of the rows of `points`.
inline EmbeddedDataset embed(const Matrix& points, const Kernel& k, Eigen::Index K) {
  return detail::embed_from_kernel(kernel_matrix(k, points), K);
}

}  // namespace specgeo
