#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "specgeo/error.hpp"

namespace specgeo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct SymEigen {
  Vector values;   // descending
  Matrix vectors;  // column j belongs to values[j]
};

namespace detail {

// Matrices up to this size go through cyclic Jacobi; larger ones are reduced
// to tridiagonal form first.
inline constexpr Eigen::Index kJacobiMaxSize = 128;

inline void check_symmetric(const Matrix& m) {
  if (m.rows() != m.cols())
    fail(ErrorKind::NonSymmetric, "matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  const double scale = m.cwiseAbs().maxCoeff();
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale)
    fail(ErrorKind::NonSymmetric, "max |M - M^T| = " + std::to_string(asym) + " exceeds 1e-12 relative");
}

// Flip each column so that its largest-magnitude entry (first on ties) is
// nonnegative.
inline void fix_signs(Matrix& v) {
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      const double a = std::abs(v(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (v(arg, j) < 0.0) v.col(j) = -v.col(j);
  }
}

inline SymEigen sorted_descending(const Vector& values, const Matrix& vectors, Eigen::Index keep) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values[a] > values[b]; });
  SymEigen out;
  out.values.resize(keep);
  out.vectors.resize(vectors.rows(), keep);
  for (Eigen::Index j = 0; j < keep; ++j) {
    out.values[j] = values[order[static_cast<std::size_t>(j)]];
    out.vectors.col(j) = vectors.col(order[static_cast<std::size_t>(j)]);
  }
  fix_signs(out.vectors);
  return out;
}

inline void jacobi(Matrix a, Vector& values, Matrix& vectors) {
  const Eigen::Index n = a.rows();
  vectors = Matrix::Identity(n, n);
  const double norm = a.norm();
  const long max_sweeps = 100L * static_cast<long>(std::max<Eigen::Index>(n, 1));
  bool converged = norm == 0.0;
  for (long sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) <= std::numeric_limits<double>::epsilon() * norm) {
      converged = true;
      break;
    }
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::hypot(t, 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = vectors(k, p);
          const double vkq = vectors(k, q);
          vectors(k, p) = c * vkp - s * vkq;
          vectors(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) fail(ErrorKind::NoConvergence, "cyclic Jacobi exceeded its sweep cap");
  values = a.diagonal();
}

// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix with
// diagonal d and off-diagonal e (e[i] couples i and i+1, e[n-1] unused).
// When z is given the rotations are accumulated into its columns.
inline void tridiagonal_ql(Vector& d, Vector& e, Matrix* z) {
  const long n = static_cast<long>(d.size());
  if (n == 0) return;
  e[n - 1] = 0.0;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  // Deflate when an off-diagonal is negligible relative to its neighbours or
  // to the whole matrix; the latter keeps clusters of tiny eigenvalues from
  // stalling the iteration.
  double tnorm = 0.0;
  for (long i = 0; i < n; ++i) tnorm = std::max(tnorm, std::abs(d[i]) + (i + 1 < n ? std::abs(e[i]) : 0.0));
  for (long l = 0; l < n; ++l) {
    int iter = 0;
    long m = l;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd || std::abs(e[m]) <= 0.5 * eps * tnorm) break;
      }
      if (m == l) break;
      if (++iter > 60) fail(ErrorKind::NoConvergence, "tridiagonal QL did not converge");
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0;
      double c = 1.0;
      double p = 0.0;
      long i = m - 1;
      bool underflow = false;
      for (; i >= l; --i) {
        const double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        if (z != nullptr) {
          for (Eigen::Index k = 0; k < z->rows(); ++k) {
            const double zk1 = (*z)(k, i + 1);
            (*z)(k, i + 1) = s * (*z)(k, i) + c * zk1;
            (*z)(k, i) = c * (*z)(k, i) - s * zk1;
          }
        }
      }
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    } while (m != l);
  }
}

// Solves (T - shift I) x = b in place for tridiagonal T, using Gaussian
// elimination with partial pivoting. Tiny pivots are replaced by `floor`.
inline void tridiagonal_solve(const Vector& d, const Vector& e, double shift, double floor, Vector& x) {
  const Eigen::Index n = d.size();
  // Row i of U holds u0 (diagonal), u1, u2 (two superdiagonals).
  Vector u0(n), u1 = Vector::Zero(n), u2 = Vector::Zero(n), mult = Vector::Zero(n);
  std::vector<bool> swapped(static_cast<std::size_t>(n), false);
  double cur_d = d[0] - shift;
  double cur_e = n > 1 ? e[0] : 0.0;
  double cur_f = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double below_sub = e[i];
    const double below_d = d[i + 1] - shift;
    const double below_e = i + 2 < n ? e[i + 1] : 0.0;
    if (std::abs(below_sub) > std::abs(cur_d)) {
      swapped[static_cast<std::size_t>(i)] = true;
      u0[i] = below_sub;
      u1[i] = below_d;
      u2[i] = below_e;
      const double m = cur_d / below_sub;
      mult[i] = m;
      cur_d = cur_e - m * below_d;
      cur_e = cur_f - m * below_e;
      cur_f = 0.0;
    } else {
      if (cur_d == 0.0) cur_d = floor;
      u0[i] = cur_d;
      u1[i] = cur_e;
      u2[i] = cur_f;
      const double m = below_sub / cur_d;
      mult[i] = m;
      cur_d = below_d - m * cur_e;
      cur_e = below_e - m * cur_f;
      cur_f = 0.0;
    }
  }
  u0[n - 1] = cur_d;
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::abs(u0[i]) < floor) u0[i] = u0[i] < 0.0 ? -floor : floor;

  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (swapped[static_cast<std::size_t>(i)]) std::swap(x[i], x[i + 1]);
    x[i + 1] -= mult[i] * x[i];
  }
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double s = x[i];
    if (i + 1 < n) s -= u1[i] * x[i + 1];
    if (i + 2 < n) s -= u2[i] * x[i + 2];
    x[i] = s / u0[i];
  }
}

// Eigenvectors of the tridiagonal matrix (d, e) for the given eigenvalues
// (sorted descending) by inverse iteration. Vectors whose eigenvalues lie in
// a cluster are reorthogonalized against earlier members of the cluster.
inline Matrix tridiagonal_vectors(const Vector& d, const Vector& e, const Vector& values) {
  const Eigen::Index n = d.size();
  const Eigen::Index k = values.size();
  double tnorm = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double row = std::abs(d[i]);
    if (i > 0) row += std::abs(e[i - 1]);
    if (i + 1 < n) row += std::abs(e[i]);
    tnorm = std::max(tnorm, row);
  }
  if (tnorm == 0.0) tnorm = 1.0;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double floor = eps * tnorm;
  const double cluster_gap = 1e-3 * tnorm;

  Matrix x(n, k);
  Eigen::Index cluster_start = 0;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (j > 0 && std::abs(values[j - 1] - values[j]) > cluster_gap) cluster_start = j;
    // Perturb repeated shifts so each member of a tight cluster gets its own
    // solve.
    const double shift = values[j] + static_cast<double>(j - cluster_start) * 10.0 * floor;
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i)
      v[i] = 1.0 + 0.5 * std::sin(static_cast<double>((i + 1) * (j + 3)));
    v.normalize();
    bool ok = false;
    for (int iter = 0; iter < 8; ++iter) {
      tridiagonal_solve(d, e, shift, floor, v);
      for (Eigen::Index c = cluster_start; c < j; ++c) v -= x.col(c).dot(v) * x.col(c);
      const double nv = v.norm();
      if (!(nv > 0.0) || !std::isfinite(nv)) {
        for (Eigen::Index i = 0; i < n; ++i) v[i] = std::cos(static_cast<double>((i + 2) * (j + iter + 5)));
        for (Eigen::Index c = cluster_start; c < j; ++c) v -= x.col(c).dot(v) * x.col(c);
        v.normalize();
        continue;
      }
      v /= nv;
      Vector tv(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        double s = d[i] * v[i];
        if (i > 0) s += e[i - 1] * v[i - 1];
        if (i + 1 < n) s += e[i] * v[i + 1];
        tv[i] = s;
      }
      const double residual = (tv - values[j] * v).norm();
      if (iter >= 1 && residual <= 1e3 * eps * tnorm * std::sqrt(static_cast<double>(n))) {
        ok = true;
        break;
      }
    }
    if (!ok) fail(ErrorKind::NoConvergence, "inverse iteration did not reach a small residual");
    x.col(j) = v;
  }
  return x;
}

}  // namespace detail

/// Eigenvalues of a symmetric matrix, descending.
inline Vector sym_eigenvalues(const Matrix& m) {
  detail::check_symmetric(m);
  const Matrix sym = 0.5 * (m + m.transpose());
  const Eigen::Index n = sym.rows();
  Vector values;
  if (n <= detail::kJacobiMaxSize) {
    Matrix unused;
    detail::jacobi(sym, values, unused);
  } else {
    Eigen::Tridiagonalization<Matrix> tri(sym);
    values = tri.diagonal();
    Vector e(n);
    e.head(n - 1) = tri.subDiagonal();
    detail::tridiagonal_ql(values, e, nullptr);
  }
  std::sort(values.data(), values.data() + n, std::greater<>());
  return values;
}

/// Eigen-decomposition of a symmetric matrix. Returns all pairs, or only the
/// leading `top_k` when given, in descending order with the sign convention
/// applied.
inline SymEigen sym_eigen(const Matrix& m, std::optional<Eigen::Index> top_k = std::nullopt) {
  detail::check_symmetric(m);
  const Eigen::Index n = m.rows();
  const Eigen::Index keep = top_k ? std::min(*top_k, n) : n;
  if (keep < 0) fail(ErrorKind::BadParameter, "top_k must be nonnegative");
  const Matrix sym = 0.5 * (m + m.transpose());

  if (n <= detail::kJacobiMaxSize) {
    Vector values;
    Matrix vectors;
    detail::jacobi(sym, values, vectors);
    return detail::sorted_descending(values, vectors, keep);
  }

  Eigen::Tridiagonalization<Matrix> tri(sym);
  Vector d = tri.diagonal();
  Vector e(n);
  e.head(n - 1) = tri.subDiagonal();

  if (keep == n) {
    Matrix z = tri.matrixQ();
    detail::tridiagonal_ql(d, e, &z);
    return detail::sorted_descending(d, z, keep);
  }

  Vector values = d;
  Vector scratch = e;
  detail::tridiagonal_ql(values, scratch, nullptr);
  std::sort(values.data(), values.data() + n, std::greater<>());
  const Vector top = values.head(keep);
  const Matrix x = detail::tridiagonal_vectors(d, e, top);
  Matrix vectors = tri.matrixQ() * x;
  for (Eigen::Index j = 0; j < keep; ++j) vectors.col(j).normalize();
  return detail::sorted_descending(top, vectors, keep);
}

}  // namespace specgeo
