#pragma once

// Lie-theoretic kernel for SL(n,R): KAK (Cartan) decomposition, simple
// roots and fundamental weights on the singular-value logs, the type-A
// Cartan pairing, the longest Weyl element, wedge volumes, and relative
// Bruhat position of two full flags.
//
// Conventions: the Cartan involution is transpose-inverse, so K = SO(n)
// and KAK is the SVD with a sign fix; a_log is sorted non-increasing
// (closed positive chamber). Root index k runs over 1..n-1.

#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "flagwalk/core.hpp"
#include "flagwalk/flags.hpp"

namespace flagwalk::lie {

inline void check_group_element(const Mat& g, double det_tol = 1e-6) {
  if (!all_finite(g)) throw std::invalid_argument("group element has non-finite entries");
  if (g.rows() != g.cols() || g.rows() < 2)
    throw std::invalid_argument("group element must be square, n >= 2");
  const double det = g.determinant();
  if (std::abs(det - 1.0) > det_tol) {
    std::ostringstream os;
    os << "group element determinant " << det << " differs from 1 by more than " << det_tol;
    throw std::invalid_argument(os.str());
  }
}

struct CartanTriple {
  Mat k1;
  Vec a_log;  // non-increasing, sums to zero
  Mat k2;

  Mat reassemble() const { return k1 * a_log.array().exp().matrix().asDiagonal() * k2; }
};

// g = k1 exp(diag(a_log)) k2 with k1,k2 in SO(n). SVD plus a simultaneous
// sign flip of the trailing columns of U and V, which leaves the product
// unchanged and lands both factors in SO(n).
inline CartanTriple kak(const Mat& g) {
  check_group_element(g);
  Eigen::JacobiSVD<Mat> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat u = svd.matrixU(), v = svd.matrixV();
  const int n = int(g.rows());
  if (u.determinant() < 0) {
    u.col(n - 1) = -u.col(n - 1);
    v.col(n - 1) = -v.col(n - 1);
  }
  Vec a_log = svd.singularValues().array().log();
  return {std::move(u), std::move(a_log), v.transpose()};
}

inline double alpha_from_alog(const Vec& a_log, int k) {
  if (k < 1 || k >= a_log.size()) throw std::out_of_range("root index out of range");
  return a_log(k - 1) - a_log(k);
}

inline double omega_from_alog(const Vec& a_log, int k) {
  if (k < 1 || k >= a_log.size()) throw std::out_of_range("root index out of range");
  return a_log.head(k).sum();
}

// Simple root alpha_k evaluated on the Cartan part of g (nats).
inline double alpha_val(const Mat& g, int k) { return alpha_from_alog(kak(g).a_log, k); }

// Fundamental weight omega_k on the Cartan part: log of the product of the
// top-k singular values.
inline double omega_val(const Mat& g, int k) { return omega_from_alog(kak(g).a_log, k); }

// Type A_{n-1} Cartan matrix <alpha_i, alpha_j>.
inline Eigen::MatrixXi cartan_pairing(int n) {
  if (n < 2) throw std::invalid_argument("cartan_pairing needs n >= 2");
  Eigen::MatrixXi c = Eigen::MatrixXi::Zero(n - 1, n - 1);
  for (int i = 0; i < n - 1; ++i) {
    c(i, i) = 2;
    if (i > 0) c(i, i - 1) = -1;
    if (i < n - 2) c(i, i + 1) = -1;
  }
  return c;
}

struct WeylElement {
  Mat m;  // signed permutation, det +1
};

// Longest Weyl element: antidiagonal signed permutation with determinant +1.
// Conjugation by it maps root index k to n-k.
inline WeylElement longest_weyl(int n) {
  if (n < 2) throw std::invalid_argument("longest_weyl needs n >= 2");
  Mat w = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) w(i, n - 1 - i) = (i % 2 == 0) ? 1.0 : -1.0;
  return {std::move(w)};
}

// Index map alpha -> -w0 alpha w0^{-1} on simple roots.
inline int longest_weyl_root_map(int n, int k) {
  if (k < 1 || k > n - 1) throw std::out_of_range("root index out of range");
  return n - k;
}

// log of the k-volume spanned by the frame columns, -inf on rank drop.
// Computed from QR diagonals so wildly scaled frames stay in range.
inline double log_wedge_volume(const Mat& frame) {
  if (!all_finite(frame)) throw std::invalid_argument("frame has non-finite entries");
  QrPos qr = qr_pos(frame);
  double acc = 0;
  for (Eigen::Index j = 0; j < frame.cols(); ++j) {
    const double d = qr.r(j, j);
    if (d <= 0) return -std::numeric_limits<double>::infinity();
    acc += std::log(d);
  }
  return acc;
}

// sqrt of the Gram determinant; 0 for a degenerate frame.
inline double wedge_volume(const Mat& frame) {
  const double lv = log_wedge_volume(frame);
  return std::isfinite(lv) ? std::exp(lv) : 0.0;
}

struct BruhatProfile {
  Eigen::MatrixXi dims;   // (i,j) -> dim(F_i cap F'_j), 1-based levels at index-1
  std::vector<int> perm;  // perm[i-1] = j with a jump at (i,j); empty if ambiguous
  bool ambiguous = false;

  bool is_identity() const {
    if (ambiguous) return false;
    for (size_t i = 0; i < perm.size(); ++i)
      if (perm[i] != int(i) + 1) return false;
    return true;
  }
  bool is_longest() const {
    if (ambiguous) return false;
    const int n = int(perm.size());
    for (int i = 0; i < n; ++i)
      if (perm[i] != n - i) return false;
    return true;
  }
  std::string label() const {
    if (ambiguous) return "ambiguous";
    if (is_identity()) return "e";
    if (is_longest()) return "w0";
    std::ostringstream os;
    for (size_t i = 0; i < perm.size(); ++i) os << (i ? " " : "") << perm[i];
    return os.str();
  }
};

// Relative position of two full flags: the table of numerically determined
// intersection dimensions and, when the table is realizable, the Weyl-group
// permutation it encodes. Inconsistent tables come back as "ambiguous".
inline BruhatProfile bruhat_profile(const FullFlag& f, const FullFlag& fp, double angle_tol) {
  if (f.dim() != fp.dim()) throw std::invalid_argument("bruhat_profile: dimension mismatch");
  if (!(angle_tol > 0)) throw std::invalid_argument("bruhat_profile: angle_tol must be positive");
  const int n = f.dim();
  BruhatProfile out;
  out.dims = Eigen::MatrixXi::Zero(n, n);
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) {
      Vec theta = principal_angles(f.level(i), fp.level(j));
      int dim = 0;
      for (Eigen::Index t = 0; t < theta.size(); ++t)
        if (theta(t) < angle_tol) ++dim;
      out.dims(i - 1, j - 1) = dim;
    }

  auto table = [&](int i, int j) -> int {
    if (i == 0 || j == 0) return 0;
    return out.dims(i - 1, j - 1);
  };
  out.perm.assign(n, 0);
  std::vector<int> col_used(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    int jumps = 0, where = 0;
    for (int j = 1; j <= n; ++j) {
      const int e = table(i, j) - table(i - 1, j) - table(i, j - 1) + table(i - 1, j - 1);
      if (e == 1) {
        ++jumps;
        where = j;
      } else if (e != 0) {
        out.ambiguous = true;
      }
    }
    if (jumps != 1 || col_used[where]) out.ambiguous = true;
    if (out.ambiguous) break;
    col_used[where] = 1;
    out.perm[i - 1] = where;
  }
  if (out.ambiguous) out.perm.clear();
  return out;
}

}  // namespace flagwalk::lie
