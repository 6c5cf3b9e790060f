#pragma once

// Boundary functionals on full flags: the additive cocycles xi_alpha and
// sigma_hat_alpha, and the transversality proxy distance to a translated
// Schubert complement.

#include <cmath>
#include <stdexcept>

#include "flagwalk/flags.hpp"
#include "flagwalk/liegroup.hpp"

namespace flagwalk::boundary {

namespace detail {

// log ||wedge_k(exp(diag(a))) w|| for w the wedge of the columns of f:
// a cancellation-free log-sum-exp over the k-minors of f, so the value
// survives Cartan parts thousands of nats wide (the assembled product
// g * frame collapses in double precision once the thin directions drop
// below roundoff relative to the dominant one).
inline double log_wedge_norm_scaled(const Vec& a, const Mat& f) {
  const int n = int(f.rows()), k = int(f.cols());
  std::vector<int> idx(static_cast<size_t>(k), 0);
  for (int i = 0; i < k; ++i) idx[size_t(i)] = i;
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  for (;;) {
    Mat sub(k, k);
    double asum = 0;
    for (int r = 0; r < k; ++r) {
      sub.row(r) = f.row(idx[size_t(r)]);
      asum += a(idx[size_t(r)]);
    }
    const double minor = sub.determinant();
    if (minor != 0) {
      const double t = 2.0 * (asum + std::log(std::abs(minor)));
      terms.push_back(t);
      best = std::max(best, t);
    }
    int pos = k - 1;
    while (pos >= 0 && idx[size_t(pos)] == n - k + pos) --pos;
    if (pos < 0) break;
    ++idx[size_t(pos)];
    for (int r = pos + 1; r < k; ++r) idx[size_t(r)] = idx[size_t(r - 1)] + 1;
  }
  if (!std::isfinite(best)) return -std::numeric_limits<double>::infinity();
  double acc = 0;
  for (double t : terms) acc += std::exp(t - best);
  return 0.5 * (best + std::log(acc));
}

}  // namespace detail

// xi_alpha(g, z) for alpha = alpha_k: log volume growth of level k of z
// under g. Equals log ||rho_k(g) v|| / ||v|| for the wedge representative v
// of the level, so it only depends on the span. Evaluated through the KAK
// factors of g: the orthogonal wedge factors preserve the norm and the
// diagonal one acts by exact exponent shifts on the minors.
inline double xi(const Mat& g, const FullFlag& z, int k) {
  if (k < 1 || k >= z.dim()) throw std::out_of_range("xi: root index out of range");
  const Mat frame = z.level(k);
  const double before = lie::log_wedge_volume(frame);
  lie::CartanTriple t = lie::kak(g);
  const double after = detail::log_wedge_norm_scaled(t.a_log, t.k2 * frame);
  if (!std::isfinite(before) || !std::isfinite(after))
    throw std::domain_error("xi: degenerate frame (upstream flag corruption)");
  return after - before;
}

// Factored evaluation for g = k1 exp(diag(a_log)) k2 given by its parts;
// the only representation that stays meaningful when a_log spans more than
// the double mantissa (the assembled matrix no longer carries its thin
// directions at that point).
inline double xi_scaled(const Vec& a_log, const Mat& k2, const FullFlag& z, int k) {
  if (k < 1 || k >= z.dim()) throw std::out_of_range("xi: root index out of range");
  const Mat frame = z.level(k);
  const double before = lie::log_wedge_volume(frame);
  const double after = detail::log_wedge_norm_scaled(a_log, k2 * frame);
  if (!std::isfinite(before) || !std::isfinite(after))
    throw std::domain_error("xi: degenerate frame (upstream flag corruption)");
  return after - before;
}

// sigma_hat_alpha(g, z) through the roots-in-weights pairing,
// sum_gamma <alpha_k, gamma> xi_gamma(g, z); tridiagonal in type A.
inline double sigma_hat(const Mat& g, const FullFlag& z, int k) {
  const int n = z.dim();
  if (k < 1 || k >= n) throw std::out_of_range("sigma_hat: root index out of range");
  double acc = 2.0 * xi(g, z, k);
  if (k - 1 >= 1) acc -= xi(g, z, k - 1);
  if (k + 1 <= n - 1) acc -= xi(g, z, k + 1);
  return acc;
}

inline double sigma_hat_scaled(const Vec& a_log, const Mat& k2, const FullFlag& z, int k) {
  const int n = z.dim();
  if (k < 1 || k >= n) throw std::out_of_range("sigma_hat: root index out of range");
  double acc = 2.0 * xi_scaled(a_log, k2, z, k);
  if (k - 1 >= 1) acc -= xi_scaled(a_log, k2, z, k - 1);
  if (k + 1 <= n - 1) acc -= xi_scaled(a_log, k2, z, k + 1);
  return acc;
}

// Independent route: Iwasawa A-part of g acting on the flag basis, read off
// adjacent log-diagonal entries of R in the QR of g * basis.
inline double sigma_hat_iwasawa(const Mat& g, const FullFlag& z, int k) {
  const int n = z.dim();
  if (k < 1 || k >= n) throw std::out_of_range("sigma_hat: root index out of range");
  QrPos qr = qr_pos(g * z.basis);
  const double a = qr.r(k - 1, k - 1), b = qr.r(k, k);
  if (a <= 0 || b <= 0) throw std::domain_error("sigma_hat: degenerate flag basis");
  return std::log(a) - std::log(b);
}

// Proxy distance from the flag z to the translated Schubert complement gJ,
// where J is the complement of the big Bruhat cell. For each level k the
// smallest singular value of the bottom-k rows of the level basis of
// g^{-1} z equals the smallest principal-angle sine between that level and
// span(e_1..e_{n-k}); the minimum over levels vanishes exactly when g^{-1} z
// leaves the big cell numerically, and equals 1 on the fully transverse
// (coordinate-reversed) flag.
inline double dist_to_complement(const FullFlag& z, const Mat& g) {
  const int n = z.dim();
  Mat y = orthonormalize(g.partialPivLu().solve(z.basis));
  double d = std::numeric_limits<double>::infinity();
  for (int k = 1; k < n; ++k) {
    Mat block = y.block(n - k, 0, k, k);
    Eigen::JacobiSVD<Mat> svd(block);
    const double smin = svd.singularValues()(k - 1);
    d = std::min(d, smin);
  }
  return d;
}

// Bad-set proxy on H/P_I: the partial flag is lifted to its compatible full
// basis and only the minors at the retained levels enter (those are the ones
// defining the complement of (B w0 P_I)/P_I).
inline double dist_to_complement(const PartialFlagPoint& z, const Mat& g) {
  const int n = int(z.basis.rows());
  Mat y = orthonormalize(g.partialPivLu().solve(z.basis));
  double d = std::numeric_limits<double>::infinity();
  for (int k : z.type.retained_levels()) {
    Mat block = y.block(n - k, 0, k, k);
    Eigen::JacobiSVD<Mat> svd(block);
    d = std::min(d, svd.singularValues()(k - 1));
  }
  return d;
}

}  // namespace flagwalk::boundary
