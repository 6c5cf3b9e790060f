#pragma once

// Log-singular-values of diag(exp(lr)) * C * diag(exp(lc)) for small C.
// The scales exp(lr), exp(lc) can span thousands of nats, far past double
// range, so the matrix is assembled in MPFR floats (unbounded exponent)
// at a precision that covers the full dynamic range, and a one-sided
// Jacobi sweep extracts the singular values.

#include <boost/multiprecision/mpfr.hpp>
#include <cmath>
#include <vector>

#include "flagwalk/core.hpp"

namespace flagwalk::mplog {

using BigFloat = boost::multiprecision::mpfr_float;

inline Vec log_singular_values_scaled(const Vec& lr, const Mat& c, const Vec& lc) {
  const int n = int(c.rows());
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (c(i, j) == 0) continue;
      const double e = lr(i) + lc(j) + std::log(std::abs(c(i, j)));
      hi = std::max(hi, e);
      lo = std::min(lo, e);
    }
  if (!std::isfinite(hi)) return Vec::Zero(n);
  // sigma_min is bounded below through the determinant, which fixes the
  // precision needed to keep every singular value above roundoff
  double logdet_floor = lr.sum() + lc.sum() + std::log(std::max(std::abs(c.determinant()), 1e-300));
  const double range = std::max(hi - lo, (n - 1) * (hi + std::log(double(n))) - logdet_floor - (n - 2) * hi);
  const unsigned digits =
      unsigned(std::clamp(range / std::log(10.0) + 80.0, 100.0, 60000.0));
  BigFloat::default_precision(digits);

  std::vector<std::vector<BigFloat>> col(n, std::vector<BigFloat>(n));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      BigFloat scale = exp(BigFloat(lr(i)) + BigFloat(lc(j)));
      col[j][i] = scale * BigFloat(c(i, j));
    }

  auto dot = [&](int p, int q) {
    BigFloat s = 0;
    for (int i = 0; i < n; ++i) s += col[p][i] * col[q][i];
    return s;
  };

  const BigFloat eps = pow(BigFloat(10), -int(digits) + 20);
  for (int sweep = 0; sweep < 100; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) {
        BigFloat app = dot(p, p), aqq = dot(q, q), apq = dot(p, q);
        if (apq == 0 || abs(apq) <= eps * sqrt(app * aqq)) continue;
        rotated = true;
        BigFloat zeta = (aqq - app) / (2 * apq);
        BigFloat t = (zeta >= 0 ? BigFloat(1) : BigFloat(-1)) /
                     (abs(zeta) + sqrt(1 + zeta * zeta));
        BigFloat cs = 1 / sqrt(1 + t * t), sn = cs * t;
        for (int i = 0; i < n; ++i) {
          BigFloat vp = col[p][i], vq = col[q][i];
          col[p][i] = cs * vp - sn * vq;
          col[q][i] = sn * vp + cs * vq;
        }
      }
    if (!rotated) break;
  }

  Vec out(n);
  for (int j = 0; j < n; ++j) {
    BigFloat norm2 = dot(j, j);
    out(j) = norm2 > 0 ? double(log(norm2) / 2) : -std::numeric_limits<double>::infinity();
  }
  std::sort(out.data(), out.data() + n, std::greater<double>());
  return out;
}

}  // namespace flagwalk::mplog
