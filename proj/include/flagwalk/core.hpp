#pragma once

// Shared dense-linear-algebra helpers: sign-fixed QR, principal angles,
// random group elements.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "flagwalk/rng.hpp"

namespace flagwalk {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct QrPos {
  Mat q;  // orthonormal, rows x cols
  Mat r;  // upper triangular with nonnegative diagonal, cols x cols
};

// Householder QR with the diagonal of R forced nonnegative. Makes the
// factorization of a nonsingular input unique, which the tests rely on.
inline QrPos qr_pos(const Mat& m) {
  const Eigen::Index rows = m.rows(), cols = m.cols();
  Eigen::HouseholderQR<Mat> qr(m);
  Mat q = qr.householderQ() * Mat::Identity(rows, cols);
  Mat r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (r(j, j) < 0) {
      q.col(j) = -q.col(j);
      r.row(j) = -r.row(j);
    }
  }
  return {std::move(q), std::move(r)};
}

inline Mat orthonormalize(const Mat& m) { return qr_pos(m).q; }

// Principal angles between the column spans of two orthonormal bases,
// sorted ascending. Small angles are recovered through the sine route
// (Knyazev-Argentati) so they are accurate below sqrt(eps).
inline Vec principal_angles(const Mat& a, const Mat& b) {
  const Eigen::Index r = std::min(a.cols(), b.cols());
  Mat m = a.transpose() * b;
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat v = svd.matrixV().leftCols(r);
  Mat resid = b * v - a * (m * v);
  Vec theta(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    const double c = std::clamp(svd.singularValues()(i), 0.0, 1.0);
    const double s = resid.col(i).norm();
    theta(i) = std::atan2(s, c);
  }
  return theta;
}

inline bool all_finite(const Mat& m) { return m.allFinite(); }

inline Mat random_gaussian(int rows, int cols, CounterRng& rng) {
  Mat m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = rng.gaussian();
  return m;
}

// Haar-ish rotation: QR of a Gaussian matrix, determinant fixed to +1.
inline Mat random_rotation(int n, CounterRng& rng) {
  Mat q = qr_pos(random_gaussian(n, n, rng)).q;
  if (q.determinant() < 0) q.col(n - 1) = -q.col(n - 1);
  return q;
}

// Gaussian entries projected to determinant one.
inline Mat random_special_linear(int n, CounterRng& rng) {
  for (;;) {
    Mat m = random_gaussian(n, n, rng);
    double d = m.determinant();
    if (std::abs(d) < 1e-8) continue;
    if (d < 0) m.row(0) = -m.row(0);
    m /= std::pow(std::abs(d), 1.0 / n);
    return m;
  }
}

inline std::vector<double> cdf_from_probs(const std::vector<double>& probs) {
  std::vector<double> cdf(probs.size());
  double acc = 0;
  for (size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    cdf[i] = acc;
  }
  if (!cdf.empty()) cdf.back() = 1.0;
  return cdf;
}

}  // namespace flagwalk
