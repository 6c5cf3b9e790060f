#pragma once

// Flag-variety points. A full flag is stored as an orthonormal basis whose
// first k columns span level k; a partial flag keeps the same storage and a
// list of retained levels.

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "flagwalk/core.hpp"

namespace flagwalk {

struct Frame {
  Mat basis;  // n x k, orthonormal columns

  int dim() const { return int(basis.rows()); }
  int k() const { return int(basis.cols()); }

  double orthonormality_defect() const {
    return (basis.transpose() * basis - Mat::Identity(basis.cols(), basis.cols()))
        .cwiseAbs()
        .maxCoeff();
  }
  bool valid(double tol = 1e-10) const {
    return all_finite(basis) && orthonormality_defect() <= tol;
  }
};

struct FullFlag {
  Mat basis;  // n x n orthonormal

  int dim() const { return int(basis.rows()); }
  Mat level(int k) const { return basis.leftCols(k); }

  double orthonormality_defect() const {
    const int n = dim();
    return (basis.transpose() * basis - Mat::Identity(n, n)).cwiseAbs().maxCoeff();
  }
  bool valid(double tol = 1e-10) const {
    return all_finite(basis) && orthonormality_defect() <= tol;
  }

  static FullFlag standard(int n) { return {Mat::Identity(n, n)}; }

  // levels span(e_n), span(e_n,e_{n-1}), ...
  static FullFlag reversed(int n) {
    Mat b = Mat::Zero(n, n);
    for (int j = 0; j < n; ++j) b(n - 1 - j, j) = 1.0;
    return {b};
  }
};

// Subset I of simple-root indices {1,..,n-1}; the complementary indices are
// the retained flag levels of H/P_I.
struct ParabolicSpec {
  int n = 0;
  std::vector<int> I;

  std::vector<int> retained_levels() const {
    std::vector<int> out;
    for (int k = 1; k < n; ++k)
      if (std::find(I.begin(), I.end(), k) == I.end()) out.push_back(k);
    return out;
  }
  bool valid() const {
    for (int k : I)
      if (k < 1 || k > n - 1) return false;
    return n >= 2;
  }
};

struct PartialFlagPoint {
  ParabolicSpec type;
  Mat basis;  // n x n orthonormal; prefixes at retained levels are the frames

  Mat frame_at(int level) const { return basis.leftCols(level); }
  bool valid(double tol = 1e-10) const {
    return type.valid() && all_finite(basis) &&
           (basis.transpose() * basis - Mat::Identity(basis.rows(), basis.cols()))
                   .cwiseAbs()
                   .maxCoeff() <= tol;
  }
};

inline FullFlag random_full_flag(int n, CounterRng& rng) {
  return {qr_pos(random_gaussian(n, n, rng)).q};
}

// Max over levels of the largest principal angle. Metric on the full flag
// variety (zero iff the flags agree level by level).
inline double flag_distance(const FullFlag& f, const FullFlag& g) {
  if (f.dim() != g.dim()) throw std::invalid_argument("flag_distance: dimension mismatch");
  const int n = f.dim();
  double d = 0;
  for (int k = 1; k < n; ++k) {
    Vec theta = principal_angles(f.level(k), g.level(k));
    d = std::max(d, theta(theta.size() - 1));
  }
  return d;
}

// Same metric restricted to a set of levels.
inline double partial_flag_distance(const FullFlag& f, const FullFlag& g,
                                    const std::vector<int>& levels) {
  double d = 0;
  for (int k : levels) {
    Vec theta = principal_angles(f.level(k), g.level(k));
    d = std::max(d, theta(theta.size() - 1));
  }
  return d;
}

}  // namespace flagwalk
