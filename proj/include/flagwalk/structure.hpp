#pragma once

// Structural statistics: block restrictions of accumulated products,
// conformality defects, the Schmidt tightness verdict, invariant-form
// estimation on tight blocks, flag transversality, and the conjugation
// residual into (K cap M_I) A_I.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "flagwalk/liegroup.hpp"
#include "flagwalk/oseledets.hpp"
#include "flagwalk/walk.hpp"

namespace flagwalk::structure {

using oseledets::FlagEstimate;
using walk::ProductAccumulator;

struct BlockRestriction {
  Mat m;             // d x d, equal to frameN^T A^n frame0 up to exp(log_scale)
  double log_scale;  // overall log magnitude factored out
  double residual;   // relative mass of A^n frame0 outside span(frameN)
};

// Restriction of the accumulated product to a block, evaluated in log-split
// form so the overall exp(lambda n) growth never materializes.
inline BlockRestriction block_restriction(const ProductAccumulator& acc, const Mat& frame0,
                                          const Mat& frameN) {
  const int n = acc.dim();
  const int d = int(frame0.cols());
  if (frameN.cols() != d || frame0.rows() != n || frameN.rows() != n)
    throw std::invalid_argument("block_restriction: frame shape mismatch");
  Mat y = acc.v() * frame0;  // rows scaled by exp(ell) afterwards
  double c = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double rn = y.row(i).norm();
    if (rn > 0) c = std::max(c, acc.ell()(i) + std::log(rn));
  }
  if (!std::isfinite(c)) throw std::invalid_argument("block_restriction: zero frame image");
  Mat scaled(n, d);
  for (int i = 0; i < n; ++i) {
    const double f = std::exp(acc.ell()(i) - c);
    scaled.row(i) = f * y.row(i);
  }
  Mat p = acc.q() * scaled;  // exp(-c) * A^n frame0
  BlockRestriction out;
  out.m = frameN.transpose() * p;
  out.log_scale = c;
  const double pn = p.norm();
  out.residual = pn > 0 ? (p - frameN * out.m).norm() / pn : 1.0;
  return out;
}

// log condition number; zero exactly for scalar multiples of orthogonal maps.
inline double conformality_defect(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  if (!(smin > 0) || !std::isfinite(smax))
    throw std::domain_error("conformality_defect: singular block");
  return std::log(smax / smin);
}

// Defect measured in the frame adapted to a quadratic form: a map that is
// conformal for `form` rather than the Euclidean one becomes scalar-times-
// orthogonal after conjugation by form^{1/2}.
inline double conformality_defect_in_form(const Mat& m, const Mat& form) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(form);
  if (eig.eigenvalues().minCoeff() <= 0)
    throw std::domain_error("conformality_defect_in_form: form is not positive definite");
  Mat half = eig.operatorSqrt();
  Mat half_inv = eig.operatorInverseSqrt();
  return conformality_defect(half * m * half_inv);
}

// per-block conformal log factor: log of the scalar part of the restriction
inline double conformal_log_factor(const BlockRestriction& b) {
  const int d = int(b.m.rows());
  const double det = std::abs(b.m.determinant());
  if (!(det > 0)) throw std::domain_error("conformal_log_factor: singular block");
  return b.log_scale + std::log(det) / d;
}

enum class Tightness { TIGHT, UNBOUNDED, INCONCLUSIVE };

inline const char* to_string(Tightness t) {
  switch (t) {
    case Tightness::TIGHT: return "TIGHT";
    case Tightness::UNBOUNDED: return "UNBOUNDED";
    default: return "INCONCLUSIVE";
  }
}

struct TightnessVerdict {
  Tightness verdict = Tightness::INCONCLUSIVE;
  double slope = 0;     // median defect per decade of horizon
  double ratio95 = 0;   // 95th percentile growth, largest vs smallest horizon
  double growth = 0;    // median growth, largest vs smallest horizon
  std::vector<long> horizons;
  std::vector<double> medians;
};

namespace detail {

inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const double pos = q * double(v.size() - 1);
  const size_t lo = size_t(pos);
  const size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - double(lo);
  return v[lo] * (1 - frac) + v[hi] * frac;
}

}  // namespace detail

// Tightness statistic over defect samples indexed by horizon. Horizons must
// span at least two decades. TIGHT when the median trend is flat and the
// upper tail does not grow; UNBOUNDED when the median grows at least 5x per
// two decades.
inline TightnessVerdict schmidt_tightness(const std::vector<long>& horizons,
                                          const std::vector<std::vector<double>>& defects) {
  if (horizons.size() < 2 || horizons.size() != defects.size())
    throw std::invalid_argument("schmidt_tightness: need defects at >= 2 horizons");
  const double decades = std::log10(double(horizons.back()) / double(horizons.front()));
  if (decades < 2.0 - 1e-9)
    throw std::invalid_argument("schmidt_tightness: horizons must span >= 2 decades");

  TightnessVerdict out;
  out.horizons = horizons;
  for (const auto& d : defects) out.medians.push_back(detail::quantile(d, 0.5));

  // OLS slope of median against log10(horizon)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int m = int(horizons.size());
  for (int i = 0; i < m; ++i) {
    const double x = std::log10(double(horizons[size_t(i)]));
    const double y = out.medians[size_t(i)];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  out.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);

  const double p95_first = detail::quantile(defects.front(), 0.95);
  const double p95_last = detail::quantile(defects.back(), 0.95);
  const double med_first = out.medians.front();
  const double med_last = out.medians.back();
  auto ratio = [](double num, double den) {
    if (den <= 1e-12) return num <= 1e-12 ? 1.0 : std::numeric_limits<double>::infinity();
    return num / den;
  };
  out.ratio95 = ratio(p95_last, p95_first);
  out.growth = ratio(med_last, med_first);

  if (out.growth >= std::pow(5.0, decades / 2.0))
    out.verdict = Tightness::UNBOUNDED;
  else if (out.slope <= 0.01 && out.ratio95 <= 2.0)
    out.verdict = Tightness::TIGHT;
  else
    out.verdict = Tightness::INCONCLUSIVE;
  return out;
}

struct InvariantFormEstimate {
  Mat form;                 // SPD, unit determinant, block coordinates
  double cauchy_residual;   // deviation of G_n from the average over the window
  double transfer_residual; // worst relative deviation of the transported form
  bool ok = false;
  std::string error;
};

// Limit of determinant-normalized pullback Gram matrices G_n = (M^T M)/det^(1/d),
// Cesaro-averaged over the largest decade of horizons.
inline InvariantFormEstimate estimate_invariant_form(const std::vector<long>& horizons,
                                                     const std::vector<Mat>& blocks,
                                                     double error_threshold = 0.5) {
  if (horizons.empty() || horizons.size() != blocks.size())
    throw std::invalid_argument("estimate_invariant_form: empty or mismatched sequence");
  const int d = int(blocks.front().rows());
  const long nmax = horizons.back();
  std::vector<Mat> window;
  std::vector<Mat> window_m;
  for (size_t i = 0; i < horizons.size(); ++i) {
    if (10 * horizons[i] < nmax) continue;
    Mat g = blocks[i].transpose() * blocks[i];
    const double det = g.determinant();
    if (!(det > 0)) {
      InvariantFormEstimate bad;
      bad.error = "singular block restriction in averaging window";
      return bad;
    }
    window.push_back(g / std::pow(det, 1.0 / d));
    window_m.push_back(blocks[i] / std::pow(std::abs(blocks[i].determinant()), 1.0 / d));
  }
  InvariantFormEstimate out;
  Mat avg = Mat::Zero(d, d);
  for (const auto& g : window) avg += g;
  avg /= double(window.size());
  out.form = avg / std::pow(avg.determinant(), 1.0 / d);
  out.cauchy_residual = 0;
  for (const auto& g : window)
    out.cauchy_residual = std::max(out.cauchy_residual, (g - avg).norm() / avg.norm());
  out.transfer_residual = 0;
  for (const auto& mhat : window_m) {
    const double r = (mhat.transpose() * out.form * mhat - out.form).norm() / out.form.norm();
    out.transfer_residual = std::max(out.transfer_residual, r);
  }
  if (out.cauchy_residual > error_threshold || out.transfer_residual > error_threshold) {
    out.error = "estimating sequence is not Cauchy / form does not transfer (residuals " +
                std::to_string(out.cauchy_residual) + ", " + std::to_string(out.transfer_residual) + ")";
    return out;
  }
  out.ok = true;
  return out;
}

struct TransversalityReport {
  std::string label;  // Weyl position or "ambiguous"
  double margin = 0;  // smallest principal-angle sine witnessing genericity
  bool is_longest = false;
};

// Bruhat position of (forward flag, backward flag); the generic verdict is
// the longest element. The margin is the worst transversality minor of the
// pair, computed in the forward flag's coordinates.
inline TransversalityReport transversality(const FlagEstimate& vplus, const FlagEstimate& vminus,
                                           double angle_tol = 1e-6) {
  lie::BruhatProfile prof = lie::bruhat_profile(vplus.flag, vminus.flag, angle_tol);
  TransversalityReport out;
  out.label = prof.label();
  out.is_longest = prof.is_longest();
  const int n = vplus.flag.dim();
  Mat rel = vplus.flag.basis.transpose() * vminus.flag.basis;
  double margin = std::numeric_limits<double>::infinity();
  for (int k = 1; k < n; ++k) {
    Eigen::JacobiSVD<Mat> svd(Mat(rel.block(n - k, 0, k, k)));
    margin = std::min(margin, svd.singularValues()(k - 1));
  }
  out.margin = margin;
  return out;
}

// Conjugation data along one two-sided path: at each horizon, A^n expressed
// in the block frames, the per-block scalar (the A_I part) removed, and the
// orthogonality defect of the remainder recorded. Blocks in the lower half
// of the spectrum are restricted through the backward product, where they
// dominate; restricting a decaying block through the forward product
// amplifies roundoff leakage from the growing ones past any signal.
struct ConjugationTrace {
  bool ok = false;
  std::string error;
  std::vector<long> horizons;
  // indexed [horizon][block]
  std::vector<std::vector<double>> defect;       // conformality defect of the restriction
  std::vector<std::vector<double>> residual;     // block-invariance residual
  std::vector<std::vector<double>> scalar_log;   // removed A_I scalar, cumulative
  std::vector<std::vector<double>> ortho_defect; // ||R^T R - I|| after scalar removal
  std::vector<std::vector<Mat>> mtilde;          // normalized restriction matrices
  // additivity of the scalar cocycle along the path: cumulative factors at
  // consecutive horizons against the factor of the in-between segment
  double scalar_additivity = 0;
};

inline ConjugationTrace verify_conjugation(const walk::CocycleSystem& sys,
                                           const oseledets::TwoSidedPath& path,
                                           const std::vector<int>& mult,
                                           const std::vector<long>& horizons, long flag_horizon,
                                           double angle_tol) {
  const int kblocks = int(mult.size());
  const size_t nh = horizons.size();
  ConjugationTrace tr;
  tr.horizons = horizons;
  auto use_backward = [&](int l) { return 2 * l >= kblocks && kblocks > 1; };

  auto blocks0 = oseledets::blocks_at(sys, path, 0, flag_horizon, mult, angle_tol);
  if (!blocks0.ok) {
    tr.error = "degenerate sample at origin: " + blocks0.error;
    return tr;
  }
  walk::ProductAccumulator acc(sys.dim());
  long step = 0;
  tr.defect.resize(nh);
  tr.residual.resize(nh);
  tr.scalar_log.resize(nh);
  tr.ortho_defect.resize(nh);
  tr.mtilde.resize(nh);
  for (size_t hi = 0; hi < nh; ++hi) {
    const long h = horizons[hi];
    for (; step < h; ++step)
      acc.advance(sys.matrix(path.word.letter(int(step)), path.states.at(int(step))));
    auto blocksH = oseledets::blocks_at(sys, path, int(h), flag_horizon, mult, angle_tol);
    if (!blocksH.ok) {
      tr.error = "degenerate sample at horizon " + std::to_string(h) + ": " + blocksH.error;
      return tr;
    }
    std::optional<walk::ProductAccumulator> acc_bwd;
    for (int l = 0; l < kblocks && !acc_bwd; ++l)
      if (use_backward(l)) {
        acc_bwd.emplace(sys.dim());
        for (long j = 0; j < h; ++j) {
          const int q = int(h) - 1 - int(j);
          acc_bwd->advance(sys.matrix(path.word.letter(q), path.states.at(q)).inverse());
        }
      }
    for (int l = 0; l < kblocks; ++l) {
      BlockRestriction br;
      double scalar;
      if (use_backward(l)) {
        br = block_restriction(*acc_bwd, blocksH.frames[size_t(l)], blocks0.frames[size_t(l)]);
        scalar = -conformal_log_factor(br);
      } else {
        br = block_restriction(acc, blocks0.frames[size_t(l)], blocksH.frames[size_t(l)]);
        scalar = conformal_log_factor(br);
      }
      tr.defect[hi].push_back(conformality_defect(br.m));
      tr.residual[hi].push_back(br.residual);
      tr.scalar_log[hi].push_back(scalar);
      tr.mtilde[hi].push_back(br.m);
      const int d = int(br.m.rows());
      Mat rhat = br.m / std::pow(std::abs(br.m.determinant()), 1.0 / d);
      tr.ortho_defect[hi].push_back((rhat.transpose() * rhat - Mat::Identity(d, d)).norm());
    }
  }
  tr.ok = true;
  return tr;
}

}  // namespace flagwalk::structure
