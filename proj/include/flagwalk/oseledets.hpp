#pragma once

// Lyapunov exponents with standard errors, multiplicity clustering and the
// degenerate root set, finite-horizon Oseledets flag estimates, two-sided
// block intersections, and geodesic tracking in the symmetric space.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "flagwalk/flags.hpp"
#include "flagwalk/liegroup.hpp"
#include "flagwalk/mplog.hpp"
#include "flagwalk/walk.hpp"

namespace flagwalk::oseledets {

using walk::CocycleSystem;
using walk::Orientation;
using walk::ProductAccumulator;
using walk::Word;

struct LyapunovReport {
  Vec lambda;                     // sorted non-increasing, nats/step
  Vec se;                         // standard error across trials
  std::vector<int> multiplicities;
  Vec lambda_alpha;               // per simple root, lambda_k - lambda_{k+1}
  Vec lambda_alpha_se;
  Vec lambda_alpha_sd;            // per-trial spread, the clustering scale
  std::vector<int> degenerate;    // I, root indices with lambda_alpha ~ 0
  double cluster_tol = 0;
  long n_steps = 0;
  int n_trials = 0;

  double spread() const { return lambda(0) - lambda(lambda.size() - 1); }
};

// Run trials over a worker pool, writing slot t of the result vector from
// trial t; merge order is by index so worker count never changes output.
inline void parallel_trials(int n_trials, int workers, const std::function<void(int)>& body) {
  if (workers <= 1) {
    for (int t = 0; t < n_trials; ++t) body(t);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int w = std::min(workers, n_trials);
  pool.reserve(size_t(w));
  for (int i = 0; i < w; ++i)
    pool.emplace_back([&] {
      for (;;) {
        const int t = next.fetch_add(1);
        if (t >= n_trials) return;
        body(t);
      }
    });
  for (auto& th : pool) th.join();
}

inline std::vector<int> degenerate_set(const Vec& lambda_alpha, double tol) {
  std::vector<int> out;
  for (int k = 0; k < lambda_alpha.size(); ++k)
    if (lambda_alpha(k) <= tol) out.push_back(k + 1);
  return out;
}

inline std::vector<int> multiplicities_from_degenerate(int n, const std::vector<int>& I) {
  std::vector<int> mult;
  int run = 1;
  for (int k = 1; k < n; ++k) {
    if (std::find(I.begin(), I.end(), k) != I.end()) {
      ++run;
    } else {
      mult.push_back(run);
      run = 1;
    }
  }
  mult.push_back(run);
  return mult;
}

inline LyapunovReport estimate_exponents(const CocycleSystem& sys, long n_steps, int n_trials,
                                         uint64_t seed, double cluster_tol_rel = 1e-2,
                                         int workers = 1) {
  if (n_steps < 1 || n_trials < 1)
    throw std::invalid_argument("estimate_exponents: n_steps and n_trials must be >= 1");
  const int n = sys.dim();
  std::vector<Vec> per_trial(static_cast<size_t>(n_trials));
  parallel_trials(n_trials, workers, [&](int t) {
    Word w = walk::sample_word(sys, seed, uint64_t(t), n_steps, Orientation::forward);
    CounterRng init(seed, RngStream::initial_conditions, uint64_t(t));
    const int x0 = sys.sample_state(init);
    ProductAccumulator acc = walk::forward_product(sys, w, x0);
    per_trial[size_t(t)] = acc.a_log() / double(n_steps);
  });

  LyapunovReport rep;
  rep.n_steps = n_steps;
  rep.n_trials = n_trials;
  rep.lambda = Vec::Zero(n);
  rep.se = Vec::Zero(n);
  for (const auto& v : per_trial) rep.lambda += v;
  rep.lambda /= double(n_trials);
  if (n_trials > 1) {
    for (const auto& v : per_trial) rep.se += (v - rep.lambda).cwiseAbs2();
    rep.se = (rep.se / double(n_trials - 1) / double(n_trials)).cwiseSqrt();
  }

  rep.lambda_alpha = Vec::Zero(n - 1);
  rep.lambda_alpha_se = Vec::Zero(n - 1);
  rep.lambda_alpha_sd = Vec::Zero(n - 1);
  for (int k = 0; k < n - 1; ++k) {
    double mean = 0;
    for (const auto& v : per_trial) mean += v(k) - v(k + 1);
    mean /= double(n_trials);
    double var = 0;
    for (const auto& v : per_trial) {
      const double d = (v(k) - v(k + 1)) - mean;
      var += d * d;
    }
    rep.lambda_alpha(k) = mean;
    rep.lambda_alpha_sd(k) = n_trials > 1 ? std::sqrt(var / double(n_trials - 1)) : 0.0;
    rep.lambda_alpha_se(k) = rep.lambda_alpha_sd(k) / std::sqrt(double(n_trials));
  }

  // Clustering scale: a genuinely zero root gap fluctuates diffusively, so
  // its sorted estimate sits within a few per-trial standard deviations of
  // zero at every horizon; a positive gap escapes that band as n grows. The
  // absolute floor keeps pure-roundoff spectra (isometries) in one cluster.
  const double max_sd = n_trials > 1 ? rep.lambda_alpha_sd.maxCoeff() : 0.0;
  rep.cluster_tol = std::max({cluster_tol_rel * rep.spread(), 3.0 * max_sd, 1e-12});
  rep.degenerate = degenerate_set(rep.lambda_alpha, rep.cluster_tol);
  rep.multiplicities = multiplicities_from_degenerate(n, rep.degenerate);
  return rep;
}

struct DegenerateRoots {
  std::vector<int> I;
  std::vector<int> I_prime;  // image under alpha -> -w0 alpha w0^{-1}
};

inline DegenerateRoots classify_degenerate_roots(const LyapunovReport& rep, double tol) {
  DegenerateRoots out;
  out.I = degenerate_set(rep.lambda_alpha, tol);
  const int n = int(rep.lambda.size());
  for (int k : out.I) out.I_prime.push_back(lie::longest_weyl_root_map(n, k));
  std::sort(out.I_prime.begin(), out.I_prime.end());
  return out;
}

// Flag estimate at a finite horizon. The stored flag is the "slow flag":
// level d spans the d slowest directions of the underlying product. For a
// forward product, V_i^+ is level (m_i + ... + m_k); for a backward product,
// V_j^- is level (m_1 + ... + m_j).
struct FlagEstimate {
  Orientation orientation = Orientation::forward;
  FullFlag flag;
  std::vector<long> horizons;
  std::vector<double> residuals;  // flag_distance between successive horizons
  bool converged = false;
};

namespace detail {

inline FlagEstimate flag_from_steps(const CocycleSystem& sys, Orientation orient,
                                    const std::function<Mat(long)>& step_matrix,
                                    const std::vector<long>& horizons, double converge_tol) {
  if (horizons.empty() || !std::is_sorted(horizons.begin(), horizons.end()))
    throw std::invalid_argument("flag estimation horizons must be increasing");
  FlagEstimate est;
  est.orientation = orient;
  est.horizons = horizons;
  ProductAccumulator acc(sys.dim());
  long step = 0;
  std::optional<FullFlag> prev;
  for (long h : horizons) {
    for (; step < h; ++step) acc.advance(step_matrix(step));
    FullFlag cur{acc.slow_frame()};
    if (prev) est.residuals.push_back(flag_distance(*prev, cur));
    prev = cur;
    est.flag = cur;
  }
  est.converged = !est.residuals.empty() && est.residuals.back() <= converge_tol;
  if (est.residuals.empty()) est.converged = true;  // single horizon: no diagnostic
  return est;
}

}  // namespace detail

inline FlagEstimate forward_flag(const CocycleSystem& sys, const Word& w, int x0,
                                 const std::vector<long>& horizons, double converge_tol = 1e-4) {
  walk::StatePath sp = walk::state_path(sys, w, x0);
  return detail::flag_from_steps(
      sys, Orientation::forward,
      [&](long p) { return sys.matrix(w.letter(int(p)), sp.at(int(p))); }, horizons,
      converge_tol);
}

// Backward flag from a word whose letters list the past: letters[j] = v_{-j}.
inline FlagEstimate backward_flag(const CocycleSystem& sys, const Word& w, int y0,
                                  const std::vector<long>& horizons, double converge_tol = 1e-4) {
  std::vector<int> ystate(w.letters.size() + 1);
  ystate[0] = y0;
  for (size_t j = 0; j < w.letters.size(); ++j)
    ystate[j + 1] = sys.prev_state(w.letters[j], ystate[j]);
  return detail::flag_from_steps(
      sys, Orientation::backward,
      [&](long j) { return sys.matrix(w.letters[size_t(j)], ystate[size_t(j) + 1]).inverse(); },
      horizons, converge_tol);
}

struct BlockDecomposition {
  std::vector<Mat> frames;  // orthonormal basis per Lyapunov block
  std::vector<int> dims;
  double margin = 0;  // worst principal-angle sine between distinct blocks
  bool ok = false;
  std::string error;
};

// V_l(v,u,x) = V_l^+(u,x) cap V_l^-(v,x) by principal-angle intersection,
// with the direct-sum consistency checks from the two-sided decomposition.
inline BlockDecomposition intersect_flags(const FlagEstimate& vplus, const FlagEstimate& vminus,
                                          const std::vector<int>& mult, double angle_tol) {
  BlockDecomposition out;
  const int n = vplus.flag.dim();
  const int kblocks = int(mult.size());
  if (std::accumulate(mult.begin(), mult.end(), 0) != n) {
    out.error = "multiplicities do not sum to dimension";
    return out;
  }
  std::vector<int> csum(mult.size() + 1, 0);
  for (int i = 0; i < kblocks; ++i) csum[size_t(i) + 1] = csum[size_t(i)] + mult[size_t(i)];

  for (int l = 0; l < kblocks; ++l) {
    const int dplus = n - csum[size_t(l)];      // dim V_l^+
    const int dminus = csum[size_t(l) + 1];     // dim V_l^-
    Mat bp = vplus.flag.level(dplus);
    Mat bm = vminus.flag.level(dminus);
    Mat m = bp.transpose() * bm;
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    int found = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
      const double c = std::clamp(svd.singularValues()(i), -1.0, 1.0);
      if (std::acos(c) < angle_tol) ++found;
    }
    if (found != mult[size_t(l)]) {
      out.error = "intersection dimension " + std::to_string(found) + " at block " +
                  std::to_string(l + 1) + " (expected " + std::to_string(mult[size_t(l)]) + ")";
      return out;
    }
    Mat rep(n, found);
    for (int i = 0; i < found; ++i) {
      Vec a = bp * svd.matrixU().col(i);
      Vec b = bm * svd.matrixV().col(i);
      rep.col(i) = (a + b).normalized();
    }
    out.frames.push_back(orthonormalize(rep));
    out.dims.push_back(found);
  }

  out.margin = std::numeric_limits<double>::infinity();
  for (int a = 0; a < kblocks; ++a)
    for (int b = a + 1; b < kblocks; ++b) {
      Vec theta = principal_angles(out.frames[size_t(a)], out.frames[size_t(b)]);
      out.margin = std::min(out.margin, std::sin(theta(0)));
    }
  if (kblocks == 1) out.margin = 1.0;

  // direct-sum consistency: stacking blocks >= i must recover V_i^+,
  // stacking blocks <= j must recover V_j^-
  for (int i = 0; i < kblocks; ++i) {
    int d = 0;
    for (int l = i; l < kblocks; ++l) d += mult[size_t(l)];
    Mat stack(n, d);
    int at = 0;
    for (int l = i; l < kblocks; ++l) {
      stack.middleCols(at, mult[size_t(l)]) = out.frames[size_t(l)];
      at += mult[size_t(l)];
    }
    Vec theta = principal_angles(orthonormalize(stack), vplus.flag.level(d));
    if (theta(theta.size() - 1) > angle_tol) {
      out.error = "forward direct-sum check failed at block " + std::to_string(i + 1);
      return out;
    }
  }
  for (int j = 0; j < kblocks; ++j) {
    const int d = csum[size_t(j) + 1];
    Mat stack(n, d);
    int at = 0;
    for (int l = 0; l <= j; ++l) {
      stack.middleCols(at, mult[size_t(l)]) = out.frames[size_t(l)];
      at += mult[size_t(l)];
    }
    Vec theta = principal_angles(orthonormalize(stack), vminus.flag.level(d));
    if (theta(theta.size() - 1) > angle_tol) {
      out.error = "backward direct-sum check failed at block " + std::to_string(j + 1);
      return out;
    }
  }
  out.ok = true;
  return out;
}

// Sum of the top-k exponents from the wedge-power route: log volume growth
// of a k-frame pushed through the walk with per-step renormalization. Cross
// check for the diagonal-log accumulation, practical for small k and n.
inline double top_k_exponent_sum(const CocycleSystem& sys, const Word& w, int x0, int k) {
  const int n = sys.dim();
  if (k < 1 || k > n) throw std::invalid_argument("top_k_exponent_sum: bad k");
  Mat frame = Mat::Identity(n, k);
  double acc = 0;
  int x = x0;
  for (int p = 0; p < w.max_pos(); ++p) {
    QrPos qr = qr_pos(sys.matrix(w.letter(p), x) * frame);
    for (int j = 0; j < k; ++j) acc += std::log(qr.r(j, j));
    frame = std::move(qr.q);
    x = sys.next_state(w.letter(p), x);
  }
  return acc / double(w.length());
}

// ---------------------------------------------------------------------------
// two-sided paths and block frames at arbitrary positions

struct TwoSidedPath {
  Word word;
  walk::StatePath states;
};

inline TwoSidedPath make_two_sided(const CocycleSystem& sys, uint64_t seed, uint64_t trial,
                                   long backward_len, long forward_len) {
  TwoSidedPath p;
  p.word = walk::sample_word(sys, seed, trial, backward_len + forward_len,
                             Orientation::two_sided, int(backward_len));
  CounterRng init(seed, RngStream::initial_conditions, trial);
  p.states = walk::state_path(sys, p.word, sys.sample_state(init));
  return p;
}

// forward flag estimated from len letters starting at position pos
inline FlagEstimate forward_flag_at(const CocycleSystem& sys, const TwoSidedPath& p, int pos,
                                    long len) {
  return detail::flag_from_steps(
      sys, Orientation::forward,
      [&, pos](long j) { return sys.matrix(p.word.letter(pos + int(j)), p.states.at(pos + int(j))); },
      {len}, 1e-4);
}

// backward flag at position pos from the letters before it
inline FlagEstimate backward_flag_at(const CocycleSystem& sys, const TwoSidedPath& p, int pos,
                                     long len) {
  return detail::flag_from_steps(
      sys, Orientation::backward,
      [&, pos](long j) {
        const int q = pos - 1 - int(j);
        return sys.matrix(p.word.letter(q), p.states.at(q)).inverse();
      },
      {len}, 1e-4);
}

// Lyapunov block frames at a position: trivial for a single block, otherwise
// the intersection of the forward and backward flags estimated there.
inline BlockDecomposition blocks_at(const CocycleSystem& sys, const TwoSidedPath& p, int pos,
                                    long flag_horizon, const std::vector<int>& mult,
                                    double angle_tol) {
  const int n = sys.dim();
  if (mult.size() == 1) {
    BlockDecomposition b;
    b.frames = {Mat::Identity(n, n)};
    b.dims = {n};
    b.margin = 1.0;
    b.ok = true;
    return b;
  }
  auto fwd = forward_flag_at(sys, p, pos, flag_horizon);
  auto bwd = backward_flag_at(sys, p, pos, flag_horizon);
  return intersect_flags(fwd, bwd, mult, angle_tol);
}

struct TrackingResult {
  std::vector<long> horizons;
  std::vector<double> defects;  // d(A^n(u,x)^{-1} K, gamma^+(n)) / n
  double lambda_norm = 0;       // Euclidean norm of the fitted exponent vector
};

// Karlsson-Margulis tracking: the orbit A^n(u,x)^{-1} K against the ray
// gamma^+(t) = k exp(t Lambda_hat) K, with k the KAK frame estimated at the
// final horizon and Lambda_hat from the exponent report. The symmetric-space
// distance d(gK, hK) = ||a_log(g^{-1} h)|| is evaluated in extended range.
inline TrackingResult geodesic_tracking(const CocycleSystem& sys, const Word& w, int x0,
                                        const std::vector<long>& horizons,
                                        const LyapunovReport& rep) {
  if (!std::is_sorted(horizons.begin(), horizons.end()) || horizons.empty())
    throw std::invalid_argument("geodesic_tracking horizons must be increasing");
  const int n = sys.dim();
  walk::StatePath sp = walk::state_path(sys, w, x0);

  // exponent vector of the inverse-orbit ray: -reversal(lambda)
  Vec lam_inv(n);
  for (int i = 0; i < n; ++i) lam_inv(i) = -rep.lambda(n - 1 - i);

  struct Snapshot {
    Mat frame;
    Vec avec;
  };
  std::vector<Snapshot> snaps;
  ProductAccumulator acc(n);
  long step = 0;
  for (long h : horizons) {
    for (; step < h; ++step) acc.advance(sys.matrix(w.letter(int(step)), sp.at(int(step))));
    Snapshot s;
    s.frame = acc.slow_frame();
    const std::vector<int> order = acc.slow_order();
    s.avec = Vec(n);
    for (int i = 0; i < n; ++i) s.avec(i) = -acc.ell()(order[size_t(i)]);
    snaps.push_back(std::move(s));
  }

  TrackingResult out;
  out.horizons = horizons;
  out.lambda_norm = rep.lambda.norm();
  const Mat& k_limit = snaps.back().frame;
  for (size_t i = 0; i < horizons.size(); ++i) {
    Mat c = k_limit.transpose() * snaps[i].frame;
    // entries below the orthonormality resolution of the stored frames are
    // representation noise; amplified by exp(n dLambda) they would swamp the
    // distance, so they are treated as unresolved zeros
    for (int r = 0; r < n; ++r)
      for (int s = 0; s < n; ++s)
        if (std::abs(c(r, s)) < 1e-14) c(r, s) = 0.0;
    const Vec lrow = -double(horizons[i]) * lam_inv;
    Vec logs = mplog::log_singular_values_scaled(lrow, c, snaps[i].avec);
    out.defects.push_back(logs.norm() / double(horizons[i]));
  }
  return out;
}

}  // namespace flagwalk::oseledets
