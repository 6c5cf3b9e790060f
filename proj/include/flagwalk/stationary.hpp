#pragma once

// Stationary measures on the flag bundle X x H/B as empirical chain clouds:
// simulation with a convolution-invariance diagnostic, pullback limits along
// words, regularity scans against translated Schubert complements, an atom
// test, and the Furstenberg-formula consistency check.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "flagwalk/boundary.hpp"
#include "flagwalk/oseledets.hpp"
#include "flagwalk/walk.hpp"

namespace flagwalk::stationary {

using oseledets::LyapunovReport;
using walk::CocycleSystem;
using walk::ProductAccumulator;
using walk::Word;

struct CloudSample {
  double weight;
  int state;
  FullFlag flag;
};

struct MeasureCloud {
  std::vector<CloudSample> samples;
  bool stationary_ok = false;
  std::vector<double> diagnostic_z;  // per test function

  double total_weight() const {
    double s = 0;
    for (const auto& c : samples) s += c.weight;
    return s;
  }
};

namespace detail {

// Fixed battery of smooth test functions: entries of the level-k orthogonal
// projectors, for the first and last proper level.
inline std::vector<double> test_battery(const FullFlag& z) {
  const int n = z.dim();
  std::vector<double> out;
  for (int k : {1, n - 1}) {
    Mat p = z.level(k) * z.level(k).transpose();
    out.push_back(p(0, 0));
    out.push_back(p(0, n - 1));
    out.push_back(p(n - 1, n - 1));
  }
  return out;
}

}  // namespace detail

// Markov chain on X x H/B under g.(x,z) = (gx, A(g,x)z); the post-burn-in
// samples form the cloud. The attached diagnostic compares integrals of the
// test battery against their one-step convolutions, with batch-mean errors.
inline MeasureCloud simulate_stationary(const CocycleSystem& sys, long burn_in, long n_samples,
                                        uint64_t seed) {
  if (burn_in < 1 || n_samples < 1)
    throw std::invalid_argument("simulate_stationary: burn_in and n_samples must be >= 1");
  const int n = sys.dim();
  CounterRng rng(seed, RngStream::stationary_chain, 0);
  int x = sys.sample_state(rng);
  FullFlag z = random_full_flag(n, rng);
  for (long i = 0; i < burn_in; ++i) {
    const int a = rng.pick(sys.atom_cdf());
    z.basis = orthonormalize(sys.matrix(a, x) * z.basis);
    x = sys.next_state(a, x);
  }
  MeasureCloud cloud;
  cloud.samples.reserve(size_t(n_samples));
  for (long i = 0; i < n_samples; ++i) {
    cloud.samples.push_back({1.0 / double(n_samples), x, z});
    const int a = rng.pick(sys.atom_cdf());
    z.basis = orthonormalize(sys.matrix(a, x) * z.basis);
    x = sys.next_state(a, x);
  }

  // convolution invariance of the test battery, batch means over the chain
  const size_t nf = detail::test_battery(cloud.samples.front().flag).size();
  const int nbatch = 20;
  std::vector<std::vector<double>> bsum(nf, std::vector<double>(nbatch, 0.0));
  std::vector<std::vector<long>> bcount(nf, std::vector<long>(nbatch, 0));
  for (size_t i = 0; i < cloud.samples.size(); ++i) {
    const auto& s = cloud.samples[i];
    const int b = int(i * size_t(nbatch) / cloud.samples.size());
    std::vector<double> base = detail::test_battery(s.flag);
    std::vector<double> conv(nf, 0.0);
    for (int a = 0; a < sys.n_atoms(); ++a) {
      FullFlag gz{orthonormalize(sys.matrix(a, s.state) * s.flag.basis)};
      std::vector<double> f = detail::test_battery(gz);
      for (size_t j = 0; j < nf; ++j) conv[j] += sys.atoms()[size_t(a)].prob * f[j];
    }
    for (size_t j = 0; j < nf; ++j) {
      bsum[j][size_t(b)] += conv[j] - base[j];
      bcount[j][size_t(b)] += 1;
    }
  }
  cloud.stationary_ok = true;
  for (size_t j = 0; j < nf; ++j) {
    std::vector<double> means;
    for (int b = 0; b < nbatch; ++b)
      if (bcount[j][size_t(b)] > 0) means.push_back(bsum[j][size_t(b)] / double(bcount[j][size_t(b)]));
    double mean = 0;
    for (double m : means) mean += m;
    mean /= double(means.size());
    double var = 0;
    for (double m : means) var += (m - mean) * (m - mean);
    const double se = std::sqrt(var / double(means.size() - 1) / double(means.size()));
    const double zscore = std::abs(mean) <= 1e-12 ? 0.0 : std::abs(mean) / std::max(se, 1e-300);
    cloud.diagnostic_z.push_back(zscore);
    if (zscore > 3.0) cloud.stationary_ok = false;
  }
  return cloud;
}

struct PullbackResult {
  std::vector<long> horizons;
  std::vector<double> masses;               // largest ball mass per horizon
  std::vector<PartialFlagPoint> centers;    // heaviest ball center in H/P_I'
  std::vector<double> center_dist;          // center to reference flag (if given)
  std::vector<int> retained_levels;         // projection levels used for H/P_I'
};

// Pullback limit along a word: at each horizon, the cloud conditioned at the
// path's current state is pulled back by the inverse product, projected to
// the retained levels, and scanned for its heaviest ball.
inline PullbackResult pullback_limit(const CocycleSystem& sys, const MeasureCloud& cloud,
                                     const Word& w, int x0, const std::vector<long>& horizons,
                                     const std::vector<int>& retained_levels, double ball_eps,
                                     const FullFlag* reference = nullptr) {
  if (!std::is_sorted(horizons.begin(), horizons.end()) || horizons.empty())
    throw std::invalid_argument("pullback_limit: horizons must be increasing");
  const int n = sys.dim();
  walk::StatePath sp = walk::state_path(sys, w, x0);
  PullbackResult out;
  out.horizons = horizons;
  out.retained_levels = retained_levels;
  ParabolicSpec spec;
  spec.n = n;
  for (int k = 1; k < n; ++k)
    if (std::find(retained_levels.begin(), retained_levels.end(), k) == retained_levels.end())
      spec.I.push_back(k);

  ProductAccumulator acc(n);
  long step = 0;
  for (long h : horizons) {
    for (; step < h; ++step) acc.advance(sys.matrix(w.letter(int(step)), sp.at(int(step))));
    const int xn = sp.at(int(h));
    // Pull back each sample at the current state: z -> span of
    // V^{-1} D^{-1} Q^T z. The inverse-product scales exp(-ell) span
    // thousands of nats, so the flag is triangularized in mode coordinates
    // first (column operations never change a flag's levels): column j is
    // left supported on the j-th slowest mode and below, and only then are
    // the rows scaled, one log-rescale per column. Without the elimination
    // the subdominant directions of every level drown in roundoff once
    // n * gap exceeds the double mantissa.
    const std::vector<int> order = acc.slow_order();
    std::vector<FullFlag> pulled;
    std::vector<double> weights;
    for (const auto& s : cloud.samples) {
      if (s.state != xn) continue;
      Mat wz = acc.q().transpose() * s.flag.basis;
      Mat low(n, n);  // rows in slow order
      for (int i = 0; i < n; ++i) low.row(i) = wz.row(order[size_t(i)]);
      for (int j = 0; j < n; ++j) {
        const double pivot = low(j, j);
        if (pivot == 0.0) continue;  // non-generic alignment, sample kept as is
        for (int k = j + 1; k < n; ++k) {
          const double f = low(j, k) / pivot;
          low.col(k) -= f * low.col(j);
          low(j, k) = 0.0;
        }
      }
      Mat scaled = Mat::Zero(n, n);
      for (int j = 0; j < n; ++j) {
        double cmax = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
          const double mag = std::abs(low(i, j));
          if (mag > 0) cmax = std::max(cmax, -acc.ell()(order[size_t(i)]) + std::log(mag));
        }
        if (!std::isfinite(cmax)) continue;
        for (int i = 0; i < n; ++i) {
          const double mag = std::abs(low(i, j));
          if (mag > 0)
            scaled(order[size_t(i)], j) =
                std::copysign(std::exp(-acc.ell()(order[size_t(i)]) + std::log(mag) - cmax), low(i, j));
        }
      }
      Mat back = acc.v().triangularView<Eigen::Upper>().solve(scaled);
      pulled.push_back(FullFlag{orthonormalize(back)});
      weights.push_back(s.weight);
    }
    double total = 0;
    for (double ww : weights) total += ww;
    double best_mass = 0;
    size_t best_idx = 0;
    for (size_t i = 0; i < pulled.size(); ++i) {
      double mass = 0;
      for (size_t j = 0; j < pulled.size(); ++j)
        if (partial_flag_distance(pulled[i], pulled[j], retained_levels) < ball_eps)
          mass += weights[j];
      if (mass > best_mass) {
        best_mass = mass;
        best_idx = i;
      }
    }
    out.masses.push_back(total > 0 ? best_mass / total : 0.0);
    const FullFlag& center = pulled.empty() ? FullFlag::standard(n) : pulled[best_idx];
    out.centers.push_back(PartialFlagPoint{spec, center.basis});
    if (reference && !pulled.empty())
      out.center_dist.push_back(partial_flag_distance(center, *reference, retained_levels));
  }
  return out;
}

struct RegularityReport {
  std::vector<double> eps_grid;
  std::vector<double> worst_masses;  // sup over sampled g of mass(Nbhd_eps(gJ))
  double largest_ball_mass = 0;
};

// Worst-case mass near translated Schubert complements, over random group
// elements plus adversarial ones centered on cloud samples.
inline RegularityReport regularity_scan(const MeasureCloud& cloud, std::vector<double> eps_grid,
                                        int n_g, uint64_t seed) {
  if (cloud.samples.empty()) throw std::invalid_argument("regularity_scan: empty cloud");
  std::sort(eps_grid.begin(), eps_grid.end());
  const int n = cloud.samples.front().flag.dim();

  // largest single-ball mass at the smallest radius; its center is the
  // cloud's mode
  double best = 0;
  size_t mode = 0;
  for (size_t i = 0; i < cloud.samples.size(); ++i) {
    double mass = 0;
    for (size_t j = 0; j < cloud.samples.size(); ++j)
      if (flag_distance(cloud.samples[i].flag, cloud.samples[j].flag) < eps_grid.front())
        mass += cloud.samples[j].weight;
    if (mass > best) {
      best = mass;
      mode = i;
    }
  }

  CounterRng rng(seed, RngStream::regularity, 0);
  std::vector<Mat> gs;
  for (int i = 0; i < n_g; ++i) gs.push_back(random_special_linear(n, rng));
  // adversarial translates land J on the cloud mode and on spread samples;
  // random g alone misses the worst cases the definition quantifies over
  const size_t stride = std::max<size_t>(1, cloud.samples.size() / 8);
  for (size_t i = 0; i < cloud.samples.size(); i += stride) {
    Mat b = cloud.samples[i].flag.basis;
    if (b.determinant() < 0) b.col(n - 1) = -b.col(n - 1);
    gs.push_back(b);
  }
  {
    Mat b = cloud.samples[mode].flag.basis;
    if (b.determinant() < 0) b.col(n - 1) = -b.col(n - 1);
    gs.push_back(b);
  }

  RegularityReport rep;
  rep.eps_grid = eps_grid;
  rep.worst_masses.assign(eps_grid.size(), 0.0);
  for (const Mat& g : gs) {
    std::vector<double> dists;
    dists.reserve(cloud.samples.size());
    for (const auto& s : cloud.samples) dists.push_back(boundary::dist_to_complement(s.flag, g));
    for (size_t e = 0; e < eps_grid.size(); ++e) {
      double mass = 0;
      for (size_t i = 0; i < cloud.samples.size(); ++i)
        if (dists[i] < eps_grid[e]) mass += cloud.samples[i].weight;
      rep.worst_masses[e] = std::max(rep.worst_masses[e], mass);
    }
  }
  rep.largest_ball_mass = best;
  return rep;
}

enum class AtomVerdict { ATOM, NO_ATOM, INCONCLUSIVE };

inline const char* to_string(AtomVerdict v) {
  switch (v) {
    case AtomVerdict::ATOM: return "ATOM";
    case AtomVerdict::NO_ATOM: return "NO-ATOM";
    default: return "INCONCLUSIVE";
  }
}

struct AtomTestResult {
  AtomVerdict verdict = AtomVerdict::INCONCLUSIVE;
  std::vector<double> radii;
  std::vector<double> ball_masses;  // largest single-ball mass per radius
};

// ATOM when the largest ball mass fails to decay as the radius shrinks
// across the grid (which must span two decades).
inline AtomTestResult atom_test(const MeasureCloud& cloud, std::vector<double> radii,
                                double threshold) {
  if (cloud.samples.empty()) throw std::invalid_argument("atom_test: empty cloud");
  std::sort(radii.begin(), radii.end(), std::greater<double>());
  if (radii.size() < 2 || radii.front() / radii.back() < 100.0 - 1e-9)
    throw std::invalid_argument("atom_test: radius grid must span >= 2 decades");
  AtomTestResult out;
  out.radii = radii;
  const size_t ns = cloud.samples.size();
  std::vector<std::vector<double>> dist(ns, std::vector<double>(ns, 0.0));
  for (size_t i = 0; i < ns; ++i)
    for (size_t j = i + 1; j < ns; ++j)
      dist[i][j] = dist[j][i] = flag_distance(cloud.samples[i].flag, cloud.samples[j].flag);
  for (double r : radii) {
    double best = 0;
    for (size_t i = 0; i < ns; ++i) {
      double mass = 0;
      for (size_t j = 0; j < ns; ++j)
        if (dist[i][j] < r) mass += cloud.samples[j].weight;
      best = std::max(best, mass);
    }
    out.ball_masses.push_back(best);
  }
  if (ns < 50) {
    out.verdict = AtomVerdict::INCONCLUSIVE;
    return out;
  }
  out.verdict = out.ball_masses.back() >= threshold ? AtomVerdict::ATOM : AtomVerdict::NO_ATOM;
  return out;
}

struct FurstenbergComparison {
  int root = 0;
  double integral = 0;      // Monte Carlo boundary integral
  double integral_se = 0;   // batch-mean SE (captures cloud autocorrelation)
  double lambda_alpha = 0;  // time-average rate from the exponent report
  double lambda_alpha_se = 0;
  double zscore = 0;
};

// Furstenberg's formula: lambda_alpha against the double integral of
// sigma_bar over mu x cloud, with the combined standard error.
inline std::vector<FurstenbergComparison> furstenberg_check(const CocycleSystem& sys,
                                                            const MeasureCloud& cloud,
                                                            const LyapunovReport& rep, long n_mc,
                                                            uint64_t seed) {
  if (!cloud.stationary_ok)
    throw std::runtime_error("furstenberg_check: cloud failed the stationarity diagnostic");
  if (cloud.samples.empty()) throw std::invalid_argument("furstenberg_check: empty cloud");
  const int n = sys.dim();
  CounterRng rng(seed, RngStream::monte_carlo, 0);
  const int nbatch = 20;
  std::vector<std::vector<double>> bsum(size_t(n - 1), std::vector<double>(nbatch, 0.0));
  std::vector<long> bcount(nbatch, 0);
  std::vector<double> cweight;
  double wacc = 0;
  for (const auto& s : cloud.samples) cweight.push_back(wacc += s.weight);
  cweight.back() = wacc;
  for (auto& cw : cweight) cw /= wacc;

  for (long i = 0; i < n_mc; ++i) {
    const int si = rng.pick(cweight);
    const auto& s = cloud.samples[size_t(si)];
    const int a = rng.pick(sys.atom_cdf());
    // batch by chain position of the sample, so cloud autocorrelation is
    // reflected in the error bar
    const int b = int(size_t(si) * size_t(nbatch) / cloud.samples.size());
    QrPos qr = qr_pos(sys.matrix(a, s.state) * s.flag.basis);
    for (int k = 1; k < n; ++k)
      bsum[size_t(k - 1)][size_t(b)] += std::log(qr.r(k - 1, k - 1)) - std::log(qr.r(k, k));
    bcount[size_t(b)] += 1;
  }

  std::vector<FurstenbergComparison> out;
  for (int k = 1; k < n; ++k) {
    std::vector<double> means;
    for (int b = 0; b < nbatch; ++b)
      if (bcount[size_t(b)] > 0) means.push_back(bsum[size_t(k - 1)][size_t(b)] / double(bcount[size_t(b)]));
    FurstenbergComparison cmp;
    cmp.root = k;
    for (double m : means) cmp.integral += m;
    cmp.integral /= double(means.size());
    double var = 0;
    for (double m : means) var += (m - cmp.integral) * (m - cmp.integral);
    cmp.integral_se = std::sqrt(var / double(means.size() - 1) / double(means.size()));
    cmp.lambda_alpha = rep.lambda_alpha(k - 1);
    cmp.lambda_alpha_se = rep.lambda_alpha_se(k - 1);
    const double diff = std::abs(cmp.integral - cmp.lambda_alpha);
    const double se = std::sqrt(cmp.integral_se * cmp.integral_se +
                                cmp.lambda_alpha_se * cmp.lambda_alpha_se);
    cmp.zscore = diff <= 1e-12 ? 0.0 : diff / std::max(se, 1e-300);
    out.push_back(cmp);
  }
  return out;
}

// CSV export: weight, state, then n^2 row-major basis entries per flag.
inline void export_cloud_csv(const MeasureCloud& cloud, std::ostream& os) {
  if (cloud.samples.empty()) throw std::invalid_argument("export_cloud_csv: empty cloud");
  const int n = cloud.samples.front().flag.dim();
  os << "weight,state";
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) os << ",b" << i << j;
  os << "\n";
  os << std::setprecision(17);
  for (const auto& s : cloud.samples) {
    os << s.weight << "," << s.state;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) os << "," << s.flag.basis(i, j);
    os << "\n";
  }
}

inline MeasureCloud import_cloud_csv(std::istream& is, int n) {
  MeasureCloud cloud;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("import_cloud_csv: missing header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    CloudSample s;
    if (!std::getline(ss, cell, ',')) break;
    s.weight = std::stod(cell);
    if (!std::getline(ss, cell, ',')) throw std::runtime_error("import_cloud_csv: short row");
    s.state = std::stoi(cell);
    s.flag.basis = Mat(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (!std::getline(ss, cell, ',')) throw std::runtime_error("import_cloud_csv: short row");
        s.flag.basis(i, j) = std::stod(cell);
      }
    if (!s.flag.valid(1e-8)) throw std::runtime_error("import_cloud_csv: flag basis not orthonormal");
    if (!(s.weight > 0)) throw std::runtime_error("import_cloud_csv: weights must be positive");
    cloud.samples.push_back(std::move(s));
  }
  if (std::abs(cloud.total_weight() - 1.0) > 1e-9)
    throw std::runtime_error("import_cloud_csv: weights must sum to 1");
  cloud.stationary_ok = true;  // imported clouds carry no diagnostic
  return cloud;
}

}  // namespace flagwalk::stationary
