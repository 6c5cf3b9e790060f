#pragma once

// Cocycle systems over a finite base and numerically stable product
// accumulation. A product is held as Q * diag(exp(ell)) * V with Q
// orthonormal, ell the accumulated log diagonal, and V unit upper
// triangular; QR renormalization runs every step by default.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "flagwalk/core.hpp"
#include "flagwalk/flags.hpp"
#include "flagwalk/liegroup.hpp"

namespace flagwalk::walk {

struct Atom {
  double prob = 0;
  std::vector<int> base_map;  // state -> state, a permutation
  std::vector<Mat> mats;      // one matrix per state
};

class CocycleSystem {
 public:
  CocycleSystem(int n, std::vector<std::string> states, std::vector<Atom> atoms,
                Vec base_stationary, bool allow_asymmetric = false)
      : n_(n),
        states_(std::move(states)),
        atoms_(std::move(atoms)),
        base_stationary_(std::move(base_stationary)),
        symmetric_(!allow_asymmetric) {
    validate(allow_asymmetric);
    std::vector<double> probs;
    for (const auto& a : atoms_) probs.push_back(a.prob);
    atom_cdf_ = cdf_from_probs(probs);
  }

  int dim() const { return n_; }
  int n_states() const { return int(states_.size()); }
  int n_atoms() const { return int(atoms_.size()); }
  const std::vector<std::string>& states() const { return states_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const Vec& base_stationary() const { return base_stationary_; }
  const std::vector<double>& atom_cdf() const { return atom_cdf_; }
  bool symmetric() const { return symmetric_; }

  const Mat& matrix(int atom, int state) const { return atoms_[atom].mats[state]; }
  int next_state(int atom, int state) const { return atoms_[atom].base_map[state]; }
  int prev_state(int atom, int state) const { return inverse_maps_[atom][state]; }

  int sample_state(CounterRng& rng) const {
    std::vector<double> cdf(base_stationary_.size());
    double acc = 0;
    for (int i = 0; i < base_stationary_.size(); ++i) {
      acc += base_stationary_(i);
      cdf[i] = acc;
    }
    cdf.back() = 1.0;
    return rng.pick(cdf);
  }

 private:
  void validate(bool allow_asymmetric) {
    if (n_ < 2) throw std::invalid_argument("cocycle dimension must be >= 2");
    if (states_.empty()) throw std::invalid_argument("state set must be non-empty");
    if (atoms_.empty()) throw std::invalid_argument("atom set must be non-empty");
    const int s = n_states();
    double psum = 0;
    for (const auto& a : atoms_) {
      if (!(a.prob > 0)) throw std::invalid_argument("atom probabilities must be positive");
      psum += a.prob;
      if (int(a.base_map.size()) != s) throw std::invalid_argument("base map has wrong size");
      std::vector<int> seen(s, 0);
      for (int x : a.base_map) {
        if (x < 0 || x >= s || seen[x]++) throw std::invalid_argument("base map is not a permutation");
      }
      if (int(a.mats.size()) != s) throw std::invalid_argument("matrix list has wrong size");
      for (const auto& m : a.mats) {
        if (m.rows() != n_ || m.cols() != n_)
          throw std::invalid_argument("matrix dimension mismatch");
        lie::check_group_element(m);
      }
    }
    if (std::abs(psum - 1.0) > 1e-12)
      throw std::invalid_argument("atom probabilities sum to " + std::to_string(psum) +
                                  ", expected 1 within 1e-12");
    if (base_stationary_.size() != s)
      throw std::invalid_argument("base distribution has wrong size");
    for (int i = 0; i < s; ++i)
      if (base_stationary_(i) < 0)
        throw std::invalid_argument("base distribution entries must be nonnegative");
    if (std::abs(base_stationary_.sum() - 1.0) > 1e-12)
      throw std::invalid_argument("base distribution must sum to 1 within 1e-12");

    inverse_maps_.resize(atoms_.size());
    for (size_t a = 0; a < atoms_.size(); ++a) {
      inverse_maps_[a].assign(s, 0);
      for (int x = 0; x < s; ++x) inverse_maps_[a][atoms_[a].base_map[x]] = x;
    }

    // stationarity of the supplied base distribution under the induced chain
    Vec pushed = Vec::Zero(s);
    for (const auto& a : atoms_)
      for (int x = 0; x < s; ++x) pushed(a.base_map[x]) += a.prob * base_stationary_(x);
    if ((pushed - base_stationary_).cwiseAbs().maxCoeff() > 1e-9)
      throw std::invalid_argument("base distribution is not stationary for the induced chain");

    if (!allow_asymmetric) check_symmetry();
  }

  // mu symmetric: every atom g must be matched by an atom of equal
  // probability whose matrices are the inverses along the inverted base map.
  void check_symmetry() {
    const int s = n_states();
    for (size_t a = 0; a < atoms_.size(); ++a) {
      bool matched = false;
      for (size_t b = 0; b < atoms_.size() && !matched; ++b) {
        if (std::abs(atoms_[a].prob - atoms_[b].prob) > 1e-12) continue;
        bool ok = true;
        for (int x = 0; x < s && ok; ++x) {
          if (atoms_[b].base_map[atoms_[a].base_map[x]] != x) ok = false;
        }
        for (int x = 0; x < s && ok; ++x) {
          const int y = atoms_[a].base_map[x];
          Mat prod = atoms_[b].mats[y] * atoms_[a].mats[x];
          if ((prod - Mat::Identity(n_, n_)).cwiseAbs().maxCoeff() > 1e-9) ok = false;
        }
        matched = ok;
      }
      if (!matched)
        throw std::invalid_argument(
            "atom set is not symmetric (no inverse partner for atom " + std::to_string(a) +
            "); pass allow_asymmetric to override");
    }
  }

  int n_;
  std::vector<std::string> states_;
  std::vector<Atom> atoms_;
  Vec base_stationary_;
  std::vector<double> atom_cdf_;
  std::vector<std::vector<int>> inverse_maps_;
  bool symmetric_;
};

enum class Orientation { forward, backward, two_sided };

// Letter sequence. For a two-sided word, positions run over
// [-origin, size-origin) and letter(p) = letters[p + origin].
struct Word {
  Orientation orientation = Orientation::forward;
  std::vector<int> letters;
  int origin = 0;

  int length() const { return int(letters.size()); }
  int letter(int pos) const { return letters[pos + origin]; }
  int min_pos() const { return -origin; }
  int max_pos() const { return int(letters.size()) - origin; }
};

inline Word sample_word(const CocycleSystem& sys, uint64_t seed, uint64_t trial, long length,
                        Orientation orientation, int backward_part = 0) {
  if (length < 0) throw std::invalid_argument("word length must be >= 0");
  CounterRng rng(seed, RngStream::words, trial);
  Word w;
  w.orientation = orientation;
  w.letters.resize(size_t(length));
  for (long i = 0; i < length; ++i) w.letters[size_t(i)] = rng.pick(sys.atom_cdf());
  w.origin = (orientation == Orientation::two_sided) ? backward_part : 0;
  return w;
}

// State trajectory x_p over positions [min_pos, max_pos], anchored at
// x_0 = x0; negative positions walk the inverse base maps.
struct StatePath {
  std::vector<int> states;  // index p + origin
  int origin = 0;
  int at(int pos) const { return states[size_t(pos + origin)]; }
};

inline StatePath state_path(const CocycleSystem& sys, const Word& w, int x0) {
  StatePath sp;
  sp.origin = w.origin;
  sp.states.assign(w.letters.size() + 1, 0);
  sp.states[size_t(w.origin)] = x0;
  for (int p = 0; p < w.max_pos(); ++p)
    sp.states[size_t(p + 1 + w.origin)] = sys.next_state(w.letter(p), sp.at(p));
  for (int p = -1; p >= w.min_pos(); --p)
    sp.states[size_t(p + w.origin)] = sys.prev_state(w.letter(p), sp.at(p + 1));
  return sp;
}

// Log-scale product representation A = Q * diag(exp(ell)) * V. The QR
// renormalization runs every step by default; a longer period batches the
// raw multiplications (only safe while the batch stays in double range).
class ProductAccumulator {
 public:
  explicit ProductAccumulator(int n, int renorm_period = 1)
      : q_(Mat::Identity(n, n)),
        ell_(Vec::Zero(n)),
        v_(Mat::Identity(n, n)),
        pending_(Mat::Identity(n, n)),
        period_(std::max(1, renorm_period)) {}

  int dim() const { return int(q_.rows()); }
  long steps() const { return steps_; }
  const Mat& q() const {
    sync();
    return q_;
  }
  const Vec& ell() const {
    sync();
    return ell_;
  }
  const Mat& v() const {
    sync();
    return v_;
  }
  bool v_overflow() const { return v_overflow_; }

  void advance(const Mat& m) {
    ++steps_;
    if (period_ == 1) {
      renormalize(m);
      return;
    }
    pending_ = m * pending_;
    if (++pending_count_ == period_) sync();
  }

 private:
  void sync() const {
    if (pending_count_ == 0) return;
    const_cast<ProductAccumulator*>(this)->flush();
  }

  void flush() {
    Mat m = pending_;
    pending_ = Mat::Identity(dim(), dim());
    pending_count_ = 0;
    renormalize(m);
  }

  // Left-multiply by one factor and restore the Q * diag * V form.
  void renormalize(const Mat& m) {
    const int n = dim();
    QrPos qr = qr_pos(m * q_);
    // T = R * diag(exp(ell)) * V re-normalized to diag * unit-upper V'
    Mat vnew = Mat::Identity(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        double acc = 0;
        for (int k = i; k <= j; ++k) {
          const double e = ell_(k) - ell_(i);
          if (e > 690.0) {
            v_overflow_ = true;
            continue;
          }
          acc += (qr.r(i, k) / qr.r(i, i)) * std::exp(e) * v_(k, j);
        }
        vnew(i, j) = acc;
      }
    }
    for (int i = 0; i < n; ++i) ell_(i) += std::log(qr.r(i, i));
    q_ = std::move(qr.q);
    v_ = std::move(vnew);
  }

 public:
  // Exponent logs sorted non-increasing (the Cartan-style diagonal).
  Vec a_log() const {
    sync();
    Vec s = ell_;
    std::sort(s.data(), s.data() + s.size(), std::greater<double>());
    return s;
  }

  // Indices of ell sorted ascending (slowest mode first).
  std::vector<int> slow_order() const {
    sync();
    std::vector<int> idx(dim());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return ell_(a) < ell_(b); });
    return idx;
  }

  // Orthonormal basis whose first d columns span the d slowest directions
  // of the product (the right-singular frame in stabilized form).
  Mat slow_frame() const {
    sync();
    const int n = dim();
    const std::vector<int> order = slow_order();
    Mat e = Mat::Zero(n, n);
    for (int j = 0; j < n; ++j) e(order[j], j) = 1.0;
    Mat w = v_.triangularView<Eigen::Upper>().solve(e);
    return qr_pos(w).q;
  }

  // Only valid while the entries fit in doubles; test / short-word use.
  Mat reassemble() const {
    sync();
    return q_ * ell_.array().exp().matrix().asDiagonal() * v_;
  }

 private:
  mutable Mat q_;
  mutable Vec ell_;
  mutable Mat v_;  // unit upper triangular
  mutable Mat pending_;
  mutable int pending_count_ = 0;
  int period_ = 1;
  long steps_ = 0;
  mutable bool v_overflow_ = false;
};

// A^n(u, x0) for a forward word.
inline ProductAccumulator forward_product(const CocycleSystem& sys, const Word& w, int x0) {
  if (w.orientation == Orientation::backward)
    throw std::invalid_argument("forward_product needs a forward-oriented word");
  ProductAccumulator acc(sys.dim());
  int x = x0;
  for (int p = 0; p < w.max_pos(); ++p) {
    acc.advance(sys.matrix(w.letter(p), x));
    x = sys.next_state(w.letter(p), x);
  }
  return acc;
}

// A^{-n}(v, y0) for a backward word: letters[j] = v_{-j}, so the factors are
// A(v_0, v_0^{-1} y0)^{-1}, then A(v_{-1}, ...)^{-1}, each multiplied on the
// left as in the forward case.
inline ProductAccumulator backward_product(const CocycleSystem& sys, const Word& w, int y0) {
  if (w.orientation == Orientation::forward)
    throw std::invalid_argument("backward_product needs a backward-oriented word");
  ProductAccumulator acc(sys.dim());
  int y = y0;
  for (size_t j = 0; j < w.letters.size(); ++j) {
    const int a = w.letters[j];
    const int yprev = sys.prev_state(a, y);
    acc.advance(sys.matrix(a, yprev).inverse());
    y = yprev;
  }
  return acc;
}

}  // namespace flagwalk::walk
