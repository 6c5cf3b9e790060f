// Acceptance suite: runs every shipped acceptance criterion at its stated
// tolerance and prints one pass/fail line per criterion. Exit code is the
// number of failed criteria.

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "flagwalk/boundary.hpp"
#include "flagwalk/runner.hpp"

using namespace flagwalk;
using walk::CocycleSystem;
using walk::Orientation;
using walk::Word;

namespace {

int g_failures = 0;

void report(int num, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", num, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

CocycleSystem bundled(const std::string& name) {
  return scenario::find_bundled(name).value().build_system();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

// 1. KAK reconstruction on 10^4 random SL(3) and SL(4) elements
void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  double max_resid = 0, max_trace = 0;
  CounterRng rng(20250101, RngStream::tests, 0);
  for (int n : {3, 4}) {
    for (int rep = 0; rep < 10000; ++rep) {
      Mat g = random_special_linear(n, rng);
      auto t = lie::kak(g);
      max_resid = std::max(max_resid, (t.reassemble() - g).cwiseAbs().maxCoeff());
      max_trace = std::max(max_trace, std::abs(t.a_log.sum()));
    }
  }
  const double secs = seconds_since(t0);
  const bool pass = max_resid <= 1e-9 && max_trace <= 1e-9 && secs <= 10.0;
  report(1, pass,
         fmt("decomposition suite: 2x10^4 elements, max residual %.2e, max |sum a_log| %.2e, "
             "%.2f s (<= 10 s)",
             max_resid, max_trace, secs));
}

// 2. roots-in-weights, subadditivity, cocycle identities, xi <= omega
void criterion2() {
  CounterRng rng(20250102, RngStream::tests, 0);
  double riw = 0, sub = 0, low = 0, coc_xi = 0, coc_sig = 0;
  long violations = 0;
  for (int rep = 0; rep < 10000; ++rep) {
    const int n = 2 + rep % 3;
    Mat g1 = random_special_linear(n, rng);
    Mat g2 = random_special_linear(n, rng);
    Vec a1 = lie::kak(g1).a_log;
    Vec a2 = lie::kak(g2).a_log;
    Vec a12 = lie::kak(Mat(g1 * g2)).a_log;
    Vec a2i = lie::kak(Mat(g2.inverse())).a_log;
    Eigen::MatrixXi c = lie::cartan_pairing(n);
    for (int k = 1; k < n; ++k) {
      double sum = 0;
      for (int gamma = 1; gamma < n; ++gamma)
        sum += c(k - 1, gamma - 1) * lie::omega_from_alog(a1, gamma);
      riw = std::max(riw, std::abs(sum - lie::alpha_from_alog(a1, k)));
      sub = std::max(sub, lie::omega_from_alog(a12, k) - lie::omega_from_alog(a1, k) -
                              lie::omega_from_alog(a2, k));
      low = std::max(low, lie::omega_from_alog(a1, k) - lie::omega_from_alog(a2i, k) -
                              lie::omega_from_alog(a12, k));
    }
    FullFlag z = random_full_flag(n, rng);
    FullFlag g2z{orthonormalize(g2 * z.basis)};
    for (int k = 1; k < n; ++k) {
      coc_xi = std::max(coc_xi, std::abs(boundary::xi(g1 * g2, z, k) -
                                         boundary::xi(g1, g2z, k) - boundary::xi(g2, z, k)));
      coc_sig = std::max(coc_sig, std::abs(boundary::sigma_hat(g1 * g2, z, k) -
                                           boundary::sigma_hat(g1, g2z, k) -
                                           boundary::sigma_hat(g2, z, k)));
      if (boundary::xi(g1, z, k) > lie::omega_from_alog(a1, k) + 1e-12) ++violations;
    }
  }
  const bool pass = riw <= 1e-9 && sub <= 1e-9 && low <= 1e-9 && coc_xi <= 1e-9 &&
                    coc_sig <= 1e-9 && violations == 0;
  report(2, pass,
         fmt("algebraic identities on 10^4 samples: roots-in-weights %.2e, subadd %.2e/%.2e, "
             "cocycle xi %.2e sigma %.2e, xi<=omega violations %ld",
             riw, sub, low, coc_xi, coc_sig, violations));
}

// 3. lower-bound deficits do not grow under Cartan scaling x10, x100
void criterion3() {
  CounterRng rng(20250103, RngStream::tests, 0);
  const double eps = 0.1, kappa = 1.0;  // saturation floor of one nat
  double worst_xi = 0, worst_sig = 0;
  int samples = 0;
  while (samples < 300) {
    const int n = 2 + samples % 2;
    Mat k1 = random_rotation(n, rng), k2 = random_rotation(n, rng);
    Vec a = random_gaussian(n, 1, rng).col(0);
    std::sort(a.data(), a.data() + n, std::greater<double>());
    a.array() -= a.mean();
    bool gaps_ok = true;
    for (int i = 0; i + 1 < n; ++i)
      if (a(i) - a(i + 1) < 0.4) gaps_ok = false;
    if (!gaps_ok) continue;
    FullFlag z = random_full_flag(n, rng);
    FullFlag k2z{orthonormalize(k2 * z.basis)};
    if (boundary::dist_to_complement(k2z, Mat::Identity(n, n)) < eps) continue;
    ++samples;
    for (int k = 1; k < n; ++k) {
      double xd[2], sd[2];
      const double scales[2] = {10.0, 100.0};
      for (int s = 0; s < 2; ++s) {
        Vec at = scales[s] * a;
        xd[s] = lie::omega_from_alog(at, k) - boundary::xi_scaled(at, k2, z, k);
        sd[s] = std::abs(lie::alpha_from_alog(at, k) - boundary::sigma_hat_scaled(at, k2, z, k));
      }
      worst_xi = std::max(worst_xi, (xd[1] + kappa) / (xd[0] + kappa));
      worst_sig = std::max(worst_sig, (sd[1] + kappa) / (sd[0] + kappa));
    }
  }
  const bool pass = worst_xi <= 1.5 && worst_sig <= 1.5;
  report(3, pass,
         fmt("bound-constant stability at eps=0.1 over 300 samples: worst deficit ratio "
             "x100/x10 xi %.3f, sigma %.3f (<= 1.5)",
             worst_xi, worst_sig));
}

// 4. rotation scenario: zero spectrum, conformal, Furstenberg zero
void criterion4() {
  auto sys = bundled("rotation");
  auto rep = oseledets::estimate_exponents(sys, 2000, 16, 41, 1e-2, 2);
  bool zeros = true;
  for (int i = 0; i < 3; ++i)
    if (std::abs(rep.lambda(i)) > 3.0 * rep.se(i) + 1e-12) zeros = false;

  runner::ConformalityParams cp;
  cp.horizons = {20, 200, 2000};
  cp.n_trials = 8;
  cp.flag_horizon = 200;
  auto conf = runner::run_conformality_experiment(sys, rep, cp, 43, 2);
  double max_defect = 0;
  for (const auto& v : conf.tightness)
    for (double m : v.medians) max_defect = std::max(max_defect, m);

  auto cloud = stationary::simulate_stationary(sys, 500, 2000, 47);
  auto cmp = stationary::furstenberg_check(sys, cloud, rep, 20000, 53);
  double max_z = 0;
  for (const auto& c : cmp) max_z = std::max(max_z, c.zscore);

  const bool pass = zeros && max_defect <= 1e-8 && max_z <= 3.0;
  report(4, pass,
         fmt("rotation scenario: |lambda|<=3SE %s, max conformality defect %.2e (<= 1e-8), "
             "max Furstenberg z %.2f (<= 3)",
             zeros ? "yes" : "NO", max_defect, max_z));
}

// 5. sl2-mixed: Furstenberg formula at 10^6 Monte Carlo samples
void criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  auto sys = bundled("sl2-mixed");
  auto rep = oseledets::estimate_exponents(sys, 10000, 32, 59, 1e-2, 2);
  auto cloud = stationary::simulate_stationary(sys, 2000, 100000, 61);
  auto cmp = stationary::furstenberg_check(sys, cloud, rep, 1000000, 67);
  const double secs = seconds_since(t0);
  const double z = cmp[0].zscore;
  const double rel = std::abs(cmp[0].integral - cmp[0].lambda_alpha) /
                     std::max(std::abs(cmp[0].lambda_alpha), 1e-12);
  const bool pass = z <= 3.0 && secs <= 120.0;
  report(5, pass,
         fmt("sl2-mixed Furstenberg: integral %.5f vs lambda_alpha %.5f (rel dev %.2f%%), "
             "z %.2f (<= 3), %.1f s (<= 120 s)",
             cmp[0].integral, cmp[0].lambda_alpha, 100 * rel, z, secs));
}

// 6. realified SL(2,C): paired spectrum, I = {1,3}, tight conformal top block
void criterion6() {
  auto sys = bundled("sl2c-realified");
  auto rep = oseledets::estimate_exponents(sys, 10000, 16, 71, 1e-2, 2);
  const bool pair1 = std::abs(rep.lambda(0) - rep.lambda(1)) <= 3.0 * rep.lambda_alpha_se(0) + 1e-12;
  const bool pair2 = std::abs(rep.lambda(2) - rep.lambda(3)) <= 3.0 * rep.lambda_alpha_se(2) + 1e-12;
  const bool iset = rep.degenerate == std::vector<int>{1, 3};

  runner::ConformalityParams cp;
  cp.horizons = {100, 1000, 10000};
  cp.n_trials = 8;
  cp.flag_horizon = 800;
  auto conf = runner::run_conformality_experiment(sys, rep, cp, 73, 2);
  const auto& top = conf.tightness[0];
  const bool slope_ok = top.slope <= 0.01;
  const bool tight = top.verdict == structure::Tightness::TIGHT;
  const bool form_ok = conf.top_form && conf.top_form->ok && conf.top_form->transfer_residual <= 1e-2;

  const bool pass = pair1 && pair2 && iset && slope_ok && tight && form_ok;
  report(6, pass,
         fmt("sl2c-realified: |l1-l2| %.1e, |l3-l4| %.1e (<= 3SE), I={1,3} %s, top-block slope "
             "%.4f (<= 0.01), verdict %s, form transfer %.1e (<= 1e-2)",
             std::abs(rep.lambda(0) - rep.lambda(1)), std::abs(rep.lambda(2) - rep.lambda(3)),
             iset ? "yes" : "NO", top.slope, structure::to_string(top.verdict),
             conf.top_form ? conf.top_form->transfer_residual : -1.0));
}

// 7. negative controls: unbounded defects and the reducible-line atom
void criterion7() {
  auto sys = bundled("diag-negative-control");
  auto rep = oseledets::estimate_exponents(sys, 4000, 24, 79, 1e-2, 2);
  runner::ConformalityParams cp;
  cp.horizons = {100, 1000, 10000};
  cp.n_trials = 24;
  cp.flag_horizon = 100;
  auto conf = runner::run_conformality_experiment(sys, rep, cp, 83, 2);
  const auto& v = conf.tightness[0];
  const double growth = v.medians.back() / std::max(v.medians.front(), 1e-12);
  const bool unbounded = v.verdict == structure::Tightness::UNBOUNDED;

  auto reducible = bundled("reducible-line-control");
  auto cloud = stationary::simulate_stationary(reducible, 2000, 400, 89);
  auto atoms = stationary::atom_test(
      cloud, {0.4, 0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003}, 0.2);
  const bool atom = atoms.verdict == stationary::AtomVerdict::ATOM;

  const bool pass = growth >= 5.0 && unbounded && atom;
  report(7, pass,
         fmt("negative controls: defect median growth 10^2->10^4 %.1fx (>= 5x), verdict %s, "
             "reducible-line atom test %s",
             growth, structure::to_string(v.verdict), stationary::to_string(atoms.verdict)));
}

// 8. sl3-generic flag structure: block dimensions, transversality, pullback
void criterion8() {
  auto sys = bundled("sl3-generic");
  auto rep = oseledets::estimate_exponents(sys, 5000, 24, 97, 1e-2, 2);
  runner::BlockParams bp;
  bp.n_paths = 500;
  bp.flag_horizon = 400;
  bp.angle_tol = 1e-3;
  auto blocks = runner::run_blocks_experiment(sys, rep, bp, 101, 2);
  const double dim_frac = blocks.summary["block_dim_fraction"].get<double>();
  const double w0_frac = blocks.summary["w0_fraction"].get<double>();

  auto cloud = stationary::simulate_stationary(sys, 1000, 500, 103);
  auto levels = runner::retained_levels_for_pullback(rep);
  bool pullback_ok = true;
  double worst_mass = 1.0, worst_center = 0.0;
  for (int path = 0; path < 3; ++path) {
    Word w = walk::sample_word(sys, 107 + uint64_t(path), 0, 300, Orientation::forward);
    auto fwd = oseledets::forward_flag(sys, w, 0, {30, 100, 300});
    auto pull = stationary::pullback_limit(sys, cloud, w, 0, {30, 100, 300}, levels, 0.05,
                                           &fwd.flag);
    worst_mass = std::min(worst_mass, pull.masses.back());
    worst_center = std::max(worst_center, pull.center_dist.back());
    if (pull.masses.back() < 0.9 || pull.center_dist.back() > 1e-2) pullback_ok = false;
  }
  const bool pass = dim_frac >= 0.99 && w0_frac >= 0.99 && pullback_ok;
  report(8, pass,
         fmt("sl3-generic flags over 500 paths: dim V_l = m_l on %.1f%% (>= 99%%), w0 on "
             "%.1f%% (>= 99%%), pullback mass %.3f (>= 0.9) center %.1e (<= 1e-2)",
             100 * dim_frac, 100 * w0_frac, worst_mass, worst_center));
}

// 9. geodesic tracking on the sl2 and sl3 scenarios
void criterion9() {
  bool pass = true;
  std::string detail = "geodesic tracking:";
  for (const char* name : {"sl2-mixed", "sl3-generic"}) {
    auto sys = bundled(name);
    auto rep = oseledets::estimate_exponents(sys, 10000, 24, 109, 1e-2, 2);
    std::vector<double> firsts, finals;
    for (int path = 0; path < 3; ++path) {
      Word w = walk::sample_word(sys, 113, uint64_t(path), 10000, Orientation::forward);
      auto tr = oseledets::geodesic_tracking(sys, w, 0, {100, 1000, 10000}, rep);
      firsts.push_back(tr.defects.front());
      finals.push_back(tr.defects.back());
    }
    const double first = structure::detail::quantile(firsts, 0.5);
    const double final_ = structure::detail::quantile(finals, 0.5);
    const double bound = 0.1 * rep.lambda.norm();
    if (!(final_ <= bound && final_ < first)) pass = false;
    detail += fmt(" %s defect/n %.4f (<= %.4f, first %.4f);", name, final_, bound, first);
  }
  report(9, pass, detail);
}

// 10. byte-identical reports across worker counts for bundled scenarios
void criterion10() {
  namespace fs = std::filesystem;
  const char* cli = std::getenv("FLAGWALK_CLI");
  if (!cli) {
    report(10, false, "reproducibility: FLAGWALK_CLI not set");
    return;
  }
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  bool pass = true;
  std::string detail = "reproducibility:";
  for (const char* name : {"rotation", "diag-negative-control"}) {
    const fs::path dir = fs::temp_directory_path() / ("flagwalk_accept_" + std::string(name));
    fs::remove_all(dir);
    std::string base = std::string(cli) + " run " + name + " --seed 7 ";
    int rc1 = std::system((base + "--workers 1 --out " + (dir / "w1").string() + " >/dev/null 2>&1").c_str());
    int rc4 = std::system((base + "--workers 4 --out " + (dir / "w4").string() + " >/dev/null 2>&1").c_str());
    const std::string r1 = slurp(dir / "w1" / "report.json");
    const std::string r4 = slurp(dir / "w4" / "report.json");
    const bool same = rc1 == 0 && rc4 == 0 && !r1.empty() && r1 == r4;
    if (!same) pass = false;
    detail += fmt(" %s %s (%zu bytes);", name, same ? "identical" : "DIFFER", r1.size());
  }
  report(10, pass, detail);
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  if (g_failures == 0)
    std::printf("acceptance: all criteria passed\n");
  else
    std::printf("acceptance: %d criteria FAILED\n", g_failures);
  return g_failures;
}
