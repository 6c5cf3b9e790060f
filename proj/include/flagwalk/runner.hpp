#pragma once

// Experiment orchestration: parameter schemas, per-experiment runners over a
// deterministic worker pool, and report/curve emission. Reports are
// byte-deterministic for a fixed (config, seed) regardless of worker count,
// so wall-clock timing goes to a sidecar file instead of the report.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "flagwalk/boundary.hpp"
#include "flagwalk/oseledets.hpp"
#include "flagwalk/scenario.hpp"
#include "flagwalk/stationary.hpp"
#include "flagwalk/structure.hpp"
#include "flagwalk/version.hpp"

namespace flagwalk::runner {

using json = nlohmann::json;
using oseledets::LyapunovReport;
using scenario::ScenarioConfig;
using walk::CocycleSystem;
using walk::Orientation;
using walk::Word;

struct Curve {
  std::string name;  // file stem
  std::vector<std::pair<double, double>> points;
};

inline void write_curve(const std::filesystem::path& dir, const Curve& c) {
  std::ofstream os(dir / (c.name + ".csv"));
  os << "horizon,value\n" << std::setprecision(17);
  for (const auto& [x, y] : c.points) os << x << "," << y << "\n";
}

inline json vec_to_json(const Vec& v) {
  std::vector<double> out(v.data(), v.data() + v.size());
  return json(out);
}

// ---------------------------------------------------------------------------
// parameter schemas (defaults materialized so normalization is idempotent)

struct ExponentParams {
  long n_steps = 5000;
  int n_trials = 24;
  double cluster_tol_rel = 1e-2;
  static ExponentParams from_json(const json& j) {
    ExponentParams p;
    p.n_steps = j.value("n_steps", p.n_steps);
    p.n_trials = j.value("n_trials", p.n_trials);
    p.cluster_tol_rel = j.value("cluster_tol_rel", p.cluster_tol_rel);
    return p;
  }
  json to_json() const {
    return {{"n_steps", n_steps}, {"n_trials", n_trials}, {"cluster_tol_rel", cluster_tol_rel}};
  }
};

struct FlagParams {
  std::vector<long> horizons = {30, 100, 300, 1000};
  int n_paths = 6;
  double converge_tol = 1e-4;
  static FlagParams from_json(const json& j) {
    FlagParams p;
    p.horizons = j.value("horizons", p.horizons);
    p.n_paths = j.value("n_paths", p.n_paths);
    p.converge_tol = j.value("converge_tol", p.converge_tol);
    return p;
  }
  json to_json() const {
    return {{"horizons", horizons}, {"n_paths", n_paths}, {"converge_tol", converge_tol}};
  }
};

struct BlockParams {
  int n_paths = 60;
  long flag_horizon = 400;
  double angle_tol = 1e-3;
  static BlockParams from_json(const json& j) {
    BlockParams p;
    p.n_paths = j.value("n_paths", p.n_paths);
    p.flag_horizon = j.value("flag_horizon", p.flag_horizon);
    p.angle_tol = j.value("angle_tol", p.angle_tol);
    return p;
  }
  json to_json() const {
    return {{"n_paths", n_paths}, {"flag_horizon", flag_horizon}, {"angle_tol", angle_tol}};
  }
};

struct ConformalityParams {
  std::vector<long> horizons = {100, 1000, 10000};
  int n_trials = 8;
  long flag_horizon = 800;
  double angle_tol = 1e-3;
  static ConformalityParams from_json(const json& j) {
    ConformalityParams p;
    p.horizons = j.value("horizons", p.horizons);
    p.n_trials = j.value("n_trials", p.n_trials);
    p.flag_horizon = j.value("flag_horizon", p.flag_horizon);
    p.angle_tol = j.value("angle_tol", p.angle_tol);
    return p;
  }
  json to_json() const {
    return {{"horizons", horizons},
            {"n_trials", n_trials},
            {"flag_horizon", flag_horizon},
            {"angle_tol", angle_tol}};
  }
};

struct StationaryParams {
  long burn_in = 1000;
  long n_samples = 600;
  double atom_threshold = 0.2;
  std::vector<double> radius_grid = {0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.005};
  std::vector<long> pullback_horizons = {30, 100, 400};
  double ball_eps = 0.05;
  static StationaryParams from_json(const json& j) {
    StationaryParams p;
    p.burn_in = j.value("burn_in", p.burn_in);
    p.n_samples = j.value("n_samples", p.n_samples);
    p.atom_threshold = j.value("atom_threshold", p.atom_threshold);
    p.radius_grid = j.value("radius_grid", p.radius_grid);
    p.pullback_horizons = j.value("pullback_horizons", p.pullback_horizons);
    p.ball_eps = j.value("ball_eps", p.ball_eps);
    return p;
  }
  json to_json() const {
    return {{"burn_in", burn_in},          {"n_samples", n_samples},
            {"atom_threshold", atom_threshold}, {"radius_grid", radius_grid},
            {"pullback_horizons", pullback_horizons}, {"ball_eps", ball_eps}};
  }
};

struct RegularityParams {
  std::vector<double> eps_grid = {0.0125, 0.025, 0.05, 0.1, 0.2, 0.4};
  int n_g = 24;
  static RegularityParams from_json(const json& j) {
    RegularityParams p;
    p.eps_grid = j.value("eps_grid", p.eps_grid);
    p.n_g = j.value("n_g", p.n_g);
    return p;
  }
  json to_json() const { return {{"eps_grid", eps_grid}, {"n_g", n_g}}; }
};

struct FurstenbergParams {
  long n_mc = 100000;
  static FurstenbergParams from_json(const json& j) {
    FurstenbergParams p;
    p.n_mc = j.value("n_mc", p.n_mc);
    return p;
  }
  json to_json() const { return {{"n_mc", n_mc}}; }
};

struct TrackingParams {
  std::vector<long> horizons = {100, 1000, 10000};
  int n_paths = 1;
  static TrackingParams from_json(const json& j) {
    TrackingParams p;
    p.horizons = j.value("horizons", p.horizons);
    p.n_paths = j.value("n_paths", p.n_paths);
    return p;
  }
  json to_json() const { return {{"horizons", horizons}, {"n_paths", n_paths}}; }
};

inline const std::vector<std::string>& experiment_order() {
  static const std::vector<std::string> k = {"exponents",  "flags",      "blocks",
                                             "conformality", "stationary", "regularity",
                                             "furstenberg", "tracking"};
  return k;
}

// Normalize an experiments object: expand full-report, materialize defaults.
inline json normalize_experiments(const json& experiments) {
  json out = json::object();
  const bool full = experiments.contains("full-report");
  auto pick = [&](const std::string& key) -> std::optional<json> {
    if (experiments.contains(key)) return experiments.at(key);
    if (full) return json::object();
    return std::nullopt;
  };
  if (auto p = pick("exponents")) out["exponents"] = ExponentParams::from_json(*p).to_json();
  if (auto p = pick("flags")) out["flags"] = FlagParams::from_json(*p).to_json();
  if (auto p = pick("blocks")) out["blocks"] = BlockParams::from_json(*p).to_json();
  if (auto p = pick("conformality")) out["conformality"] = ConformalityParams::from_json(*p).to_json();
  if (auto p = pick("stationary")) out["stationary"] = StationaryParams::from_json(*p).to_json();
  if (auto p = pick("regularity")) out["regularity"] = RegularityParams::from_json(*p).to_json();
  if (auto p = pick("furstenberg")) out["furstenberg"] = FurstenbergParams::from_json(*p).to_json();
  if (auto p = pick("tracking")) out["tracking"] = TrackingParams::from_json(*p).to_json();
  return out;
}

// ---------------------------------------------------------------------------
// experiment runners

struct ExperimentOutcome {
  json summary;
  std::vector<Curve> curves;
  std::vector<std::pair<std::string, std::string>> files;  // name -> content
};

inline json report_to_json(const LyapunovReport& rep) {
  json j;
  j["lambda"] = vec_to_json(rep.lambda);
  j["se"] = vec_to_json(rep.se);
  j["lambda_alpha"] = vec_to_json(rep.lambda_alpha);
  j["lambda_alpha_se"] = vec_to_json(rep.lambda_alpha_se);
  j["lambda_alpha_sd"] = vec_to_json(rep.lambda_alpha_sd);
  j["multiplicities"] = rep.multiplicities;
  j["degenerate_roots"] = rep.degenerate;
  auto roots = oseledets::classify_degenerate_roots(rep, rep.cluster_tol);
  j["degenerate_roots_w0_image"] = roots.I_prime;
  j["cluster_tol"] = rep.cluster_tol;
  j["n_steps"] = rep.n_steps;
  j["n_trials"] = rep.n_trials;
  j["exponent_sum"] = rep.lambda.sum();
  return j;
}

inline ExperimentOutcome run_exponents_experiment(const LyapunovReport& rep) {
  ExperimentOutcome out;
  out.summary = report_to_json(rep);
  return out;
}

inline ExperimentOutcome run_flags_experiment(const CocycleSystem& sys, const FlagParams& p,
                                              uint64_t seed, int workers) {
  std::vector<json> rows(size_t(p.n_paths));
  std::vector<std::vector<double>> fwd_res(size_t(p.n_paths)), bwd_res(size_t(p.n_paths));
  oseledets::parallel_trials(p.n_paths, workers, [&](int t) {
    Word wf = walk::sample_word(sys, seed, uint64_t(t), p.horizons.back(), Orientation::forward);
    Word wb = walk::sample_word(sys, seed + 101, uint64_t(t), p.horizons.back(), Orientation::backward);
    CounterRng init(seed, RngStream::initial_conditions, uint64_t(t));
    const int x0 = sys.sample_state(init);
    auto f = oseledets::forward_flag(sys, wf, x0, p.horizons, p.converge_tol);
    auto b = oseledets::backward_flag(sys, wb, x0, p.horizons, p.converge_tol);
    fwd_res[size_t(t)] = f.residuals;
    bwd_res[size_t(t)] = b.residuals;
    rows[size_t(t)] = {{"forward_converged", f.converged}, {"backward_converged", b.converged}};
  });
  ExperimentOutcome out;
  int conv = 0;
  for (const auto& r : rows)
    if (r["forward_converged"].get<bool>() && r["backward_converged"].get<bool>()) ++conv;
  out.summary["paths"] = p.n_paths;
  out.summary["converged_paths"] = conv;
  Curve cf{"forward-residual", {}}, cb{"backward-residual", {}};
  for (size_t h = 0; h + 1 < p.horizons.size(); ++h) {
    std::vector<double> rf, rb;
    for (int t = 0; t < p.n_paths; ++t) {
      rf.push_back(fwd_res[size_t(t)][h]);
      rb.push_back(bwd_res[size_t(t)][h]);
    }
    cf.points.push_back({double(p.horizons[h + 1]), structure::detail::quantile(rf, 0.5)});
    cb.points.push_back({double(p.horizons[h + 1]), structure::detail::quantile(rb, 0.5)});
  }
  out.summary["final_forward_residual_median"] = cf.points.empty() ? 0.0 : cf.points.back().second;
  out.summary["final_backward_residual_median"] = cb.points.empty() ? 0.0 : cb.points.back().second;
  out.curves = {cf, cb};
  return out;
}

inline ExperimentOutcome run_blocks_experiment(const CocycleSystem& sys, const LyapunovReport& rep,
                                               const BlockParams& p, uint64_t seed, int workers) {
  struct Row {
    bool ok = false;
    bool w0 = false;
    double margin = 0;
    std::string error;
  };
  std::vector<Row> rows(size_t(p.n_paths));
  oseledets::parallel_trials(p.n_paths, workers, [&](int t) {
    auto path = oseledets::make_two_sided(sys, seed, uint64_t(t), p.flag_horizon, p.flag_horizon);
    auto fwd = oseledets::forward_flag_at(sys, path, 0, p.flag_horizon);
    auto bwd = oseledets::backward_flag_at(sys, path, 0, p.flag_horizon);
    auto blocks = oseledets::intersect_flags(fwd, bwd, rep.multiplicities, p.angle_tol);
    auto trans = structure::transversality(fwd, bwd, p.angle_tol);
    rows[size_t(t)] = {blocks.ok, trans.is_longest, std::min(blocks.margin, trans.margin),
                       blocks.error};
  });
  ExperimentOutcome out;
  int ok = 0, w0 = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  json failures = json::array();
  for (int t = 0; t < p.n_paths; ++t) {
    const auto& r = rows[size_t(t)];
    if (r.ok) {
      ++ok;
      min_margin = std::min(min_margin, r.margin);
    } else {
      failures.push_back({{"path", t}, {"error", r.error}});
    }
    if (r.w0) ++w0;
  }
  out.summary["paths"] = p.n_paths;
  out.summary["block_dims_ok"] = ok;
  out.summary["block_dim_fraction"] = double(ok) / double(p.n_paths);
  out.summary["w0_positions"] = w0;
  out.summary["w0_fraction"] = double(w0) / double(p.n_paths);
  out.summary["min_margin"] = std::isfinite(min_margin) ? min_margin : 0.0;
  out.summary["multiplicities"] = rep.multiplicities;
  out.summary["degenerate_samples"] = failures;
  return out;
}

struct ConformalityOutcome {
  ExperimentOutcome out;
  std::vector<structure::TightnessVerdict> tightness;        // per block
  std::optional<structure::InvariantFormEstimate> top_form;  // top block
};

inline ConformalityOutcome run_conformality_experiment(const CocycleSystem& sys,
                                                       const LyapunovReport& rep,
                                                       const ConformalityParams& p, uint64_t seed,
                                                       int workers) {
  const auto& mult = rep.multiplicities;
  const int kblocks = int(mult.size());
  const size_t nh = p.horizons.size();
  std::vector<structure::ConjugationTrace> trials(static_cast<size_t>(p.n_trials));
  oseledets::parallel_trials(p.n_trials, workers, [&](int t) {
    auto path = oseledets::make_two_sided(sys, seed, uint64_t(t), p.flag_horizon,
                                          p.horizons.back() + p.flag_horizon);
    trials[size_t(t)] =
        structure::verify_conjugation(sys, path, mult, p.horizons, p.flag_horizon, p.angle_tol);
  });

  ConformalityOutcome co;
  json& summary = co.out.summary;
  int n_ok = 0;
  json errors = json::array();
  for (int t = 0; t < p.n_trials; ++t) {
    if (trials[size_t(t)].ok)
      ++n_ok;
    else
      errors.push_back({{"trial", t}, {"error", trials[size_t(t)].error}});
  }
  summary["trials"] = p.n_trials;
  summary["trials_ok"] = n_ok;
  summary["degenerate_samples"] = errors;
  if (n_ok == 0) throw std::runtime_error("conformality: all trials degenerate");

  summary["blocks"] = json::array();
  for (int l = 0; l < kblocks; ++l) {
    std::vector<std::vector<double>> defects(nh);
    for (size_t hi = 0; hi < nh; ++hi)
      for (const auto& td : trials)
        if (td.ok) defects[hi].push_back(td.defect[hi][size_t(l)]);
    auto verdict = structure::schmidt_tightness(p.horizons, defects);
    co.tightness.push_back(verdict);
    json jb;
    jb["dim"] = mult[size_t(l)];
    jb["verdict"] = structure::to_string(verdict.verdict);
    jb["slope_per_decade"] = verdict.slope;
    jb["ratio95"] = verdict.ratio95;
    jb["median_growth"] = verdict.growth;
    jb["defect_medians"] = verdict.medians;
    double block_residual = 0;
    for (const auto& td : trials)
      if (td.ok)
        for (size_t hi = 0; hi < nh; ++hi)
          block_residual = std::max(block_residual, td.residual[hi][size_t(l)]);
    jb["max_invariance_residual"] = block_residual;
    jb["invariance_flagged"] = block_residual > 1e-3;
    // scalar rate of the removed A_I part against the block exponent
    std::vector<double> rates;
    for (const auto& td : trials)
      if (td.ok) rates.push_back(td.scalar_log[nh - 1][size_t(l)] / double(p.horizons.back()));
    jb["scalar_rate_median"] = structure::detail::quantile(rates, 0.5);
    int at = 0;
    for (int i = 0; i < l; ++i) at += mult[size_t(i)];
    jb["block_exponent"] = rep.lambda(at);
    Curve c{"block" + std::to_string(l + 1) + "-defect-median", {}};
    for (size_t hi = 0; hi < nh; ++hi) c.points.push_back({double(p.horizons[hi]), verdict.medians[hi]});
    co.out.curves.push_back(c);
    summary["blocks"].push_back(jb);
  }

  // invariant form on the top block from the pooled restriction sequence
  {
    std::vector<long> hs;
    std::vector<Mat> ms;
    for (const auto& td : trials)
      if (td.ok)
        for (size_t hi = 0; hi < nh; ++hi) {
          hs.push_back(p.horizons[hi]);
          ms.push_back(td.mtilde[hi][0]);
        }
    if (co.tightness[0].verdict == structure::Tightness::TIGHT) {
      auto form = structure::estimate_invariant_form(hs, ms);
      co.top_form = form;
      json jf;
      jf["ok"] = form.ok;
      if (form.ok) {
        std::vector<double> flat;
        for (int i = 0; i < form.form.rows(); ++i)
          for (int j = 0; j < form.form.cols(); ++j) flat.push_back(form.form(i, j));
        jf["form"] = flat;
        jf["cauchy_residual"] = form.cauchy_residual;
        jf["transfer_residual"] = form.transfer_residual;
        // defect re-measured in the frame adapted to the estimated form
        std::vector<double> adapted;
        for (const auto& td : trials)
          if (td.ok)
            adapted.push_back(
                structure::conformality_defect_in_form(td.mtilde[nh - 1][0], form.form));
        jf["adapted_defect_median"] = structure::detail::quantile(adapted, 0.5);
      } else {
        jf["error"] = form.error;
      }
      summary["top_block_invariant_form"] = jf;
    } else {
      summary["top_block_invariant_form"] = {{"ok", false}, {"error", "top block not TIGHT"}};
    }
  }

  // conjugation residuals (orthogonality defect after removing A_I scalars),
  // over blocks whose invariance held; leaking blocks are counted instead
  {
    std::vector<bool> flagged(size_t(kblocks), false);
    for (int l = 0; l < kblocks; ++l)
      flagged[size_t(l)] = summary["blocks"][size_t(l)]["invariance_flagged"].get<bool>();
    int n_flagged = 0;
    for (bool f : flagged)
      if (f) ++n_flagged;
    Curve c{"conjugation-ortho-defect-median", {}};
    std::vector<double> finals;
    for (size_t hi = 0; hi < nh; ++hi) {
      std::vector<double> ds;
      for (const auto& td : trials)
        if (td.ok) {
          double worst = 0;
          for (int l = 0; l < kblocks; ++l)
            if (!flagged[size_t(l)]) worst = std::max(worst, td.ortho_defect[hi][size_t(l)]);
          ds.push_back(worst);
        }
      c.points.push_back({double(p.horizons[hi]), structure::detail::quantile(ds, 0.5)});
      if (hi == nh - 1) finals = ds;
    }
    summary["conjugation_final_ortho_defect_median"] = structure::detail::quantile(finals, 0.5);
    summary["conjugation_flagged_blocks"] = n_flagged;
    double worst_res = 0;
    for (const auto& td : trials)
      if (td.ok)
        for (size_t hi = 0; hi < nh; ++hi)
          for (double r : td.residual[hi]) worst_res = std::max(worst_res, r);
    summary["max_block_invariance_residual"] = worst_res;
    co.out.curves.push_back(c);
  }
  return co;
}

inline std::vector<int> retained_levels_for_pullback(const LyapunovReport& rep) {
  std::vector<int> out;
  int acc = 0;
  for (auto it = rep.multiplicities.rbegin(); it != rep.multiplicities.rend(); ++it) {
    acc += *it;
    if (acc < int(rep.lambda.size())) out.push_back(acc);
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) out.push_back(int(rep.lambda.size()) - 1);  // single block: top level proxy
  return out;
}

inline ExperimentOutcome run_stationary_experiment(const CocycleSystem& sys,
                                                   const stationary::MeasureCloud& cloud,
                                                   const LyapunovReport& rep,
                                                   const StationaryParams& p, uint64_t seed) {
  ExperimentOutcome out;
  out.summary["n_samples"] = p.n_samples;
  out.summary["stationary_ok"] = cloud.stationary_ok;
  out.summary["diagnostic_z"] = cloud.diagnostic_z;
  {
    std::ostringstream csv;
    stationary::export_cloud_csv(cloud, csv);
    out.files.push_back({"stationary-cloud.csv", csv.str()});
  }

  auto atoms = stationary::atom_test(cloud, p.radius_grid, p.atom_threshold);
  out.summary["atom_verdict"] = stationary::to_string(atoms.verdict);
  out.summary["ball_masses"] = atoms.ball_masses;
  Curve ca{"atom-ball-mass", {}};
  for (size_t i = 0; i < atoms.radii.size(); ++i)
    ca.points.push_back({atoms.radii[i], atoms.ball_masses[i]});
  out.curves.push_back(ca);

  // pullback limit along one sampled word, centered against the forward flag
  Word w = walk::sample_word(sys, seed + 7, 0, p.pullback_horizons.back(), Orientation::forward);
  CounterRng init(seed + 7, RngStream::initial_conditions, 0);
  const int x0 = sys.sample_state(init);
  auto fwd = oseledets::forward_flag(sys, w, x0, p.pullback_horizons);
  auto levels = retained_levels_for_pullback(rep);
  auto pull = stationary::pullback_limit(sys, cloud, w, x0, p.pullback_horizons, levels,
                                         p.ball_eps, &fwd.flag);
  out.summary["pullback_levels"] = levels;
  out.summary["pullback_masses"] = pull.masses;
  out.summary["pullback_final_mass"] = pull.masses.back();
  if (!pull.center_dist.empty())
    out.summary["pullback_final_center_distance"] = pull.center_dist.back();
  Curve cp{"pullback-concentration", {}};
  for (size_t i = 0; i < pull.horizons.size(); ++i)
    cp.points.push_back({double(pull.horizons[i]), pull.masses[i]});
  out.curves.push_back(cp);
  return out;
}

inline ExperimentOutcome run_regularity_experiment(const stationary::MeasureCloud& cloud,
                                                   const RegularityParams& p, uint64_t seed) {
  auto rep = stationary::regularity_scan(cloud, p.eps_grid, p.n_g, seed);
  ExperimentOutcome out;
  out.summary["eps_grid"] = rep.eps_grid;
  out.summary["worst_masses"] = rep.worst_masses;
  out.summary["largest_ball_mass"] = rep.largest_ball_mass;
  Curve c{"worst-mass", {}};
  for (size_t i = 0; i < rep.eps_grid.size(); ++i)
    c.points.push_back({rep.eps_grid[i], rep.worst_masses[i]});
  out.curves = {c};
  return out;
}

inline ExperimentOutcome run_furstenberg_experiment(const CocycleSystem& sys,
                                                    const stationary::MeasureCloud& cloud,
                                                    const LyapunovReport& rep,
                                                    const FurstenbergParams& p, uint64_t seed) {
  auto cmps = stationary::furstenberg_check(sys, cloud, rep, p.n_mc, seed);
  ExperimentOutcome out;
  out.summary["n_mc"] = p.n_mc;
  out.summary["roots"] = json::array();
  double worst = 0;
  for (const auto& c : cmps) {
    out.summary["roots"].push_back({{"root", c.root},
                                    {"integral", c.integral},
                                    {"integral_se", c.integral_se},
                                    {"lambda_alpha", c.lambda_alpha},
                                    {"lambda_alpha_se", c.lambda_alpha_se},
                                    {"zscore", c.zscore}});
    worst = std::max(worst, c.zscore);
  }
  out.summary["max_zscore"] = worst;
  return out;
}

inline ExperimentOutcome run_tracking_experiment(const CocycleSystem& sys,
                                                 const LyapunovReport& rep,
                                                 const TrackingParams& p, uint64_t seed,
                                                 int workers) {
  std::vector<oseledets::TrackingResult> results(size_t(p.n_paths));
  oseledets::parallel_trials(p.n_paths, workers, [&](int t) {
    Word w = walk::sample_word(sys, seed + 13, uint64_t(t), p.horizons.back(), Orientation::forward);
    CounterRng init(seed + 13, RngStream::initial_conditions, uint64_t(t));
    const int x0 = sys.sample_state(init);
    results[size_t(t)] = oseledets::geodesic_tracking(sys, w, x0, p.horizons, rep);
  });
  ExperimentOutcome out;
  Curve c{"defect", {}};
  for (size_t hi = 0; hi < p.horizons.size(); ++hi) {
    std::vector<double> ds;
    for (const auto& r : results) ds.push_back(r.defects[hi]);
    c.points.push_back({double(p.horizons[hi]), structure::detail::quantile(ds, 0.5)});
  }
  out.summary["lambda_norm"] = results.front().lambda_norm;
  out.summary["defect_over_n"] = c.points.back().second;
  out.summary["first_defect_over_n"] = c.points.front().second;
  out.curves = {c};
  return out;
}

// ---------------------------------------------------------------------------
// scenario driver

enum class RunStatus { ok = 0, experiment_failure = 1 };

struct RunResult {
  RunStatus status = RunStatus::ok;
  json report;
  std::vector<Curve> curves;
  std::vector<std::pair<std::string, std::string>> files;
  std::vector<std::pair<std::string, double>> timings;  // sidecar only
};

inline void check_increasing(const json& experiments, const char* exp, const char* key) {
  if (!experiments.contains(exp) || !experiments[exp].contains(key)) return;
  const auto h = experiments[exp][key].get<std::vector<long>>();
  if (h.empty() || !std::is_sorted(h.begin(), h.end()) ||
      std::adjacent_find(h.begin(), h.end()) != h.end() || h.front() < 1)
    throw scenario::ConfigError(std::string(exp) + "." + key +
                                " must be a strictly increasing list of positive horizons");
}

inline RunResult run_scenario(const ScenarioConfig& cfg, int workers) {
  RunResult rr;
  CocycleSystem sys = cfg.build_system();
  const json experiments = normalize_experiments(cfg.experiments);
  check_increasing(experiments, "flags", "horizons");
  check_increasing(experiments, "conformality", "horizons");
  check_increasing(experiments, "tracking", "horizons");
  check_increasing(experiments, "stationary", "pullback_horizons");
  const uint64_t seed = cfg.seed;

  rr.report["version"] = kVersion;
  rr.report["scenario"] = cfg.name;
  rr.report["seed"] = seed;
  rr.report["config_digest"] = cfg.digest();
  rr.report["experiments"] = json::object();
  json failures = json::array();

  auto timed = [&](const std::string& name, auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      ExperimentOutcome out = fn();
      rr.report["experiments"][name] = out.summary;
      for (auto& c : out.curves) {
        c.name = name + "-" + c.name;
        rr.curves.push_back(std::move(c));
      }
      for (auto& f : out.files) rr.files.push_back(std::move(f));
    } catch (const std::exception& e) {
      rr.report["experiments"][name] = {{"error", e.what()}};
      failures.push_back({{"experiment", name}, {"error", e.what()}});
      rr.status = RunStatus::experiment_failure;
    }
    const auto t1 = std::chrono::steady_clock::now();
    rr.timings.push_back({name, std::chrono::duration<double>(t1 - t0).count()});
  };

  // exponent report shared by downstream experiments
  ExponentParams ep = experiments.contains("exponents")
                          ? ExponentParams::from_json(experiments["exponents"])
                          : ExponentParams{};
  std::optional<LyapunovReport> rep;
  auto need_report = [&]() -> const LyapunovReport& {
    if (!rep)
      rep = oseledets::estimate_exponents(sys, ep.n_steps, ep.n_trials, seed, ep.cluster_tol_rel,
                                          workers);
    return *rep;
  };

  // stationary cloud shared by stationary/regularity/furstenberg
  StationaryParams sp = experiments.contains("stationary")
                            ? StationaryParams::from_json(experiments["stationary"])
                            : StationaryParams{};
  std::optional<stationary::MeasureCloud> cloud;
  auto need_cloud = [&]() -> const stationary::MeasureCloud& {
    if (!cloud) cloud = stationary::simulate_stationary(sys, sp.burn_in, sp.n_samples, seed + 3);
    return *cloud;
  };

  for (const std::string& name : experiment_order()) {
    if (!experiments.contains(name)) continue;
    const json& pj = experiments[name];
    if (name == "exponents") {
      timed(name, [&] { return run_exponents_experiment(need_report()); });
    } else if (name == "flags") {
      timed(name, [&] {
        return run_flags_experiment(sys, FlagParams::from_json(pj), seed + 1, workers);
      });
    } else if (name == "blocks") {
      timed(name, [&] {
        return run_blocks_experiment(sys, need_report(), BlockParams::from_json(pj), seed + 2,
                                     workers);
      });
    } else if (name == "conformality") {
      timed(name, [&] {
        return run_conformality_experiment(sys, need_report(), ConformalityParams::from_json(pj),
                                           seed + 4, workers)
            .out;
      });
    } else if (name == "stationary") {
      timed(name, [&] {
        return run_stationary_experiment(sys, need_cloud(), need_report(),
                                         StationaryParams::from_json(pj), seed + 5);
      });
    } else if (name == "regularity") {
      timed(name, [&] {
        return run_regularity_experiment(need_cloud(), RegularityParams::from_json(pj), seed + 6);
      });
    } else if (name == "furstenberg") {
      timed(name, [&] {
        return run_furstenberg_experiment(sys, need_cloud(), need_report(),
                                          FurstenbergParams::from_json(pj), seed + 8);
      });
    } else if (name == "tracking") {
      timed(name, [&] {
        return run_tracking_experiment(sys, need_report(), TrackingParams::from_json(pj), seed + 9,
                                       workers);
      });
    }
  }
  rr.report["failures"] = failures;
  return rr;
}

inline void write_outputs(const RunResult& rr, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "curves");
  {
    std::ofstream os(out_dir / "report.json");
    os << rr.report.dump(2) << "\n";
  }
  for (const auto& c : rr.curves) write_curve(out_dir / "curves", c);
  for (const auto& [name, content] : rr.files) {
    std::ofstream os(out_dir / name);
    os << content;
  }
  {
    std::ofstream os(out_dir / "timing.txt");
    os << std::setprecision(6);
    double total = 0;
    for (const auto& [name, secs] : rr.timings) {
      os << name << " " << secs << "\n";
      total += secs;
    }
    os << "total " << total << "\n";
  }
}

}  // namespace flagwalk::runner
