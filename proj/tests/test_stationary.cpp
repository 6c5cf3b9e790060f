#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "flagwalk/scenario.hpp"
#include "flagwalk/stationary.hpp"

using namespace flagwalk;
using namespace flagwalk::walk;
using namespace flagwalk::stationary;

namespace {

Mat rot2(double t) {
  Mat r(2, 2);
  r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  return r;
}

CocycleSystem sl2_mixed() {
  Mat h = Mat::Zero(2, 2);
  h(0, 0) = 2;
  h(1, 1) = 0.5;
  Mat r = rot2(1.0);
  return CocycleSystem(2, {"*"},
                       {{0.25, {0}, {h}},
                        {0.25, {0}, {h.inverse()}},
                        {0.25, {0}, {r}},
                        {0.25, {0}, {r.transpose()}}},
                       Vec::Ones(1));
}

double direction_angle(const FullFlag& z) {
  double a = std::atan2(z.basis(1, 0), z.basis(0, 0));
  if (a < 0) a += M_PI;
  if (a >= M_PI) a -= M_PI;
  return a;
}

}  // namespace

TEST_CASE("identity-only cocycle keeps the initial flag and passes the diagnostic") {
  CocycleSystem sys(2, {"*"}, {{1.0, {0}, {Mat::Identity(2, 2)}}}, Vec::Ones(1));
  auto cloud = simulate_stationary(sys, 10, 200, 5);
  REQUIRE(cloud.stationary_ok);
  for (const auto& s : cloud.samples)
    REQUIRE(flag_distance(s.flag, cloud.samples.front().flag) < 1e-12);
}

TEST_CASE("irrational rotation equidistributes on the circle of directions") {
  CocycleSystem sys(2, {"*"}, {{1.0, {0}, {rot2(1.0)}}}, Vec::Ones(1),
                    /*allow_asymmetric=*/true);
  const long n = 4000;
  auto cloud = simulate_stationary(sys, 100, n, 7);
  std::vector<double> angles;
  for (const auto& s : cloud.samples) angles.push_back(direction_angle(s.flag) / M_PI);
  std::sort(angles.begin(), angles.end());
  double ks = 0;
  for (size_t i = 0; i < angles.size(); ++i) {
    ks = std::max(ks, std::abs(angles[i] - double(i) / double(n)));
    ks = std::max(ks, std::abs(angles[i] - double(i + 1) / double(n)));
  }
  REQUIRE(ks <= 2.0 / std::sqrt(double(n)));
}

TEST_CASE("hyperbolic plus elliptic cloud is spread out and non-atomic") {
  auto sys = sl2_mixed();
  auto cloud = simulate_stationary(sys, 500, 400, 11);
  REQUIRE(cloud.stationary_ok);
  auto atoms = atom_test(cloud, {0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.004},
                         0.2);
  REQUIRE(atoms.verdict == AtomVerdict::NO_ATOM);
  // ball masses shrink with the radius
  REQUIRE(atoms.ball_masses.back() < atoms.ball_masses.front());
  for (size_t i = 0; i + 1 < atoms.ball_masses.size(); ++i)
    REQUIRE(atoms.ball_masses[i + 1] <= atoms.ball_masses[i] + 1e-12);
}

TEST_CASE("atom test verdicts on constructed clouds") {
  // point mass
  MeasureCloud point;
  for (int i = 0; i < 100; ++i) point.samples.push_back({0.01, 0, FullFlag::standard(2)});
  auto atom = atom_test(point, {0.4, 0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003}, 0.2);
  REQUIRE(atom.verdict == AtomVerdict::ATOM);

  // uniform circle: ball mass proportional to the radius
  MeasureCloud circle;
  const int n = 600;
  for (int i = 0; i < n; ++i) {
    FullFlag z{rot2(M_PI * double(i) / double(n))};
    circle.samples.push_back({1.0 / n, 0, z});
  }
  auto no_atom = atom_test(circle, {0.4, 0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003}, 0.2);
  REQUIRE(no_atom.verdict == AtomVerdict::NO_ATOM);
  for (size_t i = 0; i + 1 < no_atom.radii.size(); ++i) {
    const double expected = std::min(1.0, 2.0 * no_atom.radii[i] / M_PI) + 2.0 / n;
    REQUIRE(no_atom.ball_masses[i] <= expected * 1.2);
  }

  // tiny cloud cannot decide
  MeasureCloud tiny;
  for (int i = 0; i < 10; ++i) tiny.samples.push_back({0.1, 0, FullFlag::standard(2)});
  REQUIRE(atom_test(tiny, {0.4, 0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003}, 0.2).verdict ==
          AtomVerdict::INCONCLUSIVE);
}

TEST_CASE("reducible control concentrates on the invariant line") {
  Mat u(2, 2), ui(2, 2);
  u << 2, 1, 0, 0.5;
  ui << 0.5, -1, 0, 2;
  CocycleSystem sys(2, {"*"}, {{0.7, {0}, {u}}, {0.3, {0}, {ui}}}, Vec::Ones(1),
                    /*allow_asymmetric=*/true);
  auto cloud = simulate_stationary(sys, 2000, 400, 13);
  auto atoms = atom_test(cloud, {0.4, 0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003}, 0.2);
  REQUIRE(atoms.verdict == AtomVerdict::ATOM);
  // the atom sits on the fixed line e1
  Mat e1 = Mat::Identity(2, 2).leftCols(1);
  int near = 0;
  for (const auto& s : cloud.samples) {
    Vec theta = principal_angles(s.flag.level(1), e1);
    if (theta(0) < 0.01) ++near;
  }
  REQUIRE(near > int(cloud.samples.size() / 2));
}

TEST_CASE("pullback of a generic cloud under a fixed hyperbolic map concentrates") {
  Mat g = Mat::Zero(3, 3);
  g(0, 0) = 4;
  g(1, 1) = 1;
  g(2, 2) = 0.25;
  CocycleSystem sys(3, {"*"}, {{1.0, {0}, {g}}}, Vec::Ones(1), /*allow_asymmetric=*/true);
  // generic initial cloud
  MeasureCloud cloud;
  CounterRng rng(17, RngStream::tests, 0);
  for (int i = 0; i < 150; ++i) cloud.samples.push_back({1.0 / 150, 0, random_full_flag(3, rng)});
  Word w = sample_word(sys, 1, 0, 80, Orientation::forward);
  auto fwd = oseledets::forward_flag(sys, w, 0, {80});
  auto pull = pullback_limit(sys, cloud, w, 0, {5, 20, 80}, {1, 2}, 0.05, &fwd.flag);
  REQUIRE(pull.masses.back() >= 0.99);
  REQUIRE(pull.center_dist.back() < 1e-6);
  // north-south dynamics: mass grows along the horizon
  REQUIRE(pull.masses.front() <= pull.masses.back());
  // centers are valid points of H/P_I' with the complementary type
  for (const auto& c : pull.centers) {
    REQUIRE(c.valid(1e-8));
    REQUIRE(c.type.retained_levels() == std::vector<int>{1, 2});
  }
}

TEST_CASE("pullback by isometries does not concentrate") {
  Mat r = rot2(1.0);
  CocycleSystem sys(2, {"*"}, {{0.5, {0}, {r}}, {0.5, {0}, {r.transpose()}}}, Vec::Ones(1));
  MeasureCloud cloud;
  const int n = 200;
  for (int i = 0; i < n; ++i) {
    FullFlag z{rot2(M_PI * double(i) / double(n))};
    cloud.samples.push_back({1.0 / n, 0, z});
  }
  // intrinsic largest ball mass of the raw cloud at the same radius
  double intrinsic = 0;
  for (int i = 0; i < n; ++i) {
    double mass = 0;
    for (int j = 0; j < n; ++j)
      if (flag_distance(cloud.samples[size_t(i)].flag, cloud.samples[size_t(j)].flag) < 0.05)
        mass += cloud.samples[size_t(j)].weight;
    intrinsic = std::max(intrinsic, mass);
  }
  Word w = sample_word(sys, 3, 0, 200, Orientation::forward);
  auto pull = pullback_limit(sys, cloud, w, 0, {10, 50, 200}, {1}, 0.05, nullptr);
  for (double m : pull.masses) REQUIRE(m <= intrinsic + 1e-9);
}

TEST_CASE("regularity scan: point mass is maximally irregular") {
  MeasureCloud point;
  for (int i = 0; i < 60; ++i) point.samples.push_back({1.0 / 60, 0, FullFlag::standard(2)});
  auto rep = regularity_scan(point, {0.0125, 0.025, 0.05, 0.1, 0.2, 0.4}, 8, 3);
  for (double m : rep.worst_masses) REQUIRE(m == Catch::Approx(1.0));
}

TEST_CASE("regularity scan: uniform circle mass scales like the arc length") {
  MeasureCloud circle;
  const int n = 2000;
  for (int i = 0; i < n; ++i) {
    FullFlag z{rot2(M_PI * double(i) / double(n))};
    circle.samples.push_back({1.0 / n, 0, z});
  }
  auto rep = regularity_scan(circle, {0.0125, 0.025, 0.05, 0.1, 0.2}, 16, 5);
  // oracle: J is a single point of the circle, so the eps-sublevel of the
  // sine-proxy for a fixed g is an arc of length proportional to eps (the
  // constant carries the Mobius distortion of g). Check the linear scaling
  // and the lower bound from the isometric translate, arc (2/pi) asin(eps).
  for (size_t e = 0; e < rep.eps_grid.size(); ++e) {
    const double arc = 2.0 / M_PI * std::asin(rep.eps_grid[e]);
    REQUIRE(rep.worst_masses[e] >= arc * 0.7 - 3.0 / n);
    REQUIRE(rep.worst_masses[e] <= 12.0 * arc + 3.0 / n);
  }
  const double slope = std::log(rep.worst_masses.back() / rep.worst_masses.front()) /
                       std::log(rep.eps_grid.back() / rep.eps_grid.front());
  REQUIRE(slope == Catch::Approx(1.0).margin(0.35));
  // monotone in eps
  for (size_t e = 0; e + 1 < rep.worst_masses.size(); ++e)
    REQUIRE(rep.worst_masses[e] <= rep.worst_masses[e + 1] + 1e-12);
}

TEST_CASE("furstenberg check: rotation cocycle gives zero on both sides") {
  Mat r = rot2(1.0);
  CocycleSystem sys(2, {"*"}, {{0.5, {0}, {r}}, {0.5, {0}, {r.transpose()}}}, Vec::Ones(1));
  auto rep = oseledets::estimate_exponents(sys, 500, 8, 3, 1e-2, 1);
  auto cloud = simulate_stationary(sys, 200, 400, 3);
  auto cmp = furstenberg_check(sys, cloud, rep, 20000, 5);
  REQUIRE(cmp.size() == 1);
  REQUIRE(cmp[0].zscore <= 3.0);
  REQUIRE(std::abs(cmp[0].integral) < 1e-10);
}

TEST_CASE("furstenberg check: deterministic hyperbolic with the attracting point mass") {
  Mat g = Mat::Zero(3, 3);
  g(0, 0) = 4;
  g(1, 1) = 1;
  g(2, 2) = 0.25;
  CocycleSystem sys(3, {"*"}, {{1.0, {0}, {g}}}, Vec::Ones(1), /*allow_asymmetric=*/true);
  auto rep = oseledets::estimate_exponents(sys, 200, 2, 1, 1e-2, 1);
  MeasureCloud cloud;
  for (int i = 0; i < 100; ++i) cloud.samples.push_back({0.01, 0, FullFlag::standard(3)});
  cloud.stationary_ok = true;
  auto cmp = furstenberg_check(sys, cloud, rep, 1000, 7);
  // integral = alpha(g) = lambda_alpha exactly
  REQUIRE(cmp[0].integral == Catch::Approx(std::log(4.0)).margin(1e-10));
  REQUIRE(cmp[1].integral == Catch::Approx(std::log(4.0)).margin(1e-10));
  REQUIRE(cmp[0].zscore <= 3.0);
  REQUIRE(cmp[1].zscore <= 3.0);
}

TEST_CASE("furstenberg z-scores stay within 3 on every shipped irreducible scenario") {
  for (const char* name : {"rotation", "sl2-mixed", "sl2c-realified", "sl3-generic"}) {
    auto sys = flagwalk::scenario::find_bundled(name).value().build_system();
    auto rep = oseledets::estimate_exponents(sys, 4000, 16, 211, 1e-2, 2);
    auto cloud = simulate_stationary(sys, 1000, 4000, 223);
    REQUIRE(cloud.stationary_ok);
    auto cmps = furstenberg_check(sys, cloud, rep, 100000, 227);
    for (const auto& c : cmps) {
      INFO(name << " root " << c.root << " integral " << c.integral << " lambda "
                << c.lambda_alpha);
      REQUIRE(c.zscore <= 3.0);
    }
  }
}

TEST_CASE("furstenberg check refuses a non-stationary cloud") {
  auto sys = sl2_mixed();
  auto rep = oseledets::estimate_exponents(sys, 200, 4, 1, 1e-2, 1);
  MeasureCloud bad;
  bad.samples.push_back({1.0, 0, FullFlag::standard(2)});
  bad.stationary_ok = false;
  REQUIRE_THROWS_AS(furstenberg_check(sys, bad, rep, 100, 1), std::runtime_error);
}

TEST_CASE("cloud CSV round trip") {
  auto sys = sl2_mixed();
  auto cloud = simulate_stationary(sys, 100, 50, 19);
  std::stringstream ss;
  export_cloud_csv(cloud, ss);
  auto back = import_cloud_csv(ss, 2);
  REQUIRE(back.samples.size() == cloud.samples.size());
  for (size_t i = 0; i < back.samples.size(); ++i) {
    REQUIRE(back.samples[i].weight == Catch::Approx(cloud.samples[i].weight).epsilon(1e-14));
    REQUIRE(back.samples[i].state == cloud.samples[i].state);
    REQUIRE((back.samples[i].flag.basis - cloud.samples[i].flag.basis).cwiseAbs().maxCoeff() <
            1e-14);
  }
}
