#include <doctest.h>

#include <cmath>

#include "qextrap/error.hpp"
#include "qextrap/extrapolation.hpp"
#include "qextrap/generators.hpp"

using namespace qextrap;

namespace {

RMatrix indicator(int settings, int outcomes, int x, int a) {
  RMatrix f = RMatrix::Zero(settings, outcomes);
  f(x, a) = 1.0;
  return f;
}

ExtrapolationProblem problem_for(const NamedSuite& s, double tau, int m, RMatrix f) {
  ExtrapolationProblem p;
  p.data = s.noisy;
  p.scenario = s.scenario;
  p.scenario.tau = tau;
  p.objective = std::move(f);
  p.relaxation.constraint = s.constraint;
  p.relaxation.m = m;
  return p;
}

double value_at(const Realization& r, const RMatrix& f, double tau) {
  const auto pt = simulate_dataset(r, {tau}).points.front();
  return pt.cwiseProduct(f).sum();
}

}  // namespace

TEST_CASE("solve_interval") {
  SUBCASE("problematic sine witness lies inside the O interval") {
    auto s = realization_problematic_sin(4, 1.0);
    s.noisy = dataset_O(4, 1.0, 0.3);
    s.constraint = HardConstraint{2.0};
    auto p = problem_for(s, 2.0, 8, indicator(1, 2, 0, 1));
    auto iv = solve_interval(p);
    REQUIRE(iv.optimal());
    const double witness = 0.5 + 0.5 * std::pow(std::sin(0.5), 4);
    CHECK(value_at(s.realizations[0], p.objective, 2.0) == doctest::Approx(witness).epsilon(1e-12));
    CHECK(iv.upper >= witness - 1e-6);
    CHECK(iv.lower <= iv.upper + 1e-7);
    // symmetry of O datasets
    CHECK(std::abs((iv.upper - 0.5) - (0.5 - iv.lower)) < 1e-6);
    REQUIRE(iv.gap_bound);
    double t_max = 2.0;
    for (double t : s.noisy.estimates.times) t_max = std::max(t_max, std::abs(t));
    CHECK(*iv.gap_bound == doctest::Approx(2 * std::sin(2.0 * t_max / 16)));
  }
  SUBCASE("vacuous error bars give the range of the objective") {
    Scenario sc{1, 2, {0.0, 1.0}, 3.0};
    ExtrapolationProblem p;
    p.data = make_noisy(sc.times, {RMatrix{{0.5, 0.5}}, RMatrix{{0.5, 0.5}}}, 1.0);
    p.scenario = sc;
    p.objective = RMatrix{{2.0, -1.0}};
    p.relaxation.constraint = HardConstraint{1.0};
    p.relaxation.m = 6;
    auto iv = solve_interval(p);
    REQUIRE(iv.optimal());
    CHECK(iv.lower == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(iv.upper == doctest::Approx(2.0).epsilon(1e-6));
    CHECK_FALSE(iv.delta_floored);
  }
  SUBCASE("joint aha dataset keeps 1 inside the interval") {
    auto aha = aha_suite(1.0);
    auto p = problem_for(aha.joint, 4 * kPi, 12, indicator(2, 2, 0, 0));
    auto iv = solve_interval(p);
    REQUIRE(iv.optimal());
    CHECK(iv.delta_floored);
    CHECK(iv.lower <= 1.0 + 1e-6);
    CHECK(iv.upper >= 1.0 - 1e-6);
  }
  SUBCASE("infeasible data is reported as such") {
    // P(0|t) jumps from 1 to 0 in a time too short for E+ = 1
    Scenario sc{1, 2, {0.0, 0.1}, 1.0};
    ExtrapolationProblem p;
    p.data = make_noisy(sc.times, {RMatrix{{1.0, 0.0}}, RMatrix{{0.0, 1.0}}}, 0.01);
    p.scenario = sc;
    p.objective = indicator(1, 2, 0, 0);
    p.relaxation.constraint = HardConstraint{1.0};
    p.relaxation.m = 4;
    auto iv = solve_interval(p);
    CHECK(iv.infeasible());
    CHECK_FALSE(iv.optimal());
  }
  SUBCASE("objective shape is validated") {
    auto s = dataset_D(2, 1.0);
    auto p = problem_for(s, 1.0, 4, RMatrix::Zero(2, 2));
    CHECK_THROWS_AS(solve_interval(p), ValidationError);
  }
}

TEST_CASE("containment and nesting") {
  auto d3 = dataset_D(3, 1.0);
  const double tau = d3.scenario.tau;
  auto f = indicator(1, 2, 0, 0);
  double prev_width = 2.0;
  for (int m : {6, 12, 24}) {
    auto iv = solve_interval(problem_for(d3, tau, m, f));
    REQUIRE(iv.optimal());
    const double v = value_at(d3.realizations[0], f, tau);
    CHECK(v == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(iv.lower <= v + 1e-6);
    CHECK(iv.upper >= v - 1e-6);
    CHECK(iv.width() <= prev_width + 1e-6);
    prev_width = iv.width();
  }
}

TEST_CASE("knightian inner check") {
  SUBCASE("fog bank vertices at tau1") {
    auto fb = fogbank_suite(1.0, {0.2, 0.5, 0.3});
    auto v = knightian_inner_check(fb.realizations, fb.noisy, 15 * kPi / 2, {0});
    CHECK(v.knightian);
    CHECK(v.fitting.size() == 4);
  }
  SUBCASE("first aha dataset alone") {
    auto aha = aha_suite(1.0);
    auto v = knightian_inner_check(aha.first.realizations, aha.first.noisy, 4 * kPi, {0});
    CHECK(v.knightian);
  }
  SUBCASE("one realization is a single point") {
    auto fb = fogbank_suite(1.0, {0.2, 0.5, 0.3});
    auto v = knightian_inner_check({fb.realizations[1]}, fb.noisy, 15 * kPi / 2, {0});
    CHECK_FALSE(v.knightian);
    CHECK(v.covered[0][0]);
    CHECK_FALSE(v.covered[0][1]);
  }
  SUBCASE("realizations that do not fit are dropped") {
    auto fb = fogbank_suite(1.0, {0.2, 0.5, 0.3});
    auto d3 = dataset_D(3, 1.0);
    auto v = knightian_inner_check(d3.realizations, fb.noisy, 1.0, {0});
    CHECK(v.fitting.empty());
    CHECK_FALSE(v.knightian);
  }
}

TEST_CASE("certainty scan") {
  SUBCASE("vacuous data") {
    Scenario sc{1, 2, {0.0, 1.0}, 3.0};
    ExtrapolationProblem p;
    p.data = make_noisy(sc.times, {RMatrix{{0.5, 0.5}}, RMatrix{{0.5, 0.5}}}, 1.0);
    p.scenario = sc;
    p.relaxation.constraint = HardConstraint{1.0};
    p.relaxation.m = 6;
    auto rep = certainty_scan(p);
    CHECK(rep.tag == CertaintyTag::KnightianCandidate);
    CHECK(rep.max_width == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("D3 one period later") {
    auto d3 = dataset_D(3, 1.0);
    double prev = 2.0;
    for (int m : {8, 16}) {
      auto rep = certainty_scan(problem_for(d3, d3.scenario.tau, m, RMatrix()));
      CHECK(rep.intervals[0][0].lower <= 1e-6);
      CHECK(rep.max_width <= prev + 1e-6);
      prev = rep.max_width;
    }
  }
  SUBCASE("fog bank at tau2") {
    auto fb = fogbank_suite(1.0, {0.2, 0.5, 0.3});
    auto rep12 = certainty_scan(problem_for(fb, 9 * kPi, 12, RMatrix()));
    auto rep24 = certainty_scan(problem_for(fb, 9 * kPi, 24, RMatrix()));
    // the discretization slack at tau2 stays large at these orders, so only nesting is checked
    CHECK(rep24.max_width <= rep12.max_width + 1e-6);
    for (const auto& r : fb.realizations) {
      auto pt = simulate_dataset(r, {9 * kPi}).points.front();
      for (int a = 0; a < 3; ++a) {
        CHECK(rep24.intervals[0][a].lower <= pt(0, a) + 1e-6);
        CHECK(rep24.intervals[0][a].upper >= pt(0, a) - 1e-6);
      }
    }
  }
  CHECK(to_string(CertaintyTag::ApproximateFullCertainty) == "approximate-full-certainty");
}

TEST_CASE("self-test diagnostics") {
  for (int n = 2; n <= 5; ++n) {
    auto d = dataset_D(n, 1.0);
    auto rep = selftest_diagnostics(d.realizations[0], n, 1.0, 0.0);
    for (double ov : rep.overlaps) CHECK(ov < 1e-12);
    CHECK(rep.window_weight == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(selftest_delta(d.realizations[0], n, 1.0) < 1e-12);
    for (int k = 0; k < n; ++k) CHECK(std::abs(witness_polynomial(k / (n - 1.0), n, 1.0)) < 1e-12);
    for (int i = 0; i <= 1000; ++i) CHECK(witness_polynomial(i / 1000.0, n, 1.0) >= -1e-12);
  }
  SUBCASE("one percent orthogonal noise") {
    const int n = 3;
    auto d = dataset_D(n, 1.0);
    const auto& ref = d.realizations[0];
    CVector orth(n);
    orth << 1.0, -1.0, 0.0;
    orth.normalize();
    CMatrix rho = 0.99 * ref.state() + 0.01 * orth * orth.adjoint();
    Realization noisy(rho, ref.hamiltonian(), ref.povms());
    const double delta = selftest_delta(noisy, n, 1.0);
    CHECK(delta > 0.0);
    auto rep = selftest_diagnostics(noisy, n, 1.0, delta);
    for (double ov : rep.overlaps) CHECK(ov <= rep.overlap_bound + 1e-12);
    CHECK(rep.window_weight >= 0.9);
  }
  auto d = dataset_D(3, 1.0);
  CHECK_THROWS_AS(selftest_diagnostics(d.realizations[0], 1, 1.0, 0.0), PreconditionError);
  CHECK(selftest_diagnostics(d.realizations[0], 3, 1.0, 0.0, {0.25, 0.5}).witness.size() == 2);
}
