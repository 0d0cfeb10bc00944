#include <doctest.h>

#include <random>

#include "qextrap/error.hpp"
#include "qextrap/generators.hpp"

using namespace qextrap;

namespace {
double binom(int n, int k) {
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void check_suite_invariants(const NamedSuite& s) {
  CAPTURE(s.label);
  for (const auto& r : s.realizations) {
    CHECK(validate_realization(r, s.constraint).pass);
    CHECK(fit_check(simulate_dataset(r, s.noisy.estimates.times), s.noisy).fits);
  }
  if (s.closed_form) {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> ut(-30, 30);
    for (int k = 0; k < 50; ++k) {
      const double t = ut(rng);
      const Datapoint expect = s.closed_form(t);
      const Datapoint got = simulate_dataset(s.realizations[0], {t}).points[0];
      CHECK((expect - got).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}
}  // namespace

TEST_CASE("dataset_O") {
  const auto a = dataset_O(2, 1.0, 0.1);
  CHECK(a.estimates.times == std::vector<double>{0.5, 1.0});
  CHECK(a.delta(0, 1) == 0.1);
  CHECK(a.estimates.points[0](0, 0) == 0.5);
  CHECK(dataset_O(1, 1.0, 0.0).estimates.times == std::vector<double>{1.0});
  const auto c = dataset_O(4, 2.0, 0.01);
  CHECK(c.estimates.times == std::vector<double>{0.5, 1.0, 1.5, 2.0});
}

TEST_CASE("cosine mixture") {
  SUBCASE("single term") {
    const double w = 1.3;
    const auto r = realization_cosine_mixture({1.0}, {w});
    CHECK(r.dim() == 2 * 1);
    for (int k = 0; k < 20; ++k) {
      const double t = 0.37 * k;
      const auto p = simulate_datapoint(r, 0, t);
      CHECK(std::abs(p(1) - p(0) - std::cos(w * t)) < 1e-9);
    }
  }
  SUBCASE("constant difference") {
    const auto r = realization_cosine_mixture({1.0, 1.0}, {0.0, 0.0});
    for (double t : {0.0, 2.0, 9.0}) {
      const auto p = simulate_datapoint(r, 0, t);
      CHECK(std::abs(p(1) - p(0) - 1.0) < 1e-12);
    }
  }
  SUBCASE("zero coefficient rejected") { CHECK_THROWS_AS(realization_cosine_mixture({1.0, 0.0}, {0.0, 1.0}), PreconditionError); }
  SUBCASE("negative energies are shifted") {
    const auto r = realization_cosine_mixture({0.5, -0.5}, {-1.0, 1.0});
    CHECK(min_eigenvalue(r.hamiltonian()) >= -1e-12);
  }
}

TEST_CASE("problematic sine family") {
  for (int n : {2, 4, 6}) {
    const auto s = realization_problematic_sin(n, 1.0);
    check_suite_invariants(s);
    CHECK(s.noisy.delta(0, 0) == doctest::Approx(std::pow(std::sin(1.0 / n), n)));
    // Independent oracle: sin(t/(nT))^n.
    for (double t : {0.0, 0.4, 3.0, 17.0}) {
      const auto p = simulate_datapoint(s.realizations[0], 0, t);
      CHECK(std::abs(p(1) - p(0) - std::pow(std::sin(t / n), n)) < 1e-9);
      const auto q = simulate_datapoint(s.realizations[1], 0, t);
      CHECK(std::abs(q(1) - q(0) + std::pow(std::sin(t / n), n)) < 1e-9);
    }
  }
  CHECK(realization_problematic_sin(2, 1.0).noisy.delta(0, 0) == doctest::Approx(0.229848847).epsilon(1e-8));
  const auto s4 = realization_problematic_sin(4, 1.0);
  const auto p = simulate_datapoint(s4.realizations[0], 0, 2.0);
  CHECK(std::abs(std::abs(p(1) - 0.5) - 0.5 * std::pow(std::sin(0.5), 4)) < 1e-12);
  CHECK_THROWS_AS(realization_problematic_sin(3, 1.0), PreconditionError);
}

TEST_CASE("superexponential family") {
  for (int n : {2, 4, 6}) {
    const double lambda = 1.5;
    const auto s = realization_superexp(lambda, n, 1.0);
    check_suite_invariants(s);
    // Independent oracle: explicit binomial sum of cosines.
    std::mt19937 rng(n);
    std::uniform_real_distribution<double> ut(0, 40);
    for (int k = 0; k < 50; ++k) {
      const double t = ut(rng);
      double num = 0, den = 0;
      for (int j = 0; j <= n; ++j) {
        const double c = binom(n, j) * std::pow(1 - lambda, n - j) * std::pow(lambda, j);
        num += c * std::cos(j * t / n);
        den += std::abs(c);
      }
      const auto p = simulate_datapoint(s.realizations[0], 0, t);
      CHECK(std::abs(p(1) - p(0) - num / den) < 1e-9);
    }
    const double tau = kPi * n;
    const auto p = simulate_datapoint(s.realizations[0], 0, tau);
    const auto q = simulate_datapoint(s.realizations[1], 0, tau);
    CHECK(std::abs(p(1) - p(0) - (n % 2 ? -1.0 : 1.0)) < 1e-9);
    CHECK(std::abs(q(1) - q(0) + (n % 2 ? -1.0 : 1.0)) < 1e-9);
  }
  const auto s = realization_superexp(2.0, 2, 1.0);
  const auto p0 = simulate_datapoint(s.realizations[0], 0, 0.0);
  CHECK(std::abs(p0(1) - p0(0) - 1.0 / 9.0) < 1e-12);
  const auto pt = simulate_datapoint(s.realizations[0], 0, 2 * kPi);
  CHECK(std::abs(pt(1) - pt(0) - 1.0) < 1e-12);
  CHECK(s.noisy.delta(0, 0) == doctest::Approx(2.0 / 9.0));
  CHECK_THROWS_AS(realization_superexp(1.0, 2, 1.0), PreconditionError);
}

TEST_CASE("self-testing datasets D_N") {
  CHECK_THROWS_AS(dataset_D(1), PreconditionError);
  const auto s2 = dataset_D(2, 1.0);
  CHECK(s2.noisy.estimates.times[1] == doctest::Approx(kPi));
  const auto s3 = dataset_D(3, 1.0);
  CHECK(s3.noisy.estimates.times[1] == doctest::Approx(4 * kPi / 3));
  CHECK(s3.noisy.estimates.times[2] == doctest::Approx(8 * kPi / 3));
  for (int n = 2; n <= 5; ++n) {
    const auto s = dataset_D(n, 1.0);
    check_suite_invariants(s);
    const auto d = simulate_dataset(s.realizations[0], s.noisy.estimates.times);
    for (int j = 0; j < n; ++j) CHECK(std::abs(d.points[j](0, 0) - (j == 0 ? 1.0 : 0.0)) < 1e-9);
    // the reference state is orthogonal to its evolution at every later data time
    const CVector psi = reference_state(n);
    Evolution ev(s.realizations[0]);
    for (int k = 1; k < n; ++k) CHECK(std::abs(psi.dot(ev.evolved(psi, s.noisy.estimates.times[k]))) < 1e-9);
  }
  // Geometric sum for N = 3 at t = 4pi/3.
  const cplx g = (1.0 + std::polar(1.0, -2 * kPi / 3) + std::polar(1.0, -4 * kPi / 3)) / 3.0;
  CHECK(std::norm(g) < 1e-30);
}

TEST_CASE("aha suites") {
  const auto s = aha_suite(1.0);
  for (const auto* suite : {&s.first, &s.second, &s.joint, &s.two_level, &s.two_level_joint}) check_suite_invariants(*suite);
  const double tau = 4 * kPi;
  for (int x = 0; x < 2; ++x) {
    CHECK(std::abs(simulate_datapoint(aha_minus(x, 1.0), 0, tau)(0)) < 1e-9);
    CHECK(std::abs(simulate_datapoint(aha_plus(1.0), x, tau)(0) - 1.0) < 1e-9);
  }
  const auto& r = s.two_level.realizations[0];
  CHECK(std::abs(simulate_datapoint(r, 0, 0.0)(0) - 0.5) < 1e-9);
  CHECK(std::abs(simulate_datapoint(r, 0, kPi)(0) - 0.5) < 1e-9);
  CHECK(std::abs(simulate_datapoint(r, 0, 2 * kPi)(0) - 1.0) < 1e-9);
}

TEST_CASE("fog bank") {
  for (int a = 0; a < 3; ++a) {
    std::vector<double> q(3, 0.0);
    q[a] = 1.0;
    const auto r = fogbank_realization(1.0, q);
    const auto p = simulate_datapoint(r, 0, 15 * kPi / 2);
    for (int b = 0; b < 3; ++b) CHECK(std::abs(p(b) - q[b]) < 1e-9);
  }
  const auto s = fogbank_suite(1.0, {0.2, 0.5, 0.3});
  check_suite_invariants(s);
  for (const auto& r : s.realizations) CHECK(std::abs(simulate_datapoint(r, 0, 9 * kPi)(1) - 1.0) < 1e-9);
  const CVector psi = reference_state(4);
  Evolution ev(s.realizations[0]);
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> ut(-50, 50);
  for (int k = 0; k < 20; ++k) {
    const double t = ut(rng);
    CHECK((ev.evolved(psi, t + 6 * kPi) - ev.evolved(psi, t)).norm() < 1e-9);
  }
  CHECK_THROWS_AS(fogbank_suite(1.0, {0.5, 0.2, 0.2}), PreconditionError);
}

TEST_CASE("discontinuity family") {
  const auto s0 = discontinuity_family(0, 1.0);
  CHECK(std::abs(simulate_datapoint(s0.realizations[0], 0, 3.0)(0)) < 1e-12);
  for (int m = 0; m < 4; ++m) {
    const auto s = discontinuity_family(m, 1.0);
    check_suite_invariants(s);
    CHECK(std::abs(simulate_datapoint(s.realizations[0], 0, 0.0)(0) - 1.0) < 1e-12);
    CHECK(std::abs(simulate_datapoint(s.realizations[0], 0, s.markers[0].tau)(0)) < 1e-12);
  }
  const auto s1 = discontinuity_family(1, 1.0);
  CHECK(std::abs(simulate_datapoint(s1.realizations[0], 0, 2.0)(0) - 1.0) < 1e-12);
}
