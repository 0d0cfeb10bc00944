#include <doctest.h>

#include <cmath>

#include "qextrap/error.hpp"
#include "qextrap/generators.hpp"
#include "qextrap/relaxations.hpp"
#include "qextrap/solver.hpp"

using namespace qextrap;
using conic::LinearExpr;

namespace {

NoisyDataset exact(const Dataset& d, double delta = 1e-7) {
  return make_noisy(d.times, d.points, delta);
}

conic::SolveResult feasibility(ModelHandle& h, const NoisyDataset& nd) {
  add_fit_constraints(h, nd);
  h.program.set_objective(conic::Sense::Minimize, LinearExpr());
  return conic::solve(h.program);
}

// min and max of P(a|x,tau) over the model.
std::pair<double, double> tau_range(ModelHandle h, const NoisyDataset& nd, int x, int a) {
  add_fit_constraints(h, nd);
  auto target = h.value(x, a, h.tau_index());
  h.program.set_objective(conic::Sense::Minimize, target);
  auto lo = conic::solve(h.program);
  h.program.set_objective(conic::Sense::Maximize, target);
  auto hi = conic::solve(h.program);
  REQUIRE(lo.optimal());
  REQUIRE(hi.optimal());
  return {lo.objective, hi.objective};
}

double max_gap(const Dataset& a, const Dataset& b, int count) {
  double g = 0;
  for (int j = 0; j < count; ++j) g = std::max(g, (a.points[j] - b.points[j]).cwiseAbs().maxCoeff());
  return g;
}

void check_normalization(const ModelHandle& h, const RVector& x) {
  double first = 0;
  for (int s = 0; s < h.scenario.settings; ++s) {
    CMatrix sum = CMatrix::Zero(h.tilde[s][0].dim(), h.tilde[s][0].dim());
    for (const auto& v : h.tilde[s]) sum += v.value(x);
    double tr = sum.topLeftCorner(h.low_dim(), h.low_dim()).trace().real();
    if (h.has_high) tr += sum(h.low_dim(), h.low_dim()).real();
    if (s == 0) first = tr;
    CHECK(tr == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(std::abs(tr - first) < 1e-7);
  }
}

Scenario scenario_of(const NamedSuite& s, double tau) {
  Scenario sc = s.scenario;
  sc.tau = tau;
  return sc;
}

}  // namespace

TEST_CASE("finite spectrum model") {
  SUBCASE("one-point spectrum keeps constant datasets constant") {
    Scenario sc{1, 2, {0.0, 1.0}, 5.0};
    auto nd = make_noisy(sc.times, {RMatrix{{0.3, 0.7}}, RMatrix{{0.3, 0.7}}}, 1e-7);
    auto h = model_S_finite({0.0}, sc);
    auto [lo, hi] = tau_range(h, nd, 0, 0);
    CHECK(lo == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(hi == doctest::Approx(0.3).epsilon(1e-6));
  }
  SUBCASE("D2 on {0, 1} is feasible and round-trips") {
    auto d2 = dataset_D(2, 1.0);
    auto h = model_S_finite({0.0, 1.0}, d2.scenario);
    auto r = feasibility(h, exact(d2.noisy.estimates));
    REQUIRE(r.optimal());
    check_normalization(h, r.x);
    auto real = extract_realization_finite(h, r.x);
    CHECK(validate_realization(real, HardConstraint{1.0}).pass);
    auto sim = simulate_dataset(real, h.times);
    CHECK(max_gap(sim, grid_dataset(h, r.x), h.num_times()) < 1e-6);
    CHECK(std::abs(sim.points[0](0, 0) - 1.0) < 1e-6);
    CHECK(std::abs(sim.points[1](0, 0)) < 1e-6);
  }
  SUBCASE("joint aha data on {0, 1/2, 1}") {
    auto aha = aha_suite(1.0).joint;
    auto h = model_S_finite({0.0, 0.5, 1.0}, aha.scenario);
    auto r = feasibility(h, exact(aha.noisy.estimates));
    REQUIRE(r.optimal());
    auto real = extract_realization_finite(h, r.x);
    auto sim = simulate_dataset(real, h.times);
    CHECK(max_gap(sim, grid_dataset(h, r.x), h.num_times()) < 1e-6);
    CHECK(max_gap(sim, aha.noisy.estimates, 3) < 1e-6);
  }
  SUBCASE("constant dataset on a single energy gives a 1-dim realization") {
    Scenario sc{1, 2, {0.0, 2.0}, 3.0};
    auto nd = make_noisy(sc.times, {RMatrix{{0.5, 0.5}}, RMatrix{{0.5, 0.5}}}, 1e-7);
    auto h = model_S_finite({0.0}, sc);
    auto r = feasibility(h, nd);
    REQUIRE(r.optimal());
    CHECK(extract_realization_finite(h, r.x).dim() == 1);
  }
  CHECK_THROWS_AS(model_S_finite({}, Scenario{1, 2, {0.0}, 1.0}), PreconditionError);
}

TEST_CASE("S_m model") {
  SUBCASE("D3 with m=6") {
    auto d3 = dataset_D(3, 1.0);
    auto h = model_S_m(1.0, 6, d3.scenario);
    auto r = feasibility(h, d3.noisy);
    REQUIRE(r.optimal());
    check_normalization(h, r.x);
    auto real = extract_realization_finite(h, r.x);
    CHECK(validate_realization(real, HardConstraint{1.0}).pass);
    CHECK(max_gap(simulate_dataset(real, h.times), grid_dataset(h, r.x), h.num_times()) < 1e-6);
  }
  SUBCASE("constant one half") {
    auto nd = dataset_O(4, 1.0, 0.0);
    Scenario sc{1, 2, nd.estimates.times, 2.0};
    auto h = model_S_m(2.0, 4, sc);
    CHECK(feasibility(h, nd).optimal());
  }
  SUBCASE("slack grows with time") {
    Scenario sc{1, 2, {0.0, 1.0}, 3.0};
    auto h = model_S_m(1.0, 4, sc);
    CHECK(h.slack[0] == 0.0);
    CHECK(h.slack[1] == doctest::Approx(2 * std::sin(1.0 / 8)));
    CHECK(h.slack[2] == doctest::Approx(2 * std::sin(3.0 / 8)));
    CHECK(h.grid.size() == 5);
  }
  SUBCASE("m below the bound") {
    Scenario sc{1, 2, {0.0, 10.0}, 20.0};
    CHECK_THROWS_AS(model_S_m(1.0, 6, sc), PreconditionError);
    CHECK_NOTHROW(model_S_m(1.0, 7, sc));
  }
}

TEST_CASE("A_m model") {
  CHECK(default_average_cutoff(1.0, 1.0, 1000) == doctest::Approx(std::cbrt(0.25) * std::pow(1000.0, 2.0 / 3)));
  CHECK(default_average_cutoff(1.0, 1.0, 1000) == doctest::Approx(62.996).epsilon(1e-4));
  SUBCASE("constant dataset with zero mean energy") {
    Scenario sc{1, 2, {0.0, 1.0}, 2.0};
    auto nd = make_noisy(sc.times, {RMatrix{{0.2, 0.8}}, RMatrix{{0.2, 0.8}}}, 1e-7);
    auto h = model_A_m(0.0, 8, sc, 1.0);
    auto r = feasibility(h, nd);
    REQUIRE(r.optimal());
    check_normalization(h, r.x);
    auto real = extract_realization_average(h, r.x);
    CHECK(validate_realization(real, AverageConstraint{0.0}, 1e-7).pass);
    auto sim = simulate_dataset(real, h.times);
    CHECK(max_gap(sim, model_dataset(h, r.x), 2) < 1e-5);
  }
  SUBCASE("D2 with mean energy E+/2") {
    auto d2 = dataset_D(2, 1.0);
    auto sc = scenario_of(d2, d2.scenario.times[1]);
    auto h = model_A_m(0.5, 12, sc, 1.0);
    auto r = feasibility(h, exact(d2.noisy.estimates));
    REQUIRE(r.optimal());
    check_normalization(h, r.x);
    auto real = extract_realization_average(h, r.x);
    CHECK(validate_realization(real, AverageConstraint{0.5}, 1e-7).pass);
    // Distance bound 2 sin(E+ |t| / m) + 2 sqrt(E_bar / E+) between solution and extracted data.
    auto sim = simulate_dataset(real, h.times);
    auto sol = model_dataset(h, r.x);
    for (int j = 0; j < h.num_times(); ++j) {
      double l1 = (sim.points[j] - sol.points[j]).cwiseAbs().sum();
      CHECK(l1 <= h.slack[j] + 2 * std::sqrt(0.5 / 1.0) + 1e-6);
    }
  }
  SUBCASE("p_m = 0 extraction reproduces the grid model") {
    Scenario sc{1, 2, {0.0, 0.5}, 1.0};
    auto nd = make_noisy(sc.times, {RMatrix{{1.0, 0.0}}, RMatrix{{0.95, 0.05}}}, 0.05);
    auto h = model_A_m(0.3, 8, sc, 1.0);
    add_fit_constraints(h, nd);
    h.program.add_constraint(LinearExpr::variable(h.weights + 8), conic::Relation::Equal, 0.0);
    h.program.set_objective(conic::Sense::Minimize, LinearExpr());
    auto r = conic::solve(h.program);
    REQUIRE(r.optimal());
    auto real = extract_realization_average(h, r.x);
    CHECK(max_gap(simulate_dataset(real, h.times), grid_dataset(h, r.x), h.num_times()) < 1e-5);
  }
  SUBCASE("floor-discretization bound") {
    Scenario sc{1, 2, {0.0, 1.0}, 2.0};
    CHECK_THROWS_AS(model_A_m(1.0, 6, sc, 1.0), PreconditionError);
    CHECK_NOTHROW(model_A_m(1.0, 7, sc, 1.0));
  }
}

TEST_CASE("soft model") {
  const double step = 0.05;  // E+ step = 0.05 with E+ = 1
  auto lat = TimeStructure::lattice(step, {0, 1, 2});
  Scenario sc{1, 2, {0.0, step}, 2 * step};
  auto data = make_noisy(sc.times, {RMatrix{{1.0, 0.0}}, RMatrix{{0.0, 1.0}}}, 1e-7);

  SUBCASE("epsilon = 0 forces gamma = 0") {
    Scenario calm{1, 2, {0.0, 0.5}, 1.0};
    auto nd = make_noisy(calm.times, {RMatrix{{0.5, 0.5}}, RMatrix{{0.5, 0.5}}}, 1e-7);
    auto h = model_soft(1.0, 0.0, 8, DecayMatrixModel::equal_diag(), calm);
    auto r = feasibility(h, nd);
    REQUIRE(r.optimal());
    CHECK(std::abs(h.weight_values(r.x)(8)) < 1e-7);
    auto real = extract_realization_soft(h, r.x);
    CHECK(real.dim() == 8);
  }
  SUBCASE("discontinuity data with epsilon = 1/2 on the lattice") {
    auto h = model_soft(1.0, 0.5, 1, DecayMatrixModel::toeplitz(lat), sc);
    auto r = feasibility(h, data);
    REQUIRE(r.optimal());
    check_normalization(h, r.x);
    auto real = extract_realization_soft(h, r.x);
    CHECK(validate_realization(real, SoftConstraint{1.0, 0.5}, 1e-6).pass);
    auto sim = simulate_dataset(real, h.times);
    CHECK(max_gap(sim, grid_dataset(h, r.x), h.num_times()) < 1e-5);
    // the realization sits within the discretization slack of the fitted data
    auto sol = model_dataset(h, r.x);
    for (int j = 0; j < 2; ++j)
      CHECK((sim.points[j] - sol.points[j]).cwiseAbs().sum() <= h.slack[j] + 1e-5);
  }
  SUBCASE("epsilon = 1 is a pure high-energy model") {
    auto nd = make_noisy(sc.times, {RMatrix{{0.9, 0.1}}, RMatrix{{0.2, 0.8}}}, 1e-7);
    auto h = model_soft(1.0, 1.0, 1, DecayMatrixModel::toeplitz(lat), sc);
    auto r = feasibility(h, nd);
    REQUIRE(r.optimal());
    auto real = extract_realization_soft(h, r.x);
    CHECK(validate_realization(real, SoftConstraint{1.0, 1.0}, 1e-6).pass);
    CHECK(max_gap(simulate_dataset(real, h.times), grid_dataset(h, r.x), h.num_times()) < 1e-6);
  }
  SUBCASE("single atom gamma gives one extra level at or above E+") {
    auto h = model_soft(1.0, 0.5, 1, DecayMatrixModel::toeplitz(lat), sc);
    add_fit_constraints(h, make_noisy(sc.times, {RMatrix{{1.0, 0.0}}, RMatrix{{1.0, 0.0}}}, 1e-7));
    // push all weight into the high block with a fixed phase
    auto g01 = h.decay->gamma(0, 1);
    h.program.add_constraint(LinearExpr::variable(h.weights + 1), conic::Relation::Equal, 0.5);
    h.program.set_objective(conic::Sense::Maximize, g01.re);
    auto r = conic::solve(h.program);
    REQUIRE(r.optimal());
    auto real = extract_realization_soft(h, r.x);
    CHECK(validate_realization(real, SoftConstraint{1.0, 0.5}, 1e-5).pass);
    CHECK(max_gap(simulate_dataset(real, h.times), grid_dataset(h, r.x), h.num_times()) < 1e-5);
  }
  SUBCASE("tau outside the structure") {
    CHECK_THROWS_AS(model_soft(1.0, 0.5, 1, DecayMatrixModel::toeplitz(TimeStructure::lattice(step, {0, 1})), sc),
                    PreconditionError);
  }
}

TEST_CASE("soundness: bundled realizations are feasible") {
  SUBCASE("D3 under S_m") {
    auto d3 = dataset_D(3, 1.0);
    auto sim = simulate_dataset(d3.realizations[0], d3.scenario.times);
    for (int m : {6, 12}) {
      auto h = model_S_m(1.0, m, d3.scenario);
      CHECK(feasibility(h, exact(sim)).optimal());
    }
  }
  SUBCASE("fog bank under S_m") {
    auto fb = fogbank_suite(1.0, {0.2, 0.5, 0.3});
    for (const auto& real : fb.realizations) {
      auto sim = simulate_dataset(real, fb.scenario.times);
      auto h = model_S_m(1.0, 8, fb.scenario);
      CHECK(feasibility(h, exact(sim)).optimal());
    }
  }
  SUBCASE("problematic sine under S_m") {
    auto s = realization_problematic_sin(2, 1.0);
    for (const auto& real : s.realizations) {
      auto h = model_S_m(2.0, 8, s.scenario);
      CHECK(feasibility(h, exact(simulate_dataset(real, s.scenario.times))).optimal());
    }
  }
}

TEST_CASE("gap bounds") {
  GapParams p;
  p.e_bar = 1;
  p.t_max = 1;
  p.m = 1000;
  CHECK(gap_bounds(GapKind::Am, p) == doctest::Approx(2 * (std::pow(4.0, -1.0 / 3) + std::cbrt(2.0)) * 0.1));
  CHECK(gap_bounds(GapKind::Am, p) == doctest::Approx(0.37798).epsilon(1e-4));
  GapParams s;
  s.m = 4;
  s.times = {0.0, 0.0};
  CHECK(gap_bounds(GapKind::Sm, s) == 0.0);
  s.times = {1.0, -3.0};
  CHECK(gap_bounds(GapKind::Sm, s) == doctest::Approx(2 * std::sin(3.0 / 8)));
  GapParams k;
  k.n_times = 2;
  k.d = 1;
  k.k = 10;
  k.m = 10;
  k.t_max = 1.0;
  const double eps = 2 * (1 / 0.94 - 1);
  CHECK(gap_bounds(GapKind::SoftKm, k) == doctest::Approx(2 * eps / (1 + eps) + 2 * std::sin(0.1)));
  GapParams l;
  l.eps_m = 0;
  l.mu = 3;
  l.objective = {{1, -2}};
  CHECK(gap_bounds(GapKind::Extraction, l) == 0.0);
  l.eps_m = 0.1;
  l.r = 2;
  l.f_reference = 1;
  CHECK(gap_bounds(GapKind::Extraction, l) == doctest::Approx(0.1 * (1.0 + 2.0)));
  CHECK_THROWS_AS(parse_gap_kind("bogus"), PreconditionError);
  CHECK(parse_gap_kind("A_m") == GapKind::Am);
}
