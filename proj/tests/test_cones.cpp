#include <doctest.h>

#include <cmath>
#include <random>

#include "qextrap/cones.hpp"
#include "qextrap/error.hpp"

using namespace qextrap;
using conic::ConicProgram;

namespace {

// gamma_jk = sum_l w_l exp(-i E_l (t_k - t_j)), built directly from the measure.
CMatrix gamma_from_measure(const std::vector<double>& times, const std::vector<double>& energies,
                           const std::vector<double>& weights) {
  const int n = static_cast<int>(times.size());
  CMatrix g = CMatrix::Zero(n, n);
  for (std::size_t l = 0; l < energies.size(); ++l)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) g(j, k) += weights[l] * std::exp(cplx(0, -energies[l] * (times[k] - times[j])));
  return g;
}

CMatrix random_atomic(std::mt19937& rng, const std::vector<double>& times, int atoms) {
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> e, w;
  double total = 0;
  for (int l = 0; l < atoms; ++l) {
    e.push_back(20 * u(rng));
    w.push_back(u(rng) + 0.05);
    total += w.back();
  }
  for (auto& x : w) x /= total;
  return gamma_from_measure(times, e, w);
}

CMatrix f3_matrix() {
  CMatrix g = CMatrix::Identity(3, 3);
  g(0, 1) = g(1, 0) = 1.0;
  return g;
}

}  // namespace

TEST_CASE("decay_constraints block shapes") {
  SUBCASE("equal diagonal, N=3") {
    ConicProgram p;
    auto b = decay_constraints(p, DecayMatrixModel::equal_diag(), 3);
    CHECK(p.cones().size() == 1);
    CHECK(p.cone(0).size == 6);  // 3x3 Hermitian embedded as 6x6 real
    CHECK(b.num_equalities == 2);
    CHECK(p.constraints().size() == 2);
  }
  SUBCASE("toeplitz, N=3 equidistant: 5 real parameters g(0), g(1), g(2)") {
    ConicProgram p;
    auto b = decay_constraints(p, DecayMatrixModel::toeplitz(TimeStructure::lattice(0.5, {0, 1, 2})), 3);
    CHECK(b.base.dim() == 3);
    CHECK(9 - b.num_equalities == 5);
  }
  SUBCASE("moment k=2, n=1, coeffs (0,1,2)") {
    ConicProgram p;
    auto b = decay_constraints(p, DecayMatrixModel::moment(2, TimeStructure::lattice(1.0, {0, 1, 2})), 3);
    CHECK(b.base.dim() == 5);
  }
  SUBCASE("moment with two generators") {
    TimeStructure s{{1.0, std::sqrt(2.0)}, {{0, 0}, {1, 0}, {0, 1}}, 0.0};
    ConicProgram p;
    auto b = decay_constraints(p, DecayMatrixModel::moment(1, s), 3);
    CHECK(b.base.dim() == 9);
  }
  SUBCASE("errors") {
    ConicProgram p;
    CHECK_THROWS_AS(decay_constraints(p, DecayMatrixModel::moment(1, TimeStructure::lattice(1.0, {0, 1, 2})), 3),
                    PreconditionError);
    TimeStructure four{{1, 2, 3, 5}, {{0, 0, 0, 0}, {1, 1, 1, 1}}, 0.0};
    CHECK_THROWS_AS(decay_constraints(p, DecayMatrixModel::moment(2, four), 2), PreconditionError);
    CHECK_THROWS_AS(decay_constraints(p, DecayMatrixModel::toeplitz(TimeStructure::lattice(1.0, {0, 1})), 3),
                    PreconditionError);
  }
}

TEST_CASE("time structure reconstruction") {
  auto s = TimeStructure::lattice(0.25, {0, 2, 3}, 1.0);
  CHECK_NOTHROW(s.check({1.0, 1.5, 1.75}));
  CHECK_THROWS_AS(s.check({1.0, 1.5, 1.8}), ValidationError);
  CHECK(s.max_entry_spread() == 3);
  CHECK(rounding_d(s) == 2);
}

TEST_CASE("membership examples") {
  const double step = 0.7;
  auto lat = TimeStructure::lattice(step, {0, 1, 2});
  SUBCASE("single atom is Toeplitz-feasible") {
    auto g = gamma_from_measure({0, step, 2 * step}, {1.3}, {1.0});
    auto v = membership_decay(g, DecayMatrixModel::toeplitz(lat));
    CHECK(v.feasible);
  }
  SUBCASE("discontinuity exhibit") {
    CHECK(membership_decay(f3_matrix(), DecayMatrixModel::equal_diag()).feasible);
    auto v = membership_decay(f3_matrix(), DecayMatrixModel::toeplitz(lat));
    CHECK_FALSE(v.feasible);
    CHECK(v.residual > 1e-3);
  }
  SUBCASE("identity belongs to every model") {
    CMatrix id = CMatrix::Identity(3, 3);
    CHECK(membership_decay(id, DecayMatrixModel::equal_diag()).feasible);
    CHECK(membership_decay(id, DecayMatrixModel::toeplitz(lat)).feasible);
    CHECK(membership_decay(id, DecayMatrixModel::moment(2, lat)).feasible);
    TimeStructure s{{1.0, std::sqrt(2.0)}, {{0, 0}, {1, 0}, {0, 1}}, 0.0};
    CHECK(membership_decay(id, DecayMatrixModel::moment(1, s)).feasible);
  }
  SUBCASE("random five-atom measures on a lattice") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
      auto g = random_atomic(rng, lat.times(), 5);
      CHECK(membership_decay(g, DecayMatrixModel::toeplitz(lat)).feasible);
      CHECK(membership_decay(g, DecayMatrixModel::moment(2, lat)).feasible);
      CHECK(membership_decay(g, DecayMatrixModel::moment(3, lat)).feasible);
    }
  }
  SUBCASE("random measures with two generators") {
    TimeStructure s{{1.0, std::sqrt(2.0)}, {{0, 0}, {1, 0}, {0, 1}, {1, 1}}, 0.0};
    std::mt19937 rng(5);
    for (int trial = 0; trial < 3; ++trial) {
      auto g = random_atomic(rng, s.times(), 4);
      CHECK(membership_decay(g, DecayMatrixModel::moment(1, s)).feasible);
      CHECK(membership_decay(g, DecayMatrixModel::equal_diag()).feasible);
    }
  }
}

TEST_CASE("hierarchy nesting on relaxation extreme points") {
  // Points of the order-2k relaxation, found by optimizing random directions, must lie in order k.
  TimeStructure s{{1.0, std::sqrt(2.0)}, {{0, 0}, {1, 0}, {0, 1}}, 0.0};
  std::mt19937 rng(3);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 5; ++trial) {
    ConicProgram p;
    auto b = decay_constraints(p, DecayMatrixModel::moment(2, s), 3);
    p.add_constraint(b.gamma(0, 0).re, conic::Relation::Equal, 1.0);
    conic::LinearExpr obj;
    for (int j = 0; j < 3; ++j)
      for (int k = j + 1; k < 3; ++k) {
        obj += nd(rng) * b.gamma(j, k).re;
        obj += nd(rng) * b.gamma(j, k).im;
      }
    p.set_objective(conic::Sense::Maximize, obj);
    auto r = conic::solve(p);
    REQUIRE(r.optimal());
    CMatrix g = b.value(r.x);
    g = 0.5 * (g + g.adjoint()).eval();
    CHECK(membership_decay(g, DecayMatrixModel::moment(1, s)).feasible);
  }
}

TEST_CASE("rounding") {
  CHECK(rounding_epsilon(2, 1, 1, 10) == doctest::Approx(2 * (1 / 0.94 - 1)).epsilon(1e-12));
  CHECK(rounding_epsilon(2, 1, 1, 10) == doctest::Approx(0.12766).epsilon(1e-4));
  auto lat = TimeStructure::lattice(1.0, {0, 1});
  CMatrix id = CMatrix::Identity(2, 2);
  CHECK((round_to_feasible(id, 10, lat) - id).norm() < 1e-14);
  // d=1, n=1, k=3: eps = 2N(N-1) = 4 > 1.
  CHECK(rounding_epsilon(2, 1, 1, 3) == doctest::Approx(4.0));
  try {
    round_to_feasible(id, 3, lat);
    FAIL("expected rejection");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("eps_k = 4") != std::string::npos);
  }
  CHECK_THROWS_AS(round_to_feasible(id, 2, lat), PreconditionError);

  SUBCASE("rounded relaxation points pass Toeplitz membership") {
    std::mt19937 rng(9);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 5; ++trial) {
      ConicProgram p;
      auto b = decay_constraints(p, DecayMatrixModel::moment(10, lat), 2);
      p.add_constraint(b.gamma(0, 0).re, conic::Relation::Equal, 1.0);
      p.set_objective(conic::Sense::Maximize, nd(rng) * b.gamma(0, 1).re + nd(rng) * b.gamma(0, 1).im);
      auto r = conic::solve(p);
      REQUIRE(r.optimal());
      CMatrix g = b.value(r.x);
      g = 0.5 * (g + g.adjoint()).eval();
      CHECK(membership_decay(round_to_feasible(g, 10, lat), DecayMatrixModel::toeplitz(lat)).feasible);
    }
  }
}

TEST_CASE("atomic decomposition") {
  const double step = 0.4, period = 2 * kPi / step;
  SUBCASE("single atom") {
    auto g = toeplitz_from_atoms({{3.0, 1.0}}, 4, step);
    auto atoms = atomic_decomposition_toeplitz(g, step);
    REQUIRE(atoms.size() == 1);
    CHECK(atoms[0].energy == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(atoms[0].weight == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("energy reported modulo the period") {
    auto g = toeplitz_from_atoms({{3.0 + period, 1.0}}, 3, step);
    auto atoms = atomic_decomposition_toeplitz(g, step);
    REQUIRE(atoms.size() == 1);
    CHECK(atoms[0].energy == doctest::Approx(3.0).epsilon(1e-9));
  }
  SUBCASE("two atoms, N=4") {
    auto g = toeplitz_from_atoms({{1.0, 0.3}, {9.5, 0.7}}, 4, step);
    auto atoms = atomic_decomposition_toeplitz(g, step);
    REQUIRE(atoms.size() == 2);
    std::sort(atoms.begin(), atoms.end(), [](auto& a, auto& b) { return a.energy < b.energy; });
    CHECK(std::abs(atoms[0].energy - 1.0) < 1e-7);
    CHECK(std::abs(atoms[1].energy - 9.5) < 1e-7);
    CHECK(std::abs(atoms[0].weight - 0.3) < 1e-7);
    CHECK(std::abs(atoms[1].weight - 0.7) < 1e-7);
    CHECK((toeplitz_from_atoms(atoms, 4, step) - g).cwiseAbs().maxCoeff() < 1e-7);
  }
  SUBCASE("identity") {
    CMatrix id = CMatrix::Identity(5, 5);
    auto atoms = atomic_decomposition_toeplitz(id, step);
    CHECK((toeplitz_from_atoms(atoms, 5, step) - id).cwiseAbs().maxCoeff() < 1e-7);
  }
  SUBCASE("full-rank random mixtures") {
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Atom> in;
      for (int l = 0; l < 7; ++l) in.push_back({period * u(rng), u(rng)});
      auto g = toeplitz_from_atoms(in, 5, step);
      auto atoms = atomic_decomposition_toeplitz(g, step);
      for (auto& a : atoms) {
        CHECK(a.weight > -1e-9);
        CHECK(a.energy >= 0);
        CHECK(a.energy < period);
      }
      CHECK((toeplitz_from_atoms(atoms, 5, step) - g).cwiseAbs().maxCoeff() < 1e-7);
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(atomic_decomposition_toeplitz(f3_matrix(), step), PreconditionError);
    CMatrix neg = -CMatrix::Identity(2, 2);
    CHECK_THROWS_AS(atomic_decomposition_toeplitz(neg, step), PreconditionError);
  }
}
