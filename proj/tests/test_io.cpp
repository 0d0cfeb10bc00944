#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "qextrap/error.hpp"
#include "qextrap/io.hpp"

using namespace qextrap;
using io::json;

namespace {

json example_config() {
  return json::parse(R"({
    "scenario": {"settings": 1, "outcomes": 2},
    "times": {"values": [0.25, 0.5]},
    "data": {"estimates": [[[0.5, 0.5]], [[0.25, 0.75]]], "delta": 0.1},
    "constraint": {"type": "hard", "E_plus": 2},
    "relaxation": {"m": 6},
    "target": {"tau": 1.5, "objective": [{"x": 1, "a": 2, "coef": -1}]},
    "solver": {"tolerances": {"primal": 1e-7, "dual": 1e-7, "gap": 1e-7}, "max_iterations": 80}
  })");
}

std::vector<std::string> violations(const json& j) {
  try {
    io::parse_config(j);
  } catch (const ValidationError& e) {
    return e.violations();
  }
  return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& text) {
  for (const auto& s : v)
    if (s.find(text) != std::string::npos) return true;
  return false;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& csv) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = io::parse_config(example_config());
  CHECK(c.settings == 1);
  CHECK(c.outcomes == 2);
  CHECK(io::data_times(c) == std::vector<double>{0.25, 0.5});
  CHECK(c.estimates.size() == 2);
  CHECK(c.estimates[1](0, 1) == 0.75);
  CHECK(c.delta.rows() == 1);
  CHECK(c.delta.cols() == 2);
  CHECK(c.delta(0, 1) == 0.1);
  CHECK(std::get<HardConstraint>(c.constraint).e_plus == 2.0);
  CHECK(c.m == 6);
  CHECK(c.tau == 1.5);
  CHECK(c.objective(0, 0) == 0.0);
  CHECK(c.objective(0, 1) == -1.0);
  CHECK(c.solver.max_iterations == 80);

  SUBCASE("round trip is the identity") {
    const json once = io::to_json(c);
    const json twice = io::to_json(io::parse_config(once));
    CHECK(once == twice);
    for (const char* file : {"aha_joint.json", "vacuous.json", "fogbank_tau2.json", "O4_sin.json", "soft_lattice.json"}) {
      std::ifstream in(std::string(QEXTRAP_CONFIG_DIR) + "/" + file);
      REQUIRE(in);
      const json first = io::to_json(io::parse_config(json::parse(in)));
      CHECK(io::to_json(io::parse_config(first)) == first);
    }
  }
  SUBCASE("lattice times and tau on the lattice") {
    json j = example_config();
    j["times"] = {{"lattice", {{"step", 0.5}, {"indices", {1, 2}}}}};
    j["target"]["tau"] = 2.0;
    const auto lc = io::parse_config(j);
    CHECK(io::data_times(lc) == std::vector<double>{0.5, 1.0});
    CHECK(io::to_json(io::parse_config(io::to_json(lc))) == io::to_json(lc));
    auto p = io::to_problem(lc);
    CHECK(p.scenario.tau == 2.0);
    // tau only has to sit on the lattice when a decay model is built over it
    j["target"]["tau"] = 1.7;
    CHECK_NOTHROW(io::to_problem(io::parse_config(j)));
    j["constraint"] = {{"type", "soft"}, {"E_plus", 1.0}, {"epsilon", 0.5}};
    j["relaxation"]["decay_model"] = "toeplitz";
    CHECK_THROWS_AS(io::to_problem(io::parse_config(j)), ValidationError);
    j["target"]["tau"] = 1.5;
    auto soft = io::to_problem(io::parse_config(j));
    REQUIRE(soft.relaxation.decay);
    CHECK(soft.relaxation.decay->structure.size() == 3);
  }
  SUBCASE("per-point error bars") {
    json j = example_config();
    j["data"]["delta"] = {{0.0, 0.2}};
    const auto dc = io::parse_config(j);
    CHECK(dc.delta(0, 0) == 0.0);
    CHECK(dc.delta(0, 1) == 0.2);
  }
  SUBCASE("raw times fall back to equal_diag with a warning") {
    json j = example_config();
    j["constraint"] = {{"type", "soft"}, {"E_plus", 1.0}, {"epsilon", 0.5}};
    j["relaxation"]["decay_model"] = "toeplitz";
    std::vector<std::string> warnings;
    auto p = io::to_problem(io::parse_config(j), &warnings);
    CHECK(warnings.size() == 1);
    REQUIRE(p.relaxation.decay);
    CHECK(p.relaxation.decay->kind == DecayMatrixModel::Kind::EqualDiag);
  }
}

TEST_CASE("config errors are path addressed") {
  json j = example_config();
  j["times"]["lattice"] = {{"step", 1.0}, {"indices", {0}}};
  CHECK(mentions(violations(j), "/times"));

  j = example_config();
  j["scenario"]["outcomes"] = 1;
  CHECK(mentions(violations(j), "/scenario/outcomes"));

  j = example_config();
  j["data"]["estimates"][1][0] = {0.5};
  CHECK(mentions(violations(j), "/data/estimates/1/0"));

  j = example_config();
  j["target"]["objective"][0]["a"] = 3;
  CHECK(mentions(violations(j), "/target/objective/0/a"));

  j = example_config();
  j["constraint"]["type"] = "weird";
  CHECK(mentions(violations(j), "/constraint/type"));

  j = example_config();
  j["relaxation"]["colour"] = "blue";
  CHECK(mentions(violations(j), "/relaxation/colour"));

  j = example_config();
  j.erase("target");
  CHECK(mentions(violations(j), "/target"));

  // every problem is reported, not only the first
  j = example_config();
  j["scenario"]["settings"] = 0;
  j["relaxation"]["m"] = 0;
  CHECK(violations(j).size() >= 2);

  CHECK(violations(example_config()).empty());
}

TEST_CASE("dataset csv") {
  auto d2 = io::registry_suite("D2");
  const auto csv = io::dataset_csv(simulate_dataset(d2.realizations[0], {0.0, kPi}));
  const auto rows = csv_rows(csv);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == std::vector<std::string>{"t", "x", "a", "p"});
  CHECK(rows[1][0] == "0");
  CHECK(rows[1][1] == "1");
  CHECK(rows[1][2] == "1");
  CHECK(std::stod(rows[1][3]) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::stod(rows[3][0]) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(rows[3][2] == "1");
  CHECK(std::abs(std::stod(rows[3][3])) < 1e-9);

  CHECK(io::dataset_csv(simulate_dataset(d2.realizations[0], {})) == "t,x,a,p\n");

  SUBCASE("aha P+ reproduces the joint dataset") {
    const auto aha = io::registry_suite("aha.joint");
    const auto& nd = aha.noisy;
    const auto rows_aha = csv_rows(io::dataset_csv(simulate_dataset(aha.realizations[0], nd.estimates.times)));
    REQUIRE(rows_aha.size() == 1 + nd.estimates.size() * 2 * 2);
    std::size_t i = 1;
    for (std::size_t j = 0; j < nd.estimates.size(); ++j)
      for (int x = 0; x < 2; ++x)
        for (int a = 0; a < 2; ++a, ++i)
          CHECK(std::stod(rows_aha[i][3]) == doctest::Approx(nd.estimates.points[j](x, a)).epsilon(1e-9));
  }
}

TEST_CASE("realization json") {
  const auto fb = io::registry_suite("fogbank");
  for (const auto& r : fb.realizations) {
    const json j = io::realization_to_json(r);
    const auto back = io::realization_from_json(json::parse(j.dump()));
    const std::vector<double> ts{0.0, 1.0, 15 * kPi / 2, 9 * kPi};
    const auto a = simulate_dataset(r, ts), b = simulate_dataset(back, ts);
    for (std::size_t k = 0; k < ts.size(); ++k) CHECK((a.points[k] - b.points[k]).cwiseAbs().maxCoeff() < 1e-12);
  }
  const json qubit = json::parse(R"({
    "state": [0.7071067811865476, [0, 0.7071067811865476]],
    "hamiltonian": [[0, 0], [0, 1]],
    "povms": [[[[1, 0], [0, 0]], [[0, 0], [0, 1]]]]
  })");
  const auto r = io::realization_from_json(qubit);
  CHECK(r.dim() == 2);
  CHECK(simulate_dataset(r, {0.0}).points[0](0, 0) == doctest::Approx(0.5));

  json bad = qubit;
  bad["povms"][0][0] = {{1, 0}, {0, 1}};
  CHECK_THROWS_AS(io::realization_from_json(bad), ValidationError);
  bad = qubit;
  bad["density"] = {{1, 0}, {0, 0}};
  CHECK_THROWS_AS(io::realization_from_json(bad), ValidationError);
  bad = qubit;
  bad["hamiltonian"] = {{0, 1}, {0, 1}};
  CHECK_THROWS_AS(io::realization_from_json(bad), ValidationError);
  bad = qubit;
  bad["spin"] = 1;
  CHECK_THROWS_AS(io::realization_from_json(bad), ValidationError);

  const CMatrix m = CMatrix{{cplx(1, 0), cplx(0, -2)}, {cplx(0, 2), cplx(3, 0)}};
  CHECK((io::complex_from_json(io::complex_to_json(m), "/m") - m).norm() == 0.0);
}

TEST_CASE("registry") {
  for (int n = 2; n <= 5; ++n) {
    auto s = io::registry_suite("D" + std::to_string(n));
    CHECK(s.realizations[0].dim() == n);
  }
  CHECK(io::registry_suite("D", {{"N", 4}}).realizations[0].dim() == 4);
  CHECK(io::registry_suite("fogbank").realizations.size() == 4);
  CHECK(io::registry_suite("fogbank", {{"q", {0.2, 0.5, 0.3}}}).realizations.size() == 4);
  for (const char* label : {"aha", "aha.first", "aha.second", "aha.joint", "aha.two_level", "aha.two_level_joint",
                            "sin", "disc"})
    CHECK_NOTHROW(io::registry_suite(label));
  CHECK_NOTHROW(io::registry_suite("superexp", {{"n", 4}}));
  CHECK_THROWS_AS(io::registry_suite("nope"), ValidationError);
  CHECK_THROWS_AS(io::registry_suite("Dx"), ValidationError);
  CHECK_THROWS_AS(io::registry_suite("fogbank", {{"colour", 1}}), ValidationError);
  CHECK_THROWS_AS(io::registry_suite("sin", {{"n", "four"}}), ValidationError);
  CHECK(io::registry_labels().size() == 11);
}

TEST_CASE("interval json") {
  Interval iv;
  iv.lower = 0.25;
  iv.upper = 0.75;
  iv.lower_stats.status = iv.upper_stats.status = conic::Status::Optimal;
  iv.gap_bound = 0.1;
  json j = io::interval_json(iv);
  CHECK(j["status"] == "optimal");
  CHECK(j["mu_minus"] == 0.25);
  CHECK(j["mu_plus"] == 0.75);
  CHECK(j["gap_bound"] == 0.1);
  CHECK_FALSE(j.contains("seconds"));

  iv.upper_stats.status = conic::Status::Infeasible;
  iv.gap_bound.reset();
  j = io::interval_json(iv);
  CHECK(j["status"] == "infeasible");
  CHECK(j["mu_minus"].is_null());
  CHECK(j["gap_bound"].is_null());
}
