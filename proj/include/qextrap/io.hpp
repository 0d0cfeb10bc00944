#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qextrap/extrapolation.hpp"
#include "qextrap/generators.hpp"

namespace qextrap::io {

using nlohmann::json;

struct TimesSpec {
  enum class Kind { Values, Lattice, Structure };
  Kind kind = Kind::Values;
  std::vector<double> values;        // Values
  TimeStructure structure;           // Lattice and Structure; one row per data time
  std::optional<std::vector<int>> tau_coeffs;  // Structure: coefficients of tau
};

// Parsed scenario config. Objective and estimates are 0-based internally; the JSON
// objective uses 1-based x and a like the CSV output.
struct ScenarioConfig {
  int settings = 1;
  int outcomes = 2;
  TimesSpec times;
  std::vector<Datapoint> estimates;
  RMatrix delta;  // settings × times
  EnergyConstraint constraint = HardConstraint{1.0};
  int m = 8;
  std::optional<int> moment_order;
  std::string decay_model = "equal_diag";
  std::vector<double> energies;
  std::optional<double> cutoff;  // A_m cutoff override
  double tau = 0.0;
  RMatrix objective;
  conic::SolverOptions solver;
};

// Throws ValidationError with one "/json/path: message" entry per problem.
ScenarioConfig parse_config(const json& j);
json to_json(const ScenarioConfig& c);
std::vector<double> data_times(const ScenarioConfig& c);

// Builds the extrapolation problem. Warnings (e.g. a decay model replaced for raw times) are appended.
ExtrapolationProblem to_problem(const ScenarioConfig& c, std::vector<std::string>* warnings = nullptr);

// Complex matrices: arrays of rows; entries are numbers or [re, im] pairs.
json complex_to_json(const CMatrix& m);
CMatrix complex_from_json(const json& j, const std::string& path);

// {"state": vector | "density": matrix, "hamiltonian": matrix, "povms": [[matrix, ...], ...]}
Realization realization_from_json(const json& j);
json realization_to_json(const Realization& r);

// Columns t, x, a, p with 1-based x and a.
std::string dataset_csv(const Dataset& d);

json interval_json(const Interval& iv);

// Registry labels: D<N> (or "D" with params.N), fogbank, aha, aha.first, aha.second, aha.joint,
// aha.two_level, aha.two_level_joint, sin, superexp, disc. Unknown keys in params are rejected.
NamedSuite registry_suite(const std::string& label, const json& params = json::object());
std::vector<std::string> registry_labels();

}  // namespace qextrap::io
