#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qextrap/cones.hpp"
#include "qextrap/conic.hpp"
#include "qextrap/quantum.hpp"

namespace qextrap {

enum class ModelKind { Finite, GridHard, Average, Soft };
std::string to_string(ModelKind k);

// Which relaxation to build for a scenario. The kind follows the energy constraint:
// hard -> S_m (or a finite spectrum when `energies` is given), average -> A_m, soft -> S^k_m.
struct RelaxationSpec {
  EnergyConstraint constraint = HardConstraint{1.0};
  int m = 8;
  std::optional<int> moment_order;
  std::vector<double> energies;       // user-supplied finite spectrum
  std::optional<DecayMatrixModel> decay;  // soft model; rows cover the times and then tau
  std::optional<double> e_plus;       // A_m cutoff override
  bool include_tau = true;
};

// Conic program together with the maps needed to read datasets off its variables.
struct ModelHandle {
  ModelKind kind = ModelKind::Finite;
  conic::ConicProgram program;
  Scenario scenario;
  std::vector<double> times;     // scenario times, then tau when included
  bool has_tau = false;
  std::vector<double> grid;      // low-energy grid
  double e_plus = 0.0;
  double e_bar = 0.0;
  double epsilon = 0.0;
  int weights = -1;              // p_0..p_{L-1}, then p_high when there is a high block
  bool has_high = false;
  std::vector<std::vector<conic::HermitianVar>> tilde;  // [x][a]
  std::optional<DecayMatrixModel> decay_model;
  std::optional<DecayBlock> decay;
  std::vector<CVector> probes;   // evaluation vector per model time
  std::vector<double> slack;     // l1 slack per model time
  std::vector<std::vector<std::vector<conic::LinearExpr>>> data;  // [j][x][a]

  int num_times() const { return static_cast<int>(times.size()); }
  int tau_index() const { return has_tau ? num_times() - 1 : -1; }
  int low_dim() const { return static_cast<int>(grid.size()); }
  // <probe_j| M~_{a|x} |probe_j>
  conic::LinearExpr grid_value(int x, int a, int j) const;
  const conic::LinearExpr& value(int x, int a, int j) const { return data.at(j).at(x).at(a); }
  RVector weight_values(const RVector& sol) const;
};

ModelHandle model_S_finite(const std::vector<double>& energies, const Scenario& s, bool include_tau = true);
ModelHandle model_S_m(double e_plus, int m, const Scenario& s, bool include_tau = true);
// e_plus <= 0 selects the default cutoff (E_bar / (4 t^2))^(1/3) m^(2/3).
ModelHandle model_A_m(double e_bar, int m, const Scenario& s, double e_plus = 0.0, bool include_tau = true);
// decay: model for the times followed by tau (when included); defaults to equal_diag.
ModelHandle model_soft(double e_plus, double epsilon, int m, const std::optional<DecayMatrixModel>& decay,
                       const Scenario& s, bool include_tau = true);
ModelHandle build_model(const RelaxationSpec& spec, const Scenario& s);

// sum_a |P(a|x,t_j) - estimate(a|x,j)| <= max(delta(x,j), delta_floor) at the scenario times.
void add_fit_constraints(ModelHandle& h, const NoisyDataset& nd, double delta_floor = 1e-9);

double default_average_cutoff(double e_bar, double t_max, int m);

// Model dataset at the scenario times (and tau, last) from a solution vector.
Dataset model_dataset(const ModelHandle& h, const RVector& sol);
// Dataset of the grid model (before slack) at the model times.
Dataset grid_dataset(const ModelHandle& h, const RVector& sol);

Realization extract_realization_finite(const ModelHandle& h, const RVector& sol);
Realization extract_realization_average(const ModelHandle& h, const RVector& sol);
Realization extract_realization_soft(const ModelHandle& h, const RVector& sol);

enum class GapKind { Sm, Am, SoftKm, Extraction };
GapKind parse_gap_kind(const std::string& name);

struct GapParams {
  int m = 1;
  int k = 1;        // moment order
  int n = 1;        // generator count
  int d = 1;
  int n_times = 1;
  double e_plus = 1.0;
  double e_bar = 1.0;
  double t_max = 0.0;
  std::vector<double> times;  // S_m uses max over these when given
  // extraction gap (name "lemma3")
  double eps_m = 0.0;
  double r = 1.0;
  double f_reference = 0.0;  // f(P0(tau))
  double mu = 0.0;
  std::vector<std::vector<double>> objective;  // [x][a]
};

double gap_bounds(GapKind kind, const GapParams& p);

}  // namespace qextrap
