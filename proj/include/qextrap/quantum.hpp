#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qextrap/linalg.hpp"

namespace qextrap {

inline constexpr double kDefaultTol = 1e-9;

// Finite-dimensional model: state, Hamiltonian and one POVM per setting.
// The state is stored as a density matrix; pure inputs are converted.
class Realization {
 public:
  Realization() = default;
  Realization(CMatrix density, CMatrix hamiltonian, std::vector<std::vector<CMatrix>> povms);
  static Realization pure(const CVector& psi, CMatrix hamiltonian,
                          std::vector<std::vector<CMatrix>> povms);

  int dim() const { return static_cast<int>(hamiltonian_.rows()); }
  int settings() const { return static_cast<int>(povms_.size()); }
  int outcomes(int x) const { return static_cast<int>(povms_.at(x).size()); }
  const CMatrix& state() const { return state_; }
  const CMatrix& hamiltonian() const { return hamiltonian_; }
  const std::vector<std::vector<CMatrix>>& povms() const { return povms_; }
  const CMatrix& povm(int x, int a) const { return povms_.at(x).at(a); }

  // Rank-one state vector if the state is pure within tol.
  std::optional<CVector> pure_state(double tol = kDefaultTol) const;

  // Empty when all invariants hold.
  std::vector<std::string> violations(double tol = kDefaultTol) const;
  void require_valid(double tol = kDefaultTol) const;

 private:
  CMatrix state_;
  CMatrix hamiltonian_;
  std::vector<std::vector<CMatrix>> povms_;
};

struct Scenario {
  int settings = 1;
  int outcomes = 2;
  std::vector<double> times;
  double tau = 0.0;
};

// Rows are settings x, columns outcomes a.
using Datapoint = RMatrix;

struct Dataset {
  std::vector<double> times;
  std::vector<Datapoint> points;
  std::size_t size() const { return times.size(); }
};

struct NoisyDataset {
  Dataset estimates;
  RMatrix delta;  // settings × times
  int settings() const { return static_cast<int>(delta.rows()); }
  int outcomes() const {
    return estimates.points.empty() ? 0 : static_cast<int>(estimates.points.front().cols());
  }
};

struct HardConstraint {
  double e_plus;
};
struct SoftConstraint {
  double e_plus;
  double epsilon;
};
struct AverageConstraint {
  double e_bar;
};
using EnergyConstraint = std::variant<HardConstraint, SoftConstraint, AverageConstraint>;

std::string describe(const EnergyConstraint& c);
void check_constraint(const EnergyConstraint& c);

// Eigendecomposition of H computed once and reused across times.
class Evolution {
 public:
  explicit Evolution(const Realization& r);
  RVector datapoint_column(int x, double t) const;
  Datapoint datapoint(double t) const;
  // Gaussian-jittered measurement time with standard deviation sigma.
  RVector averaged_column(int x, double t_mean, double sigma) const;
  CVector evolved(const CVector& psi, double t) const;
  const RVector& energies() const { return energies_; }
  const CMatrix& eigenvectors() const { return basis_; }

 private:
  RVector energies_;
  CMatrix basis_;
  CMatrix state_eb_;                     // state in the energy basis
  std::vector<std::vector<CMatrix>> povm_eb_;
};

RVector simulate_datapoint(const Realization& r, int x, double t);
Dataset simulate_dataset(const Realization& r, const std::vector<double>& times);
RVector gaussian_time_average(const Realization& r, int x, double t_mean, double sigma);

struct EnergyCheck {
  std::string name;
  double measured;
  double limit;
  bool pass;
};
struct EnergyReport {
  bool pass = true;
  std::vector<EnergyCheck> checks;
};
EnergyReport validate_realization(const Realization& r, const EnergyConstraint& c,
                                  double tol = kDefaultTol);

// Spectral weight of the state on eigenspaces with energy >= threshold.
double high_energy_weight(const Realization& r, double threshold);

Realization purify(const Realization& r, double tol = kDefaultTol);

// Direct sum with the state weighted lambda : (1-lambda). Settings and outcomes must agree.
Realization direct_sum_mixture(const Realization& a, const Realization& b, double lambda);

struct FitReport {
  bool fits = true;
  double max_violation = 0.0;
  RMatrix violation;  // settings × times
};
FitReport fit_check(const Dataset& d, const NoisyDataset& nd, double tol = kDefaultTol);

void check_dataset(const Dataset& d, double tol = kDefaultTol);
void check_noisy_dataset(const NoisyDataset& nd, double tol = kDefaultTol);

}  // namespace qextrap
