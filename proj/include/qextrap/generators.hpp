#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qextrap/quantum.hpp"

namespace qextrap {

enum class Behavior { Knightian, FullCertainty, Value };
std::string to_string(Behavior b);

// Expected behaviour of the suite at an extrapolation time.
struct TauMarker {
  double tau;
  Behavior behavior;
  int setting = 0;
  std::vector<double> expected;  // P(.|setting, tau); empty for Knightian markers
};

struct NamedSuite {
  std::string label;
  Scenario scenario;  // tau holds the first marker time, if any
  NoisyDataset noisy;
  EnergyConstraint constraint = HardConstraint{1.0};
  std::vector<std::string> realization_names;
  std::vector<Realization> realizations;
  std::function<Datapoint(double)> closed_form;  // may be empty
  std::vector<TauMarker> markers;
};

NoisyDataset make_noisy(const std::vector<double>& times, const std::vector<Datapoint>& points, double delta);

NoisyDataset dataset_O(int n_times, double period, double delta);

// alpha(t) = P(1|t) - P(0|t) = sum_k c_k cos(E_k t) / sum_k |c_k|.
// Energies are shifted up when negative so that H >= 0.
Realization realization_cosine_mixture(const std::vector<double>& c, const std::vector<double>& energies);

// Same outcome probabilities with the two POVM elements exchanged.
Realization swap_outcomes(const Realization& r, int setting = 0);

NamedSuite realization_problematic_sin(int n, double period, int n_times = 4);
NamedSuite realization_superexp(double lambda, int n, double period, int n_times = 4);

// Uniform superposition and equally spaced energies E+ k/(N-1).
CVector reference_state(int n);
CMatrix reference_hamiltonian(int n, double e_plus);
NamedSuite dataset_D(int n, double e_plus = 1.0);

struct AhaSuites {
  NamedSuite first;       // A1 alone
  NamedSuite second;      // A2 alone
  NamedSuite joint;       // A
  NamedSuite two_level;   // single two-point dataset with Knightian uncertainty
  NamedSuite two_level_joint;  // the same with D2 added
};
AhaSuites aha_suite(double e_plus = 1.0);
Realization aha_plus(double e_plus);
Realization aha_minus(int setting, double e_plus);

NamedSuite fogbank_suite(double e_plus, const std::vector<double>& q);
Realization fogbank_realization(double e_plus, const std::vector<double>& q);

// Qubit |+>, H = (2m+1)pi/Delta |1><1|; soft constraint with the given E+.
NamedSuite discontinuity_family(int m, double delta_t, double e_plus = 0.0);

}  // namespace qextrap
