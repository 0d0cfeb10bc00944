#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qextrap/generators.hpp"
#include "qextrap/relaxations.hpp"
#include "qextrap/solver.hpp"

namespace qextrap {

// Bound sum_{x,a} f(x,a) P(a|x,tau) over every relaxation member that fits the data.
struct ExtrapolationProblem {
  NoisyDataset data;
  Scenario scenario;   // tau is the extrapolation time
  RMatrix objective;   // settings × outcomes
  RelaxationSpec relaxation;
};

void check_problem(const ExtrapolationProblem& p);

// Zero error bars are raised to this value inside the fit constraints.
inline constexpr double kDeltaFloor = 1e-9;

struct SolveStats {
  conic::Status status = conic::Status::NumericalFailure;
  int iterations = 0;
  double seconds = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  std::string message;
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  SolveStats lower_stats;
  SolveStats upper_stats;
  std::optional<double> gap_bound;
  bool delta_floored = false;  // some error bar was raised to kDeltaFloor

  bool optimal() const {
    return lower_stats.status == conic::Status::Optimal && upper_stats.status == conic::Status::Optimal;
  }
  bool infeasible() const {
    return lower_stats.status == conic::Status::Infeasible || upper_stats.status == conic::Status::Infeasible;
  }
  double width() const { return upper - lower; }
};

struct ExtrapolationOptions {
  conic::SolverOptions solver;
  const conic::Backend* backend = nullptr;  // nullptr picks make_backend()
};

Interval solve_interval(const ExtrapolationProblem& p, const ExtrapolationOptions& opt = {});

// Distance bound between relaxation members and realizable data for the model, if one is known.
std::optional<double> model_gap_bound(const ModelHandle& h);

struct KnightianVerdict {
  bool knightian = false;
  std::vector<int> fitting;               // indices of realizations that fit the data
  std::vector<std::vector<bool>> covered;  // [target][a]: deterministic outcome a lies in the hull
};

// Inner check: every deterministic distribution at tau is a mixture of datapoints of fitting realizations.
KnightianVerdict knightian_inner_check(const std::vector<Realization>& realizations, const NoisyDataset& nd,
                                       double tau, const std::vector<int>& targets,
                                       const conic::SolverOptions& solver = {});

enum class CertaintyTag { KnightianCandidate, ApproximateFullCertainty, Partial };
std::string to_string(CertaintyTag t);

struct CertaintyReport {
  std::vector<std::vector<Interval>> intervals;  // [x][a] for P(a|x,tau)
  RMatrix candidate;                             // interval midpoints
  double max_width = 0.0;
  double threshold = 0.05;
  CertaintyTag tag = CertaintyTag::Partial;
};

// The objective of p is ignored; every indicator of (x, a) is bounded.
CertaintyReport certainty_scan(const ExtrapolationProblem& p, double threshold = 0.05,
                               const ExtrapolationOptions& opt = {});

struct SelfTestReport {
  std::vector<double> times;     // t_1..t_{N-1}
  std::vector<double> overlaps;  // |<psi|psi(t_j)>|
  double overlap_bound = 0.0;    // sqrt(2 delta - delta^2)
  double epsilon = 0.0;          // largest squared overlap
  double window_weight = 0.0;
  std::vector<double> witness;   // V at the requested energies
};

// Largest l1 distance between the dataset of r (setting 0) and D_N at its times.
double selftest_delta(const Realization& r, int n, double e_plus);

// Product of sines vanishing exactly on the D_N energy grid.
double witness_polynomial(double energy, int n, double e_plus);

SelfTestReport selftest_diagnostics(const Realization& r, int n, double e_plus, double delta,
                                    const std::vector<double>& energies = {});

struct TagCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Checks the expected-behaviour markers of a suite: knightian markers with the inner check,
// certainty and value markers with certainty_scan at order m, and self-test diagnostics for D_N.
std::vector<TagCheck> check_suite_markers(const NamedSuite& suite, int m, double threshold = 0.05,
                                          const ExtrapolationOptions& opt = {});

}  // namespace qextrap
