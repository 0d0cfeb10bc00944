#pragma once

#include <vector>

#include "qextrap/conic.hpp"
#include "qextrap/solver.hpp"

namespace qextrap {

// Times written as t_k = sum_j coeffs[k][j] * generators[j] + offset. Generators are
// declared non-congruent by the caller; this is never inferred from the reals.
struct TimeStructure {
  std::vector<double> generators;
  std::vector<std::vector<int>> coeffs;
  double offset = 0.0;

  static TimeStructure lattice(double step, std::vector<int> indices, double offset = 0.0);

  int size() const { return static_cast<int>(coeffs.size()); }
  int rank() const { return static_cast<int>(generators.size()); }
  bool is_lattice() const { return rank() == 1; }
  std::vector<double> times() const;
  // Throws ValidationError unless the reconstructed times match.
  void check(const std::vector<double>& times, double tol = 1e-9) const;
  // max over all coefficient entries of |a_ij - a_kl|
  int max_entry_spread() const;
  // max over generators l and times j,k of |a_jl - a_kl|
  int max_component_spread() const;
  // Restriction to a subset of rows.
  TimeStructure select(const std::vector<int>& rows) const;
  bool operator==(const TimeStructure&) const = default;
};

struct DecayMatrixModel {
  enum class Kind { EqualDiag, Toeplitz, Moment };
  Kind kind = Kind::EqualDiag;
  int order = 0;              // moment order k
  TimeStructure structure;    // unused for EqualDiag

  static DecayMatrixModel equal_diag() { return {}; }
  static DecayMatrixModel toeplitz(TimeStructure lattice);
  static DecayMatrixModel moment(int order, TimeStructure structure);
  void check(int n_times) const;
};

std::string to_string(DecayMatrixModel::Kind k);

struct ComplexExpr {
  conic::LinearExpr re, im;
};

// gamma is a principal submatrix of a Hermitian PSD base variable whose structure
// (equal diagonal, Toeplitz, multilevel Toeplitz) is enforced with linear equalities.
struct DecayBlock {
  conic::HermitianVar base;
  std::vector<int> rows;  // gamma index -> base index
  int num_psd_blocks = 1;
  int num_equalities = 0;
  int size() const { return static_cast<int>(rows.size()); }
  ComplexExpr gamma(int j, int k) const;
  CMatrix value(const RVector& x) const;
};

DecayBlock decay_constraints(conic::ConicProgram& p, const DecayMatrixModel& model, int n_times);

struct MembershipVerdict {
  bool feasible = false;
  double residual = 0.0;  // max entrywise distance to the cone found by the solver
  conic::Status status = conic::Status::NumericalFailure;
};

MembershipVerdict membership_decay(const CMatrix& gamma, const DecayMatrixModel& model,
                                   const conic::SolverOptions& opt = {}, double tol = 1e-6);

// eps_k = N(N-1)[(1 - 6 d^2/k^2)^(-n) - 1]
double rounding_epsilon(int n_times, int rank, int d, int order);
int rounding_d(const TimeStructure& s);
CMatrix round_to_feasible(const CMatrix& gamma, int order, const TimeStructure& s);

struct Atom {
  double energy;  // in [0, 2 pi / step)
  double weight;
};

// Vandermonde decomposition: gamma_jk = sum_l w_l exp(-i E_l step (k - j)).
std::vector<Atom> atomic_decomposition_toeplitz(const CMatrix& gamma, double step, double tol = 1e-8);
CMatrix toeplitz_from_atoms(const std::vector<Atom>& atoms, int n, double step);

}  // namespace qextrap
