#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "qextrap/conic.hpp"

namespace qextrap::conic {

enum class Status { Optimal, Infeasible, Unbounded, NumericalFailure };
std::string to_string(Status s);

enum class SchurKernel { Parallel, SerialReference };

struct SolverOptions {
  double tol_primal = 1e-8;
  double tol_dual = 1e-8;
  double tol_gap = 1e-8;
  int max_iterations = 120;
  int threads = 0;  // 0 keeps the OpenMP default
  bool verbose = false;
};

struct SolveResult {
  Status status = Status::NumericalFailure;
  double objective = 0.0;       // primal objective in the program's own sense
  double dual_objective = 0.0;
  RVector x;                    // one value per program variable
  RVector duals;                // one multiplier per program constraint
  double primal_residual = 0.0; // relative
  double dual_residual = 0.0;   // relative
  double gap = 0.0;             // relative
  int iterations = 0;
  double seconds = 0.0;
  std::string message;
  bool optimal() const { return status == Status::Optimal; }
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  virtual SolveResult solve(const ConicProgram& p, const SolverOptions& opt) const = 0;
};

// Primal-dual path-following interior-point method (HKM direction, Mehrotra corrector).
class InteriorPointBackend final : public Backend {
 public:
  explicit InteriorPointBackend(SchurKernel kernel = SchurKernel::Parallel) : kernel_(kernel) {}
  std::string name() const override;
  SolveResult solve(const ConicProgram& p, const SolverOptions& opt) const override;

 private:
  SchurKernel kernel_;
};

// Names: "ipm" (default) and "ipm-serial". Empty name reads QEXTRAP_BACKEND.
std::unique_ptr<Backend> make_backend(std::string_view name = {});
std::vector<std::string> backend_names();

SolveResult solve(const ConicProgram& p, const SolverOptions& opt = {});
SolveResult solve(const ConicProgram& p, const SolverOptions& opt, const Backend& backend);

// Schur complement kernels, exposed for testing and benchmarking.
// A constraint restricted to one PSD block, expanded over both triangles:
// <A, X> = sum w * X(row, col).
struct BlockEntry {
  int row, col;
  double w;
};

struct SchurBlock {
  int order = 0;
  std::vector<int> constraint;                 // global constraint index per local matrix
  std::vector<std::vector<BlockEntry>> mats;   // one per local matrix
};

// Adds tr(A_i X A_j Zinv) into the upper triangle of m.
void schur_accumulate_reference(const SchurBlock& b, const RMatrix& x, const RMatrix& zinv, RMatrix& m);
void schur_accumulate_parallel(const SchurBlock& b, const RMatrix& x, const RMatrix& zinv, RMatrix& m);

}  // namespace qextrap::conic
