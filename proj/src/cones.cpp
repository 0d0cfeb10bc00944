#include "qextrap/cones.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "qextrap/error.hpp"

namespace qextrap {

using conic::LinearExpr;
using conic::Relation;

TimeStructure TimeStructure::lattice(double step, std::vector<int> indices, double offset) {
  TimeStructure s;
  s.generators = {step};
  for (int a : indices) s.coeffs.push_back({a});
  s.offset = offset;
  return s;
}

std::vector<double> TimeStructure::times() const {
  std::vector<double> t;
  for (const auto& row : coeffs) {
    double v = offset;
    for (int j = 0; j < rank(); ++j) v += row[j] * generators[j];
    t.push_back(v);
  }
  return t;
}

void TimeStructure::check(const std::vector<double>& ts, double tol) const {
  std::vector<std::string> bad;
  if (generators.empty()) bad.push_back("time structure has no generators");
  for (double g : generators)
    if (!(g > 0)) bad.push_back("generators must be positive");
  for (const auto& row : coeffs)
    if (static_cast<int>(row.size()) != rank()) bad.push_back("coefficient row length differs from generator count");
  if (bad.empty()) {
    if (ts.size() != coeffs.size()) {
      bad.push_back("structure describes " + std::to_string(coeffs.size()) + " times, scenario has " +
                    std::to_string(ts.size()));
    } else {
      auto rec = times();
      for (std::size_t k = 0; k < ts.size(); ++k)
        if (std::abs(rec[k] - ts[k]) > tol)
          bad.push_back("time " + std::to_string(k) + " reconstructs to " + std::to_string(rec[k]) +
                        " instead of " + std::to_string(ts[k]));
    }
  }
  if (!bad.empty()) throw ValidationError(bad);
}

int TimeStructure::max_entry_spread() const {
  if (coeffs.empty()) return 0;
  int lo = coeffs[0].empty() ? 0 : coeffs[0][0], hi = lo;
  for (const auto& row : coeffs)
    for (int a : row) lo = std::min(lo, a), hi = std::max(hi, a);
  return hi - lo;
}

int TimeStructure::max_component_spread() const {
  int best = 0;
  for (int l = 0; l < rank(); ++l) {
    int lo = coeffs[0][l], hi = lo;
    for (const auto& row : coeffs) lo = std::min(lo, row[l]), hi = std::max(hi, row[l]);
    best = std::max(best, hi - lo);
  }
  return best;
}

TimeStructure TimeStructure::select(const std::vector<int>& rows) const {
  TimeStructure s;
  s.generators = generators;
  s.offset = offset;
  for (int r : rows) s.coeffs.push_back(coeffs.at(r));
  return s;
}

DecayMatrixModel DecayMatrixModel::toeplitz(TimeStructure lattice) {
  DecayMatrixModel m;
  m.kind = Kind::Toeplitz;
  m.structure = std::move(lattice);
  return m;
}

DecayMatrixModel DecayMatrixModel::moment(int order, TimeStructure structure) {
  DecayMatrixModel m;
  m.kind = Kind::Moment;
  m.order = order;
  m.structure = std::move(structure);
  return m;
}

std::string to_string(DecayMatrixModel::Kind k) {
  switch (k) {
    case DecayMatrixModel::Kind::EqualDiag: return "equal_diag";
    case DecayMatrixModel::Kind::Toeplitz: return "toeplitz";
    case DecayMatrixModel::Kind::Moment: return "moment";
  }
  return "?";
}

void DecayMatrixModel::check(int n_times) const {
  if (n_times < 1) throw PreconditionError("decay block needs at least one time");
  if (kind == Kind::EqualDiag) return;
  if (structure.size() != n_times)
    throw PreconditionError("time structure has " + std::to_string(structure.size()) + " rows, expected " +
                            std::to_string(n_times));
  if (structure.rank() < 1) throw PreconditionError("time structure has no generators");
  if (kind == Kind::Toeplitz && structure.rank() != 1)
    throw PreconditionError("toeplitz decay model needs a one-generator lattice");
  if (kind == Kind::Moment) {
    if (structure.rank() > 3)
      throw PreconditionError("moment decay model supports at most 3 generators, got " +
                              std::to_string(structure.rank()));
    int need = structure.max_entry_spread();
    if (order < need)
      throw PreconditionError("moment order " + std::to_string(order) + " below required minimum " +
                              std::to_string(need));
  }
}

ComplexExpr DecayBlock::gamma(int j, int k) const {
  return {base.re(rows[j], rows[k]), base.im(rows[j], rows[k])};
}

CMatrix DecayBlock::value(const RVector& x) const {
  CMatrix b = base.value(x);
  CMatrix g(size(), size());
  for (int j = 0; j < size(); ++j)
    for (int k = 0; k < size(); ++k) g(j, k) = b(rows[j], rows[k]);
  return g;
}

namespace {

// Ties every base entry to the first entry sharing its key. Only the upper triangle
// is visited; the lower one follows from hermiticity.
template <class KeyFn>
int tie_entries(conic::ConicProgram& p, const conic::HermitianVar& h, KeyFn key) {
  std::map<std::vector<int>, std::pair<int, int>> first;
  int added = 0;
  for (int r = 0; r < h.dim(); ++r)
    for (int c = r; c < h.dim(); ++c) {
      auto [it, fresh] = first.try_emplace(key(r, c), r, c);
      if (fresh) continue;
      auto [r0, c0] = it->second;
      p.add_constraint(h.re(r, c) - h.re(r0, c0), Relation::Equal);
      ++added;
      if (r != c) {
        p.add_constraint(h.im(r, c) - h.im(r0, c0), Relation::Equal);
        ++added;
      }
    }
  return added;
}

}  // namespace

DecayBlock decay_constraints(conic::ConicProgram& p, const DecayMatrixModel& model, int n_times) {
  model.check(n_times);
  DecayBlock b;
  switch (model.kind) {
    case DecayMatrixModel::Kind::EqualDiag: {
      b.base = conic::add_hermitian(p, n_times);
      for (int j = 0; j < n_times; ++j) b.rows.push_back(j);
      b.num_equalities = tie_entries(p, b.base, [](int r, int c) {
        return r == c ? std::vector<int>{0} : std::vector<int>{r, c};
      });
      break;
    }
    case DecayMatrixModel::Kind::Toeplitz: {
      int lo = model.structure.coeffs[0][0], hi = lo;
      for (const auto& row : model.structure.coeffs) lo = std::min(lo, row[0]), hi = std::max(hi, row[0]);
      b.base = conic::add_hermitian(p, hi - lo + 1);
      for (const auto& row : model.structure.coeffs) b.rows.push_back(row[0] - lo);
      b.num_equalities = tie_entries(p, b.base, [](int r, int c) { return std::vector<int>{c - r}; });
      break;
    }
    case DecayMatrixModel::Kind::Moment: {
      // Base is W_k indexed by {-k..k}^n, W(u, v) = y(v - u). Times sit at u = a - min(a),
      // which stays inside the index box because k bounds the coefficient spread.
      const int n = model.structure.rank(), k = model.order, side = 2 * k + 1;
      int dim = 1;
      for (int l = 0; l < n; ++l) dim *= side;
      auto digits = [&](int idx) {
        std::vector<int> u(n);
        for (int l = n - 1; l >= 0; --l) u[l] = idx % side - k, idx /= side;
        return u;
      };
      b.base = conic::add_hermitian(p, dim);
      std::vector<int> lo(n);
      for (int l = 0; l < n; ++l) {
        lo[l] = model.structure.coeffs[0][l];
        for (const auto& row : model.structure.coeffs) lo[l] = std::min(lo[l], row[l]);
      }
      for (const auto& row : model.structure.coeffs) {
        int idx = 0;
        for (int l = 0; l < n; ++l) idx = idx * side + (row[l] - lo[l]) + k;
        b.rows.push_back(idx);
      }
      b.num_equalities = tie_entries(p, b.base, [&](int r, int c) {
        auto u = digits(r), v = digits(c);
        for (int l = 0; l < n; ++l) v[l] -= u[l];
        return v;
      });
      break;
    }
  }
  return b;
}

MembershipVerdict membership_decay(const CMatrix& gamma, const DecayMatrixModel& model,
                                   const conic::SolverOptions& opt, double tol) {
  if (gamma.rows() != gamma.cols() || !is_hermitian(gamma, 1e-9))
    throw PreconditionError("membership test needs a Hermitian matrix");
  const int n = static_cast<int>(gamma.rows());
  conic::ConicProgram p;
  DecayBlock b = decay_constraints(p, model, n);
  const int r = p.add_nonnegative(1);
  auto bound = [&](const LinearExpr& e, double target) {
    p.add_constraint(e - LinearExpr::variable(r), Relation::LessEqual, target);
    p.add_constraint(e + LinearExpr::variable(r), Relation::GreaterEqual, target);
  };
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k) {
      auto g = b.gamma(j, k);
      bound(g.re, gamma(j, k).real());
      if (j != k) bound(g.im, gamma(j, k).imag());
    }
  p.set_objective(conic::Sense::Minimize, LinearExpr::variable(r));
  auto res = conic::solve(p, opt);
  if (!res.optimal())
    throw SolverError("membership program ended with status " + conic::to_string(res.status) + ": " +
                      res.message);
  MembershipVerdict v;
  v.status = res.status;
  v.residual = std::max(0.0, res.x(r));
  v.feasible = v.residual <= tol * std::max(1.0, gamma.cwiseAbs().maxCoeff());
  return v;
}

double rounding_epsilon(int n_times, int rank, int d, int order) {
  double base = 1.0 - 6.0 * d * d / (static_cast<double>(order) * order);
  return n_times * (n_times - 1.0) * (std::pow(base, -rank) - 1.0);
}

int rounding_d(const TimeStructure& s) {
  return (s.max_component_spread() + 1) / 2;
}

CMatrix round_to_feasible(const CMatrix& gamma, int order, const TimeStructure& s) {
  const int n = static_cast<int>(gamma.rows());
  const int d = rounding_d(s);
  if (order < 3 * d)
    throw PreconditionError("rounding needs order >= 3d = " + std::to_string(3 * d) + ", got " +
                            std::to_string(order));
  double eps = rounding_epsilon(n, s.rank(), d, order);
  if (!(eps <= 1.0)) {
    std::ostringstream os;
    os << "rounding needs eps_k <= 1, got eps_k = " << eps;
    throw PreconditionError(os.str());
  }
  CMatrix out = gamma + eps * gamma(0, 0).real() * CMatrix::Identity(n, n);
  return out / (1.0 + eps);
}

CMatrix toeplitz_from_atoms(const std::vector<Atom>& atoms, int n, double step) {
  CMatrix g = CMatrix::Zero(n, n);
  for (const auto& a : atoms)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) g(j, k) += a.weight * std::exp(cplx(0, -a.energy * step * (k - j)));
  return g;
}

std::vector<Atom> atomic_decomposition_toeplitz(const CMatrix& gamma, double step, double tol) {
  const int n = static_cast<int>(gamma.rows());
  if (n == 0 || gamma.cols() != n) throw PreconditionError("decomposition needs a square matrix");
  const double scale = std::max(1.0, gamma.cwiseAbs().maxCoeff());
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      if (std::abs(gamma(j, k) - (k >= j ? gamma(0, k - j) : std::conj(gamma(0, j - k)))) > tol * scale)
        throw PreconditionError("matrix is not Hermitian Toeplitz");
  const double period = 2 * kPi / step;
  auto energy_of = [&](cplx z) {
    double e = std::fmod(-std::arg(z) / step, period);
    return e < 0 ? e + period : e;
  };

  CMatrix h = 0.5 * (gamma + gamma.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  double sigma = es.eigenvalues()(0);
  if (sigma < -tol * scale) throw PreconditionError("matrix is not positive semidefinite");
  if (sigma <= tol * scale) sigma = 0.0;

  CMatrix rest = h - sigma * CMatrix::Identity(n, n);
  Eigen::SelfAdjointEigenSolver<CMatrix> er(rest);
  int rank = 0;
  for (int i = 0; i < n; ++i)
    if (er.eigenvalues()(i) > tol * scale) ++rank;

  std::vector<Atom> atoms;
  if (rank > 0) {
    // Roots of the kernel polynomial of the leading (rank+1) block are the atoms.
    Eigen::SelfAdjointEigenSolver<CMatrix> ek(rest.topLeftCorner(rank + 1, rank + 1));
    CVector c = ek.eigenvectors().col(0);
    CMatrix companion = CMatrix::Zero(rank, rank);
    for (int i = 1; i < rank; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < rank; ++i) companion(i, rank - 1) = -c(i) / c(rank);
    Eigen::ComplexEigenSolver<CMatrix> roots(companion);
    std::vector<cplx> z(rank);
    for (int l = 0; l < rank; ++l) z[l] = roots.eigenvalues()(l) / std::abs(roots.eigenvalues()(l));

    // Real weights from the first row: rest(0, k) = sum_l w_l z_l^k.
    RMatrix a(2 * n, rank);
    RVector rhs(2 * n);
    for (int k = 0; k < n; ++k) {
      for (int l = 0; l < rank; ++l) {
        cplx zk = std::pow(z[l], k);
        a(2 * k, l) = zk.real();
        a(2 * k + 1, l) = zk.imag();
      }
      rhs(2 * k) = rest(0, k).real();
      rhs(2 * k + 1) = rest(0, k).imag();
    }
    RVector w = a.colPivHouseholderQr().solve(rhs);
    for (int l = 0; l < rank; ++l) atoms.push_back({energy_of(z[l]), w(l)});
  }
  if (sigma > 0)
    for (int l = 0; l < n; ++l) atoms.push_back({energy_of(std::polar(1.0, 2 * kPi * l / n)), sigma / n});
  return atoms;
}

}  // namespace qextrap
