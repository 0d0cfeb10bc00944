#include <omp.h>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "qextrap/error.hpp"
#include "qextrap/solver.hpp"

namespace qextrap::conic {

std::string to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    default: return "numerical-failure";
  }
}

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
constexpr double kInf = std::numeric_limits<double>::infinity();

// min c.x  s.t.  A x = b,  x in R^l_+ x S^{n_1}_+ x ...
struct StandardForm {
  int m = 0;
  int nlp = 0;
  SpMat alp;                        // m × nlp
  std::vector<SchurBlock> blocks;
  RVector b;
  RVector clp;
  std::vector<RMatrix> c;           // symmetric block costs
  // Row scaling: internal row i equals original row i divided by row_scale(i).
  RVector row_scale;
  double b_scale = 1.0, c_scale = 1.0;
  // Maps back to the program.
  std::vector<int> var_lp;          // program variable -> lp column (or -1)
  std::vector<int> var_lp_neg;      // free variables: negative part column
  std::vector<int> var_block;       // psd entries: block index
  std::vector<int> var_r, var_c;
  std::vector<int> row_of_constraint;  // -1 when the constraint was dropped
  double sign = 1.0;                // -1 for maximization
  double constant = 0.0;
  bool trivially_infeasible = false;
};

StandardForm to_standard(const ConicProgram& p) {
  StandardForm sf;
  const int nv = p.num_variables();
  sf.var_lp.assign(nv, -1);
  sf.var_lp_neg.assign(nv, -1);
  sf.var_block.assign(nv, -1);
  sf.var_r.assign(nv, -1);
  sf.var_c.assign(nv, -1);
  for (const auto& cone : p.cones()) {
    if (cone.kind == ConeKind::PSD) {
      const int blk = static_cast<int>(sf.blocks.size());
      sf.blocks.push_back({});
      sf.blocks.back().order = cone.size;
      for (int i = 0; i < cone.size; ++i)
        for (int j = i; j < cone.size; ++j) {
          const int v = cone.offset + i * cone.size - i * (i - 1) / 2 + (j - i);
          sf.var_block[v] = blk;
          sf.var_r[v] = i;
          sf.var_c[v] = j;
        }
    } else {
      for (int k = 0; k < cone.size; ++k) {
        sf.var_lp[cone.offset + k] = sf.nlp++;
        if (cone.kind == ConeKind::Free) sf.var_lp_neg[cone.offset + k] = sf.nlp++;
      }
    }
  }
  // Rows, adding slack columns for inequalities.
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> rhs;
  sf.row_of_constraint.assign(p.constraints().size(), -1);
  for (std::size_t k = 0; k < p.constraints().size(); ++k) {
    const auto& con = p.constraints()[k];
    if (con.terms.empty()) {
      const bool ok = con.relation == Relation::Equal ? std::abs(con.rhs) <= 1e-12
                      : con.relation == Relation::LessEqual ? con.rhs >= -1e-12
                                                            : con.rhs <= 1e-12;
      if (!ok) sf.trivially_infeasible = true;
      continue;
    }
    const int row = sf.m++;
    sf.row_of_constraint[k] = row;
    rhs.push_back(con.rhs);
    std::vector<std::vector<BlockEntry>> per_block;
    for (const auto& t : con.terms) {
      const int v = t.var;
      if (sf.var_block[v] >= 0) {
        const int blk = sf.var_block[v];
        auto& sb = sf.blocks[blk];
        if (sb.constraint.empty() || sb.constraint.back() != row) {
          sb.constraint.push_back(row);
          sb.mats.emplace_back();
        }
        const int r = sf.var_r[v], c = sf.var_c[v];
        if (r == c) sb.mats.back().push_back({r, r, t.coef});
        else {
          sb.mats.back().push_back({r, c, 0.5 * t.coef});
          sb.mats.back().push_back({c, r, 0.5 * t.coef});
        }
      } else {
        trip.emplace_back(row, sf.var_lp[v], t.coef);
        if (sf.var_lp_neg[v] >= 0) trip.emplace_back(row, sf.var_lp_neg[v], -t.coef);
      }
    }
    if (con.relation != Relation::Equal)
      trip.emplace_back(row, sf.nlp++, con.relation == Relation::LessEqual ? 1.0 : -1.0);
  }
  sf.alp.resize(sf.m, sf.nlp);
  sf.alp.setFromTriplets(trip.begin(), trip.end());
  sf.b = Eigen::Map<RVector>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  // Objective.
  sf.sign = p.sense() == Sense::Minimize ? 1.0 : -1.0;
  sf.constant = p.objective_constant();
  sf.clp = RVector::Zero(sf.nlp);
  for (const auto& blk : sf.blocks) sf.c.push_back(RMatrix::Zero(blk.order, blk.order));
  for (const auto& t : p.objective()) {
    const double v = sf.sign * t.coef;
    if (sf.var_block[t.var] >= 0) {
      auto& c = sf.c[sf.var_block[t.var]];
      const int r = sf.var_r[t.var], col = sf.var_c[t.var];
      if (r == col) c(r, r) += v;
      else {
        c(r, col) += 0.5 * v;
        c(col, r) += 0.5 * v;
      }
    } else {
      sf.clp(sf.var_lp[t.var]) += v;
      if (sf.var_lp_neg[t.var] >= 0) sf.clp(sf.var_lp_neg[t.var]) -= v;
    }
  }
  return sf;
}

// Row normalization plus overall scaling of b and C.
void scale(StandardForm& sf) {
  sf.row_scale = RVector::Ones(sf.m);
  RVector sq = RVector::Zero(sf.m);
  for (int i = 0; i < sf.m; ++i)
    for (SpMat::InnerIterator it(sf.alp, i); it; ++it) sq(i) += it.value() * it.value();
  for (const auto& blk : sf.blocks)
    for (std::size_t k = 0; k < blk.mats.size(); ++k)
      for (const auto& e : blk.mats[k]) sq(blk.constraint[k]) += e.w * e.w;
  for (int i = 0; i < sf.m; ++i) sf.row_scale(i) = sq(i) > 0 ? std::sqrt(sq(i)) : 1.0;
  for (int i = 0; i < sf.m; ++i)
    for (SpMat::InnerIterator it(sf.alp, i); it; ++it) it.valueRef() /= sf.row_scale(i);
  for (auto& blk : sf.blocks)
    for (std::size_t k = 0; k < blk.mats.size(); ++k)
      for (auto& e : blk.mats[k]) e.w /= sf.row_scale(blk.constraint[k]);
  sf.b = sf.b.cwiseQuotient(sf.row_scale);
  sf.b_scale = std::max(1.0, sf.b.norm());
  double cn = sf.clp.squaredNorm();
  for (const auto& c : sf.c) cn += c.squaredNorm();
  sf.c_scale = std::max(1.0, std::sqrt(cn));
  sf.b /= sf.b_scale;
  sf.clp /= sf.c_scale;
  for (auto& c : sf.c) c /= sf.c_scale;
}

struct Point {
  RVector x, z, y;
  std::vector<RMatrix> X, Z;
};

class Solver {
 public:
  Solver(const StandardForm& sf, const SolverOptions& opt, SchurKernel kernel)
      : sf_(sf), opt_(opt), kernel_(kernel) {
    nu_ = sf.nlp;
    for (const auto& blk : sf.blocks) nu_ += blk.order;
  }

  RVector A(const RVector& x, const std::vector<RMatrix>& X) const {
    RVector out = sf_.alp * x;
    for (std::size_t b = 0; b < sf_.blocks.size(); ++b) {
      const auto& blk = sf_.blocks[b];
      for (std::size_t k = 0; k < blk.mats.size(); ++k) {
        double v = 0.0;
        for (const auto& e : blk.mats[k]) v += e.w * X[b](e.row, e.col);
        out(blk.constraint[k]) += v;
      }
    }
    return out;
  }

  void At(const RVector& y, RVector& x, std::vector<RMatrix>& X) const {
    x = sf_.alp.transpose() * y;
    X.resize(sf_.blocks.size());
    for (std::size_t b = 0; b < sf_.blocks.size(); ++b) {
      const auto& blk = sf_.blocks[b];
      X[b] = RMatrix::Zero(blk.order, blk.order);
      for (std::size_t k = 0; k < blk.mats.size(); ++k) {
        const double yk = y(blk.constraint[k]);
        for (const auto& e : blk.mats[k]) X[b](e.row, e.col) += yk * e.w;
      }
    }
  }

  SolveResult run();

 private:
  const StandardForm& sf_;
  const SolverOptions& opt_;
  SchurKernel kernel_;
  double nu_ = 0;

  static double max_step(const RVector& x, const RVector& dx) {
    double a = kInf;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (dx(i) < 0) a = std::min(a, -x(i) / dx(i));
    return a;
  }
  static double max_step(const RMatrix& X, const RMatrix& dX) {
    Eigen::LLT<RMatrix> llt(X);
    if (llt.info() != Eigen::Success) return 0.0;
    RMatrix s = llt.matrixL().solve(dX);
    s = llt.matrixL().solve(s.transpose()).transpose();
    Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (s + s.transpose()), Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0);
    return lmin < 0 ? -1.0 / lmin : kInf;
  }
};

struct Direction {
  RVector dx, dz, dy;
  std::vector<RMatrix> dX, dZ;
};

SolveResult Solver::run() {
  const int m = sf_.m;
  const int nb = static_cast<int>(sf_.blocks.size());
  Point pt;
  // Initial point following the usual infeasible-start heuristic.
  double max_b = sf_.b.size() ? sf_.b.cwiseAbs().maxCoeff() : 0.0;
  {
    const double xi = std::max(10.0, std::sqrt(std::max(1, sf_.nlp)) * (1.0 + max_b));
    const double eta = std::max(10.0, std::sqrt(std::max(1, sf_.nlp)) * std::max(1.0, sf_.clp.norm()));
    pt.x = RVector::Constant(sf_.nlp, xi);
    pt.z = RVector::Constant(sf_.nlp, eta);
  }
  for (int b = 0; b < nb; ++b) {
    const int n = sf_.blocks[b].order;
    const double xi = std::max(10.0, std::sqrt(n) * (1.0 + max_b));
    const double eta = std::max(10.0, std::sqrt(n) * std::max(1.0, sf_.c[b].norm()));
    pt.X.push_back(xi * RMatrix::Identity(n, n));
    pt.Z.push_back(eta * RMatrix::Identity(n, n));
  }
  pt.y = RVector::Zero(m);

  double bnorm = sf_.b.norm(), cnorm = sf_.clp.norm();
  for (const auto& c : sf_.c) cnorm = std::hypot(cnorm, c.norm());

  SolveResult res;
  auto measure = [&](const Point& p, double& pinf, double& dinf, double& gap, double& pobj, double& dobj,
                     RVector& rp, RVector& rd, std::vector<RMatrix>& Rd) {
    rp = sf_.b - A(p.x, p.X);
    RVector aty;
    std::vector<RMatrix> atY;
    At(p.y, aty, atY);
    rd = sf_.clp - aty - p.z;
    Rd.resize(nb);
    double rdn = rd.squaredNorm();
    pobj = sf_.clp.dot(p.x);
    for (int b = 0; b < nb; ++b) {
      Rd[b] = sf_.c[b] - atY[b] - p.Z[b];
      rdn += Rd[b].squaredNorm();
      pobj += sf_.c[b].cwiseProduct(p.X[b]).sum();
    }
    dobj = sf_.b.dot(p.y);
    pinf = rp.norm() / (1.0 + bnorm);
    dinf = std::sqrt(rdn) / (1.0 + cnorm);
    gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
  };

  double best_merit = kInf;
  int since_best = 0;
  double mu0 = -1.0, pinf0 = 0.0, dinf0 = 0.0;
  Point best = pt;
  double best_p = kInf, best_d = kInf, best_g = kInf;
  Status status = Status::NumericalFailure;
  std::string message = "iteration limit reached";
  int iter = 0;
  RMatrix M(m, m);
  for (iter = 0; iter <= opt_.max_iterations; ++iter) {
    double pinf, dinf, gap, pobj, dobj;
    RVector rp, rd;
    std::vector<RMatrix> Rd;
    measure(pt, pinf, dinf, gap, pobj, dobj, rp, rd, Rd);
    const double merit = std::max({pinf / opt_.tol_primal, dinf / opt_.tol_dual, gap / opt_.tol_gap});
    ++since_best;
    if (merit < best_merit) {
      if (merit < 0.9 * best_merit) since_best = 0;
      best_merit = merit;
      best = pt;
      best_p = pinf;
      best_d = dinf;
      best_g = gap;
    }
    if (opt_.verbose)
      std::fprintf(stderr, "ipm %3d pobj %+.8e dobj %+.8e pinf %.2e dinf %.2e gap %.2e\n", iter, pobj, dobj,
                   pinf, dinf, gap);
    if (pinf <= opt_.tol_primal && dinf <= opt_.tol_dual && gap <= opt_.tol_gap) {
      status = Status::Optimal;
      message = "converged";
      break;
    }
    // Infeasibility certificates.
    {
      RVector aty;
      std::vector<RMatrix> atY;
      At(pt.y, aty, atY);
      double ray = (aty + pt.z).squaredNorm();
      for (int b = 0; b < nb; ++b) ray += (atY[b] + pt.Z[b]).squaredNorm();
      if (dobj > 0 && std::sqrt(ray) / dobj < 1e-8 && dobj > 1e6) {
        status = Status::Infeasible;
        message = "dual improving ray found";
        break;
      }
      const double ax = A(pt.x, pt.X).norm();
      if (pobj < 0 && ax / -pobj < 1e-8 && -pobj > 1e6) {
        status = Status::Unbounded;
        message = "primal improving ray found";
        break;
      }
    }
    if (iter == opt_.max_iterations) break;
    if (since_best >= 10) {
      message = "no progress";
      break;
    }

    double mu = pt.x.dot(pt.z);
    for (int b = 0; b < nb; ++b) mu += pt.X[b].cwiseProduct(pt.Z[b]).sum();
    mu /= nu_;
    if (mu0 < 0) {
      mu0 = mu;
      pinf0 = std::max(pinf, 1e-300);
      dinf0 = std::max(dinf, 1e-300);
    }

    // Schur complement.
    std::vector<RMatrix> Zinv(nb);
    bool ok = true;
    for (int b = 0; b < nb; ++b) {
      Eigen::LLT<RMatrix> llt(pt.Z[b]);
      if (llt.info() != Eigen::Success) { ok = false; break; }
      Zinv[b] = llt.solve(RMatrix::Identity(pt.Z[b].rows(), pt.Z[b].cols()));
      Zinv[b] = 0.5 * (Zinv[b] + Zinv[b].transpose());
    }
    if (!ok) { message = "dual iterate lost definiteness"; break; }
    const RVector dlp = pt.x.cwiseQuotient(pt.z);
    {
      SpMat scaled = sf_.alp * dlp.cwiseSqrt().asDiagonal();
      M = RMatrix(scaled * scaled.transpose());
      M.triangularView<Eigen::StrictlyLower>().setZero();
    }
    for (int b = 0; b < nb; ++b) {
      if (kernel_ == SchurKernel::Parallel) schur_accumulate_parallel(sf_.blocks[b], pt.X[b], Zinv[b], M);
      else schur_accumulate_reference(sf_.blocks[b], pt.X[b], Zinv[b], M);
    }
    // Factor the Jacobi-scaled Schur matrix; a small ridge absorbs dependent rows.
    RVector jac = M.diagonal().cwiseAbs().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    Eigen::LLT<RMatrix> chol;
    {
      RMatrix Ms = M.selfadjointView<Eigen::Upper>();
      Ms = jac.asDiagonal() * Ms * jac.asDiagonal();
      double reg = 0.0;
      for (int attempt = 0; attempt < 9; ++attempt) {
        RMatrix Mr = Ms;
        Mr.diagonal().array() += reg;
        chol.compute(Mr);
        if (chol.info() == Eigen::Success) break;
        reg = reg == 0.0 ? 1e-14 : reg * 100.0;
      }
      if (chol.info() != Eigen::Success) { message = "Schur complement factorization failed"; break; }
      if (opt_.verbose && reg > 0) std::fprintf(stderr, "    schur ridge %.1e\n", reg);
    }
    auto schur_solve = [&](const RVector& r) {
      RVector dy = jac.cwiseProduct(chol.solve(jac.cwiseProduct(r)));
      // One step of iterative refinement against the unregularized matrix.
      RVector res = r - M.selfadjointView<Eigen::Upper>() * dy;
      dy += jac.cwiseProduct(chol.solve(jac.cwiseProduct(res)));
      return dy;
    };

    auto solve_dir = [&](const RVector& klp, const std::vector<RMatrix>& K) {
      Direction d;
      d.dy = schur_solve(rp - A(klp, K));
      RVector aty;
      std::vector<RMatrix> atY;
      At(d.dy, aty, atY);
      d.dz = rd - aty;
      d.dx = klp + dlp.cwiseProduct(aty);
      d.dX.resize(nb);
      d.dZ.resize(nb);
      for (int b = 0; b < nb; ++b) {
        RMatrix t = pt.X[b] * atY[b] * Zinv[b];
        d.dX[b] = K[b] + 0.5 * (t + t.transpose());
        d.dZ[b] = Rd[b] - atY[b];
      }
      return d;
    };
    auto steps = [&](const Direction& d, double& ap, double& ad) {
      ap = max_step(pt.x, d.dx);
      ad = max_step(pt.z, d.dz);
      for (int b = 0; b < nb; ++b) {
        ap = std::min(ap, max_step(pt.X[b], d.dX[b]));
        ad = std::min(ad, max_step(pt.Z[b], d.dZ[b]));
      }
    };

    // Predictor.
    std::vector<RMatrix> XRdZ(nb);
    for (int b = 0; b < nb; ++b) {
      RMatrix t = pt.X[b] * Rd[b] * Zinv[b];
      XRdZ[b] = 0.5 * (t + t.transpose());
    }
    RVector klp = -pt.x - dlp.cwiseProduct(rd);
    std::vector<RMatrix> K(nb);
    for (int b = 0; b < nb; ++b) K[b] = -pt.X[b] - XRdZ[b];
    Direction aff = solve_dir(klp, K);
    double ap, ad;
    steps(aff, ap, ad);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double mu_aff = (pt.x + ap * aff.dx).dot(pt.z + ad * aff.dz);
    for (int b = 0; b < nb; ++b)
      mu_aff += (pt.X[b] + ap * aff.dX[b]).cwiseProduct(pt.Z[b] + ad * aff.dZ[b]).sum();
    mu_aff /= nu_;
    const double ratio = std::clamp(mu_aff / mu, 0.0, 1.0);
    const double expon = std::min(ap, ad) > 0.3 ? 3.0 : 2.0;
    double sigma = std::clamp(std::pow(ratio, expon), 0.0, 1.0);
    if (pinf > 1e-3 * (1 + mu)) sigma = std::max(sigma, 0.05);
    // Keep complementarity from outrunning the residuals; the Schur matrix
    // becomes too ill-conditioned to reduce them otherwise.
    const double mu_floor = 1e-3 * mu0 * std::max(pinf / pinf0, dinf / dinf0);
    if (sigma * mu < mu_floor) sigma = std::min(1.0, mu_floor / mu);

    // Corrector.
    klp = sigma * mu * pt.z.cwiseInverse() - pt.x - dlp.cwiseProduct(rd) -
          aff.dx.cwiseProduct(aff.dz).cwiseQuotient(pt.z);
    for (int b = 0; b < nb; ++b) {
      RMatrix t = aff.dX[b] * aff.dZ[b] * Zinv[b];
      K[b] = sigma * mu * Zinv[b] - pt.X[b] - XRdZ[b] - 0.5 * (t + t.transpose());
    }
    Direction dir = solve_dir(klp, K);
    steps(dir, ap, ad);
    const double gamma = 0.9 + 0.09 * std::min({1.0, ap, ad});
    ap = std::min(1.0, gamma * ap);
    ad = std::min(1.0, gamma * ad);
    if (opt_.verbose)
      std::fprintf(stderr, "    mu %.2e sigma %.2e ap %.2e ad %.2e\n", mu, sigma, ap, ad);
    if (ap < 1e-10 && ad < 1e-10) { message = "step length collapsed"; break; }
    pt.x += ap * dir.dx;
    pt.z += ad * dir.dz;
    pt.y += ad * dir.dy;
    for (int b = 0; b < nb; ++b) {
      pt.X[b] += ap * dir.dX[b];
      pt.X[b] = 0.5 * (pt.X[b] + pt.X[b].transpose());
      pt.Z[b] += ad * dir.dZ[b];
      pt.Z[b] = 0.5 * (pt.Z[b] + pt.Z[b].transpose());
    }
  }

  // A stalled run that got within a small factor of every tolerance counts as solved.
  if (status == Status::NumericalFailure &&
      (best_merit <= 10.0 || (best_p <= 1e3 * opt_.tol_primal && best_d <= 1e3 * opt_.tol_dual &&
                              best_g <= 1e4 * opt_.tol_gap))) {
    status = Status::Optimal;
    message = "converged to reduced accuracy (" + message + ")";
  }
  const bool use_best =
      status == Status::NumericalFailure || (status == Status::Optimal && message != "converged");
  const Point& fin = use_best ? best : pt;
  if (use_best) {
    res.primal_residual = best_p;
    res.dual_residual = best_d;
    res.gap = best_g;
  } else {
    double pinf, dinf, gap, pobj, dobj;
    RVector rp, rd;
    std::vector<RMatrix> Rd;
    measure(fin, pinf, dinf, gap, pobj, dobj, rp, rd, Rd);
    res.primal_residual = pinf;
    res.dual_residual = dinf;
    res.gap = gap;
  }
  res.status = status;
  res.message = message;
  res.iterations = iter;

  // Undo scaling: X_orig = b_scale X, y_orig = c_scale y / row_scale.
  double pobj = sf_.clp.dot(fin.x);
  for (int b = 0; b < nb; ++b) pobj += sf_.c[b].cwiseProduct(fin.X[b]).sum();
  const double dobj = sf_.b.dot(fin.y);
  const double s = sf_.b_scale * sf_.c_scale;
  res.objective = sf_.sign * s * pobj + sf_.constant;
  res.dual_objective = sf_.sign * s * dobj + sf_.constant;
  // The program's variables.
  const int nv = static_cast<int>(sf_.var_lp.size());
  res.x = RVector::Zero(nv);
  for (int v = 0; v < nv; ++v) {
    if (sf_.var_block[v] >= 0) res.x(v) = sf_.b_scale * fin.X[sf_.var_block[v]](sf_.var_r[v], sf_.var_c[v]);
    else {
      res.x(v) = sf_.b_scale * fin.x(sf_.var_lp[v]);
      if (sf_.var_lp_neg[v] >= 0) res.x(v) -= sf_.b_scale * fin.x(sf_.var_lp_neg[v]);
    }
  }
  res.duals = RVector::Zero(static_cast<Eigen::Index>(sf_.row_of_constraint.size()));
  for (std::size_t k = 0; k < sf_.row_of_constraint.size(); ++k)
    if (int r = sf_.row_of_constraint[k]; r >= 0)
      res.duals(k) = sf_.sign * sf_.c_scale * fin.y(r) / sf_.row_scale(r);
  return res;
}

}  // namespace

std::string InteriorPointBackend::name() const {
  return kernel_ == SchurKernel::Parallel ? "ipm" : "ipm-serial";
}

SolveResult InteriorPointBackend::solve(const ConicProgram& p, const SolverOptions& opt) const {
  const auto start = std::chrono::steady_clock::now();
  StandardForm sf = to_standard(p);
  SolveResult res;
  if (sf.trivially_infeasible) {
    res.status = Status::Infeasible;
    res.message = "constraint without variables is violated";
    res.x = RVector::Zero(p.num_variables());
    res.duals = RVector::Zero(static_cast<Eigen::Index>(p.constraints().size()));
    return res;
  }
  scale(sf);
  const int saved = omp_get_max_threads();
  if (opt.threads > 0) omp_set_num_threads(opt.threads);
  try {
    res = Solver(sf, opt, kernel_).run();
  } catch (const std::exception& e) {
    res.status = Status::NumericalFailure;
    res.message = e.what();
    res.x = RVector::Zero(p.num_variables());
  }
  if (opt.threads > 0) omp_set_num_threads(saved);
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

std::vector<std::string> backend_names() { return {"ipm", "ipm-serial"}; }

std::unique_ptr<Backend> make_backend(std::string_view name) {
  std::string n(name);
  if (n.empty()) {
    if (const char* env = std::getenv("QEXTRAP_BACKEND")) n = env;
  }
  if (n.empty() || n == "ipm") return std::make_unique<InteriorPointBackend>(SchurKernel::Parallel);
  if (n == "ipm-serial") return std::make_unique<InteriorPointBackend>(SchurKernel::SerialReference);
  throw PreconditionError("unknown solver backend '" + n + "'");
}

SolveResult solve(const ConicProgram& p, const SolverOptions& opt) { return make_backend()->solve(p, opt); }

SolveResult solve(const ConicProgram& p, const SolverOptions& opt, const Backend& backend) {
  return backend.solve(p, opt);
}

}  // namespace qextrap::conic
