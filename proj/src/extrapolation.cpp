#include "qextrap/extrapolation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <memory>

#include "qextrap/error.hpp"
#include "qextrap/generators.hpp"

namespace qextrap {

using conic::LinearExpr;
using conic::Relation;
using conic::Sense;

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

SolveStats stats_of(const conic::SolveResult& r) {
  return {r.status, r.iterations, r.seconds, r.primal_residual, r.dual_residual, r.gap, r.message};
}

struct Range {
  double lo = 0.0, hi = 0.0;
};

// Extreme values of the objective over product distributions; every true value lies here.
Range objective_range(const RMatrix& f) {
  Range r;
  for (Eigen::Index x = 0; x < f.rows(); ++x) {
    r.lo += f.row(x).minCoeff();
    r.hi += f.row(x).maxCoeff();
  }
  return r;
}

LinearExpr tau_target(const ModelHandle& h, const RMatrix& f) {
  LinearExpr e;
  for (int x = 0; x < h.scenario.settings; ++x)
    for (int a = 0; a < h.scenario.outcomes; ++a)
      if (f(x, a) != 0.0) e += f(x, a) * h.value(x, a, h.tau_index());
  return e.normalize();
}

// One side of the interval. The looser of the primal and dual values is kept so that
// a solve stopped at reduced accuracy still gives an outer bound.
double one_side(const conic::ConicProgram& base, const LinearExpr& target, Sense sense, Range range,
                const ExtrapolationOptions& opt, const conic::Backend& backend, SolveStats& stats) {
  conic::ConicProgram prog = base;
  prog.set_objective(sense, target);
  const auto r = conic::solve(prog, opt.solver, backend);
  stats = stats_of(r);
  if (!r.optimal()) return std::numeric_limits<double>::quiet_NaN();
  if (sense == Sense::Minimize) return std::clamp(std::min(r.objective, r.dual_objective), range.lo, range.hi);
  return std::clamp(std::max(r.objective, r.dual_objective), range.lo, range.hi);
}

Interval bound(const ModelHandle& h, const RMatrix& f, const ExtrapolationOptions& opt,
               const conic::Backend& backend) {
  Interval iv;
  const auto target = tau_target(h, f);
  const Range range = objective_range(f);
  iv.lower = one_side(h.program, target, Sense::Minimize, range, opt, backend, iv.lower_stats);
  if (iv.lower_stats.status == conic::Status::Infeasible) {
    iv.upper = iv.lower;
    iv.upper_stats = iv.lower_stats;
    return iv;
  }
  iv.upper = one_side(h.program, target, Sense::Maximize, range, opt, backend, iv.upper_stats);
  return iv;
}

ModelHandle fitted_model(const ExtrapolationProblem& p) {
  RelaxationSpec spec = p.relaxation;
  spec.include_tau = true;
  ModelHandle h = build_model(spec, p.scenario);
  add_fit_constraints(h, p.data, kDeltaFloor);
  return h;
}

struct BackendRef {
  std::unique_ptr<conic::Backend> owned;
  const conic::Backend* ptr;
  explicit BackendRef(const conic::Backend* b) : owned(b ? nullptr : conic::make_backend()), ptr(b ? b : owned.get()) {}
  const conic::Backend& operator*() const { return *ptr; }
};

}  // namespace

void check_problem(const ExtrapolationProblem& p) {
  std::vector<std::string> bad;
  if (p.objective.rows() != p.scenario.settings || p.objective.cols() != p.scenario.outcomes)
    bad.push_back("objective shape must be settings x outcomes");
  if (!p.objective.allFinite()) bad.push_back("objective coefficients must be finite");
  if (!std::isfinite(p.scenario.tau)) bad.push_back("tau must be finite");
  if (!bad.empty()) throw ValidationError(bad);
  check_noisy_dataset(p.data);
}

std::optional<double> model_gap_bound(const ModelHandle& h) {
  GapParams g;
  g.m = static_cast<int>(h.grid.size()) - (h.kind == ModelKind::GridHard ? 1 : 0);
  g.e_plus = h.e_plus;
  g.e_bar = h.e_bar;
  g.t_max = max_abs(h.times);
  switch (h.kind) {
    case ModelKind::Finite:
      return 0.0;
    case ModelKind::GridHard:
      g.times = h.times;
      return gap_bounds(GapKind::Sm, g);
    case ModelKind::Average:
      return gap_bounds(GapKind::Am, g);
    case ModelKind::Soft: {
      if (!h.decay_model) return std::nullopt;
      const auto& dm = *h.decay_model;
      if (dm.kind == DecayMatrixModel::Kind::Toeplitz) return 2 * std::sin(g.e_plus * g.t_max / g.m);
      if (dm.kind != DecayMatrixModel::Kind::Moment) return std::nullopt;
      g.k = dm.order;
      g.n = dm.structure.rank();
      g.n_times = dm.structure.size();
      g.d = rounding_d(dm.structure);
      if (g.k < 3 * g.d) return std::nullopt;
      const double eps = rounding_epsilon(g.n_times, g.n, g.d, g.k);
      if (!(eps <= 1.0)) return std::nullopt;
      return gap_bounds(GapKind::SoftKm, g);
    }
  }
  return std::nullopt;
}

Interval solve_interval(const ExtrapolationProblem& p, const ExtrapolationOptions& opt) {
  check_problem(p);
  const BackendRef backend(opt.backend);
  const ModelHandle h = fitted_model(p);
  Interval iv = bound(h, p.objective, opt, *backend);
  iv.gap_bound = model_gap_bound(h);
  iv.delta_floored = (p.data.delta.array() < kDeltaFloor).any();
  return iv;
}

KnightianVerdict knightian_inner_check(const std::vector<Realization>& realizations, const NoisyDataset& nd,
                                       double tau, const std::vector<int>& targets,
                                       const conic::SolverOptions& solver) {
  KnightianVerdict v;
  std::vector<Datapoint> at_tau;
  for (int i = 0; i < static_cast<int>(realizations.size()); ++i) {
    const auto& r = realizations[i];
    if (r.settings() != nd.settings()) continue;
    bool shape = true;
    for (int x = 0; x < r.settings(); ++x) shape = shape && r.outcomes(x) == nd.outcomes();
    if (!shape) continue;
    if (!fit_check(simulate_dataset(r, nd.estimates.times), nd, 1e-8).fits) continue;
    v.fitting.push_back(i);
    at_tau.push_back(simulate_dataset(r, {tau}).points.front());
  }
  const int na = nd.outcomes();
  const int k = static_cast<int>(at_tau.size());
  v.knightian = !targets.empty();
  for (int x : targets) {
    if (x < 0 || x >= nd.settings()) throw PreconditionError("target setting out of range");
    std::vector<bool> cov(na, false);
    for (int a = 0; a < na && k > 0; ++a) {
      // min sum_b |sum_i lambda_i P_i(b|x,tau) - [a == b]| over the simplex
      conic::ConicProgram lp;
      const int lam = lp.add_nonnegative(k);
      const int dev = lp.add_nonnegative(na);
      LinearExpr total;
      for (int i = 0; i < k; ++i) total.add(lam + i, 1.0);
      lp.add_constraint(total, Relation::Equal, 1.0);
      LinearExpr cost;
      for (int b = 0; b < na; ++b) {
        LinearExpr mix;
        for (int i = 0; i < k; ++i) mix.add(lam + i, at_tau[i](x, b));
        mix += -(a == b ? 1.0 : 0.0);
        lp.add_constraint(LinearExpr::variable(dev + b) - mix, Relation::GreaterEqual, 0.0);
        lp.add_constraint(LinearExpr::variable(dev + b) + mix, Relation::GreaterEqual, 0.0);
        cost.add(dev + b, 1.0);
      }
      lp.set_objective(Sense::Minimize, cost);
      const auto r = conic::solve(lp, solver);
      cov[a] = r.optimal() && r.objective <= 1e-6;
    }
    for (bool c : cov) v.knightian = v.knightian && c;
    v.covered.push_back(std::move(cov));
  }
  return v;
}

std::string to_string(CertaintyTag t) {
  switch (t) {
    case CertaintyTag::KnightianCandidate: return "knightian-candidate";
    case CertaintyTag::ApproximateFullCertainty: return "approximate-full-certainty";
    case CertaintyTag::Partial: return "partial";
  }
  return "unknown";
}

CertaintyReport certainty_scan(const ExtrapolationProblem& p, double threshold, const ExtrapolationOptions& opt) {
  if (!(threshold >= 0)) throw PreconditionError("certainty threshold must be nonnegative");
  ExtrapolationProblem q = p;
  q.objective = RMatrix::Zero(p.scenario.settings, p.scenario.outcomes);
  check_problem(q);
  const BackendRef backend(opt.backend);
  const ModelHandle h = fitted_model(q);
  const int nx = p.scenario.settings, na = p.scenario.outcomes;

  std::vector<Interval> flat(nx * na);
#pragma omp parallel for schedule(dynamic) if (opt.solver.threads > 1)
  for (int i = 0; i < nx * na; ++i) {
    RMatrix f = RMatrix::Zero(nx, na);
    f(i / na, i % na) = 1.0;
    flat[i] = bound(h, f, opt, *backend);
  }

  CertaintyReport rep;
  rep.threshold = threshold;
  rep.candidate = RMatrix::Zero(nx, na);
  const auto gb = model_gap_bound(h);
  bool vacuous = true;
  for (int x = 0; x < nx; ++x) {
    rep.intervals.emplace_back();
    for (int a = 0; a < na; ++a) {
      Interval iv = flat[x * na + a];
      if (iv.infeasible()) throw SolverError("no relaxation member fits the data");
      if (!iv.optimal())
        throw SolverError("bound on P(" + std::to_string(a) + "|" + std::to_string(x) + ", tau) failed: " +
                          (iv.lower_stats.status != conic::Status::Optimal ? iv.lower_stats.message
                                                                           : iv.upper_stats.message));
      iv.gap_bound = gb;
      iv.delta_floored = (p.data.delta.array() < kDeltaFloor).any();
      rep.candidate(x, a) = 0.5 * (iv.lower + iv.upper);
      rep.max_width = std::max(rep.max_width, iv.width());
      vacuous = vacuous && iv.lower <= 1e-6 && iv.upper >= 1 - 1e-6;
      rep.intervals.back().push_back(iv);
    }
  }
  if (rep.max_width <= threshold) rep.tag = CertaintyTag::ApproximateFullCertainty;
  else if (vacuous) rep.tag = CertaintyTag::KnightianCandidate;
  else rep.tag = CertaintyTag::Partial;
  return rep;
}

double selftest_delta(const Realization& r, int n, double e_plus) {
  const auto ref = dataset_D(n, e_plus);
  const auto sim = simulate_dataset(r, ref.scenario.times);
  double d = 0.0;
  for (std::size_t j = 0; j < sim.size(); ++j)
    d = std::max(d, (sim.points[j].row(0) - ref.noisy.estimates.points[j].row(0)).cwiseAbs().sum());
  return d;
}

double witness_polynomial(double energy, int n, double e_plus) {
  if (n < 2) throw PreconditionError("witness needs N >= 2");
  const double u = kPi * (n - 1) * energy / e_plus;
  double v = std::sin(u);
  for (int j = 1; j <= n - 2; ++j) v *= std::sin(j * kPi / n - u / n);
  return v;
}

SelfTestReport selftest_diagnostics(const Realization& r, int n, double e_plus, double delta,
                                    const std::vector<double>& energies) {
  if (n < 2) throw PreconditionError("self-test needs N >= 2");
  if (!(e_plus > 0)) throw PreconditionError("E+ must be positive");
  const Realization pure = purify(r);
  const CVector psi = *pure.pure_state(1e-8);
  const Evolution ev(pure);

  SelfTestReport rep;
  for (int k = 1; k < n; ++k) {
    const double t = 2 * kPi * (n - 1) * k / (n * e_plus);
    rep.times.push_back(t);
    const double ov = std::abs(psi.dot(ev.evolved(psi, t)));
    rep.overlaps.push_back(ov);
    rep.epsilon = std::max(rep.epsilon, ov * ov);
  }
  const double dl = std::clamp(delta, 0.0, 1.0);
  rep.overlap_bound = std::sqrt(2 * dl - dl * dl);

  const double spacing = e_plus / (n - 1);
  const double half = std::pow(rep.epsilon, 0.25) * spacing + 1e-9;
  const CVector amp = ev.eigenvectors().adjoint() * psi;
  for (Eigen::Index i = 0; i < amp.size(); ++i) {
    const double e = ev.energies()(i);
    bool inside = false;
    for (int k = 0; k < n && !inside; ++k) inside = std::abs(e - k * spacing) <= half;
    if (inside) rep.window_weight += std::norm(amp(i));
  }
  for (double e : energies) rep.witness.push_back(witness_polynomial(e, n, e_plus));
  return rep;
}

}  // namespace qextrap

namespace qextrap {

namespace {

std::string fmt_tau(double tau) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", tau);
  return buf;
}

}  // namespace

std::vector<TagCheck> check_suite_markers(const NamedSuite& suite, int m, double threshold,
                                          const ExtrapolationOptions& opt) {
  std::vector<TagCheck> out;
  for (const auto& mk : suite.markers) {
    TagCheck tc;
    const std::string at = "@tau=" + fmt_tau(mk.tau) + ",x=" + std::to_string(mk.setting + 1);
    if (mk.behavior == Behavior::Knightian) {
      tc.name = "knightian" + at;
      auto v = knightian_inner_check(suite.realizations, suite.noisy, mk.tau, {mk.setting}, opt.solver);
      tc.pass = v.knightian;
      tc.detail = std::to_string(v.fitting.size()) + " fitting realizations";
      out.push_back(tc);
      continue;
    }
    ExtrapolationProblem p;
    p.data = suite.noisy;
    p.scenario = suite.scenario;
    p.scenario.tau = mk.tau;
    p.relaxation.constraint = suite.constraint;
    p.relaxation.m = m;
    tc.name = (mk.behavior == Behavior::FullCertainty ? "certainty" : "value") + at;
    try {
      const auto rep = certainty_scan(p, threshold, opt);
      bool inside = true;
      const auto& row = rep.intervals.at(mk.setting);
      for (std::size_t a = 0; a < mk.expected.size() && a < row.size(); ++a)
        inside = inside && row[a].lower <= mk.expected[a] + 1e-6 && row[a].upper >= mk.expected[a] - 1e-6;
      tc.pass = inside && (mk.behavior == Behavior::Value || rep.tag == CertaintyTag::ApproximateFullCertainty);
      char buf[96];
      std::snprintf(buf, sizeof buf, "max width %.6g, tag %s", rep.max_width, to_string(rep.tag).c_str());
      tc.detail = buf;
    } catch (const Error& e) {
      tc.pass = false;
      tc.detail = e.what();
    }
    out.push_back(tc);
  }
  if (suite.label.size() > 1 && suite.label[0] == 'D' && !suite.realizations.empty()) {
    const int n = static_cast<int>(suite.scenario.times.size());
    const double e_plus = std::get<HardConstraint>(suite.constraint).e_plus;
    const auto& r = suite.realizations.front();
    const auto rep = selftest_diagnostics(r, n, e_plus, selftest_delta(r, n, e_plus));
    TagCheck tc{"selftest", true, ""};
    for (double ov : rep.overlaps) tc.pass = tc.pass && ov <= rep.overlap_bound + 1e-9;
    tc.pass = tc.pass && rep.window_weight >= 1 - 1e-9;
    char buf[96];
    std::snprintf(buf, sizeof buf, "window weight %.12g", rep.window_weight);
    tc.detail = buf;
    out.push_back(tc);
  }
  return out;
}

}  // namespace qextrap
