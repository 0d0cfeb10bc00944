#include "qextrap/relaxations.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "qextrap/error.hpp"

namespace qextrap {

using conic::HermitianVar;
using conic::LinearExpr;
using conic::Relation;

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Finite: return "finite";
    case ModelKind::GridHard: return "S_m";
    case ModelKind::Average: return "A_m";
    case ModelKind::Soft: return "soft";
  }
  return "?";
}

LinearExpr ModelHandle::grid_value(int x, int a, int j) const {
  return tilde.at(x).at(a).quadratic(probes.at(j));
}

RVector ModelHandle::weight_values(const RVector& sol) const {
  const int n = low_dim() + (has_high ? 1 : 0);
  return sol.segment(weights, n);
}

namespace {

double max_abs_time(const std::vector<double>& ts) {
  double t = 0.0;
  for (double v : ts) t = std::max(t, std::abs(v));
  return t;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void check_scenario(const Scenario& s) {
  std::vector<std::string> bad;
  if (s.settings < 1) bad.push_back("scenario needs at least one setting");
  if (s.outcomes < 2) bad.push_back("scenario needs at least two outcomes");
  for (double t : s.times)
    if (!std::isfinite(t)) bad.push_back("non-finite time");
  if (!std::isfinite(s.tau)) bad.push_back("non-finite tau");
  if (!bad.empty()) throw ValidationError(bad);
}

ModelHandle start(ModelKind kind, const Scenario& s, bool include_tau) {
  check_scenario(s);
  ModelHandle h;
  h.kind = kind;
  h.scenario = s;
  h.times = s.times;
  h.has_tau = include_tau;
  if (include_tau) h.times.push_back(s.tau);
  if (h.times.empty()) throw PreconditionError("model needs at least one time");
  return h;
}

// Adds the weights, the M~ blocks and the normalization sum_a M~_{a|x} = diag(p) (+) gamma.
void add_blocks(ModelHandle& h, const std::optional<DecayMatrixModel>& decay) {
  auto& p = h.program;
  const int low = h.low_dim();
  const int nt = h.num_times();
  const int high = h.has_high ? nt : 0;
  const int dim = low + high;
  h.weights = p.add_nonnegative(low + (h.has_high ? 1 : 0));
  auto weight = [&](int l) { return LinearExpr::variable(h.weights + l); };

  h.tilde.assign(h.scenario.settings, {});
  for (auto& row : h.tilde)
    for (int a = 0; a < h.scenario.outcomes; ++a) row.push_back(conic::add_hermitian(p, dim));

  auto block_sum = [&](int x, int r, int c, bool imag) {
    LinearExpr e;
    for (const auto& m : h.tilde[x]) e += imag ? m.im(r, c) : m.re(r, c);
    return e;
  };

  // gamma either lives in a separate decay block or is the high block of setting 0.
  const bool inline_gamma = h.has_high && (!decay || decay->kind == DecayMatrixModel::Kind::EqualDiag);
  if (h.has_high) h.decay_model = decay.value_or(DecayMatrixModel::equal_diag());
  if (h.has_high && !inline_gamma) h.decay = decay_constraints(p, *decay, nt);
  auto gamma = [&](int j, int k, bool imag) {
    if (inline_gamma) return block_sum(0, low + j, low + k, imag);
    auto g = h.decay->gamma(j, k);
    return imag ? g.im : g.re;
  };

  LinearExpr total;
  for (int l = 0; l < low + (h.has_high ? 1 : 0); ++l) total += weight(l);
  p.add_constraint(total, Relation::Equal, 1.0);

  if (h.has_high) {
    const int diag_rows = inline_gamma ? nt : 1;
    for (int j = 0; j < diag_rows; ++j)
      p.add_constraint(gamma(j, j, false) - weight(low), Relation::Equal);
  }

  for (int x = 0; x < h.scenario.settings; ++x)
    for (int r = 0; r < dim; ++r)
      for (int c = r; c < dim; ++c) {
        const bool r_high = r >= low, c_high = c >= low;
        if (r_high && c_high) {
          if (inline_gamma && x == 0) continue;
          p.add_constraint(block_sum(x, r, c, false) - gamma(r - low, c - low, false), Relation::Equal);
          if (r != c) p.add_constraint(block_sum(x, r, c, true) - gamma(r - low, c - low, true), Relation::Equal);
        } else if (r == c) {
          p.add_constraint(block_sum(x, r, r, false) - weight(r), Relation::Equal);
        } else {
          p.add_constraint(block_sum(x, r, c, false), Relation::Equal);
          p.add_constraint(block_sum(x, r, c, true), Relation::Equal);
        }
      }
}

void add_probes(ModelHandle& h) {
  const int low = h.low_dim();
  const int dim = low + (h.has_high ? h.num_times() : 0);
  for (int j = 0; j < h.num_times(); ++j) {
    CVector v = CVector::Zero(dim);
    for (int l = 0; l < low; ++l) v(l) = std::exp(cplx(0, -h.grid[l] * h.times[j]));
    if (h.has_high) v(low + j) = 1.0;
    h.probes.push_back(v);
  }
}

// Dataset variables tied to the grid model by sum_a |P - P~| <= slack_j.
void add_data(ModelHandle& h) {
  auto& p = h.program;
  const int nx = h.scenario.settings, na = h.scenario.outcomes;
  h.data.assign(h.num_times(), std::vector<std::vector<LinearExpr>>(nx));
  for (int j = 0; j < h.num_times(); ++j)
    for (int x = 0; x < nx; ++x) {
      if (h.slack.empty() || h.slack[j] <= 0.0) {
        for (int a = 0; a < na; ++a) h.data[j][x].push_back(h.grid_value(x, a, j).normalize());
        continue;
      }
      const int pv = p.add_nonnegative(na);
      const int uv = p.add_nonnegative(na);
      LinearExpr total, budget;
      for (int a = 0; a < na; ++a) {
        auto pa = LinearExpr::variable(pv + a), ua = LinearExpr::variable(uv + a);
        auto diff = pa - h.grid_value(x, a, j);
        p.add_constraint(ua - diff, Relation::GreaterEqual);
        p.add_constraint(ua + diff, Relation::GreaterEqual);
        total += pa;
        budget += ua;
        h.data[j][x].push_back(pa);
      }
      p.add_constraint(total, Relation::Equal, 1.0);
      p.add_constraint(budget, Relation::LessEqual, h.slack[j]);
    }
}

std::vector<double> uniform_grid(double e_plus, int m, int count) {
  std::vector<double> g;
  for (int j = 0; j < count; ++j) g.push_back(j * e_plus / m);
  return g;
}

}  // namespace

ModelHandle model_S_finite(const std::vector<double>& energies, const Scenario& s, bool include_tau) {
  if (energies.empty()) throw PreconditionError("finite spectrum is empty");
  ModelHandle h = start(ModelKind::Finite, s, include_tau);
  h.grid = energies;
  add_blocks(h, std::nullopt);
  add_probes(h);
  add_data(h);
  return h;
}

ModelHandle model_S_m(double e_plus, int m, const Scenario& s, bool include_tau) {
  if (!(e_plus > 0) || m < 1) throw PreconditionError("S_m needs E+ > 0 and m >= 1");
  ModelHandle h = start(ModelKind::GridHard, s, include_tau);
  const double bound = e_plus * max_abs_time(h.times) / kPi;
  if (m < bound)
    throw PreconditionError("S_m needs m >= E+ max|t| / pi = " + fmt(bound) + ", got m = " + std::to_string(m));
  h.e_plus = e_plus;
  h.grid = uniform_grid(e_plus, m, m + 1);
  for (double t : h.times) h.slack.push_back(2 * std::sin(e_plus * std::abs(t) / (2.0 * m)));
  add_blocks(h, std::nullopt);
  add_probes(h);
  add_data(h);
  return h;
}

double default_average_cutoff(double e_bar, double t_max, int m) {
  if (!(t_max > 0)) throw PreconditionError("default A_m cutoff needs a nonzero time");
  return std::cbrt(e_bar / (4 * t_max * t_max)) * std::pow(static_cast<double>(m), 2.0 / 3.0);
}

namespace {

void check_floor_bound(double e_plus, int m, const std::vector<double>& times, const char* what) {
  const double bound = kPi * e_plus * max_abs_time(times);
  if (!(m > bound))
    throw PreconditionError(std::string(what) + " needs m > pi E+ max|t| = " + fmt(bound) + ", got m = " +
                            std::to_string(m));
}

}  // namespace

ModelHandle model_A_m(double e_bar, int m, const Scenario& s, double e_plus, bool include_tau) {
  if (!(e_bar >= 0) || m < 1) throw PreconditionError("A_m needs E_bar >= 0 and m >= 1");
  ModelHandle h = start(ModelKind::Average, s, include_tau);
  if (e_plus <= 0) e_plus = default_average_cutoff(e_bar, max_abs_time(h.times), m);
  check_floor_bound(e_plus, m, h.times, "A_m");
  h.e_plus = e_plus;
  h.e_bar = e_bar;
  h.has_high = true;
  h.grid = uniform_grid(e_plus, m, m);
  for (double t : h.times) h.slack.push_back(2 * std::sin(e_plus * std::abs(t) / m));
  add_blocks(h, std::nullopt);
  LinearExpr mean;
  for (int j = 0; j <= m; ++j) mean.add(h.weights + j, j * e_plus / m);
  h.program.add_constraint(mean, Relation::LessEqual, e_bar);
  add_probes(h);
  add_data(h);
  return h;
}

ModelHandle model_soft(double e_plus, double epsilon, int m, const std::optional<DecayMatrixModel>& decay,
                       const Scenario& s, bool include_tau) {
  if (!(e_plus > 0) || m < 1) throw PreconditionError("soft model needs E+ > 0 and m >= 1");
  if (!(epsilon >= 0 && epsilon <= 1)) throw PreconditionError("soft model needs epsilon in [0, 1]");
  ModelHandle h = start(ModelKind::Soft, s, include_tau);
  check_floor_bound(e_plus, m, h.times, "soft model");
  if (decay && decay->kind != DecayMatrixModel::Kind::EqualDiag) {
    if (decay->structure.size() != h.num_times())
      throw PreconditionError("time structure has " + std::to_string(decay->structure.size()) +
                              " rows but the model has " + std::to_string(h.num_times()) +
                              " times; tau must be representable (extend the generators)");
    decay->structure.check(h.times);
  }
  h.e_plus = e_plus;
  h.epsilon = epsilon;
  h.has_high = true;
  h.grid = uniform_grid(e_plus, m, m);
  for (double t : h.times) h.slack.push_back(2 * std::sin(e_plus * std::abs(t) / m));
  add_blocks(h, decay);
  h.program.add_constraint(LinearExpr::variable(h.weights + m), Relation::LessEqual, epsilon);
  add_probes(h);
  add_data(h);
  return h;
}

ModelHandle build_model(const RelaxationSpec& spec, const Scenario& s) {
  return std::visit(
      [&](const auto& c) -> ModelHandle {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, HardConstraint>) {
          if (!spec.energies.empty()) {
            for (double e : spec.energies)
              if (e < 0 || e > c.e_plus) throw PreconditionError("finite spectrum outside [0, E+]");
            return model_S_finite(spec.energies, s, spec.include_tau);
          }
          return model_S_m(c.e_plus, spec.m, s, spec.include_tau);
        } else if constexpr (std::is_same_v<T, AverageConstraint>) {
          return model_A_m(c.e_bar, spec.m, s, spec.e_plus.value_or(0.0), spec.include_tau);
        } else {
          return model_soft(c.e_plus, c.epsilon, spec.m, spec.decay, s, spec.include_tau);
        }
      },
      spec.constraint);
}

void add_fit_constraints(ModelHandle& h, const NoisyDataset& nd, double delta_floor) {
  check_noisy_dataset(nd);
  const int n = static_cast<int>(h.scenario.times.size());
  std::vector<std::string> bad;
  if (static_cast<int>(nd.estimates.size()) != n) bad.push_back("dataset and scenario differ in the number of times");
  if (nd.settings() != h.scenario.settings) bad.push_back("dataset and scenario differ in settings");
  if (nd.outcomes() != h.scenario.outcomes) bad.push_back("dataset and scenario differ in outcomes");
  for (int j = 0; bad.empty() && j < n; ++j)
    if (std::abs(nd.estimates.times[j] - h.scenario.times[j]) > 1e-9)
      bad.push_back("dataset time " + std::to_string(j) + " differs from the scenario");
  if (!bad.empty()) throw ValidationError(bad);

  auto& p = h.program;
  const int na = h.scenario.outcomes;
  for (int j = 0; j < n; ++j)
    for (int x = 0; x < h.scenario.settings; ++x) {
      const double bound = std::max(nd.delta(x, j), delta_floor);
      const int v = p.add_nonnegative(na);
      LinearExpr budget;
      for (int a = 0; a < na; ++a) {
        auto diff = h.value(x, a, j) - LinearExpr(nd.estimates.points[j](x, a));
        auto va = LinearExpr::variable(v + a);
        p.add_constraint(va - diff, Relation::GreaterEqual);
        p.add_constraint(va + diff, Relation::GreaterEqual);
        budget += va;
      }
      p.add_constraint(budget, Relation::LessEqual, bound);
    }
}

Dataset model_dataset(const ModelHandle& h, const RVector& sol) {
  Dataset d;
  d.times = h.times;
  for (int j = 0; j < h.num_times(); ++j) {
    Datapoint pt(h.scenario.settings, h.scenario.outcomes);
    for (int x = 0; x < h.scenario.settings; ++x)
      for (int a = 0; a < h.scenario.outcomes; ++a) pt(x, a) = h.value(x, a, j).evaluate(sol);
    d.points.push_back(pt);
  }
  return d;
}

Dataset grid_dataset(const ModelHandle& h, const RVector& sol) {
  Dataset d;
  d.times = h.times;
  for (int j = 0; j < h.num_times(); ++j) {
    Datapoint pt(h.scenario.settings, h.scenario.outcomes);
    for (int x = 0; x < h.scenario.settings; ++x)
      for (int a = 0; a < h.scenario.outcomes; ++a) pt(x, a) = h.grid_value(x, a, j).evaluate(sol);
    d.points.push_back(pt);
  }
  return d;
}

namespace {

CMatrix psd_part(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()));
  RVector ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

// Pulls M~ back through `t` (M = t^dag M~ t), moves the missing mass into outcome 0
// and renormalizes so every setting sums to the identity exactly.
std::vector<std::vector<CMatrix>> complete_povms(const ModelHandle& h, const RVector& sol, const CMatrix& t) {
  const int d = static_cast<int>(t.cols());
  std::vector<std::vector<CMatrix>> out;
  for (const auto& row : h.tilde) {
    std::vector<CMatrix> ms;
    CMatrix sum = CMatrix::Zero(d, d);
    for (const auto& v : row) {
      ms.push_back(psd_part(t.adjoint() * v.value(sol) * t));
      sum += ms.back();
    }
    ms[0] += psd_part(CMatrix::Identity(d, d) - sum);
    sum.setZero();
    for (const auto& m : ms) sum += m;
    CMatrix fix = hermitian_pinv_sqrt(sum, 1e-12);
    for (auto& m : ms) {
      m = fix * m * fix;
      m = 0.5 * (m + m.adjoint()).eval();
    }
    out.push_back(std::move(ms));
  }
  return out;
}

CMatrix inv_sqrt_weights(const RVector& p, int n) {
  CMatrix t = CMatrix::Zero(n, n);
  for (int l = 0; l < n; ++l)
    if (p(l) > 1e-12) t(l, l) = 1.0 / std::sqrt(p(l));
  return t;
}

}  // namespace

Realization extract_realization_finite(const ModelHandle& h, const RVector& sol) {
  if (h.has_high) throw PreconditionError("finite extraction needs a model without a high-energy block");
  const int n = h.low_dim();
  RVector p = h.weight_values(sol).cwiseMax(0.0);
  p /= p.sum();
  CVector psi(n);
  CMatrix ham = CMatrix::Zero(n, n);
  for (int l = 0; l < n; ++l) {
    psi(l) = std::sqrt(p(l));
    ham(l, l) = h.grid[l];
  }
  return Realization::pure(psi, ham, complete_povms(h, sol, inv_sqrt_weights(p, n)));
}

Realization extract_realization_average(const ModelHandle& h, const RVector& sol) {
  if (h.kind != ModelKind::Average) throw PreconditionError("average extraction needs an A_m model");
  const int low = h.low_dim(), nt = h.num_times();
  RVector w = h.weight_values(sol).cwiseMax(0.0);
  w /= w.sum();
  const double rest = 1.0 - w(low);
  CVector psi = CVector::Zero(low);
  if (rest > 1e-12) {
    for (int l = 0; l < low; ++l) psi(l) = std::sqrt(w(l) / rest);
  } else {
    psi(0) = 1.0;
  }
  psi.normalize();
  CMatrix ham = CMatrix::Zero(low, low);
  for (int l = 0; l < low; ++l) ham(l, l) = h.grid[l];
  // Only the low block carries the state; the high block of each M~ is dropped.
  CMatrix t = CMatrix::Zero(low + nt, low);
  t.topRows(low) = inv_sqrt_weights(w, low);
  return Realization::pure(psi, ham, complete_povms(h, sol, t));
}

Realization extract_realization_soft(const ModelHandle& h, const RVector& sol) {
  if (h.kind != ModelKind::Soft) throw PreconditionError("soft extraction needs a soft model");
  const int low = h.low_dim(), nt = h.num_times();
  RVector w = h.weight_values(sol).cwiseMax(0.0);
  w /= w.sum();

  std::vector<Atom> atoms;
  if (w(low) > 1e-12) {
    if (!h.decay || h.decay_model->structure.rank() != 1)
      throw PreconditionError("soft extraction needs lattice times with a toeplitz or one-generator moment model");
    const double step = h.decay_model->structure.generators[0];
    const double period = 2 * kPi / step;
    CMatrix base = h.decay->base.value(sol);
    base = 0.5 * (base + base.adjoint()).eval();
    // Project onto Hermitian Toeplitz matrices before decomposing.
    const int n = static_cast<int>(base.rows());
    CMatrix toe(n, n);
    for (int d = 0; d < n; ++d) {
      cplx avg = 0;
      for (int r = 0; r + d < n; ++r) avg += base(r, r + d);
      avg /= static_cast<double>(n - d);
      for (int r = 0; r + d < n; ++r) {
        toe(r, r + d) = avg;
        toe(r + d, r) = std::conj(avg);
      }
    }
    for (int r = 0; r < n; ++r) toe(r, r) = toe(r, r).real();
    const double lo = std::min(0.0, min_eigenvalue(toe));
    toe -= lo * CMatrix::Identity(n, n);
    for (auto a : atomic_decomposition_toeplitz(toe, step, 1e-6)) {
      if (a.weight <= 1e-14) continue;
      // Only phases at lattice times matter, so energies may move by whole periods.
      if (a.energy < h.e_plus) a.energy += std::ceil((h.e_plus - a.energy) / period) * period;
      atoms.push_back(a);
    }
  }

  const int na = static_cast<int>(atoms.size());
  const int dim = low + na;
  CVector psi = CVector::Zero(dim);
  CMatrix ham = CMatrix::Zero(dim, dim);
  for (int l = 0; l < low; ++l) {
    psi(l) = std::sqrt(w(l));
    ham(l, l) = h.grid[l];
  }
  CMatrix lambda(na, nt);
  for (int l = 0; l < na; ++l) {
    psi(low + l) = std::sqrt(atoms[l].weight);
    ham(low + l, low + l) = atoms[l].energy;
    for (int j = 0; j < nt; ++j)
      lambda(l, j) = std::sqrt(atoms[l].weight) * std::exp(cplx(0, -atoms[l].energy * h.times[j]));
  }
  psi.normalize();
  CMatrix t = CMatrix::Zero(low + nt, dim);
  t.topLeftCorner(low, low) = inv_sqrt_weights(w, low);
  if (na > 0) t.bottomRightCorner(nt, na) = lambda.completeOrthogonalDecomposition().pseudoInverse();
  return Realization::pure(psi, ham, complete_povms(h, sol, t));
}

GapKind parse_gap_kind(const std::string& name) {
  if (name == "S_m" || name == "sm") return GapKind::Sm;
  if (name == "A_m" || name == "am") return GapKind::Am;
  if (name == "soft_km" || name == "soft") return GapKind::SoftKm;
  if (name == "lemma3") return GapKind::Extraction;
  throw PreconditionError("unknown gap bound kind '" + name + "'");
}

double gap_bounds(GapKind kind, const GapParams& p) {
  switch (kind) {
    case GapKind::Sm: {
      double t = p.times.empty() ? p.t_max : max_abs_time(p.times);
      return 2 * std::sin(p.e_plus * t / (2.0 * p.m));
    }
    case GapKind::Am:
      return 2 * (std::pow(4.0, -1.0 / 3) + std::cbrt(2.0)) * std::cbrt(p.e_bar * p.t_max / p.m);
    case GapKind::SoftKm: {
      double eps = rounding_epsilon(p.n_times, p.n, p.d, p.k);
      return 2 * eps / (1 + eps) + 2 * std::sin(p.e_plus * p.t_max / p.m);
    }
    case GapKind::Extraction: {
      double fsum = 0.0;
      for (const auto& row : p.objective) {
        double mx = 0.0;
        for (double v : row) mx = std::max(mx, std::abs(v));
        fsum += mx;
      }
      return p.eps_m * (std::abs(p.mu - p.f_reference) / p.r + fsum);
    }
  }
  throw PreconditionError("invalid gap bound kind");
}

}  // namespace qextrap
