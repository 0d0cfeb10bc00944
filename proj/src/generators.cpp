#include "qextrap/generators.hpp"

#include <cmath>
#include <numeric>

#include "qextrap/error.hpp"

namespace qextrap {

std::string to_string(Behavior b) {
  switch (b) {
    case Behavior::Knightian: return "knightian";
    case Behavior::FullCertainty: return "full-certainty";
    default: return "value";
  }
}

namespace {

double binomial(int n, int k) { return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)); }

Datapoint two_outcome(double p1) {
  Datapoint d(1, 2);
  d << 1.0 - p1, p1;
  return d;
}

std::vector<CMatrix> binary_povm(const CMatrix& m0) {
  return {m0, CMatrix::Identity(m0.rows(), m0.cols()) - m0};
}

CVector basis(int dim, int k) {
  CVector v = CVector::Zero(dim);
  v(k) = 1.0;
  return v;
}

CVector evolve_diag(const CVector& psi, const RVector& energies, double t) {
  CVector out = psi;
  for (Eigen::Index k = 0; k < psi.size(); ++k) out(k) *= std::polar(1.0, -energies(k) * t);
  return out;
}

RVector diag_energies(const CMatrix& h) { return h.diagonal().real(); }

void require_fit(const NamedSuite& s) {
  for (std::size_t i = 0; i < s.realizations.size(); ++i) {
    const auto d = simulate_dataset(s.realizations[i], s.noisy.estimates.times);
    const auto rep = fit_check(d, s.noisy);
    if (!rep.fits)
      throw PreconditionError(s.label + ": realization '" + s.realization_names[i] +
                              "' violates the error bars by " + std::to_string(rep.max_violation));
  }
}

}  // namespace

NoisyDataset make_noisy(const std::vector<double>& times, const std::vector<Datapoint>& points, double delta) {
  NoisyDataset nd;
  nd.estimates.times = times;
  nd.estimates.points = points;
  const Eigen::Index settings = points.empty() ? 1 : points.front().rows();
  nd.delta = RMatrix::Constant(settings, static_cast<Eigen::Index>(times.size()), delta);
  return nd;
}

NoisyDataset dataset_O(int n_times, double period, double delta) {
  if (n_times < 1 || !(period > 0) || delta < 0) throw PreconditionError("dataset_O needs N >= 1, T > 0, delta >= 0");
  std::vector<double> times;
  for (int j = 1; j <= n_times; ++j) times.push_back(j * period / n_times);
  return make_noisy(times, std::vector<Datapoint>(times.size(), two_outcome(0.5)), delta);
}

Realization realization_cosine_mixture(const std::vector<double>& c, const std::vector<double>& energies) {
  if (c.size() != energies.size() || c.empty()) throw PreconditionError("coefficient and energy lists must match");
  for (double ck : c)
    if (ck == 0.0) throw PreconditionError("cosine mixture coefficients must be nonzero");
  const int levels = static_cast<int>(c.size());
  const int dim = 2 * levels;  // qubit ⊗ level register, index q * levels + k
  double norm = 0.0;
  for (double ck : c) norm += std::abs(ck);
  const double shift = std::max(0.0, -*std::min_element(energies.begin(), energies.end()));
  CMatrix rho = CMatrix::Zero(dim, dim);
  CMatrix h = shift * CMatrix::Identity(dim, dim);
  for (int k = 0; k < levels; ++k) {
    CVector phi = (basis(dim, k) + (c[k] > 0 ? 1.0 : -1.0) * basis(dim, levels + k)) / std::sqrt(2.0);
    rho += std::abs(c[k]) / norm * projector(phi);
    h(levels + k, levels + k) += energies[k];
  }
  CMatrix a = CMatrix::Zero(dim, dim);
  for (int k = 0; k < levels; ++k) a(k, levels + k) = a(levels + k, k) = 1.0;
  const CMatrix id = CMatrix::Identity(dim, dim);
  // Outcome 1 carries +A so that P(1) - P(0) = <A>.
  return Realization(rho, h, {{0.5 * (id - a), 0.5 * (id + a)}});
}

Realization swap_outcomes(const Realization& r, int setting) {
  auto povms = r.povms();
  std::reverse(povms.at(setting).begin(), povms.at(setting).end());
  return Realization(r.state(), r.hamiltonian(), std::move(povms));
}

NamedSuite realization_problematic_sin(int n, double period, int n_times) {
  if (n < 2 || n % 2) throw PreconditionError("problematic sine family needs an even n >= 2");
  if (!(period > 0)) throw PreconditionError("T must be positive");
  std::vector<double> c, e;
  for (int k = 0; k <= n; ++k) {
    // The extra sign (-1)^(n/2) cancels the i^n of (2i sin)^n.
    c.push_back(std::ldexp(binomial(n, k), -n) * ((k + n / 2) % 2 ? -1.0 : 1.0));
    e.push_back((n - 2.0 * k) / (n * period));
  }
  NamedSuite s;
  s.label = "sin/n=" + std::to_string(n);
  const double delta = std::pow(std::sin(1.0 / n), n);
  s.noisy = dataset_O(n_times, period, delta);
  s.constraint = HardConstraint{2.0 / period};
  const Realization r = realization_cosine_mixture(c, e);
  s.realizations = {r, swap_outcomes(r)};
  s.realization_names = {"P_n", "P_n swapped"};
  s.closed_form = [n, period](double t) { return two_outcome(0.5 * (1.0 + std::pow(std::sin(t / (n * period)), n))); };
  const double tau = 2.0 * period;
  const double a = std::pow(std::sin(tau / (n * period)), n);
  s.markers.push_back({tau, Behavior::Value, 0, {0.5 * (1 - a), 0.5 * (1 + a)}});
  s.scenario = {1, 2, s.noisy.estimates.times, tau};
  require_fit(s);
  return s;
}

NamedSuite realization_superexp(double lambda, int n, double period, int n_times) {
  if (!(lambda > 1)) throw PreconditionError("superexponential family needs lambda > 1");
  if (n < 1 || !(period > 0)) throw PreconditionError("superexponential family needs n >= 1 and T > 0");
  std::vector<double> c, e;
  for (int k = 0; k <= n; ++k) {
    c.push_back(binomial(n, k) * std::pow(1.0 - lambda, n - k) * std::pow(lambda, k));
    e.push_back(k / (n * period));
  }
  NamedSuite s;
  s.label = "superexp/lambda=" + std::to_string(lambda) + ",n=" + std::to_string(n);
  const double delta = 2.0 / std::pow(2.0 * lambda - 1.0, n);
  s.noisy = dataset_O(n_times, period, delta);
  s.constraint = HardConstraint{1.0 / period};
  const Realization r = realization_cosine_mixture(c, e);
  s.realizations = {r, swap_outcomes(r)};
  s.realization_names = {"P_lambda,n", "P_lambda,n swapped"};
  s.closed_form = [lambda, n, period](double t) {
    const cplx z = 1.0 - lambda + lambda * std::polar(1.0, t / (n * period));
    return two_outcome(0.5 * (1.0 + std::pow(z, n).real() / std::pow(2.0 * lambda - 1.0, n)));
  };
  const double tau = kPi * n * period;
  const double p1 = n % 2 ? 0.0 : 1.0;
  s.markers.push_back({tau, Behavior::Knightian, 0, {}});
  s.markers.push_back({tau, Behavior::Value, 0, {1.0 - p1, p1}});
  s.scenario = {1, 2, s.noisy.estimates.times, tau};
  require_fit(s);
  return s;
}

CVector reference_state(int n) { return CVector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n))); }

CMatrix reference_hamiltonian(int n, double e_plus) {
  CMatrix h = CMatrix::Zero(n, n);
  for (int k = 0; k < n; ++k) h(k, k) = e_plus * k / (n - 1);
  return h;
}

NamedSuite dataset_D(int n, double e_plus) {
  if (n < 2) throw PreconditionError("D_N needs N >= 2");
  if (!(e_plus > 0)) throw PreconditionError("E+ must be positive");
  NamedSuite s;
  s.label = "D" + std::to_string(n);
  std::vector<double> times;
  std::vector<Datapoint> pts;
  for (int j = 0; j < n; ++j) {
    times.push_back(2 * kPi * (n - 1) * j / (n * e_plus));
    pts.push_back(two_outcome(j == 0 ? 0.0 : 1.0));
  }
  s.noisy = make_noisy(times, pts, 0.0);
  s.constraint = HardConstraint{e_plus};
  const CVector psi = reference_state(n);
  const CMatrix h = reference_hamiltonian(n, e_plus);
  s.realizations = {Realization::pure(psi, h, {binary_povm(projector(psi))})};
  s.realization_names = {"reference"};
  const RVector energies = diag_energies(h);
  s.closed_form = [psi, energies](double t) {
    return two_outcome(1.0 - std::norm(psi.dot(evolve_diag(psi, energies, t))));
  };
  // One period after t_1 the state has returned to psi(t_1), orthogonal to psi.
  const double tau = times.at(1) + 2 * kPi * (n - 1) / e_plus;
  s.markers.push_back({tau, Behavior::FullCertainty, 0, {0.0, 1.0}});
  s.scenario = {1, 2, times, tau};
  require_fit(s);
  return s;
}

Realization aha_plus(double e_plus) {
  const CVector psi = reference_state(3);
  const CMatrix h = reference_hamiltonian(3, e_plus);
  const CVector psi1 = evolve_diag(psi, diag_energies(h), 4 * kPi / (3 * e_plus));
  const CMatrix id = CMatrix::Identity(3, 3);
  const CMatrix m01 = projector(psi) + projector(psi1) / 3.0;
  const CMatrix m02 = id - projector(psi1);
  return Realization::pure(psi, h, {binary_povm(m01), binary_povm(m02)});
}

Realization aha_minus(int setting, double e_plus) {
  CVector psi(4);
  CMatrix h = CMatrix::Zero(4, 4);
  CMatrix m0;
  if (setting == 0) {
    psi << 1 / std::sqrt(6.0), 1 / std::sqrt(3.0), 1 / std::sqrt(3.0), 1 / std::sqrt(6.0);
    h.diagonal() << 0, e_plus / 4, e_plus / 2, 3 * e_plus / 4;
    m0 = projector(psi);
  } else {
    psi << 0.5, 0.5, 0.5, 0.5;
    // Level |2> sits at E+/4; with E+/2 the dataset A2 is not reproduced.
    h.diagonal() << 0, e_plus / 4, 3 * e_plus / 4, e_plus;
    CVector alpha(4);
    alpha << 0.5, -0.5, 0.5, -0.5;
    m0 = projector(psi) + projector(alpha);
  }
  return Realization::pure(psi, h, {binary_povm(m0)});
}

namespace {
Realization single_setting(const Realization& r, int x) {
  return Realization(r.state(), r.hamiltonian(), {r.povms().at(x)});
}
}  // namespace

AhaSuites aha_suite(double e_plus) {
  if (!(e_plus > 0)) throw PreconditionError("E+ must be positive");
  std::vector<double> times;
  for (int k = 0; k < 3; ++k) times.push_back(4 * kPi * k / (3 * e_plus));
  const double tau = 4 * kPi / e_plus;
  const std::vector<double> a1 = {1.0, 1.0 / 3.0, 0.0}, a2 = {1.0, 0.0, 1.0};
  auto pts = [](const std::vector<double>& p0) {
    std::vector<Datapoint> out;
    for (double p : p0) out.push_back(two_outcome(1.0 - p));
    return out;
  };
  const Realization plus = aha_plus(e_plus);
  AhaSuites out;
  for (int x = 0; x < 2; ++x) {
    NamedSuite& s = x == 0 ? out.first : out.second;
    s.label = x == 0 ? "aha/A1" : "aha/A2";
    s.noisy = make_noisy(times, pts(x == 0 ? a1 : a2), 0.0);
    s.constraint = HardConstraint{e_plus};
    s.realizations = {single_setting(plus, x), aha_minus(x, e_plus)};
    s.realization_names = {"P+", x == 0 ? "P-,1" : "P-,2"};
    s.markers.push_back({tau, Behavior::Knightian, 0, {}});
    s.scenario = {1, 2, times, tau};
    require_fit(s);
  }
  {
    NamedSuite& s = out.joint;
    s.label = "aha/A";
    std::vector<Datapoint> joint;
    for (int j = 0; j < 3; ++j) {
      Datapoint d(2, 2);
      d << a1[j], 1 - a1[j], a2[j], 1 - a2[j];
      joint.push_back(d);
    }
    s.noisy = make_noisy(times, joint, 0.0);
    s.constraint = HardConstraint{e_plus};
    s.realizations = {plus};
    s.realization_names = {"P+"};
    s.markers.push_back({tau, Behavior::FullCertainty, 0, {1.0, 0.0}});
    s.markers.push_back({tau, Behavior::FullCertainty, 1, {1.0, 0.0}});
    s.scenario = {2, 2, times, tau};
    require_fit(s);
  }
  // Two-level instance: times {0, pi/E+}, tau = 2 pi/E+.
  const std::vector<double> t2 = {0.0, kPi / e_plus};
  const double tau2 = 2 * kPi / e_plus;
  {
    NamedSuite& s = out.two_level;
    s.label = "aha/two-level";
    s.noisy = make_noisy(t2, {two_outcome(0.5), two_outcome(0.5)}, 0.0);
    s.constraint = HardConstraint{e_plus};
    const CVector psi = reference_state(3);
    const CMatrix h = reference_hamiltonian(3, e_plus);
    CMatrix u = CMatrix::Zero(3, 3);
    for (int k = 0; k < 3; ++k) u(k, k) = std::polar(1.0, -h(k, k).real() * tau2);
    const CMatrix m0 = u * (7.0 * CMatrix::Identity(3, 3) + 9.0 * projector(psi)) / 16.0 * u.adjoint();
    const Realization r = Realization::pure(psi, h, {binary_povm(m0)});
    s.realizations = {r, swap_outcomes(r)};
    s.realization_names = {"Mbar", "Mbar swapped"};
    const RVector energies = diag_energies(h);
    s.closed_form = [psi, energies, tau2](double t) {
      const double ov = std::norm(psi.dot(evolve_diag(psi, energies, t - tau2)));
      return two_outcome(1.0 - (7.0 / 16.0 + 9.0 / 16.0 * ov));
    };
    s.markers.push_back({tau2, Behavior::Knightian, 0, {}});
    s.scenario = {1, 2, t2, tau2};
    require_fit(s);
  }
  {
    NamedSuite& s = out.two_level_joint;
    s.label = "aha/two-level+D2";
    std::vector<Datapoint> joint;
    for (int j = 0; j < 2; ++j) {
      Datapoint d(2, 2);
      d << 0.5, 0.5, (j == 0 ? 1.0 : 0.0), (j == 0 ? 0.0 : 1.0);
      joint.push_back(d);
    }
    s.noisy = make_noisy(t2, joint, 0.0);
    s.constraint = HardConstraint{e_plus};
    const CVector psi = reference_state(2);
    const CMatrix id = CMatrix::Identity(2, 2);
    s.realizations = {Realization::pure(psi, reference_hamiltonian(2, e_plus),
                                        {binary_povm(0.5 * id), binary_povm(projector(psi))})};
    s.realization_names = {"D2 reference with trivial first measurement"};
    s.markers.push_back({tau2, Behavior::FullCertainty, 0, {0.5, 0.5}});
    s.scenario = {2, 2, t2, tau2};
    require_fit(s);
  }
  return out;
}

Realization fogbank_realization(double e_plus, const std::vector<double>& q) {
  if (q.size() != 3) throw PreconditionError("fog bank distribution needs three entries");
  double sum = 0.0;
  for (double v : q) {
    if (v < -1e-12) throw PreconditionError("fog bank distribution has a negative entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw PreconditionError("fog bank distribution is not normalized");
  const CVector psi = reference_state(4);
  const CMatrix h = reference_hamiltonian(4, e_plus);
  const RVector energies = diag_energies(h);
  auto at = [&](int k) { return evolve_diag(psi, energies, 3 * k * kPi / (2 * e_plus)); };
  const CMatrix p1 = projector(at(1));
  std::vector<CMatrix> povm = {projector(at(0)) + q[0] * p1, projector(at(2)) + q[1] * p1,
                               projector(at(3)) + q[2] * p1};
  return Realization::pure(psi, h, {povm});
}

NamedSuite fogbank_suite(double e_plus, const std::vector<double>& q) {
  if (!(e_plus > 0)) throw PreconditionError("E+ must be positive");
  NamedSuite s;
  s.label = "fogbank";
  const std::vector<double> times = {0.0, 3 * kPi / e_plus, 9 * kPi / (2 * e_plus)};
  std::vector<Datapoint> pts;
  for (int a = 0; a < 3; ++a) {
    Datapoint d = Datapoint::Zero(1, 3);
    d(0, a) = 1.0;
    pts.push_back(d);
  }
  s.noisy = make_noisy(times, pts, 0.0);
  s.constraint = HardConstraint{e_plus};
  s.realizations.push_back(fogbank_realization(e_plus, q));
  s.realization_names.push_back("q");
  for (int a = 0; a < 3; ++a) {
    std::vector<double> e(3, 0.0);
    e[a] = 1.0;
    s.realizations.push_back(fogbank_realization(e_plus, e));
    s.realization_names.push_back("q=e" + std::to_string(a));
  }
  const double tau1 = 15 * kPi / (2 * e_plus), tau2 = 9 * kPi / e_plus;
  s.markers.push_back({tau1, Behavior::Knightian, 0, {}});
  s.markers.push_back({tau1, Behavior::Value, 0, q});
  s.markers.push_back({tau2, Behavior::FullCertainty, 0, {0.0, 1.0, 0.0}});
  s.scenario = {1, 3, times, tau1};
  require_fit(s);
  return s;
}

NamedSuite discontinuity_family(int m, double delta_t, double e_plus) {
  if (m < 0 || !(delta_t > 0)) throw PreconditionError("discontinuity family needs m >= 0 and Delta > 0");
  if (e_plus <= 0) e_plus = kPi / (2 * delta_t);
  const double omega = (2 * m + 1) * kPi / delta_t;
  if (omega < e_plus) throw PreconditionError("E+ exceeds the excited energy of the family");
  NamedSuite s;
  s.label = "disc/m=" + std::to_string(m);
  s.noisy = make_noisy({0.0, delta_t}, {two_outcome(0.0), two_outcome(1.0)}, 0.0);
  s.constraint = SoftConstraint{e_plus, 0.5};
  CVector plus(2);
  plus << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  CMatrix h = CMatrix::Zero(2, 2);
  h(1, 1) = omega;
  s.realizations = {Realization::pure(plus, h, {binary_povm(projector(plus))})};
  s.realization_names = {"H_m"};
  s.closed_form = [omega](double t) {
    const double c = std::cos(omega * t / 2);
    return two_outcome(1.0 - c * c);
  };
  const double tau = 2 * delta_t + delta_t / (2 * m + 1);
  s.markers.push_back({tau, Behavior::Value, 0, {0.0, 1.0}});
  s.scenario = {1, 2, {0.0, delta_t}, tau};
  require_fit(s);
  return s;
}

}  // namespace qextrap
