// Acceptance suite: one PASS/FAIL line per criterion.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "qextrap/cones.hpp"
#include "qextrap/conic.hpp"
#include "qextrap/extrapolation.hpp"
#include "qextrap/generators.hpp"
#include "qextrap/relaxations.hpp"
#include "qextrap/solver.hpp"

using namespace qextrap;
using conic::LinearExpr;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;  // failures first, then summary values

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.insert(notes.begin(), "failed: " + what);
    }
  }
  void note(const std::string& s) { notes.push_back(s); }
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double max_abs(const RMatrix& m) { return m.cwiseAbs().maxCoeff(); }

RMatrix indicator(int settings, int outcomes, int x, int a) {
  RMatrix f = RMatrix::Zero(settings, outcomes);
  f(x, a) = 1.0;
  return f;
}

ExtrapolationProblem problem_for(const NamedSuite& s, double tau, int m, RMatrix f = {}) {
  ExtrapolationProblem p;
  p.data = s.noisy;
  p.scenario = s.scenario;
  p.scenario.tau = tau;
  p.objective = f.size() ? std::move(f) : indicator(s.scenario.settings, s.scenario.outcomes, 0, 0);
  p.relaxation.constraint = s.constraint;
  p.relaxation.m = m;
  return p;
}

// ---------------------------------------------------------------------------

Outcome exact_simulation() {
  Outcome o;
  for (int n = 2; n <= 5; ++n) {
    const auto s = dataset_D(n, 1.0);
    const auto d = simulate_dataset(s.realizations[0], s.noisy.estimates.times);
    double err = 0.0;
    // P(0|t_0) = 1 and P(0|t_j) = 0 afterwards
    for (int j = 0; j < n; ++j) err = std::max(err, std::abs(d.points[j](0, 0) - (j == 0 ? 1.0 : 0.0)));
    o.expect(err < 1e-9, "D" + std::to_string(n) + fmt(" error %.2e", err));
  }

  const auto aha = aha_suite(1.0);
  const auto& a_times = aha.joint.noisy.estimates.times;
  const auto a = simulate_dataset(aha_plus(1.0), a_times);
  const double a1[] = {1.0, 1.0 / 3, 0.0}, a2[] = {1.0, 0.0, 1.0};
  double aerr = 0.0;
  for (int k = 0; k < 3; ++k) {
    aerr = std::max(aerr, std::abs(a.points[k](0, 0) - a1[k]));
    aerr = std::max(aerr, std::abs(a.points[k](1, 0) - a2[k]));
  }
  const double tau = 4 * kPi;
  for (int x = 0; x < 2; ++x) {
    aerr = std::max(aerr, std::abs(simulate_datapoint(aha_minus(x, 1.0), 0, tau)(0)));
    aerr = std::max(aerr, std::abs(simulate_datapoint(aha_plus(1.0), x, tau)(0) - 1.0));
  }
  o.expect(aerr < 1e-9, fmt("aha error %.2e", aerr));

  double ferr = 0.0;
  for (int v = 0; v < 3; ++v) {
    std::vector<double> q(3, 0.0);
    q[v] = 1.0;
    const auto r = fogbank_realization(1.0, q);
    const auto p1 = simulate_datapoint(r, 0, 15 * kPi / 2);
    for (int b = 0; b < 3; ++b) ferr = std::max(ferr, std::abs(p1(b) - q[b]));
    ferr = std::max(ferr, std::abs(simulate_datapoint(r, 0, 9 * kPi)(1) - 1.0));
  }
  o.expect(ferr < 1e-9, fmt("fog bank error %.2e", ferr));

  const auto& two = aha.two_level.realizations[0];
  const double cerr = std::max({std::abs(simulate_datapoint(two, 0, 0.0)(0) - 0.5),
                                std::abs(simulate_datapoint(two, 0, kPi)(0) - 0.5),
                                std::abs(simulate_datapoint(two, 0, 2 * kPi)(0) - 1.0)});
  o.expect(cerr < 1e-9, fmt("two-level instance error %.2e", cerr));
  o.note(fmt("max error %.1e", std::max({aerr, ferr, cerr})));
  return o;
}

Outcome closed_forms() {
  Outcome o;
  std::mt19937 rng(101);
  std::uniform_real_distribution<double> ut(0.0, 60.0);
  double sin_err = 0.0, sum_err = 0.0, tau_err = 0.0;
  const double lambda = 1.5;
  for (int n : {2, 4, 6}) {
    const auto s = realization_problematic_sin(n, 1.0);
    const auto x = realization_superexp(lambda, n, 1.0);
    for (int k = 0; k < 50; ++k) {
      const double t = ut(rng);
      const auto p = simulate_datapoint(s.realizations[0], 0, t);
      sin_err = std::max(sin_err, std::abs(p(1) - p(0) - std::pow(std::sin(t / n), n)));
      // ((1 - l + l e^{-is})^n + c.c.) / (2 (2l - 1)^n) with s = t/(nT)
      const std::complex<double> z = 1.0 - lambda + lambda * std::polar(1.0, -t / n);
      const double closed = std::real(std::pow(z, n)) / std::pow(2 * lambda - 1, n);
      const auto q = simulate_datapoint(x.realizations[0], 0, t);
      sum_err = std::max(sum_err, std::abs(q(1) - q(0) - closed));
    }
    const double tau = kPi * n;
    const double sign = n % 2 ? -1.0 : 1.0;
    const auto q = simulate_datapoint(x.realizations[0], 0, tau);
    tau_err = std::max(tau_err, std::abs(q(1) - q(0) - sign));
    // sin(t/(nT))^n = 1 at t = pi n T / 2
    const auto ps = simulate_datapoint(s.realizations[0], 0, tau / 2);
    tau_err = std::max(tau_err, std::abs(ps(1) - ps(0) - 1.0));

    const double delta = std::pow(std::sin(1.0 / n), n);
    const auto od = dataset_O(4, 1.0, delta);
    for (const auto& r : s.realizations) {
      const auto fit = fit_check(simulate_dataset(r, od.estimates.times), od, 1e-12);
      o.expect(fit.fits, "O(4,1,sin(1/" + std::to_string(n) + ")^n) fit");
    }
  }
  o.expect(sin_err < 1e-9, fmt("sine identity error %.2e", sin_err));
  o.expect(sum_err < 1e-9, fmt("binomial sum error %.2e", sum_err));
  o.expect(tau_err < 1e-9, fmt("deterministic outcome error %.2e", tau_err));
  o.note(fmt("errors %.1e / %.1e", sin_err, sum_err));
  return o;
}

// The interval of f(P(tau)) must contain the value of every bundled realization.
void check_contains(Outcome& o, const std::string& label, const NamedSuite& s, double tau, int m, int x, int a,
                    const ExtrapolationOptions& opt) {
  const RMatrix f = indicator(s.scenario.settings, s.scenario.outcomes, x, a);
  const auto iv = solve_interval(problem_for(s, tau, m, f), opt);
  if (!iv.optimal()) {
    o.expect(false, label + " m=" + std::to_string(m) + " not solved");
    return;
  }
  double worst = 0.0;
  for (const auto& r : s.realizations) {
    const double v = simulate_dataset(r, {tau}).points.front().cwiseProduct(f).sum();
    worst = std::max({worst, iv.lower - v, v - iv.upper});
  }
  o.expect(worst <= 1e-6, label + " m=" + std::to_string(m) + fmt(" misses by %.2e", worst));
}

Outcome soundness(const ExtrapolationOptions& opt) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto aha = aha_suite(1.0);
  const auto fb = fogbank_suite(1.0, {0.2, 0.5, 0.3});
  const auto d3 = dataset_D(3, 1.0);
  const auto sin4 = realization_problematic_sin(4, 1.0);
  for (int m : {8, 16, 32}) {
    check_contains(o, "aha joint", aha.joint, 4 * kPi, m, 1, 0, opt);
    check_contains(o, "fog bank", fb, 15 * kPi / 2, m, 0, 1, opt);
    check_contains(o, "D3", d3, d3.scenario.tau, m, 0, 0, opt);
    check_contains(o, "O", sin4, sin4.markers.front().tau, m, 0, 1, opt);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.expect(secs < 120.0, fmt("runtime %.0f s", secs));
  o.note(fmt("%.1f s", secs));
  return o;
}

void check_nested(Outcome& o, const std::string& label, const std::vector<ExtrapolationProblem>& chain,
                  const ExtrapolationOptions& opt, std::string& widths) {
  Interval prev;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const auto iv = solve_interval(chain[i], opt);
    if (!iv.optimal()) {
      o.expect(false, label + " step " + std::to_string(i) + " not solved");
      return;
    }
    if (i > 0) {
      o.expect(iv.lower >= prev.lower - 1e-6 && iv.upper <= prev.upper + 1e-6,
               label + fmt(" step widens to [%.6f, ", iv.lower) + fmt("%.6f]", iv.upper));
    }
    widths += (i ? "," : " " + label + " ") + fmt("%.3f", iv.width());
    prev = iv;
  }
  widths += fmt(" (%.0f s)", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
}

Outcome nesting(const ExtrapolationOptions& opt) {
  Outcome o;
  std::string widths;
  const std::vector<int> ms{8, 16, 32};

  // S_m
  {
    const auto d3 = dataset_D(3, 1.0);
    const auto aha = aha_suite(1.0);
    auto o4 = realization_problematic_sin(4, 1.0);
    o4.noisy = dataset_O(4, 1.0, 0.1);
    o4.constraint = HardConstraint{2.0};
    std::vector<ExtrapolationProblem> a, b, c;
    for (int m : ms) {
      a.push_back(problem_for(d3, d3.scenario.tau, m));
      b.push_back(problem_for(aha.joint, 4 * kPi, m));
      c.push_back(problem_for(o4, 1.1, m, indicator(1, 2, 0, 1)));
    }
    check_nested(o, "S_m/D3", a, opt, widths);
    check_nested(o, "S_m/aha", b, opt, widths);
    check_nested(o, "S_m/O", c, opt, widths);
  }
  // A_m
  {
    auto d2 = dataset_D(2, 1.0);
    d2.constraint = AverageConstraint{0.5};
    d2.noisy = make_noisy(d2.noisy.estimates.times, d2.noisy.estimates.points, 0.05);
    auto o4 = realization_problematic_sin(4, 1.0);
    o4.noisy = dataset_O(4, 1.0, 0.1);
    o4.constraint = AverageConstraint{1.0};
    NamedSuite flat;
    flat.scenario = Scenario{1, 2, {0.0, 0.5, 1.0}, 1.5};
    flat.noisy = make_noisy(flat.scenario.times, {RMatrix{{0.9, 0.1}}, RMatrix{{0.8, 0.2}}, RMatrix{{0.6, 0.4}}}, 0.05);
    flat.constraint = AverageConstraint{0.5};
    std::vector<ExtrapolationProblem> a, b, c;
    // the default cutoff grows like m^(2/3); D2 spans a full period so its chain starts higher
    for (int m : {16, 32, 64}) a.push_back(problem_for(d2, 1.5, m));
    for (int m : {12, 24, 48}) {
      b.push_back(problem_for(o4, 1.1, m, indicator(1, 2, 0, 1)));
      c.push_back(problem_for(flat, 1.5, m));
    }
    check_nested(o, "A_m/D2", a, opt, widths);
    check_nested(o, "A_m/O", b, opt, widths);
    check_nested(o, "A_m/flat", c, opt, widths);
  }
  // soft model, moment order k = 2, 4 (k must cover the largest lattice index difference)
  {
    auto soft_chain = [&](double step, std::vector<int> idx, std::vector<Datapoint> pts, double delta, int tau_idx,
                          int m, std::vector<int> ks) {
      std::vector<double> ts;
      for (int i : idx) ts.push_back(step * i);
      NamedSuite s;
      s.scenario = Scenario{1, 2, ts, step * tau_idx};
      s.noisy = make_noisy(ts, pts, delta);
      s.constraint = SoftConstraint{1.0, 0.5};
      idx.push_back(tau_idx);
      const auto lat = TimeStructure::lattice(step, idx);
      std::vector<ExtrapolationProblem> chain;
      for (int k : ks) {
        auto p = problem_for(s, s.scenario.tau, m);
        p.relaxation.decay = DecayMatrixModel::moment(k, lat);
        chain.push_back(p);
      }
      return chain;
    };
    check_nested(o, "soft/disc", soft_chain(0.05, {0, 1}, {RMatrix{{1.0, 0.0}}, RMatrix{{0.0, 1.0}}}, 1e-3, 2, 4, {2, 4}),
                 opt, widths);
    check_nested(o, "soft/osc",
                 soft_chain(0.5, {0, 1, 2}, {RMatrix{{1.0, 0.0}}, RMatrix{{0.5, 0.5}}, RMatrix{{0.1, 0.9}}}, 0.05, 3, 8, {3, 6}),
                 opt, widths);
    check_nested(o, "soft/gap",
                 soft_chain(0.3, {0, 2}, {RMatrix{{0.7, 0.3}}, RMatrix{{0.4, 0.6}}}, 0.02, 3, 4, {3, 6}), opt, widths);
  }
  o.note("widths" + widths);
  return o;
}

Outcome phenomena(const ExtrapolationOptions& opt) {
  Outcome o;
  const auto fb = fogbank_suite(1.0, {0.2, 0.5, 0.3});
  const auto aha = aha_suite(1.0);
  o.expect(knightian_inner_check(fb.realizations, fb.noisy, 15 * kPi / 2, {0}, opt.solver).knightian,
           "fog bank knightian at tau1");
  o.expect(knightian_inner_check(aha.first.realizations, aha.first.noisy, 4 * kPi, {0}, opt.solver).knightian,
           "first aha dataset knightian");
  o.expect(knightian_inner_check(aha.second.realizations, aha.second.noisy, 4 * kPi, {0}, opt.solver).knightian,
           "second aha dataset knightian");

  auto widths = [&](const NamedSuite& s, double tau, const std::string& label) {
    const auto w16 = certainty_scan(problem_for(s, tau, 16), 0.2, opt).max_width;
    const auto w32 = certainty_scan(problem_for(s, tau, 32), 0.2, opt).max_width;
    o.expect(w16 <= 0.2, label + fmt(" width %.3f at m=16 exceeds 0.2", w16));
    o.expect(w32 < w16, label + fmt(" width %.3f at m=32 is not below m=16", w32));
    o.note(label + fmt(" widths %.3f, %.3f", w16, w32));
  };
  widths(fb, 9 * kPi, "fog bank tau2");
  widths(aha.joint, 4 * kPi, "joint aha");
  return o;
}

// gamma_jk = sum_l w_l exp(-i E_l (t_k - t_j))
CMatrix gamma_from_measure(const std::vector<double>& times, const std::vector<double>& e, const std::vector<double>& w) {
  const int n = static_cast<int>(times.size());
  CMatrix g = CMatrix::Zero(n, n);
  for (std::size_t l = 0; l < e.size(); ++l)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) g(j, k) += w[l] * std::exp(cplx(0, -e[l] * (times[k] - times[j])));
  return g;
}

Outcome decay_cones(const ExtrapolationOptions& opt) {
  Outcome o;
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(0, 1);
  const double step = 0.7;
  const auto lat = TimeStructure::lattice(step, {0, 1, 2});
  int bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int atoms = 1 + trial % 5;
    std::vector<double> e, w;
    double total = 0;
    for (int l = 0; l < atoms; ++l) {
      e.push_back(20 * u(rng));
      w.push_back(u(rng) + 0.05);
      total += w.back();
    }
    for (auto& x : w) x /= total;
    const auto g = gamma_from_measure(lat.times(), e, w);
    bad += !membership_decay(g, DecayMatrixModel::toeplitz(lat), opt.solver).feasible;
    bad += !membership_decay(g, DecayMatrixModel::moment(2, lat), opt.solver).feasible;
    bad += !membership_decay(g, DecayMatrixModel::moment(3, lat), opt.solver).feasible;
  }
  o.expect(bad == 0, "(a) " + std::to_string(bad) + " atomic measures rejected");

  CMatrix f3 = CMatrix::Identity(3, 3);
  f3(0, 1) = f3(1, 0) = 1.0;
  o.expect(membership_decay(f3, DecayMatrixModel::equal_diag(), opt.solver).feasible, "(b) equal-diag rejects");
  o.expect(!membership_decay(f3, DecayMatrixModel::toeplitz(lat), opt.solver).feasible, "(b) Toeplitz accepts");

  const auto lat2 = TimeStructure::lattice(1.0, {0, 1});
  std::normal_distribution<double> nd;
  int rounded_bad = 0;
  for (int trial = 0; trial < 5; ++trial) {
    conic::ConicProgram p;
    auto b = decay_constraints(p, DecayMatrixModel::moment(10, lat2), 2);
    p.add_constraint(b.gamma(0, 0).re, conic::Relation::Equal, 1.0);
    p.set_objective(conic::Sense::Maximize, nd(rng) * b.gamma(0, 1).re + nd(rng) * b.gamma(0, 1).im);
    const auto r = conic::solve(p, opt.solver);
    if (!r.optimal()) {
      ++rounded_bad;
      continue;
    }
    CMatrix g = b.value(r.x);
    g = 0.5 * (g + g.adjoint()).eval();
    rounded_bad += !membership_decay(round_to_feasible(g, 10, lat2), DecayMatrixModel::toeplitz(lat2), opt.solver).feasible;
  }
  o.expect(rounded_bad == 0, "(c) " + std::to_string(rounded_bad) + " rounded points rejected");

  double rec = 0.0;
  const double dstep = 0.4;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Atom> in{{2 * kPi / dstep * u(rng), 0.2 + u(rng)}, {2 * kPi / dstep * u(rng), 0.2 + u(rng)}};
    if (std::abs(in[0].energy - in[1].energy) < 0.5) continue;
    const auto g = toeplitz_from_atoms(in, 4, dstep);
    const auto atoms = atomic_decomposition_toeplitz(g, dstep);
    rec = std::max(rec, max_abs((toeplitz_from_atoms(atoms, 4, dstep) - g).cwiseAbs()));
    if (atoms.size() != 2) rec = std::max(rec, 1.0);
  }
  o.expect(rec < 1e-7, fmt("(d) reconstruction error %.2e", rec));
  o.note(fmt("reconstruction error %.1e", rec));
  return o;
}

Outcome gap_formulas() {
  Outcome o;
  const double c = 2 * (std::pow(4.0, -1.0 / 3) + std::cbrt(2.0));
  double err = 0.0;
  const double am[][3] = {{1, 1, 1000}, {0.5, 2, 64}, {2, 0.5, 27}, {1, 3, 8}, {0.1, 1, 500},
                          {3, 1, 100}, {1, 0.25, 10}, {5, 2, 2000}, {0.7, 1.3, 77}, {1, 10, 343}};
  for (const auto& t : am) {
    GapParams p;
    p.e_bar = t[0];
    p.t_max = t[1];
    p.m = static_cast<int>(t[2]);
    err = std::max(err, std::abs(gap_bounds(GapKind::Am, p) - c * std::cbrt(t[0] * t[1] / t[2])));
  }
  const int ek[][4] = {{2, 1, 1, 10}, {3, 1, 1, 12}, {2, 2, 1, 20}, {4, 1, 1, 30}, {3, 2, 1, 40},
                       {2, 1, 2, 15}, {5, 1, 1, 50}, {3, 1, 2, 25}, {2, 3, 1, 60}, {4, 2, 2, 80}};
  for (const auto& t : ek) {
    const int n_times = t[0], n = t[1], d = t[2], k = t[3];
    const double expect = n_times * (n_times - 1) * (std::pow(1 - 6.0 * d * d / (k * k), -n) - 1);
    err = std::max(err, std::abs(rounding_epsilon(n_times, n, d, k) - expect) / (1 + expect));
    GapParams p;
    p.n_times = n_times;
    p.n = n;
    p.d = d;
    p.k = k;
    p.m = 10;
    p.e_plus = 1.0;
    p.t_max = 1.0;
    err = std::max(err, std::abs(gap_bounds(GapKind::SoftKm, p) - (2 * expect / (1 + expect) + 2 * std::sin(0.1))));
  }
  o.expect(err < 1e-12, fmt("formula error %.2e", err));
  o.note(fmt("max error %.1e over 20 tuples", err));
  return o;
}

Outcome selftesting() {
  Outcome o;
  for (int n = 2; n <= 5; ++n) {
    const auto d = dataset_D(n, 1.0);
    const auto rep = selftest_diagnostics(d.realizations[0], n, 1.0, 0.0);
    double ov = 0.0;
    for (double v : rep.overlaps) ov = std::max(ov, v);
    o.expect(ov < 1e-12, "D" + std::to_string(n) + fmt(" overlap %.2e", ov));
    o.expect(std::abs(rep.window_weight - 1.0) < 1e-12, "D" + std::to_string(n) + " window weight");
  }
  const int n = 3;
  const auto d = dataset_D(n, 1.0);
  const auto& ref = d.realizations[0];
  CVector orth(n);
  orth << 1.0, -1.0, 0.0;
  orth.normalize();
  const CMatrix rho = 0.99 * ref.state() + 0.01 * orth * orth.adjoint();
  const Realization noisy(rho, ref.hamiltonian(), ref.povms());
  const double delta = selftest_delta(noisy, n, 1.0);
  const auto rep = selftest_diagnostics(noisy, n, 1.0, delta);
  double ov = 0.0;
  for (double v : rep.overlaps) ov = std::max(ov, v);
  o.expect(ov <= rep.overlap_bound + 1e-12, fmt("overlap %.3e above bound %.3e", ov, rep.overlap_bound));
  o.expect(rep.window_weight >= 0.9, fmt("window weight %.4f", rep.window_weight));
  o.note(fmt("noisy: delta %.2e, weight %.4f", delta, rep.window_weight));
  return o;
}

Outcome discontinuity(const ExtrapolationOptions& opt, int m) {
  Outcome o;
  const double dt = 0.05, e_plus = 1.0;
  for (int k = 0; k < 4; ++k) {
    const auto s = discontinuity_family(k, dt, e_plus);
    const auto& r = s.realizations[0];
    const auto d = simulate_dataset(r, {0.0, dt});
    const double fit = std::max(std::abs(d.points[0](0, 0) - 1.0), std::abs(d.points[1](0, 0)));
    o.expect(fit < 1e-12, "family m=" + std::to_string(k) + fmt(" misfit %.2e", fit));
    const double at = simulate_datapoint(r, 0, s.markers.front().tau)(0);
    o.expect(std::abs(at) < 1e-12, "family m=" + std::to_string(k) + fmt(" P(0|tau_m) = %.2e", at));
    o.expect(validate_realization(r, SoftConstraint{e_plus, 0.5}).pass, "family violates the soft constraint");
  }

  ExtrapolationProblem p;
  p.scenario = Scenario{1, 2, {0.0, dt}, 2 * dt};
  p.data = make_noisy(p.scenario.times, {RMatrix{{1.0, 0.0}}, RMatrix{{0.0, 1.0}}}, 1e-3);
  p.objective = indicator(1, 2, 0, 0);
  p.relaxation.constraint = SoftConstraint{e_plus, 0.5};
  p.relaxation.m = m;
  p.relaxation.decay = DecayMatrixModel::toeplitz(TimeStructure::lattice(dt, {0, 1, 2}));
  const auto iv = solve_interval(p, opt);
  o.expect(iv.optimal(), "soft model not solved");
  if (iv.optimal()) {
    o.expect(iv.lower >= 0.9, fmt("mu- = %.4f < 0.9", iv.lower));
    o.note(fmt("soft m=%.0f: mu- = %.4f", m, iv.lower) + fmt(", mu+ = %.4f", iv.upper));
  }
  return o;
}

Outcome solver_layer(const ExtrapolationOptions& opt) {
  Outcome o;
  std::mt19937 rng(77);
  std::normal_distribution<double> g;
  double emb = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + trial % 6;
    CMatrix a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = cplx(g(rng), g(rng));
    CMatrix h = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> ce(h);
    Eigen::SelfAdjointEigenSolver<RMatrix> re(conic::embed_hermitian(h));
    // spectrum of the embedding is the complex spectrum, each value twice
    for (int i = 0; i < d; ++i) {
      emb = std::max(emb, std::abs(re.eigenvalues()(2 * i) - ce.eigenvalues()(i)));
      emb = std::max(emb, std::abs(re.eigenvalues()(2 * i + 1) - ce.eigenvalues()(i)));
    }
    emb = std::max(emb, (conic::unembed_hermitian(conic::embed_hermitian(h)) - h).cwiseAbs().maxCoeff());
  }
  o.expect(emb <= 1e-10, fmt("embedding error %.2e", emb));

  auto model = model_S_m(1.0, 8, Scenario{1, 2, {0.0, 1.0}, 2.0});
  model.program.set_objective(conic::Sense::Maximize, model.value(0, 0, model.tau_index()));
  const auto text = conic::dump_standard_form(model.program);
  const auto back = conic::parse_standard_form(text);
  o.expect(back == model.program && conic::dump_standard_form(back) == text, "standard form round trip");

  double err = 0.0;
  {
    conic::ConicProgram p;
    const int x = p.add_nonnegative(1);
    p.add_constraint(LinearExpr::variable(x), conic::Relation::GreaterEqual, 3.0);
    p.set_objective(conic::Sense::Minimize, LinearExpr::variable(x));
    const auto r = conic::solve(p, opt.solver);
    err = std::max(err, r.optimal() ? std::abs(r.objective - 3.0) : 1.0);
  }
  {
    conic::ConicProgram p;
    const int blk = p.add_psd(2);
    LinearExpr tr, obj;
    tr.add(p.psd_entry(blk, 0, 0), 1).add(p.psd_entry(blk, 1, 1), 1);
    p.add_constraint(tr, conic::Relation::Equal, 1.0);
    obj.add(p.psd_entry(blk, 0, 0), 1).add(p.psd_entry(blk, 1, 1), 2);
    p.set_objective(conic::Sense::Maximize, obj);
    const auto r = conic::solve(p, opt.solver);
    err = std::max(err, r.optimal() ? std::abs(r.objective - 2.0) : 1.0);
  }
  {
    conic::ConicProgram p;
    auto h = conic::add_hermitian(p, 3);
    LinearExpr tr;
    for (int i = 0; i < 3; ++i) tr += h.re(i, i);
    p.add_constraint(tr, conic::Relation::Equal, 1.0);
    CVector v(3);
    v << cplx(1, 0), cplx(0, 1), cplx(0.5, -0.5);
    p.set_objective(conic::Sense::Maximize, h.quadratic(v));
    const auto r = conic::solve(p, opt.solver);
    err = std::max(err, r.optimal() ? std::abs(r.objective - v.squaredNorm()) : 1.0);
  }
  o.expect(err <= 1e-7, fmt("trivial program error %.2e", err));
  o.note(fmt("embedding %.1e, programs %.1e", emb, err));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria 1-10"};
  std::vector<int> only;
  std::vector<int> known;
  int soft_m = 32;
  int threads = 0;
  app.add_option("--only", only, "Run only these criteria");
  app.add_option("--known-failures", known,
                 "Criteria whose failure does not change the exit code (they are still reported as FAIL)")
      ->delimiter(',');
  app.add_option("--soft-m", soft_m, "Relaxation order for criterion 9")->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "OpenMP threads for certainty scans")->check(CLI::NonNegativeNumber);
  CLI11_PARSE(app, argc, argv);

  ExtrapolationOptions opt;
  opt.solver.threads = threads;

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"exact simulation oracles", exact_simulation},
      {"closed-form identities", closed_forms},
      {"outer-bound soundness", [&] { return soundness(opt); }},
      {"hierarchy nesting", [&] { return nesting(opt); }},
      {"phenomena classification", [&] { return phenomena(opt); }},
      {"decay cones", [&] { return decay_cones(opt); }},
      {"gap formulas", gap_formulas},
      {"self-testing diagnostics", selftesting},
      {"soft-constraint discontinuity", [&] { return discontinuity(opt, soft_m); }},
      {"solver layer", [&] { return solver_layer(opt); }},
  };

  const std::set<int> selected(only.begin(), only.end()), allowed(known.begin(), known.end());
  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream line;
    line << (o.pass ? "PASS" : "FAIL") << " " << id << " " << criteria[i].first << " [" << fmt("%.1f s", secs) << "]";
    for (const auto& n : o.notes) line << "; " << n;
    std::printf("%s\n", line.str().c_str());
    std::fflush(stdout);
    if (!o.pass && !allowed.count(id)) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
