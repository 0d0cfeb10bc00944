#include "qextrap/quantum.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "qextrap/error.hpp"

namespace qextrap {

namespace {
std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}
}  // namespace

Realization::Realization(CMatrix density, CMatrix hamiltonian,
                         std::vector<std::vector<CMatrix>> povms)
    : state_(std::move(density)), hamiltonian_(std::move(hamiltonian)), povms_(std::move(povms)) {}

Realization Realization::pure(const CVector& psi, CMatrix hamiltonian,
                              std::vector<std::vector<CMatrix>> povms) {
  if (std::abs(psi.norm() - 1.0) > kDefaultTol)
    throw ValidationError({"pure state has norm " + fmt(psi.norm())});
  return Realization(projector(psi), std::move(hamiltonian), std::move(povms));
}

std::optional<CVector> Realization::pure_state(double tol) const {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (state_ + state_.adjoint()));
  const auto n = es.eigenvalues().size();
  if (n == 0) return std::nullopt;
  if (std::abs(es.eigenvalues()(n - 1) - 1.0) > tol) return std::nullopt;
  return CVector(es.eigenvectors().col(n - 1));
}

std::vector<std::string> Realization::violations(double tol) const {
  std::vector<std::string> v;
  const auto d = hamiltonian_.rows();
  if (hamiltonian_.cols() != d) v.push_back("hamiltonian is not square");
  if (state_.rows() != d || state_.cols() != d) v.push_back("state dimension mismatch");
  if (!v.empty()) return v;
  if (!is_hermitian(state_, tol)) v.push_back("state not Hermitian");
  if (double e = min_eigenvalue(state_); e < -tol) v.push_back("state not PSD (min eig " + fmt(e) + ")");
  if (double tr = state_.trace().real(); std::abs(tr - 1.0) > tol)
    v.push_back("state trace " + fmt(tr) + " != 1");
  if (!is_hermitian(hamiltonian_, tol)) v.push_back("hamiltonian not Hermitian");
  if (double e = min_eigenvalue(hamiltonian_); e < -tol)
    v.push_back("hamiltonian has negative eigenvalue " + fmt(e));
  for (std::size_t x = 0; x < povms_.size(); ++x) {
    const std::string tag = "povm[" + std::to_string(x) + "]";
    if (povms_[x].empty()) {
      v.push_back(tag + " has no outcomes");
      continue;
    }
    CMatrix sum = CMatrix::Zero(d, d);
    for (std::size_t a = 0; a < povms_[x].size(); ++a) {
      const auto& m = povms_[x][a];
      if (m.rows() != d || m.cols() != d) {
        v.push_back(tag + "[" + std::to_string(a) + "] dimension mismatch");
        return v;
      }
      if (!is_hermitian(m, tol)) v.push_back(tag + "[" + std::to_string(a) + "] not Hermitian");
      if (double e = min_eigenvalue(m); e < -tol)
        v.push_back(tag + "[" + std::to_string(a) + "] not PSD (min eig " + fmt(e) + ")");
      sum += m;
    }
    const double err = d ? (sum - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() : 0.0;
    if (err > tol) v.push_back(tag + " does not sum to identity (error " + fmt(err) + ")");
  }
  return v;
}

void Realization::require_valid(double tol) const {
  if (auto v = violations(tol); !v.empty()) throw ValidationError(std::move(v));
}

std::string describe(const EnergyConstraint& c) {
  return std::visit(
      [](const auto& k) -> std::string {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, HardConstraint>) return "hard(E+=" + fmt(k.e_plus) + ")";
        else if constexpr (std::is_same_v<T, SoftConstraint>)
          return "soft(E+=" + fmt(k.e_plus) + ", eps=" + fmt(k.epsilon) + ")";
        else return "average(Ebar=" + fmt(k.e_bar) + ")";
      },
      c);
}

void check_constraint(const EnergyConstraint& c) {
  std::vector<std::string> v;
  if (auto* h = std::get_if<HardConstraint>(&c); h && !(h->e_plus > 0)) v.push_back("E+ must be > 0");
  if (auto* s = std::get_if<SoftConstraint>(&c)) {
    if (!(s->e_plus > 0)) v.push_back("E+ must be > 0");
    if (!(s->epsilon >= 0 && s->epsilon <= 1)) v.push_back("epsilon must lie in [0,1]");
  }
  if (auto* a = std::get_if<AverageConstraint>(&c); a && !(a->e_bar > 0)) v.push_back("Ebar must be > 0");
  if (!v.empty()) throw ValidationError(std::move(v));
}

Evolution::Evolution(const Realization& r) {
  r.require_valid();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (r.hamiltonian() + r.hamiltonian().adjoint()));
  energies_ = es.eigenvalues();
  basis_ = es.eigenvectors();
  state_eb_ = basis_.adjoint() * r.state() * basis_;
  povm_eb_.resize(r.settings());
  for (int x = 0; x < r.settings(); ++x)
    for (const auto& m : r.povms()[x]) povm_eb_[x].push_back(basis_.adjoint() * m * basis_);
}

RVector Evolution::averaged_column(int x, double t, double sigma) const {
  if (sigma < 0) throw PreconditionError("time jitter must be nonnegative");
  const auto d = energies_.size();
  CMatrix rho_t(d, d);
  for (Eigen::Index k = 0; k < d; ++k)
    for (Eigen::Index l = 0; l < d; ++l) {
      const double w = energies_(k) - energies_(l);
      rho_t(k, l) = state_eb_(k, l) * std::polar(std::exp(-0.5 * w * w * sigma * sigma), -w * t);
    }
  const auto& povm = povm_eb_.at(x);
  RVector p(povm.size());
  for (std::size_t a = 0; a < povm.size(); ++a)
    p(a) = (rho_t.cwiseProduct(povm[a].transpose())).sum().real();
  return p;
}

RVector Evolution::datapoint_column(int x, double t) const { return averaged_column(x, t, 0.0); }

Datapoint Evolution::datapoint(double t) const {
  const int settings = static_cast<int>(povm_eb_.size());
  const int outcomes = settings ? static_cast<int>(povm_eb_.front().size()) : 0;
  Datapoint dp = Datapoint::Zero(settings, outcomes);
  for (int x = 0; x < settings; ++x) {
    RVector col = datapoint_column(x, t);
    if (col.size() != outcomes) throw PreconditionError("settings with differing outcome counts");
    dp.row(x) = col.transpose();
  }
  return dp;
}

CVector Evolution::evolved(const CVector& psi, double t) const {
  CVector c = basis_.adjoint() * psi;
  for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::polar(1.0, -energies_(k) * t);
  return basis_ * c;
}

RVector simulate_datapoint(const Realization& r, int x, double t) {
  return Evolution(r).datapoint_column(x, t);
}

Dataset simulate_dataset(const Realization& r, const std::vector<double>& times) {
  Dataset d;
  if (times.empty()) return d;
  Evolution ev(r);
  d.times = times;
  for (double t : times) d.points.push_back(ev.datapoint(t));
  return d;
}

RVector gaussian_time_average(const Realization& r, int x, double t_mean, double sigma) {
  return Evolution(r).averaged_column(x, t_mean, sigma);
}

double high_energy_weight(const Realization& r, double threshold) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (r.hamiltonian() + r.hamiltonian().adjoint()));
  CMatrix rho = es.eigenvectors().adjoint() * r.state() * es.eigenvectors();
  double w = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
    if (es.eigenvalues()(k) >= threshold) w += rho(k, k).real();
  return w;
}

EnergyReport validate_realization(const Realization& r, const EnergyConstraint& c, double tol) {
  EnergyReport rep;
  auto add = [&](std::string name, double measured, double limit, bool pass) {
    rep.checks.push_back({std::move(name), measured, limit, pass});
    rep.pass = rep.pass && pass;
  };
  const auto structural = r.violations(tol);
  add("structure", static_cast<double>(structural.size()), 0.0, structural.empty());
  if (!structural.empty()) return rep;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (r.hamiltonian() + r.hamiltonian().adjoint()),
                                            Eigen::EigenvaluesOnly);
  const RVector& e = es.eigenvalues();
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, HardConstraint>) {
          const double lo = e.size() ? e.minCoeff() : 0.0;
          const double hi = e.size() ? e.maxCoeff() : 0.0;
          add("min_energy", lo, 0.0, lo >= -tol);
          add("max_energy", hi, k.e_plus, hi <= k.e_plus + tol);
        } else if constexpr (std::is_same_v<T, SoftConstraint>) {
          const double w = high_energy_weight(r, k.e_plus - 1e-12);
          add("high_energy_weight", w, k.epsilon, w <= k.epsilon + tol);
        } else {
          const double mean = (r.state() * r.hamiltonian()).trace().real();
          add("mean_energy", mean, k.e_bar, mean <= k.e_bar + tol);
        }
      },
      c);
  return rep;
}

Realization purify(const Realization& r, double tol) {
  r.require_valid(tol);
  if (r.pure_state(tol)) return r;
  const int d = r.dim();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (r.state() + r.state().adjoint()));
  CVector psi = CVector::Zero(d * d);
  for (int i = 0; i < d; ++i) {
    const double lam = std::max(es.eigenvalues()(i), 0.0);
    CVector e = CVector::Zero(d);
    e(i) = 1.0;
    psi += std::sqrt(lam) * kron(es.eigenvectors().col(i), e);
  }
  psi.normalize();
  const CMatrix id = CMatrix::Identity(d, d);
  std::vector<std::vector<CMatrix>> povms(r.settings());
  for (int x = 0; x < r.settings(); ++x)
    for (const auto& m : r.povms()[x]) povms[x].push_back(kron(m, id));
  return Realization::pure(psi, kron(r.hamiltonian(), id), std::move(povms));
}

Realization direct_sum_mixture(const Realization& a, const Realization& b, double lambda) {
  if (a.settings() != b.settings()) throw PreconditionError("setting counts differ");
  std::vector<std::vector<CMatrix>> povms(a.settings());
  for (int x = 0; x < a.settings(); ++x) {
    if (a.outcomes(x) != b.outcomes(x)) throw PreconditionError("outcome counts differ");
    for (int o = 0; o < a.outcomes(x); ++o) povms[x].push_back(direct_sum(a.povm(x, o), b.povm(x, o)));
  }
  return Realization(direct_sum(lambda * a.state(), (1.0 - lambda) * b.state()),
                     direct_sum(a.hamiltonian(), b.hamiltonian()), std::move(povms));
}

void check_dataset(const Dataset& d, double tol) {
  std::vector<std::string> v;
  if (d.times.size() != d.points.size()) v.push_back("times and datapoints differ in length");
  for (std::size_t j = 1; j < d.times.size(); ++j)
    if (!(d.times[j] > d.times[j - 1])) v.push_back("times not strictly increasing");
  for (std::size_t j = 0; j < d.points.size(); ++j) {
    const auto& p = d.points[j];
    if (p.size() && (p.minCoeff() < -tol || p.maxCoeff() > 1 + tol))
      v.push_back("datapoint " + std::to_string(j) + " has entries outside [0,1]");
    for (Eigen::Index x = 0; x < p.rows(); ++x)
      if (std::abs(p.row(x).sum() - 1.0) > tol)
        v.push_back("datapoint " + std::to_string(j) + " setting " + std::to_string(x) +
                    " does not sum to 1");
  }
  if (!v.empty()) throw ValidationError(std::move(v));
}

void check_noisy_dataset(const NoisyDataset& nd, double tol) {
  check_dataset(nd.estimates, tol);
  std::vector<std::string> v;
  if (nd.delta.cols() != static_cast<Eigen::Index>(nd.estimates.size()))
    v.push_back("delta column count differs from the number of times");
  for (const auto& p : nd.estimates.points)
    if (p.rows() != nd.delta.rows()) v.push_back("delta row count differs from the number of settings");
  if (nd.delta.size() && nd.delta.minCoeff() < 0) v.push_back("negative delta");
  if (!v.empty()) throw ValidationError(std::move(v));
}

FitReport fit_check(const Dataset& d, const NoisyDataset& nd, double tol) {
  const auto& est = nd.estimates;
  if (d.size() != est.size()) throw ValidationError({"dataset length differs from estimates"});
  FitReport rep;
  rep.violation = RMatrix::Zero(nd.delta.rows(), nd.delta.cols());
  rep.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < d.size(); ++j) {
    const auto& p = d.points[j];
    const auto& q = est.points[j];
    if (p.rows() != q.rows() || p.cols() != q.cols() || p.rows() != nd.delta.rows())
      throw ValidationError({"datapoint shape mismatch at time index " + std::to_string(j)});
    if (std::abs(d.times[j] - est.times[j]) > tol)
      throw ValidationError({"time mismatch at index " + std::to_string(j)});
    for (Eigen::Index x = 0; x < p.rows(); ++x) {
      const double v = (p.row(x) - q.row(x)).cwiseAbs().sum() - nd.delta(x, j);
      rep.violation(x, j) = v;
      rep.max_violation = std::max(rep.max_violation, v);
    }
  }
  if (d.size() == 0) rep.max_violation = 0.0;
  rep.fits = rep.max_violation <= tol;
  return rep;
}

}  // namespace qextrap
