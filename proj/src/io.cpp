#include "qextrap/io.hpp"

#include <charconv>
#include <cmath>
#include <set>

#include "qextrap/error.hpp"

namespace qextrap::io {

namespace {

// Collects schema problems so that one run reports all of them.
class Checker {
 public:
  void fail(const std::string& path, const std::string& msg) { errors_.push_back((path.empty() ? "/" : path) + ": " + msg); }
  bool ok() const { return errors_.empty(); }
  void raise() const {
    if (!errors_.empty()) throw ValidationError(errors_);
  }

  const json* member(const json& obj, const std::string& path, const char* key, bool required) {
    if (!obj.is_object()) return nullptr;
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) fail(path + "/" + key, "missing");
      return nullptr;
    }
    return &*it;
  }

  void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) {
      fail(path, "expected an object");
      return;
    }
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!allowed.count(it.key())) fail(path + "/" + it.key(), "unknown key");
  }

  std::optional<double> number(const json* j, const std::string& path) {
    if (!j) return std::nullopt;
    if (!j->is_number()) {
      fail(path, "expected a number");
      return std::nullopt;
    }
    const double v = j->get<double>();
    if (!std::isfinite(v)) {
      fail(path, "must be finite");
      return std::nullopt;
    }
    return v;
  }

  std::optional<int> integer(const json* j, const std::string& path) {
    if (!j) return std::nullopt;
    if (!j->is_number_integer()) {
      fail(path, "expected an integer");
      return std::nullopt;
    }
    return j->get<int>();
  }

  template <class T, class F>
  std::vector<T> array(const json* j, const std::string& path, F&& each) {
    std::vector<T> out;
    if (!j) return out;
    if (!j->is_array()) {
      fail(path, "expected an array");
      return out;
    }
    for (std::size_t i = 0; i < j->size(); ++i) {
      auto v = each((*j)[i], path + "/" + std::to_string(i));
      if (v) out.push_back(*v);
    }
    return out;
  }

  std::vector<double> numbers(const json* j, const std::string& path) {
    return array<double>(j, path, [&](const json& e, const std::string& p) { return number(&e, p); });
  }
  std::vector<int> integers(const json* j, const std::string& path) {
    return array<int>(j, path, [&](const json& e, const std::string& p) { return integer(&e, p); });
  }

 private:
  std::vector<std::string> errors_;
};

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void parse_times(Checker& ck, const json& j, TimesSpec& t) {
  const std::string path = "/times";
  ck.only_keys(j, path, {"values", "lattice", "structure"});
  if (!j.is_object()) return;
  const int present = static_cast<int>(j.contains("values")) + j.contains("lattice") + j.contains("structure");
  if (present != 1) {
    ck.fail(path, "exactly one of values, lattice, structure is required");
    return;
  }
  if (j.contains("values")) {
    t.kind = TimesSpec::Kind::Values;
    t.values = ck.numbers(&j["values"], path + "/values");
  } else if (j.contains("lattice")) {
    t.kind = TimesSpec::Kind::Lattice;
    const auto& l = j["lattice"];
    const std::string lp = path + "/lattice";
    ck.only_keys(l, lp, {"step", "indices", "offset"});
    auto step = ck.number(ck.member(l, lp, "step", true), lp + "/step");
    auto idx = ck.integers(ck.member(l, lp, "indices", true), lp + "/indices");
    auto off = ck.number(ck.member(l, lp, "offset", false), lp + "/offset");
    if (step && !(*step > 0)) ck.fail(lp + "/step", "must be positive");
    if (step && *step > 0) t.structure = TimeStructure::lattice(*step, idx, off.value_or(0.0));
  } else {
    t.kind = TimesSpec::Kind::Structure;
    const auto& s = j["structure"];
    const std::string sp = path + "/structure";
    ck.only_keys(s, sp, {"generators", "coeffs", "offset"});
    t.structure.generators = ck.numbers(ck.member(s, sp, "generators", true), sp + "/generators");
    const json* coeffs = ck.member(s, sp, "coeffs", true);
    if (coeffs && coeffs->is_array()) {
      for (std::size_t i = 0; i < coeffs->size(); ++i) {
        const std::string rp = sp + "/coeffs/" + std::to_string(i);
        auto row = ck.integers(&(*coeffs)[i], rp);
        if (row.size() != t.structure.generators.size()) ck.fail(rp, "needs one coefficient per generator");
        t.structure.coeffs.push_back(row);
      }
    } else if (coeffs) {
      ck.fail(sp + "/coeffs", "expected an array");
    }
    t.structure.offset = ck.number(ck.member(s, sp, "offset", false), sp + "/offset").value_or(0.0);
    if (t.structure.generators.empty()) ck.fail(sp + "/generators", "needs at least one generator");
  }
}

RMatrix parse_delta(Checker& ck, const json* j, int settings, int n_times) {
  RMatrix d = RMatrix::Zero(settings, n_times);
  const std::string path = "/data/delta";
  if (!j) return d;
  if (j->is_number()) {
    auto v = ck.number(j, path);
    if (v) d.setConstant(*v);
  } else if (j->is_array()) {
    if (static_cast<int>(j->size()) != settings) ck.fail(path, "needs one row per setting");
    for (int x = 0; x < settings && x < static_cast<int>(j->size()); ++x) {
      auto row = ck.numbers(&(*j)[x], path + "/" + std::to_string(x));
      if (static_cast<int>(row.size()) != n_times) {
        ck.fail(path + "/" + std::to_string(x), "needs one entry per time");
        continue;
      }
      for (int t = 0; t < n_times; ++t) d(x, t) = row[t];
    }
  } else {
    ck.fail(path, "expected a number or a settings × times array");
  }
  for (int x = 0; x < d.rows(); ++x)
    for (int t = 0; t < d.cols(); ++t)
      if (d(x, t) < 0) ck.fail(path, "error bars must be nonnegative");
  return d;
}

double tau_lattice_index(const TimeStructure& s, double tau) {
  return (tau - s.offset) / s.generators.at(0);
}

}  // namespace

std::vector<double> data_times(const ScenarioConfig& c) {
  return c.times.kind == TimesSpec::Kind::Values ? c.times.values : c.times.structure.times();
}

ScenarioConfig parse_config(const json& j) {
  Checker ck;
  ScenarioConfig c;
  ck.only_keys(j, "", {"scenario", "times", "data", "constraint", "relaxation", "target", "solver"});
  if (!j.is_object()) ck.raise();

  if (const json* s = ck.member(j, "", "scenario", true)) {
    ck.only_keys(*s, "/scenario", {"settings", "outcomes"});
    c.settings = ck.integer(ck.member(*s, "/scenario", "settings", true), "/scenario/settings").value_or(1);
    c.outcomes = ck.integer(ck.member(*s, "/scenario", "outcomes", true), "/scenario/outcomes").value_or(2);
    if (c.settings < 1) ck.fail("/scenario/settings", "must be at least 1");
    if (c.outcomes < 2) ck.fail("/scenario/outcomes", "must be at least 2");
    c.settings = std::max(c.settings, 1);
    c.outcomes = std::max(c.outcomes, 2);
  }
  if (const json* t = ck.member(j, "", "times", true)) parse_times(ck, *t, c.times);
  const int n_times = static_cast<int>(data_times(c).size());

  if (const json* d = ck.member(j, "", "data", true)) {
    ck.only_keys(*d, "/data", {"estimates", "delta"});
    const json* est = ck.member(*d, "/data", "estimates", true);
    if (est && !est->is_array()) ck.fail("/data/estimates", "expected an array");
    if (est && est->is_array()) {
      if (static_cast<int>(est->size()) != n_times) ck.fail("/data/estimates", "needs one datapoint per time");
      for (std::size_t jt = 0; jt < est->size(); ++jt) {
        const std::string pp = "/data/estimates/" + std::to_string(jt);
        Datapoint dp = Datapoint::Zero(c.settings, c.outcomes);
        const json& pt = (*est)[jt];
        if (!pt.is_array() || static_cast<int>(pt.size()) != c.settings) {
          ck.fail(pp, "needs one row per setting");
        } else {
          for (int x = 0; x < c.settings; ++x) {
            auto row = ck.numbers(&pt[x], pp + "/" + std::to_string(x));
            if (static_cast<int>(row.size()) != c.outcomes) {
              ck.fail(pp + "/" + std::to_string(x), "needs one probability per outcome");
              continue;
            }
            for (int a = 0; a < c.outcomes; ++a) dp(x, a) = row[a];
          }
        }
        c.estimates.push_back(dp);
      }
    }
    c.delta = parse_delta(ck, ck.member(*d, "/data", "delta", true), c.settings, n_times);
  }

  if (const json* k = ck.member(j, "", "constraint", true)) {
    ck.only_keys(*k, "/constraint", {"type", "E_plus", "epsilon", "E_bar"});
    const json* type = ck.member(*k, "/constraint", "type", true);
    const std::string ty = type && type->is_string() ? type->get<std::string>() : "";
    auto need = [&](const char* key) {
      return ck.number(ck.member(*k, "/constraint", key, true), std::string("/constraint/") + key).value_or(0.0);
    };
    if (ty == "hard") {
      c.constraint = HardConstraint{need("E_plus")};
    } else if (ty == "soft") {
      c.constraint = SoftConstraint{need("E_plus"), need("epsilon")};
    } else if (ty == "average") {
      c.constraint = AverageConstraint{need("E_bar")};
    } else if (type) {
      ck.fail("/constraint/type", "expected hard, soft or average");
    }
    try {
      check_constraint(c.constraint);
    } catch (const ValidationError& e) {
      for (const auto& v : e.violations()) ck.fail("/constraint", v);
    }
  }

  if (const json* r = ck.member(j, "", "relaxation", false)) {
    const std::string rp = "/relaxation";
    ck.only_keys(*r, rp, {"m", "moment_order", "decay_model", "energies", "E_plus"});
    c.m = ck.integer(ck.member(*r, rp, "m", false), rp + "/m").value_or(8);
    if (c.m < 1) ck.fail(rp + "/m", "must be at least 1");
    c.moment_order = ck.integer(ck.member(*r, rp, "moment_order", false), rp + "/moment_order");
    if (c.moment_order && *c.moment_order < 1) ck.fail(rp + "/moment_order", "must be at least 1");
    if (const json* dm = ck.member(*r, rp, "decay_model", false)) {
      if (!dm->is_string()) ck.fail(rp + "/decay_model", "expected a string");
      else c.decay_model = dm->get<std::string>();
      if (c.decay_model != "equal_diag" && c.decay_model != "toeplitz" && c.decay_model != "moment")
        ck.fail(rp + "/decay_model", "expected equal_diag, toeplitz or moment");
    }
    c.energies = ck.numbers(ck.member(*r, rp, "energies", false), rp + "/energies");
    c.cutoff = ck.number(ck.member(*r, rp, "E_plus", false), rp + "/E_plus");
  }

  c.objective = RMatrix::Zero(c.settings, c.outcomes);
  if (const json* t = ck.member(j, "", "target", true)) {
    ck.only_keys(*t, "/target", {"tau", "objective", "tau_coeffs"});
    c.tau = ck.number(ck.member(*t, "/target", "tau", true), "/target/tau").value_or(0.0);
    if (t->contains("tau_coeffs")) c.times.tau_coeffs = ck.integers(&(*t)["tau_coeffs"], "/target/tau_coeffs");
    const json* obj = ck.member(*t, "/target", "objective", false);
    if (obj && !obj->is_array()) ck.fail("/target/objective", "expected an array of {x, a, coef}");
    if (obj && obj->is_array()) {
      for (std::size_t i = 0; i < obj->size(); ++i) {
        const std::string op = "/target/objective/" + std::to_string(i);
        const json& e = (*obj)[i];
        ck.only_keys(e, op, {"x", "a", "coef"});
        auto x = ck.integer(ck.member(e, op, "x", true), op + "/x");
        auto a = ck.integer(ck.member(e, op, "a", true), op + "/a");
        auto f = ck.number(ck.member(e, op, "coef", false), op + "/coef");
        if (x && (*x < 1 || *x > c.settings)) ck.fail(op + "/x", "setting out of range (1-based)");
        else if (a && (*a < 1 || *a > c.outcomes)) ck.fail(op + "/a", "outcome out of range (1-based)");
        else if (x && a) c.objective(*x - 1, *a - 1) += f.value_or(1.0);
      }
    }
  }

  if (const json* s = ck.member(j, "", "solver", false)) {
    ck.only_keys(*s, "/solver", {"tolerances", "max_iterations"});
    if (const json* tol = ck.member(*s, "/solver", "tolerances", false)) {
      const std::string tp = "/solver/tolerances";
      ck.only_keys(*tol, tp, {"primal", "dual", "gap"});
      c.solver.tol_primal = ck.number(ck.member(*tol, tp, "primal", false), tp + "/primal").value_or(c.solver.tol_primal);
      c.solver.tol_dual = ck.number(ck.member(*tol, tp, "dual", false), tp + "/dual").value_or(c.solver.tol_dual);
      c.solver.tol_gap = ck.number(ck.member(*tol, tp, "gap", false), tp + "/gap").value_or(c.solver.tol_gap);
    }
    c.solver.max_iterations =
        ck.integer(ck.member(*s, "/solver", "max_iterations", false), "/solver/max_iterations").value_or(c.solver.max_iterations);
  }
  ck.raise();
  return c;
}

json to_json(const ScenarioConfig& c) {
  json j;
  j["scenario"] = {{"settings", c.settings}, {"outcomes", c.outcomes}};
  switch (c.times.kind) {
    case TimesSpec::Kind::Values:
      j["times"] = {{"values", c.times.values}};
      break;
    case TimesSpec::Kind::Lattice: {
      std::vector<int> idx;
      for (const auto& row : c.times.structure.coeffs) idx.push_back(row.at(0));
      j["times"] = {{"lattice",
                     {{"step", c.times.structure.generators.at(0)}, {"indices", idx}, {"offset", c.times.structure.offset}}}};
      break;
    }
    case TimesSpec::Kind::Structure:
      j["times"] = {{"structure",
                     {{"generators", c.times.structure.generators},
                      {"coeffs", c.times.structure.coeffs},
                      {"offset", c.times.structure.offset}}}};
      break;
  }
  json est = json::array();
  for (const auto& p : c.estimates) {
    json rows = json::array();
    for (int x = 0; x < p.rows(); ++x) {
      RVector r = p.row(x).transpose();
      rows.push_back(std::vector<double>(r.data(), r.data() + r.size()));
    }
    est.push_back(rows);
  }
  json delta = json::array();
  for (int x = 0; x < c.delta.rows(); ++x) {
    RVector r = c.delta.row(x).transpose();
    delta.push_back(std::vector<double>(r.data(), r.data() + r.size()));
  }
  j["data"] = {{"estimates", est}, {"delta", delta}};
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, HardConstraint>) j["constraint"] = {{"type", "hard"}, {"E_plus", k.e_plus}};
        else if constexpr (std::is_same_v<T, SoftConstraint>)
          j["constraint"] = {{"type", "soft"}, {"E_plus", k.e_plus}, {"epsilon", k.epsilon}};
        else j["constraint"] = {{"type", "average"}, {"E_bar", k.e_bar}};
      },
      c.constraint);
  json rel = {{"m", c.m}, {"decay_model", c.decay_model}};
  if (c.moment_order) rel["moment_order"] = *c.moment_order;
  if (!c.energies.empty()) rel["energies"] = c.energies;
  if (c.cutoff) rel["E_plus"] = *c.cutoff;
  j["relaxation"] = rel;
  json obj = json::array();
  for (int x = 0; x < c.objective.rows(); ++x)
    for (int a = 0; a < c.objective.cols(); ++a)
      if (c.objective(x, a) != 0.0) obj.push_back({{"x", x + 1}, {"a", a + 1}, {"coef", c.objective(x, a)}});
  j["target"] = {{"tau", c.tau}, {"objective", obj}};
  if (c.times.tau_coeffs) j["target"]["tau_coeffs"] = *c.times.tau_coeffs;
  j["solver"] = {{"tolerances", {{"primal", c.solver.tol_primal}, {"dual", c.solver.tol_dual}, {"gap", c.solver.tol_gap}}},
                 {"max_iterations", c.solver.max_iterations}};
  return j;
}

ExtrapolationProblem to_problem(const ScenarioConfig& c, std::vector<std::string>* warnings) {
  auto warn = [&](std::string s) {
    if (warnings) warnings->push_back(std::move(s));
  };
  ExtrapolationProblem p;
  const auto times = data_times(c);
  p.scenario = {c.settings, c.outcomes, times, c.tau};
  p.data.estimates = {times, c.estimates};
  p.data.delta = c.delta;
  p.objective = c.objective;
  p.relaxation.constraint = c.constraint;
  p.relaxation.m = c.m;
  p.relaxation.moment_order = c.moment_order;
  p.relaxation.energies = c.energies;
  p.relaxation.e_plus = c.cutoff;

  const bool soft = std::holds_alternative<SoftConstraint>(c.constraint);
  if (!soft || c.decay_model == "equal_diag") return p;
  if (c.times.kind == TimesSpec::Kind::Values) {
    warn("raw float times: decay model '" + c.decay_model + "' replaced by equal_diag");
    p.relaxation.decay = DecayMatrixModel::equal_diag();
    return p;
  }
  TimeStructure s = c.times.structure;
  if (c.times.kind == TimesSpec::Kind::Lattice) {
    const double idx = tau_lattice_index(s, c.tau);
    if (std::abs(idx - std::round(idx)) > 1e-9 * std::max(1.0, std::abs(idx)))
      throw ValidationError({"/target/tau: not on the time lattice"});
    s.coeffs.push_back({static_cast<int>(std::lround(idx))});
  } else {
    if (!c.times.tau_coeffs) throw ValidationError({"/target/tau_coeffs: required for decay model " + c.decay_model});
    s.coeffs.push_back(*c.times.tau_coeffs);
    auto all = times;
    all.push_back(c.tau);
    s.check(all);
  }
  if (c.decay_model == "toeplitz") {
    if (!s.is_lattice()) throw ValidationError({"/relaxation/decay_model: toeplitz needs lattice times"});
    p.relaxation.decay = DecayMatrixModel::toeplitz(s);
  } else {
    if (!c.moment_order) throw ValidationError({"/relaxation/moment_order: required for the moment model"});
    p.relaxation.decay = DecayMatrixModel::moment(*c.moment_order, s);
  }
  return p;
}

json complex_to_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (m(r, c).imag() == 0.0) row.push_back(m(r, c).real());
      else row.push_back({m(r, c).real(), m(r, c).imag()});
    }
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::optional<cplx> complex_entry(const json& e) {
  if (e.is_number()) return cplx(e.get<double>(), 0.0);
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
    return cplx(e[0].get<double>(), e[1].get<double>());
  return std::nullopt;
}

CVector complex_vector(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ValidationError({path + ": expected a nonempty array"});
  CVector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    auto z = complex_entry(j[i]);
    if (!z) throw ValidationError({path + "/" + std::to_string(i) + ": expected a number or [re, im]"});
    v(i) = *z;
  }
  return v;
}

}  // namespace

CMatrix complex_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw ValidationError({path + ": expected an array of rows"});
  const auto rows = j.size();
  const auto cols = j[0].size();
  CMatrix m(rows, cols);
  std::vector<std::string> bad;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      bad.push_back(path + "/" + std::to_string(r) + ": rows must have equal length");
      continue;
    }
    for (std::size_t c = 0; c < cols; ++c) {
      auto z = complex_entry(j[r][c]);
      if (!z) bad.push_back(path + "/" + std::to_string(r) + "/" + std::to_string(c) + ": expected a number or [re, im]");
      else m(r, c) = *z;
    }
  }
  if (!bad.empty()) throw ValidationError(bad);
  return m;
}

Realization realization_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError({"/: expected an object"});
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "state" && it.key() != "density" && it.key() != "hamiltonian" && it.key() != "povms")
      throw ValidationError({"/" + it.key() + ": unknown key"});
  if (j.contains("state") == j.contains("density"))
    throw ValidationError({"/: exactly one of state and density is required"});
  if (!j.contains("hamiltonian")) throw ValidationError({"/hamiltonian: missing"});
  if (!j.contains("povms") || !j["povms"].is_array()) throw ValidationError({"/povms: expected an array of POVMs"});
  const CMatrix h = complex_from_json(j["hamiltonian"], "/hamiltonian");
  std::vector<std::vector<CMatrix>> povms;
  for (std::size_t x = 0; x < j["povms"].size(); ++x) {
    const auto& pv = j["povms"][x];
    const std::string px = "/povms/" + std::to_string(x);
    if (!pv.is_array()) throw ValidationError({px + ": expected an array of matrices"});
    povms.emplace_back();
    for (std::size_t a = 0; a < pv.size(); ++a) povms.back().push_back(complex_from_json(pv[a], px + "/" + std::to_string(a)));
  }
  Realization r = j.contains("state") ? Realization::pure(complex_vector(j["state"], "/state"), h, povms)
                                      : Realization(complex_from_json(j["density"], "/density"), h, povms);
  r.require_valid(1e-8);
  return r;
}

json realization_to_json(const Realization& r) {
  json j;
  if (auto psi = r.pure_state()) {
    json v = json::array();
    for (Eigen::Index i = 0; i < psi->size(); ++i) {
      const cplx z = (*psi)(i);
      if (z.imag() == 0.0) v.push_back(z.real());
      else v.push_back({z.real(), z.imag()});
    }
    j["state"] = v;
  } else {
    j["density"] = complex_to_json(r.state());
  }
  j["hamiltonian"] = complex_to_json(r.hamiltonian());
  json povms = json::array();
  for (const auto& pv : r.povms()) {
    json ms = json::array();
    for (const auto& m : pv) ms.push_back(complex_to_json(m));
    povms.push_back(ms);
  }
  j["povms"] = povms;
  return j;
}

std::string dataset_csv(const Dataset& d) {
  std::string out = "t,x,a,p\n";
  for (std::size_t j = 0; j < d.size(); ++j) {
    const auto& p = d.points[j];
    for (int x = 0; x < p.rows(); ++x)
      for (int a = 0; a < p.cols(); ++a)
        out += fmt(d.times[j]) + "," + std::to_string(x + 1) + "," + std::to_string(a + 1) + "," + fmt(p(x, a)) + "\n";
  }
  return out;
}

json interval_json(const Interval& iv) {
  auto side = [](const SolveStats& s) {
    return json{{"status", conic::to_string(s.status)},
                {"iterations", s.iterations},
                {"primal_residual", s.primal_residual},
                {"dual_residual", s.dual_residual},
                {"gap", s.gap},
                {"message", s.message}};
  };
  json j;
  if (iv.optimal()) {
    j["status"] = "optimal";
    j["mu_minus"] = iv.lower;
    j["mu_plus"] = iv.upper;
  } else {
    j["status"] = iv.infeasible() ? "infeasible" : "solver-failure";
    j["mu_minus"] = nullptr;
    j["mu_plus"] = nullptr;
  }
  j["gap_bound"] = iv.gap_bound ? json(*iv.gap_bound) : json(nullptr);
  j["delta_floored"] = iv.delta_floored;
  j["solver_stats"] = {{"min", side(iv.lower_stats)}, {"max", side(iv.upper_stats)}};
  return j;
}

namespace {

class Params {
 public:
  Params(const json& j, std::string label) : j_(j.is_null() ? json::object() : j), label_(std::move(label)) {
    if (!j_.is_object()) throw ValidationError({"/params: expected an object"});
  }
  double number(const char* key, double fallback) {
    used_.insert(key);
    if (!j_.contains(key)) return fallback;
    if (!j_[key].is_number()) throw ValidationError({std::string("/params/") + key + ": expected a number"});
    return j_[key].get<double>();
  }
  int integer(const char* key, int fallback) {
    used_.insert(key);
    if (!j_.contains(key)) return fallback;
    if (!j_[key].is_number_integer()) throw ValidationError({std::string("/params/") + key + ": expected an integer"});
    return j_[key].get<int>();
  }
  std::vector<double> numbers(const char* key, std::vector<double> fallback) {
    used_.insert(key);
    if (!j_.contains(key)) return fallback;
    if (!j_[key].is_array()) throw ValidationError({std::string("/params/") + key + ": expected an array"});
    std::vector<double> v;
    for (const auto& e : j_[key]) {
      if (!e.is_number()) throw ValidationError({std::string("/params/") + key + ": expected numbers"});
      v.push_back(e.get<double>());
    }
    return v;
  }
  void finish() const {
    std::vector<std::string> bad;
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) bad.push_back("/params/" + it.key() + ": not a parameter of " + label_);
    if (!bad.empty()) throw ValidationError(bad);
  }

 private:
  json j_;
  std::string label_;
  std::set<std::string> used_;
};

}  // namespace

std::vector<std::string> registry_labels() {
  return {"D<N>", "fogbank", "aha", "aha.first", "aha.second", "aha.joint", "aha.two_level", "aha.two_level_joint",
          "sin", "superexp", "disc"};
}

NamedSuite registry_suite(const std::string& label, const json& params) {
  Params p(params, label);
  auto done = [&](NamedSuite s) {
    p.finish();
    return s;
  };
  if (!label.empty() && label[0] == 'D') {
    int n = 3;
    if (label.size() > 1) {
      try {
        std::size_t used = 0;
        n = std::stoi(label.substr(1), &used);
        if (used != label.size() - 1) throw std::invalid_argument(label);
      } catch (const std::exception&) {
        throw ValidationError({"/suite: unknown label '" + label + "'"});
      }
    }
    n = p.integer("N", n);
    const double e = p.number("E_plus", 1.0);
    return done(dataset_D(n, e));
  }
  if (label == "fogbank") {
    const double e = p.number("E_plus", 1.0);
    const auto q = p.numbers("q", {1.0 / 3, 1.0 / 3, 1.0 / 3});
    return done(fogbank_suite(e, q));
  }
  if (label.rfind("aha", 0) == 0) {
    const auto a = aha_suite(p.number("E_plus", 1.0));
    if (label == "aha" || label == "aha.joint") return done(a.joint);
    if (label == "aha.first") return done(a.first);
    if (label == "aha.second") return done(a.second);
    if (label == "aha.two_level") return done(a.two_level);
    if (label == "aha.two_level_joint") return done(a.two_level_joint);
  }
  if (label == "sin") {
    const int n = p.integer("n", 4);
    const double t = p.number("T", 1.0);
    return done(realization_problematic_sin(n, t, p.integer("n_times", 4)));
  }
  if (label == "superexp") {
    const double lambda = p.number("lambda", 2.0);
    const int n = p.integer("n", 8);
    const double t = p.number("T", 1.0);
    return done(realization_superexp(lambda, n, t, p.integer("n_times", 4)));
  }
  if (label == "disc") {
    const int m = p.integer("m", 0);
    const double dt = p.number("Delta", 0.05);
    return done(discontinuity_family(m, dt, p.number("E_plus", 0.0)));
  }
  throw ValidationError({"/suite: unknown label '" + label + "'"});
}

}  // namespace qextrap::io
