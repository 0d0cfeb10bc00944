// qextrap: simulate datasets, solve extrapolation intervals, check suite phenomena.
#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qextrap/error.hpp"
#include "qextrap/extrapolation.hpp"
#include "qextrap/io.hpp"

using namespace qextrap;
using io::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kInfeasible = 2, kSolverFailure = 3, kTagFailure = 4 };

struct Common {
  std::string out;
  std::string backend;
  int threads = 0;
  double tol = 0.0;
  bool verbose = false;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError({path + ": " + e.what()});
  }
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw PreconditionError("cannot write " + c.out);
  f << text;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    double x = 0;
    auto res = std::from_chars(item.data(), item.data() + item.size(), x);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size())
      throw ValidationError({"cannot parse number '" + item + "'"});
    v.push_back(x);
  }
  return v;
}

std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct Runtime {
  std::unique_ptr<conic::Backend> backend;
  ExtrapolationOptions opt;
};

Runtime runtime(const Common& c, conic::SolverOptions solver) {
  Runtime rt;
  rt.backend = conic::make_backend(c.backend);
  if (c.tol > 0) solver.tol_primal = solver.tol_dual = solver.tol_gap = c.tol;
  solver.threads = c.threads;
  solver.verbose = c.verbose;
  rt.opt.solver = solver;
  rt.opt.backend = rt.backend.get();
  return rt;
}

int interval_exit(const Interval& iv) {
  if (iv.optimal()) return kOk;
  return iv.infeasible() ? kInfeasible : kSolverFailure;
}

int cmd_simulate(const Common& c, const std::string& realization, const std::string& suite, const std::string& params,
                 int index, const std::string& times_arg, const std::string& config) {
  Realization r;
  if (!realization.empty() == !suite.empty()) throw ValidationError({"give exactly one of --realization and --suite"});
  if (!realization.empty()) {
    r = io::realization_from_json(read_json_file(realization));
  } else {
    auto s = io::registry_suite(suite, params.empty() ? json::object() : json::parse(params));
    if (index < 0 || index >= static_cast<int>(s.realizations.size()))
      throw ValidationError({"--index: suite " + s.label + " has " + std::to_string(s.realizations.size()) +
                             " realizations"});
    r = s.realizations[index];
  }
  std::vector<double> times;
  if (!config.empty()) times = io::data_times(io::parse_config(read_json_file(config)));
  else times = parse_list(times_arg);
  emit(c, io::dataset_csv(simulate_dataset(r, times)));
  return kOk;
}

int cmd_extrapolate(const Common& c, const std::string& config) {
  const auto cfg = io::parse_config(read_json_file(config));
  std::vector<std::string> warnings;
  const auto problem = io::to_problem(cfg, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  const auto rt = runtime(c, cfg.solver);
  const auto iv = solve_interval(problem, rt.opt);
  json j = io::interval_json(iv);
  j["tau"] = cfg.tau;
  j["backend"] = rt.backend->name();
  if (iv.delta_floored) std::cerr << "note: zero error bars raised to " << kDeltaFloor << "\n";
  emit(c, j.dump(2) + "\n");
  if (!iv.optimal()) std::cerr << "error: " << (iv.infeasible() ? "no relaxation member fits the data" : "solver failure") << "\n";
  return interval_exit(iv);
}

int cmd_phenomena(const Common& c, const std::string& label, const std::string& params, int m, double threshold) {
  const json pj = params.empty() ? json::object() : json::parse(params);
  std::vector<NamedSuite> suites;
  if (label == "aha") {
    suites.push_back(io::registry_suite("aha.first", pj));
    suites.push_back(io::registry_suite("aha.second", pj));
    suites.push_back(io::registry_suite("aha.joint", pj));
  } else if (label == "D") {
    suites.push_back(io::registry_suite("D", pj));
  } else {
    suites.push_back(io::registry_suite(label, pj));
  }
  const auto rt = runtime(c, {});
  json report = json::array();
  bool all = true;
  for (const auto& s : suites) {
    for (const auto& t : check_suite_markers(s, m, threshold, rt.opt)) {
      report.push_back({{"suite", s.label}, {"tag", t.name}, {"pass", t.pass}, {"detail", t.detail}});
      all = all && t.pass;
      std::cerr << (t.pass ? "PASS " : "FAIL ") << s.label << " " << t.name << " (" << t.detail << ")\n";
    }
  }
  emit(c, json{{"m", m}, {"threshold", threshold}, {"checks", report}, {"pass", all}}.dump(2) + "\n");
  return all ? kOk : kTagFailure;
}

int cmd_sweep(const Common& c, const std::string& config, const std::string& axis, const std::string& grid) {
  const auto cfg = io::parse_config(read_json_file(config));
  if (axis != "m" && axis != "k" && axis != "tau" && axis != "delta")
    throw ValidationError({"--axis: expected m, k, tau or delta"});
  const auto values = parse_list(grid);
  struct Row {
    Interval iv;
    std::string error;
  };
  std::vector<Row> rows(values.size());
  const auto rt = runtime(c, cfg.solver);
  auto run = [&](std::size_t i) {
    io::ScenarioConfig v = cfg;
    const double g = values[i];
    if (axis == "m" || axis == "k") {
      if (g != std::floor(g) || g < 1) throw ValidationError({"--grid: " + axis + " values must be positive integers"});
      if (axis == "m") v.m = static_cast<int>(g);
      else v.moment_order = static_cast<int>(g);
    } else if (axis == "tau") {
      v.tau = g;
    } else {
      v.delta.setConstant(g);
    }
    rows[i].iv = solve_interval(io::to_problem(v), rt.opt);
  };
  // Grid points are independent; rows keep grid order.
#pragma omp parallel for schedule(dynamic) if (c.threads > 1)
  for (std::size_t i = 0; i < values.size(); ++i) {
    try {
      run(i);
    } catch (const std::exception& e) {
      rows[i].error = e.what();
    }
  }
  std::string csv = axis + ",mu_minus,mu_plus,width,status\n";
  int code = kOk;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!rows[i].error.empty()) throw ValidationError({"grid point " + num(values[i]) + ": " + rows[i].error});
    const auto& iv = rows[i].iv;
    const std::string status = iv.optimal() ? "optimal" : iv.infeasible() ? "infeasible" : "solver-failure";
    if (iv.optimal()) csv += num(values[i]) + "," + num(iv.lower) + "," + num(iv.upper) + "," + num(iv.width()) + "," + status + "\n";
    else csv += num(values[i]) + ",,,," + status + "\n";
    code = std::max(code, interval_exit(iv));
  }
  emit(c, csv);
  return code;
}

int cmd_dump(const Common& c, const std::string& config, const std::string& sense) {
  const auto cfg = io::parse_config(read_json_file(config));
  const auto problem = io::to_problem(cfg);
  RelaxationSpec spec = problem.relaxation;
  auto h = build_model(spec, problem.scenario);
  add_fit_constraints(h, problem.data, kDeltaFloor);
  conic::LinearExpr target;
  for (int x = 0; x < cfg.settings; ++x)
    for (int a = 0; a < cfg.outcomes; ++a)
      if (cfg.objective(x, a) != 0.0) target += cfg.objective(x, a) * h.value(x, a, h.tau_index());
  if (sense != "min" && sense != "max") throw ValidationError({"--sense: expected min or max"});
  h.program.set_objective(sense == "min" ? conic::Sense::Minimize : conic::Sense::Maximize, target);
  emit(c, conic::dump_standard_form(h.program));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extrapolation intervals for quantum time series under energy constraints"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--out", common.out, "Write the result here instead of stdout");
  app.add_option("--backend", common.backend, "Solver backend (ipm, ipm-serial); default reads QEXTRAP_BACKEND");
  app.add_option("--threads", common.threads, "OpenMP threads, 0 keeps the default")->check(CLI::NonNegativeNumber);
  app.add_option("--tol", common.tol, "Solver tolerance for residuals and gap")->check(CLI::PositiveNumber);
  app.add_flag("--verbose", common.verbose, "Print solver iterations to stderr");

  std::string config, realization, suite, params, times, axis, grid, sense = "max", label;
  int index = 0, m = 16;
  double threshold = 0.05;

  auto* sim = app.add_subcommand("simulate", "Simulate a realization at the given times (CSV t,x,a,p)");
  sim->add_option("--realization", realization, "Realization JSON file");
  sim->add_option("--suite", suite, "Registry suite label");
  sim->add_option("--params", params, "Suite parameters as a JSON object");
  sim->add_option("--index", index, "Realization index within the suite");
  sim->add_option("--times", times, "Comma-separated times");
  sim->add_option("--config", config, "Take the times from a scenario config");

  auto* ext = app.add_subcommand("extrapolate", "Solve the extrapolation interval of a scenario config");
  ext->add_option("--config", config, "Scenario config")->required();

  auto* phe = app.add_subcommand("phenomena", "Check the expected behaviour tags of a registry suite");
  phe->add_option("label", label, "Suite label (fogbank, aha, D, D3, sin, ...)")->required();
  phe->add_option("--params", params, "Suite parameters as a JSON object");
  phe->add_option("--m", m, "Relaxation order for outer bounds")->check(CLI::PositiveNumber);
  phe->add_option("--threshold", threshold, "Width threshold for approximate full certainty");

  auto* swp = app.add_subcommand("sweep", "Solve a config over a grid of m, k, tau or delta (CSV)");
  swp->add_option("--config", config, "Scenario config")->required();
  swp->add_option("--axis", axis, "m, k, tau or delta")->required();
  swp->add_option("--grid", grid, "Comma-separated grid values");

  auto* dmp = app.add_subcommand("dump", "Write the standard form of the relaxation for a config");
  dmp->add_option("--config", config, "Scenario config")->required();
  dmp->add_option("--sense", sense, "min or max");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*sim) return cmd_simulate(common, realization, suite, params, index, times, config);
    if (*ext) return cmd_extrapolate(common, config);
    if (*phe) return cmd_phenomena(common, label, params, m, threshold);
    if (*swp) return cmd_sweep(common, config, axis, grid);
    if (*dmp) return cmd_dump(common, config, sense);
  } catch (const ValidationError& e) {
    for (const auto& v : e.violations()) std::cerr << "error: " << v << "\n";
    return kUsage;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverFailure;
  }
  return kUsage;
}
