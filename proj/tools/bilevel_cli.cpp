// Command-line front end: solve | continuation | oracle | rates | list | export.
//
// Exit codes: 0 ok, 2 result reported but the solver did not converge or a
// monotonicity check failed, 1 configuration error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bilevel/bilevel.hpp"

namespace fs = std::filesystem;
using namespace bilevel;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kSoftFail = 2;

struct Common {
  std::string problem;
  std::vector<std::string> extra_problems;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "json";
};

struct Options {
  Common common;
  // solve / continuation
  double epsilon = 0.0;
  std::string sign = "pessimistic";
  int multistarts = 8;
  int lower_starts = 0;
  // continuation / rates
  double eps0 = 0.1;
  double rho = 0.5;
  int k = 12;
  bool limit = false;
  double slack = 2e-4;
  // oracle / rates
  double ygrid = 1e-3;
  double xgrid = 1e-3;
  // rates
  double tau = 0.15;
  double cert_tol = 1e-6;
  int cert_samples = 1000;
  bool json_list = false;
};

Sign parse_sign(const std::string& s) {
  if (s == "pessimistic" || s == "1" || s == "+1") return Sign::pessimistic;
  if (s == "optimistic" || s == "-1") return Sign::optimistic;
  throw Error(Errc::precondition, "sign must be pessimistic or optimistic");
}

void register_files(const std::vector<std::string>& paths) {
  for (const auto& path : paths) register_problem(load_problem_file(path));
}

// A registered name wins; otherwise an existing file is loaded.
BilevelProblem resolve_problem(const Common& c) {
  register_files(c.extra_problems);
  require(!c.problem.empty(), Errc::unknown_problem, "unknown problem ''");
  const auto names = registry_names();
  if (std::find(names.begin(), names.end(), c.problem) != names.end()) return registry_get(c.problem);
  if (fs::is_regular_file(c.problem)) return load_problem_file(c.problem);
  throw Error(Errc::unknown_problem, "unknown problem '" + c.problem + "'");
}

UpperConfig upper_config(const Options& o) {
  UpperConfig cfg;
  cfg.seed = o.common.seed;
  cfg.n_multistarts = o.multistarts;
  cfg.lower_starts = o.lower_starts;
  cfg.validate();
  return cfg;
}

bool wants_json(const Common& c) { return c.format == "json" || c.format == "both"; }
bool wants_csv(const Common& c) { return c.format == "csv" || c.format == "both"; }

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  require(static_cast<bool>(out), Errc::precondition, "cannot write '" + path.string() + "'");
  out << text;
  require(static_cast<bool>(out), Errc::precondition, "write failed for '" + path.string() + "'");
}

fs::path output_dir(const Common& c) {
  fs::path dir(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(fs::is_directory(dir), Errc::precondition, "output directory '" + c.out + "' is not writable");
  return dir;
}

// Without --out, the JSON record (or the CSV for --format csv) goes to stdout.
void emit(const Common& c, const std::string& stem, const json& record, const std::string& csv) {
  const std::string text = record.dump(2) + "\n";
  if (c.out.empty()) {
    std::cout << (c.format == "csv" && !csv.empty() ? csv : text);
    return;
  }
  const fs::path dir = output_dir(c);
  if (wants_json(c)) write_file(dir / (stem + ".json"), text);
  if (wants_csv(c) && !csv.empty()) write_file(dir / (stem + ".csv"), csv);
  std::cout << "wrote " << stem << " to " << dir.string() << "\n";
}

std::string trace_csv(const ContinuationTrace& t) {
  std::ostringstream os;
  write_trace_csv(os, t);
  return os.str();
}

std::string gap_csv(const std::vector<GapRow>& gaps) {
  std::ostringstream os;
  write_gap_csv(os, gaps);
  return os.str();
}

void report_monotone(const MonotoneReport& m, const ContinuationTrace& t) {
  for (int k : m.violations)
    std::cerr << "monotonicity violation at row " << k << ": eps " << t.rows[k].epsilon << ", v "
              << t.rows[k - 1].v << " -> " << t.rows[k].v << "\n";
}

bool all_converged(const ContinuationTrace& t) {
  return std::all_of(t.rows.begin(), t.rows.end(), [](const TraceRow& r) { return r.converged; });
}

int cmd_solve(const Options& o) {
  require(o.epsilon > 0.0, Errc::precondition, "epsilon must be positive");
  const BilevelProblem p = resolve_problem(o.common);
  const UpperConfig cfg = upper_config(o);
  const PenalizedSolution s = solve_penalized(p, o.epsilon, parse_sign(o.sign), cfg);
  ContinuationTrace one{p.name(), parse_sign(o.sign), cfg.seed, {}};
  one.rows.push_back({o.epsilon, s.y, s.selection.x, s.value, s.selection.h_value, s.selection.fw_gap, s.evals,
                      s.converged});
  emit(o.common, "solution", solution_to_json(p.name(), s, cfg), trace_csv(one));
  if (!s.converged) {
    std::cerr << "solver did not converge (fw_gap " << s.selection.fw_gap << ")\n";
    return kSoftFail;
  }
  return kOk;
}

EpsSchedule schedule(const Options& o) {
  EpsSchedule s{o.eps0, o.rho, o.k};
  s.validate();
  return s;
}

int cmd_continuation(const Options& o) {
  if (o.limit) require(o.k >= 3, Errc::precondition, "need k ≥ 3 for limit estimate");
  const EpsSchedule sched = schedule(o);
  const BilevelProblem p = resolve_problem(o.common);
  const UpperConfig cfg = upper_config(o);
  const ContinuationTrace t = run_continuation(p, sched, parse_sign(o.sign), cfg);
  const MonotoneReport mono = check_monotone(t, o.slack);
  json record = trace_to_json(t);
  record["monotone"] = {{"ok", mono.ok}, {"slack", o.slack}, {"violations", mono.violations}};
  if (o.limit) {
    const LimitEstimate lim = limit_estimate(t);
    record["limit"] = {{"v_limit", lim.v_limit}, {"slope", lim.slope}, {"y_limit", to_array(lim.y_limit)},
                       {"x_limit", to_array(lim.x_limit)}};
  }
  emit(o.common, "trace", record, trace_csv(t));
  int code = kOk;
  if (!mono.ok) {
    report_monotone(mono, t);
    code = kSoftFail;
  }
  if (!all_converged(t)) {
    std::cerr << "some continuation rows did not converge\n";
    code = kSoftFail;
  }
  return code;
}

OracleOptions oracle_options(const Options& o) {
  require(o.ygrid > 0.0 && o.xgrid > 0.0, Errc::precondition, "grid steps must be positive");
  OracleOptions opt;
  opt.x_grid_step = o.xgrid;
  return opt;
}

int cmd_oracle(const Options& o) {
  const OracleOptions opt = oracle_options(o);
  const BilevelProblem p = resolve_problem(o.common);
  const OracleSolution sol = solve_three_level(p, o.ygrid, opt);
  json record = oracle_to_json(sol);
  record["seed"] = o.common.seed;
  emit(o.common, "oracle", record, "");
  return kOk;
}

int cmd_rates(const Options& o) {
  const EpsSchedule sched = schedule(o);
  const OracleOptions opt = oracle_options(o);
  const BilevelProblem p = resolve_problem(o.common);
  const UpperConfig cfg = upper_config(o);
  const ContinuationTrace t = run_continuation(p, sched, Sign::pessimistic, cfg);
  const MonotoneReport mono = check_monotone(t, o.slack);
  const OracleSolution oracle = solve_three_level(p, o.ygrid, opt);
  const std::vector<GapRow> gaps = gap_table(oracle, t);
  const RateFit fit = fit_rate(gaps, o.tau);
  const Certificate cert = build_certificate(p, oracle, o.cert_tol, o.cert_samples, o.common.seed);
  const SlopeEstimate slope = strong_slope_lower_bound(p.h(), oracle.y_star, p.C(), 200, o.common.seed);

  json gap_rows = json::array();
  for (const GapRow& g : gaps) gap_rows.push_back({{"epsilon", g.epsilon}, {"gap", g.gap}});
  const json record = {{"schema", "rates-v1"},
                       {"problem", p.name()},
                       {"seed", o.common.seed},
                       {"trace", trace_to_json(t)},
                       {"monotone", {{"ok", mono.ok}, {"slack", o.slack}, {"violations", mono.violations}}},
                       {"oracle", oracle_to_json(oracle)},
                       {"gaps", gap_rows},
                       {"fit", ratefit_to_json(fit)},
                       {"certificate", certificate_to_json(cert)},
                       {"slope", slope_to_json(slope)},
                       {"regime", to_string(assess_regime(fit, slope))}};
  emit(o.common, "rates", record, gap_csv(gaps));
  if (!o.common.out.empty() && wants_csv(o.common)) write_file(output_dir(o.common) / "trace.csv", trace_csv(t));
  int code = kOk;
  if (!mono.ok) {
    report_monotone(mono, t);
    code = kSoftFail;
  }
  if (!all_converged(t)) {
    std::cerr << "some continuation rows did not converge\n";
    code = kSoftFail;
  }
  if (!cert.valid())
    std::cerr << "certificate: " << cert.counterexamples.size() << " of " << cert.samples_checked
              << " samples disagree\n";
  return code;
}

int cmd_list(const Options& o) {
  register_files(o.common.extra_problems);
  const auto names = registry_names();
  if (o.json_list) {
    std::cout << json(names).dump() << "\n";
  } else {
    for (const auto& n : names) std::cout << n << "\n";
  }
  return kOk;
}

int cmd_export(const Options& o) {
  const BilevelProblem p = resolve_problem(o.common);
  const std::string text = problem_to_json(p).dump(2) + "\n";
  if (o.common.out.empty()) {
    std::cout << text;
  } else {
    write_file(output_dir(o.common) / (p.name() + ".json"), text);
  }
  return kOk;
}

void add_common(CLI::App* cmd, Common& c, bool needs_problem) {
  auto* opt = cmd->add_option("--problem,-p", c.problem, "registered problem name or path to a problem JSON file");
  if (needs_problem) opt->required();
  cmd->add_option("--register", c.extra_problems, "problem JSON files to add to the registry first");
  cmd->add_option("--seed", c.seed, "random seed");
  cmd->add_option("--out,-o", c.out, "output directory (default: stdout)");
  cmd->add_option("--format", c.format, "output format")->check(CLI::IsMember({"csv", "json", "both"}));
}

void add_upper(CLI::App* cmd, Options& o) {
  cmd->add_option("--multistarts", o.multistarts, "leader multistarts")->check(CLI::PositiveNumber);
  cmd->add_option("--lower-starts", o.lower_starts, "follower multistarts (0: automatic)")
      ->check(CLI::NonNegativeNumber);
}

void add_schedule(CLI::App* cmd, Options& o) {
  cmd->add_option("--eps0", o.eps0, "first epsilon");
  cmd->add_option("--rho", o.rho, "epsilon reduction factor in (0,1)");
  cmd->add_option("--k", o.k, "number of epsilons");
  cmd->add_option("--slack", o.slack, "monotonicity slack");
}

void add_grid(CLI::App* cmd, Options& o) {
  cmd->add_option("--ygrid", o.ygrid, "leader grid step");
  cmd->add_option("--xgrid", o.xgrid, "follower grid step when h is nonlinear");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Penalty solver and diagnostics for pessimistic bilevel programs"};
  app.set_config("--config", "", "read options from a TOML/INI file");
  app.require_subcommand(1);
  Options o;

  auto* solve = app.add_subcommand("solve", "solve one penalized problem");
  add_common(solve, o.common, true);
  add_upper(solve, o);
  solve->add_option("--epsilon,-e", o.epsilon, "penalty parameter")->required();
  solve->add_option("--sign", o.sign, "pessimistic or optimistic");

  auto* cont = app.add_subcommand("continuation", "solve along a decreasing epsilon schedule");
  add_common(cont, o.common, true);
  add_upper(cont, o);
  add_schedule(cont, o);
  cont->add_option("--sign", o.sign, "pessimistic or optimistic");
  cont->add_flag("--limit", o.limit, "estimate the epsilon -> 0 limit from the last three rows");

  auto* oracle = app.add_subcommand("oracle", "brute-force three-level reference solution");
  add_common(oracle, o.common, true);
  add_grid(oracle, o);

  auto* rates = app.add_subcommand("rates", "continuation, oracle, gap fit and certificate in one report");
  add_common(rates, o.common, true);
  add_upper(rates, o);
  add_schedule(rates, o);
  add_grid(rates, o);
  rates->add_option("--tau", o.tau, "rate classification tolerance");
  rates->add_option("--cert-tol", o.cert_tol, "certificate tolerance");
  rates->add_option("--cert-samples", o.cert_samples, "certificate sample count")->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list", "list registered problems");
  add_common(list, o.common, false);
  list->add_flag("--json", o.json_list, "print a JSON array");

  auto* exp = app.add_subcommand("export", "write a registered problem as JSON");
  add_common(exp, o.common, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (solve->parsed()) return cmd_solve(o);
    if (cont->parsed()) return cmd_continuation(o);
    if (oracle->parsed()) return cmd_oracle(o);
    if (rates->parsed()) return cmd_rates(o);
    if (list->parsed()) return cmd_list(o);
    if (exp->parsed()) return cmd_export(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kConfigError;
}
