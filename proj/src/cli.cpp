#include "ccop/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "ccop/instance.hpp"
#include "ccop/oracle.hpp"
#include "ccop/salm.hpp"
#include "ccop/trace.hpp"

namespace ccop::cli {
namespace {

using ordered_json = json_io::ordered_json;
using Clock = std::chrono::steady_clock;

constexpr const char* kVersion = "1.0.0";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string problem;
  int kappa = -1;
  std::uint64_t seed = 0;
  std::string trace;
  SalmConfig salm;
};

void add_salm_options(CLI::App* app, SalmConfig& cfg) {
  app->add_option("--rho0", cfg.rho0, "initial penalty")->capture_default_str();
  app->add_option("--tau", cfg.tau, "required progress factor")->capture_default_str();
  app->add_option("--sigma", cfg.sigma, "penalty growth factor")->capture_default_str();
  app->add_option("--tol-feas", cfg.tol_feas, "feasibility tolerance")->capture_default_str();
  app->add_option("--tol-opt", cfg.tol_opt, "CC-M residual tolerance")->capture_default_str();
  app->add_option("--max-outer", cfg.max_outer, "outer iteration limit")->capture_default_str();
  app->add_option("--rho-max", cfg.rho_max, "penalty limit")->capture_default_str();
}

void add_common(CLI::App* app, CommonOptions& o, bool with_salm) {
  app->add_option("--problem", o.problem, "instance file or bundled instance name")->required();
  app->add_option("--kappa", o.kappa, "override the cardinality bound");
  app->add_option("--seed", o.seed, "random seed")->capture_default_str();
  app->add_option("--trace", o.trace, "write a JSONL trace to this path");
  if (with_salm) add_salm_options(app, o.salm);
}

Vector parse_point(const std::string& csv, int n, const std::string& flag) {
  std::vector<double> vals;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(tok, &used));
      if (tok.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError(flag + ": cannot parse '" + tok + "' as a number");
    }
  }
  if (static_cast<int>(vals.size()) != n) {
    throw UsageError(flag + ": expected " + std::to_string(n) + " comma-separated values, got " +
                     std::to_string(vals.size()));
  }
  return Eigen::Map<const Vector>(vals.data(), n);
}

CcopProblem load(const CommonOptions& o, std::ostream& err) {
  InstanceSpec spec = read_instance_file(resolve_instance_path(o.problem));
  for (const auto& w : spec.warnings) err << "warning: " << w << "\n";
  if (o.kappa >= 0) {
    spec.kappa = o.kappa;
    validate_instance(spec);
  }
  return build_problem(spec);
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ordered_json make_header(const std::string& command, const CcopProblem& prob,
                         const CommonOptions& o) {
  ordered_json h;
  h["record"] = "header";
  h["tool"] = "ccop";
  h["version"] = kVersion;
  h["command"] = command;
  h["instance"] = prob.name();
  h["problem_arg"] = o.problem;
  h["n"] = prob.n();
  h["m"] = prob.m();
  h["p"] = prob.p();
  h["kappa"] = prob.kappa();
  h["seed"] = o.seed;
  h["config"] = to_json(o.salm);
  return h;
}

void finish_header(ordered_json& h, Clock::time_point start) {
  h["timestamp"] = utc_timestamp();
  h["wall_time_s"] = std::chrono::duration<double>(Clock::now() - start).count();
}

int exit_code(SalmStatus s) {
  switch (s) {
    case SalmStatus::CcmStationary: return kOk;
    case SalmStatus::Infeasible: return kInfeasible;
    case SalmStatus::RhoLimit:
    case SalmStatus::OuterLimit: return kLimit;
    case SalmStatus::InnerFailure: return kNotCertified;
  }
  return kNotCertified;
}

std::string vec_str(const Vector& v) { return json_io::dump(json_io::to_json(v), -1); }

// ---- solve ----------------------------------------------------------------

struct SolveOptions {
  CommonOptions common;
  std::string x0;
  int starts = 1;
  double start_scale = 3.0;
  int oracle_cap = 0;
};

struct SolveOutcome {
  int code = kOk;
  std::string summary;
  std::string trace_text;
};

// Run 0 starts from x0 (zeros when omitted); runs 1.. draw uniform starts from
// a generator seeded with --seed.
SolveOutcome solve_instance(const CcopProblem& prob, const SolveOptions& opt,
                            const std::string& command) {
  const auto start_time = Clock::now();
  const CommonOptions& o = opt.common;
  if (opt.starts < 1) throw UsageError("--starts: must be >= 1");
  Vector x0 = opt.x0.empty() ? Vector::Zero(prob.n()) : parse_point(opt.x0, prob.n(), "--x0");

  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> unif(-opt.start_scale, opt.start_scale);
  std::vector<SalmResult> results;
  for (int r = 0; r < opt.starts; ++r) {
    Vector start = x0;
    if (r > 0) {
      for (int i = 0; i < prob.n(); ++i) start[i] = unif(rng);
    }
    results.push_back(solve(prob, start, o.salm));
  }

  std::optional<OracleResult> oracle;
  if (opt.oracle_cap > 0 && prob.n() <= opt.oracle_cap) {
    OracleConfig ocfg;
    ocfg.max_n = opt.oracle_cap;
    ocfg.seed = o.seed;
    ocfg.salm = o.salm;
    oracle = enumerate_supports(prob, ocfg);
  }

  // Best stationary run by objective; run 0 when none is stationary.
  int chosen = 0;
  bool have_stationary = false;
  for (int r = 0; r < opt.starts; ++r) {
    const auto& res = results[static_cast<std::size_t>(r)];
    if (res.status != SalmStatus::CcmStationary) continue;
    const double fr = prob.objective(res.x_sparse);
    if (!have_stationary || fr < prob.objective(results[static_cast<std::size_t>(chosen)].x_sparse)) {
      chosen = r;
      have_stationary = true;
    }
  }
  const SalmResult& best = results[static_cast<std::size_t>(chosen)];

  ordered_json header = make_header(command, prob, o);
  header["x0"] = json_io::to_json(x0);
  header["starts"] = opt.starts;
  header["start_scale"] = opt.start_scale;
  TraceWriter writer(header);
  ordered_json runs = ordered_json::array();
  for (int r = 0; r < opt.starts; ++r) {
    const auto& res = results[static_cast<std::size_t>(r)];
    writer.add_rows(res.trace, r);
    ordered_json rj;
    rj["run"] = r;
    rj["status"] = std::string(to_string(res.status));
    rj["outer_iterations"] = res.trace.rows.size();
    rj["objective"] = prob.objective(res.x_sparse);
    rj["ccm_residual"] = res.certificate.ccm.residual;
    rj["x_sparse"] = json_io::to_json(res.x_sparse);
    if (oracle) {
      const auto v = validate_against_oracle(prob, res.x_sparse, *oracle, o.salm.tol_opt);
      rj["oracle_match"] = std::string(to_string(v.kind));
      rj["oracle_gap"] = v.gap;
    }
    runs.push_back(rj);
  }
  ordered_json footer;
  footer["status"] = std::string(to_string(best.status));
  footer["selected_run"] = chosen;
  footer["objective"] = prob.objective(best.x_sparse);
  footer["x_sparse"] = json_io::to_json(best.x_sparse);
  footer["x"] = json_io::to_json(best.pt.x);
  footer["y"] = json_io::to_json(best.pt.y);
  footer["certificate"] = to_json(best.certificate);
  footer["runs"] = runs;
  if (oracle) footer["oracle"] = to_json(*oracle, false);
  writer.set_footer(footer);

  SolveOutcome out;
  out.code = exit_code(best.status);
  std::ostringstream s;
  s << "instance: " << prob.name() << "\n";
  s << "status: " << to_string(best.status) << "\n";
  s << "outer_iterations: " << best.trace.rows.size() << "\n";
  s << "objective: " << json_io::format_double(prob.objective(best.x_sparse)) << "\n";
  s << "x_sparse: " << vec_str(best.x_sparse) << "\n";
  s << "ccm_residual: " << json_io::format_double(best.certificate.ccm.residual) << "\n";
  if (opt.starts > 1) {
    int stationary = 0;
    for (const auto& r : results) stationary += r.status == SalmStatus::CcmStationary ? 1 : 0;
    s << "stationary_runs: " << stationary << "/" << opt.starts << "\n";
  }
  if (oracle) s << "oracle_best_f: " << json_io::format_double(oracle->best_f) << "\n";
  out.summary = s.str();

  ordered_json final_header = header;
  finish_header(final_header, start_time);
  out.trace_text = json_io::dump(final_header, -1) + "\n" + writer.body();
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(path + ": cannot write");
  f << text;
}

int cmd_solve(const SolveOptions& opt, std::ostream& out, std::ostream& err) {
  const CcopProblem prob = load(opt.common, err);
  const SolveOutcome res = solve_instance(prob, opt, "solve");
  out << res.summary;
  if (!opt.common.trace.empty()) write_text(opt.common.trace, res.trace_text);
  return res.code;
}

// ---- oracle ---------------------------------------------------------------

int cmd_oracle(const CommonOptions& o, int cap, int starts, std::ostream& out, std::ostream& err) {
  const auto start_time = Clock::now();
  const CcopProblem prob = load(o, err);
  OracleConfig cfg;
  cfg.max_n = cap;
  cfg.random_starts = starts;
  cfg.seed = o.seed;
  cfg.salm = o.salm;
  if (prob.n() > cap) {
    throw UsageError("--oracle-cap: n = " + std::to_string(prob.n()) + " exceeds the cap " +
                     std::to_string(cap));
  }
  const OracleResult res = enumerate_supports(prob, cfg);
  out << "instance: " << prob.name() << "\n";
  out << "supports: " << res.enumerated << "\n";
  out << "found_feasible: " << (res.found_feasible ? "true" : "false") << "\n";
  if (res.found_feasible) {
    out << "best_f: " << json_io::format_double(res.best_f) << "\n";
    out << "best_x: " << vec_str(res.best_x) << "\n";
  }
  if (!o.trace.empty()) {
    ordered_json header = make_header("oracle", prob, o);
    header["oracle_cap"] = cap;
    header["oracle_starts"] = starts;
    finish_header(header, start_time);
    TraceWriter w(header);
    ordered_json footer;
    footer["status"] = res.found_feasible ? "Feasible" : "Infeasible";
    footer["oracle"] = to_json(res, true);
    w.set_footer(footer);
    w.write(o.trace);
  }
  return res.found_feasible ? kOk : kInfeasible;
}

// ---- certify --------------------------------------------------------------

int cmd_certify(const CommonOptions& o, const std::string& point, std::ostream& out,
                std::ostream& err) {
  const auto start_time = Clock::now();
  const CcopProblem prob = load(o, err);
  const Vector x = parse_point(point, prob.n(), "--point");
  DiagnosticsConfig dcfg;
  dcfg.tol_active = o.salm.tol_active;
  const Certificate cert = certify(prob, x, {}, dcfg, o.salm.tol_opt);
  const FeasibilityReport feas = feasibility(prob, RelaxedPoint{x, pair_y_for_x(x, prob.kappa())},
                                             o.salm.tol_active);
  const bool feasible = std::max(feas.viol_g, feas.viol_h) <= o.salm.tol_feas && feas.viol_l0 == 0;
  const bool stationary = feasible && cert.ccm.residual <= o.salm.tol_opt;
  out << "instance: " << prob.name() << "\n";
  out << "point: " << vec_str(x) << "\n";
  out << "objective: " << json_io::format_double(prob.objective(x)) << "\n";
  out << "feasible: " << (feasible ? "true" : "false") << "\n";
  out << "ccm_residual: " << json_io::format_double(cert.ccm.residual) << "\n";
  out << "stationary: " << (stationary ? "true" : "false") << "\n";
  if (cert.ccs_pair) out << "ccs_z: " << vec_str(*cert.ccs_pair) << "\n";
  if (!o.trace.empty()) {
    ordered_json header = make_header("certify", prob, o);
    header["point"] = json_io::to_json(x);
    finish_header(header, start_time);
    TraceWriter w(header);
    ordered_json footer;
    footer["status"] = stationary ? "CcmStationary" : "NotStationary";
    footer["feasibility"] = to_json(feas);
    footer["certificate"] = to_json(cert);
    w.set_footer(footer);
    w.write(o.trace);
  }
  return stationary ? kOk : kNotCertified;
}

// ---- generate -------------------------------------------------------------

int cmd_generate(const std::string& kind, std::uint64_t seed, int n, int kappa,
                 const std::string& path, std::ostream& out) {
  InstanceSpec spec;
  try {
    if (kind == "portfolio") {
      spec = generate_portfolio(seed, n, kappa);
    } else {
      spec = generate_sparse_lsq(seed, n, kappa);
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (path.empty() || path == "-") {
    out << serialize_instance(spec);
  } else {
    write_instance_file(spec, path);
    out << "wrote " << path << "\n";
  }
  return kOk;
}

// ---- batch ----------------------------------------------------------------

int cmd_batch(const std::vector<std::string>& problems, const std::string& trace_dir,
              const SolveOptions& base, std::ostream& out, std::ostream& err) {
  if (!trace_dir.empty()) std::filesystem::create_directories(trace_dir);
  struct Job {
    std::string problem;
    std::future<SolveOutcome> result;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    SolveOptions opt = base;
    opt.common.problem = problems[i];
    // Each job owns its problem, options, and trace text.
    jobs.push_back({problems[i], std::async(std::launch::async, [opt] {
                      std::ostringstream sink;
                      const CcopProblem prob = load(opt.common, sink);
                      return solve_instance(prob, opt, "batch");
                    })});
  }
  int worst = kOk;
  for (auto& job : jobs) {
    try {
      SolveOutcome res = job.result.get();
      out << res.summary;
      if (!trace_dir.empty()) {
        const auto stem = std::filesystem::path(job.problem).stem().string();
        write_text((std::filesystem::path(trace_dir) / (stem + ".jsonl")).string(), res.trace_text);
      }
      worst = std::max(worst, res.code);
    } catch (const SchemaError& e) {
      err << "error: " << e.what() << "\n";
      worst = std::max(worst, static_cast<int>(kUsage));
    } catch (const std::exception& e) {
      err << "error: " << job.problem << ": " << e.what() << "\n";
      worst = std::max(worst, static_cast<int>(kNotCertified));
    }
  }
  return worst;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cardinality-constrained optimization: safeguarded augmented Lagrangian solver, "
               "stationarity certificates, and a brute-force support oracle",
               "ccop"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  SolveOptions solve_opt;
  CLI::App* solve_cmd = app.add_subcommand("solve", "run the solver on an instance");
  add_common(solve_cmd, solve_opt.common, true);
  solve_cmd->add_option("--x0", solve_opt.x0, "starting point, comma-separated (default zeros)");
  solve_cmd->add_option("--starts", solve_opt.starts, "number of starts (extra starts are seeded)")
      ->capture_default_str();
  solve_cmd->add_option("--start-scale", solve_opt.start_scale, "random starts in [-s, s]^n")
      ->capture_default_str();
  solve_cmd->add_option("--oracle-cap", solve_opt.oracle_cap,
                        "also run the support oracle when n <= cap (0 disables)")
      ->capture_default_str();

  CommonOptions oracle_opt;
  int oracle_cap = 20;
  int oracle_starts = 5;
  CLI::App* oracle_cmd = app.add_subcommand("oracle", "enumerate supports for the global optimum");
  add_common(oracle_cmd, oracle_opt, true);
  oracle_cmd->add_option("--oracle-cap", oracle_cap, "refuse instances with n above this")
      ->capture_default_str();
  oracle_cmd->add_option("--oracle-starts", oracle_starts, "random starts per support")
      ->capture_default_str();

  CommonOptions certify_opt;
  std::string point;
  CLI::App* certify_cmd = app.add_subcommand("certify", "compute stationarity certificates at a point");
  add_common(certify_cmd, certify_opt, false);
  certify_cmd->add_option("--point", point, "point, comma-separated")->required();
  certify_cmd->add_option("--tol-opt", certify_opt.salm.tol_opt, "CC-M residual tolerance")
      ->capture_default_str();
  certify_cmd->add_option("--tol-feas", certify_opt.salm.tol_feas, "feasibility tolerance")
      ->capture_default_str();

  std::string gen_kind;
  std::uint64_t gen_seed = 0;
  int gen_n = 10;
  int gen_kappa = 3;
  std::string gen_out;
  CLI::App* gen_cmd = app.add_subcommand("generate", "write a synthetic instance");
  gen_cmd->add_option("kind", gen_kind, "portfolio | sparse_lsq")
      ->required()
      ->check(CLI::IsMember({"portfolio", "sparse_lsq"}));
  gen_cmd->add_option("--seed", gen_seed, "generator seed")->capture_default_str();
  gen_cmd->add_option("--n", gen_n, "dimension")->capture_default_str();
  gen_cmd->add_option("--kappa", gen_kappa, "cardinality bound")->capture_default_str();
  gen_cmd->add_option("--out", gen_out, "output path (stdout when omitted)");

  SolveOptions batch_opt;
  std::vector<std::string> batch_problems;
  std::string trace_dir;
  CLI::App* batch_cmd = app.add_subcommand("batch", "solve several instances concurrently");
  batch_cmd->add_option("--problems", batch_problems, "instance files or names")
      ->required()
      ->delimiter(',');
  batch_cmd->add_option("--trace-dir", trace_dir, "directory for per-instance traces");
  batch_cmd->add_option("--seed", batch_opt.common.seed, "random seed")->capture_default_str();
  batch_cmd->add_option("--starts", batch_opt.starts, "starts per instance")->capture_default_str();
  add_salm_options(batch_cmd, batch_opt.common.salm);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*solve_cmd) {
      solve_opt.common.salm.validate();
      return cmd_solve(solve_opt, out, err);
    }
    if (*oracle_cmd) {
      oracle_opt.salm.validate();
      return cmd_oracle(oracle_opt, oracle_cap, oracle_starts, out, err);
    }
    if (*certify_cmd) return cmd_certify(certify_opt, point, out, err);
    if (*gen_cmd) return cmd_generate(gen_kind, gen_seed, gen_n, gen_kappa, gen_out, out);
    if (*batch_cmd) {
      batch_opt.common.salm.validate();
      return cmd_batch(batch_problems, trace_dir, batch_opt, out, err);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNotCertified;
  }
  return kUsage;
}

}  // namespace ccop::cli
