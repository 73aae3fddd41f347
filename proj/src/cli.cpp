#include "cuspeig/cli.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "cuspeig/bounds.hpp"
#include "cuspeig/eigensolver.hpp"
#include "cuspeig/errors.hpp"
#include "cuspeig/verification.hpp"

namespace cuspeig::cli {
namespace {

using nlohmann::json;

struct BoundArgs {
  int n = 3;
  double p = 3.0;
  double q = 2.0;
  std::optional<double> s;
  std::optional<double> r;
  std::vector<double> gammas;
  std::optional<double> a;
  bool use_12pi = false;
  bool unsafe_n2 = false;
  std::string json_path;
  std::string csv_path;
};

struct SolveArgs {
  std::string domain = "cusp";
  int n = 2;
  std::vector<double> gammas;
  std::vector<double> sides;
  double p = 2.0;
  double q = 2.0;
  int resolution = 16;
  std::string method = "minimize";
  double tol = 1e-8;
  std::string json_path;
  std::string trace_csv;
  std::string dump_mesh;
  std::string dump_field;
};

struct VerifyArgs {
  bool quick = false;
  std::string json_path;
};

struct SweepArgs {
  int n = 2;
  std::vector<double> gamma_values{2.0};
  std::vector<double> p_values{2.0};
  std::vector<int> resolutions{8};
  double q = 2.0;
  std::string method = "minimize";
  double tol = 1e-8;
  int workers = 0;
  std::string csv_path;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Writes to the file at `path`, or to `fallback` when the path is empty.
void emit(const std::string& path, std::ostream& fallback, const std::string& text) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream file(path);
  if (!file) throw ConfigError("cannot open output file " + path);
  file << text;
}

std::string csv_number(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

CuspDomain cusp_from(int n, std::vector<double> gammas) {
  if (n != 2 && n != 3) throw ConfigError("cusp dimension must be 2 or 3");
  if (gammas.empty()) gammas.assign(static_cast<std::size_t>(n - 1), 1.0);
  if (static_cast<int>(gammas.size()) != n - 1) {
    throw ConfigError("--gammas needs n-1 = " + std::to_string(n - 1) + " values");
  }
  return CuspDomain(std::move(gammas));
}

json bound_json(const bounds::ExponentConfig& cfg, const bounds::BoundReport& report,
                const CuspDomain& domain, bool use_12pi) {
  return json{
      {"n", cfg.n},
      {"gammas", domain.exponents()},
      {"gamma", cfg.gamma},
      {"p", cfg.p},
      {"q", cfg.q},
      {"s", cfg.s},
      {"r", cfg.r},
      {"a_star", report.a_star},
      {"k_ps", report.k_ps},
      {"m_rq", report.m_rq},
      {"b_rs", report.b_rs},
      {"b_rs_estimate", bounds::b_rs_estimate(cfg.n, cfg.r, cfg.s)},
      {"b_rs_source", use_12pi ? "12pi" : "estimate"},
      {"upper_on_inverse_lambda", report.upper_on_inverse_lambda},
      {"lambda_lower", report.lambda_lower},
      {"interval", {report.interval.first, report.interval.second}},
      {"pinned", report.pinned},
      {"degenerate", report.degenerate},
      {"hypothesis_violations", report.hypothesis_violations},
  };
}

int run_bound(const BoundArgs& args, std::ostream& out, std::ostream& err) {
  if (args.n == 2 && !args.unsafe_n2) {
    throw ConfigError("bounds are stated for n >= 3; pass --unsafe-n2 to evaluate n = 2");
  }
  const CuspDomain domain = cusp_from(args.n, args.gammas);
  bounds::ExponentConfig cfg = bounds::ExponentConfig::with_default_sr(args.p, args.q, domain);
  if (args.s) cfg.s = *args.s;
  if (args.r) cfg.r = *args.r;

  bounds::BoundOptions options;
  options.pinned_a = args.a;
  if (args.use_12pi) options.b_override = 12.0 * std::numbers::pi;
  const auto report = bounds::lambda_lower_bound(cfg, domain, options);
  for (const auto& v : report.hypothesis_violations) err << "warning: " << v << '\n';

  emit(args.json_path, out, bound_json(cfg, report, domain, args.use_12pi).dump(2) + "\n");
  if (!args.csv_path.empty()) {
    std::ostringstream csv;
    csv << "a,F\n";
    for (const auto& [a, f] : report.evaluations) csv << csv_number(a) << ',' << csv_number(f) << '\n';
    emit(args.csv_path, out, csv.str());
  }
  return exit_ok;
}

struct SolveOutcome {
  EigenPair pair;
  std::optional<double> mu;
  std::vector<IterationState> trace;
  std::optional<verification::ConsistencyReport> consistency;
};

SolveOutcome solve_on(const FunctionSpace& space, const std::optional<CuspDomain>& cusp, double p,
                      double q, const std::string& method, double tol) {
  SolveOutcome outcome;
  if (method == "minimize") {
    RayleighOptions options;
    options.tol = tol;
    outcome.pair = minimize_rayleigh(space, p, q, default_initial_guess(space, q), options);
  } else if (method == "iterate") {
    if (q != 2.0) throw ConfigError("--method iterate requires q = 2");
    InverseIterationOptions options;
    options.tol = tol;
    auto result = inverse_iteration(space, p, default_initial_guess(space, 2.0), options);
    outcome.pair = std::move(result.pair);
    outcome.mu = result.mu;
    outcome.trace = std::move(result.trace);
  } else {
    throw ConfigError("unknown method " + method);
  }
  if (cusp && cusp->dimension() == 3) {
    outcome.consistency = verification::consistency_report(*cusp, p, q, outcome.pair.lambda);
  }
  return outcome;
}

int run_solve(const SolveArgs& args, std::ostream& out, std::ostream&) {
  if (args.resolution < 1) throw ConfigError("--resolution must be positive");
  std::optional<CuspDomain> cusp;
  std::shared_ptr<const Mesh> mesh;
  json domain_json;
  if (args.domain == "cusp") {
    const int n = args.gammas.empty() ? args.n : static_cast<int>(args.gammas.size()) + 1;
    cusp = cusp_from(n, args.gammas);
    mesh = std::make_shared<const Mesh>(mesh_cusp(*cusp, 1.0, args.resolution));
    domain_json = {{"type", "cusp"}, {"gammas", cusp->exponents()}, {"gamma", cusp->gamma()}};
  } else if (args.domain == "box") {
    const BoxDomain box = args.sides.empty() ? BoxDomain::unit(args.n) : BoxDomain(args.sides);
    mesh = std::make_shared<const Mesh>(mesh_box(box, args.resolution));
    domain_json = {{"type", "box"}, {"sides", box.sides}};
  } else {
    throw ConfigError("--domain must be cusp or box");
  }
  if (!args.trace_csv.empty() && args.method != "iterate") {
    throw ConfigError("--trace-csv needs --method iterate");
  }

  const FunctionSpace space(mesh);
  const SolveOutcome outcome = solve_on(space, cusp, args.p, args.q, args.method, args.tol);
  const EigenPair& pair = outcome.pair;

  json doc{
      {"domain", domain_json},
      {"p", args.p},
      {"q", args.q},
      {"resolution", args.resolution},
      {"nodes", mesh->node_count()},
      {"cells", mesh->cell_count()},
      {"method", pair.method},
      {"lambda", pair.lambda},
      {"lambda_regularized", pair.lambda_regularized},
      {"weak_residual", pair.weak_residual},
      {"constraint_residual", pair.constraint_residual},
      {"iterations", pair.iterations},
  };
  if (outcome.mu) doc["mu"] = *outcome.mu;
  if (outcome.consistency) {
    const auto& c = *outcome.consistency;
    doc["consistency"] = {{"bound_source", c.bound_source}, {"lambda_lower", c.lambda_lower},
                          {"gap_factor", c.gap_factor}, {"passed", c.passed}, {"note", c.note}};
  }
  emit(args.json_path, out, doc.dump(2) + "\n");

  if (!args.trace_csv.empty()) {
    std::ostringstream csv;
    csv << "n,mu_n,energy_n,constraint_residual\n";
    for (const auto& s : outcome.trace) {
      csv << s.n << ',' << csv_number(s.mu) << ',' << csv_number(s.energy) << ','
          << csv_number(s.constraint_residual) << '\n';
    }
    emit(args.trace_csv, out, csv.str());
  }
  if (!args.dump_mesh.empty()) {
    std::ofstream file(args.dump_mesh);
    if (!file) throw ConfigError("cannot open " + args.dump_mesh);
    write_mesh(file, *mesh);
  }
  if (!args.dump_field.empty()) {
    std::ofstream file(args.dump_field);
    if (!file) throw ConfigError("cannot open " + args.dump_field);
    write_field(file, pair.u.values);
  }
  return exit_ok;
}

int run_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
  const auto results = verification::run_suite(args.quick);
  json doc = json::array();
  bool all = true;
  for (const auto& r : results) {
    doc.push_back({{"name", r.name}, {"passed", r.passed}, {"details", r.details}});
    if (!r.passed) {
      all = false;
      err << "FAILED: " << r.name << '\n';
    }
  }
  emit(args.json_path, out, doc.dump(2) + "\n");
  return all ? exit_ok : exit_failure;
}

int run_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
  struct Job {
    double gamma_i;
    double p;
    int resolution;
  };
  std::vector<Job> jobs;
  for (double g : args.gamma_values)
    for (double p : args.p_values)
      for (int res : args.resolutions) jobs.push_back({g, p, res});
  if (jobs.empty()) throw ConfigError("empty sweep grid");
  if (args.method == "iterate" && args.q != 2.0) throw ConfigError("--method iterate requires q = 2");
  for (const Job& j : jobs) {
    if (j.resolution < 1) throw ConfigError("resolutions must be positive");
    cusp_from(args.n, std::vector<double>(static_cast<std::size_t>(args.n - 1), j.gamma_i));
  }

  std::vector<std::string> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& j = jobs[i];
      std::ostringstream row;
      row << args.n << ',' << csv_number(j.gamma_i) << ',' << csv_number(j.p) << ','
          << csv_number(args.q) << ',' << j.resolution << ',' << args.method << ',';
      try {
        const CuspDomain domain(std::vector<double>(static_cast<std::size_t>(args.n - 1), j.gamma_i));
        auto mesh = std::make_shared<const Mesh>(mesh_cusp(domain, 1.0, j.resolution));
        const FunctionSpace space(mesh);
        const auto outcome = solve_on(space, domain, j.p, args.q, args.method, args.tol);
        row << csv_number(outcome.pair.lambda) << ',' << csv_number(outcome.pair.weak_residual) << ','
            << outcome.pair.iterations << ',';
        if (outcome.consistency && outcome.consistency->bound_source != "unavailable") {
          row << csv_number(outcome.consistency->lambda_lower);
        }
        row << ",ok";
      } catch (const std::exception& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), ',', ';');
        row << ",,,,error: " << msg;
      }
      rows[i] = row.str();
    }
  };
  const unsigned available = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = args.workers > 0 ? static_cast<unsigned>(args.workers) : available;
  std::vector<std::thread> threads;
  for (unsigned t = 0; t < std::min<std::size_t>(workers, jobs.size()); ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  std::ostringstream csv;
  csv << "n,gamma_i,p,q,resolution,method,lambda,weak_residual,iterations,lambda_lower,status\n";
  bool failed = false;
  for (const auto& r : rows) {
    csv << r << '\n';
    if (r.find(",error: ") != std::string::npos) failed = true;
  }
  emit(args.csv_path, out, csv.str());
  if (failed) err << "some sweep runs failed; see the status column\n";
  return failed ? exit_failure : exit_ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Neumann (p,q)-eigenvalues of cusp domains: bounds and finite element solves", "cuspeig"};
  app.set_config("--config", "", "Key-value config file; command-line flags take precedence");
  app.require_subcommand(1);

  BoundArgs bound;
  auto* bound_cmd = app.add_subcommand("bound", "Evaluate the lower bound on the first eigenvalue");
  bound_cmd->add_option("--n", bound.n, "Dimension")->check(CLI::Range(2, 3));
  bound_cmd->add_option("--p", bound.p, "Exponent p");
  bound_cmd->add_option("--q", bound.q, "Exponent q");
  bound_cmd->add_option("--s", bound.s, "Sobolev exponent s (default derived from p, q)");
  bound_cmd->add_option("--r", bound.r, "Embedding exponent r (default derived from p, q)");
  bound_cmd->add_option("--gammas", bound.gammas, "Lateral exponents gamma_1..gamma_{n-1}")
      ->delimiter(',');
  bound_cmd->add_option("--a", bound.a, "Pin the mapping exponent instead of optimizing");
  bound_cmd->add_flag("--use-12pi", bound.use_12pi, "Use 12 pi for the Sobolev-Poincare constant");
  bound_cmd->add_flag("--unsafe-n2", bound.unsafe_n2, "Allow n = 2");
  bound_cmd->add_option("--json", bound.json_path, "Write the report here instead of stdout");
  bound_cmd->add_option("--csv", bound.csv_path, "Write (a, F(a)) samples here");

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Compute the first nontrivial eigenpair");
  solve_cmd->add_option("--domain", solve.domain, "cusp or box")
      ->check(CLI::IsMember({"cusp", "box"}));
  solve_cmd->add_option("--n", solve.n, "Dimension when not implied by --gammas/--sides")
      ->check(CLI::Range(2, 3));
  solve_cmd->add_option("--gammas", solve.gammas, "Cusp exponents")->delimiter(',');
  solve_cmd->add_option("--sides", solve.sides, "Box side lengths")->delimiter(',');
  solve_cmd->add_option("--p", solve.p, "Exponent p")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--q", solve.q, "Exponent q")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--resolution", solve.resolution, "Mesh resolution");
  solve_cmd->add_option("--method", solve.method, "minimize or iterate")
      ->check(CLI::IsMember({"minimize", "iterate"}));
  solve_cmd->add_option("--tol", solve.tol, "Solver tolerance")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--json", solve.json_path, "Write the summary here instead of stdout");
  solve_cmd->add_option("--trace-csv", solve.trace_csv, "Iteration trace (iterate only)");
  solve_cmd->add_option("--dump-mesh", solve.dump_mesh, "Write the mesh in plain-text format");
  solve_cmd->add_option("--dump-field", solve.dump_field, "Write the eigenfunction nodal values");

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Run the verification suite");
  verify_cmd->add_flag("--quick", verify.quick, "Smaller samples and meshes");
  verify_cmd->add_option("--json", verify.json_path, "Write results here instead of stdout");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Solve over a grid of (gamma_i, p, resolution)");
  sweep_cmd->add_option("--n", sweep.n, "Dimension")->check(CLI::Range(2, 3));
  sweep_cmd->add_option("--gamma-values", sweep.gamma_values, "Common lateral exponent values")
      ->delimiter(',');
  sweep_cmd->add_option("--p-values", sweep.p_values, "Values of p")->delimiter(',');
  sweep_cmd->add_option("--resolutions", sweep.resolutions, "Mesh resolutions")->delimiter(',');
  sweep_cmd->add_option("--q", sweep.q, "Exponent q")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--method", sweep.method, "minimize or iterate")
      ->check(CLI::IsMember({"minimize", "iterate"}));
  sweep_cmd->add_option("--tol", sweep.tol, "Solver tolerance")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--workers", sweep.workers, "Parallel jobs (0 = hardware threads)");
  sweep_cmd->add_option("--csv", sweep.csv_path, "Write rows here instead of stdout");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    if (*bound_cmd) return run_bound(bound, out, err);
    if (*solve_cmd) return run_solve(solve, out, err);
    if (*verify_cmd) return run_verify(verify, out, err);
    return run_sweep(sweep, out, err);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_failure;
  }
}

}  // namespace cuspeig::cli
