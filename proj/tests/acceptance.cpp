// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cuspeig/bounds.hpp"
#include "cuspeig/cli.hpp"
#include "cuspeig/eigensolver.hpp"
#include "cuspeig/verification.hpp"
#include "json.hpp"

using namespace cuspeig;
using nlohmann::json;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
  bool passed = false;
  std::string summary;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

FunctionSpace cusp_space(std::vector<double> exps, int res) {
  return FunctionSpace(std::make_shared<const Mesh>(mesh_cusp(CuspDomain(std::move(exps)), 1.0, res)));
}

Outcome corollary_constant() {
  std::ostringstream out, err;
  const int code = cli::run({"bound", "--n", "3", "--p", "3", "--q", "2", "--s", "1.5", "--r", "2.5",
                             "--gammas", "1,1"},
                            out, err);
  if (code != 0) return {false, "bound exited with " + std::to_string(code) + ": " + err.str()};
  const double b = json::parse(out.str())["b_rs_estimate"].get<double>();
  const double exact = 3.0 * std::pow(11.0, 11.0 / 15.0) * std::pow(4.0 * pi / 3.0, 2.0 / 3.0) *
                       std::pow(1.0 / 24.0, 1.0 / 15.0);
  const double rel = std::abs(b - exact) / exact;
  return {rel <= 1e-9 && b <= 12.0 * pi,
          fmt("B = %.15g, closed form %.15g, rel %.2e, 12pi = %.10g", b, exact, rel, 12.0 * pi)};
}

Outcome lipschitz_display() {
  const double value = bounds::corollary_32(1.0, 1.0);
  const double exact = std::pow(12.0 * pi * std::sqrt(3.0), -3.0);
  const double rel = std::abs(value - exact) / exact;
  return {rel <= 1e-12, fmt("corollary(1,1) = %.17g, rel %.2e", value, rel)};
}

Outcome linear_oracle() {
  const FunctionSpace s(std::make_shared<const Mesh>(mesh_box(BoxDomain::unit(2), 64)));
  const auto oracle = verification::oracle_linear_eigen(s);
  const double pi2 = pi * pi;
  const EigenPair m = minimize_rayleigh(s, 2.0, 2.0, default_initial_guess(s, 2.0));
  const InverseIterationResult it = inverse_iteration(s, 2.0, default_initial_guess(s, 2.0));
  const double dm = std::abs(m.lambda - oracle.lambda_oracle) / oracle.lambda_oracle;
  const double di = std::abs(it.pair.lambda - oracle.lambda_oracle) / oracle.lambda_oracle;
  const double em = std::abs(m.lambda - pi2) / pi2;
  const double ei = std::abs(it.pair.lambda - pi2) / pi2;
  return {dm <= 1e-6 && di <= 1e-6 && em <= 0.02 && ei <= 0.02,
          fmt("oracle(%s) %.12g, minimize %.12g (%.1e), iterate %.12g (%.1e), vs pi^2 %.2f%%/%.2f%%",
              oracle.method.c_str(), oracle.lambda_oracle, m.lambda, dm, it.pair.lambda, di,
              100.0 * em, 100.0 * ei)};
}

Outcome monotone_iteration() {
  const FunctionSpace s = cusp_space({2.0}, 32);
  bool ok = true;
  std::string summary;
  for (double p : {2.0, 2.5, 3.0}) {
    const InverseIterationResult it = inverse_iteration(s, p, default_initial_guess(s, 2.0));
    double worst = -1.0;
    for (std::size_t k = 1; k < it.trace.size(); ++k) {
      worst = std::max(worst, (it.trace[k].mu - it.trace[k - 1].mu) / it.trace[k - 1].mu);
    }
    const IterationState& last = it.trace.back();
    const double gap = std::abs(last.mu - last.energy) / last.mu;
    ok = ok && worst <= 1e-10 && gap <= 1e-6;
    summary += fmt("p=%.1f: %zu steps, max rel rise %.1e, |mu-E|/mu %.1e, mu %.10g; ", p,
                   it.trace.size(), worst, gap, last.mu);
  }
  return {ok, summary};
}

Outcome bound_consistency() {
  bool ok = true;
  std::string summary;
  for (double g : {1.0, 1.25, 1.5}) {
    const FunctionSpace s = cusp_space({g, g}, 12);
    const EigenPair m = minimize_rayleigh(s, 3.0, 2.0, default_initial_guess(s, 2.0));
    const double lower = bounds::corollary_32(g, g);
    ok = ok && m.lambda >= lower;
    summary += fmt("g=%.2f: lambda %.6g >= %.4e (gap x%.3g); ", g, m.lambda, lower, m.lambda / lower);
  }
  return {ok, summary};
}

Outcome m_rq_quadrature() {
  const Mesh ref = mesh_reference(3, 32);
  bool ok = true;
  std::string summary;
  const std::vector<std::pair<std::vector<double>, double>> cases = {
      {{2.0, 2.0}, 1.0}, {{1.5, 1.5}, 1.2}, {{2.0, 1.0}, 0.9}};
  for (const auto& [exps, a] : cases) {
    const CuspDomain d(exps);
    bounds::ExponentConfig cfg;
    cfg.p = 3.0;
    cfg.q = 2.0;
    cfg.s = 1.5;
    cfg.r = 2.5;
    cfg.n = 3;
    cfg.gamma = d.gamma();
    const auto c = verification::check_m_rq(a, cfg, d, ref);
    ok = ok && c.relative_discrepancy <= 0.01 && c.quadrature <= std::pow(a, 1.0 / cfg.q) * 1.01;
    summary += fmt("gamma=%.1f a=%.1f: %.6f vs %.6f (%.2e), bound %.4f; ", d.gamma(), a,
                   c.quadrature, c.exact, c.relative_discrepancy, c.bound);
  }
  return {ok, summary};
}

Outcome property_suites() {
  bool ok = true;
  std::string summary = "algebraic min ratio";
  for (double p : {1.5, 2.0, 3.0, 4.0}) {
    const auto a = verification::algebraic_inequality_sweep(p, 100000, 2024);
    ok = ok && a.min_pairing >= 0.0 && a.min_ratio > 0.0;
    summary += fmt(" p%.1f:%.3g", p, a.min_ratio);
  }
  const FunctionSpace s = cusp_space({2.0}, 16);
  for (double p : {1.5, 2.0, 3.0}) {
    const auto m = verification::operator_monotonicity_sweep(s, p, 200, 99);
    ok = ok && m.min_pairing >= 0.0 && m.min_strict_pairing > 0.0 && m.pairs == 200;
    summary += fmt("; monotone p%.1f min %.2e", p, m.min_strict_pairing);
  }
  double jac = 0.0;
  for (const auto& [exps, a] : std::vector<std::pair<std::vector<double>, double>>{
           {{2.0}, 1.0}, {{1.5, 1.5}, 1.2}, {{2.0, 1.0}, 0.9}}) {
    jac = std::max(jac, verification::jacobian_finite_difference_check(MappingPhiA(a, CuspDomain(exps)),
                                                                        1000, 17)
                            .max_relative_error);
  }
  ok = ok && jac <= 1e-6;
  summary += fmt("; jacobian FD max rel %.1e", jac);
  double previous = 0.0;
  summary += "; poincare max";
  for (int res : {8, 16, 32}) {
    const auto sweep = verification::poincare_sweep(cusp_space({2.0}, res), 2.0, 2.0, 200, 5);
    ok = ok && sweep.all_finite && std::isfinite(sweep.max_ratio) &&
         (previous == 0.0 || sweep.max_ratio <= 2.0 * previous);
    previous = sweep.max_ratio;
    summary += fmt(" %.4g", sweep.max_ratio);
  }
  return {ok, summary};
}

Outcome regularity() {
  bool ok = true;
  std::string summary;
  const CuspDomain domain({2.0});
  for (double p : {2.0, 3.0}) {
    std::vector<double> maxima;
    for (int res : {16, 32, 64}) {
      const FunctionSpace s = cusp_space({2.0}, res);
      const EigenPair m = minimize_rayleigh(s, p, 2.0, default_initial_guess(s, 2.0));
      maxima.push_back(m.u.values.cwiseAbs().maxCoeff());
      if (res == 64) {
        const auto full = verification::interior_positivity(s, domain, m.u.values);
        const auto nodal = verification::interior_positivity(s, domain, m.u.values, 0.05);
        // Positivity is required only of a nonnegative eigenfunction.
        ok = ok && (!full.nonnegative || full.min_on_subdomain > 0.0);
        summary += fmt("p=%.0f nonnegative=%s", p, full.nonnegative ? "yes" : "no (positivity n/a)");
        summary += fmt(", min on positive nodal part %.3g over %d nodes", nodal.min_on_subdomain,
                       nodal.subdomain_nodes);
      }
    }
    const double r1 = maxima[1] / maxima[0];
    const double r2 = maxima[2] / maxima[1];
    ok = ok && r1 >= 0.8 && r1 <= 1.25 && r2 >= 0.8 && r2 <= 1.25;
    summary += fmt(", max|u| %.4f/%.4f/%.4f ratios %.3f %.3f; ", maxima[0], maxima[1], maxima[2], r1, r2);
  }
  return {ok, summary};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "Sobolev-Poincare constant", 1.0, corollary_constant},
      {2, "Lipschitz display", 1.0, lipschitz_display},
      {3, "linear oracle", 60.0, linear_oracle},
      {4, "monotone iteration", 300.0, monotone_iteration},
      {5, "bound consistency", 600.0, bound_consistency},
      {6, "M_rq quadrature", 30.0, m_rq_quadrature},
      {7, "property suites", 120.0, property_suites},
      {8, "regularity surrogates", 300.0, regularity},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds < c.budget_seconds;
    const bool passed = o.passed && in_time;
    failures += passed ? 0 : 1;
    std::printf("criterion %d %s: %s (%.2fs of %.0fs) %s%s\n", c.id, c.name, passed ? "PASS" : "FAIL",
                seconds, c.budget_seconds, o.summary.c_str(), in_time ? "" : " [over time budget]");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
