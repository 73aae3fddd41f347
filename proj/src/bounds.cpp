#include "cuspeig/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "cuspeig/errors.hpp"
#include "cuspeig/scalar_minimize.hpp"

namespace cuspeig::bounds {
namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

double lateral_sum(double a, const CuspDomain& domain) {
  double sum = domain.dimension() - 1.0 + a * a;
  for (double g : domain.exponents()) sum += (a * g - 1.0) * (a * g - 1.0);
  return sum;
}

void require_matching(const ExponentConfig& cfg, const CuspDomain& domain) {
  if (cfg.n != domain.dimension() || std::abs(cfg.gamma - domain.gamma()) > 1e-12 * domain.gamma()) {
    throw DomainError("exponent config (n, gamma) does not match the cusp domain");
  }
}

}  // namespace

double ExponentConfig::p_star_gamma() const {
  if (p >= gamma) return std::numeric_limits<double>::infinity();
  return gamma * p / (gamma - p);
}

double ExponentConfig::sobolev_exponent() const {
  if (s >= n) return std::numeric_limits<double>::infinity();
  return n * s / (n - s);
}

std::vector<std::string> ExponentConfig::structural_violations() const {
  std::vector<std::string> out;
  if (n < 2) out.push_back("requires n >= 2");
  if (!(gamma >= n)) out.push_back("requires gamma >= n (gamma = " + fmt(gamma) + ")");
  if (!(1.0 < s && s < p)) out.push_back("requires 1<s<p (s = " + fmt(s) + ", p = " + fmt(p) + ")");
  if (!(s < n)) out.push_back("requires s<n");
  if (!(1.0 < q)) out.push_back("requires 1<q");
  if (!(q < r) || !std::isfinite(r)) out.push_back("requires q<r<inf (q = " + fmt(q) + ", r = " + fmt(r) + ")");
  if (s > 0.0 && r > 0.0) {
    const double d = delta();
    if (!(d >= 0.0)) out.push_back("requires delta = 1/s - 1/r >= 0");
    if (!(d < 1.0 / n)) out.push_back("requires delta = 1/s - 1/r < 1/n (delta = " + fmt(d) + ")");
  }
  return out;
}

std::vector<std::string> ExponentConfig::hypothesis_violations() const {
  std::vector<std::string> out;
  if (!(p < gamma)) out.push_back("requires 1<s<p<gamma (p = " + fmt(p) + ", gamma = " + fmt(gamma) + ")");
  const double ps = p_star_gamma();
  if (!(q < ps)) out.push_back("requires 1<q<p*_gamma (p*_gamma = " + fmt(ps) + ")");
  if (!(ps < sobolev_exponent())) {
    out.push_back("requires p*_gamma<ns/(n-s) (p*_gamma = " + fmt(ps) +
                  ", ns/(n-s) = " + fmt(sobolev_exponent()) + ")");
  }
  return out;
}

void ExponentConfig::require_structural() const {
  const auto v = structural_violations();
  if (!v.empty()) throw DomainError("invalid exponent configuration: " + v.front());
}

ExponentConfig ExponentConfig::with_default_sr(double p, double q, const CuspDomain& domain) {
  ExponentConfig cfg;
  cfg.p = p;
  cfg.q = q;
  cfg.n = domain.dimension();
  cfg.gamma = domain.gamma();
  const double n = cfg.n;
  const double ps = cfg.p_star_gamma();
  // ns/(n-s) > p* iff s > n p* / (n + p*).
  const double s_min = std::isfinite(ps) ? n * ps / (n + ps) : n;
  const double cap = std::min(p, n);
  double s = 1.05 * s_min;
  if (s >= cap) s = 0.5 * (s_min + cap);
  if (s <= 1.0) s = 0.5 * (1.0 + cap);
  cfg.s = s;
  cfg.r = 0.5 * (q + std::min(ps, cfg.sobolev_exponent()));
  return cfg;
}

double unit_ball_volume(int n) {
  return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

double k_ps_formula(double a, double p, const CuspDomain& domain) {
  if (!(a > 0.0)) throw DomainError("mapping exponent a must be positive");
  if (!(p > 1.0)) throw DomainError("requires p > 1");
  return std::pow(a, -1.0 / p) * std::sqrt(lateral_sum(a, domain));
}

double k_ps_bound(double a, const ExponentConfig& cfg, const CuspDomain& domain) {
  require_matching(cfg, domain);
  if (!(cfg.p < cfg.gamma)) throw DomainError("requires 1<s<p<gamma for the (p,s)-distortion bound");
  const double lo = (cfg.n - cfg.p) / (cfg.gamma - cfg.p);
  const double hi = cfg.p * (cfg.n - cfg.s) / (cfg.s * (cfg.gamma - cfg.p));
  if (!(a > lo && a < hi)) {
    throw DomainError("inadmissible mapping exponent a = " + fmt(a) + ": requires " + fmt(lo) +
                      " < a < " + fmt(hi));
  }
  return k_ps_formula(a, cfg.p, domain);
}

double m_rq_bound(double a, double q, const ExponentConfig& cfg) {
  if (!(a > cfg.n / cfg.gamma)) {
    throw DomainError("requires a > n/gamma for a finite M_{r,q} (a = " + fmt(a) + ")");
  }
  return std::pow(a, 1.0 / q);
}

double m_rq_exact(double a, const ExponentConfig& cfg, const CuspDomain& domain) {
  require_matching(cfg, domain);
  if (!(a > 0.0)) throw DomainError("mapping exponent a must be positive");
  if (!(cfg.r > cfg.q && cfg.q > 1.0)) throw DomainError("requires 1<q<r");
  const double n = cfg.n;
  const double exponent = (a * cfg.gamma - n) * cfg.r / (cfg.r - cfg.q) + n - 1.0;
  if (!(exponent > -1.0)) {
    throw DomainError("M_{r,q} integral diverges: requires a > nq/(gamma r)");
  }
  // int_0^1 t^exponent dt = 1 / (exponent + 1)
  return std::pow(a, 1.0 / cfg.q) *
         std::pow(1.0 / (exponent + 1.0), (cfg.r - cfg.q) / (cfg.r * cfg.q));
}

double b_rs_estimate(int n, double r, double s) {
  if (n < 2) throw DomainError("requires n >= 2");
  const double delta = 1.0 / s - 1.0 / r;
  if (!(delta >= 0.0)) throw DomainError("requires delta = 1/s - 1/r >= 0");
  if (!(delta < 1.0 / n)) throw DomainError("requires delta = 1/s - 1/r < 1/n");
  const double nn = n;
  return nn * std::pow((1.0 - delta) / (1.0 / nn - delta), 1.0 - delta) *
         std::pow(unit_ball_volume(n), 1.0 - 1.0 / nn) *
         std::pow(1.0 / std::tgamma(nn + 2.0), 1.0 / nn - delta);
}

std::pair<double, double> admissible_interval(const ExponentConfig& cfg) {
  if (!(cfg.p < cfg.gamma)) throw DomainError("requires 1<s<p<gamma: no admissible mapping exponent");
  const double lo = cfg.n / cfg.gamma;
  const double hi = cfg.p * (cfg.n - cfg.s) / (cfg.s * (cfg.gamma - cfg.p));
  if (!(lo < hi)) {
    throw DomainError("empty admissible interval (" + fmt(lo) + ", " + fmt(hi) +
                      "): choose a different s");
  }
  return {lo, hi};
}

double inverse_lambda_objective(double a, const ExponentConfig& cfg, const CuspDomain& domain,
                                double b_rs) {
  return std::pow(a, cfg.p / cfg.q - 1.0) * std::pow(lateral_sum(a, domain), 0.5 * cfg.p) *
         std::pow(b_rs, cfg.p);
}

BoundReport lambda_lower_bound(const ExponentConfig& cfg, const CuspDomain& domain,
                               const BoundOptions& options) {
  require_matching(cfg, domain);
  cfg.require_structural();
  BoundReport report;
  report.hypothesis_violations = cfg.hypothesis_violations();
  report.b_rs = options.b_override ? *options.b_override : b_rs_estimate(cfg.n, cfg.r, cfg.s);
  if (!(report.b_rs > 0.0)) throw DomainError("Sobolev-Poincare constant must be positive");

  const auto objective = [&](double a) {
    return inverse_lambda_objective(a, cfg, domain, report.b_rs);
  };

  if (options.pinned_a || !(cfg.p < cfg.gamma)) {
    const double a = options.pinned_a.value_or(1.0);
    if (!(a > 0.0)) throw DomainError("mapping exponent a must be positive");
    report.pinned = options.pinned_a.has_value();
    report.degenerate = !(cfg.p < cfg.gamma);
    report.a_star = a;
    report.interval = {a, a};
    if (!report.degenerate) {
      try {
        report.interval = admissible_interval(cfg);
      } catch (const DomainError& e) {
        report.hypothesis_violations.emplace_back(e.what());
      }
    }
    if (!report.degenerate && !(a > report.interval.first && a < report.interval.second)) {
      report.hypothesis_violations.push_back("pinned a = " + fmt(a) + " lies outside I_a");
    }
    report.evaluations.emplace_back(a, objective(a));
  } else {
    const auto [lo, hi] = admissible_interval(cfg);
    report.interval = {lo, hi};
    const double a0 = lo + options.endpoint_shrink;
    const double a1 = hi - options.endpoint_shrink;
    const int m = std::max(options.grid_points, 3);
    std::size_t best = 0;
    for (int i = 0; i < m; ++i) {
      const double a = a0 + (a1 - a0) * i / (m - 1.0);
      report.evaluations.emplace_back(a, objective(a));
      if (report.evaluations.back().second < report.evaluations[best].second) {
        best = report.evaluations.size() - 1;
      }
    }
    const double bl = report.evaluations[best == 0 ? 0 : best - 1].first;
    const double br = report.evaluations[std::min<std::size_t>(best + 1, m - 1)].first;
    const auto refined = golden_section_minimize(objective, bl, br, options.a_tolerance);
    if (refined.value <= report.evaluations[best].second) {
      report.evaluations.emplace_back(refined.x, refined.value);
      report.a_star = refined.x;
    } else {
      report.a_star = report.evaluations[best].first;
    }
  }

  const double a = report.a_star;
  report.k_ps = k_ps_formula(a, cfg.p, domain);
  report.m_rq = std::pow(a, 1.0 / cfg.q);
  report.upper_on_inverse_lambda = objective(a);
  if (!std::isfinite(report.upper_on_inverse_lambda) || !(report.upper_on_inverse_lambda > 0.0)) {
    throw NumericalError("non-finite bound objective at a = " + fmt(a));
  }
  report.lambda_lower = 1.0 / report.upper_on_inverse_lambda;
  return report;
}

double corollary_32(double gamma_1, double gamma_2) {
  const double exps[] = {gamma_1, gamma_2};
  const double gamma = gamma_of(exps);
  if (!(gamma < 6.0)) {
    throw DomainError("requires 3<gamma<6 to take a = 1 (gamma = " + fmt(gamma) + ")");
  }
  const double s = (gamma_1 - 1.0) * (gamma_1 - 1.0) + (gamma_2 - 1.0) * (gamma_2 - 1.0) + 3.0;
  return std::pow(12.0 * std::numbers::pi, -3.0) * std::pow(s, -1.5);
}

}  // namespace cuspeig::bounds
