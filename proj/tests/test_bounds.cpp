#include "doctest.h"

#include <cmath>
#include <numbers>

#include "cuspeig/bounds.hpp"
#include "cuspeig/errors.hpp"

using namespace cuspeig;
using namespace cuspeig::bounds;

namespace {

constexpr double pi = std::numbers::pi;

ExponentConfig config(const CuspDomain& d, double p, double q, double s, double r) {
  ExponentConfig c;
  c.p = p;
  c.q = q;
  c.s = s;
  c.r = r;
  c.n = d.dimension();
  c.gamma = d.gamma();
  return c;
}

// Composite Simpson on [lo, hi], used as an independent quadrature oracle.
template <typename F>
double simpson(F f, double lo, double hi, int panels) {
  const double h = (hi - lo) / panels;
  double sum = f(lo) + f(hi);
  for (int i = 1; i < panels; ++i) sum += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

}  // namespace

TEST_CASE("unit ball volumes") {
  CHECK(unit_ball_volume(2) == doctest::Approx(pi));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * pi / 3.0));
}

TEST_CASE("K_{p,s} at sample arguments") {
  CHECK(k_ps_formula(1.0, 3.0, CuspDomain::reference(3)) == doctest::Approx(std::sqrt(3.0)));
  for (double g : {1.2, 1.5, 2.0}) {
    const CuspDomain d({g, g + 0.3});
    const double expect =
        std::sqrt((g - 1.0) * (g - 1.0) + (g - 0.7) * (g - 0.7) + 3.0);
    CHECK(k_ps_formula(1.0, 3.0, d) == doctest::Approx(expect).epsilon(1e-14));
  }
  // Direct arithmetic: 2^{-1/2} sqrt(5^2 + 1 + 4).
  CHECK(k_ps_formula(2.0, 2.0, CuspDomain({3.0})) == doctest::Approx(std::sqrt(15.0)));
}

TEST_CASE("K_{p,s} enforces the mapping window") {
  const CuspDomain d({2.0, 2.0});
  const ExponentConfig cfg = config(d, 3.0, 2.0, 1.5, 2.5);
  CHECK(k_ps_bound(1.0, cfg, d) == doctest::Approx(k_ps_formula(1.0, 3.0, d)));
  CHECK_THROWS_AS(k_ps_bound(5.0, cfg, d), DomainError);
}

TEST_CASE("M_{r,q} upper bound") {
  const CuspDomain d({2.0, 2.0});
  ExponentConfig cfg = config(d, 3.0, 2.0, 1.5, 2.5);
  CHECK(m_rq_bound(1.0, 2.0, cfg) == doctest::Approx(1.0));
  CHECK(m_rq_bound(2.0, 2.0, cfg) == doctest::Approx(std::sqrt(2.0)));
  CHECK(m_rq_bound(1.5, 3.0, cfg) == doctest::Approx(std::cbrt(1.5)));
  CHECK(m_rq_bound(1.5, 3.0, cfg) == doctest::Approx(1.1447).epsilon(1e-4));
  CHECK_THROWS_AS(m_rq_bound(0.5, 2.0, cfg), DomainError);
}

TEST_CASE("M_{r,q} closed form") {
  for (int n : {2, 3}) {
    const CuspDomain ref = CuspDomain::reference(n);
    const ExponentConfig cfg = config(ref, 3.0, 2.0, 1.5, 2.5);
    const double e = (2.5 - 2.0) / (2.5 * 2.0);
    CHECK(m_rq_exact(1.0, cfg, ref) == doctest::Approx(std::pow(1.0 / n, e)).epsilon(1e-14));
  }

  // n = 3, gamma = 4, a = 1.2, r = 5/2, q = 2. Oracle: integrate the
  // slice-wise Jacobian power a^{r/(r-q)} t^{(a gamma - n) r/(r-q)} against
  // the slice area t^{n-1} numerically.
  const CuspDomain d({1.5, 1.5});
  const ExponentConfig cfg = config(d, 3.0, 2.0, 1.5, 2.5);
  const double a = 1.2;
  const double power = 2.5 / 0.5;
  const auto integrand = [&](double t) {
    return std::pow(a * std::pow(t, a * 4.0 - 3.0), power) * t * t;
  };
  const double integral = simpson(integrand, 0.0, 1.0, 2000);
  const double oracle = std::pow(integral, 0.5 / 5.0);
  CHECK(std::abs(m_rq_exact(a, cfg, d) - oracle) <= 1e-10);
  // (a gamma - n) r / (r - q) + n - 1 = 1.8 * 5 + 2 = 11.
  CHECK(m_rq_exact(a, cfg, d) == doctest::Approx(std::sqrt(1.2) * std::pow(12.0, -0.1)).epsilon(1e-14));

  for (double aa : {0.8, 1.0, 1.3, 2.0}) {
    CHECK(m_rq_exact(aa, cfg, d) <= std::pow(aa, 0.5) * (1.0 + 1e-15));
  }
  CHECK_THROWS_AS(m_rq_exact(0.1, cfg, d), DomainError);
}

TEST_CASE("B_{r,s} estimate") {
  const double expect = 3.0 * std::pow(11.0, 11.0 / 15.0) * std::pow(4.0 * pi / 3.0, 2.0 / 3.0) *
                        std::pow(1.0 / 24.0, 1.0 / 15.0);
  const double b = b_rs_estimate(3, 2.5, 1.5);
  CHECK(std::abs(b - expect) <= 1e-9 * expect);
  CHECK(b <= 12.0 * pi);
  CHECK(b == doctest::Approx(36.6034).epsilon(1e-5));

  const double flat = 9.0 * std::pow(4.0 * pi / 3.0, 2.0 / 3.0) * std::pow(1.0 / 24.0, 1.0 / 3.0);
  CHECK(b_rs_estimate(3, 2.0, 2.0) == doctest::Approx(flat).epsilon(1e-14));

  CHECK_THROWS_AS(b_rs_estimate(3, 1.5, 2.5), DomainError);   // delta < 0
  CHECK_THROWS_AS(b_rs_estimate(3, 10.0, 1.2), DomainError);  // delta >= 1/n
}

TEST_CASE("admissible interval") {
  ExponentConfig cfg;
  cfg.n = 3;
  cfg.gamma = 5.0;
  cfg.p = 3.0;
  cfg.s = 1.5;
  cfg.q = 2.0;
  cfg.r = 2.5;
  const auto [lo, hi] = admissible_interval(cfg);
  CHECK(lo == doctest::Approx(0.6));
  CHECK(hi == doctest::Approx(1.5));

  cfg.gamma = 3.0 + 1e-9;
  cfg.p = 2.0;
  CHECK(admissible_interval(cfg).first == doctest::Approx(1.0));

  cfg.gamma = 3.0;
  cfg.p = 3.0;
  CHECK_THROWS_AS(admissible_interval(cfg), DomainError);
}

TEST_CASE("corollary closed form") {
  const double lip = corollary_32(1.0, 1.0);
  const double expect = std::pow(12.0 * pi * std::sqrt(3.0), -3.0);
  CHECK(std::abs(lip - expect) <= 1e-12 * expect);
  CHECK(corollary_32(1.5, 1.5) ==
        doctest::Approx(std::pow(12.0 * pi, -3.0) * std::pow(3.5, -1.5)).epsilon(1e-14));
  CHECK_THROWS_AS(corollary_32(3.0, 2.0), DomainError);
}

TEST_CASE("lambda lower bound report invariants") {
  const CuspDomain d({2.0, 2.0});
  const ExponentConfig cfg = config(d, 3.0, 2.0, 1.5, 2.5);
  const BoundReport rep = lambda_lower_bound(cfg, d);
  CHECK(rep.lambda_lower == doctest::Approx(1.0 / rep.upper_on_inverse_lambda));
  CHECK(rep.a_star > rep.interval.first);
  CHECK(rep.a_star < rep.interval.second);
  for (const auto& [a, value] : rep.evaluations) {
    CHECK(rep.upper_on_inverse_lambda <= value * (1.0 + 1e-14));
  }
  CHECK(rep.upper_on_inverse_lambda ==
        doctest::Approx(inverse_lambda_objective(rep.a_star, cfg, d, rep.b_rs)));
  CHECK(rep.k_ps == doctest::Approx(k_ps_formula(rep.a_star, 3.0, d)));
}

TEST_CASE("pinned evaluation reproduces the corollary in the Lipschitz case") {
  const CuspDomain d = CuspDomain::reference(3);
  const ExponentConfig cfg = config(d, 3.0, 2.0, 1.5, 2.5);
  BoundOptions opts;
  opts.b_override = 12.0 * pi;
  const BoundReport rep = lambda_lower_bound(cfg, d, opts);
  CHECK(rep.degenerate);
  CHECK(rep.a_star == 1.0);
  CHECK(rep.lambda_lower == doctest::Approx(corollary_32(1.0, 1.0)).epsilon(1e-12));
  CHECK_FALSE(rep.hypothesis_violations.empty());
}

TEST_CASE("structural checks on exponent tuples") {
  const CuspDomain d({2.0, 2.0});
  CHECK(config(d, 3.0, 2.0, 1.5, 2.5).structural_violations().empty());
  CHECK_THROWS_AS(config(d, 3.0, 2.0, 3.5, 4.0).require_structural(), DomainError);
  CHECK_THROWS_AS(config(d, 3.0, 2.0, 1.5, 1.8).require_structural(), DomainError);
  const ExponentConfig dflt = ExponentConfig::with_default_sr(2.0, 2.0, d);
  CHECK(dflt.structural_violations().empty());
  CHECK(dflt.s < dflt.p);
  CHECK(dflt.r > dflt.q);
}
