#include <doctest.h>

#include <cmath>
#include <vector>

#include "lra/als.hpp"
#include "lra/diagnostics.hpp"
#include "lra/errors.hpp"
#include "lra/hopm.hpp"
#include "lra/oracle.hpp"
#include "test_helpers.hpp"

using namespace lra;

namespace {

/// Steps whose tail sums reproduce a prescribed error sequence e_k exactly.
IterationTrace trace_from_error_sequence(const std::vector<double>& e) {
  IterationTrace trace;
  trace.header.kind = "synthetic";
  for (std::size_t k = 0; k < e.size(); ++k) {
    SweepRecord rec;
    rec.sweep = static_cast<int>(k + 1);
    rec.step_norm = (k + 1 < e.size()) ? e[k] - e[k + 1] : e[k];
    trace.sweeps.push_back(rec);
  }
  return trace;
}

IterationTrace geometric_trace(double q, int sweeps) {
  std::vector<double> e(static_cast<std::size_t>(sweeps));
  for (int k = 1; k <= sweeps; ++k) e[static_cast<std::size_t>(k - 1)] = std::pow(q, k);
  return trace_from_error_sequence(e);
}

IterationTrace power_trace(double p, int sweeps) {
  std::vector<double> e(static_cast<std::size_t>(sweeps));
  for (int k = 1; k <= sweeps; ++k) e[static_cast<std::size_t>(k - 1)] = std::pow(k, -p);
  return trace_from_error_sequence(e);
}

/// Gradient descent on f(x) = x^p from x0 = 1; records f, |f'|, and steps.
IterationTrace descent_trace(double p, double eta, int sweeps) {
  IterationTrace trace;
  trace.header.kind = "synthetic";
  double x = 1.0;
  for (int k = 1; k <= sweeps; ++k) {
    const double grad = p * std::pow(x, p - 1.0);
    const double next = x - eta * grad;
    SweepRecord rec;
    rec.sweep = k;
    rec.f = std::pow(x, p);
    rec.grad_norm = grad;
    rec.step_norm = std::abs(next - x);
    trace.sweeps.push_back(rec);
    x = next;
  }
  trace.summary.f_star = 0.0;
  trace.summary.terminal_grad = p * std::pow(x, p - 1.0);
  trace.summary.stop_reason = StopReason::GradTol;
  return trace;
}

}  // namespace

TEST_CASE("exponent algebra round-trips") {
  for (double theta = 0.05; theta < 0.5; theta += 0.05) {
    const double slope = theta_to_sublinear_slope(theta);
    CHECK(sublinear_slope_to_theta(slope) == doctest::Approx(theta).epsilon(1e-10));
  }
  CHECK(sublinear_slope_to_theta(-1.0) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("rate fit recovers geometric decay") {
  for (double q : {0.5, 0.9, 0.99}) {
    const RateFit fit = fit_rate(geometric_trace(q, 120));
    CHECK(fit.regime == Regime::Linear);
    CHECK(fit.q == doctest::Approx(q).epsilon(1e-6));
    CHECK(fit.theta == 0.5);
    CHECK(fit.residual < 1e-8);
  }
}

TEST_CASE("rate fit recovers algebraic decay") {
  {
    const RateFit fit = fit_rate(power_trace(1.0, 200));
    CHECK(fit.regime == Regime::Sublinear);
    CHECK(fit.theta == doctest::Approx(1.0 / 3.0).epsilon(0.02));
  }
  {
    const RateFit fit = fit_rate(power_trace(0.5, 200));
    CHECK(fit.regime == Regime::Sublinear);
    CHECK(fit.theta == doctest::Approx(0.25).epsilon(0.08));
  }
}

TEST_CASE("rate fit rejects short traces") {
  CHECK_THROWS_AS(fit_rate(geometric_trace(0.9, 5)), InsufficientData);
}

TEST_CASE("converged solver trace classifies cleanly") {
  const DenseTensor t = random_gaussian_tensor({3, 3, 3}, 7);
  Rng rng(8);
  StoppingRule rule;
  rule.grad_tol = 1e-12;
  rule.max_sweeps = 200;
  const AlsRun run = run_als(t, random_start(t, rng), rule);
  const RateFit fit = fit_rate(run.trace);
  CHECK(fit.regime == Regime::Linear);
  CHECK(fit.residual < 0.5);

  // Cross-method agreement: a linear regime pairs with theta near 1/2.
  const LojasiewiczFit loj = estimate_lojasiewicz(run.trace);
  CHECK((fit.regime == Regime::Linear) == (std::abs(loj.theta - 0.5) <= 0.05));
}

TEST_CASE("Lojasiewicz exponent from synthetic descent") {
  {
    const LojasiewiczFit fit = estimate_lojasiewicz(descent_trace(2.0, 0.1, 90));
    CHECK(fit.theta == doctest::Approx(0.5).epsilon(0.02));
    CHECK(fit.theta_in_range);
  }
  {
    LojasiewiczOptions opts;
    opts.converged_grad_tol = 1e-2;  // quartic descent crawls; the fit needs no smaller gradient
    const LojasiewiczFit fit = estimate_lojasiewicz(descent_trace(4.0, 0.05, 3000), opts);
    CHECK(fit.theta == doctest::Approx(0.25).epsilon(0.02));
  }
}

TEST_CASE("Lojasiewicz fit is scale-equivariant") {
  const IterationTrace base = descent_trace(2.0, 0.1, 90);
  const LojasiewiczFit f1 = estimate_lojasiewicz(base);
  for (double c : {4.0, 1e-3}) {
    IterationTrace scaled = base;
    for (auto& s : scaled.sweeps) {
      s.f *= c;
      s.grad_norm *= c;
    }
    scaled.summary.terminal_grad *= c;
    LojasiewiczOptions opts;
    opts.converged_grad_tol = 1.0;
    const LojasiewiczFit f2 = estimate_lojasiewicz(scaled, opts);
    CHECK(f2.theta == doctest::Approx(f1.theta).epsilon(1e-6));
    CHECK(f2.lambda_coef / f1.lambda_coef ==
          doctest::Approx(std::pow(c, -f1.theta)).epsilon(1e-6));
  }
}

TEST_CASE("Lojasiewicz fit rejects unusable traces") {
  IterationTrace bad = descent_trace(2.0, 0.1, 90);
  bad.summary.terminal_grad = 1.0;
  CHECK_THROWS_AS(estimate_lojasiewicz(bad), NotConverged);

  IterationTrace no_fstar = descent_trace(2.0, 0.1, 90);
  no_fstar.summary.f_star = kUnset;
  CHECK_THROWS_AS(estimate_lojasiewicz(no_fstar), NotConverged);

  LojasiewiczOptions lenient;
  lenient.converged_grad_tol = 1.0;
  CHECK_THROWS_AS(estimate_lojasiewicz(descent_trace(2.0, 0.1, 10), lenient), InsufficientData);
}

TEST_CASE("summability report") {
  SUBCASE("converged solver run passes") {
    const DenseTensor t = random_gaussian_tensor({3, 3, 3}, 17);
    Rng rng(18);
    StoppingRule rule;
    rule.grad_tol = 1e-10;
    rule.max_sweeps = 500;
    const AlsRun run = run_als(t, random_start(t, rng), rule);
    const SummabilityReport rep = check_summability(run.trace);
    CHECK(rep.sum_ok);
    CHECK(rep.steps_vanish);
    CHECK(rep.pass);
  }
  SUBCASE("constant steps fail") {
    IterationTrace trace;
    trace.header.kind = "synthetic";
    trace.header.f0 = 1.0;
    trace.header.sigma0 = 1.0;
    trace.summary.f_star = 0.5;
    for (int k = 1; k <= 100; ++k) {
      SweepRecord rec;
      rec.sweep = k;
      rec.step_norm = 0.2;
      trace.sweeps.push_back(rec);
    }
    const SummabilityReport rep = check_summability(trace);
    CHECK_FALSE(rep.sum_ok);
    CHECK_FALSE(rep.steps_vanish);
    CHECK_FALSE(rep.pass);
  }
  SUBCASE("single-sweep trace passes trivially") {
    IterationTrace trace;
    trace.header.f0 = 1.0;
    trace.header.sigma0 = 1.0;
    trace.summary.f_star = 0.9;
    SweepRecord rec;
    rec.sweep = 1;
    rec.step_norm = 0.3;
    trace.sweeps.push_back(rec);
    const SummabilityReport rep = check_summability(trace);
    CHECK(rep.sum_sq == doctest::Approx(0.09));
    CHECK(rep.pass);
  }
}

TEST_CASE("late iterates cluster at the limit") {
  const DenseTensor t = random_gaussian_tensor({3, 3, 3}, 27);
  Rng rng(28);
  StoppingRule rule;
  rule.max_sweeps = 200;  // run far past convergence
  const AlsRun run = run_als(t, random_start(t, rng), rule);
  const std::size_t quarter = run.trace.sweeps.size() / 4;
  double diameter_bound = 0.0;
  for (std::size_t i = run.trace.sweeps.size() - quarter; i < run.trace.sweeps.size(); ++i) {
    diameter_bound += run.trace.sweeps[i].step_norm;
  }
  CHECK(diameter_bound < 10.0 * 1e-12);
}
