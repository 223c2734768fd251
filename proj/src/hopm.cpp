#include "lra/hopm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "lra/errors.hpp"

namespace lra {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace

HopmState hopm_sweep(const DenseTensor& t, const HopmState& state) {
  FactorTuple y = state.y;
  for (std::size_t mu = 0; mu < y.order(); ++mu) {
    std::vector<double> v = partial_contraction(t, y, mu);
    const double n = detail::norm(v);
    if (n == 0.0) {
      throw ZeroContraction("contraction norm vanished at mode " + std::to_string(mu) +
                            " in sweep " + std::to_string(state.sweep + 1));
    }
    for (double& e : v) e /= n;
    y = y.with_mode(mu, std::move(v));
  }
  return HopmState{y, multilinear_form(t, y), state.sweep + 1};
}

double spherical_residual(const DenseTensor& t, const FactorTuple& y, double lambda) {
  double worst = 0.0;
  for (std::size_t mu = 0; mu < y.order(); ++mu) {
    const std::vector<double> v = partial_contraction(t, y, mu);
    const auto& ymu = y.mode(mu);
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double d = v[i] - lambda * ymu[i];
      acc += d * d;
    }
    worst = std::max(worst, std::sqrt(acc));
  }
  return worst;
}

HopmRun run_hopm(const DenseTensor& t, const FactorTuple& y0, const StoppingRule& rule) {
  rule.validate();
  if (!y0.dims_match(t)) throw DimsMismatch("starting tuple dims do not match tensor dims");
  if (detail::norm(partial_contraction(t, y0, 0)) == 0.0) {
    throw BadStart("first contraction of the starting guess is zero");
  }

  HopmRun run;
  run.trace.header.kind = "hopm";
  run.trace.header.dims = t.dims();
  run.trace.header.norm_target = frobenius_norm(t);
  run.trace.header.rule = rule;

  const double t0 = now_seconds();
  HopmState state{y0, multilinear_form(t, y0), 0};
  {
    SweepRecord rec;
    rec.sweep = 0;
    rec.lambda = state.lambda;
    rec.residual = spherical_residual(t, y0, state.lambda);
    rec.step_norm = 0.0;
    rec.wall_time = now_seconds() - t0;
    run.trace.sweeps.push_back(rec);
  }

  StopReason reason = StopReason::None;
  double residual = run.trace.sweeps.front().residual;
  while (reason == StopReason::None) {
    const HopmState prev = state;
    state = hopm_sweep(t, state);
    residual = spherical_residual(t, state.y, state.lambda);

    SweepRecord rec;
    rec.sweep = state.sweep;
    rec.lambda = state.lambda;
    rec.residual = residual;
    rec.step_norm = tuple_distance(state.y, prev.y);
    rec.wall_time = now_seconds() - t0;
    run.trace.sweeps.push_back(rec);

    if (rule.grad_tol && residual < *rule.grad_tol) {
      reason = StopReason::GradTol;
    } else if (rule.lambda_tol && state.lambda - prev.lambda < *rule.lambda_tol) {
      reason = StopReason::LambdaTol;
    } else if (state.sweep >= rule.max_sweeps) {
      reason = StopReason::MaxSweeps;
    }
  }

  run.state = state;
  run.trace.summary.sweeps = state.sweep;
  run.trace.summary.stop_reason = reason;
  run.trace.summary.lambda_star = state.lambda;
  run.trace.summary.terminal_grad = residual;
  return run;
}

FactorTuple random_start(const DenseTensor& t, Rng& rng) {
  const auto& dims = t.dims();
  for (int attempt = 0; attempt < 16; ++attempt) {
    std::vector<std::vector<double>> vecs(dims.size());
    bool degenerate = false;
    for (std::size_t mu = 0; mu < dims.size(); ++mu) {
      vecs[mu].resize(dims[mu]);
      for (double& e : vecs[mu]) e = rng.normal();
      const double n = detail::norm(vecs[mu]);
      if (n == 0.0) {
        degenerate = true;
        break;
      }
      for (double& e : vecs[mu]) e /= n;
    }
    if (degenerate) continue;
    FactorTuple y(std::move(vecs));
    if (detail::norm(partial_contraction(t, y, 0)) > 0.0) return y;
  }
  throw BadStart("no starting guess with nonzero first contraction after 16 attempts");
}

}  // namespace lra
