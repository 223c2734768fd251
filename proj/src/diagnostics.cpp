#include "lra/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "lra/errors.hpp"

namespace lra {

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Linear:
      return "linear";
    case Regime::Sublinear:
      return "sublinear";
    default:
      return "undetermined";
  }
}

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  LineFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    rss += r * r;
  }
  fit.rms = std::sqrt(rss / n);
  return fit;
}

}  // namespace

double sublinear_slope_to_theta(double slope) { return slope / (2.0 * slope - 1.0); }

double theta_to_sublinear_slope(double theta) { return -theta / (1.0 - 2.0 * theta); }

RateFit fit_rate(const IterationTrace& trace, const RateFitOptions& opts) {
  // Tail sums of step norms, from the last recorded sweep backwards.
  std::vector<std::pair<int, double>> tail;  // (sweep, e_k)
  {
    double acc = 0.0;
    for (std::size_t i = trace.sweeps.size(); i-- > 0;) {
      const SweepRecord& s = trace.sweeps[i];
      if (std::isfinite(s.step_norm)) acc += s.step_norm;
      if (s.sweep >= 1 && acc > 0.0) tail.emplace_back(s.sweep, acc);
    }
    std::reverse(tail.begin(), tail.end());
  }
  if (static_cast<int>(tail.size()) < opts.min_sweeps) {
    throw InsufficientData("rate fit needs at least " + std::to_string(opts.min_sweeps) +
                           " sweeps with a positive error proxy, got " +
                           std::to_string(tail.size()));
  }

  const std::size_t count = tail.size();
  std::size_t window = static_cast<std::size_t>(std::ceil(count * opts.window_fraction));
  window = std::clamp<std::size_t>(window, 2, count);
  const std::size_t first = count - window;

  std::vector<double> ks, log_ks, log_es;
  for (std::size_t i = first; i < count; ++i) {
    ks.push_back(static_cast<double>(tail[i].first));
    log_ks.push_back(std::log(static_cast<double>(tail[i].first)));
    log_es.push_back(std::log(tail[i].second));
  }

  const LineFit lin = fit_line(ks, log_es);
  const LineFit sub = fit_line(log_ks, log_es);

  RateFit fit;
  fit.window_first = tail[first].first;
  fit.window_last = tail[count - 1].first;
  fit.linear_slope = lin.slope;
  fit.linear_residual = lin.rms;
  fit.sublinear_slope = sub.slope;
  fit.sublinear_residual = sub.rms;

  const double q = std::exp(lin.slope);
  const double theta_sub = sublinear_slope_to_theta(sub.slope);
  const bool lin_valid = q > 0.0 && q < 1.0;
  const bool sub_valid = sub.slope < 0.0 && theta_sub > 0.0 && theta_sub < 0.5;

  if (lin_valid && lin.rms < (1.0 - opts.margin) * sub.rms) {
    fit.regime = Regime::Linear;
    fit.q = q;
    fit.theta = 0.5;
    fit.residual = lin.rms;
  } else if (sub_valid && sub.rms < (1.0 - opts.margin) * lin.rms) {
    fit.regime = Regime::Sublinear;
    fit.theta = theta_sub;
    fit.residual = sub.rms;
  } else {
    fit.regime = Regime::Undetermined;
    fit.residual = std::min(lin.rms, sub.rms);
  }
  return fit;
}

LojasiewiczFit estimate_lojasiewicz(const IterationTrace& trace, const LojasiewiczOptions& opts) {
  const double f_star = trace.summary.f_star;
  if (!std::isfinite(f_star)) throw NotConverged("trace has no terminal objective value");
  const double tg = trace.summary.terminal_grad;
  if (!std::isfinite(tg) || tg > opts.converged_grad_tol) {
    throw NotConverged("terminal gradient norm above the convergence tolerance");
  }

  const double floor = 10.0 * std::numeric_limits<double>::epsilon() * std::abs(f_star);
  std::vector<std::pair<double, double>> pts;  // (log(f - f_*), log grad)
  for (const SweepRecord& s : trace.sweeps) {
    if (!std::isfinite(s.f) || !std::isfinite(s.grad_norm)) continue;
    if (s.grad_norm <= 0.0) continue;
    const double gap = s.f - f_star;
    if (gap <= floor || gap <= 0.0) continue;
    pts.emplace_back(std::log(gap), std::log(s.grad_norm));
  }
  if (static_cast<int>(pts.size()) < opts.min_points) {
    throw InsufficientData("Lojasiewicz fit needs at least " + std::to_string(opts.min_points) +
                           " sweeps above the noise floor, got " + std::to_string(pts.size()));
  }

  std::size_t window = static_cast<std::size_t>(std::ceil(pts.size() * opts.window_fraction));
  window = std::clamp<std::size_t>(window, 2, pts.size());
  std::vector<double> xs, ys;
  for (std::size_t i = pts.size() - window; i < pts.size(); ++i) {
    xs.push_back(pts[i].first);
    ys.push_back(pts[i].second);
  }
  const LineFit fit = fit_line(xs, ys);

  LojasiewiczFit out;
  out.points = static_cast<int>(window);
  out.theta_raw = 1.0 - fit.slope;
  out.theta_in_range = out.theta_raw > 0.0 && out.theta_raw <= 0.5;
  out.theta = std::clamp(out.theta_raw, 1e-6, 0.5);
  out.lambda_coef = std::exp(-fit.intercept);
  out.residual = fit.rms;
  return out;
}

SummabilityReport check_summability(const IterationTrace& trace, const SummabilityOptions& opts) {
  SummabilityReport rep;
  std::vector<double> steps;
  for (const SweepRecord& s : trace.sweeps) {
    if (s.sweep >= 1 && std::isfinite(s.step_norm)) steps.push_back(s.step_norm);
  }
  double sum_sq = 0.0;
  for (double s : steps) sum_sq += s * s;
  rep.sum_sq = sum_sq;

  const double sigma0 = trace.header.sigma0;
  const double f0 = trace.header.f0;
  const double f_star = trace.summary.f_star;
  if (std::isfinite(sigma0) && sigma0 > 0.0 && std::isfinite(f0) && std::isfinite(f_star)) {
    rep.bound = (2.0 / sigma0) * (f0 - f_star) + opts.slack;
    rep.sum_ok = sum_sq <= rep.bound;
  }

  if (steps.size() <= 1) {
    rep.steps_vanish = true;
  } else {
    double vanish_tol = opts.vanish_tol;
    if (trace.summary.stop_reason == StopReason::StepTol && trace.header.rule.step_tol) {
      vanish_tol = std::max(vanish_tol, *trace.header.rule.step_tol);
    }
    rep.steps_vanish = steps.back() < steps.front() && steps.back() < vanish_tol;
  }
  rep.pass = rep.sum_ok && rep.steps_vanish;
  return rep;
}

}  // namespace lra
