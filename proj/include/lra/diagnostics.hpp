#pragma once

#include <string>

#include "lra/trace.hpp"

namespace lra {

enum class Regime { Linear, Sublinear, Undetermined };

std::string to_string(Regime r);

struct RateFitOptions {
  int min_sweeps = 20;
  /// Fraction of the eligible sweeps, taken from the end, used for fitting.
  double window_fraction = 0.5;
  /// Required residual separation between the two models; below it the
  /// regime stays Undetermined.
  double margin = 0.10;
};

/// Convergence-rate classification of a trace. The error proxy is the tail
/// sum of step norms e_k = sum_{j>=k} |x_{j+1}-x_j|, an upper bound on the
/// distance to the limit. Linear means e_k ~ q^k; sublinear means
/// e_k ~ k^(-theta/(1-2theta)).
struct RateFit {
  Regime regime = Regime::Undetermined;
  double q = kUnset;
  double theta = kUnset;
  double lambda_coef = kUnset;  // filled when a Lojasiewicz fit accompanies
  int window_first = 0;
  int window_last = 0;
  double residual = kUnset;  // RMS log-domain residual of the chosen model
  double linear_slope = kUnset;
  double linear_residual = kUnset;
  double sublinear_slope = kUnset;
  double sublinear_residual = kUnset;
};

RateFit fit_rate(const IterationTrace& trace, const RateFitOptions& opts = {});

/// theta = s/(2s - 1) for a log-log slope s < 0; inverse of
/// theta -> -theta/(1 - 2 theta).
double sublinear_slope_to_theta(double slope);
double theta_to_sublinear_slope(double theta);

struct LojasiewiczOptions {
  int min_points = 20;
  double window_fraction = 0.5;
  /// A trace whose terminal gradient exceeds this is rejected as unconverged.
  double converged_grad_tol = 1e-6;
};

/// Exponent/coefficient estimate for the gradient inequality
/// |f - f_*|^(1-theta) <= Lambda |grad f| from the regression of
/// log|grad f| on log(f - f_*).
struct LojasiewiczFit {
  double theta = kUnset;      // clamped to (0, 1/2]
  double theta_raw = kUnset;  // unclamped regression value
  double lambda_coef = kUnset;
  double residual = kUnset;
  bool theta_in_range = true;
  int points = 0;
};

LojasiewiczFit estimate_lojasiewicz(const IterationTrace& trace,
                                    const LojasiewiczOptions& opts = {});

struct SummabilityOptions {
  double slack = 1e-8;
  double vanish_tol = 1e-8;
};

/// Checks sum step^2 <= (2/sigma0)(f0 - f_*) + slack and that the step norms
/// die out. Reports pass/fail instead of throwing.
struct SummabilityReport {
  double sum_sq = kUnset;
  double bound = kUnset;
  bool sum_ok = false;
  bool steps_vanish = false;
  bool pass = false;
};

SummabilityReport check_summability(const IterationTrace& trace,
                                    const SummabilityOptions& opts = {});

}  // namespace lra
