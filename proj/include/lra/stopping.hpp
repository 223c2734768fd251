#pragma once

#include <optional>
#include <string>

#include "lra/errors.hpp"

namespace lra {

enum class StopReason { None, MaxSweeps, LambdaTol, GradTol, StepTol };

std::string to_string(StopReason r);
StopReason stop_reason_from_string(const std::string& s);

/// Termination control shared by the iterative solvers. max_sweeps is always
/// active; the tolerances are active only when set. For the power method
/// grad_tol bounds the spherical residual max_mu |F^mu(y) - lambda*y^mu| and
/// lambda_tol bounds the per-sweep singular-value increment; for the
/// least-squares solvers grad_tol bounds |grad f| and step_tol the per-sweep
/// step norm.
struct StoppingRule {
  int max_sweeps = 500;
  std::optional<double> lambda_tol;
  std::optional<double> grad_tol;
  std::optional<double> step_tol;

  void validate() const {
    if (max_sweeps < 1) throw Error("max_sweeps must be positive");
    if (lambda_tol && *lambda_tol < 0.0) throw Error("lambda_tol must be >= 0");
    if (grad_tol && *grad_tol < 0.0) throw Error("grad_tol must be >= 0");
    if (step_tol && *step_tol < 0.0) throw Error("step_tol must be >= 0");
  }
};

}  // namespace lra
