#include "lra/trace.hpp"

#include <cmath>

namespace lra {

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::MaxSweeps:
      return "max_sweeps";
    case StopReason::LambdaTol:
      return "lambda_tol";
    case StopReason::GradTol:
      return "grad_tol";
    case StopReason::StepTol:
      return "step_tol";
    default:
      return "none";
  }
}

StopReason stop_reason_from_string(const std::string& s) {
  if (s == "max_sweeps") return StopReason::MaxSweeps;
  if (s == "lambda_tol") return StopReason::LambdaTol;
  if (s == "grad_tol") return StopReason::GradTol;
  if (s == "step_tol") return StopReason::StepTol;
  return StopReason::None;
}

std::vector<SweepRecord> sweeps_from_blocks(const std::vector<BlockRecord>& blocks) {
  std::vector<SweepRecord> out;
  for (const BlockRecord& b : blocks) {
    if (out.empty() || out.back().sweep != b.sweep) {
      out.push_back(SweepRecord{});
      out.back().sweep = b.sweep;
      out.back().step_norm = 0.0;
    }
    SweepRecord& s = out.back();
    s.f = b.f;
    s.lambda = b.lambda;
    s.grad_norm = b.grad_norm;
    if (std::isfinite(b.step_norm)) s.step_norm = std::hypot(s.step_norm, b.step_norm);
    if (std::isfinite(b.sigma_block)) {
      s.min_sigma =
          std::isfinite(s.min_sigma) ? std::min(s.min_sigma, b.sigma_block) : b.sigma_block;
    }
  }
  return out;
}

}  // namespace lra
