#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "lra/stopping.hpp"

namespace lra {

inline constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

/// Pass/fail flags of the per-block monotonicity and decrease checks.
struct AuditChecks {
  bool p33 = true;  // Pythagoras split of |target|^2
  bool p34 = true;  // rank-one norms nondecreasing
  bool p35 = true;  // factor norms nondecreasing
  bool p36 = true;  // factor norm bounds
  bool p37 = true;  // per-block decrease identity
  bool p38 = true;  // per-sweep decrease inequality
};

/// One block update of a least-squares sweep (ALS or BCD). Fields that do not
/// apply to a given run kind stay NaN and are omitted from serialized traces.
struct BlockRecord {
  int sweep = 0;
  int mode = 0;
  double f = kUnset;
  double lambda = kUnset;
  double step_norm = kUnset;
  double grad_norm = kUnset;
  double sigma_block = kUnset;
  double gamma_bound = kUnset;
  bool has_checks = false;
  AuditChecks checks;
};

/// Per-sweep view of a run: the quantities the convergence diagnostics
/// consume. f/lambda/grad_norm are taken at the sweep's final iterate,
/// step_norm is the full-tuple distance to the previous sweep's iterate.
struct SweepRecord {
  int sweep = 0;
  double f = kUnset;
  double lambda = kUnset;
  double step_norm = kUnset;
  double grad_norm = kUnset;
  double residual = kUnset;  // spherical residual (power-method runs)
  double min_sigma = kUnset;
  double wall_time = kUnset;  // seconds; serialized only on request
};

struct TraceHeader {
  std::string kind;  // "hopm" | "als" | "bcd"
  std::uint64_t seed = 0;
  std::string command;
  std::vector<std::size_t> dims;
  double norm_target = kUnset;
  double f0 = kUnset;
  double sigma0 = kUnset;
  double sigma_star = kUnset;
  double gamma_bound = kUnset;
  int rank = 0;
  StoppingRule rule;
};

struct TraceSummary {
  int sweeps = 0;
  StopReason stop_reason = StopReason::None;
  double f_star = kUnset;
  double lambda_star = kUnset;
  double terminal_grad = kUnset;
  double min_sigma = kUnset;
  double kappa_hat = kUnset;
  bool stability_warning = false;
  bool audit_pass = true;
};

/// Complete record of one solver run. Power-method runs carry only sweep
/// records; the least-squares solvers carry block records from which the
/// sweep view is derived.
struct IterationTrace {
  TraceHeader header;
  std::vector<SweepRecord> sweeps;
  std::vector<BlockRecord> blocks;
  TraceSummary summary;
};

/// Rebuild the per-sweep view from block records (last block of each sweep
/// carries f/lambda/grad; step norms combine in quadrature).
std::vector<SweepRecord> sweeps_from_blocks(const std::vector<BlockRecord>& blocks);

}  // namespace lra
