#pragma once

#include <optional>
#include <vector>

#include "lra/stopping.hpp"
#include "lra/tensor.hpp"
#include "lra/trace.hpp"

namespace lra {

/// Unnormalized ALS iterate for the rank-one least-squares objective
/// f(x) = 0.5 * |T - outer_rank_one(x)|_F^2.
struct AlsState {
  FactorTuple x;
  int sweep = 0;
  double f_value = 0.0;
};

/// Per-block measurements backing the monotonicity/decrease checks.
struct BlockAudit {
  int sweep = 0;
  int mode = 0;
  double pythagoras_residual = 0.0;  // relative defect of the norm split
  double rank_one_norm = 0.0;
  double factor_norm = 0.0;
  double factor_norm_lower = 0.0;
  double factor_norm_upper = 0.0;
  double sigma_block = 0.0;
  double decrease_residual = 0.0;  // relative defect of the decrease identity
  AuditChecks checks;
};

struct AuditReport {
  std::vector<BlockAudit> blocks;
  int p33_violations = 0;
  int p34_violations = 0;
  int p35_violations = 0;
  int p36_violations = 0;
  int p37_violations = 0;
  int p38_violations = 0;
  double kappa_hat = kUnset;  // running min of step / gradient-norm ratios
  bool kappa_ok = true;
  bool pass() const {
    return p33_violations + p34_violations + p35_violations + p36_violations + p37_violations +
               p38_violations ==
               0 &&
           kappa_ok;
  }
};

struct AlsRun {
  AlsState state;
  IterationTrace trace;
  std::optional<AuditReport> audit;
};

/// Exact minimizer of the mode-`mode` block problem with the other blocks
/// fixed: the partial contraction divided by the product of the other blocks'
/// squared norms. Throws DegenerateBlock if any other block is zero.
std::vector<double> als_update(const DenseTensor& t, const FactorTuple& x, std::size_t mode);

/// One cyclic sweep over all modes, each block using the freshest values of
/// the others. Returns the new state and the per-block records.
std::pair<AlsState, std::vector<BlockRecord>> als_sweep(const DenseTensor& t,
                                                        const AlsState& state);

/// Gradient of f, blockwise: grad_mu = (prod_{nu != mu} |x^nu|^2) x^mu - F^mu(x).
FactorTuple grad_f(const DenseTensor& t, const FactorTuple& x);

double grad_norm(const DenseTensor& t, const FactorTuple& x);

/// Full ALS driver. The starting guess must have a nonzero first contraction.
/// Following the convention that the first block of the start equals its
/// first update, the trace's f0 and the audit's norm bounds are taken at the
/// adjusted start. With audit set, every block update is checked against the
/// monotonicity and decrease properties.
AlsRun run_als(const DenseTensor& t, const FactorTuple& x0, const StoppingRule& rule,
               bool audit = false);

struct EquivalenceRow {
  int sweep = 0;
  int mode = 0;
  double factor_dev = 0.0;   // |y^mu - x^mu/|x^mu||
  double lambda_dev = kUnset;  // per sweep, on the last block row
};

struct EquivalenceReport {
  std::vector<EquivalenceRow> rows;
  double max_factor_dev = 0.0;
  double max_lambda_dev = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Run the power method and ALS in lockstep from the same start and compare
/// normalized factors and singular-value estimates sweep by sweep.
EquivalenceReport verify_equivalence(const DenseTensor& t, const FactorTuple& x0, int sweeps,
                                     double tolerance = 1e-8);

}  // namespace lra
