#pragma once

#include "lra/rng.hpp"
#include "lra/stopping.hpp"
#include "lra/tensor.hpp"
#include "lra/trace.hpp"

namespace lra {

/// Power-method iterate: unit factors (after the first sweep), the current
/// singular-value estimate, and the sweep counter.
struct HopmState {
  FactorTuple y;
  double lambda = 0.0;
  int sweep = 0;
};

struct HopmRun {
  HopmState state;
  IterationTrace trace;
};

/// One cyclic sweep: each mode is replaced in order by its normalized partial
/// contraction, using the already-updated earlier modes; lambda is the
/// multilinear form at the new tuple. Throws ZeroContraction if a contraction
/// norm vanishes.
HopmState hopm_sweep(const DenseTensor& t, const HopmState& state);

/// max_mu |F^mu(y) - lambda * y^mu|; zero exactly at critical points of the
/// spherically constrained problem.
double spherical_residual(const DenseTensor& t, const FactorTuple& y, double lambda);

/// Run the power method from y0 (which must have a nonzero first contraction)
/// until the stopping rule fires. The trace carries one record per sweep,
/// including sweep 0 at the starting guess.
HopmRun run_hopm(const DenseTensor& t, const FactorTuple& y0, const StoppingRule& rule);

/// Unit-norm Gaussian starting tuple; resamples up to 16 times if the first
/// contraction vanishes, then throws BadStart.
FactorTuple random_start(const DenseTensor& t, Rng& rng);

}  // namespace lra
