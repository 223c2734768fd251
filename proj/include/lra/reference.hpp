#pragma once

#include <span>
#include <vector>

#include "lra/tensor.hpp"

namespace lra::ref {

// Serial brute-force implementations of the tensor kernels, straight from the
// entrywise definitions. They are the independent check for the contraction
// kernels in the tests and the baseline in the benchmark; they share no code
// with the optimized paths.

/// Advance a multi-index in lexicographic order (last index fastest).
/// Returns false once every index has wrapped back to zero.
bool next_index(std::vector<std::size_t>& index, std::span<const std::size_t> dims);

double multilinear_form(const DenseTensor& t, const FactorTuple& x);

std::vector<double> partial_contraction(const DenseTensor& t, const FactorTuple& x,
                                        std::size_t mode);

DenseTensor outer_rank_one(const FactorTuple& x);

double frobenius_inner(const DenseTensor& a, const DenseTensor& b);

double residual_half_sumsq(const DenseTensor& t, const FactorTuple& x);

}  // namespace lra::ref
