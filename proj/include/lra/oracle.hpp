#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lra/tensor.hpp"

namespace lra {

/// Ground-truth estimate of the largest tensor singular value, with the unit
/// factor tuple attaining it and the spherical residual at that point as an
/// acceptance certificate.
struct OracleResult {
  enum class Method { Multistart, GridSearch, MatrixSvd, Exact };
  double lambda_star = 0.0;
  FactorTuple argmax;
  Method method = Method::Multistart;
  double certificate = 0.0;
};

std::string to_string(OracleResult::Method m);

/// Best value over `starts` independent power-method runs driven to a
/// spherical residual of 1e-12. Deterministic under the seed. The value is a
/// certified lower bound on the spectral norm.
OracleResult spectral_norm_multistart(const DenseTensor& t, int starts, std::uint64_t seed);

/// Exhaustive angular scan of the product of unit spheres (every mode must
/// have dimension <= 3), exploiting that the last mode's optimum is the
/// normalized partial contraction. The best cell is refined once and then
/// polished to a certified critical point.
OracleResult spectral_norm_grid(const DenseTensor& t, int resolution);

/// Exact dominant singular pair via dense SVD; order-2 tensors only.
OracleResult matrix_svd_check(const DenseTensor& t);

// Deterministic test-instance generators.

DenseTensor random_gaussian_tensor(const std::vector<std::size_t>& dims, std::uint64_t seed);

/// Superdiagonal tensor; requires equal dims and values.size() <= dim.
DenseTensor diagonal_tensor(const std::vector<std::size_t>& dims,
                            const std::vector<double>& values);

/// Random rank-one tensor with unit Gaussian factors; also returns the factors.
std::pair<DenseTensor, FactorTuple> random_rank_one(const std::vector<std::size_t>& dims,
                                                    std::uint64_t seed);

/// rank-one tensor from x plus eps times a unit-Frobenius Gaussian tensor.
DenseTensor rank_one_plus_noise(const FactorTuple& x, double eps, std::uint64_t seed);

/// Orthogonally decomposable tensor: sum_i weights[i] * outer(u_i^1,...,u_i^d)
/// with per-mode orthonormal columns. weights.size() <= min dims.
DenseTensor odeco_tensor(const std::vector<std::size_t>& dims, const std::vector<double>& weights,
                         std::uint64_t seed);

}  // namespace lra
