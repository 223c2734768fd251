#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lra {

/// Dense real tensor of order d >= 1. Entries are stored flat in
/// lexicographic order with the last index fastest, i.e. the flat index of
/// (i_1,...,i_d) is ((i_1*n_2 + i_2)*n_3 + ...)*n_d + i_d. Values are
/// validated to be finite on construction and immutable afterwards, so
/// tensors can be shared freely between threads.
class DenseTensor {
 public:
  DenseTensor() = default;
  DenseTensor(std::vector<std::size_t> dims, std::vector<double> entries);

  static DenseTensor zeros(std::vector<std::size_t> dims);

  std::size_t order() const { return dims_.size(); }
  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t size() const { return entries_.size(); }
  std::span<const double> entries() const { return entries_; }

  double operator[](std::size_t flat) const { return entries_[flat]; }
  /// Multi-index access; bounds are not checked.
  double at(std::span<const std::size_t> index) const { return entries_[flat_index(index)]; }
  std::size_t flat_index(std::span<const std::size_t> index) const;

 private:
  std::vector<std::size_t> dims_;
  std::vector<double> entries_;
};

/// One real vector per mode. Arguments of the multilinear form and the
/// iterates of the rank-one algorithms. Immutable; block replacement goes
/// through with_mode.
class FactorTuple {
 public:
  FactorTuple() = default;
  explicit FactorTuple(std::vector<std::vector<double>> vectors);

  std::size_t order() const { return vectors_.size(); }
  const std::vector<double>& mode(std::size_t mu) const { return vectors_[mu]; }
  std::vector<std::size_t> dims() const;

  /// Copy of this tuple with mode mu replaced.
  FactorTuple with_mode(std::size_t mu, std::vector<double> v) const;

  bool dims_match(const DenseTensor& t) const;

 private:
  std::vector<std::vector<double>> vectors_;
};

/// Rank-one tensor assembled from the tuple: T[i_1,...,i_d] = prod_mu x^mu_{i_mu}.
DenseTensor outer_rank_one(const FactorTuple& x);

/// Frobenius inner product of two tensors with identical dims.
double frobenius_inner(const DenseTensor& a, const DenseTensor& b);

double frobenius_norm(const DenseTensor& t);

/// Multilinear form <T, outer_rank_one(x)>, evaluated by successive mode
/// contractions rather than by materializing the rank-one tensor.
double multilinear_form(const DenseTensor& t, const FactorTuple& x);

/// Contraction of T with every mode vector except `mode` (whose vector in x
/// is ignored). The result v is the unique vector with <v, x^mode> equal to
/// the multilinear form for every choice of x^mode.
std::vector<double> partial_contraction(const DenseTensor& t, const FactorTuple& x,
                                        std::size_t mode);

/// Euclidean norm over all blocks: sqrt(sum_mu |x^mu|^2).
double tuple_norm(const FactorTuple& x);

/// 0.5 * |T - outer_rank_one(x)|_F^2, accumulated entrywise so that residuals
/// far below |T|_F^2 are still resolved.
double residual_half_sumsq(const DenseTensor& t, const FactorTuple& x);

/// Block distance sqrt(sum_mu |a^mu - b^mu|^2); orders and dims must agree.
double tuple_distance(const FactorTuple& a, const FactorTuple& b);

namespace detail {

/// Work sizes below this stay serial; above it, kernels split the index
/// space into fixed blocks whose partial results are combined in block
/// order, so results do not depend on the number of OpenMP threads.
inline constexpr std::size_t kParMin = std::size_t{1} << 15;
inline constexpr std::size_t kSumBlock = 4096;

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

/// out[o] = sum_j buf[o*n + j] * v[j]
std::vector<double> contract_last_axis(std::span<const double> buf, std::size_t outer,
                                       std::size_t n, std::span<const double> v);

/// out[r] = sum_i v[i] * buf[i*rest + r]
std::vector<double> contract_first_axis(std::span<const double> buf, std::size_t n,
                                        std::size_t rest, std::span<const double> v);

/// Kronecker product out[i*|b| + j] = a[i] * b[j].
std::vector<double> kron(std::span<const double> a, std::span<const double> b);

}  // namespace detail

}  // namespace lra
