#include "lra/reference.hpp"

#include <cstddef>

#include "lra/errors.hpp"

namespace lra::ref {

bool next_index(std::vector<std::size_t>& index, std::span<const std::size_t> dims) {
  for (std::size_t a = dims.size(); a-- > 0;) {
    if (++index[a] < dims[a]) return true;
    index[a] = 0;
  }
  return false;
}

double multilinear_form(const DenseTensor& t, const FactorTuple& x) {
  if (!x.dims_match(t)) throw DimsMismatch("factor tuple dims do not match tensor dims");
  const auto& dims = t.dims();
  std::vector<std::size_t> idx(dims.size(), 0);
  double acc = 0.0;
  std::size_t flat = 0;
  do {
    double w = t[flat++];
    for (std::size_t a = 0; a < dims.size(); ++a) w *= x.mode(a)[idx[a]];
    acc += w;
  } while (next_index(idx, dims));
  return acc;
}

std::vector<double> partial_contraction(const DenseTensor& t, const FactorTuple& x,
                                        std::size_t mode) {
  if (!x.dims_match(t)) throw DimsMismatch("factor tuple dims do not match tensor dims");
  const auto& dims = t.dims();
  if (mode >= dims.size()) throw DimsMismatch("mode index out of range");
  std::vector<double> out(dims[mode], 0.0);
  std::vector<std::size_t> idx(dims.size(), 0);
  std::size_t flat = 0;
  do {
    double w = t[flat++];
    for (std::size_t a = 0; a < dims.size(); ++a) {
      if (a != mode) w *= x.mode(a)[idx[a]];
    }
    out[idx[mode]] += w;
  } while (next_index(idx, dims));
  return out;
}

DenseTensor outer_rank_one(const FactorTuple& x) {
  const auto dims = x.dims();
  std::size_t n = 1;
  for (std::size_t d : dims) n *= d;
  std::vector<double> out(n);
  std::vector<std::size_t> idx(dims.size(), 0);
  std::size_t flat = 0;
  do {
    double w = 1.0;
    for (std::size_t a = 0; a < dims.size(); ++a) w *= x.mode(a)[idx[a]];
    out[flat++] = w;
  } while (next_index(idx, dims));
  return DenseTensor(dims, std::move(out));
}

double frobenius_inner(const DenseTensor& a, const DenseTensor& b) {
  if (a.dims() != b.dims()) throw DimsMismatch("frobenius_inner requires identical dims");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double residual_half_sumsq(const DenseTensor& t, const FactorTuple& x) {
  const DenseTensor r = ref::outer_rank_one(x);
  if (r.dims() != t.dims()) throw DimsMismatch("factor tuple dims do not match tensor dims");
  double acc = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double d = t[i] - r[i];
    acc += d * d;
  }
  return 0.5 * acc;
}

}  // namespace lra::ref
