#include "lra/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "lra/errors.hpp"

namespace lra {

namespace {

std::size_t checked_product(const std::vector<std::size_t>& dims) {
  if (dims.empty()) throw DimsMismatch("tensor order must be at least 1");
  std::size_t n = 1;
  for (std::size_t d : dims) {
    if (d == 0) throw DimsMismatch("tensor dims must be positive");
    n *= d;
  }
  return n;
}

void check_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw BadTensor(std::string(what) + " contains a non-finite entry");
  }
}

}  // namespace

DenseTensor::DenseTensor(std::vector<std::size_t> dims, std::vector<double> entries)
    : dims_(std::move(dims)), entries_(std::move(entries)) {
  const std::size_t n = checked_product(dims_);
  if (entries_.size() != n) {
    throw DimsMismatch("entry count " + std::to_string(entries_.size()) +
                       " does not match dims product " + std::to_string(n));
  }
  check_finite(entries_, "tensor");
}

DenseTensor DenseTensor::zeros(std::vector<std::size_t> dims) {
  const std::size_t n = checked_product(dims);
  return DenseTensor(std::move(dims), std::vector<double>(n, 0.0));
}

std::size_t DenseTensor::flat_index(std::span<const std::size_t> index) const {
  std::size_t flat = 0;
  for (std::size_t a = 0; a < dims_.size(); ++a) flat = flat * dims_[a] + index[a];
  return flat;
}

FactorTuple::FactorTuple(std::vector<std::vector<double>> vectors) : vectors_(std::move(vectors)) {
  if (vectors_.empty()) throw DimsMismatch("factor tuple must have at least one mode");
  for (const auto& v : vectors_) {
    if (v.empty()) throw DimsMismatch("factor vectors must be non-empty");
    check_finite(v, "factor vector");
  }
}

std::vector<std::size_t> FactorTuple::dims() const {
  std::vector<std::size_t> d(vectors_.size());
  for (std::size_t a = 0; a < vectors_.size(); ++a) d[a] = vectors_[a].size();
  return d;
}

FactorTuple FactorTuple::with_mode(std::size_t mu, std::vector<double> v) const {
  check_finite(v, "factor vector");
  if (v.size() != vectors_[mu].size()) throw DimsMismatch("replacement vector has wrong length");
  FactorTuple out = *this;
  out.vectors_[mu] = std::move(v);
  return out;
}

bool FactorTuple::dims_match(const DenseTensor& t) const {
  if (order() != t.order()) return false;
  for (std::size_t a = 0; a < order(); ++a) {
    if (vectors_[a].size() != t.dims()[a]) return false;
  }
  return true;
}

namespace detail {

namespace {

template <typename RangeSum>
double blocked_sum(std::size_t n, RangeSum&& range_sum) {
  if (n < kParMin) return range_sum(std::size_t{0}, n);
  const std::size_t nblocks = (n + kSumBlock - 1) / kSumBlock;
  std::vector<double> partial(nblocks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nblocks); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kSumBlock;
    partial[static_cast<std::size_t>(b)] = range_sum(lo, std::min(lo + kSumBlock, n));
  }
  double acc = 0.0;
  for (double p : partial) acc += p;
  return acc;
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

std::vector<double> contract_last_axis(std::span<const double> buf, std::size_t outer,
                                       std::size_t n, std::span<const double> v) {
  std::vector<double> out(outer);
  const double* base = buf.data();
  const double* vp = v.data();
#pragma omp parallel for schedule(static) if (outer * n >= kParMin)
  for (std::ptrdiff_t o = 0; o < static_cast<std::ptrdiff_t>(outer); ++o) {
    const double* row = base + static_cast<std::size_t>(o) * n;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * vp[j];
    out[static_cast<std::size_t>(o)] = acc;
  }
  return out;
}

std::vector<double> contract_first_axis(std::span<const double> buf, std::size_t n,
                                        std::size_t rest, std::span<const double> v) {
  std::vector<double> out(rest, 0.0);
  const double* base = buf.data();
  if (rest >= kParMin) {
    const std::size_t nchunks = (rest + kSumBlock - 1) / kSumBlock;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(nchunks); ++c) {
      const std::size_t r0 = static_cast<std::size_t>(c) * kSumBlock;
      const std::size_t r1 = std::min(r0 + kSumBlock, rest);
      for (std::size_t i = 0; i < n; ++i) {
        const double vi = v[i];
        const double* row = base + i * rest;
        for (std::size_t r = r0; r < r1; ++r) out[r] += vi * row[r];
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const double vi = v[i];
      const double* row = base + i * rest;
      for (std::size_t r = 0; r < rest; ++r) out[r] += vi * row[r];
    }
  }
  return out;
}

std::vector<double> kron(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.size() * b.size());
  const std::size_t nb = b.size();
#pragma omp parallel for schedule(static) if (out.size() >= kParMin)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(a.size()); ++i) {
    const double ai = a[static_cast<std::size_t>(i)];
    double* row = out.data() + static_cast<std::size_t>(i) * nb;
    for (std::size_t j = 0; j < nb; ++j) row[j] = ai * b[j];
  }
  return out;
}

}  // namespace detail

namespace {

void require_match(const DenseTensor& t, const FactorTuple& x) {
  if (!x.dims_match(t)) throw DimsMismatch("factor tuple dims do not match tensor dims");
}

}  // namespace

DenseTensor outer_rank_one(const FactorTuple& x) {
  std::vector<double> acc{1.0};
  for (std::size_t a = 0; a < x.order(); ++a) acc = detail::kron(acc, x.mode(a));
  return DenseTensor(x.dims(), std::move(acc));
}

double frobenius_inner(const DenseTensor& a, const DenseTensor& b) {
  if (a.dims() != b.dims()) throw DimsMismatch("frobenius_inner requires identical dims");
  const auto ea = a.entries();
  const auto eb = b.entries();
  return detail::blocked_sum(ea.size(), [&](std::size_t lo, std::size_t hi) {
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += ea[i] * eb[i];
    return acc;
  });
}

double frobenius_norm(const DenseTensor& t) {
  const auto e = t.entries();
  const double s = detail::blocked_sum(e.size(), [&](std::size_t lo, std::size_t hi) {
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += e[i] * e[i];
    return acc;
  });
  return std::sqrt(s);
}

double multilinear_form(const DenseTensor& t, const FactorTuple& x) {
  require_match(t, x);
  auto v = partial_contraction(t, x, 0);
  return detail::dot(v, x.mode(0));
}

std::vector<double> partial_contraction(const DenseTensor& t, const FactorTuple& x,
                                        std::size_t mode) {
  require_match(t, x);
  const auto& dims = t.dims();
  if (mode >= dims.size()) throw DimsMismatch("mode index out of range");

  std::vector<double> buf(t.entries().begin(), t.entries().end());
  std::size_t len = buf.size();
  for (std::size_t a = dims.size(); a-- > mode + 1;) {
    buf = detail::contract_last_axis(buf, len / dims[a], dims[a], x.mode(a));
    len /= dims[a];
  }
  for (std::size_t a = 0; a < mode; ++a) {
    buf = detail::contract_first_axis(buf, dims[a], len / dims[a], x.mode(a));
    len /= dims[a];
  }
  return buf;
}

double tuple_norm(const FactorTuple& x) {
  double acc = 0.0;
  for (std::size_t a = 0; a < x.order(); ++a) acc += detail::dot(x.mode(a), x.mode(a));
  return std::sqrt(acc);
}

double residual_half_sumsq(const DenseTensor& t, const FactorTuple& x) {
  require_match(t, x);
  std::vector<double> prefix{1.0};
  for (std::size_t a = 0; a + 1 < x.order(); ++a) prefix = detail::kron(prefix, x.mode(a));
  const auto& last = x.mode(x.order() - 1);
  const std::size_t nd = last.size();
  const auto e = t.entries();
  const double s = detail::blocked_sum(e.size(), [&](std::size_t lo, std::size_t hi) {
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const double diff = e[i] - prefix[i / nd] * last[i % nd];
      acc += diff * diff;
    }
    return acc;
  });
  return 0.5 * s;
}

double tuple_distance(const FactorTuple& a, const FactorTuple& b) {
  if (a.dims() != b.dims()) throw DimsMismatch("tuple_distance requires identical dims");
  double acc = 0.0;
  for (std::size_t mu = 0; mu < a.order(); ++mu) {
    const auto& va = a.mode(mu);
    const auto& vb = b.mode(mu);
    for (std::size_t i = 0; i < va.size(); ++i) {
      const double d = va[i] - vb[i];
      acc += d * d;
    }
  }
  return std::sqrt(acc);
}

}  // namespace lra
