#include "lra/cp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lra/errors.hpp"

namespace lra {

namespace {

constexpr double kDecreaseSlack = 1e-9;
constexpr double kSymmetryTol = 1e-10;

bool next_reduced_index(std::vector<std::size_t>& index, const std::vector<std::size_t>& dims) {
  for (std::size_t a = dims.size(); a-- > 0;) {
    if (++index[a] < dims[a]) return true;
    index[a] = 0;
  }
  return false;
}

}  // namespace

CpFactors::CpFactors(std::vector<Eigen::MatrixXd> matrices) : matrices_(std::move(matrices)) {
  if (matrices_.empty()) throw DimsMismatch("CP factors must have at least one mode");
  const Eigen::Index r = matrices_.front().cols();
  if (r < 1) throw DimsMismatch("CP rank must be at least 1");
  for (const auto& m : matrices_) {
    if (m.cols() != r) throw DimsMismatch("CP factor matrices must share the column count");
    if (m.rows() < 1) throw DimsMismatch("CP factor matrices must be non-empty");
    if (!m.allFinite()) throw BadTensor("CP factor matrix contains a non-finite entry");
  }
}

std::vector<std::size_t> CpFactors::dims() const {
  std::vector<std::size_t> d(matrices_.size());
  for (std::size_t a = 0; a < matrices_.size(); ++a) {
    d[a] = static_cast<std::size_t>(matrices_[a].rows());
  }
  return d;
}

CpFactors CpFactors::with_mode(std::size_t mu, Eigen::MatrixXd m) const {
  if (m.rows() != matrices_[mu].rows() || m.cols() != matrices_[mu].cols()) {
    throw DimsMismatch("replacement factor matrix has wrong shape");
  }
  if (!m.allFinite()) throw BadTensor("CP factor matrix contains a non-finite entry");
  CpFactors out = *this;
  out.matrices_[mu] = std::move(m);
  return out;
}

double CpFactors::sq_norm() const {
  double acc = 0.0;
  for (const auto& m : matrices_) acc += m.squaredNorm();
  return acc;
}

Objective Objective::least_squares(DenseTensor target, double sigma_star) {
  if (sigma_star < 0.0) throw Error("sigma_star must be >= 0");
  Objective o;
  o.kind_ = Kind::LeastSquares;
  o.tensor_ = std::move(target);
  o.sigma_star_ = sigma_star;
  o.min_curvature_ = 1.0;
  o.j_minimum_ = 0.0;
  return o;
}

Objective Objective::quadratic_energy(Eigen::MatrixXd op, DenseTensor rhs, double sigma_star) {
  if (sigma_star < 0.0) throw Error("sigma_star must be >= 0");
  const auto n = static_cast<Eigen::Index>(rhs.size());
  if (op.rows() != op.cols() || op.rows() != n) {
    throw DimsMismatch("operator must be square of size matching the tensor dims product");
  }
  if ((op - op.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol) {
    throw BadOperator("operator is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(op, Eigen::EigenvaluesOnly);
  const double min_eig = eig.eigenvalues().minCoeff();
  if (min_eig <= 0.0) throw BadOperator("operator is not positive definite");

  Objective o;
  o.kind_ = Kind::QuadraticEnergy;
  o.tensor_ = std::move(rhs);
  o.op_ = std::move(op);
  o.sigma_star_ = sigma_star;
  o.min_curvature_ = min_eig;
  const Eigen::VectorXd b = vec_tensor(o.tensor_);
  o.j_minimum_ = -0.5 * b.dot(Eigen::LLT<Eigen::MatrixXd>(o.op_).solve(b));
  return o;
}

double Objective::j_value(const DenseTensor& x) const {
  if (x.dims() != tensor_.dims()) throw DimsMismatch("tensor dims do not match the objective");
  if (kind_ == Kind::LeastSquares) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = tensor_[i] - x[i];
      acc += d * d;
    }
    return 0.5 * acc;
  }
  const Eigen::VectorXd v = vec_tensor(x);
  return 0.5 * v.dot(op_ * v) - vec_tensor(tensor_).dot(v);
}

double Objective::value(const CpFactors& x) const {
  return j_value(cp_map(x)) + 0.5 * sigma_star_ * x.sq_norm();
}

Eigen::VectorXd Objective::j_gradient(const DenseTensor& x) const {
  const Eigen::VectorXd v = vec_tensor(x);
  if (kind_ == Kind::LeastSquares) return v - vec_tensor(tensor_);
  return op_ * v - vec_tensor(tensor_);
}

DenseTensor cp_map(const CpFactors& x) {
  const auto dims = x.dims();
  std::size_t total = 1;
  for (std::size_t n : dims) total *= n;
  std::vector<double> out(total, 0.0);
  for (std::size_t j = 0; j < x.rank(); ++j) {
    std::vector<double> term{1.0};
    for (std::size_t a = 0; a < dims.size(); ++a) {
      const auto col = x.mode(a).col(static_cast<Eigen::Index>(j));
      std::vector<double> v(col.data(), col.data() + col.size());
      term = detail::kron(term, v);
    }
    for (std::size_t i = 0; i < total; ++i) out[i] += term[i];
  }
  return DenseTensor(dims, std::move(out));
}

Eigen::MatrixXd restricted_map_matrix(const CpFactors& x, std::size_t mode) {
  const auto dims = x.dims();
  const std::size_t d = dims.size();
  if (mode >= d) throw DimsMismatch("mode index out of range");
  const std::size_t r = x.rank();
  const std::size_t n_mode = dims[mode];

  std::vector<std::size_t> stride(d);
  std::size_t s = 1;
  for (std::size_t a = d; a-- > 0;) {
    stride[a] = s;
    s *= dims[a];
  }
  const std::size_t total = s;

  std::vector<std::size_t> other_modes;
  std::vector<std::size_t> other_dims;
  for (std::size_t a = 0; a < d; ++a) {
    if (a != mode) {
      other_modes.push_back(a);
      other_dims.push_back(dims[a]);
    }
  }

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(total),
                                            static_cast<Eigen::Index>(n_mode * r));
  std::vector<std::size_t> idx(other_modes.size(), 0);
  do {
    std::size_t base = 0;
    for (std::size_t i = 0; i < other_modes.size(); ++i) base += idx[i] * stride[other_modes[i]];
    for (std::size_t j = 0; j < r; ++j) {
      double w = 1.0;
      for (std::size_t i = 0; i < other_modes.size(); ++i) {
        w *= x.mode(other_modes[i])(static_cast<Eigen::Index>(idx[i]),
                                    static_cast<Eigen::Index>(j));
      }
      for (std::size_t im = 0; im < n_mode; ++im) {
        m(static_cast<Eigen::Index>(base + im * stride[mode]),
          static_cast<Eigen::Index>(j * n_mode + im)) = w;
      }
    }
  } while (next_reduced_index(idx, other_dims));
  return m;
}

double block_strength(const CpFactors& x, std::size_t mode) {
  const Eigen::MatrixXd m = restricted_map_matrix(x, mode);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const double smin = svd.singularValues().minCoeff();
  return smin * smin;
}

Eigen::MatrixXd bcd_block_update(const Objective& obj, const CpFactors& x, std::size_t mode,
                                 bool strict) {
  const Eigen::MatrixXd m = restricted_map_matrix(x, mode);
  Eigen::MatrixXd gram;
  if (obj.kind() == Objective::Kind::LeastSquares) {
    gram = m.transpose() * m;
  } else {
    gram = m.transpose() * (obj.op() * m);
  }
  gram.diagonal().array() += obj.sigma_star();
  const Eigen::VectorXd rhs = m.transpose() * vec_tensor(obj.tensor());

  Eigen::VectorXd v;
  const Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() == Eigen::Success) {
    v = llt.solve(rhs);
  } else if (strict) {
    throw DegenerateBlock("block system is singular to working precision at mode " +
                          std::to_string(mode));
  } else {
    v = gram.completeOrthogonalDecomposition().solve(rhs);
  }
  const auto n = static_cast<Eigen::Index>(x.dims()[mode]);
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), n, static_cast<Eigen::Index>(x.rank()));
}

std::vector<Eigen::MatrixXd> cp_grad(const Objective& obj, const CpFactors& x) {
  const Eigen::VectorXd g = obj.j_gradient(cp_map(x));
  std::vector<Eigen::MatrixXd> out;
  out.reserve(x.order());
  for (std::size_t mu = 0; mu < x.order(); ++mu) {
    const Eigen::MatrixXd m = restricted_map_matrix(x, mu);
    const Eigen::VectorXd gm = m.transpose() * g;
    const auto n = static_cast<Eigen::Index>(x.dims()[mu]);
    Eigen::MatrixXd block =
        Eigen::Map<const Eigen::MatrixXd>(gm.data(), n, static_cast<Eigen::Index>(x.rank()));
    block += obj.sigma_star() * x.mode(mu);
    out.push_back(std::move(block));
  }
  return out;
}

double cp_grad_norm(const Objective& obj, const CpFactors& x) {
  double acc = 0.0;
  for (const auto& g : cp_grad(obj, x)) acc += g.squaredNorm();
  return std::sqrt(acc);
}

BcdRun run_bcd(const Objective& obj, const CpFactors& x0, const StoppingRule& rule,
               const BcdOptions& opts) {
  rule.validate();
  if (x0.dims() != obj.dims()) throw DimsMismatch("factor dims do not match the objective");
  if (opts.sigma_interval < 1) throw Error("sigma_interval must be >= 1");

  const double gamma0 = obj.min_curvature();
  CpFactors x = x0;
  double f = obj.value(x);

  BcdRun run;
  run.trace.header.kind = "bcd";
  run.trace.header.dims = obj.dims();
  run.trace.header.rank = static_cast<int>(x.rank());
  run.trace.header.sigma_star = obj.sigma_star();
  run.trace.header.gamma_bound = gamma0;
  run.trace.header.f0 = f;
  run.trace.header.rule = rule;
  if (obj.kind() == Objective::Kind::LeastSquares) {
    run.trace.header.norm_target = frobenius_norm(obj.tensor());
  }

  const std::size_t d = x.order();
  StopReason reason = StopReason::None;
  double grad_at_sweep_start = cp_grad_norm(obj, x);
  double terminal_grad = grad_at_sweep_start;
  int sweep = 0;
  long block_counter = 0;
  while (reason == StopReason::None) {
    ++sweep;
    double sweep_step_sq = 0.0;
    for (std::size_t mu = 0; mu < d; ++mu) {
      double sigma = kUnset;
      if (block_counter % opts.sigma_interval == 0) {
        sigma = block_strength(x, mu);
        run.min_sigma = std::isfinite(run.min_sigma) ? std::min(run.min_sigma, sigma) : sigma;
        if (obj.sigma_star() == 0.0 && run.min_sigma < opts.stability_threshold) {
          run.stability_warning = true;
        }
      }
      ++block_counter;

      const Eigen::MatrixXd updated = bcd_block_update(obj, x, mu, opts.strict);
      const double step = (updated - x.mode(mu)).norm();
      x = x.with_mode(mu, updated);
      const double f_prev = f;
      f = obj.value(x);
      sweep_step_sq += step * step;

      if (opts.audit && std::isfinite(sigma)) {
        const double required = 0.5 * (gamma0 * sigma + obj.sigma_star()) * step * step;
        if (f_prev - f < required - kDecreaseSlack) ++run.decrease_violations;
      }

      BlockRecord rec;
      rec.sweep = sweep;
      rec.mode = static_cast<int>(mu);
      rec.f = f;
      rec.step_norm = step;
      rec.sigma_block = sigma;
      rec.gamma_bound = gamma0;
      if (x.rank() == 1) {
        double lambda = 1.0;
        for (std::size_t nu = 0; nu < d; ++nu) lambda *= x.mode(nu).col(0).norm();
        rec.lambda = lambda;
      }
      run.trace.blocks.push_back(std::move(rec));
    }

    const double sweep_step = std::sqrt(sweep_step_sq);
    const double grad_start = grad_at_sweep_start;
    terminal_grad = cp_grad_norm(obj, x);
    grad_at_sweep_start = terminal_grad;
    run.trace.blocks.back().grad_norm = terminal_grad;

    // As in the rank-one solver, the gradient criterion certifies the
    // sweep's starting iterate.
    if (rule.grad_tol && grad_start < *rule.grad_tol) {
      reason = StopReason::GradTol;
    } else if (rule.step_tol && sweep_step < *rule.step_tol) {
      reason = StopReason::StepTol;
    } else if (sweep >= rule.max_sweeps) {
      reason = StopReason::MaxSweeps;
    }
  }

  run.trace.sweeps = sweeps_from_blocks(run.trace.blocks);
  run.trace.summary.sweeps = sweep;
  run.trace.summary.stop_reason = reason;
  run.trace.summary.f_star = f;
  run.trace.summary.terminal_grad = terminal_grad;
  run.trace.summary.min_sigma = run.min_sigma;
  run.trace.summary.stability_warning = run.stability_warning;
  run.trace.summary.audit_pass = run.decrease_violations == 0;
  if (x.rank() == 1) run.trace.summary.lambda_star = run.trace.blocks.back().lambda;
  run.factors = std::move(x);
  return run;
}

CpFactors random_cp_factors(const std::vector<std::size_t>& dims, std::size_t rank, Rng& rng) {
  std::vector<Eigen::MatrixXd> mats;
  mats.reserve(dims.size());
  for (std::size_t n : dims) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(rank));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      double nn = 0.0;
      do {
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.normal();
        nn = m.col(j).norm();
      } while (nn == 0.0);
      m.col(j) /= nn;
    }
    mats.push_back(std::move(m));
  }
  return CpFactors(std::move(mats));
}

CpFactors cp_from_tuple(const FactorTuple& x) {
  std::vector<Eigen::MatrixXd> mats;
  mats.reserve(x.order());
  for (std::size_t mu = 0; mu < x.order(); ++mu) {
    const auto& v = x.mode(mu);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = v[i];
    mats.push_back(std::move(m));
  }
  return CpFactors(std::move(mats));
}

FactorTuple tuple_from_cp(const CpFactors& x) {
  if (x.rank() != 1) throw DimsMismatch("tuple conversion requires rank 1");
  std::vector<std::vector<double>> vecs;
  vecs.reserve(x.order());
  for (std::size_t mu = 0; mu < x.order(); ++mu) {
    const auto col = x.mode(mu).col(0);
    vecs.emplace_back(col.data(), col.data() + col.size());
  }
  return FactorTuple(std::move(vecs));
}

Eigen::VectorXd vec_tensor(const DenseTensor& t) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(t.size()));
  for (std::size_t i = 0; i < t.size(); ++i) v[static_cast<Eigen::Index>(i)] = t[i];
  return v;
}

}  // namespace lra
