#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "lra/rng.hpp"
#include "lra/stopping.hpp"
#include "lra/tensor.hpp"
#include "lra/trace.hpp"

namespace lra {

/// Factor matrices of a rank-r CP representation, one n_mu x r matrix per
/// mode. Immutable; block replacement goes through with_mode.
class CpFactors {
 public:
  CpFactors() = default;
  explicit CpFactors(std::vector<Eigen::MatrixXd> matrices);

  std::size_t order() const { return matrices_.size(); }
  std::size_t rank() const { return static_cast<std::size_t>(matrices_.front().cols()); }
  std::vector<std::size_t> dims() const;
  const Eigen::MatrixXd& mode(std::size_t mu) const { return matrices_[mu]; }

  CpFactors with_mode(std::size_t mu, Eigen::MatrixXd m) const;

  /// sum_mu |X^mu|_F^2
  double sq_norm() const;

 private:
  std::vector<Eigen::MatrixXd> matrices_;
};

/// The function being minimized over the CP format: either the least-squares
/// distance 0.5*|target - X|_F^2 or the quadratic energy 0.5*<A x, x> - <b, x>
/// of an SPD operator acting on vectorized tensors, plus the Tikhonov term
/// (sigma_star/2) * sum_mu |X^mu|_F^2.
class Objective {
 public:
  enum class Kind { LeastSquares, QuadraticEnergy };

  static Objective least_squares(DenseTensor target, double sigma_star = 0.0);
  /// Validates symmetry (to 1e-10) and positive definiteness of the operator.
  static Objective quadratic_energy(Eigen::MatrixXd op, DenseTensor rhs, double sigma_star = 0.0);

  Kind kind() const { return kind_; }
  double sigma_star() const { return sigma_star_; }
  const DenseTensor& tensor() const { return tensor_; }
  const Eigen::MatrixXd& op() const { return op_; }
  const std::vector<std::size_t>& dims() const { return tensor_.dims(); }

  /// Value of the underlying J at an assembled tensor.
  double j_value(const DenseTensor& x) const;
  /// Full objective including the regularization term.
  double value(const CpFactors& x) const;
  /// Vectorized gradient of J at an assembled tensor.
  Eigen::VectorXd j_gradient(const DenseTensor& x) const;

  /// Smallest curvature of J: 1 for least squares, the smallest eigenvalue of
  /// the operator for the quadratic energy.
  double min_curvature() const { return min_curvature_; }

  /// Known minimum of J (0 for least squares, -0.5*<A^-1 b, b> for the
  /// energy); enters the boundedness diagnostics for regularized runs.
  double j_minimum() const { return j_minimum_; }

 private:
  Objective() = default;
  Kind kind_ = Kind::LeastSquares;
  DenseTensor tensor_;   // target (least squares) or right-hand side (energy)
  Eigen::MatrixXd op_;
  double sigma_star_ = 0.0;
  double min_curvature_ = 1.0;
  double j_minimum_ = 0.0;
};

/// Assembled tensor: the sum over CP columns of their outer products.
DenseTensor cp_map(const CpFactors& x);

/// Matrix M of the linear map vec(X^mode) -> vec(cp_map(...)) with all other
/// blocks fixed; N rows, n_mode*r columns, vec taken column-major over
/// (row index, CP column).
Eigen::MatrixXd restricted_map_matrix(const CpFactors& x, std::size_t mode);

/// Squared smallest singular value of the restricted map; the block
/// strong-convexity strength. Zero for rank-deficient maps.
double block_strength(const CpFactors& x, std::size_t mode);

/// Exact minimizer of the restricted block problem: solves the SPD system
/// (M^T M + sigma* I) v = M^T vec(target) (least squares) or
/// (M^T A M + sigma* I) v = M^T vec(rhs) (energy). In strict mode a
/// factorization failure throws DegenerateBlock; otherwise a minimum-norm
/// least-squares fallback is used.
Eigen::MatrixXd bcd_block_update(const Objective& obj, const CpFactors& x, std::size_t mode,
                                 bool strict = true);

/// Blockwise gradient of the full objective at x.
std::vector<Eigen::MatrixXd> cp_grad(const Objective& obj, const CpFactors& x);

double cp_grad_norm(const Objective& obj, const CpFactors& x);

struct BcdOptions {
  bool strict = true;
  /// Compute the block strength every `sigma_interval`-th block (1 = every
  /// block). The value is diagnostic only; sampling it is the fast mode.
  int sigma_interval = 1;
  /// With sigma_star = 0, a running-min block strength below this threshold
  /// raises the stability warning in the trace.
  double stability_threshold = 1e-8;
  /// Check the per-block decrease inequality (needs the block strength).
  bool audit = true;
};

struct BcdRun {
  CpFactors factors;
  IterationTrace trace;
  double min_sigma = kUnset;
  bool stability_warning = false;
  int decrease_violations = 0;
};

/// Cyclic block coordinate descent on the regularized CP objective.
BcdRun run_bcd(const Objective& obj, const CpFactors& x0, const StoppingRule& rule,
               const BcdOptions& opts = {});

/// Random factors with unit-norm Gaussian columns.
CpFactors random_cp_factors(const std::vector<std::size_t>& dims, std::size_t rank, Rng& rng);

/// Rank-one conversions, used when comparing against the tuple-based solver.
CpFactors cp_from_tuple(const FactorTuple& x);
FactorTuple tuple_from_cp(const CpFactors& x);

Eigen::VectorXd vec_tensor(const DenseTensor& t);

}  // namespace lra
