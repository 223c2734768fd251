#include "lra/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "lra/errors.hpp"
#include "lra/hopm.hpp"
#include "lra/rng.hpp"

namespace lra {

std::string to_string(OracleResult::Method m) {
  switch (m) {
    case OracleResult::Method::Multistart:
      return "multistart";
    case OracleResult::Method::GridSearch:
      return "grid_search";
    case OracleResult::Method::MatrixSvd:
      return "matrix_svd";
    default:
      return "exact";
  }
}

namespace {

constexpr double kPi = 3.14159265358979323846;

StoppingRule polish_rule() {
  StoppingRule rule;
  // Near-degenerate spectra converge at rate (s2/s1)^2; the generous cap keeps
  // the 1e-12 residual certificate reachable for gaps down to ~1e-3.
  rule.max_sweeps = 10000;
  rule.grad_tol = 1e-12;
  return rule;
}

/// One angular coordinate of the scan; [lo, hi] subdivided into `count`
/// points (endpoints included).
struct AngleSlot {
  std::size_t mode = 0;
  int which = 0;  // 0: azimuth (n=2) or polar (n=3); 1: azimuth (n=3)
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;

  double at(int i) const {
    return count > 1 ? lo + (hi - lo) * static_cast<double>(i) / (count - 1) : lo;
  }
  double step() const { return count > 1 ? (hi - lo) / (count - 1) : 0.0; }
};

std::vector<double> sphere_point(std::size_t n, double a0, double a1) {
  if (n == 1) return {1.0};
  if (n == 2) return {std::cos(a0), std::sin(a0)};
  return {std::sin(a0) * std::cos(a1), std::sin(a0) * std::sin(a1), std::cos(a0)};
}

struct GridScan {
  double best_score = -1.0;
  std::vector<double> best_angles;
};

GridScan scan(const DenseTensor& t, std::vector<AngleSlot>& slots, const FactorTuple& shape) {
  GridScan out;
  std::vector<int> idx(slots.size(), 0);
  FactorTuple x = shape;
  const std::size_t last = t.order() - 1;
  while (true) {
    // Assemble the gridded modes for the current angle combination.
    std::vector<double> angles(slots.size());
    for (std::size_t s = 0; s < slots.size(); ++s) angles[s] = slots[s].at(idx[s]);
    for (std::size_t mu = 0; mu < last; ++mu) {
      double a0 = 0.0, a1 = 0.0;
      for (std::size_t s = 0; s < slots.size(); ++s) {
        if (slots[s].mode == mu) (slots[s].which == 0 ? a0 : a1) = angles[s];
      }
      x = x.with_mode(mu, sphere_point(t.dims()[mu], a0, a1));
    }
    const double score = detail::norm(partial_contraction(t, x, last));
    if (score > out.best_score) {
      out.best_score = score;
      out.best_angles = angles;
    }
    // Advance the angle odometer.
    std::size_t s = slots.size();
    while (s-- > 0) {
      if (++idx[s] < slots[s].count) break;
      idx[s] = 0;
      if (s == 0) return out;
    }
    if (slots.empty()) return out;
  }
}

}  // namespace

OracleResult spectral_norm_multistart(const DenseTensor& t, int starts, std::uint64_t seed) {
  if (starts < 1) throw Error("multistart needs at least one start");
  if (frobenius_norm(t) == 0.0) throw BadTensor("zero tensor has no dominant singular pair");

  Rng rng(seed);
  std::vector<FactorTuple> tuples;
  tuples.reserve(static_cast<std::size_t>(starts));
  for (int i = 0; i < starts; ++i) tuples.push_back(random_start(t, rng));

  std::vector<double> lambdas(static_cast<std::size_t>(starts),
                              -std::numeric_limits<double>::infinity());
  std::vector<HopmState> states(static_cast<std::size_t>(starts));
  const StoppingRule rule = polish_rule();
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < starts; ++i) {
    try {
      HopmRun run = run_hopm(t, tuples[static_cast<std::size_t>(i)], rule);
      lambdas[static_cast<std::size_t>(i)] = run.state.lambda;
      states[static_cast<std::size_t>(i)] = std::move(run.state);
    } catch (const Error&) {
      // A degenerate run simply does not contribute a candidate.
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < lambdas.size(); ++i) {
    if (lambdas[i] > lambdas[best]) best = i;
  }
  if (!std::isfinite(lambdas[best])) throw BadTensor("all power-method starts failed");

  OracleResult result;
  result.lambda_star = states[best].lambda;
  result.argmax = states[best].y;
  result.method = OracleResult::Method::Multistart;
  result.certificate = spherical_residual(t, result.argmax, result.lambda_star);
  return result;
}

OracleResult spectral_norm_grid(const DenseTensor& t, int resolution) {
  const auto& dims = t.dims();
  for (std::size_t n : dims) {
    if (n > 3) throw DimsTooLarge("grid oracle handles mode dimensions up to 3");
  }
  if (resolution < 64) throw Error("grid resolution must be >= 64");
  if (frobenius_norm(t) == 0.0) throw BadTensor("zero tensor has no dominant singular pair");

  const std::size_t d = dims.size();
  std::vector<AngleSlot> slots;
  double combos = 1.0;
  for (std::size_t mu = 0; mu + 1 < d; ++mu) {
    if (dims[mu] == 2) {
      // One azimuth; signs are absorbed by the modulus of the contraction.
      slots.push_back({mu, 0, 0.0, kPi, resolution});
      combos *= resolution;
    } else if (dims[mu] == 3) {
      slots.push_back({mu, 0, 0.0, 0.5 * kPi, resolution});  // polar, one hemisphere
      slots.push_back({mu, 1, 0.0, 2.0 * kPi, resolution});
      combos *= static_cast<double>(resolution) * resolution;
    }
  }
  if (combos > 5e7) throw DimsTooLarge("grid scan would exceed the evaluation budget");

  // Placeholder tuple with the right shape; gridded modes get overwritten.
  std::vector<std::vector<double>> init(d);
  for (std::size_t mu = 0; mu < d; ++mu) init[mu] = sphere_point(dims[mu], 0.0, 0.0);
  const FactorTuple shape(std::move(init));

  GridScan coarse = scan(t, slots, shape);
  // Refine once around the best cell with the same per-angle resolution.
  std::vector<AngleSlot> fine = slots;
  for (std::size_t s = 0; s < slots.size(); ++s) {
    const double h = slots[s].step();
    fine[s].lo = coarse.best_angles[s] - h;
    fine[s].hi = coarse.best_angles[s] + h;
  }
  GridScan refined = slots.empty() ? coarse : scan(t, fine, shape);
  if (refined.best_score <= 0.0) throw BadTensor("grid scan found no nonzero value");

  // Assemble the best tuple, completing the last mode analytically, and
  // polish it to a certified critical point.
  FactorTuple best = shape;
  for (std::size_t mu = 0; mu + 1 < d; ++mu) {
    double a0 = 0.0, a1 = 0.0;
    for (std::size_t s = 0; s < fine.size(); ++s) {
      if (fine[s].mode == mu) (fine[s].which == 0 ? a0 : a1) = refined.best_angles[s];
    }
    best = best.with_mode(mu, sphere_point(dims[mu], a0, a1));
  }
  std::vector<double> v = partial_contraction(t, best, d - 1);
  const double vn = detail::norm(v);
  for (double& e : v) e /= vn;
  best = best.with_mode(d - 1, std::move(v));

  HopmRun polish = run_hopm(t, best, polish_rule());
  OracleResult result;
  result.lambda_star = polish.state.lambda;
  result.argmax = polish.state.y;
  result.method = OracleResult::Method::GridSearch;
  result.certificate = spherical_residual(t, result.argmax, result.lambda_star);
  return result;
}

OracleResult matrix_svd_check(const DenseTensor& t) {
  if (t.order() != 2) throw NotMatrix("dense SVD check requires an order-2 tensor");
  const auto n0 = static_cast<Eigen::Index>(t.dims()[0]);
  const auto n1 = static_cast<Eigen::Index>(t.dims()[1]);
  Eigen::MatrixXd m(n0, n1);
  for (Eigen::Index i = 0; i < n0; ++i) {
    for (Eigen::Index j = 0; j < n1; ++j) {
      m(i, j) = t[static_cast<std::size_t>(i * n1 + j)];
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd u = svd.matrixU().col(0);
  const Eigen::VectorXd v = svd.matrixV().col(0);

  OracleResult result;
  result.lambda_star = svd.singularValues()(0);
  result.argmax = FactorTuple({std::vector<double>(u.data(), u.data() + u.size()),
                               std::vector<double>(v.data(), v.data() + v.size())});
  result.method = OracleResult::Method::MatrixSvd;
  result.certificate = spherical_residual(t, result.argmax, result.lambda_star);
  return result;
}

DenseTensor random_gaussian_tensor(const std::vector<std::size_t>& dims, std::uint64_t seed) {
  std::size_t total = 1;
  for (std::size_t n : dims) total *= n;
  Rng rng(seed);
  std::vector<double> entries(total);
  for (double& e : entries) e = rng.normal();
  return DenseTensor(dims, std::move(entries));
}

DenseTensor diagonal_tensor(const std::vector<std::size_t>& dims,
                            const std::vector<double>& values) {
  if (dims.empty()) throw DimsMismatch("tensor order must be at least 1");
  for (std::size_t n : dims) {
    if (n != dims.front()) throw DimsMismatch("diagonal tensors require equal dims");
  }
  if (values.size() > dims.front()) throw DimsMismatch("more diagonal values than the dimension");
  DenseTensor t = DenseTensor::zeros(dims);
  std::vector<double> entries(t.entries().begin(), t.entries().end());
  std::size_t stride = 0;
  {
    std::size_t s = 1;
    for (std::size_t a = dims.size(); a-- > 0;) {
      stride += s;
      s *= dims[a];
    }
  }
  for (std::size_t i = 0; i < values.size(); ++i) entries[i * stride] = values[i];
  return DenseTensor(dims, std::move(entries));
}

std::pair<DenseTensor, FactorTuple> random_rank_one(const std::vector<std::size_t>& dims,
                                                    std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> vecs(dims.size());
  for (std::size_t mu = 0; mu < dims.size(); ++mu) {
    vecs[mu].resize(dims[mu]);
    double n = 0.0;
    do {
      for (double& e : vecs[mu]) e = rng.normal();
      n = detail::norm(vecs[mu]);
    } while (n == 0.0);
    for (double& e : vecs[mu]) e /= n;
  }
  FactorTuple x(std::move(vecs));
  return {outer_rank_one(x), std::move(x)};
}

DenseTensor rank_one_plus_noise(const FactorTuple& x, double eps, std::uint64_t seed) {
  DenseTensor base = outer_rank_one(x);
  if (eps == 0.0) return base;
  const DenseTensor noise = random_gaussian_tensor(base.dims(), seed);
  const double scale = eps / frobenius_norm(noise);
  std::vector<double> entries(base.entries().begin(), base.entries().end());
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i] += scale * noise[i];
  return DenseTensor(base.dims(), std::move(entries));
}

DenseTensor odeco_tensor(const std::vector<std::size_t>& dims, const std::vector<double>& weights,
                         std::uint64_t seed) {
  if (weights.empty()) throw DimsMismatch("odeco tensor needs at least one term");
  for (std::size_t n : dims) {
    if (weights.size() > n) throw DimsMismatch("odeco term count exceeds a mode dimension");
  }
  Rng rng(seed);
  const auto terms = static_cast<Eigen::Index>(weights.size());
  std::vector<Eigen::MatrixXd> bases;
  for (std::size_t n : dims) {
    Eigen::MatrixXd g(static_cast<Eigen::Index>(n), terms);
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = rng.normal();
    }
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() *
                        Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), terms);
    bases.push_back(std::move(q));
  }

  std::size_t total = 1;
  for (std::size_t n : dims) total *= n;
  std::vector<double> entries(total, 0.0);
  for (Eigen::Index i = 0; i < terms; ++i) {
    std::vector<std::vector<double>> cols(dims.size());
    for (std::size_t mu = 0; mu < dims.size(); ++mu) {
      const auto c = bases[mu].col(i);
      cols[mu].assign(c.data(), c.data() + c.size());
    }
    const DenseTensor term = outer_rank_one(FactorTuple(std::move(cols)));
    const double w = weights[static_cast<std::size_t>(i)];
    for (std::size_t e = 0; e < total; ++e) entries[e] += w * term[e];
  }
  return DenseTensor(dims, std::move(entries));
}

}  // namespace lra
