// Command-line front end: tensor generation, rank-one approximation (power
// method / ALS), CP block coordinate descent, and trace diagnostics. Run
// summaries go to stdout as JSON; human-readable messages go to stderr.
//
// Exit codes: 0 success, 1 I/O or internal failure, 2 bad arguments,
// 3 bad start / degenerate block, 4 check violation under --strict,
// 5 insufficient trace data.

#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "lra/als.hpp"
#include "lra/cp.hpp"
#include "lra/diagnostics.hpp"
#include "lra/errors.hpp"
#include "lra/hopm.hpp"
#include "lra/io.hpp"
#include "lra/oracle.hpp"
#include "lra/rng.hpp"
#include "lra/tensor.hpp"

namespace {

using nlohmann::json;

void emit(const json& j) { std::cout << j.dump() << std::endl; }

json num_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

void warn_low_order(const lra::DenseTensor& t) {
  if (t.order() < 3) {
    std::cerr << "note: tensor order " << t.order()
              << " < 3; the matrix case is supported as a cross-check\n";
  }
}

struct GenArgs {
  std::string kind;
  std::vector<std::size_t> dims;
  std::vector<double> values;
  double eps = 0.0;
  int terms = 0;
  std::uint64_t seed = 0;
  std::string output;
};

int run_gen(const GenArgs& a) {
  if (a.kind == "spdop") {
    if (a.dims.size() != 1) throw lra::Error("spdop takes a single dimension");
    const auto n = static_cast<Eigen::Index>(a.dims[0]);
    lra::Rng rng(a.seed);
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) g(i, j) = rng.normal();
    }
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd d(n);
    for (Eigen::Index i = 0; i < n; ++i) d[i] = 1.0 + rng.uniform();
    Eigen::MatrixXd op = q * d.asDiagonal() * q.transpose();
    op = 0.5 * (op + op.transpose());
    lra::io::write_operator(op, a.output);
    emit(json{{"command", "gen"},
              {"kind", a.kind},
              {"dims", json::array({a.dims[0], a.dims[0]})},
              {"frobenius_norm", op.norm()},
              {"seed", a.seed},
              {"path", a.output}});
    return 0;
  }

  lra::DenseTensor t;
  if (a.kind == "random") {
    t = lra::random_gaussian_tensor(a.dims, a.seed);
  } else if (a.kind == "diagonal") {
    if (a.values.empty()) throw lra::Error("diagonal needs --values");
    t = lra::diagonal_tensor(a.dims, a.values);
  } else if (a.kind == "rank1") {
    t = lra::random_rank_one(a.dims, a.seed).first;
  } else if (a.kind == "rank1plusnoise") {
    const auto [base, factors] = lra::random_rank_one(a.dims, a.seed);
    t = lra::rank_one_plus_noise(factors, a.eps, a.seed + 1);
  } else if (a.kind == "odeco") {
    std::vector<double> weights = a.values;
    if (weights.empty()) {
      if (a.terms < 1) throw lra::Error("odeco needs --terms or --values");
      for (int i = a.terms; i >= 1; --i) weights.push_back(static_cast<double>(i));
    }
    t = lra::odeco_tensor(a.dims, weights, a.seed);
  } else {
    throw lra::Error("unknown kind '" + a.kind + "'");
  }
  lra::io::write_tensor(t, a.output);
  emit(json{{"command", "gen"},
            {"kind", a.kind},
            {"dims", t.dims()},
            {"frobenius_norm", lra::frobenius_norm(t)},
            {"seed", a.seed},
            {"path", a.output}});
  return 0;
}

struct ApproxArgs {
  std::string input;
  std::string method = "als";
  std::uint64_t seed = 0;
  int max_sweeps = 500;
  double grad_tol = 1e-10;
  double step_tol = 1e-12;
  std::optional<double> lambda_tol;
  bool audit = false;
  bool strict = false;
  bool timings = false;
  std::string trace_path;
  bool verify_equivalence = false;
  int sweeps = 50;
  std::string command;
};

/// Monotone-lambda and unit-factor audit of a power-method trace.
bool hopm_trace_ok(const lra::IterationTrace& trace, const lra::HopmState& terminal) {
  constexpr double kSlack = 1e-10;
  for (std::size_t i = 2; i < trace.sweeps.size(); ++i) {
    if (trace.sweeps[i].lambda < trace.sweeps[i - 1].lambda - kSlack) return false;
  }
  if (trace.sweeps.size() > 1 && trace.sweeps.back().lambda <= 0.0) return false;
  for (std::size_t mu = 0; mu < terminal.y.order(); ++mu) {
    if (std::abs(lra::detail::norm(terminal.y.mode(mu)) - 1.0) > 1e-12) return false;
  }
  return true;
}

int run_approx(const ApproxArgs& a) {
  const lra::DenseTensor t = lra::io::read_tensor(a.input);
  warn_low_order(t);
  lra::Rng rng(a.seed);
  const lra::FactorTuple start = lra::random_start(t, rng);

  if (a.verify_equivalence) {
    const lra::EquivalenceReport rep = lra::verify_equivalence(t, start, a.sweeps);
    emit(json{{"command", "approx"},
              {"method", "verify_equivalence"},
              {"sweeps", a.sweeps},
              {"max_factor_dev", rep.max_factor_dev},
              {"max_lambda_dev", rep.max_lambda_dev},
              {"tolerance", rep.tolerance},
              {"pass", rep.pass},
              {"seed", a.seed}});
    return rep.pass ? 0 : (a.strict ? 4 : 0);
  }

  lra::StoppingRule rule;
  rule.max_sweeps = a.max_sweeps;
  if (a.grad_tol >= 0.0) rule.grad_tol = a.grad_tol;
  if (a.lambda_tol) rule.lambda_tol = *a.lambda_tol;

  if (a.method == "hopm") {
    lra::HopmRun run = lra::run_hopm(t, start, rule);
    run.trace.header.seed = a.seed;
    run.trace.header.command = a.command;
    const bool audit_pass = !a.audit || hopm_trace_ok(run.trace, run.state);
    run.trace.summary.audit_pass = audit_pass;
    if (!a.trace_path.empty()) lra::io::write_trace(run.trace, a.trace_path, a.timings);
    json summary{{"command", "approx"},
                 {"method", "hopm"},
                 {"lambda_star", run.state.lambda},
                 {"sweeps", run.state.sweep},
                 {"stop_reason", lra::to_string(run.trace.summary.stop_reason)},
                 {"terminal_residual", run.trace.summary.terminal_grad},
                 {"seed", a.seed}};
    if (a.audit) summary["audit_pass"] = audit_pass;
    emit(summary);
    return (a.strict && !audit_pass) ? 4 : 0;
  }
  if (a.method != "als") throw lra::Error("unknown method '" + a.method + "'");

  if (a.step_tol >= 0.0) rule.step_tol = a.step_tol;
  lra::AlsRun run = lra::run_als(t, start, rule, a.audit);
  run.trace.header.seed = a.seed;
  run.trace.header.command = a.command;
  if (!a.trace_path.empty()) lra::io::write_trace(run.trace, a.trace_path, a.timings);
  const bool audit_pass = !run.audit || run.audit->pass();
  json summary{{"command", "approx"},
               {"method", "als"},
               {"lambda_star", run.trace.summary.lambda_star},
               {"f_star", run.state.f_value},
               {"sweeps", run.state.sweep},
               {"stop_reason", lra::to_string(run.trace.summary.stop_reason)},
               {"terminal_grad", run.trace.summary.terminal_grad},
               {"seed", a.seed}};
  if (a.audit) {
    summary["audit_pass"] = audit_pass;
    summary["kappa_hat"] = num_or_null(run.audit->kappa_hat);
  }
  emit(summary);
  return (a.strict && !audit_pass) ? 4 : 0;
}

struct CpArgs {
  std::string input;
  int rank = 1;
  double sigma_star = 0.0;
  std::string objective = "ls";
  std::string operator_path;
  std::uint64_t seed = 0;
  int max_sweeps = 500;
  double step_tol = 1e-12;
  double grad_tol = -1.0;
  double stability_threshold = 1e-8;
  int sigma_interval = 1;
  bool no_strict = false;
  std::string trace_path;
  std::string init_path;
  std::string factors_out;
  bool timings = false;
  std::string command;
};

int run_cp(const CpArgs& a) {
  const lra::DenseTensor t = lra::io::read_tensor(a.input);
  warn_low_order(t);
  lra::Objective obj =
      a.objective == "energy"
          ? lra::Objective::quadratic_energy(lra::io::read_operator(a.operator_path), t,
                                             a.sigma_star)
          : lra::Objective::least_squares(t, a.sigma_star);

  lra::Rng rng(a.seed);
  const lra::CpFactors x0 =
      a.init_path.empty()
          ? lra::random_cp_factors(t.dims(), static_cast<std::size_t>(a.rank), rng)
          : lra::io::read_cp_factors(a.init_path);

  lra::StoppingRule rule;
  rule.max_sweeps = a.max_sweeps;
  if (a.step_tol >= 0.0) rule.step_tol = a.step_tol;
  if (a.grad_tol >= 0.0) rule.grad_tol = a.grad_tol;

  lra::BcdOptions opts;
  opts.strict = !a.no_strict;
  opts.sigma_interval = a.sigma_interval;
  opts.stability_threshold = a.stability_threshold;

  lra::BcdRun run = lra::run_bcd(obj, x0, rule, opts);
  run.trace.header.seed = a.seed;
  run.trace.header.command = a.command;
  if (!a.trace_path.empty()) lra::io::write_trace(run.trace, a.trace_path, a.timings);
  if (!a.factors_out.empty()) lra::io::write_cp_factors(run.factors, a.factors_out);

  emit(json{{"command", "cp"},
            {"objective", a.objective},
            {"rank", a.rank},
            {"sigma_star", a.sigma_star},
            {"f_star", run.trace.summary.f_star},
            {"sweeps", run.trace.summary.sweeps},
            {"stop_reason", lra::to_string(run.trace.summary.stop_reason)},
            {"terminal_grad", num_or_null(run.trace.summary.terminal_grad)},
            {"min_sigma", num_or_null(run.min_sigma)},
            {"stability_warning", run.stability_warning},
            {"gamma_bound", obj.min_curvature()},
            {"decrease_violations", run.decrease_violations},
            {"seed", a.seed}});
  return 0;
}

struct DiagnoseArgs {
  std::string input;
  std::string csv_path;
  double window_fraction = 0.5;
  int min_sweeps = 20;
};

int run_diagnose(const DiagnoseArgs& a) {
  std::vector<std::string> warnings;
  const lra::IterationTrace trace = lra::io::read_trace(a.input, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';

  lra::RateFitOptions rate_opts;
  rate_opts.window_fraction = a.window_fraction;
  rate_opts.min_sweeps = a.min_sweeps;
  const lra::RateFit rate = lra::fit_rate(trace, rate_opts);

  json loj = nullptr;
  double lambda_coef = lra::kUnset;
  try {
    const lra::LojasiewiczFit fit = lra::estimate_lojasiewicz(trace);
    lambda_coef = fit.lambda_coef;
    loj = json{{"theta", fit.theta},
               {"theta_raw", fit.theta_raw},
               {"theta_in_range", fit.theta_in_range},
               {"lambda_coef", fit.lambda_coef},
               {"residual", fit.residual},
               {"points", fit.points}};
  } catch (const lra::Error&) {
    // No objective values in the trace, or not converged; the rate fit stands alone.
  }

  const lra::SummabilityReport sum = lra::check_summability(trace);

  emit(json{{"command", "diagnose"},
            {"regime", lra::to_string(rate.regime)},
            {"q", num_or_null(rate.q)},
            {"theta", num_or_null(rate.theta)},
            {"lambda_coef", num_or_null(lambda_coef)},
            {"residual", num_or_null(rate.residual)},
            {"fit_window", json::array({rate.window_first, rate.window_last})},
            {"lojasiewicz", loj},
            {"summability",
             json{{"sum_sq", num_or_null(sum.sum_sq)},
                  {"bound", num_or_null(sum.bound)},
                  {"pass", std::isfinite(sum.bound) ? json(sum.pass) : json(nullptr)}}}});

  if (!a.csv_path.empty()) {
    std::ofstream csv(a.csv_path);
    if (!csv) throw lra::Error("cannot open " + a.csv_path + " for writing");
    csv << "k,e_k,f_gap,grad_norm\n";
    const double f_star = trace.summary.f_star;
    std::vector<double> tails(trace.sweeps.size(), 0.0);
    double tail = 0.0;
    for (std::size_t i = trace.sweeps.size(); i-- > 0;) {
      if (std::isfinite(trace.sweeps[i].step_norm)) tail += trace.sweeps[i].step_norm;
      tails[i] = tail;
    }
    for (std::size_t i = 0; i < trace.sweeps.size(); ++i) {
      const auto& s = trace.sweeps[i];
      const double gap = std::isfinite(f_star) && std::isfinite(s.f) ? s.f - f_star : lra::kUnset;
      csv << s.sweep << ',' << lra::io::format_double(tails[i]) << ','
          << (std::isfinite(gap) ? lra::io::format_double(gap) : "") << ','
          << (std::isfinite(s.grad_norm) ? lra::io::format_double(s.grad_norm) : "") << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"best rank-one tensor approximation and CP block coordinate descent toolkit"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "generate a test tensor or operator file");
  gen_cmd->add_option("--kind", gen.kind, "random|diagonal|rank1|rank1plusnoise|odeco|spdop")
      ->required();
  gen_cmd->add_option("--dims", gen.dims, "mode dimensions, comma separated")
      ->required()
      ->delimiter(',');
  gen_cmd->add_option("--values", gen.values, "diagonal values / odeco weights")->delimiter(',');
  gen_cmd->add_option("--eps", gen.eps, "noise amplitude for rank1plusnoise");
  gen_cmd->add_option("--terms", gen.terms, "number of odeco terms");
  gen_cmd->add_option("--seed", gen.seed, "random seed");
  gen_cmd->add_option("-o,--output", gen.output, "output path")->required();

  ApproxArgs approx;
  CLI::App* approx_cmd = app.add_subcommand("approx", "best rank-one approximation");
  approx_cmd->add_option("input", approx.input, "tensor file")->required();
  approx_cmd->add_option("--method", approx.method, "hopm|als");
  approx_cmd->add_option("--seed", approx.seed, "random seed for the starting guess");
  approx_cmd->add_option("--max-sweeps", approx.max_sweeps, "sweep limit");
  approx_cmd->add_option("--grad-tol", approx.grad_tol, "gradient/residual tolerance (<0 off)");
  approx_cmd->add_option("--step-tol", approx.step_tol, "step-norm tolerance (<0 off; als only)");
  double lambda_tol_in = -1.0;
  approx_cmd->add_option("--lambda-tol", lambda_tol_in, "lambda-increment tolerance (hopm)");
  approx_cmd->add_flag("--audit", approx.audit, "run the per-block property checks");
  approx_cmd->add_flag("--strict", approx.strict, "exit 4 on audit/equivalence violations");
  approx_cmd->add_flag("--timings", approx.timings, "include wall-clock times in the trace");
  approx_cmd->add_option("--trace", approx.trace_path, "trace output path (JSON lines)");
  approx_cmd->add_flag("--verify-equivalence", approx.verify_equivalence,
                       "compare the power method and ALS from the same start");
  approx_cmd->add_option("--sweeps", approx.sweeps, "sweep count for --verify-equivalence");

  CpArgs cp;
  CLI::App* cp_cmd = app.add_subcommand("cp", "CP-format block coordinate descent");
  cp_cmd->add_option("input", cp.input, "target tensor (ls) or right-hand side (energy)")
      ->required();
  cp_cmd->add_option("--rank", cp.rank, "CP rank")->required();
  cp_cmd->add_option("--sigma-star", cp.sigma_star, "regularization weight");
  cp_cmd->add_option("--objective", cp.objective, "ls|energy");
  cp_cmd->add_option("--operator", cp.operator_path, "SPD operator file (energy)");
  cp_cmd->add_option("--seed", cp.seed, "random seed for the starting factors");
  cp_cmd->add_option("--max-sweeps", cp.max_sweeps, "sweep limit");
  cp_cmd->add_option("--step-tol", cp.step_tol, "step-norm tolerance (<0 off)");
  cp_cmd->add_option("--grad-tol", cp.grad_tol, "gradient tolerance (<0 off)");
  cp_cmd->add_option("--stability-threshold", cp.stability_threshold,
                     "warn when the running min block strength crosses this (sigma_star = 0)");
  cp_cmd->add_option("--sigma-interval", cp.sigma_interval,
                     "compute the block strength every n-th block");
  cp_cmd->add_flag("--no-strict", cp.no_strict, "least-squares fallback on singular blocks");
  cp_cmd->add_option("--trace", cp.trace_path, "trace output path (JSON lines)");
  cp_cmd->add_option("--init", cp.init_path, "starting factors file");
  cp_cmd->add_option("--factors-out", cp.factors_out, "terminal factors output path");
  cp_cmd->add_flag("--timings", cp.timings, "include wall-clock times in the trace");

  DiagnoseArgs diag;
  CLI::App* diag_cmd = app.add_subcommand("diagnose", "convergence-rate diagnostics of a trace");
  diag_cmd->add_option("input", diag.input, "trace file")->required();
  diag_cmd->add_option("--csv", diag.csv_path, "CSV export path");
  diag_cmd->add_option("--window", diag.window_fraction, "fit window fraction (from the end)");
  diag_cmd->add_option("--min-sweeps", diag.min_sweeps, "minimum sweeps required for a fit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (lambda_tol_in >= 0.0) approx.lambda_tol = lambda_tol_in;
  approx.command = join_args(argc, argv);
  cp.command = join_args(argc, argv);

  try {
    if (gen_cmd->parsed()) return run_gen(gen);
    if (approx_cmd->parsed()) return run_approx(approx);
    if (cp_cmd->parsed()) return run_cp(cp);
    if (diag_cmd->parsed()) return run_diagnose(diag);
  } catch (const lra::BadStart& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const lra::DegenerateBlock& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const lra::InsufficientData& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
