#include "lra/io.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "lra/errors.hpp"

namespace lra::io {

using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

/// Whitespace tokenizer that tracks 1-based line/column for error reporting.
struct NumberReader {
  std::istream& in;
  int line_no = 0;
  std::string line;
  std::size_t pos = 0;

  bool next_token(std::string& token, int& token_line, int& token_col) {
    while (true) {
      while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
      if (pos >= line.size()) {
        if (!std::getline(in, line)) return false;
        ++line_no;
        pos = 0;
        continue;
      }
      const std::size_t start = pos;
      while (pos < line.size() && !std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
      token = line.substr(start, pos - start);
      token_line = line_no;
      token_col = static_cast<int>(start) + 1;
      return true;
    }
  }

  double parse_double(const std::string& token, int token_line, int token_col) {
    double v = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end) {
      throw ParseError("invalid number '" + token + "'", token_line, token_col);
    }
    if (!std::isfinite(v)) throw ParseError("non-finite entry", token_line, token_col);
    return v;
  }
};

std::vector<std::size_t> parse_dims_header(const std::string& line, int line_no,
                                           const std::string& tag) {
  std::istringstream hs(line);
  std::string head;
  hs >> head;
  if (head != tag) throw ParseError("expected '" + tag + "' header", line_no);
  std::vector<std::size_t> dims;
  long long v = 0;
  while (hs >> v) {
    if (v <= 0) throw ParseError("dimensions must be positive", line_no);
    dims.push_back(static_cast<std::size_t>(v));
  }
  if (!hs.eof()) throw ParseError("invalid dimension token", line_no);
  if (dims.empty()) throw ParseError("no dimensions given", line_no);
  return dims;
}

void set_if_finite(json& j, const char* key, double v) {
  if (std::isfinite(v)) j[key] = v;
}

double get_num(const json& j, const char* key) {
  const auto it = j.find(key);
  return it != j.end() && it->is_number() ? it->get<double>() : kUnset;
}

json rule_to_json(const StoppingRule& rule) {
  json j;
  j["max_sweeps"] = rule.max_sweeps;
  if (rule.lambda_tol) j["lambda_tol"] = *rule.lambda_tol;
  if (rule.grad_tol) j["grad_tol"] = *rule.grad_tol;
  if (rule.step_tol) j["step_tol"] = *rule.step_tol;
  return j;
}

json header_to_json(const TraceHeader& h) {
  json j;
  j["schema"] = "lra.trace/1";
  j["kind"] = h.kind;
  j["seed"] = h.seed;
  if (!h.command.empty()) j["command"] = h.command;
  if (!h.dims.empty()) j["dims"] = h.dims;
  set_if_finite(j, "norm_target", h.norm_target);
  set_if_finite(j, "f0", h.f0);
  set_if_finite(j, "sigma0", h.sigma0);
  set_if_finite(j, "sigma_star", h.sigma_star);
  set_if_finite(j, "gamma_bound", h.gamma_bound);
  if (h.rank > 0) j["rank"] = h.rank;
  j["rule"] = rule_to_json(h.rule);
  return j;
}

json block_to_json(const BlockRecord& b, const std::string& kind) {
  json j;
  j["sweep"] = b.sweep;
  j["mode"] = b.mode;
  set_if_finite(j, "f", b.f);
  set_if_finite(j, "lambda", b.lambda);
  set_if_finite(j, "step_norm", b.step_norm);
  set_if_finite(j, "grad_norm", b.grad_norm);
  // The block-strength key follows the producing solver's schema.
  set_if_finite(j, kind == "bcd" ? "sigma_k_mu" : "sigma_block", b.sigma_block);
  set_if_finite(j, "gamma_bound_used", b.gamma_bound);
  if (b.has_checks) {
    j["checks"] = json{{"p33", b.checks.p33}, {"p34", b.checks.p34}, {"p35", b.checks.p35},
                       {"p36", b.checks.p36}, {"p37", b.checks.p37}, {"p38", b.checks.p38}};
  }
  return j;
}

json sweep_to_json(const SweepRecord& s, bool include_timings) {
  json j;
  j["sweep"] = s.sweep;
  set_if_finite(j, "f", s.f);
  set_if_finite(j, "lambda", s.lambda);
  set_if_finite(j, "residual", s.residual);
  set_if_finite(j, "step_norm", s.step_norm);
  set_if_finite(j, "grad_norm", s.grad_norm);
  set_if_finite(j, "min_sigma", s.min_sigma);
  if (include_timings) set_if_finite(j, "wall_time", s.wall_time);
  return j;
}

json summary_to_json(const TraceSummary& s) {
  json inner;
  inner["sweeps"] = s.sweeps;
  inner["stop_reason"] = to_string(s.stop_reason);
  set_if_finite(inner, "f_star", s.f_star);
  set_if_finite(inner, "lambda_star", s.lambda_star);
  set_if_finite(inner, "terminal_grad", s.terminal_grad);
  set_if_finite(inner, "min_sigma", s.min_sigma);
  set_if_finite(inner, "kappa_hat", s.kappa_hat);
  inner["stability_warning"] = s.stability_warning;
  inner["audit_pass"] = s.audit_pass;
  return json{{"summary", inner}};
}

const char* const kBlockKeys[] = {"sweep",       "mode",        "f",
                                  "lambda",      "step_norm",   "grad_norm",
                                  "sigma_block", "sigma_k_mu",  "gamma_bound_used",
                                  "checks",      "wall_time"};
const char* const kSweepKeys[] = {"sweep",     "f",         "lambda",   "residual",
                                  "step_norm", "grad_norm", "min_sigma", "wall_time"};

template <std::size_t N>
void warn_unknown(const json& j, const char* const (&known)[N], int line_no,
                  std::vector<std::string>* warnings) {
  if (!warnings) return;
  for (const auto& [key, value] : j.items()) {
    bool found = false;
    for (const char* k : known) {
      if (key == k) {
        found = true;
        break;
      }
    }
    if (!found) {
      warnings->push_back("line " + std::to_string(line_no) + ": ignoring unknown key '" + key +
                          "'");
    }
  }
}

}  // namespace

DenseTensor read_tensor(const std::filesystem::path& path) {
  constexpr std::size_t kMaxEntries = std::size_t{1} << 30;
  std::ifstream in = open_in(path);
  std::string header;
  if (!std::getline(in, header)) throw ParseError("empty file; expected a dims header", 1);
  const std::vector<std::size_t> dims = parse_dims_header(header, 1, "dims:");
  std::size_t total = 1;
  for (std::size_t n : dims) {
    if (total > kMaxEntries / n) throw ParseError("tensor size exceeds the reader limit", 1);
    total *= n;
  }

  NumberReader reader{in, 1, {}, 0};
  std::vector<double> entries;
  entries.reserve(total);
  std::string token;
  int tline = 1, tcol = 0;
  while (reader.next_token(token, tline, tcol)) {
    if (entries.size() == total) {
      throw ParseError("expected " + std::to_string(total) + " entries but found more", tline,
                       tcol);
    }
    entries.push_back(reader.parse_double(token, tline, tcol));
  }
  if (entries.size() != total) {
    throw ParseError("expected " + std::to_string(total) + " entries, found " +
                         std::to_string(entries.size()),
                     reader.line_no == 0 ? 1 : reader.line_no);
  }
  return DenseTensor(dims, std::move(entries));
}

void write_tensor(const DenseTensor& t, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "dims:";
  for (std::size_t n : t.dims()) out << ' ' << n;
  out << '\n';
  const std::size_t row = t.dims().back();
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << format_double(t[i]);
    out << (((i + 1) % row == 0) ? '\n' : ' ');
  }
  if (!out) throw Error("failed writing " + path.string());
}

CpFactors read_cp_factors(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file; expected a 'cp:' header", 1);
  long long d = 0, r = 0;
  {
    std::istringstream hs(line);
    std::string tag;
    hs >> tag;
    if (tag != "cp:") throw ParseError("expected 'cp:' header", 1);
    if (!(hs >> d >> r) || d < 1 || r < 1) throw ParseError("expected 'cp: d r'", 1);
  }
  if (!std::getline(in, line)) throw ParseError("missing dims header", 2);
  const std::vector<std::size_t> dims = parse_dims_header(line, 2, "dims:");
  if (dims.size() != static_cast<std::size_t>(d)) {
    throw ParseError("dims count does not match the declared order", 2);
  }

  NumberReader reader{in, 2, {}, 0};
  std::vector<Eigen::MatrixXd> mats;
  std::string token;
  int tline = 2, tcol = 0;
  for (std::size_t mu = 0; mu < dims.size(); ++mu) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(dims[mu]), static_cast<Eigen::Index>(r));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (!reader.next_token(token, tline, tcol)) {
          throw ParseError("unexpected end of file inside factor matrix " + std::to_string(mu),
                           reader.line_no == 0 ? 1 : reader.line_no);
        }
        m(i, j) = reader.parse_double(token, tline, tcol);
      }
    }
    mats.push_back(std::move(m));
  }
  if (reader.next_token(token, tline, tcol)) {
    throw ParseError("trailing data after the last factor matrix", tline, tcol);
  }
  return CpFactors(std::move(mats));
}

void write_cp_factors(const CpFactors& x, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "cp: " << x.order() << ' ' << x.rank() << '\n';
  out << "dims:";
  for (std::size_t n : x.dims()) out << ' ' << n;
  out << '\n';
  for (std::size_t mu = 0; mu < x.order(); ++mu) {
    const auto& m = x.mode(mu);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        out << format_double(m(i, j)) << (j + 1 == m.cols() ? '\n' : ' ');
      }
    }
    if (mu + 1 < x.order()) out << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

Eigen::MatrixXd read_operator(const std::filesystem::path& path) {
  const DenseTensor t = read_tensor(path);
  if (t.order() != 2 || t.dims()[0] != t.dims()[1]) {
    throw BadOperator("operator file must hold a square order-2 tensor");
  }
  const auto n = static_cast<Eigen::Index>(t.dims()[0]);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = t[static_cast<std::size_t>(i * n + j)];
  }
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw BadOperator("operator in " + path.string() + " is not symmetric");
  }
  return m;
}

void write_operator(const Eigen::MatrixXd& op, const std::filesystem::path& path) {
  const auto n = op.rows();
  std::vector<double> entries;
  entries.reserve(static_cast<std::size_t>(n * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < op.cols(); ++j) entries.push_back(op(i, j));
  }
  write_tensor(DenseTensor({static_cast<std::size_t>(n), static_cast<std::size_t>(op.cols())},
                           std::move(entries)),
               path);
}

TraceWriter::TraceWriter(const std::filesystem::path& path, const TraceHeader& header,
                         bool include_timings)
    : out_(open_out(path)), include_timings_(include_timings) {
  kind_ = header.kind;
  out_ << header_to_json(header).dump() << '\n';
}

void TraceWriter::append(const BlockRecord& record) {
  out_ << block_to_json(record, kind_).dump() << '\n';
}

void TraceWriter::append(const SweepRecord& record) {
  out_ << sweep_to_json(record, include_timings_).dump() << '\n';
}

void TraceWriter::finish(const TraceSummary& summary) {
  out_ << summary_to_json(summary).dump() << '\n';
  out_.flush();
  if (!out_) throw Error("failed writing trace");
}

void write_trace(const IterationTrace& trace, const std::filesystem::path& path,
                 bool include_timings) {
  TraceWriter writer(path, trace.header, include_timings);
  if (!trace.blocks.empty()) {
    for (const BlockRecord& b : trace.blocks) writer.append(b);
  } else {
    for (const SweepRecord& s : trace.sweeps) writer.append(s);
  }
  writer.finish(trace.summary);
}

IterationTrace read_trace(const std::filesystem::path& path,
                          std::vector<std::string>* warnings) {
  std::ifstream in = open_in(path);
  IterationTrace trace;
  std::string line;
  int line_no = 0;
  int last_block_sweep = std::numeric_limits<int>::min();
  int last_sweep = std::numeric_limits<int>::min();
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(e.what(), line_no);
    }
    if (!j.is_object()) throw SchemaError("trace lines must be JSON objects", line_no);

    if (j.contains("schema")) {
      TraceHeader& h = trace.header;
      h.kind = j.value("kind", std::string());
      h.seed = j.value("seed", std::uint64_t{0});
      h.command = j.value("command", std::string());
      if (j.contains("dims")) h.dims = j["dims"].get<std::vector<std::size_t>>();
      h.norm_target = get_num(j, "norm_target");
      h.f0 = get_num(j, "f0");
      h.sigma0 = get_num(j, "sigma0");
      h.sigma_star = get_num(j, "sigma_star");
      h.gamma_bound = get_num(j, "gamma_bound");
      h.rank = j.value("rank", 0);
      if (j.contains("rule")) {
        const json& r = j["rule"];
        h.rule.max_sweeps = r.value("max_sweeps", 500);
        if (r.contains("lambda_tol")) h.rule.lambda_tol = r["lambda_tol"].get<double>();
        if (r.contains("grad_tol")) h.rule.grad_tol = r["grad_tol"].get<double>();
        if (r.contains("step_tol")) h.rule.step_tol = r["step_tol"].get<double>();
      }
    } else if (j.contains("summary")) {
      const json& s = j["summary"];
      trace.summary.sweeps = s.value("sweeps", 0);
      trace.summary.stop_reason = stop_reason_from_string(s.value("stop_reason", std::string()));
      trace.summary.f_star = get_num(s, "f_star");
      trace.summary.lambda_star = get_num(s, "lambda_star");
      trace.summary.terminal_grad = get_num(s, "terminal_grad");
      trace.summary.min_sigma = get_num(s, "min_sigma");
      trace.summary.kappa_hat = get_num(s, "kappa_hat");
      trace.summary.stability_warning = s.value("stability_warning", false);
      trace.summary.audit_pass = s.value("audit_pass", true);
    } else if (j.contains("mode")) {
      warn_unknown(j, kBlockKeys, line_no, warnings);
      BlockRecord b;
      b.sweep = j.value("sweep", 0);
      b.mode = j.value("mode", 0);
      b.f = get_num(j, "f");
      b.lambda = get_num(j, "lambda");
      b.step_norm = get_num(j, "step_norm");
      b.grad_norm = get_num(j, "grad_norm");
      b.sigma_block = std::isfinite(get_num(j, "sigma_block")) ? get_num(j, "sigma_block")
                                                               : get_num(j, "sigma_k_mu");
      b.gamma_bound = get_num(j, "gamma_bound_used");
      if (j.contains("checks")) {
        const json& c = j["checks"];
        b.has_checks = true;
        b.checks.p33 = c.value("p33", true);
        b.checks.p34 = c.value("p34", true);
        b.checks.p35 = c.value("p35", true);
        b.checks.p36 = c.value("p36", true);
        b.checks.p37 = c.value("p37", true);
        b.checks.p38 = c.value("p38", true);
      }
      if (b.sweep < last_block_sweep) throw SchemaError("sweep numbers decrease", line_no);
      last_block_sweep = b.sweep;
      trace.blocks.push_back(std::move(b));
    } else if (j.contains("sweep")) {
      warn_unknown(j, kSweepKeys, line_no, warnings);
      SweepRecord s;
      s.sweep = j.value("sweep", 0);
      s.f = get_num(j, "f");
      s.lambda = get_num(j, "lambda");
      s.residual = get_num(j, "residual");
      s.step_norm = get_num(j, "step_norm");
      s.grad_norm = get_num(j, "grad_norm");
      s.min_sigma = get_num(j, "min_sigma");
      s.wall_time = get_num(j, "wall_time");
      if (s.sweep <= last_sweep) throw SchemaError("sweep numbers must increase", line_no);
      last_sweep = s.sweep;
      trace.sweeps.push_back(s);
    } else {
      throw SchemaError("unrecognized trace line", line_no);
    }
  }
  if (trace.sweeps.empty() && !trace.blocks.empty()) {
    trace.sweeps = sweeps_from_blocks(trace.blocks);
  }
  return trace;
}

}  // namespace lra::io
