#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lra/cp.hpp"
#include "lra/tensor.hpp"
#include "lra/trace.hpp"

namespace lra::io {

// Tensor text format:
//   dims: n1 n2 ... nd
//   entries in lexicographic order (last index fastest), whitespace separated.
// Values are printed with shortest round-trip precision, so write/read is
// value-identical for finite doubles.

DenseTensor read_tensor(const std::filesystem::path& path);
void write_tensor(const DenseTensor& t, const std::filesystem::path& path);

// CP factor format:
//   cp: d r
//   dims: n1 ... nd
//   one factor matrix per mode, row-major, blank-line separated.

CpFactors read_cp_factors(const std::filesystem::path& path);
void write_cp_factors(const CpFactors& x, const std::filesystem::path& path);

/// A symmetric operator stored as an order-2 tensor file. Symmetry is
/// validated to 1e-10 on load; square shape is required.
Eigen::MatrixXd read_operator(const std::filesystem::path& path);
void write_operator(const Eigen::MatrixXd& op, const std::filesystem::path& path);

// Traces are JSON lines: a header object, one object per record (per block
// for the least-squares solvers, per sweep for the power method), and a
// final summary object. Unknown record keys are ignored with a warning.

void write_trace(const IterationTrace& trace, const std::filesystem::path& path,
                 bool include_timings = false);
IterationTrace read_trace(const std::filesystem::path& path,
                          std::vector<std::string>* warnings = nullptr);

/// Incremental trace writer; emits the same bytes as write_trace.
class TraceWriter {
 public:
  TraceWriter(const std::filesystem::path& path, const TraceHeader& header,
              bool include_timings = false);
  void append(const BlockRecord& record);
  void append(const SweepRecord& record);
  void finish(const TraceSummary& summary);

 private:
  std::ofstream out_;
  bool include_timings_;
  std::string kind_;
};

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

}  // namespace lra::io
