#pragma once

#include <stdexcept>
#include <string>

namespace lra {

/// Base class of every typed error thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Tensor/factor shapes do not agree.
struct DimsMismatch : Error {
  using Error::Error;
};

/// Invalid tensor data (non-finite entries, zero input where nonzero required).
struct BadTensor : Error {
  using Error::Error;
};

/// Operator matrix failed validation (asymmetric or not positive definite).
struct BadOperator : Error {
  using Error::Error;
};

/// Starting guess violates the first-contraction condition.
struct BadStart : Error {
  using Error::Error;
};

/// A contraction norm vanished mid-iteration.
struct ZeroContraction : Error {
  using Error::Error;
};

/// A block subproblem is singular to working precision.
struct DegenerateBlock : Error {
  using Error::Error;
};

/// Exhaustive search is infeasible for the requested shape/resolution.
struct DimsTooLarge : Error {
  using Error::Error;
};

/// A matrix-only operation was called on a tensor of order != 2.
struct NotMatrix : Error {
  using Error::Error;
};

/// A trace is too short for the requested diagnostic.
struct InsufficientData : Error {
  using Error::Error;
};

/// A diagnostic that needs a converged run was given an unconverged trace.
struct NotConverged : Error {
  using Error::Error;
};

/// Malformed input file; carries the 1-based line (and column when known).
struct ParseError : Error {
  ParseError(const std::string& msg, int line_no, int column_no = 0)
      : Error("parse error at line " + std::to_string(line_no) +
              (column_no > 0 ? ", column " + std::to_string(column_no) : std::string()) +
              ": " + msg),
        line(line_no),
        column(column_no) {}
  int line;
  int column;
};

/// Structurally valid file whose content violates the trace schema.
struct SchemaError : Error {
  SchemaError(const std::string& msg, int line_no)
      : Error("schema error at line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
  int line;
};

}  // namespace lra
