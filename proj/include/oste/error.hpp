#pragma once

#include <stdexcept>
#include <string>

namespace oste {

// Machine-readable category carried by every library exception. The CLI
// reports it verbatim in its error record.
enum class ErrorKind {
  config,
  parse,
  validation,
  degenerate_split,
  growth,
  undefined_concordance,
  metric_undefined,
  selection,
  io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row)
      : Error(ErrorKind::parse, "row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class DegenerateSplitError : public Error {
 public:
  explicit DegenerateSplitError(const std::string& what) : Error(ErrorKind::degenerate_split, what) {}
};

class GrowthError : public Error {
 public:
  explicit GrowthError(const std::string& what) : Error(ErrorKind::growth, what) {}
};

class UndefinedConcordanceError : public Error {
 public:
  explicit UndefinedConcordanceError(const std::string& what)
      : Error(ErrorKind::undefined_concordance, what) {}
};

class MetricUndefinedError : public Error {
 public:
  explicit MetricUndefinedError(const std::string& what) : Error(ErrorKind::metric_undefined, what) {}
};

class SelectionError : public Error {
 public:
  explicit SelectionError(const std::string& what) : Error(ErrorKind::selection, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

}  // namespace oste
