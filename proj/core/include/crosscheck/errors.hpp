#pragma once

#include <stdexcept>
#include <string>

namespace crosscheck {

// Exit codes used by the CLI. Library code throws the typed errors below;
// the CLI maps them to these process exit codes.
enum class ExitCode : int {
  ok = 0,
  usage = 1,
  parse = 2,          // rule/fact/log parse errors, schema and arity errors
  stratification = 3, // negation/aggregation cycles
  config = 4,         // invalid world or noise configuration
  alignment = 5,      // frame misalignment between logs
};

class Error : public std::runtime_error {
public:
  Error(ExitCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  ExitCode exit_code() const { return code_; }

private:
  ExitCode code_;
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& msg) : Error(ExitCode::config, msg) {}
};

// Syntax errors, range-restriction violations, fact/log format errors.
class ParseError : public Error {
public:
  explicit ParseError(const std::string& msg) : Error(ExitCode::parse, msg) {}
  ParseError(const std::string& msg, int line, int column)
      : Error(ExitCode::parse, "line " + std::to_string(line) + ", column " +
                                   std::to_string(column) + ": " + msg),
        line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

private:
  int line_ = 0;
  int column_ = 0;
};

class StratificationError : public Error {
public:
  explicit StratificationError(const std::string& msg) : Error(ExitCode::stratification, msg) {}
};

// Predicate arity or unknown-predicate problems between rules and facts.
class SchemaError : public Error {
public:
  explicit SchemaError(const std::string& msg) : Error(ExitCode::parse, msg) {}
};

class AlignmentError : public Error {
public:
  explicit AlignmentError(const std::string& msg) : Error(ExitCode::alignment, msg) {}
};

class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& msg) : Error(ExitCode::parse, msg) {}
};

} // namespace crosscheck
