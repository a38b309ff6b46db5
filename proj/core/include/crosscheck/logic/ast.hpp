#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "crosscheck/facts.hpp"

namespace crosscheck::logic {

struct Term {
  enum class Kind { constant, variable, anonymous };
  Kind kind = Kind::constant;
  Value value;     // constant payload
  std::string var; // variable name

  static Term constant(Value v) { return {Kind::constant, std::move(v), {}}; }
  static Term variable(std::string name) { return {Kind::variable, {}, std::move(name)}; }
  static Term anonymous() { return {Kind::anonymous, {}, {}}; }

  bool operator==(const Term&) const = default;
};

struct RuleAtom {
  std::string pred;
  std::vector<Term> args;

  bool operator==(const RuleAtom&) const = default;
};

enum class CmpOp { lt, le, gt, ge, eq, ne };

struct Comparison {
  CmpOp op = CmpOp::lt;
  Term lhs;
  Term rhs;

  bool operator==(const Comparison&) const = default;
};

// N = count(X : goal). Distinct bindings of the counted variable.
struct Aggregate {
  std::string result_var;
  std::string counted_var;
  RuleAtom goal;

  bool operator==(const Aggregate&) const = default;
};

struct Literal {
  enum class Kind { positive, negative, comparison, aggregate };
  Kind kind = Kind::positive;
  RuleAtom atom;  // positive / negative
  Comparison cmp; // comparison
  Aggregate agg;  // aggregate

  bool operator==(const Literal&) const = default;
};

struct Rule {
  RuleAtom head;
  std::vector<Literal> body;
  std::size_t line = 0;

  bool operator==(const Rule& o) const { return head == o.head && body == o.body; }
};

struct Program {
  std::vector<Rule> rules;
  // Predicate -> stratum. Extensional predicates (never in a head) are
  // stratum 0; a predicate's stratum exceeds that of anything it negates
  // or aggregates over.
  std::map<std::string, int> strata;
  int max_stratum = 0;
  // Fixed arity per predicate, from every use in the program.
  std::map<std::string, std::size_t> arities;

  bool is_intensional(const std::string& pred) const;
};

} // namespace crosscheck::logic
