#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "crosscheck/logic/ast.hpp"

namespace crosscheck::logic {

struct Model {
  std::map<std::string, std::set<std::vector<Value>>> relations;
};

// Bottom-up semi-naive evaluation, stratum by stratum, to the least model.
// Facts whose predicate appears in a rule head, or whose arity disagrees
// with the program, raise SchemaError. Joins use exact typed equality;
// comparison literals compare ints and floats numerically, symbols
// lexicographically, and mixed symbol/number only under == (false) and
// != (true).
Model evaluate(const Program& program, const FactSet& facts);

// Tuples of `pred` matching the pattern; nullopt matches anything.
// Unknown predicate raises SchemaError.
std::vector<std::vector<Value>> query(const Model& m, const std::string& pred,
                                      const std::vector<std::optional<Value>>& pattern);

} // namespace crosscheck::logic
