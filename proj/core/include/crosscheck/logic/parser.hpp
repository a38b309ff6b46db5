#pragma once

#include <string>

#include "crosscheck/logic/ast.hpp"

namespace crosscheck::logic {

// Grammar:
//   clause  := atom "." | atom ":-" body "."
//   body    := literal ("," literal)*
//   literal := atom | "\+" atom | term CMP term | VAR "=" "count" "(" VAR ":" atom ")"
// Lowercase identifiers are symbols/predicates, Capitalized are variables,
// "_" is anonymous, "%" starts a line comment.
//
// Beyond syntax this checks arity consistency, range restriction (naming the
// rule and variable) and stratification (naming the negation cycle).
// Throws ParseError or StratificationError.
Program parse_program(const std::string& text);
Program parse_program_file(const std::string& path);

// Canonical text that reparses to a structurally identical Program.
std::string pretty_print(const Program& p);

} // namespace crosscheck::logic
