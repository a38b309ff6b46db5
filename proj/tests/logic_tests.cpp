#include <algorithm>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "crosscheck/errors.hpp"
#include "crosscheck/logic/eval.hpp"
#include "crosscheck/logic/parser.hpp"
#include "doctest.h"
#include "support/oracle.hpp"
#include "support/program_gen.hpp"

using namespace crosscheck;
using testsupport::atom_set;
using testsupport::generate_program;
using testsupport::naive_evaluate;

namespace {

FactSet make_facts(std::initializer_list<Atom> atoms) {
  FactSet fs;
  for (const Atom& a : atoms) fs.atoms.insert(a);
  return fs;
}

Value sym(const char* s) { return Value{std::string(s)}; }

} // namespace

TEST_CASE("single fact clause parses") {
  logic::Program p = logic::parse_program("a(1).");
  CHECK(p.rules.size() == 1);
  CHECK(p.rules[0].body.empty());
  CHECK(p.arities.at("a") == 1);
  CHECK(p.is_intensional("a"));
  CHECK(p.max_stratum == 0);
}

TEST_CASE("comments and whitespace are ignored") {
  logic::Program p = logic::parse_program("% leading comment\n  a(1). % trailing\n\n");
  CHECK(p.rules.size() == 1);
}

TEST_CASE("transitive closure over three nodes") {
  logic::Program p =
      logic::parse_program("path(X, Y) :- e(X, Y).\npath(X, Z) :- e(X, Y), path(Y, Z).");
  logic::Model m = logic::evaluate(
      p, make_facts({{"e", {Value{1}, Value{2}}}, {"e", {Value{2}, Value{3}}}}));
  std::set<std::vector<Value>> want{{Value{1}, Value{2}}, {Value{2}, Value{3}},
                                    {Value{1}, Value{3}}};
  CHECK(m.relations.at("path") == want);
  CHECK(m.relations.at("e").size() == 2); // extensional relations stay visible
}

TEST_CASE("query with a bound first argument") {
  logic::Program p =
      logic::parse_program("path(X, Y) :- e(X, Y).\npath(X, Z) :- e(X, Y), path(Y, Z).");
  logic::Model m = logic::evaluate(
      p, make_facts({{"e", {Value{1}, Value{2}}}, {"e", {Value{2}, Value{3}}}}));
  auto rows = logic::query(m, "path", {Value{1}, std::nullopt});
  std::vector<std::vector<Value>> want{{Value{1}, Value{2}}, {Value{1}, Value{3}}};
  CHECK(rows == want);
  CHECK(logic::query(m, "path", {Value{9}, std::nullopt}).empty());
  CHECK_THROWS_AS((void)logic::query(m, "nope", {}), SchemaError);
}

TEST_CASE("negation finds unreachable nodes") {
  logic::Program p = logic::parse_program(
      "covered(Y) :- e(_, Y).\nunreach(X) :- n(X), \\+ covered(X).");
  logic::Model m = logic::evaluate(
      p, make_facts({{"n", {Value{1}}}, {"n", {Value{2}}}, {"e", {Value{1}, Value{2}}}}));
  std::set<std::vector<Value>> want{{Value{1}}};
  CHECK(m.relations.at("unreach") == want);
}

TEST_CASE("count aggregate with a threshold") {
  logic::Program p = logic::parse_program("many :- N = count(X : v(X)), N >= 2.");
  logic::Model m = logic::evaluate(
      p, make_facts({{"v", {Value{1}}}, {"v", {Value{2}}}, {"v", {Value{3}}}}));
  CHECK(m.relations.at("many").size() == 1); // nullary atom derived once
}

TEST_CASE("count is over distinct bindings of the counted variable") {
  logic::Program p = logic::parse_program("total(N) :- N = count(X : g(X, _)).");
  logic::Model m = logic::evaluate(p, make_facts({{"g", {Value{1}, sym("a")}},
                                                  {"g", {Value{1}, sym("b")}},
                                                  {"g", {Value{2}, sym("c")}}}));
  std::set<std::vector<Value>> want{{Value{2}}};
  CHECK(m.relations.at("total") == want);
}

TEST_CASE("count of an empty relation is zero") {
  logic::Program p = logic::parse_program("z(N) :- N = count(C : nothing(C)).");
  logic::Model m = logic::evaluate(p, {});
  std::set<std::vector<Value>> want{{Value{0}}};
  CHECK(m.relations.at("z") == want);
}

TEST_CASE("joins use typed equality but comparisons are numeric") {
  FactSet facts = make_facts({{"t", {Value{1}}}, {"t", {Value{1.0}}}, {"u", {Value{1}}}});
  logic::Program joined = logic::parse_program("s(X) :- t(X), u(X).");
  logic::Model m1 = logic::evaluate(joined, facts);
  std::set<std::vector<Value>> joined_want{{Value{1}}};
  CHECK(m1.relations.at("s") == joined_want); // 1.0 does not join with 1

  logic::Program compared = logic::parse_program("c(X) :- t(X), X == 1.");
  logic::Model m2 = logic::evaluate(compared, facts);
  std::set<std::vector<Value>> cmp_want{{Value{1}}, {Value{1.0}}};
  CHECK(m2.relations.at("c") == cmp_want); // both satisfy the numeric ==
}

TEST_CASE("string comparisons are lexicographic, mixed kinds only satisfy !=") {
  FactSet facts = make_facts({{"w", {sym("a")}}, {"w", {sym("b")}}, {"w", {Value{1}}}});
  logic::Model lt = logic::evaluate(logic::parse_program("q(X) :- w(X), X < b."), facts);
  std::set<std::vector<Value>> lt_want{{sym("a")}};
  CHECK(lt.relations.at("q") == lt_want); // 1 < "b" is a mixed-kind ordering: false

  logic::Model ne = logic::evaluate(logic::parse_program("q(X) :- w(X), X != 1."), facts);
  CHECK(ne.relations.at("q").size() == 2); // both symbols differ from 1; int 1 does not
}

TEST_CASE("facts for a rule-defined predicate are rejected") {
  logic::Program p = logic::parse_program("p(X) :- e(X).");
  CHECK_THROWS_WITH_AS((void)logic::evaluate(p, make_facts({{"p", {Value{1}}}})),
                       doctest::Contains("defined by rules"), SchemaError);
}

TEST_CASE("fact arity must match the program") {
  logic::Program p = logic::parse_program("p(X) :- e(X).");
  CHECK_THROWS_WITH_AS((void)logic::evaluate(p, make_facts({{"e", {Value{1}, Value{2}}}})),
                       doctest::Contains("arity"), SchemaError);
}

TEST_CASE("negation cycle is a stratification error naming the cycle") {
  CHECK_THROWS_WITH_AS((void)logic::parse_program("p(X) :- e(X), \\+ q(X).\nq(X) :- p(X)."),
                       doctest::Contains("cycle through negation or aggregation"),
                       StratificationError);
  try {
    (void)logic::parse_program("p(X) :- e(X), \\+ q(X).\nq(X) :- p(X).");
  } catch (const StratificationError& e) {
    std::string msg = e.what();
    CHECK(msg.find("p -> q") != std::string::npos);
    CHECK(msg.find("q -> p") != std::string::npos);
  }
}

TEST_CASE("aggregation cycle is a stratification error") {
  CHECK_THROWS_AS((void)logic::parse_program("p(N) :- N = count(X : q(X)).\nq(X) :- p(X)."),
                  StratificationError);
}

TEST_CASE("recursion through positive literals alone is fine") {
  CHECK_NOTHROW((void)logic::parse_program("p(X) :- e(X).\np(X) :- link(X, Y), p(Y)."));
}

TEST_CASE("range restriction rejects unbound head variables") {
  try {
    (void)logic::parse_program("p(X) :- \\+ e(X).");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    std::string msg = e.what();
    CHECK(msg.find("p") != std::string::npos);
    CHECK(msg.find("X") != std::string::npos);
  }
}

TEST_CASE("range restriction rejects unbound comparison and negation variables") {
  CHECK_THROWS_AS((void)logic::parse_program("p(X) :- e(X), X < Y."), ParseError);
  CHECK_THROWS_AS((void)logic::parse_program("p(X) :- e(X), \\+ q(X, Y)."), ParseError);
}

TEST_CASE("aggregate hygiene errors") {
  // result variable already bound
  CHECK_THROWS_WITH_AS((void)logic::parse_program("p(X) :- e(X), X = count(C : e(C))."),
                       doctest::Contains("fresh"), ParseError);
  // counted variable bound outside the aggregate
  CHECK_THROWS_WITH_AS((void)logic::parse_program("p(X) :- e(X), N = count(X : e(X)), N >= 1."),
                       doctest::Contains("local"), ParseError);
  // counted variable absent from the goal
  CHECK_THROWS_WITH_AS((void)logic::parse_program("p(N) :- N = count(C : e(_))."),
                       doctest::Contains("counted variable"), ParseError);
  // goal variables must come from positive literals
  CHECK_THROWS_AS((void)logic::parse_program("p(N) :- N = count(C : e(C, Y))."), ParseError);
}

TEST_CASE("anonymous variables are rejected in heads and comparisons") {
  CHECK_THROWS_AS((void)logic::parse_program("p(_) :- e(X)."), ParseError);
  CHECK_THROWS_AS((void)logic::parse_program("p(X) :- e(X), _ < 3."), ParseError);
}

TEST_CASE("arity conflicts are reported with both arities") {
  try {
    (void)logic::parse_program("p(X) :- e(X).\nq(X) :- e(X, X).");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    std::string msg = e.what();
    CHECK(msg.find("'e'") != std::string::npos);
    CHECK(msg.find("1") != std::string::npos);
    CHECK(msg.find("2") != std::string::npos);
  }
}

TEST_CASE("syntax errors carry line and column") {
  try {
    (void)logic::parse_program("p(X) :- e(X)");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
  CHECK_THROWS_WITH_AS((void)logic::parse_program("p(1.0e)."), doctest::Contains("exponent"),
                       ParseError);
  CHECK_THROWS_WITH_AS((void)logic::parse_program("p(X) :- \\ e(X)."),
                       doctest::Contains("\\+"), ParseError);
}

TEST_CASE("number lexing edge cases") {
  // '-' only starts a number before a digit; '.' only starts a fraction before one.
  logic::Program p = logic::parse_program("m(-3).\nf(1.5).\ng(2).");
  logic::Model m = logic::evaluate(p, {});
  std::set<std::vector<Value>> m_want{{Value{-3}}};
  std::set<std::vector<Value>> f_want{{Value{1.5}}};
  CHECK(m.relations.at("m") == m_want);
  CHECK(m.relations.at("f") == f_want);
  CHECK_THROWS_AS((void)logic::parse_program("h(99999999999999999999)."), ParseError);
}

TEST_CASE("pretty print round-trips structurally") {
  std::string text =
      "path(X, Z) :- e(X, Y), path(Y, Z), \\+ blocked(X), X != Z.\n"
      "score(N) :- node(X), N = count(C : e(X, C)), N >= 1.\n"
      "base(a, 1.5, -2).\n"
      "covered(Y) :- e(_, Y).\n";
  logic::Program p1 = logic::parse_program(text);
  logic::Program p2 = logic::parse_program(logic::pretty_print(p1));
  CHECK(p1.rules == p2.rules);
  CHECK(p1.strata == p2.strata);
}

TEST_CASE("oracle equivalence on generated programs") {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    auto gen = generate_program(seed);
    CAPTURE(seed);
    CAPTURE(gen.text);
    logic::Program p = logic::parse_program(gen.text);
    logic::Model engine = logic::evaluate(p, gen.facts);
    CHECK(atom_set(engine) == atom_set(naive_evaluate(p, gen.facts)));
  }
}

TEST_CASE("rule order does not change the model") {
  std::mt19937_64 rng(42);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto gen = generate_program(seed);
    logic::Program base = logic::parse_program(gen.text);
    auto base_atoms = atom_set(logic::evaluate(base, gen.facts));

    std::vector<std::string> lines;
    std::istringstream ss(gen.text);
    for (std::string line; std::getline(ss, line);)
      if (!line.empty()) lines.push_back(line);
    std::shuffle(lines.begin(), lines.end(), rng);
    std::string shuffled;
    for (const std::string& line : lines) shuffled += line + "\n";

    CAPTURE(seed);
    CAPTURE(shuffled);
    logic::Program permuted = logic::parse_program(shuffled);
    CHECK(atom_set(logic::evaluate(permuted, gen.facts)) == base_atoms);
  }
}

TEST_CASE("fact insertion order does not change the model") {
  std::mt19937_64 rng(7);
  auto gen = generate_program(3);
  logic::Program p = logic::parse_program(gen.text);
  auto base_atoms = atom_set(logic::evaluate(p, gen.facts));
  std::vector<Atom> atoms(gen.facts.atoms.begin(), gen.facts.atoms.end());
  for (int round = 0; round < 5; ++round) {
    std::shuffle(atoms.begin(), atoms.end(), rng);
    FactSet fs;
    fs.frame_lo = gen.facts.frame_lo;
    fs.frame_hi = gen.facts.frame_hi;
    for (const Atom& a : atoms) fs.atoms.insert(a);
    CHECK(atom_set(logic::evaluate(p, fs)) == base_atoms);
  }
}

TEST_CASE("adding a fact never removes stratum-zero derivations") {
  std::mt19937_64 rng(11);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto gen = generate_program(seed);
    logic::Program p = logic::parse_program(gen.text);
    logic::Model before = logic::evaluate(p, gen.facts);

    FactSet extended = gen.facts;
    std::vector<Value> args;
    std::size_t arity = p.arities.count("e1") ? p.arities.at("e1") : 2;
    for (std::size_t i = 0; i < arity; ++i)
      args.push_back(Value{static_cast<std::int64_t>(1 + rng() % 4)});
    extended.atoms.insert({"e1", args});
    logic::Model after = logic::evaluate(p, extended);

    CAPTURE(seed);
    for (const auto& [pred, rel] : before.relations) {
      auto stratum = p.strata.find(pred);
      if (stratum == p.strata.end() || stratum->second != 0 || !p.is_intensional(pred)) continue;
      const auto& grown = after.relations.at(pred);
      for (const auto& tuple : rel) CHECK(grown.count(tuple) == 1);
    }
  }
}

TEST_CASE("generated programs pretty-print round trip") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    auto gen = generate_program(seed);
    CAPTURE(seed);
    CAPTURE(gen.text);
    logic::Program p1 = logic::parse_program(gen.text);
    logic::Program p2 = logic::parse_program(logic::pretty_print(p1));
    CHECK(p1.rules == p2.rules);
  }
}
