#include "crosscheck/logic/eval.hpp"

#include <algorithm>
#include <cstdint>

#include "crosscheck/errors.hpp"

namespace crosscheck::logic {

namespace {

using Tuple = std::vector<Value>;
using Relation = std::set<Tuple>;
using Subst = std::map<std::string, Value>;

bool is_number(const Value& v) { return v.index() < 2; }

double as_double(const Value& v) {
  return v.index() == 0 ? static_cast<double>(std::get<std::int64_t>(v)) : std::get<double>(v);
}

template <typename T>
bool apply_op(CmpOp op, const T& a, const T& b) {
  switch (op) {
    case CmpOp::lt: return a < b;
    case CmpOp::le: return a <= b;
    case CmpOp::gt: return a > b;
    case CmpOp::ge: return a >= b;
    case CmpOp::eq: return a == b;
    case CmpOp::ne: return a != b;
  }
  return false;
}

bool eval_cmp(CmpOp op, const Value& a, const Value& b) {
  if (is_number(a) && is_number(b)) {
    if (a.index() == 0 && b.index() == 0)
      return apply_op(op, std::get<std::int64_t>(a), std::get<std::int64_t>(b));
    return apply_op(op, as_double(a), as_double(b));
  }
  if (!is_number(a) && !is_number(b))
    return apply_op(op, std::get<std::string>(a), std::get<std::string>(b));
  return op == CmpOp::ne;
}

// Binds unbound variables in `atom` against `tuple`, appending their names
// to `trail`. On mismatch returns false; the caller unwinds the trail either
// way once done with the binding.
bool match(const RuleAtom& atom, const Tuple& tuple, Subst& s, std::vector<std::string>& trail) {
  if (atom.args.size() != tuple.size()) return false;
  for (std::size_t i = 0; i < atom.args.size(); ++i) {
    const Term& t = atom.args[i];
    switch (t.kind) {
      case Term::Kind::anonymous:
        break;
      case Term::Kind::constant:
        if (!(t.value == tuple[i])) return false;
        break;
      case Term::Kind::variable: {
        auto it = s.find(t.var);
        if (it != s.end()) {
          if (!(it->second == tuple[i])) return false;
        } else {
          s.emplace(t.var, tuple[i]);
          trail.push_back(t.var);
        }
        break;
      }
    }
  }
  return true;
}

void unwind(Subst& s, std::vector<std::string>& trail, std::size_t mark) {
  while (trail.size() > mark) {
    s.erase(trail.back());
    trail.pop_back();
  }
}

Value resolve(const Term& t, const Subst& s) {
  return t.kind == Term::Kind::constant ? t.value : s.at(t.var);
}

// Positive literals in written order, then aggregates, then negations and
// comparisons; the rule reads the same whichever order its binders appear.
struct CompiledRule {
  const Rule* rule = nullptr;
  std::vector<std::size_t> order;
  std::vector<std::size_t> delta_positions; // indexes into `order`
};

CompiledRule compile_rule(const Rule& r, const Program& p, int stratum) {
  CompiledRule c;
  c.rule = &r;
  auto push_kind = [&](Literal::Kind k) {
    for (std::size_t i = 0; i < r.body.size(); ++i)
      if (r.body[i].kind == k) c.order.push_back(i);
  };
  push_kind(Literal::Kind::positive);
  push_kind(Literal::Kind::aggregate);
  for (std::size_t i = 0; i < r.body.size(); ++i) {
    Literal::Kind k = r.body[i].kind;
    if (k == Literal::Kind::negative || k == Literal::Kind::comparison) c.order.push_back(i);
  }
  for (std::size_t k = 0; k < c.order.size(); ++k) {
    const Literal& lit = r.body[c.order[k]];
    if (lit.kind != Literal::Kind::positive) continue;
    auto it = p.strata.find(lit.atom.pred);
    if (it != p.strata.end() && it->second == stratum && p.is_intensional(lit.atom.pred))
      c.delta_positions.push_back(k);
  }
  return c;
}

class Engine {
public:
  Engine(const Program& p, const FactSet& facts) : prog_(p) {
    for (const Atom& a : facts.atoms) {
      if (prog_.is_intensional(a.pred))
        throw SchemaError("fact predicate '" + a.pred + "' is defined by rules");
      auto it = prog_.arities.find(a.pred);
      if (it != prog_.arities.end() && it->second != a.args.size())
        throw SchemaError("fact " + atom_to_string(a) + " has arity " +
                          std::to_string(a.args.size()) + " but the rules use '" + a.pred +
                          "' with arity " + std::to_string(it->second));
      rels_[a.pred].insert(a.args);
    }
    for (const auto& [pred, arity] : prog_.arities) rels_[pred];
  }

  Model run() {
    for (int s = 0; s <= prog_.max_stratum; ++s) eval_stratum(s);
    Model m;
    m.relations = std::move(rels_);
    return m;
  }

private:
  const Relation& rel(const std::string& pred) const {
    static const Relation empty;
    auto it = rels_.find(pred);
    return it == rels_.end() ? empty : it->second;
  }

  void eval_stratum(int stratum) {
    std::vector<CompiledRule> rules;
    for (const Rule& r : prog_.rules) {
      auto it = prog_.strata.find(r.head.pred);
      if (it != prog_.strata.end() && it->second == stratum)
        rules.push_back(compile_rule(r, prog_, stratum));
    }
    if (rules.empty()) return;

    std::map<std::string, Relation> delta;
    for (const CompiledRule& c : rules) {
      std::vector<Tuple> out;
      eval_rule(c, nullptr, 0, out);
      for (Tuple& t : out) absorb(c.rule->head.pred, std::move(t), delta);
    }
    while (true) {
      bool any = false;
      for (const auto& [pred, tuples] : delta)
        if (!tuples.empty()) any = true;
      if (!any) break;
      std::map<std::string, Relation> next;
      for (const CompiledRule& c : rules) {
        for (std::size_t pos : c.delta_positions) {
          const std::string& pred = c.rule->body[c.order[pos]].atom.pred;
          auto dit = delta.find(pred);
          if (dit == delta.end() || dit->second.empty()) continue;
          std::vector<Tuple> out;
          eval_rule(c, &dit->second, pos, out);
          for (Tuple& t : out) absorb(c.rule->head.pred, std::move(t), next);
        }
      }
      delta = std::move(next);
    }
  }

  void absorb(const std::string& pred, Tuple&& t, std::map<std::string, Relation>& delta) {
    if (rels_[pred].insert(t).second) delta[pred].insert(std::move(t));
  }

  void eval_rule(const CompiledRule& c, const Relation* delta, std::size_t delta_pos,
                 std::vector<Tuple>& out) {
    Subst s;
    std::vector<std::string> trail;
    eval_from(c, 0, delta, delta_pos, s, trail, out);
  }

  void eval_from(const CompiledRule& c, std::size_t k, const Relation* delta,
                 std::size_t delta_pos, Subst& s, std::vector<std::string>& trail,
                 std::vector<Tuple>& out) {
    if (k == c.order.size()) {
      Tuple t;
      t.reserve(c.rule->head.args.size());
      for (const Term& term : c.rule->head.args) t.push_back(resolve(term, s));
      out.push_back(std::move(t));
      return;
    }
    const Literal& lit = c.rule->body[c.order[k]];
    switch (lit.kind) {
      case Literal::Kind::positive: {
        const Relation& source =
            (delta && k == delta_pos) ? *delta : rel(lit.atom.pred);
        for (const Tuple& tuple : source) {
          std::size_t mark = trail.size();
          if (match(lit.atom, tuple, s, trail))
            eval_from(c, k + 1, delta, delta_pos, s, trail, out);
          unwind(s, trail, mark);
        }
        return;
      }
      case Literal::Kind::aggregate: {
        const Aggregate& agg = lit.agg;
        std::set<Value> seen;
        for (const Tuple& tuple : rel(agg.goal.pred)) {
          std::size_t mark = trail.size();
          if (match(agg.goal, tuple, s, trail)) seen.insert(s.at(agg.counted_var));
          unwind(s, trail, mark);
        }
        std::size_t mark = trail.size();
        s.emplace(agg.result_var, Value{static_cast<std::int64_t>(seen.size())});
        trail.push_back(agg.result_var);
        eval_from(c, k + 1, delta, delta_pos, s, trail, out);
        unwind(s, trail, mark);
        return;
      }
      case Literal::Kind::negative: {
        for (const Tuple& tuple : rel(lit.atom.pred)) {
          std::size_t mark = trail.size();
          bool hit = match(lit.atom, tuple, s, trail);
          unwind(s, trail, mark);
          if (hit) return;
        }
        eval_from(c, k + 1, delta, delta_pos, s, trail, out);
        return;
      }
      case Literal::Kind::comparison: {
        if (eval_cmp(lit.cmp.op, resolve(lit.cmp.lhs, s), resolve(lit.cmp.rhs, s)))
          eval_from(c, k + 1, delta, delta_pos, s, trail, out);
        return;
      }
    }
  }

  const Program& prog_;
  std::map<std::string, Relation> rels_;
};

} // namespace

Model evaluate(const Program& program, const FactSet& facts) {
  return Engine(program, facts).run();
}

std::vector<std::vector<Value>> query(const Model& m, const std::string& pred,
                                      const std::vector<std::optional<Value>>& pattern) {
  auto it = m.relations.find(pred);
  if (it == m.relations.end()) throw SchemaError("unknown predicate '" + pred + "'");
  std::vector<std::vector<Value>> out;
  for (const auto& tuple : it->second) {
    if (tuple.size() != pattern.size()) continue;
    bool ok = true;
    for (std::size_t i = 0; i < tuple.size() && ok; ++i)
      if (pattern[i] && !(*pattern[i] == tuple[i])) ok = false;
    if (ok) out.push_back(tuple);
  }
  return out;
}

} // namespace crosscheck::logic
