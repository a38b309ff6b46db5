#include "crosscheck/logic/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <utility>

#include "crosscheck/errors.hpp"

namespace crosscheck::logic {

bool Program::is_intensional(const std::string& pred) const {
  for (const Rule& r : rules)
    if (r.head.pred == pred) return true;
  return false;
}

namespace {

enum class Tok {
  ident,
  var,
  anon,
  int_lit,
  float_lit,
  lparen,
  rparen,
  comma,
  dot,
  colon_dash,
  colon,
  not_sign,
  lt,
  le,
  gt,
  ge,
  eq_eq,
  ne,
  eq,
  end,
};

struct Token {
  Tok kind = Tok::end;
  std::string text;
  std::int64_t int_val = 0;
  double float_val = 0.0;
  int line = 1;
  int col = 1;
};

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::ident: return "identifier";
    case Tok::var: return "variable";
    case Tok::anon: return "'_'";
    case Tok::int_lit: return "integer";
    case Tok::float_lit: return "float";
    case Tok::lparen: return "'('";
    case Tok::rparen: return "')'";
    case Tok::comma: return "','";
    case Tok::dot: return "'.'";
    case Tok::colon_dash: return "':-'";
    case Tok::colon: return "':'";
    case Tok::not_sign: return "'\\+'";
    case Tok::lt: return "'<'";
    case Tok::le: return "'<='";
    case Tok::gt: return "'>'";
    case Tok::ge: return "'>='";
    case Tok::eq_eq: return "'=='";
    case Tok::ne: return "'!='";
    case Tok::eq: return "'='";
    case Tok::end: return "end of input";
  }
  return "?";
}

class Lexer {
public:
  explicit Lexer(const std::string& text) : s_(text) {}

  Token next() {
    skip_space();
    Token t;
    t.line = line_;
    t.col = col_;
    if (pos_ >= s_.size()) {
      t.kind = Tok::end;
      return t;
    }
    char c = s_[pos_];
    if (std::islower(static_cast<unsigned char>(c))) {
      t.kind = Tok::ident;
      t.text = take_word();
      return t;
    }
    if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
      t.text = take_word();
      t.kind = t.text == "_" ? Tok::anon : Tok::var;
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && pos_ + 1 < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])))) {
      return lex_number(t);
    }
    advance();
    switch (c) {
      case '(': t.kind = Tok::lparen; return t;
      case ')': t.kind = Tok::rparen; return t;
      case ',': t.kind = Tok::comma; return t;
      case '.': t.kind = Tok::dot; return t;
      case ':':
        if (peek() == '-') {
          advance();
          t.kind = Tok::colon_dash;
        } else {
          t.kind = Tok::colon;
        }
        return t;
      case '\\':
        if (peek() == '+') {
          advance();
          t.kind = Tok::not_sign;
          return t;
        }
        throw ParseError("unexpected '\\'; negation is written '\\+'", t.line, t.col);
      case '<':
        t.kind = Tok::lt;
        if (peek() == '=') {
          advance();
          t.kind = Tok::le;
        }
        return t;
      case '>':
        t.kind = Tok::gt;
        if (peek() == '=') {
          advance();
          t.kind = Tok::ge;
        }
        return t;
      case '=':
        t.kind = Tok::eq;
        if (peek() == '=') {
          advance();
          t.kind = Tok::eq_eq;
        }
        return t;
      case '!':
        if (peek() == '=') {
          advance();
          t.kind = Tok::ne;
          return t;
        }
        throw ParseError("unexpected '!'; did you mean '!='", t.line, t.col);
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", t.line, t.col);
    }
  }

private:
  void skip_space() {
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (c == '%') {
        while (pos_ < s_.size() && s_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  void advance() {
    if (pos_ < s_.size()) {
      if (s_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  std::string take_word() {
    std::size_t start = pos_;
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_')
        advance();
      else
        break;
    }
    return s_.substr(start, pos_ - start);
  }

  Token lex_number(Token t) {
    std::size_t start = pos_;
    if (peek() == '-') advance();
    while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
    bool is_float = false;
    if (peek() == '.' && pos_ + 1 < s_.size() &&
        std::isdigit(static_cast<unsigned char>(s_[pos_ + 1]))) {
      is_float = true;
      advance();
      while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
    }
    if (peek() == 'e' || peek() == 'E') {
      std::size_t mark = pos_;
      advance();
      if (peek() == '+' || peek() == '-') advance();
      if (std::isdigit(static_cast<unsigned char>(peek()))) {
        is_float = true;
        while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
      } else {
        // not an exponent after all; rewind is impossible with col tracking,
        // so reject outright
        (void)mark;
        throw ParseError("malformed exponent in number literal", t.line, t.col);
      }
    }
    std::string text = s_.substr(start, pos_ - start);
    if (is_float) {
      t.kind = Tok::float_lit;
      t.float_val = std::strtod(text.c_str(), nullptr);
    } else {
      t.kind = Tok::int_lit;
      auto res = std::from_chars(text.data(), text.data() + text.size(), t.int_val);
      if (res.ec != std::errc())
        throw ParseError("integer literal out of range: " + text, t.line, t.col);
    }
    return t;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
public:
  explicit Parser(const std::string& text) : lexer_(text) { shift(); }

  Program parse() {
    Program p;
    while (cur_.kind != Tok::end) p.rules.push_back(parse_clause());
    check_arities(p);
    check_range_restriction(p);
    stratify(p);
    return p;
  }

private:
  void shift() { cur_ = lexer_.next(); }

  [[noreturn]] void fail(const std::string& expected) {
    throw ParseError("expected " + expected + ", found " + tok_name(cur_.kind), cur_.line, cur_.col);
  }

  void expect(Tok kind, const char* what) {
    if (cur_.kind != kind) fail(what);
    shift();
  }

  Rule parse_clause() {
    Rule r;
    r.line = static_cast<std::size_t>(cur_.line);
    r.head = parse_atom();
    if (cur_.kind == Tok::colon_dash) {
      shift();
      r.body.push_back(parse_literal());
      while (cur_.kind == Tok::comma) {
        shift();
        r.body.push_back(parse_literal());
      }
    }
    expect(Tok::dot, "'.' at end of clause");
    return r;
  }

  RuleAtom parse_atom() {
    if (cur_.kind != Tok::ident) fail("predicate name");
    RuleAtom a;
    a.pred = cur_.text;
    shift();
    if (cur_.kind == Tok::lparen) {
      shift();
      a.args.push_back(parse_term());
      while (cur_.kind == Tok::comma) {
        shift();
        a.args.push_back(parse_term());
      }
      expect(Tok::rparen, "')'");
    }
    return a;
  }

  Term parse_term() {
    switch (cur_.kind) {
      case Tok::ident: {
        Term t = Term::constant(Value{cur_.text});
        shift();
        return t;
      }
      case Tok::var: {
        Term t = Term::variable(cur_.text);
        shift();
        return t;
      }
      case Tok::anon:
        shift();
        return Term::anonymous();
      case Tok::int_lit: {
        Term t = Term::constant(Value{cur_.int_val});
        shift();
        return t;
      }
      case Tok::float_lit: {
        Term t = Term::constant(Value{cur_.float_val});
        shift();
        return t;
      }
      default:
        fail("term (constant or variable)");
    }
  }

  Literal parse_literal() {
    Literal lit;
    if (cur_.kind == Tok::not_sign) {
      shift();
      lit.kind = Literal::Kind::negative;
      lit.atom = parse_atom();
      return lit;
    }
    if (cur_.kind == Tok::ident) {
      // Could be an atom or a comparison with a symbol on the left; decide
      // by what follows the identifier.
      Token ident = cur_;
      shift();
      if (cur_.kind == Tok::lparen) {
        RuleAtom a;
        a.pred = ident.text;
        shift();
        a.args.push_back(parse_term());
        while (cur_.kind == Tok::comma) {
          shift();
          a.args.push_back(parse_term());
        }
        expect(Tok::rparen, "')'");
        lit.kind = Literal::Kind::positive;
        lit.atom = std::move(a);
        return lit;
      }
      if (auto op = cmp_op(cur_.kind)) {
        shift();
        lit.kind = Literal::Kind::comparison;
        lit.cmp = {*op, Term::constant(Value{ident.text}), parse_term()};
        return lit;
      }
      lit.kind = Literal::Kind::positive;
      lit.atom = {ident.text, {}};
      return lit;
    }

    Term lhs = parse_term();
    if (cur_.kind == Tok::eq) {
      Token eq_tok = cur_;
      shift();
      if (lhs.kind != Term::Kind::variable)
        throw ParseError("aggregate result must be a variable", eq_tok.line, eq_tok.col);
      if (cur_.kind != Tok::ident || cur_.text != "count") fail("'count' after '='");
      shift();
      expect(Tok::lparen, "'('");
      if (cur_.kind != Tok::var) fail("counted variable");
      std::string counted = cur_.text;
      shift();
      expect(Tok::colon, "':'");
      RuleAtom goal = parse_atom();
      expect(Tok::rparen, "')'");
      lit.kind = Literal::Kind::aggregate;
      lit.agg = {lhs.var, counted, std::move(goal)};
      return lit;
    }
    if (auto op = cmp_op(cur_.kind)) {
      shift();
      lit.kind = Literal::Kind::comparison;
      lit.cmp = {*op, lhs, parse_term()};
      return lit;
    }
    fail("comparison operator or '=' after term");
  }

  static std::optional<CmpOp> cmp_op(Tok t) {
    switch (t) {
      case Tok::lt: return CmpOp::lt;
      case Tok::le: return CmpOp::le;
      case Tok::gt: return CmpOp::gt;
      case Tok::ge: return CmpOp::ge;
      case Tok::eq_eq: return CmpOp::eq;
      case Tok::ne: return CmpOp::ne;
      default: return std::nullopt;
    }
  }

  static void note_arity(Program& p, const RuleAtom& a, std::size_t line) {
    auto [it, inserted] = p.arities.insert({a.pred, a.args.size()});
    if (!inserted && it->second != a.args.size())
      throw ParseError("predicate '" + a.pred + "' used with arity " + std::to_string(a.args.size()) +
                       " at line " + std::to_string(line) + " but previously with arity " +
                       std::to_string(it->second));
  }

  static void check_arities(Program& p) {
    for (const Rule& r : p.rules) {
      note_arity(p, r.head, r.line);
      for (const Literal& lit : r.body) {
        if (lit.kind == Literal::Kind::positive || lit.kind == Literal::Kind::negative)
          note_arity(p, lit.atom, r.line);
        else if (lit.kind == Literal::Kind::aggregate)
          note_arity(p, lit.agg.goal, r.line);
      }
    }
  }

  static void collect_vars(const RuleAtom& a, std::set<std::string>& out) {
    for (const Term& t : a.args)
      if (t.kind == Term::Kind::variable) out.insert(t.var);
  }

  static void check_range_restriction(const Program& p) {
    for (const Rule& r : p.rules) {
      std::string where = "rule for '" + r.head.pred + "' at line " + std::to_string(r.line);
      std::set<std::string> positive;
      std::set<std::string> agg_results;
      for (const Literal& lit : r.body) {
        if (lit.kind == Literal::Kind::positive) collect_vars(lit.atom, positive);
      }
      for (const Literal& lit : r.body) {
        if (lit.kind != Literal::Kind::aggregate) continue;
        const Aggregate& agg = lit.agg;
        if (positive.count(agg.result_var) || !agg_results.insert(agg.result_var).second)
          throw ParseError(where + ": aggregate result " + agg.result_var +
                           " must be a fresh variable");
        std::set<std::string> goal_vars;
        collect_vars(agg.goal, goal_vars);
        if (!goal_vars.count(agg.counted_var))
          throw ParseError(where + ": counted variable " + agg.counted_var +
                           " does not appear in the aggregate goal");
        goal_vars.erase(agg.counted_var);
        for (const std::string& v : goal_vars)
          if (!positive.count(v))
            throw ParseError(where + ": variable " + v +
                             " in an aggregate goal is not bound by a positive body literal");
      }
      for (const Literal& lit : r.body) {
        if (lit.kind == Literal::Kind::aggregate &&
            (positive.count(lit.agg.counted_var) || agg_results.count(lit.agg.counted_var)))
          throw ParseError(where + ": counted variable " + lit.agg.counted_var +
                           " must be local to its aggregate");
      }
      auto bound = [&](const std::string& v) { return positive.count(v) || agg_results.count(v); };
      for (const Term& t : r.head.args) {
        if (t.kind == Term::Kind::anonymous)
          throw ParseError(where + ": '_' cannot appear in the head");
        if (t.kind == Term::Kind::variable && !bound(t.var))
          throw ParseError(where + ": head variable " + t.var +
                           " is not bound by a positive body literal");
      }
      for (const Literal& lit : r.body) {
        if (lit.kind == Literal::Kind::negative) {
          std::set<std::string> vars;
          collect_vars(lit.atom, vars);
          for (const std::string& v : vars)
            if (!bound(v))
              throw ParseError(where + ": variable " + v +
                               " in a negated literal is not bound by a positive body literal");
        } else if (lit.kind == Literal::Kind::comparison) {
          for (const Term* t : {&lit.cmp.lhs, &lit.cmp.rhs}) {
            if (t->kind == Term::Kind::anonymous)
              throw ParseError(where + ": '_' cannot appear in a comparison");
            if (t->kind == Term::Kind::variable && !bound(t->var))
              throw ParseError(where + ": variable " + t->var +
                               " in a comparison is not bound by a positive body literal");
          }
        }
      }
    }
  }

  // Dependency edges head -> body predicate; negation and aggregation edges
  // must not sit inside a cycle.
  struct Edge {
    std::string from, to;
    bool strict = false;
  };

  static void stratify(Program& p) {
    std::set<std::string> preds;
    std::vector<Edge> edges;
    for (const auto& [pred, arity] : p.arities) preds.insert(pred);
    for (const Rule& r : p.rules) {
      for (const Literal& lit : r.body) {
        if (lit.kind == Literal::Kind::positive)
          edges.push_back({r.head.pred, lit.atom.pred, false});
        else if (lit.kind == Literal::Kind::negative)
          edges.push_back({r.head.pred, lit.atom.pred, true});
        else if (lit.kind == Literal::Kind::aggregate)
          edges.push_back({r.head.pred, lit.agg.goal.pred, true});
      }
    }

    // Tarjan SCC over the dependency graph.
    std::map<std::string, std::vector<std::pair<std::string, bool>>> adj;
    for (const std::string& pred : preds) adj[pred];
    for (const Edge& e : edges) adj[e.from].push_back({e.to, e.strict});

    std::map<std::string, int> index, low, comp;
    std::vector<std::string> stack;
    std::set<std::string> on_stack;
    int next_index = 0, next_comp = 0;

    std::function<void(const std::string&)> strongconnect = [&](const std::string& v) {
      index[v] = low[v] = next_index++;
      stack.push_back(v);
      on_stack.insert(v);
      for (const auto& [w, strict] : adj[v]) {
        if (!index.count(w)) {
          strongconnect(w);
          low[v] = std::min(low[v], low[w]);
        } else if (on_stack.count(w)) {
          low[v] = std::min(low[v], index[w]);
        }
      }
      if (low[v] == index[v]) {
        while (true) {
          std::string w = stack.back();
          stack.pop_back();
          on_stack.erase(w);
          comp[w] = next_comp;
          if (w == v) break;
        }
        ++next_comp;
      }
    };
    for (const std::string& pred : preds)
      if (!index.count(pred)) strongconnect(pred);

    for (const Edge& e : edges) {
      if (e.strict && comp[e.from] == comp[e.to])
        throw StratificationError("cycle through negation or aggregation: " + cycle_text(adj, e));
    }

    // Stratum = max over dependencies, +1 across strict edges. The SCC
    // condensation is acyclic, so memoized recursion terminates.
    std::map<std::string, int> stratum;
    std::function<int(const std::string&)> level = [&](const std::string& v) -> int {
      auto it = stratum.find(v);
      if (it != stratum.end()) return it->second;
      stratum[v] = 0; // same-SCC members resolve to the same level via edges
      int best = 0;
      for (const auto& [w, strict] : adj[v]) {
        if (comp[w] == comp[v]) continue;
        best = std::max(best, level(w) + (strict ? 1 : 0));
      }
      // propagate strict edges to same-component members' dependencies
      for (const std::string& u : preds) {
        if (comp[u] != comp[v] || u == v) continue;
        for (const auto& [w, strict] : adj[u]) {
          if (comp[w] == comp[v]) continue;
          best = std::max(best, level(w) + (strict ? 1 : 0));
        }
      }
      stratum[v] = best;
      return best;
    };
    p.max_stratum = 0;
    for (const std::string& pred : preds) {
      p.strata[pred] = level(pred);
      p.max_stratum = std::max(p.max_stratum, p.strata[pred]);
    }
  }

  static std::string cycle_text(
      const std::map<std::string, std::vector<std::pair<std::string, bool>>>& adj, const Edge& e) {
    // BFS from e.to back to e.from; both sit in one SCC, so a path exists.
    std::map<std::string, std::string> parent;
    std::vector<std::string> queue{e.to};
    parent[e.to] = e.to;
    for (std::size_t i = 0; i < queue.size() && !parent.count(e.from); ++i) {
      auto it = adj.find(queue[i]);
      if (it == adj.end()) continue;
      for (const auto& [w, strict] : it->second) {
        if (!parent.count(w)) {
          parent[w] = queue[i];
          queue.push_back(w);
        }
      }
    }
    std::vector<std::string> back_path; // e.from, ..., e.to
    for (std::string v = e.from; ; v = parent[v]) {
      back_path.push_back(v);
      if (v == e.to) break;
      if (!parent.count(v)) break;
    }
    std::string out = e.from + " -> " + e.to;
    for (auto it = back_path.rbegin() + 1; it < back_path.rend(); ++it) out += " -> " + *it;
    return out;
  }

  Lexer lexer_;
  Token cur_;
};

} // namespace

Program parse_program(const std::string& text) { return Parser(text).parse(); }

Program parse_program_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("cannot open rules file '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_program(ss.str());
}

namespace {

std::string term_to_string(const Term& t) {
  switch (t.kind) {
    case Term::Kind::constant: return value_to_string(t.value);
    case Term::Kind::variable: return t.var;
    case Term::Kind::anonymous: return "_";
  }
  return "_";
}

std::string rule_atom_to_string(const RuleAtom& a) {
  std::string s = a.pred;
  if (!a.args.empty()) {
    s += '(';
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      if (i) s += ", ";
      s += term_to_string(a.args[i]);
    }
    s += ')';
  }
  return s;
}

const char* op_text(CmpOp op) {
  switch (op) {
    case CmpOp::lt: return "<";
    case CmpOp::le: return "<=";
    case CmpOp::gt: return ">";
    case CmpOp::ge: return ">=";
    case CmpOp::eq: return "==";
    case CmpOp::ne: return "!=";
  }
  return "?";
}

std::string literal_to_string(const Literal& lit) {
  switch (lit.kind) {
    case Literal::Kind::positive: return rule_atom_to_string(lit.atom);
    case Literal::Kind::negative: return "\\+ " + rule_atom_to_string(lit.atom);
    case Literal::Kind::comparison:
      return term_to_string(lit.cmp.lhs) + " " + op_text(lit.cmp.op) + " " +
             term_to_string(lit.cmp.rhs);
    case Literal::Kind::aggregate:
      return lit.agg.result_var + " = count(" + lit.agg.counted_var + " : " +
             rule_atom_to_string(lit.agg.goal) + ")";
  }
  return "";
}

} // namespace

std::string pretty_print(const Program& p) {
  std::string out;
  for (const Rule& r : p.rules) {
    out += rule_atom_to_string(r.head);
    if (!r.body.empty()) {
      out += " :- ";
      for (std::size_t i = 0; i < r.body.size(); ++i) {
        if (i) out += ", ";
        out += literal_to_string(r.body[i]);
      }
    }
    out += ".\n";
  }
  return out;
}

} // namespace crosscheck::logic
