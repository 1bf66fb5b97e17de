#include "episcope/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <variant>
#include <vector>

namespace episcope {

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { Ident, Int, Sym, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t col;
};

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::vector<Token> lex(std::string_view src) {
  static constexpr std::string_view kSymbols[] = {
      "<=>", "=>", "<=", ">=", "!=", ":=", "..", "[]", "(", ")", "[", "]",
      "{",   "}",  ",",  ":",  ".",  ";",  "?",  "=",  "<", ">", "+", "-",
      "*",   "&",  "|",  "!"};
  std::vector<Token> out;
  std::size_t line = 1;
  std::size_t col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && is_ident_char(src[j])) ++j;
      out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), line, col});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && is_ident_start(src[j])) {
        throw ParseError(line, col, "malformed number");
      }
      out.push_back({Tok::Int, std::string(src.substr(i, j - i)), line, col});
      advance(j - i);
      continue;
    }
    bool matched = false;
    for (std::string_view sym : kSymbols) {
      if (src.substr(i, sym.size()) == sym) {
        out.push_back({Tok::Sym, std::string(sym), line, col});
        advance(sym.size());
        matched = true;
        break;
      }
    }
    if (!matched) {
      std::string shown;
      if (std::isprint(static_cast<unsigned char>(c))) {
        shown = std::string("'") + c + "'";
      } else {
        shown = "byte " + std::to_string(static_cast<unsigned char>(c));
      }
      throw ParseError(line, col, "unexpected character " + shown);
    }
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

bool is_keyword(std::string_view s) {
  static constexpr std::string_view kKeywords[] = {
      "agents", "var",  "bound", "program", "assume", "check", "valid",
      "sat",    "obs",  "range", "forall",  "exists", "K",     "Kv",
      "ann",    "prog", "new",   "true",    "false",  "not",   "and",
      "or",     "xor",  "mod",   "Bool",    "Int"};
  return std::find(std::begin(kKeywords), std::end(kKeywords), s) !=
         std::end(kKeywords);
}

// ---------------------------------------------------------------------------
// Parser

using Expr = std::variant<Term, Formula>;

constexpr std::size_t kMaxDepth = 256;

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  VerificationTask task() {
    bool seen_assume = false;
    while (!at_end()) {
      const Token& t = peek();
      if (is_kw("agents")) {
        agents_decl();
      } else if (is_kw("var")) {
        var_decl();
      } else if (is_kw("bound")) {
        next();
        IntRange r = range();
        if (task_.bound.int_range) fail(t, "duplicate bound declaration");
        task_.bound.int_range = r;
      } else if (is_kw("program")) {
        program_decl();
      } else if (is_kw("assume")) {
        next();
        if (seen_assume) fail(t, "duplicate assume declaration");
        seen_assume = true;
        task_.phi = formula_top();
        if (!is_first_order(task_.phi)) {
          fail(t, "the initial condition must be first-order");
        }
      } else if (is_kw("check")) {
        query_decl();
      } else {
        fail(t, "expected a declaration (agents, var, bound, program, "
                "assume or check)");
      }
    }
    return std::move(task_);
  }

  void use_context(const VerificationTask& ctx) {
    task_.agents = ctx.agents;
    task_.vars = ctx.vars;
    task_.bound = ctx.bound;
  }

  Formula standalone_formula() {
    Formula f = formula_top();
    expect_end();
    return f;
  }

  Program standalone_program() {
    Program p = program();
    expect_end();
    return p;
  }

 private:
  // -- token helpers -------------------------------------------------------

  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool at_end() const { return peek().kind == Tok::End; }
  bool is_sym(std::string_view s, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == Tok::Sym && t.text == s;
  }
  bool is_kw(std::string_view s, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == Tok::Ident && t.text == s;
  }
  bool accept_sym(std::string_view s) {
    if (!is_sym(s)) return false;
    next();
    return true;
  }
  void expect_sym(std::string_view s) {
    if (!accept_sym(s)) fail(peek(), "expected '" + std::string(s) + "'");
  }
  void expect_kw(std::string_view s) {
    if (!is_kw(s)) fail(peek(), "expected '" + std::string(s) + "'");
    next();
  }
  void expect_end() {
    if (!at_end()) fail(peek(), "unexpected trailing input");
  }

  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    std::string where;
    if (t.kind == Tok::End) {
      where = " at end of input";
    } else {
      where = " near '" + t.text + "'";
    }
    throw ParseError(t.line, t.col, msg + where);
  }

  std::string identifier(const char* what) {
    const Token& t = peek();
    if (t.kind != Tok::Ident) fail(t, std::string("expected ") + what);
    if (is_keyword(t.text)) {
      fail(t, "'" + t.text + "' is a reserved word and cannot be used as " +
                  what);
    }
    if (t.text.find(kFreshSeparator) != std::string::npos) {
      fail(t, "identifier '" + t.text + "' contains the reserved separator '" +
                  std::string(kFreshSeparator) + "'");
    }
    next();
    return t.text;
  }

  std::int64_t integer() {
    bool negative = accept_sym("-");
    const Token& t = peek();
    if (t.kind != Tok::Int) fail(t, "expected an integer");
    next();
    return int_value(t, negative);
  }

  std::int64_t int_value(const Token& t, bool negative) const {
    std::uint64_t magnitude = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(),
                                     magnitude);
    const std::uint64_t limit =
        static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()) +
        (negative ? 1 : 0);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size() ||
        magnitude > limit) {
      fail(t, "integer literal out of range");
    }
    if (negative) {
      return magnitude == limit ? std::numeric_limits<std::int64_t>::min()
                                : -static_cast<std::int64_t>(magnitude);
    }
    return static_cast<std::int64_t>(magnitude);
  }

  IntRange range() {
    const Token& start = peek();
    std::int64_t lo = integer();
    expect_sym("..");
    std::int64_t hi = integer();
    if (hi < lo) fail(start, "empty range");
    if (static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) >=
        (std::uint64_t{1} << 32)) {
      fail(start, "range too large");
    }
    return {lo, hi};
  }

  struct DepthGuard {
    Parser& p;
    explicit DepthGuard(Parser& parser) : p(parser) {
      if (++p.depth_ > kMaxDepth) p.fail(p.peek(), "nesting too deep");
    }
    ~DepthGuard() { --p.depth_; }
  };

  // -- declarations ----------------------------------------------------------

  const Agent& agent_ref() {
    const Token& t = peek();
    std::string name = identifier("an agent name");
    for (const Agent& a : task_.agents) {
      if (a == name) return a;
    }
    fail(t, "undeclared agent " + name);
  }

  void agents_decl() {
    next();
    do {
      const Token& t = peek();
      std::string name = identifier("an agent name");
      if (std::find(task_.agents.begin(), task_.agents.end(), name) !=
          task_.agents.end()) {
        fail(t, "duplicate agent " + name);
      }
      task_.agents.push_back(std::move(name));
    } while (accept_sym(","));
  }

  Sort sort() {
    if (is_kw("Bool")) {
      next();
      return Sort::Bool;
    }
    if (is_kw("Int")) {
      next();
      return Sort::Int;
    }
    fail(peek(), "expected a sort (Bool or Int)");
  }

  AgentSet observer_set() {
    AgentSet obs;
    expect_sym("{");
    if (!is_sym("}")) {
      do {
        obs.insert(agent_ref());
      } while (accept_sym(","));
    }
    expect_sym("}");
    return obs;
  }

  bool name_taken(const std::string& name) const {
    if (std::any_of(task_.vars.begin(), task_.vars.end(),
                    [&](const Var& v) { return v.name == name; })) {
      return true;
    }
    return programs_.contains(name);
  }

  void var_decl() {
    next();
    std::vector<std::pair<Token, std::string>> names;
    do {
      const Token& t = peek();
      std::string name = identifier("a variable name");
      if (name_taken(name) ||
          std::any_of(names.begin(), names.end(),
                      [&](const auto& n) { return n.second == name; })) {
        fail(t, "duplicate variable " + name);
      }
      names.emplace_back(t, std::move(name));
    } while (accept_sym(","));
    expect_sym(":");
    Sort s = sort();
    AgentSet obs;
    if (is_kw("obs")) {
      next();
      obs = observer_set();
    }
    std::optional<IntRange> r;
    if (is_kw("range")) {
      const Token& t = peek();
      next();
      if (s != Sort::Int) fail(t, "only Int variables take a range");
      r = range();
    }
    for (auto& [tok, name] : names) {
      if (r) task_.bound.per_var[name] = *r;
      task_.vars.push_back(Var{name, obs, s});
    }
  }

  void program_decl() {
    next();
    const Token& t = peek();
    std::string name = identifier("a program name");
    if (name_taken(name)) fail(t, "duplicate name " + name);
    expect_sym("=");
    Program p = program();
    programs_.emplace(name, p);
  }

  void query_decl() {
    next();
    QueryMode mode;
    if (is_kw("valid")) {
      mode = QueryMode::Valid;
    } else if (is_kw("sat")) {
      mode = QueryMode::Sat;
    } else {
      fail(peek(), "expected 'valid' or 'sat'");
    }
    next();
    std::string name;
    const Token& name_tok = peek();
    if (peek().kind == Tok::Ident && !is_keyword(peek().text) && is_sym(":", 1)) {
      name = identifier("a query name");
      next();
    } else {
      name = task_.queries.empty()
                 ? "query"
                 : "query" + std::to_string(task_.queries.size() + 1);
    }
    for (const Query& q : task_.queries) {
      if (q.name == name) fail(name_tok, "duplicate query name " + name);
    }
    Formula alpha = formula_top();
    task_.queries.push_back(Query{std::move(name), mode, alpha});
  }

  // -- variables in scope ----------------------------------------------------

  std::optional<Var> lookup(const std::string& name) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it) {
      if (it->name == name) return *it;
    }
    for (const Var& v : task_.vars) {
      if (v.name == name) return v;
    }
    return std::nullopt;
  }

  Var binder(const Token& at) {
    const Token& t = peek();
    std::string name = identifier("a variable name");
    if (lookup(name) || programs_.contains(name)) {
      fail(t, "bound variable " + name + " shadows a variable in scope");
    }
    Sort s = Sort::Int;
    if (accept_sym(":")) s = sort();
    AgentSet obs;
    if (is_kw("obs")) {
      next();
      obs = observer_set();
    }
    (void)at;
    return Var{std::move(name), std::move(obs), s};
  }

  template <typename F>
  auto guarded(const Token& at, F&& build) -> decltype(build()) {
    try {
      return build();
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      fail(at, e.what());
    }
  }

  // -- formulas --------------------------------------------------------------

  Formula to_formula(Expr e, const Token& at) {
    if (auto* f = std::get_if<Formula>(&e)) return *f;
    const Term& t = std::get<Term>(e);
    if (t.sort() != Sort::Bool) {
      fail(at, "expected a formula but found a " +
                   std::string(sort_name(t.sort())) + " term");
    }
    return Formula::holds(t);
  }

  Term to_term(Expr e, const Token& at) {
    if (auto* t = std::get_if<Term>(&e)) return *t;
    fail(at, "expected a term but found a formula");
  }

  Formula formula_top() {
    const Token& at = peek();
    return to_formula(level_iff(), at);
  }

  Expr level_iff() {
    DepthGuard guard(*this);
    const Token& at = peek();
    Expr lhs = level_implies();
    if (!is_sym("<=>")) return lhs;
    Formula a = to_formula(std::move(lhs), at);
    next();
    const Token& rat = peek();
    Formula b = to_formula(level_iff(), rat);
    return Formula::iff(a, b);
  }

  Expr level_implies() {
    const Token& at = peek();
    Expr lhs = level_or();
    if (!is_sym("=>")) return lhs;
    Formula a = to_formula(std::move(lhs), at);
    next();
    DepthGuard guard(*this);
    const Token& rat = peek();
    Formula b = to_formula(level_implies(), rat);
    return Formula::implies(a, b);
  }

  Expr level_or() {
    const Token& at = peek();
    Expr first = level_and();
    if (!is_sym("|")) return first;
    std::vector<Formula> ops{to_formula(std::move(first), at)};
    while (accept_sym("|")) {
      const Token& t = peek();
      ops.push_back(to_formula(level_and(), t));
    }
    return Formula::disj(std::move(ops));
  }

  Expr level_and() {
    const Token& at = peek();
    Expr first = level_prefix();
    if (!is_sym("&")) return first;
    std::vector<Formula> ops{to_formula(std::move(first), at)};
    while (accept_sym("&")) {
      const Token& t = peek();
      ops.push_back(to_formula(level_prefix(), t));
    }
    return Formula::conj(std::move(ops));
  }

  Expr level_prefix() {
    DepthGuard guard(*this);
    const Token& at = peek();
    if (is_sym("!")) {
      next();
      const Token& t = peek();
      return Formula::negate(to_formula(level_prefix(), t));
    }
    if (is_kw("K")) {
      next();
      expect_sym("[");
      Agent a = agent_ref();
      expect_sym("]");
      const Token& t = peek();
      Formula body = to_formula(level_prefix(), t);
      return Formula::knows(a, body);
    }
    if (is_kw("Kv")) {
      next();
      expect_sym("[");
      Agent a = agent_ref();
      expect_sym("]");
      const Token& t = peek();
      Term operand = to_term(term_prefix(), t);
      return Formula::knows_value(a, operand);
    }
    if (is_kw("forall") || is_kw("exists")) {
      const bool universal = is_kw("forall");
      next();
      Var v = binder(at);
      for (const Agent& a : v.observers) (void)a;
      expect_sym(".");
      scope_.push_back(v);
      Formula body = formula_top();
      scope_.pop_back();
      return universal ? Formula::forall(v, body) : Formula::exists(v, body);
    }
    if (is_sym("[") && is_kw("ann", 1)) {
      next();
      next();
      Formula beta = with_gt_allowed([&] { return formula_top(); });
      expect_sym("]");
      Formula body = formula_top();
      return Formula::announce(beta, body);
    }
    if (is_sym("<") && is_kw("ann", 1)) {
      next();
      next();
      const bool saved = stop_at_gt_;
      stop_at_gt_ = true;
      Formula beta = formula_top();
      stop_at_gt_ = saved;
      expect_sym(">");
      Formula body = formula_top();
      return Formula::diamond(beta, body);
    }
    if (is_sym("[") && is_kw("prog", 1)) {
      next();
      next();
      Program p = with_gt_allowed([&] { return program(); });
      expect_sym("]");
      Formula body = formula_top();
      return Formula::box(p, body);
    }
    return level_relation();
  }

  template <typename F>
  auto with_gt_allowed(F&& f) -> decltype(f()) {
    const bool saved = stop_at_gt_;
    stop_at_gt_ = false;
    auto result = f();
    stop_at_gt_ = saved;
    return result;
  }

  bool at_relation() const {
    if (is_sym("=") || is_sym("!=") || is_sym("<") || is_sym("<=")) return true;
    if (!stop_at_gt_ && (is_sym(">") || is_sym(">="))) return true;
    return false;
  }

  Expr level_relation() {
    const Token& at = peek();
    Expr lhs = term_or();
    if (!at_relation()) return lhs;
    const Token& op = next();
    Term a = to_term(std::move(lhs), at);
    const Token& rat = peek();
    Term b = to_term(term_or(), rat);
    Formula f = guarded(op, [&] {
      if (op.text == "=") return Formula::eq(a, b);
      if (op.text == "!=") return Formula::neq(a, b);
      if (op.text == "<") return Formula::lt(a, b);
      if (op.text == "<=") return Formula::le(a, b);
      if (op.text == ">") return Formula::gt(a, b);
      return Formula::ge(a, b);
    });
    if (at_relation()) fail(peek(), "relations do not chain");
    return f;
  }

  // -- terms -------------------------------------------------------------

  template <typename Next>
  Expr term_binary(std::initializer_list<std::pair<std::string_view, TermOp>> ops,
                   bool keyword, Next&& next_level) {
    const Token& at = peek();
    Expr lhs = next_level();
    for (;;) {
      std::optional<TermOp> op;
      for (const auto& [text, o] : ops) {
        if (keyword ? is_kw(text) : is_sym(text)) op = o;
      }
      if (!op) return lhs;
      const Token& op_tok = next();
      Term a = to_term(std::move(lhs), at);
      const Token& rat = peek();
      Term b = to_term(next_level(), rat);
      lhs = guarded(op_tok, [&] { return Term::binary(*op, a, b); });
    }
  }

  Expr term_or() {
    return term_binary({{"or", TermOp::Or}}, true, [&] { return term_xor(); });
  }
  Expr term_xor() {
    return term_binary({{"xor", TermOp::Xor}}, true, [&] { return term_and(); });
  }
  Expr term_and() {
    return term_binary({{"and", TermOp::And}}, true, [&] { return term_add(); });
  }
  Expr term_add() {
    return term_binary({{"+", TermOp::Add}, {"-", TermOp::Sub}}, false,
                       [&] { return term_mul(); });
  }
  Expr term_mul() {
    // 'mod' is a keyword, '*' a symbol.
    const Token& at = peek();
    Expr lhs = term_prefix();
    for (;;) {
      std::optional<TermOp> op;
      if (is_sym("*")) op = TermOp::Mul;
      if (is_kw("mod")) op = TermOp::Mod;
      if (!op) return lhs;
      const Token& op_tok = next();
      Term a = to_term(std::move(lhs), at);
      const Token& rat = peek();
      Term b = to_term(term_prefix(), rat);
      lhs = guarded(op_tok, [&] { return Term::binary(*op, a, b); });
    }
  }

  Expr term_prefix() {
    DepthGuard guard(*this);
    const Token& at = peek();
    if (is_kw("not")) {
      next();
      const Token& t = peek();
      Term operand = to_term(term_prefix(), t);
      return guarded(at, [&] { return Term::lnot(operand); });
    }
    if (is_sym("-")) {
      next();
      if (peek().kind == Tok::Int) {
        const Token& lit = next();
        return Term::integer(int_value(lit, true));
      }
      const Token& t = peek();
      Term operand = to_term(term_prefix(), t);
      return guarded(at, [&] { return Term::neg(operand); });
    }
    return primary();
  }

  Expr primary() {
    const Token& t = peek();
    if (t.kind == Tok::Int) {
      next();
      return Term::integer(int_value(t, false));
    }
    if (is_kw("true")) {
      next();
      return Term::boolean(true);
    }
    if (is_kw("false")) {
      next();
      return Term::boolean(false);
    }
    if (is_sym("(")) {
      next();
      const bool saved = stop_at_gt_;
      stop_at_gt_ = false;
      Expr inner = level_iff();
      stop_at_gt_ = saved;
      expect_sym(")");
      return inner;
    }
    if (t.kind == Tok::Ident && !is_keyword(t.text)) {
      std::string name = identifier("a variable");
      std::optional<Var> v = lookup(name);
      if (!v) fail(t, "undeclared variable " + name);
      return Term::var(*v);
    }
    fail(t, "expected a formula or term");
  }

  // -- programs ----------------------------------------------------------

  Program program() {
    DepthGuard guard(*this);
    Program lhs = program_seq();
    while (accept_sym("[]")) {
      Program rhs = program_seq();
      lhs = Program::choice(lhs, rhs);
    }
    return lhs;
  }

  Program program_seq() {
    Program lhs = program_step();
    while (accept_sym(";")) {
      Program rhs = program_step();
      lhs = Program::seq(lhs, rhs);
    }
    return lhs;
  }

  // Index of the token after the ')' matching the '(' at pos_, if any.
  std::optional<std::size_t> after_matching_paren() const {
    std::size_t depth = 0;
    for (std::size_t i = pos_; i < toks_.size(); ++i) {
      const Token& t = toks_[i];
      if (t.kind == Tok::Sym && t.text == "(") ++depth;
      if (t.kind == Tok::Sym && t.text == ")") {
        if (--depth == 0) return i + 1;
      }
      if (t.kind == Tok::End) return std::nullopt;
    }
    return std::nullopt;
  }

  bool group_is_formula() const {
    std::optional<std::size_t> after = after_matching_paren();
    if (!after) return false;
    const Token& t = toks_[std::min(*after, toks_.size() - 1)];
    if (t.kind == Tok::Sym) {
      static constexpr std::string_view kFormulaContinuation[] = {
          "?", "&", "|", "=>", "<=>", "=", "!=", "<", "<=", ">", ">=",
          "+", "-", "*"};
      return std::find(std::begin(kFormulaContinuation),
                       std::end(kFormulaContinuation),
                       t.text) != std::end(kFormulaContinuation);
    }
    if (t.kind == Tok::Ident) {
      return t.text == "and" || t.text == "or" || t.text == "xor" ||
             t.text == "mod";
    }
    return false;
  }

  Program program_step() {
    DepthGuard guard(*this);
    const Token& at = peek();
    if (is_kw("new")) {
      next();
      Var v = binder(at);
      expect_sym(".");
      scope_.push_back(v);
      Program body = program();
      scope_.pop_back();
      return Program::declare(v, body);
    }
    if (at.kind == Tok::Ident && !is_keyword(at.text) && is_sym(":=", 1)) {
      std::string name = identifier("a variable");
      std::optional<Var> v = lookup(name);
      if (!v) fail(at, "undeclared variable " + name);
      next();
      const Token& rat = peek();
      Term rhs = to_term(term_or(), rat);
      return guarded(at, [&] { return Program::assign(*v, rhs); });
    }
    if (at.kind == Tok::Ident) {
      if (auto it = programs_.find(at.text); it != programs_.end()) {
        next();
        return it->second;
      }
    }
    if (is_sym("(") && !group_is_formula()) {
      next();
      Program p = with_gt_allowed([&] { return program(); });
      expect_sym(")");
      return p;
    }
    Formula beta = formula_top();
    if (!is_sym("?")) fail(peek(), "expected '?' after a test formula");
    next();
    return guarded(at, [&] { return Program::test(beta); });
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t depth_ = 0;
  bool stop_at_gt_ = false;
  std::vector<Var> scope_;
  std::map<std::string, Program, std::less<>> programs_;
  VerificationTask task_;
};

// ---------------------------------------------------------------------------
// Printer

int term_prec(const Term& t) {
  switch (t.op()) {
    case TermOp::Or: return 7;
    case TermOp::Xor: return 8;
    case TermOp::And: return 9;
    case TermOp::Add:
    case TermOp::Sub: return 10;
    case TermOp::Mul:
    case TermOp::Mod: return 11;
    case TermOp::Neg:
    case TermOp::Not: return 12;
    case TermOp::IntConst: return t.value() < 0 ? 12 : 13;
    default: return 13;
  }
}

std::string_view binary_symbol(TermOp op) {
  switch (op) {
    case TermOp::Add: return " + ";
    case TermOp::Sub: return " - ";
    case TermOp::Mul: return " * ";
    case TermOp::Mod: return " mod ";
    case TermOp::And: return " and ";
    case TermOp::Or: return " or ";
    case TermOp::Xor: return " xor ";
    default: return " ? ";
  }
}

void print_term(const Term& t, int min_prec, std::string& out);

void print_term_wrapped(const Term& t, int min_prec, std::string& out) {
  if (term_prec(t) < min_prec) {
    out += '(';
    print_term(t, 0, out);
    out += ')';
  } else {
    print_term(t, min_prec, out);
  }
}

void print_term(const Term& t, int /*min_prec*/, std::string& out) {
  switch (t.op()) {
    case TermOp::IntConst:
      out += std::to_string(t.value());
      return;
    case TermOp::BoolConst:
      out += t.value() != 0 ? "true" : "false";
      return;
    case TermOp::TagConst:
      out += t.value() == 0 ? "#l" : "#r";
      return;
    case TermOp::Var:
      out += t.variable().name;
      return;
    case TermOp::Neg:
      out += '-';
      if (t.lhs().op() == TermOp::IntConst || t.lhs().op() == TermOp::Neg) {
        out += '(';
        print_term(t.lhs(), 0, out);
        out += ')';
      } else {
        print_term_wrapped(t.lhs(), 12, out);
      }
      return;
    case TermOp::Not:
      out += "not ";
      print_term_wrapped(t.lhs(), 12, out);
      return;
    default: {
      const int p = term_prec(t);
      print_term_wrapped(t.lhs(), p, out);
      out += binary_symbol(t.op());
      print_term_wrapped(t.rhs(), p + 1, out);
      return;
    }
  }
}

void print_agents(const AgentSet& agents, std::string& out) {
  out += '{';
  bool first = true;
  for (const Agent& a : agents) {
    if (!first) out += ", ";
    first = false;
    out += a;
  }
  out += '}';
}

void print_binder(const Var& v, std::string& out) {
  out += v.name;
  out += " : ";
  out += sort_name(v.sort);
  out += " obs ";
  print_agents(v.observers, out);
}

// Binders extend to the right; a formula ending in one must be parenthesised
// when something follows it.
bool open_right(const Formula& f) {
  switch (f.kind()) {
    case FormulaKind::Forall:
    case FormulaKind::Announce:
    case FormulaKind::Diamond:
    case FormulaKind::Box:
      return true;
    case FormulaKind::Not:
    case FormulaKind::Knows:
      return open_right(f.body());
    default:
      return false;
  }
}

void print_program(const Program& p, int min_prec, std::string& out);
void print_formula(const Formula& f, std::string& out);

void print_prefix_operand(const Formula& f, std::string& out) {
  if (f.kind() == FormulaKind::And) {
    out += '(';
    print_formula(f, out);
    out += ')';
  } else {
    print_formula(f, out);
  }
}

void print_formula(const Formula& f, std::string& out) {
  switch (f.kind()) {
    case FormulaKind::Eq:
      print_term(f.lhs_term(), 0, out);
      out += " = ";
      print_term(f.rhs_term(), 0, out);
      return;
    case FormulaKind::Lt:
      print_term(f.lhs_term(), 0, out);
      out += " < ";
      print_term(f.rhs_term(), 0, out);
      return;
    case FormulaKind::Holds:
      print_term(f.lhs_term(), 0, out);
      return;
    case FormulaKind::Not:
      out += '!';
      print_prefix_operand(f.body(), out);
      return;
    case FormulaKind::Knows:
      out += "K[" + f.agent() + "] ";
      print_prefix_operand(f.body(), out);
      return;
    case FormulaKind::KnowsValue:
      out += "Kv[" + f.agent() + "] ";
      print_term_wrapped(f.lhs_term(), 12, out);
      return;
    case FormulaKind::And: {
      bool first = true;
      for (const Formula& g : f.operands()) {
        if (!first) out += " & ";
        first = false;
        if (g.kind() == FormulaKind::And || open_right(g)) {
          out += '(';
          print_formula(g, out);
          out += ')';
        } else {
          print_formula(g, out);
        }
      }
      return;
    }
    case FormulaKind::Announce:
      out += "[ann ";
      print_formula(f.announced(), out);
      out += "] ";
      print_formula(f.body(), out);
      return;
    case FormulaKind::Diamond:
      out += "<ann ";
      print_formula(f.announced(), out);
      out += "> ";
      print_formula(f.body(), out);
      return;
    case FormulaKind::Box:
      out += "[prog ";
      print_program(f.program(), 0, out);
      out += "] ";
      print_formula(f.body(), out);
      return;
    case FormulaKind::Forall:
      out += "forall ";
      print_binder(f.bound_var(), out);
      out += " . ";
      print_formula(f.body(), out);
      return;
  }
}

int program_prec(const Program& p) {
  switch (p.kind()) {
    case ProgramKind::Choice: return 1;
    case ProgramKind::Seq: return 2;
    case ProgramKind::New: return 0;
    default: return 3;
  }
}

void print_program_wrapped(const Program& p, int min_prec, std::string& out) {
  if (program_prec(p) < min_prec) {
    out += '(';
    print_program(p, 0, out);
    out += ')';
  } else {
    print_program(p, min_prec, out);
  }
}

void print_program(const Program& p, int /*min_prec*/, std::string& out) {
  switch (p.kind()) {
    case ProgramKind::Test: {
      const Formula& beta = p.test_formula();
      print_formula(beta, out);
      out += " ?";
      return;
    }
    case ProgramKind::Assign:
      out += p.variable().name;
      out += " := ";
      print_term(p.rhs(), 0, out);
      return;
    case ProgramKind::New:
      out += "new ";
      print_binder(p.variable(), out);
      out += " . ";
      print_program(p.first(), 0, out);
      return;
    case ProgramKind::Seq:
      print_program_wrapped(p.first(), 2, out);
      out += " ; ";
      print_program_wrapped(p.second(), 3, out);
      return;
    case ProgramKind::Choice:
      print_program_wrapped(p.first(), 1, out);
      out += " [] ";
      print_program_wrapped(p.second(), 2, out);
      return;
  }
}

}  // namespace

VerificationTask parse_task(std::string_view text) {
  Parser parser(lex(text));
  VerificationTask task = parser.task();
  try {
    validate_task(task);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(1, 1, e.what());
  }
  return task;
}

Formula parse_formula(std::string_view text, const VerificationTask& context) {
  Parser parser(lex(text));
  parser.use_context(context);
  return parser.standalone_formula();
}

Program parse_program(std::string_view text, const VerificationTask& context) {
  Parser parser(lex(text));
  parser.use_context(context);
  return parser.standalone_program();
}

std::string render(const Term& t) {
  std::string out;
  print_term(t, 0, out);
  return out;
}

std::string render(const Formula& f) {
  std::string out;
  print_formula(f, out);
  return out;
}

std::string render(const Program& p) {
  std::string out;
  print_program(p, 0, out);
  return out;
}

std::string render_task(const VerificationTask& task) {
  std::string out;
  if (!task.agents.empty()) {
    out += "agents ";
    for (std::size_t i = 0; i < task.agents.size(); ++i) {
      if (i > 0) out += ", ";
      out += task.agents[i];
    }
    out += '\n';
  }
  for (const Var& v : task.vars) {
    out += "var ";
    print_binder(v, out);
    if (auto it = task.bound.per_var.find(v.name); it != task.bound.per_var.end()) {
      out += " range " + std::to_string(it->second.lo) + ".." +
             std::to_string(it->second.hi);
    }
    out += '\n';
  }
  if (task.bound.int_range) {
    out += "bound " + std::to_string(task.bound.int_range->lo) + ".." +
           std::to_string(task.bound.int_range->hi) + "\n";
  }
  out += "assume ";
  print_formula(task.phi, out);
  out += '\n';
  for (const Query& q : task.queries) {
    out += "check ";
    out += q.mode == QueryMode::Valid ? "valid " : "sat ";
    out += q.name;
    out += ": ";
    print_formula(q.alpha, out);
    out += '\n';
  }
  return out;
}

}  // namespace episcope
