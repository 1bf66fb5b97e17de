#include "episcope/ast.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <functional>
#include <limits>
#include <unordered_map>
#include <utility>

namespace episcope {

std::string_view sort_name(Sort sort) {
  switch (sort) {
    case Sort::Bool:
      return "Bool";
    case Sort::Int:
      return "Int";
    case Sort::ChoiceTag:
      return "ChoiceTag";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Term

Term TermNode::make(TermNode node) {
  return Term(std::make_shared<const TermNode>(std::move(node)));
}

Term Term::integer(std::int64_t value) {
  return TermNode::make({TermOp::IntConst, Sort::Int, value, {}, {}});
}

Term Term::boolean(bool value) {
  static const Term kTrue =
      TermNode::make({TermOp::BoolConst, Sort::Bool, 1, {}, {}});
  static const Term kFalse =
      TermNode::make({TermOp::BoolConst, Sort::Bool, 0, {}, {}});
  return value ? kTrue : kFalse;
}

Term Term::tag(ChoiceTag value) {
  return TermNode::make({TermOp::TagConst, Sort::ChoiceTag,
                         static_cast<std::int64_t>(value), {}, {}});
}

Term Term::var(const Var& v) {
  if (v.name.empty()) throw WellFormednessError("variable with empty name");
  return TermNode::make({TermOp::Var, v.sort, 0, v, {}});
}

Term Term::neg(const Term& t) {
  if (t.sort() != Sort::Int) throw SortError("unary minus expects an Int operand");
  return TermNode::make({TermOp::Neg, Sort::Int, 0, {}, {t}});
}

Term Term::lnot(const Term& t) {
  if (t.sort() != Sort::Bool) throw SortError("'not' expects a Bool operand");
  return TermNode::make({TermOp::Not, Sort::Bool, 0, {}, {t}});
}

namespace {

std::string_view op_symbol(TermOp op) {
  switch (op) {
    case TermOp::Add: return "+";
    case TermOp::Sub: return "-";
    case TermOp::Mul: return "*";
    case TermOp::Mod: return "mod";
    case TermOp::And: return "and";
    case TermOp::Or: return "or";
    case TermOp::Xor: return "xor";
    default: return "?";
  }
}

}  // namespace

Term Term::binary(TermOp op, const Term& lhs, const Term& rhs) {
  Sort operand_sort;
  switch (op) {
    case TermOp::Add:
    case TermOp::Sub:
    case TermOp::Mul:
    case TermOp::Mod:
      operand_sort = Sort::Int;
      break;
    case TermOp::And:
    case TermOp::Or:
    case TermOp::Xor:
      operand_sort = Sort::Bool;
      break;
    default:
      throw SortError("not a binary term operator");
  }
  if (lhs.sort() != operand_sort || rhs.sort() != operand_sort) {
    throw SortError("'" + std::string(op_symbol(op)) + "' expects " +
                    std::string(sort_name(operand_sort)) + " operands");
  }
  return TermNode::make({op, operand_sort, 0, {}, {lhs, rhs}});
}

TermOp Term::op() const { return node_->op; }
Sort Term::sort() const { return node_->sort; }
std::int64_t Term::value() const { return node_->value; }
const Var& Term::variable() const { return node_->var; }
const Term& Term::lhs() const { return node_->args.at(0); }
const Term& Term::rhs() const { return node_->args.at(1); }
std::size_t Term::arity() const { return node_->args.size(); }
bool Term::is_binary() const { return node_->args.size() == 2; }

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  const TermNode& x = *a.node_;
  const TermNode& y = *b.node_;
  return x.op == y.op && x.sort == y.sort && x.value == y.value &&
         x.var == y.var && x.args == y.args;
}

// ---------------------------------------------------------------------------
// Formula

Formula FormulaNode::make(FormulaNode node) {
  return Formula(std::make_shared<const FormulaNode>(std::move(node)));
}

Formula Formula::eq(const Term& a, const Term& b) {
  if (a.sort() != b.sort()) {
    throw SortError("'=' between " + std::string(sort_name(a.sort())) +
                    " and " + std::string(sort_name(b.sort())));
  }
  return FormulaNode::make({FormulaKind::Eq, {a, b}, {}, {}, {}, {}});
}

Formula Formula::lt(const Term& a, const Term& b) {
  if (a.sort() != Sort::Int || b.sort() != Sort::Int) {
    throw SortError("'<' expects Int operands");
  }
  return FormulaNode::make({FormulaKind::Lt, {a, b}, {}, {}, {}, {}});
}

Formula Formula::holds(const Term& t) {
  if (t.sort() != Sort::Bool) {
    throw SortError("a " + std::string(sort_name(t.sort())) +
                    " term cannot be used as a formula");
  }
  return FormulaNode::make({FormulaKind::Holds, {t}, {}, {}, {}, {}});
}

Formula Formula::top() {
  static const Formula kTop = holds(Term::boolean(true));
  return kTop;
}

Formula Formula::bottom() {
  static const Formula kBottom = holds(Term::boolean(false));
  return kBottom;
}

Formula Formula::negate(const Formula& f) {
  return FormulaNode::make({FormulaKind::Not, {}, {f}, {}, {}, {}});
}

Formula Formula::conj(std::vector<Formula> operands) {
  if (operands.empty()) return top();
  if (operands.size() == 1) return operands.front();
  return FormulaNode::make(
      {FormulaKind::And, {}, std::move(operands), {}, {}, {}});
}

Formula Formula::conj(const Formula& a, const Formula& b) {
  return conj(std::vector<Formula>{a, b});
}

Formula Formula::knows(const Agent& agent, const Formula& f) {
  if (agent.empty()) throw WellFormednessError("K with an empty agent name");
  return FormulaNode::make({FormulaKind::Knows, {}, {f}, agent, {}, {}});
}

Formula Formula::knows_value(const Agent& agent, const Term& t) {
  if (agent.empty()) throw WellFormednessError("Kv with an empty agent name");
  return FormulaNode::make({FormulaKind::KnowsValue, {t}, {}, agent, {}, {}});
}

Formula Formula::announce(const Formula& announced, const Formula& f) {
  return FormulaNode::make(
      {FormulaKind::Announce, {}, {announced, f}, {}, {}, {}});
}

Formula Formula::diamond(const Formula& announced, const Formula& f) {
  return FormulaNode::make(
      {FormulaKind::Diamond, {}, {announced, f}, {}, {}, {}});
}

Formula Formula::box(const Program& program, const Formula& f) {
  return FormulaNode::make({FormulaKind::Box, {}, {f}, {}, {}, {program}});
}

Formula Formula::forall(const Var& v, const Formula& f) {
  if (v.name.empty()) throw WellFormednessError("quantifier over an empty name");
  return FormulaNode::make({FormulaKind::Forall, {}, {f}, {}, v, {}});
}

Formula Formula::disj(std::vector<Formula> operands) {
  if (operands.empty()) return bottom();
  if (operands.size() == 1) return operands.front();
  for (Formula& f : operands) f = negate(f);
  return negate(conj(std::move(operands)));
}

Formula Formula::disj(const Formula& a, const Formula& b) {
  return disj(std::vector<Formula>{a, b});
}

Formula Formula::implies(const Formula& a, const Formula& b) {
  return negate(conj(a, negate(b)));
}

Formula Formula::iff(const Formula& a, const Formula& b) {
  return conj(implies(a, b), implies(b, a));
}

Formula Formula::exists(const Var& v, const Formula& f) {
  return negate(forall(v, negate(f)));
}

Formula Formula::neq(const Term& a, const Term& b) { return negate(eq(a, b)); }
Formula Formula::le(const Term& a, const Term& b) { return negate(lt(b, a)); }
Formula Formula::gt(const Term& a, const Term& b) { return lt(b, a); }
Formula Formula::ge(const Term& a, const Term& b) { return negate(lt(a, b)); }

FormulaKind Formula::kind() const { return node_->kind; }
const Term& Formula::lhs_term() const { return node_->terms.at(0); }
const Term& Formula::rhs_term() const { return node_->terms.at(1); }

const Formula& Formula::body() const {
  switch (node_->kind) {
    case FormulaKind::Announce:
    case FormulaKind::Diamond:
      return node_->args.at(1);
    default:
      return node_->args.at(0);
  }
}

const Formula& Formula::announced() const { return node_->args.at(0); }
const std::vector<Formula>& Formula::operands() const { return node_->args; }
const Agent& Formula::agent() const { return node_->agent; }
const Var& Formula::bound_var() const { return node_->var; }
const Program& Formula::program() const { return node_->program.at(0); }

bool Formula::is_atom() const {
  switch (node_->kind) {
    case FormulaKind::Eq:
    case FormulaKind::Lt:
    case FormulaKind::Holds:
      return true;
    default:
      return false;
  }
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  const FormulaNode& x = *a.node_;
  const FormulaNode& y = *b.node_;
  return x.kind == y.kind && x.agent == y.agent && x.var == y.var &&
         x.terms == y.terms && x.args == y.args && x.program == y.program;
}

// ---------------------------------------------------------------------------
// Program

Program ProgramNode::make(ProgramNode node) {
  return Program(std::make_shared<const ProgramNode>(std::move(node)));
}

Program Program::test(const Formula& beta) {
  if (contains_box(beta)) {
    throw FragmentError("program tests may not contain program boxes");
  }
  return ProgramNode::make({ProgramKind::Test, {beta}, {}, {}, {}});
}

Program Program::assign(const Var& target, const Term& rhs) {
  if (target.sort != rhs.sort()) {
    throw SortError("cannot assign a " + std::string(sort_name(rhs.sort())) +
                    " term to " + std::string(sort_name(target.sort)) +
                    " variable " + target.name);
  }
  return ProgramNode::make({ProgramKind::Assign, {}, target, {rhs}, {}});
}

Program Program::declare(const Var& fresh, const Program& body) {
  if (fresh.name.empty()) throw WellFormednessError("new with an empty name");
  return ProgramNode::make({ProgramKind::New, {}, fresh, {}, {body}});
}

Program Program::seq(const Program& first, const Program& second) {
  return ProgramNode::make({ProgramKind::Seq, {}, {}, {}, {first, second}});
}

Program Program::choice(const Program& left, const Program& right) {
  return ProgramNode::make({ProgramKind::Choice, {}, {}, {}, {left, right}});
}

Program Program::if_then_else(const Formula& cond, const Program& then_branch,
                              const Program& else_branch) {
  return choice(seq(test(cond), then_branch),
                seq(test(Formula::negate(cond)), else_branch));
}

ProgramKind Program::kind() const { return node_->kind; }
const Formula& Program::test_formula() const { return node_->test.at(0); }
const Var& Program::variable() const { return node_->var; }
const Term& Program::rhs() const { return node_->rhs.at(0); }
const Program& Program::first() const { return node_->args.at(0); }
const Program& Program::second() const { return node_->args.at(1); }

bool operator==(const Program& a, const Program& b) {
  if (a.node_ == b.node_) return true;
  const ProgramNode& x = *a.node_;
  const ProgramNode& y = *b.node_;
  return x.kind == y.kind && x.var == y.var && x.test == y.test &&
         x.rhs == y.rhs && x.args == y.args;
}

// ---------------------------------------------------------------------------
// Free variables and names

namespace {

void erase_name(VarSet& vars, const std::string& name) {
  std::erase_if(vars, [&](const Var& v) { return v.name == name; });
}

bool has_name(const VarSet& vars, const std::string& name) {
  return std::any_of(vars.begin(), vars.end(),
                     [&](const Var& v) { return v.name == name; });
}

void collect_free(const Term& t, VarSet& out) {
  if (t.op() == TermOp::Var) {
    out.insert(t.variable());
    return;
  }
  for (std::size_t i = 0; i < t.arity(); ++i) {
    collect_free(i == 0 ? t.lhs() : t.rhs(), out);
  }
}

void collect_free(const Program& p, VarSet& out);

void collect_free(const Formula& f, VarSet& out) {
  switch (f.kind()) {
    case FormulaKind::Eq:
    case FormulaKind::Lt:
      collect_free(f.lhs_term(), out);
      collect_free(f.rhs_term(), out);
      return;
    case FormulaKind::Holds:
    case FormulaKind::KnowsValue:
      collect_free(f.lhs_term(), out);
      return;
    case FormulaKind::Not:
    case FormulaKind::Knows:
      collect_free(f.body(), out);
      return;
    case FormulaKind::And:
      for (const Formula& g : f.operands()) collect_free(g, out);
      return;
    case FormulaKind::Announce:
    case FormulaKind::Diamond:
      collect_free(f.announced(), out);
      collect_free(f.body(), out);
      return;
    case FormulaKind::Box:
      collect_free(f.program(), out);
      collect_free(f.body(), out);
      return;
    case FormulaKind::Forall: {
      VarSet inner;
      collect_free(f.body(), inner);
      erase_name(inner, f.bound_var().name);
      out.insert(inner.begin(), inner.end());
      return;
    }
  }
}

void collect_free(const Program& p, VarSet& out) {
  switch (p.kind()) {
    case ProgramKind::Test:
      collect_free(p.test_formula(), out);
      return;
    case ProgramKind::Assign:
      out.insert(p.variable());
      collect_free(p.rhs(), out);
      return;
    case ProgramKind::New: {
      VarSet inner;
      collect_free(p.first(), inner);
      erase_name(inner, p.variable().name);
      out.insert(inner.begin(), inner.end());
      return;
    }
    case ProgramKind::Seq:
    case ProgramKind::Choice:
      collect_free(p.first(), out);
      collect_free(p.second(), out);
      return;
  }
}

void collect_names(const Term& t, std::set<std::string>& out) {
  if (t.op() == TermOp::Var) {
    out.insert(t.variable().name);
    return;
  }
  for (std::size_t i = 0; i < t.arity(); ++i) {
    collect_names(i == 0 ? t.lhs() : t.rhs(), out);
  }
}

void collect_names(const Program& p, std::set<std::string>& out);

void collect_names(const Formula& f, std::set<std::string>& out) {
  switch (f.kind()) {
    case FormulaKind::Eq:
    case FormulaKind::Lt:
      collect_names(f.lhs_term(), out);
      collect_names(f.rhs_term(), out);
      return;
    case FormulaKind::Holds:
    case FormulaKind::KnowsValue:
      collect_names(f.lhs_term(), out);
      return;
    case FormulaKind::Not:
    case FormulaKind::Knows:
      collect_names(f.body(), out);
      return;
    case FormulaKind::And:
      for (const Formula& g : f.operands()) collect_names(g, out);
      return;
    case FormulaKind::Announce:
    case FormulaKind::Diamond:
      collect_names(f.announced(), out);
      collect_names(f.body(), out);
      return;
    case FormulaKind::Box:
      collect_names(f.program(), out);
      collect_names(f.body(), out);
      return;
    case FormulaKind::Forall:
      out.insert(f.bound_var().name);
      collect_names(f.body(), out);
      return;
  }
}

void collect_names(const Program& p, std::set<std::string>& out) {
  switch (p.kind()) {
    case ProgramKind::Test:
      collect_names(p.test_formula(), out);
      return;
    case ProgramKind::Assign:
      out.insert(p.variable().name);
      collect_names(p.rhs(), out);
      return;
    case ProgramKind::New:
      out.insert(p.variable().name);
      collect_names(p.first(), out);
      return;
    case ProgramKind::Seq:
    case ProgramKind::Choice:
      collect_names(p.first(), out);
      collect_names(p.second(), out);
      return;
  }
}

// Targets of assignments in p that are not bound by an enclosing New.
void collect_assigned(const Program& p, std::set<std::string>& out) {
  switch (p.kind()) {
    case ProgramKind::Test:
      return;
    case ProgramKind::Assign:
      out.insert(p.variable().name);
      return;
    case ProgramKind::New: {
      std::set<std::string> inner;
      collect_assigned(p.first(), inner);
      inner.erase(p.variable().name);
      out.insert(inner.begin(), inner.end());
      return;
    }
    case ProgramKind::Seq:
    case ProgramKind::Choice:
      collect_assigned(p.first(), out);
      collect_assigned(p.second(), out);
      return;
  }
}

bool term_mentions(const Term& t, const std::string& name) {
  if (t.op() == TermOp::Var) return t.variable().name == name;
  for (std::size_t i = 0; i < t.arity(); ++i) {
    if (term_mentions(i == 0 ? t.lhs() : t.rhs(), name)) return true;
  }
  return false;
}

}  // namespace

VarSet free_vars(const Term& t) {
  VarSet out;
  collect_free(t, out);
  return out;
}

VarSet free_vars(const Formula& f) {
  VarSet out;
  collect_free(f, out);
  return out;
}

VarSet free_vars(const Program& p) {
  VarSet out;
  collect_free(p, out);
  return out;
}

std::set<std::string> all_names(const Term& t) {
  std::set<std::string> out;
  collect_names(t, out);
  return out;
}

std::set<std::string> all_names(const Formula& f) {
  std::set<std::string> out;
  collect_names(f, out);
  return out;
}

std::set<std::string> all_names(const Program& p) {
  std::set<std::string> out;
  collect_names(p, out);
  return out;
}

namespace {

bool program_contains_box(const Program& p) {
  switch (p.kind()) {
    case ProgramKind::Test:
      return contains_box(p.test_formula());
    case ProgramKind::Assign:
      return false;
    case ProgramKind::New:
      return program_contains_box(p.first());
    case ProgramKind::Seq:
    case ProgramKind::Choice:
      return program_contains_box(p.first()) ||
             program_contains_box(p.second());
  }
  return false;
}

bool any_node(const Formula& f, const std::function<bool(FormulaKind)>& pred,
              bool into_programs);

bool any_node_program(const Program& p,
                      const std::function<bool(FormulaKind)>& pred) {
  switch (p.kind()) {
    case ProgramKind::Test:
      return any_node(p.test_formula(), pred, true);
    case ProgramKind::Assign:
      return false;
    case ProgramKind::New:
      return any_node_program(p.first(), pred);
    case ProgramKind::Seq:
    case ProgramKind::Choice:
      return any_node_program(p.first(), pred) ||
             any_node_program(p.second(), pred);
  }
  return false;
}

bool any_node(const Formula& f, const std::function<bool(FormulaKind)>& pred,
              bool into_programs) {
  if (pred(f.kind())) return true;
  switch (f.kind()) {
    case FormulaKind::Eq:
    case FormulaKind::Lt:
    case FormulaKind::Holds:
    case FormulaKind::KnowsValue:
      return false;
    case FormulaKind::Not:
    case FormulaKind::Knows:
    case FormulaKind::Forall:
      return any_node(f.body(), pred, into_programs);
    case FormulaKind::And:
      for (const Formula& g : f.operands()) {
        if (any_node(g, pred, into_programs)) return true;
      }
      return false;
    case FormulaKind::Announce:
    case FormulaKind::Diamond:
      return any_node(f.announced(), pred, into_programs) ||
             any_node(f.body(), pred, into_programs);
    case FormulaKind::Box:
      return any_node(f.body(), pred, into_programs) ||
             (into_programs && any_node_program(f.program(), pred));
  }
  return false;
}

}  // namespace

bool contains_box(const Formula& f) {
  return any_node(f, [](FormulaKind k) { return k == FormulaKind::Box; }, true);
}

bool contains_sugar(const Formula& f) {
  return any_node(
      f, [](FormulaKind k) { return k == FormulaKind::KnowsValue; }, true);
}

bool is_first_order(const Formula& f) {
  return !any_node(
      f,
      [](FormulaKind k) {
        return k == FormulaKind::Knows || k == FormulaKind::KnowsValue ||
               k == FormulaKind::Announce || k == FormulaKind::Diamond ||
               k == FormulaKind::Box;
      },
      true);
}

bool is_quantifier_free(const Formula& f) {
  return is_first_order(f) &&
         !any_node(f, [](FormulaKind k) { return k == FormulaKind::Forall; },
                   true);
}

// ---------------------------------------------------------------------------
// Fresh names

namespace {

std::string_view strip_generated_suffix(std::string_view base) {
  const std::size_t pos = base.rfind(kFreshSeparator);
  if (pos == std::string_view::npos || pos == 0) return base;
  const std::string_view digits = base.substr(pos + kFreshSeparator.size());
  if (digits.empty() ||
      !std::all_of(digits.begin(), digits.end(),
                   [](char c) { return c >= '0' && c <= '9'; })) {
    return base;
  }
  return base.substr(0, pos);
}

template <typename Contains>
Var pick_fresh(std::string_view base, const AgentSet& observers, Sort sort,
               Contains&& contains) {
  const std::string stem(strip_generated_suffix(base));
  for (std::size_t i = 0;; ++i) {
    std::string name = stem + std::string(kFreshSeparator) + std::to_string(i);
    if (!contains(name)) return Var{std::move(name), observers, sort};
  }
}

}  // namespace

Var fresh_var(std::string_view base, const AgentSet& observers, Sort sort,
              const std::set<std::string>& avoid) {
  return pick_fresh(base, observers, sort,
                    [&](const std::string& n) { return avoid.contains(n); });
}

Var fresh_var(std::string_view base, const AgentSet& observers, Sort sort,
              const VarSet& avoid) {
  return pick_fresh(base, observers, sort,
                    [&](const std::string& n) { return has_name(avoid, n); });
}

Var NameSupply::fresh(std::string_view base, const AgentSet& observers,
                      Sort sort) {
  Var v = fresh_var(base, observers, sort, avoid_);
  avoid_.insert(v.name);
  return v;
}

// ---------------------------------------------------------------------------
// Substitution

namespace {

bool same_ids(const Term& a, const Term& b) { return a.id() == b.id(); }
bool same_ids(const Formula& a, const Formula& b) { return a.id() == b.id(); }
bool same_ids(const Program& a, const Program& b) { return a.id() == b.id(); }

Term subst_term(const Term& in, const std::string& x, const Term& t) {
  switch (in.op()) {
    case TermOp::IntConst:
    case TermOp::BoolConst:
    case TermOp::TagConst:
      return in;
    case TermOp::Var:
      return in.variable().name == x ? t : in;
    case TermOp::Neg: {
      Term a = subst_term(in.lhs(), x, t);
      return same_ids(a, in.lhs()) ? in : Term::neg(a);
    }
    case TermOp::Not: {
      Term a = subst_term(in.lhs(), x, t);
      return same_ids(a, in.lhs()) ? in : Term::lnot(a);
    }
    default: {
      Term a = subst_term(in.lhs(), x, t);
      Term b = subst_term(in.rhs(), x, t);
      if (same_ids(a, in.lhs()) && same_ids(b, in.rhs())) return in;
      return Term::binary(in.op(), a, b);
    }
  }
}

struct Substituter {
  const Var& x;
  const Term& t;
  std::set<std::string> t_names;  // free variables of t, by name
  NameSupply& names;

  bool captures(const std::string& binder) const {
    return t_names.contains(binder);
  }

  Formula formula(const Formula& in) {
    switch (in.kind()) {
      case FormulaKind::Eq:
      case FormulaKind::Lt: {
        Term a = subst_term(in.lhs_term(), x.name, t);
        Term b = subst_term(in.rhs_term(), x.name, t);
        if (same_ids(a, in.lhs_term()) && same_ids(b, in.rhs_term())) return in;
        return in.kind() == FormulaKind::Eq ? Formula::eq(a, b)
                                            : Formula::lt(a, b);
      }
      case FormulaKind::Holds: {
        Term a = subst_term(in.lhs_term(), x.name, t);
        return same_ids(a, in.lhs_term()) ? in : Formula::holds(a);
      }
      case FormulaKind::KnowsValue: {
        Term a = subst_term(in.lhs_term(), x.name, t);
        return same_ids(a, in.lhs_term()) ? in
                                          : Formula::knows_value(in.agent(), a);
      }
      case FormulaKind::Not: {
        Formula a = formula(in.body());
        return same_ids(a, in.body()) ? in : Formula::negate(a);
      }
      case FormulaKind::Knows: {
        Formula a = formula(in.body());
        return same_ids(a, in.body()) ? in : Formula::knows(in.agent(), a);
      }
      case FormulaKind::And: {
        std::vector<Formula> ops;
        ops.reserve(in.operands().size());
        bool changed = false;
        for (const Formula& g : in.operands()) {
          ops.push_back(formula(g));
          changed = changed || !same_ids(ops.back(), g);
        }
        return changed ? Formula::conj(std::move(ops)) : in;
      }
      case FormulaKind::Announce:
      case FormulaKind::Diamond: {
        Formula b = formula(in.announced());
        Formula a = formula(in.body());
        if (same_ids(b, in.announced()) && same_ids(a, in.body())) return in;
        return in.kind() == FormulaKind::Announce ? Formula::announce(b, a)
                                                  : Formula::diamond(b, a);
      }
      case FormulaKind::Box: {
        const Program& p = in.program();
        std::set<std::string> assigned;
        collect_assigned(p, assigned);
        if (has_name(free_vars(in.body()), x.name)) {
          for (const std::string& n : t_names) {
            if (assigned.contains(n) && n != x.name) {
              throw FragmentError("substituting " + x.name +
                                  " would be captured by an assignment to " +
                                  n + " inside a program box");
            }
          }
        }
        if (assigned.contains(x.name) && t.op() != TermOp::Var) {
          throw FragmentError("cannot substitute a non-variable term for " +
                              x.name + ", which a boxed program assigns");
        }
        Program q = program(p);
        Formula a = formula(in.body());
        if (same_ids(q, p) && same_ids(a, in.body())) return in;
        return Formula::box(q, a);
      }
      case FormulaKind::Forall: {
        const Var& y = in.bound_var();
        if (y.name == x.name) return in;
        if (!has_name(free_vars(in.body()), x.name)) return in;
        if (captures(y.name)) {
          Var renamed = names.fresh(y.name, y.observers, y.sort);
          Formula body = substitute(in.body(), y, Term::var(renamed), names);
          return Formula::forall(renamed, formula(body));
        }
        Formula a = formula(in.body());
        return same_ids(a, in.body()) ? in : Formula::forall(y, a);
      }
    }
    return in;
  }

  Program program(const Program& in) {
    switch (in.kind()) {
      case ProgramKind::Test: {
        Formula b = formula(in.test_formula());
        return same_ids(b, in.test_formula()) ? in : Program::test(b);
      }
      case ProgramKind::Assign: {
        Term e = subst_term(in.rhs(), x.name, t);
        Var target = in.variable();
        if (target.name == x.name) {
          if (t.op() != TermOp::Var) {
            throw FragmentError("cannot substitute a non-variable term for "
                                "assignment target " + x.name);
          }
          target = t.variable();
        }
        if (target == in.variable() && same_ids(e, in.rhs())) return in;
        return Program::assign(target, e);
      }
      case ProgramKind::New: {
        const Var& k = in.variable();
        if (k.name == x.name) return in;
        if (!has_name(free_vars(in.first()), x.name)) return in;
        if (captures(k.name)) {
          Var renamed = names.fresh(k.name, k.observers, k.sort);
          Program body = substitute(in.first(), k, Term::var(renamed), names);
          return Program::declare(renamed, program(body));
        }
        Program body = program(in.first());
        return same_ids(body, in.first()) ? in : Program::declare(k, body);
      }
      case ProgramKind::Seq: {
        std::set<std::string> assigned;
        collect_assigned(in.first(), assigned);
        if (has_name(free_vars(in.second()), x.name)) {
          for (const std::string& n : t_names) {
            if (assigned.contains(n) && n != x.name) {
              throw FragmentError("substituting " + x.name +
                                  " would be captured by an assignment to " + n);
            }
          }
        }
        Program a = program(in.first());
        Program b = program(in.second());
        if (same_ids(a, in.first()) && same_ids(b, in.second())) return in;
        return Program::seq(a, b);
      }
      case ProgramKind::Choice: {
        Program a = program(in.first());
        Program b = program(in.second());
        if (same_ids(a, in.first()) && same_ids(b, in.second())) return in;
        return Program::choice(a, b);
      }
    }
    return in;
  }
};

std::set<std::string> free_names(const Term& t) {
  std::set<std::string> out;
  for (const Var& v : free_vars(t)) out.insert(v.name);
  return out;
}

void check_sorts(const Var& x, const Term& t) {
  if (x.sort != t.sort()) {
    throw SortError("cannot substitute a " + std::string(sort_name(t.sort())) +
                    " term for " + std::string(sort_name(x.sort)) +
                    " variable " + x.name);
  }
}

}  // namespace

Term substitute(const Term& in, const Var& x, const Term& t) {
  check_sorts(x, t);
  return subst_term(in, x.name, t);
}

Formula substitute(const Formula& in, const Var& x, const Term& t,
                   NameSupply& names) {
  check_sorts(x, t);
  Substituter s{x, t, free_names(t), names};
  return s.formula(in);
}

Formula substitute(const Formula& in, const Var& x, const Term& t) {
  std::set<std::string> avoid = all_names(in);
  avoid.merge(all_names(t));
  avoid.insert(x.name);
  NameSupply names(std::move(avoid));
  return substitute(in, x, t, names);
}

Program substitute(const Program& in, const Var& x, const Term& t,
                   NameSupply& names) {
  check_sorts(x, t);
  Substituter s{x, t, free_names(t), names};
  return s.program(in);
}

// ---------------------------------------------------------------------------
// Sugar

namespace {

Program expand_program(const Program& p, NameSupply& names);

Formula expand(const Formula& f, NameSupply& names) {
  switch (f.kind()) {
    case FormulaKind::Eq:
    case FormulaKind::Lt:
    case FormulaKind::Holds:
      return f;
    case FormulaKind::KnowsValue: {
      const Term& t = f.lhs_term();
      Var v = names.fresh("v", AgentSet{f.agent()}, t.sort());
      return Formula::exists(
          v, Formula::knows(f.agent(), Formula::eq(Term::var(v), t)));
    }
    case FormulaKind::Not: {
      Formula a = expand(f.body(), names);
      return same_ids(a, f.body()) ? f : Formula::negate(a);
    }
    case FormulaKind::Knows: {
      Formula a = expand(f.body(), names);
      return same_ids(a, f.body()) ? f : Formula::knows(f.agent(), a);
    }
    case FormulaKind::And: {
      std::vector<Formula> ops;
      bool changed = false;
      for (const Formula& g : f.operands()) {
        ops.push_back(expand(g, names));
        changed = changed || !same_ids(ops.back(), g);
      }
      return changed ? Formula::conj(std::move(ops)) : f;
    }
    case FormulaKind::Announce:
    case FormulaKind::Diamond: {
      Formula b = expand(f.announced(), names);
      Formula a = expand(f.body(), names);
      if (same_ids(b, f.announced()) && same_ids(a, f.body())) return f;
      return f.kind() == FormulaKind::Announce ? Formula::announce(b, a)
                                               : Formula::diamond(b, a);
    }
    case FormulaKind::Box: {
      Program p = expand_program(f.program(), names);
      Formula a = expand(f.body(), names);
      if (same_ids(p, f.program()) && same_ids(a, f.body())) return f;
      return Formula::box(p, a);
    }
    case FormulaKind::Forall: {
      Formula a = expand(f.body(), names);
      return same_ids(a, f.body()) ? f : Formula::forall(f.bound_var(), a);
    }
  }
  return f;
}

Program expand_program(const Program& p, NameSupply& names) {
  switch (p.kind()) {
    case ProgramKind::Test: {
      Formula b = expand(p.test_formula(), names);
      return same_ids(b, p.test_formula()) ? p : Program::test(b);
    }
    case ProgramKind::Assign:
      return p;
    case ProgramKind::New: {
      Program body = expand_program(p.first(), names);
      return same_ids(body, p.first()) ? p : Program::declare(p.variable(), body);
    }
    case ProgramKind::Seq:
    case ProgramKind::Choice: {
      Program a = expand_program(p.first(), names);
      Program b = expand_program(p.second(), names);
      if (same_ids(a, p.first()) && same_ids(b, p.second())) return p;
      return p.kind() == ProgramKind::Seq ? Program::seq(a, b)
                                          : Program::choice(a, b);
    }
  }
  return p;
}

}  // namespace

Formula expand_sugar(const Formula& f, NameSupply& names) {
  names.reserve(all_names(f));
  return expand(f, names);
}

Formula expand_sugar(const Formula& f) {
  NameSupply names(all_names(f));
  return expand(f, names);
}

// ---------------------------------------------------------------------------
// Size

namespace {

std::size_t sat_add(std::size_t a, std::size_t b) {
  return a > std::numeric_limits<std::size_t>::max() - b
             ? std::numeric_limits<std::size_t>::max()
             : a + b;
}

struct SizeCounter {
  std::unordered_map<const void*, std::size_t> memo;

  std::size_t term(const Term& t) {
    if (auto it = memo.find(t.id()); it != memo.end()) return it->second;
    std::size_t n = 1;
    for (std::size_t i = 0; i < t.arity(); ++i) {
      n = sat_add(n, term(i == 0 ? t.lhs() : t.rhs()));
    }
    memo.emplace(t.id(), n);
    return n;
  }

  std::size_t program(const Program& p) {
    if (auto it = memo.find(p.id()); it != memo.end()) return it->second;
    std::size_t n = 1;
    switch (p.kind()) {
      case ProgramKind::Test:
        n = sat_add(n, formula(p.test_formula()));
        break;
      case ProgramKind::Assign:
        n = sat_add(n, 1 + term(p.rhs()));
        break;
      case ProgramKind::New:
        n = sat_add(n, program(p.first()));
        break;
      case ProgramKind::Seq:
      case ProgramKind::Choice:
        n = sat_add(n, sat_add(program(p.first()), program(p.second())));
        break;
    }
    memo.emplace(p.id(), n);
    return n;
  }

  std::size_t formula(const Formula& f) {
    if (auto it = memo.find(f.id()); it != memo.end()) return it->second;
    std::size_t n = 1;
    switch (f.kind()) {
      case FormulaKind::Eq:
      case FormulaKind::Lt:
        n = sat_add(n, sat_add(term(f.lhs_term()), term(f.rhs_term())));
        break;
      case FormulaKind::Holds:
      case FormulaKind::KnowsValue:
        n = sat_add(n, term(f.lhs_term()));
        break;
      case FormulaKind::Not:
      case FormulaKind::Knows:
      case FormulaKind::Forall:
        n = sat_add(n, formula(f.body()));
        break;
      case FormulaKind::And:
        for (const Formula& g : f.operands()) n = sat_add(n, formula(g));
        break;
      case FormulaKind::Announce:
      case FormulaKind::Diamond:
        n = sat_add(n, sat_add(formula(f.announced()), formula(f.body())));
        break;
      case FormulaKind::Box:
        n = sat_add(n, sat_add(program(f.program()), formula(f.body())));
        break;
    }
    memo.emplace(f.id(), n);
    return n;
  }
};

}  // namespace

std::size_t tree_size(const Formula& f) {
  SizeCounter counter;
  return counter.formula(f);
}

// ---------------------------------------------------------------------------
// Signature

Signature::Signature(std::vector<Agent> agents, std::vector<Var> program_vars)
    : agents_(std::move(agents)), vars_(std::move(program_vars)) {}

bool Signature::has_agent(const Agent& a) const {
  return std::find(agents_.begin(), agents_.end(), a) != agents_.end();
}

const Var* Signature::find_var(std::string_view name) const {
  for (const Var& v : vars_) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

namespace {

struct Validator {
  const Signature& sig;
  std::vector<Var> bound;

  void check_agent(const Agent& a) const {
    if (!sig.has_agent(a)) throw WellFormednessError("undeclared agent " + a);
  }

  void check_binder(const Var& v) const {
    for (const Agent& a : v.observers) check_agent(a);
    if (sig.find_var(v.name) != nullptr) {
      throw WellFormednessError("bound variable " + v.name +
                                " shadows a program variable");
    }
    for (const Var& b : bound) {
      if (b.name == v.name) {
        throw WellFormednessError("bound variable " + v.name +
                                  " shadows an enclosing binder");
      }
    }
  }

  void check_var(const Var& v) const {
    for (auto it = bound.rbegin(); it != bound.rend(); ++it) {
      if (it->name == v.name) {
        if (*it != v) {
          throw WellFormednessError("inconsistent use of bound variable " +
                                    v.name);
        }
        return;
      }
    }
    const Var* decl = sig.find_var(v.name);
    if (decl == nullptr) {
      throw WellFormednessError("undeclared variable " + v.name);
    }
    if (*decl != v) {
      throw WellFormednessError("variable " + v.name +
                                " used with a sort or observer set that "
                                "differs from its declaration");
    }
  }

  void term(const Term& t) const {
    if (t.op() == TermOp::Var) {
      check_var(t.variable());
      return;
    }
    if (t.op() == TermOp::TagConst) {
      throw WellFormednessError("choice tags cannot appear in task formulas");
    }
    for (std::size_t i = 0; i < t.arity(); ++i) term(i == 0 ? t.lhs() : t.rhs());
  }

  void formula(const Formula& f) {
    switch (f.kind()) {
      case FormulaKind::Eq:
      case FormulaKind::Lt:
        term(f.lhs_term());
        term(f.rhs_term());
        return;
      case FormulaKind::Holds:
        term(f.lhs_term());
        return;
      case FormulaKind::KnowsValue:
        check_agent(f.agent());
        term(f.lhs_term());
        return;
      case FormulaKind::Knows:
        check_agent(f.agent());
        formula(f.body());
        return;
      case FormulaKind::Not:
        formula(f.body());
        return;
      case FormulaKind::And:
        for (const Formula& g : f.operands()) formula(g);
        return;
      case FormulaKind::Announce:
      case FormulaKind::Diamond:
        formula(f.announced());
        formula(f.body());
        return;
      case FormulaKind::Box:
        program(f.program());
        formula(f.body());
        return;
      case FormulaKind::Forall:
        check_binder(f.bound_var());
        bound.push_back(f.bound_var());
        formula(f.body());
        bound.pop_back();
        return;
    }
  }

  void program(const Program& p) {
    switch (p.kind()) {
      case ProgramKind::Test:
        formula(p.test_formula());
        return;
      case ProgramKind::Assign:
        check_var(p.variable());
        term(p.rhs());
        return;
      case ProgramKind::New:
        check_binder(p.variable());
        bound.push_back(p.variable());
        program(p.first());
        bound.pop_back();
        return;
      case ProgramKind::Seq:
      case ProgramKind::Choice:
        program(p.first());
        program(p.second());
        return;
    }
  }
};

}  // namespace

void Signature::validate(const Formula& f) const {
  Validator v{*this, {}};
  v.formula(f);
}

void Signature::validate(const Program& p) const {
  Validator v{*this, {}};
  v.program(p);
}

}  // namespace episcope
