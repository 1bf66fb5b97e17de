#pragma once

// Syntax trees for terms, formulas and knowledge-based programs.
//
// All node types are immutable and shared: a Term, Formula or Program is a
// cheap handle around a shared_ptr to a const node, so values can be copied
// freely and shared between threads. Derived connectives (or, implies, iff,
// exists, <=, >, >=, !=) are ordinary factory functions that return the core
// form directly; the only sugar that survives construction is Kv, removed by
// expand_sugar().

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "episcope/error.hpp"

namespace episcope {

enum class Sort : std::uint8_t { Bool, Int, ChoiceTag };

std::string_view sort_name(Sort sort);

/// Values of the two-valued sort used to tag the branches of a choice.
enum class ChoiceTag : std::int64_t { Left = 0, Right = 1 };

using Agent = std::string;
using AgentSet = std::set<Agent>;

/// A variable together with the group of agents that observe it.
struct Var {
  std::string name;
  AgentSet observers;
  Sort sort = Sort::Int;

  bool observed_by(const Agent& agent) const {
    return observers.contains(agent);
  }

  friend bool operator==(const Var&, const Var&) = default;
  friend auto operator<=>(const Var&, const Var&) = default;
};

using VarSet = std::set<Var>;

class Term;
class Formula;
class Program;

struct TermNode;
struct FormulaNode;
struct ProgramNode;

// ---------------------------------------------------------------------------
// Terms

enum class TermOp : std::uint8_t {
  IntConst,
  BoolConst,
  TagConst,
  Var,
  Neg,
  Not,
  Add,
  Sub,
  Mul,
  Mod,
  And,
  Or,
  Xor,
};

class Term {
 public:
  static Term integer(std::int64_t value);
  static Term boolean(bool value);
  static Term tag(ChoiceTag value);
  static Term var(const Var& v);
  static Term neg(const Term& t);
  static Term lnot(const Term& t);
  /// Binary operation; throws SortError when operand sorts do not fit.
  static Term binary(TermOp op, const Term& lhs, const Term& rhs);

  static Term add(const Term& a, const Term& b) { return binary(TermOp::Add, a, b); }
  static Term sub(const Term& a, const Term& b) { return binary(TermOp::Sub, a, b); }
  static Term mul(const Term& a, const Term& b) { return binary(TermOp::Mul, a, b); }
  static Term mod(const Term& a, const Term& b) { return binary(TermOp::Mod, a, b); }
  static Term land(const Term& a, const Term& b) { return binary(TermOp::And, a, b); }
  static Term lor(const Term& a, const Term& b) { return binary(TermOp::Or, a, b); }
  static Term lxor(const Term& a, const Term& b) { return binary(TermOp::Xor, a, b); }

  TermOp op() const;
  Sort sort() const;
  /// Payload of IntConst / BoolConst (0 or 1) / TagConst.
  std::int64_t value() const;
  const Var& variable() const;
  /// Operand of a unary node, left operand of a binary node.
  const Term& lhs() const;
  const Term& rhs() const;
  std::size_t arity() const;

  bool is_binary() const;
  const TermNode* id() const { return node_.get(); }

  friend bool operator==(const Term& a, const Term& b);

 private:
  friend struct TermNode;
  explicit Term(std::shared_ptr<const TermNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const TermNode> node_;
};

// ---------------------------------------------------------------------------
// Formulas

enum class FormulaKind : std::uint8_t {
  Eq,          // t = t
  Lt,          // t < t
  Holds,       // a Bool-sorted term used as a formula
  Not,
  And,         // n-ary, at least two operands
  Knows,       // K_a alpha
  KnowsValue,  // Kv_a t (sugar)
  Announce,    // [beta] alpha
  Diamond,     // <beta> alpha
  Box,         // [P] alpha
  Forall,      // forall x_G . alpha
};

class Formula {
 public:
  static Formula eq(const Term& a, const Term& b);
  static Formula lt(const Term& a, const Term& b);
  static Formula holds(const Term& t);
  static Formula top();
  static Formula bottom();
  static Formula negate(const Formula& f);
  /// Empty list yields top, a single operand is returned unchanged.
  static Formula conj(std::vector<Formula> operands);
  static Formula conj(const Formula& a, const Formula& b);
  static Formula knows(const Agent& agent, const Formula& f);
  static Formula knows_value(const Agent& agent, const Term& t);
  static Formula announce(const Formula& announced, const Formula& f);
  static Formula diamond(const Formula& announced, const Formula& f);
  static Formula box(const Program& program, const Formula& f);
  static Formula forall(const Var& v, const Formula& f);

  // Derived connectives, normalised on construction.
  static Formula disj(std::vector<Formula> operands);
  static Formula disj(const Formula& a, const Formula& b);
  static Formula implies(const Formula& a, const Formula& b);
  static Formula iff(const Formula& a, const Formula& b);
  static Formula exists(const Var& v, const Formula& f);
  static Formula neq(const Term& a, const Term& b);
  static Formula le(const Term& a, const Term& b);
  static Formula gt(const Term& a, const Term& b);
  static Formula ge(const Term& a, const Term& b);

  FormulaKind kind() const;
  /// Terms of Eq / Lt (lhs, rhs), Holds (lhs) and KnowsValue (lhs).
  const Term& lhs_term() const;
  const Term& rhs_term() const;
  /// Operand of Not / Knows / Forall / Box and the post-formula of
  /// Announce / Diamond.
  const Formula& body() const;
  /// The announced formula of Announce / Diamond.
  const Formula& announced() const;
  const std::vector<Formula>& operands() const;
  const Agent& agent() const;
  const Var& bound_var() const;
  const Program& program() const;

  bool is_atom() const;
  const FormulaNode* id() const { return node_.get(); }

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  friend struct FormulaNode;
  explicit Formula(std::shared_ptr<const FormulaNode> node)
      : node_(std::move(node)) {}
  std::shared_ptr<const FormulaNode> node_;
};

// ---------------------------------------------------------------------------
// Programs

enum class ProgramKind : std::uint8_t { Test, Assign, New, Seq, Choice };

class Program {
 public:
  /// beta? ; beta must be box-free.
  static Program test(const Formula& beta);
  static Program assign(const Var& target, const Term& rhs);
  /// new k_G . body
  static Program declare(const Var& fresh, const Program& body);
  static Program seq(const Program& first, const Program& second);
  static Program choice(const Program& left, const Program& right);

  static Program skip() { return test(Formula::top()); }
  static Program if_then_else(const Formula& cond, const Program& then_branch,
                              const Program& else_branch);

  ProgramKind kind() const;
  const Formula& test_formula() const;
  /// Assign target or New-bound variable.
  const Var& variable() const;
  const Term& rhs() const;
  /// Body of New, first of Seq, left of Choice.
  const Program& first() const;
  const Program& second() const;

  const ProgramNode* id() const { return node_.get(); }

  friend bool operator==(const Program& a, const Program& b);

 private:
  friend struct ProgramNode;
  explicit Program(std::shared_ptr<const ProgramNode> node)
      : node_(std::move(node)) {}
  std::shared_ptr<const ProgramNode> node_;
};

// ---------------------------------------------------------------------------
// Nodes. Constructed only through the factories above.

struct TermNode {
  TermOp op;
  Sort sort;
  std::int64_t value = 0;
  Var var;
  std::vector<Term> args;

  static Term make(TermNode node);
};

struct FormulaNode {
  FormulaKind kind;
  std::vector<Term> terms;
  std::vector<Formula> args;
  Agent agent;
  Var var;
  std::vector<Program> program;  // zero or one

  static Formula make(FormulaNode node);
};

struct ProgramNode {
  ProgramKind kind;
  std::vector<Formula> test;  // zero or one
  Var var;
  std::vector<Term> rhs;  // zero or one
  std::vector<Program> args;

  static Program make(ProgramNode node);
};

// ---------------------------------------------------------------------------
// Structural operations

VarSet free_vars(const Term& t);
VarSet free_vars(const Formula& f);
VarSet free_vars(const Program& p);

/// Every variable name occurring anywhere, bound or free.
std::set<std::string> all_names(const Term& t);
std::set<std::string> all_names(const Formula& f);
std::set<std::string> all_names(const Program& p);

/// True when the formula contains a program box anywhere (including inside
/// tests of nested programs).
bool contains_box(const Formula& f);
bool contains_sugar(const Formula& f);
/// First-order: no K, Kv, announcement or box.
bool is_first_order(const Formula& f);
bool is_quantifier_free(const Formula& f);

/// Separator reserved for generated names. User identifiers may not contain it.
inline constexpr std::string_view kFreshSeparator = "__";

/// Deterministic fresh variable: base__i for the smallest i such that the
/// name is not in `avoid`. A "__<digits>" suffix already on `base` is stripped
/// first so renaming a generated name does not stack suffixes.
Var fresh_var(std::string_view base, const AgentSet& observers, Sort sort,
              const std::set<std::string>& avoid);
Var fresh_var(std::string_view base, const AgentSet& observers, Sort sort,
              const VarSet& avoid);

/// Stateful fresh-name source: every name handed out is added to the avoid
/// set, so repeated requests never collide.
class NameSupply {
 public:
  NameSupply() = default;
  explicit NameSupply(std::set<std::string> avoid) : avoid_(std::move(avoid)) {}

  void reserve(std::string_view name) { avoid_.emplace(name); }
  void reserve(const std::set<std::string>& names) {
    avoid_.insert(names.begin(), names.end());
  }
  bool used(const std::string& name) const { return avoid_.contains(name); }

  Var fresh(std::string_view base, const AgentSet& observers, Sort sort);

 private:
  std::set<std::string> avoid_;
};

/// Capture-avoiding substitution of the free occurrences of x by t.
/// Bound variables that would capture a variable of t are renamed (keeping
/// their observers and sort). Throws SortError when sorts differ. Inside a
/// program box, x may only be replaced by another variable if the program
/// assigns to x.
Term substitute(const Term& in, const Var& x, const Term& t);
Formula substitute(const Formula& in, const Var& x, const Term& t);
Formula substitute(const Formula& in, const Var& x, const Term& t,
                   NameSupply& names);
Program substitute(const Program& in, const Var& x, const Term& t,
                   NameSupply& names);

/// Replaces every Kv_a t by  not forall v_{a} . not K_a (v = t)  with a fresh
/// v observed by exactly {a}. Recurses into program tests.
Formula expand_sugar(const Formula& f);
Formula expand_sugar(const Formula& f, NameSupply& names);

/// Number of nodes in the tree view of the formula (shared subterms counted
/// once per occurrence). Saturates at SIZE_MAX.
std::size_t tree_size(const Formula& f);

// ---------------------------------------------------------------------------
// Declarations

/// The agents and program variables of a task; checks that nodes only refer
/// to declared names.
class Signature {
 public:
  Signature() = default;
  Signature(std::vector<Agent> agents, std::vector<Var> program_vars);

  const std::vector<Agent>& agents() const { return agents_; }
  const std::vector<Var>& program_vars() const { return vars_; }
  AgentSet agent_set() const { return {agents_.begin(), agents_.end()}; }
  VarSet program_var_set() const { return {vars_.begin(), vars_.end()}; }

  bool has_agent(const Agent& a) const;
  const Var* find_var(std::string_view name) const;

  /// Throws WellFormednessError on undeclared agents (in K, Kv, observer
  /// sets) and on free variables that are not program variables.
  void validate(const Formula& f) const;
  void validate(const Program& p) const;

 private:
  std::vector<Agent> agents_;
  std::vector<Var> vars_;
};

}  // namespace episcope
