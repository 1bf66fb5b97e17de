#include "episcope/translate.hpp"

#include <unordered_map>

#include "episcope/wp.hpp"

namespace episcope {

namespace {

Formula elim(const Formula& f, NameSupply& names) {
  switch (f.kind()) {
    case FormulaKind::Eq:
    case FormulaKind::Lt:
    case FormulaKind::Holds:
    case FormulaKind::KnowsValue:
      return f;
    case FormulaKind::Not:
      return Formula::negate(elim(f.body(), names));
    case FormulaKind::Knows:
      return Formula::knows(f.agent(), elim(f.body(), names));
    case FormulaKind::And: {
      std::vector<Formula> ops;
      ops.reserve(f.operands().size());
      for (const Formula& g : f.operands()) ops.push_back(elim(g, names));
      return Formula::conj(std::move(ops));
    }
    case FormulaKind::Announce:
      return Formula::announce(elim(f.announced(), names),
                               elim(f.body(), names));
    case FormulaKind::Diamond:
      return Formula::diamond(elim(f.announced(), names),
                              elim(f.body(), names));
    case FormulaKind::Forall:
      return Formula::forall(f.bound_var(), elim(f.body(), names));
    case FormulaKind::Box: {
      Program p = f.program();
      Formula body = f.body();
      while (body.kind() == FormulaKind::Box) {
        p = Program::seq(p, body.program());
        body = body.body();
      }
      return wp(p, elim(body, names), names);
    }
  }
  return f;
}

struct Translator {
  NameSupply& names;

  Formula run(const Formula& phi, const Formula& a) {
    switch (a.kind()) {
      case FormulaKind::Eq:
      case FormulaKind::Lt:
      case FormulaKind::Holds:
        return a;
      case FormulaKind::KnowsValue:
        throw FragmentError("Kv must be expanded before translation");
      case FormulaKind::Not:
        return Formula::negate(run(phi, a.body()));
      case FormulaKind::And: {
        std::vector<Formula> ops;
        ops.reserve(a.operands().size());
        for (const Formula& g : a.operands()) ops.push_back(run(phi, g));
        return Formula::conj(std::move(ops));
      }
      case FormulaKind::Knows: {
        VarSet scope = free_vars(a.body());
        scope.merge(free_vars(phi));
        Formula out = Formula::implies(phi, run(phi, a.body()));
        // VarSet is ordered by name; the first variable ends up outermost.
        for (auto it = scope.rbegin(); it != scope.rend(); ++it) {
          if (!it->observed_by(a.agent())) out = Formula::forall(*it, out);
        }
        return out;
      }
      case FormulaKind::Announce: {
        Formula b = run(phi, a.announced());
        return Formula::implies(b, run(Formula::conj(phi, b), a.body()));
      }
      case FormulaKind::Diamond: {
        Formula b = run(phi, a.announced());
        return Formula::conj(b, run(Formula::conj(phi, b), a.body()));
      }
      case FormulaKind::Box:
        return run(phi, elim(a, names));
      case FormulaKind::Forall:
        return Formula::forall(a.bound_var(), run(phi, a.body()));
    }
    return a;
  }
};

Formula checked_alpha(const VerificationTask& task, const Formula& alpha,
                      NameSupply& names) {
  const Signature sig = task.signature();
  sig.validate(alpha);
  const VarSet allowed = sig.program_var_set();
  for (const Var& v : free_vars(alpha)) {
    if (!allowed.contains(v)) {
      throw FreeVariableError("free variable " + v.name +
                              " is not a program variable");
    }
  }
  names.reserve(all_names(task.phi));
  return expand_sugar(alpha, names);
}

}  // namespace

Formula eliminate_boxes(const Formula& alpha, NameSupply& names) {
  names.reserve(all_names(alpha));
  return elim(alpha, names);
}

Formula tau(const Formula& phi, const Formula& alpha, NameSupply& names) {
  if (!is_first_order(phi)) {
    throw FragmentError("the context formula of tau must be first-order");
  }
  if (contains_sugar(alpha)) {
    throw FragmentError("Kv must be expanded before translation");
  }
  names.reserve(all_names(phi));
  names.reserve(all_names(alpha));
  Translator t{names};
  return t.run(phi, elim(alpha, names));
}

Formula tau(const Formula& phi, const Formula& alpha) {
  NameSupply names;
  return tau(phi, alpha, names);
}

Formula validity_goal(const VerificationTask& task, const Formula& alpha) {
  NameSupply names;
  Formula a = checked_alpha(task, alpha, names);
  return Formula::conj(task.phi, Formula::negate(tau(task.phi, a, names)));
}

Formula satisfiability_goal(const VerificationTask& task, const Formula& alpha) {
  NameSupply names;
  Formula a = checked_alpha(task, alpha, names);
  return Formula::conj(task.phi, tau(task.phi, a, names));
}

Formula query_goal(const VerificationTask& task, const Query& query) {
  return query.mode == QueryMode::Valid ? validity_goal(task, query.alpha)
                                        : satisfiability_goal(task, query.alpha);
}

namespace {

bool is_const(const Formula& f, bool value) {
  return f.kind() == FormulaKind::Holds &&
         f.lhs_term().op() == TermOp::BoolConst &&
         (f.lhs_term().value() != 0) == value;
}

struct Simplifier {
  std::unordered_map<const FormulaNode*, Formula> memo;

  Formula run(const Formula& f) {
    if (auto it = memo.find(f.id()); it != memo.end()) return it->second;
    Formula out = step(f);
    memo.emplace(f.id(), out);
    return out;
  }

  Formula step(const Formula& f) {
    switch (f.kind()) {
      case FormulaKind::Not: {
        Formula a = run(f.body());
        if (a.kind() == FormulaKind::Not) return a.body();
        if (is_const(a, true)) return Formula::bottom();
        if (is_const(a, false)) return Formula::top();
        return a.id() == f.body().id() ? f : Formula::negate(a);
      }
      case FormulaKind::And: {
        std::vector<Formula> ops;
        for (const Formula& g : f.operands()) {
          Formula a = run(g);
          if (is_const(a, false)) return Formula::bottom();
          if (is_const(a, true)) continue;
          if (a.kind() == FormulaKind::And) {
            ops.insert(ops.end(), a.operands().begin(), a.operands().end());
          } else {
            ops.push_back(a);
          }
        }
        return Formula::conj(std::move(ops));
      }
      case FormulaKind::Forall: {
        Formula a = run(f.body());
        if (is_const(a, true) || is_const(a, false)) return a;
        return a.id() == f.body().id() ? f : Formula::forall(f.bound_var(), a);
      }
      default:
        return f;
    }
  }
};

}  // namespace

Formula simplify(const Formula& f) {
  if (!is_first_order(f)) {
    throw FragmentError("simplify expects a first-order formula");
  }
  Simplifier s;
  return s.run(f);
}

}  // namespace episcope
