#pragma once

// Translation of program-epistemic formulas into first-order logic.
//
//   tau(phi, pi)         = pi
//   tau(phi, !a)         = !tau(phi, a)
//   tau(phi, a & b)      = tau(phi, a) & tau(phi, b)
//   tau(phi, K[i] a)     = forall n . (phi => tau(phi, a))
//                          with n the variables of a and phi that i does not
//                          observe, sorted by name
//   tau(phi, [b] a)      = tau(phi, b) => tau(phi & tau(phi, b), a)
//   tau(phi, <b> a)      = tau(phi, b) & tau(phi & tau(phi, b), a)
//   tau(phi, [prog P] a) = tau(phi, wp(P, a))
//   tau(phi, forall x . a) = forall x . tau(phi, a)

#include "episcope/ast.hpp"
#include "episcope/task.hpp"

namespace episcope {

/// Replaces every program box by its weakest precondition, innermost first.
/// Directly nested boxes [prog P][prog Q] a are merged into [prog P ; Q] a.
Formula eliminate_boxes(const Formula& alpha, NameSupply& names);

/// `phi` must be first-order and `alpha` free of Kv (see expand_sugar);
/// throws FragmentError otherwise. The result is first-order.
Formula tau(const Formula& phi, const Formula& alpha);
Formula tau(const Formula& phi, const Formula& alpha, NameSupply& names);

/// phi & !tau(phi, alpha); unsatisfiable iff alpha is valid on [[phi]].
/// Kv is expanded first. Throws FreeVariableError if alpha has free
/// variables outside the task's program variables.
Formula validity_goal(const VerificationTask& task, const Formula& alpha);

/// phi & tau(phi, alpha); its models are the states of [[phi]] at which
/// alpha holds.
Formula satisfiability_goal(const VerificationTask& task, const Formula& alpha);

/// Goal for a query according to its mode.
Formula query_goal(const VerificationTask& task, const Query& query);

/// Light clean-up of a first-order formula: flattens nested conjunctions,
/// drops true conjuncts, absorbs false ones and removes double negations.
Formula simplify(const Formula& f);

}  // namespace episcope
