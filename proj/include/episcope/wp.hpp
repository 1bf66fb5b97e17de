#pragma once

// Weakest preconditions of knowledge-based programs.
//
//   wp(P ; Q, a)    = wp(P, wp(Q, a))
//   wp(P [] Q, a)   = wp(P, a) & wp(Q, a)
//   wp(new k . P, a) = forall k . wp(P, a)
//   wp(b ?, a)      = [b] a
//   wp(x := e, a)   = forall k . [k = e] a[x \ k]
//
// The memory variable k of an assignment is fresh for every instance and
// carries the observers and sort of x. No simplification is performed.

#include "episcope/ast.hpp"

namespace episcope {

/// Names are drawn from `names`, which is first made to avoid every name
/// of `program` and `post`. Throws FragmentError when `post` contains a
/// program box.
Formula wp(const Program& program, const Formula& post, NameSupply& names);
Formula wp(const Program& program, const Formula& post);

/// As above, and additionally throws FreeVariableError unless the free
/// variables of `program` and `post` lie in `allowed`.
Formula wp_checked(const Program& program, const Formula& post,
                   const VarSet& allowed);

}  // namespace episcope
