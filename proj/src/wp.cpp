#include "episcope/wp.hpp"

namespace episcope {

namespace {

Formula wp_rec(const Program& p, const Formula& post, NameSupply& names) {
  switch (p.kind()) {
    case ProgramKind::Test:
      return Formula::announce(p.test_formula(), post);
    case ProgramKind::Assign: {
      const Var& x = p.variable();
      Var k = names.fresh("k", x.observers, x.sort);
      Formula renamed = substitute(post, x, Term::var(k), names);
      return Formula::forall(
          k, Formula::announce(Formula::eq(Term::var(k), p.rhs()), renamed));
    }
    case ProgramKind::New: {
      const Var& k = p.variable();
      // Renamed when the post-formula already uses the name.
      if (all_names(post).contains(k.name)) {
        Var fresh = names.fresh(k.name, k.observers, k.sort);
        Program body = substitute(p.first(), k, Term::var(fresh), names);
        return Formula::forall(fresh, wp_rec(body, post, names));
      }
      return Formula::forall(k, wp_rec(p.first(), post, names));
    }
    case ProgramKind::Seq:
      return wp_rec(p.first(), wp_rec(p.second(), post, names), names);
    case ProgramKind::Choice: {
      Formula left = wp_rec(p.first(), post, names);
      Formula right = wp_rec(p.second(), post, names);
      return Formula::conj(left, right);
    }
  }
  return post;
}

void check_free(const VarSet& vars, const VarSet& allowed, const char* where) {
  for (const Var& v : vars) {
    if (!allowed.contains(v)) {
      throw FreeVariableError(std::string("free variable ") + v.name + " of the " +
                              where + " is not a program variable");
    }
  }
}

}  // namespace

Formula wp(const Program& program, const Formula& post, NameSupply& names) {
  if (contains_box(post)) {
    throw FragmentError("wp post-formula contains a program box");
  }
  names.reserve(all_names(program));
  names.reserve(all_names(post));
  return wp_rec(program, post, names);
}

Formula wp(const Program& program, const Formula& post) {
  NameSupply names;
  return wp(program, post, names);
}

Formula wp_checked(const Program& program, const Formula& post,
                   const VarSet& allowed) {
  check_free(free_vars(program), allowed, "program");
  check_free(free_vars(post), allowed, "post-formula");
  return wp(program, post);
}

}  // namespace episcope
