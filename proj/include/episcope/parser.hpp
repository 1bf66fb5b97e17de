#pragma once

// Reading and writing `.epi` task files.
//
//   # comment
//   agents a, b
//   var x, y : Bool obs {a}
//   var m : Int obs {a} range 5..8
//   bound 0..9
//   program P = x := not y ; (K[a] x) ?
//   assume x | y
//   check valid after: [prog P] K[a] x
//   check sat <ann K[b] y> Kv[a] m
//
// Formulas, loosest to tightest: binders (forall, exists, [ann b], <ann b>,
// [prog P]) take everything to their right; then <=>, => (right
// associative), |, &, the prefix operators ! K[a] Kv[a]; then the relations
// = != < <= > >=; then the term operators or, xor, and, + -, * mod and the
// prefix term operators not and unary minus. Programs: ';' binds tighter than
// '[]'; `new k : Int obs {a} . P` takes everything to its right; a test is a
// formula followed by '?'.

#include <string>
#include <string_view>

#include "episcope/ast.hpp"
#include "episcope/task.hpp"

namespace episcope {

/// Parses a whole task file. Throws ParseError (with line and column) on any
/// lexical, syntactic, sort or scoping error; never crashes on arbitrary input.
VerificationTask parse_task(std::string_view text);

/// Parses a single formula against the declarations of `context`
/// (its queries and phi are ignored).
Formula parse_formula(std::string_view text, const VerificationTask& context);
Program parse_program(std::string_view text, const VerificationTask& context);

std::string render(const Term& t);
std::string render(const Formula& f);
std::string render(const Program& p);

/// parse_task(render_task(t)) == t for every well-formed task.
std::string render_task(const VerificationTask& task);

}  // namespace episcope
