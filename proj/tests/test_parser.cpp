#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "episcope/benchmarks.hpp"
#include "episcope/parser.hpp"

namespace episcope {
namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ParseError parse_error(std::string_view text) {
  try {
    parse_task(text);
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "parsed without error: " << text;
  return ParseError(0, 0, "none");
}

const char* const kSmall = R"(agents a, b
var x, y : Bool obs {a}
var n : Int obs {b} range 0..3
bound 0..9
)";

VerificationTask context() { return parse_task(kSmall); }

TEST(ParseTask, MinimalFileOnOneLine) {
  const VerificationTask t =
      parse_task("agents A,B  var x : Bool obs {A,B}  assume true  check valid K[A](x = x)");
  EXPECT_EQ(t.agents.size(), 2u);
  ASSERT_EQ(t.vars.size(), 1u);
  EXPECT_EQ(t.vars[0].observers, (AgentSet{"A", "B"}));
  ASSERT_EQ(t.queries.size(), 1u);
  EXPECT_EQ(t.queries[0].mode, QueryMode::Valid);
  const Var x = t.vars[0];
  EXPECT_EQ(t.queries[0].alpha,
            Formula::knows("A", Formula::eq(Term::var(x), Term::var(x))));
}

TEST(ParseTask, UndeclaredAgentHasPosition) {
  const ParseError e = parse_error("agents A\nvar x : Bool obs {A}\ncheck valid K[C] x\n");
  EXPECT_NE(std::string(e.what()).find("undeclared agent C"), std::string::npos) << e.what();
  EXPECT_EQ(e.line(), 3u);
  EXPECT_EQ(e.column(), 15u);
}

TEST(ParseTask, UndeclaredVariable) {
  const ParseError e = parse_error("agents a\nvar x : Bool\ncheck valid x & y\n");
  EXPECT_NE(std::string(e.what()).find("undeclared variable y"), std::string::npos);
  EXPECT_EQ(e.line(), 3u);
}

TEST(ParseTask, LexicalErrors) {
  EXPECT_EQ(parse_error("agents a\nvar x : Int\ncheck valid x = 3a\n").line(), 3u);
  parse_error("agents a $");
  parse_error("agents a\nvar x__1 : Bool\n");
}

TEST(ParseTask, SortErrors) {
  parse_error("agents a\nvar x : Bool\ncheck valid x + 1 = 2\n");
  parse_error("agents a\nvar n : Int\ncheck valid n\n");
  parse_error("agents a\nvar n : Bool range 0..3\n");
}

TEST(ParseTask, RejectsNonFirstOrderAssumption) {
  parse_error("agents a\nvar x : Bool\nassume K[a] x\n");
}

TEST(ParseTask, RejectsShadowingBinder) {
  parse_error("agents a\nvar x : Bool\ncheck valid forall x : Bool . x\n");
}

TEST(ParseTask, RejectsDuplicateDeclarations) {
  parse_error("agents a, a\n");
  parse_error("agents a\nvar x : Bool\nvar x : Int\n");
  parse_error("agents a\nvar x : Bool\ncheck valid q: x\ncheck valid q: x\n");
}

TEST(ParseTask, DefaultQueryNames) {
  const VerificationTask t =
      parse_task("agents a\nvar x : Bool\ncheck valid x\ncheck sat x\ncheck valid named: x\n");
  ASSERT_EQ(t.queries.size(), 3u);
  EXPECT_EQ(t.queries[0].name, "query");
  EXPECT_EQ(t.queries[1].name, "query2");
  EXPECT_EQ(t.queries[1].mode, QueryMode::Sat);
  EXPECT_EQ(t.queries[2].name, "named");
}

TEST(ParseTask, RangesAndBound) {
  const VerificationTask t = context();
  EXPECT_EQ(t.bound.int_range, (IntRange{0, 9}));
  EXPECT_EQ(t.bound.per_var.at("n"), (IntRange{0, 3}));
}

TEST(ParseFormula, Precedence) {
  const VerificationTask t = context();
  const Term x = Term::var(t.vars[0]);
  const Term y = Term::var(t.vars[1]);
  const Formula fx = Formula::holds(x);
  const Formula fy = Formula::holds(y);
  EXPECT_EQ(parse_formula("!x & y", t), Formula::conj(Formula::negate(fx), fy));
  EXPECT_EQ(parse_formula("!(x & y)", t), Formula::negate(Formula::conj(fx, fy)));
  EXPECT_EQ(parse_formula("x | y & x", t), Formula::disj(fx, Formula::conj(fy, fx)));
  EXPECT_EQ(parse_formula("x => y => x", t),
            Formula::implies(fx, Formula::implies(fy, fx)));
  EXPECT_EQ(parse_formula("K[a] x & y", t), Formula::conj(Formula::knows("a", fx), fy));
  EXPECT_EQ(parse_formula("[ann x] x & y", t),
            Formula::announce(fx, Formula::conj(fx, fy)));
  EXPECT_EQ(parse_formula("x xor y", t), Formula::holds(Term::lxor(x, y)));
  EXPECT_EQ(parse_formula("not x = y", t), Formula::eq(Term::lnot(x), y));
}

TEST(ParseFormula, BindersAndSugar) {
  const VerificationTask t = context();
  const Var q{"q", {"a", "b"}, Sort::Int};
  const Term n = Term::var(t.vars[2]);
  EXPECT_EQ(parse_formula("forall q : Int obs {a, b} . q < n", t),
            Formula::forall(q, Formula::lt(Term::var(q), n)));
  EXPECT_EQ(parse_formula("exists q : Int obs {a, b} . q < n", t),
            Formula::exists(q, Formula::lt(Term::var(q), n)));
  EXPECT_EQ(parse_formula("Kv[a] n", t), Formula::knows_value("a", n));
  EXPECT_EQ(parse_formula("n >= 2 & n != 3", t),
            Formula::conj(Formula::ge(n, Term::integer(2)), Formula::neq(n, Term::integer(3))));
  EXPECT_EQ(parse_formula("n = -2", t), Formula::eq(n, Term::integer(-2)));
}

TEST(ParseProgram, SequenceBindsTighterThanChoice) {
  const VerificationTask t = context();
  const Var x = t.vars[0];
  const Var y = t.vars[1];
  const Program a = Program::assign(x, Term::var(y));
  const Program b = Program::test(Formula::holds(Term::var(x)));
  const Program c = Program::assign(y, Term::boolean(true));
  EXPECT_EQ(parse_program("x := y ; x ? [] y := true", t),
            Program::choice(Program::seq(a, b), c));
  EXPECT_EQ(parse_program("x := y ; (x ? [] y := true)", t),
            Program::seq(a, Program::choice(b, c)));
}

TEST(ParseProgram, NewAndKnowledgeTests) {
  const VerificationTask t = context();
  const Var k{"k", {"a"}, Sort::Bool};
  const Var x = t.vars[0];
  EXPECT_EQ(parse_program("new k : Bool obs {a} . k := x ; (K[a] k) ?", t),
            Program::declare(k, Program::seq(Program::assign(k, Term::var(x)),
                                             Program::test(Formula::knows(
                                                 "a", Formula::holds(Term::var(k)))))));
}

TEST(ParseTask, NamedPrograms) {
  const VerificationTask t = parse_task(
      "agents a\nvar x : Bool obs {a}\nprogram P = x := not x\n"
      "program Q = P ; P\ncheck valid [prog Q] x = x\n");
  const Var x = t.vars[0];
  const Program p = Program::assign(x, Term::lnot(Term::var(x)));
  EXPECT_EQ(t.queries[0].alpha,
            Formula::box(Program::seq(p, p), Formula::eq(Term::var(x), Term::var(x))));
}

TEST(Render, NegatedConjunctionKeepsParentheses) {
  const VerificationTask t = context();
  const Formula f = Formula::negate(
      Formula::conj(Formula::holds(Term::var(t.vars[0])), Formula::holds(Term::var(t.vars[1]))));
  EXPECT_EQ(parse_formula(render(f), t), f);
  EXPECT_NE(parse_formula(render(f), t),
            Formula::conj(Formula::negate(Formula::holds(Term::var(t.vars[0]))),
                          Formula::holds(Term::var(t.vars[1]))));
}

TEST(Render, EmptyQueryTaskRoundTrips) {
  const VerificationTask t = context();
  EXPECT_EQ(parse_task(render_task(t)), t);
}

TEST(Render, GeneratedCaseStudiesRoundTrip) {
  for (std::size_t n = 3; n <= 12; ++n) {
    for (DcQuery q : {DcQuery::Beta1, DcQuery::Beta2, DcQuery::Beta3, DcQuery::Gamma}) {
      const VerificationTask t = gen_dc(n, q);
      EXPECT_EQ(parse_task(render_task(t)), t) << n << " " << dc_query_name(q);
    }
  }
  const VerificationTask c = gen_cheryl();
  EXPECT_EQ(parse_task(render_task(c)), c);
}

TEST(BundledTasks, MatchTheGenerators) {
  const std::string dir = EPISCOPE_TASKS_DIR;
  for (DcQuery q : {DcQuery::Beta1, DcQuery::Beta2, DcQuery::Beta3, DcQuery::Gamma}) {
    const std::string path = dir + "/dc3_" + std::string(dc_query_name(q)) + ".epi";
    EXPECT_EQ(parse_task(slurp(path)), gen_dc(3, q)) << path;
  }
  EXPECT_EQ(parse_task(slurp(dir + "/cheryl.epi")), gen_cheryl());
}

TEST(ParseTask, DeepNestingIsAnErrorNotACrash) {
  std::string deep = "agents a\nvar x : Bool\ncheck valid ";
  for (int i = 0; i < 100000; ++i) deep += '(';
  deep += 'x';
  parse_error(deep);
  std::string negs = "agents a\nvar x : Bool\ncheck valid ";
  for (int i = 0; i < 100000; ++i) negs += '!';
  negs += 'x';
  parse_error(negs);
}

}  // namespace
}  // namespace episcope
