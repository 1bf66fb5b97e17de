#include <gtest/gtest.h>

#include <sys/stat.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "corpus.hpp"
#include "episcope/benchmarks.hpp"
#include "episcope/oracle.hpp"
#include "episcope/parser.hpp"
#include "episcope/smt.hpp"
#include "episcope/translate.hpp"

namespace episcope {
namespace {

namespace fs = std::filesystem;

const Var xa{"x_a", {"a"}, Sort::Int};
const Var pb{"p", {"b"}, Sort::Bool};

Term v(const Var& x) { return Term::var(x); }
Term n(std::int64_t i) { return Term::integer(i); }

VerificationTask int_task() {
  VerificationTask t;
  t.agents = {"a", "b"};
  t.vars = {xa, pb};
  t.bound.int_range = IntRange{0, 3};
  t.phi = Formula::lt(n(0), v(xa));
  return t;
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t c = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++c;
  return c;
}

bool have_solver() {
  return std::system("command -v z3 > /dev/null 2>&1") == 0 ||
         std::getenv("EPISCOPE_SOLVER") != nullptr;
}

#define REQUIRE_SOLVER() \
  if (!have_solver()) GTEST_SKIP() << "no SMT solver on PATH"

std::string fake_solver(const std::string& name, const std::string& body) {
  const fs::path p = fs::temp_directory_path() / ("episcope-fake-" + name + ".sh");
  std::ofstream(p) << "#!/bin/sh\n" << body << "\n";
  chmod(p.c_str(), 0755);
  return p.string();
}

TEST(Emit, DeclaresAndAsserts) {
  const VerificationTask t = int_task();
  const std::string s = emit_smtlib(Formula::eq(v(xa), n(0)), t);
  EXPECT_EQ(count(s, "(declare-const x_a Int)"), 1u);
  EXPECT_EQ(count(s, "(declare-const p Bool)"), 1u);
  EXPECT_EQ(count(s, "(assert "), 1u);
  EXPECT_NE(s.find("(assert (= x_a 0))"), std::string::npos);
  EXPECT_NE(s.find("(set-option :produce-models true)"), std::string::npos);
  EXPECT_NE(s.find("(set-logic ALL)"), std::string::npos);
  EXPECT_LT(s.find("(check-sat)"), s.find("(get-model)"));
}

TEST(Emit, QuantifierBlock) {
  const VerificationTask t = int_task();
  const Var k{"k", {"a"}, Sort::Int};
  const Var j{"j", {"a"}, Sort::Bool};
  const std::string s = emit_smtlib(
      Formula::forall(k, Formula::forall(j, Formula::lt(v(k), v(xa)))), t);
  EXPECT_NE(s.find("(assert (forall ((k Int) (j Bool)) (< k x_a)))"), std::string::npos) << s;
}

TEST(Emit, OperatorsAndLiterals) {
  const VerificationTask t = int_task();
  const Formula f = Formula::conj(
      Formula::eq(Term::mod(Term::add(v(xa), n(-5)), n(3)), Term::neg(v(xa))),
      Formula::holds(Term::lxor(v(pb), Term::lnot(v(pb)))));
  const std::string s = emit_smtlib(f, t);
  EXPECT_NE(s.find("(= (mod (+ x_a (- 5)) 3) (- x_a))"), std::string::npos) << s;
  EXPECT_NE(s.find("(xor p (not p))"), std::string::npos) << s;
  EmitOptions no_model;
  no_model.get_model = false;
  no_model.logic = "UFNIA";
  const std::string s2 = emit_smtlib(f, t, no_model);
  EXPECT_EQ(s2.find("(get-model)"), std::string::npos);
  EXPECT_NE(s2.find("(set-logic UFNIA)"), std::string::npos);
}

TEST(Emit, ChoiceTagSort) {
  const VerificationTask t = int_task();
  const Var c{"c__0", {"a", "b"}, Sort::ChoiceTag};
  const std::string s =
      emit_smtlib(Formula::eq(v(c), Term::tag(ChoiceTag::Right)), t);
  EXPECT_NE(s.find("(declare-datatype __Tag ((__tag_l) (__tag_r)))"), std::string::npos);
  EXPECT_NE(s.find("(declare-const c__0 __Tag)"), std::string::npos);
  EXPECT_NE(s.find("(= c__0 __tag_r)"), std::string::npos);
  EXPECT_EQ(emit_smtlib(Formula::top(), t).find("__Tag"), std::string::npos);
}

TEST(Emit, QuotesReservedWords) {
  VerificationTask t;
  t.agents = {"a"};
  t.vars = {Var{"ite", {}, Sort::Int}};
  const std::string s = emit_smtlib(Formula::eq(Term::var(t.vars[0]), n(1)), t);
  EXPECT_NE(s.find("(declare-const |ite| Int)"), std::string::npos);
}

TEST(Emit, SharesRepeatedSubformulas) {
  VerificationTask t = gen_dc(10, DcQuery::Beta1);
  const Formula g = query_goal(t, t.queries[0]);
  const std::string s = emit_smtlib(g, t);
  EXPECT_NE(s.find("(define-fun __d0"), std::string::npos);
  EmitOptions flat;
  flat.share_threshold = std::numeric_limits<std::size_t>::max();
  EXPECT_EQ(emit_smtlib(g, t, flat).find("define-fun"), std::string::npos);
}

TEST(Emit, Deterministic) {
  for (std::uint64_t i = 0; i < 500; ++i) {
    const corpus::Case c = corpus::make_case(i);
    const Formula g1 = validity_goal(c.task, c.alpha);
    const Formula g2 = validity_goal(c.task, c.alpha);
    EXPECT_EQ(emit_smtlib(g1, c.task), emit_smtlib(g2, c.task));
  }
}

TEST(Emit, RejectsNonFirstOrderGoal) {
  EXPECT_THROW(emit_smtlib(Formula::knows("a", Formula::top()), int_task()), FragmentError);
}

TEST(Solver, ValidityOfTop) {
  REQUIRE_SOLVER();
  const VerificationTask t = int_task();
  const Verdict v = run_solver(emit_smtlib(validity_goal(t, Formula::top()), t),
                               SolverConfig{}, GoalMode::Validity, t);
  EXPECT_EQ(v.status, VerdictStatus::Valid) << v.raw_output;
  EXPECT_FALSE(v.model.has_value());
}

TEST(Solver, ValidityOfBottomGivesCountermodel) {
  REQUIRE_SOLVER();
  const VerificationTask t = int_task();
  const Formula g = validity_goal(t, Formula::bottom());
  const Verdict v = run_solver(emit_smtlib(g, t), SolverConfig{}, GoalMode::Validity, t);
  ASSERT_EQ(v.status, VerdictStatus::Invalid) << v.raw_output;
  ASSERT_TRUE(v.model.has_value());
  EXPECT_GT(v.model->at("x_a"), 0);
  EXPECT_TRUE(model_satisfies(t, g, *v.model));
  EXPECT_TRUE(eval_fo(*v.model, t.phi, soundness_bound(t, g, *v.model)));
}

TEST(Solver, NegativeModelValues) {
  REQUIRE_SOLVER();
  VerificationTask t = int_task();
  t.phi = Formula::top();
  const Formula g = Formula::conj(Formula::eq(Term::add(v(xa), n(7)), n(0)),
                                  Formula::holds(v(pb)));
  const Verdict v = run_solver(emit_smtlib(g, t), SolverConfig{}, GoalMode::Satisfiability, t);
  ASSERT_EQ(v.status, VerdictStatus::PuzzleModel) << v.raw_output;
  EXPECT_EQ(v.model->at("x_a"), -7);
  EXPECT_EQ(v.model->at("p"), 1);
  EXPECT_TRUE(model_satisfies(t, g, *v.model));
}

TEST(Solver, SatisfiabilityWithoutModel) {
  REQUIRE_SOLVER();
  const VerificationTask t = int_task();
  const Formula g = satisfiability_goal(t, Formula::lt(v(xa), n(0)));
  const Verdict v = run_solver(emit_smtlib(g, t), SolverConfig{}, GoalMode::Satisfiability, t);
  EXPECT_EQ(v.status, VerdictStatus::NoModel) << v.raw_output;
}

TEST(Solver, DiningCryptographersBeta2) {
  REQUIRE_SOLVER();
  const VerificationTask t = gen_dc(3, DcQuery::Beta2);
  const QueryResult r = verify_query(t, t.queries[0], SolverConfig{});
  EXPECT_EQ(r.verdict.status, VerdictStatus::Valid) << r.verdict.raw_output;
  EXPECT_GT(r.verdict.goal_size, 0u);
  EXPECT_GT(r.script_bytes, 0u);
}

TEST(Solver, CherylPuzzleModel) {
  REQUIRE_SOLVER();
  const VerificationTask t = gen_cheryl();
  const QueryResult r = verify_query(t, t.queries[0], SolverConfig{});
  ASSERT_EQ(r.verdict.status, VerdictStatus::PuzzleModel) << r.verdict.raw_output;
  EXPECT_EQ(r.verdict.model->at("m_a"), 7);
  EXPECT_EQ(r.verdict.model->at("d_b"), 16);
  EXPECT_EQ(r.model_sound, std::optional<bool>(true));
}

TEST(Solver, MissingExecutable) {
  SolverConfig cfg;
  cfg.executable = "/nonexistent/solver";
  const Verdict v = run_solver("(check-sat)\n", cfg, GoalMode::Validity, int_task());
  EXPECT_EQ(v.status, VerdictStatus::SolverError);
  EXPECT_FALSE(v.message.empty());
}

TEST(Solver, Timeout) {
  SolverConfig cfg;
  cfg.kind = SolverKind::Generic;
  cfg.executable = fake_solver("sleep", "sleep 10; echo unsat");
  cfg.timeout_s = 0.3;
  const Verdict v = run_solver("(check-sat)\n", cfg, GoalMode::Validity, int_task());
  EXPECT_EQ(v.status, VerdictStatus::Timeout);
  EXPECT_LT(v.wall_time, 5.0);
}

TEST(Solver, UnknownAndGarbage) {
  SolverConfig cfg;
  cfg.kind = SolverKind::Generic;
  cfg.executable = fake_solver("unknown", "echo unknown");
  EXPECT_EQ(run_solver("", cfg, GoalMode::Validity, int_task()).status, VerdictStatus::Unknown);
  cfg.executable = fake_solver("garbage", "echo '(error \"boom\")'; exit 1");
  const Verdict v = run_solver("", cfg, GoalMode::Validity, int_task());
  EXPECT_EQ(v.status, VerdictStatus::SolverError);
  EXPECT_NE(v.raw_output.find("boom"), std::string::npos);
  cfg.executable = fake_solver("crash", "echo sat; exit 3");
  EXPECT_EQ(run_solver("", cfg, GoalMode::Validity, int_task()).status,
            VerdictStatus::SolverError);
}

TEST(Solver, ParsesModelSyntax) {
  SolverConfig cfg;
  cfg.kind = SolverKind::Generic;
  cfg.executable = fake_solver(
      "model",
      "echo sat; echo '(\n  (define-fun |x_a| () Int\n    (- 12))\n"
      "  (define-fun p () Bool true)\n  (define-fun f ((y Int)) Int y)\n)'");
  const Verdict v = run_solver("", cfg, GoalMode::Validity, int_task());
  ASSERT_EQ(v.status, VerdictStatus::Invalid) << v.message;
  EXPECT_EQ(v.model->at("x_a"), -12);
  EXPECT_EQ(v.model->at("p"), 1);
}

TEST(Solver, RejectsNonPositiveTimeout) {
  SolverConfig cfg;
  cfg.timeout_s = 0;
  EXPECT_THROW(run_solver("", cfg, GoalMode::Validity, int_task()), SolverError);
}

TEST(Solver, EnvironmentOverridesExecutable) {
  SolverConfig cfg;
  const char* old = std::getenv("EPISCOPE_SOLVER");
  const std::string saved = old ? old : "";
  setenv("EPISCOPE_SOLVER", "/opt/other-z3", 1);
  EXPECT_EQ(resolve_executable(cfg), "/opt/other-z3");
  cfg.executable = "explicit";
  EXPECT_EQ(resolve_executable(cfg), "explicit");
  if (old) {
    setenv("EPISCOPE_SOLVER", saved.c_str(), 1);
  } else {
    unsetenv("EPISCOPE_SOLVER");
  }
  SolverConfig cvc;
  cvc.kind = SolverKind::Cvc5;
  if (!old) {
    EXPECT_EQ(resolve_executable(cvc), "cvc5");
  }
}

TEST(Solver, KeepsArtifacts) {
  REQUIRE_SOLVER();
  const VerificationTask t = int_task();
  SolverConfig cfg;
  cfg.keep_artifacts = true;
  cfg.artifact_path = (fs::temp_directory_path() / "episcope-artifact.smt2").string();
  const std::string script = emit_smtlib(validity_goal(t, Formula::top()), t);
  run_solver(script, cfg, GoalMode::Validity, t);
  std::ifstream in(cfg.artifact_path);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), script);
}

TEST(Solver, AgreesWithOracleOnCorpus) {
  REQUIRE_SOLVER();
  std::size_t invalid = 0;
  for (std::uint64_t i = 0; i < 300; ++i) {
    const corpus::Case c = corpus::make_case(i);
    Oracle o = Oracle::for_task(c.task);
    const bool expected = o.valid(o.denotation(c.task), c.alpha);
    const QueryResult r = verify_query(c.task, c.task.queries[0], SolverConfig{});
    ASSERT_TRUE(r.verdict.status == VerdictStatus::Valid ||
                r.verdict.status == VerdictStatus::Invalid)
        << status_name(r.verdict.status) << r.verdict.raw_output;
    EXPECT_EQ(r.verdict.status == VerdictStatus::Valid, expected) << corpus::describe(c);
    if (r.verdict.status == VerdictStatus::Invalid) {
      ++invalid;
      ASSERT_TRUE(r.verdict.model.has_value());
      EXPECT_EQ(r.model_sound, std::optional<bool>(true)) << corpus::describe(c);
      // a countermodel is a state of [[phi]] where alpha fails
      EXPECT_TRUE(eval_fo(*r.verdict.model, c.task.phi, c.task.bound));
      EXPECT_FALSE(o.eval(o.denotation(c.task), *r.verdict.model, c.alpha));
    }
  }
  EXPECT_GT(invalid, 30u);
}

TEST(Solver, EnumeratesAllModels) {
  REQUIRE_SOLVER();
  VerificationTask t = int_task();
  const Formula g = satisfiability_goal(t, Formula::lt(v(xa), n(3)));
  const std::vector<State> models = enumerate_models(g, t, SolverConfig{}, 100);
  // x in {1, 2}, p free
  EXPECT_EQ(models.size(), 4u);
}

}  // namespace
}  // namespace episcope
