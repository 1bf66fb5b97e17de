// Corpus-wide equivalences between the explicit-state semantics, the
// weakest-precondition transformer and the first-order translation.

#include <gtest/gtest.h>

#include <algorithm>
#include <functional>

#include "corpus.hpp"
#include "episcope/oracle.hpp"
#include "episcope/parser.hpp"
#include "episcope/translate.hpp"
#include "episcope/wp.hpp"

namespace episcope {
namespace {

constexpr std::uint64_t kCases = 12000;

class Suite : public ::testing::TestWithParam<corpus::Profile> {};
using TranslationCorrect = Suite;
using PostImage = Suite;
using WeakestPrecondition = Suite;
using TestAnnouncement = Suite;
using Translation = Suite;
using Corpus = Suite;

TEST_P(TranslationCorrect, OracleValidityMatchesFirstOrderEnumeration) {
  std::size_t valid = 0;
  for (std::uint64_t i = 0; i < kCases; ++i) {
    const corpus::Case c = corpus::make_case(i, GetParam());
    Oracle oracle = Oracle::for_task(c.task);
    const EpiModel w = oracle.denotation(c.task);
    const bool expected = oracle.valid(w, c.alpha);

    const Formula goal = validity_goal(c.task, c.alpha);
    ASSERT_TRUE(is_first_order(goal));
    bool goal_sat = false;
    for (const State& s : oracle.universe(c.task.vars).states()) {
      if (eval_fo(s, goal, c.task.bound)) {
        goal_sat = true;
        break;
      }
    }
    ASSERT_EQ(expected, !goal_sat) << corpus::describe(c);
    valid += expected;
  }
  // both outcomes must be well represented for the check to mean anything
  EXPECT_GT(valid, kCases / 10);
  EXPECT_LT(valid, kCases - kCases / 10);
}

TEST_P(TranslationCorrect, PointwiseTruthMatchesTranslation) {
  for (std::uint64_t i = 0; i < kCases; ++i) {
    const corpus::Case c = corpus::make_case(i, GetParam());
    Oracle oracle = Oracle::for_task(c.task);
    const EpiModel w = oracle.denotation(c.task);
    const Formula t = tau(c.task.phi, expand_sugar(c.alpha));
    const std::vector<char> ext = oracle.extension(w, c.alpha);
    for (std::size_t k = 0; k < w.size(); ++k) {
      ASSERT_EQ(ext[k] != 0, eval_fo(w.states()[k], t, c.task.bound))
          << corpus::describe(c) << "state "
          << render_state(w.states()[k], c.task.vars);
    }
  }
}

TEST_P(PostImage, ModelSemanticsIsPostImageOfRelationalSemantics) {
  for (std::uint64_t i = 0; i < kCases; ++i) {
    const corpus::Case c = corpus::make_case(i, GetParam());
    Oracle oracle = Oracle::for_task(c.task);
    const EpiModel w = oracle.denotation(c.task);
    const EpiModel forward = oracle.model_sem(w, c.program);
    const EpiModel image = oracle.rel_post(w, c.program);
    ASSERT_TRUE(forward == image) << corpus::describe(c);

    std::vector<State> unioned;
    for (const State& s : w.states()) {
      for (State& t : oracle.rel_sem(w, c.program, s)) unioned.push_back(std::move(t));
    }
    std::sort(unioned.begin(), unioned.end());
    unioned.erase(std::unique(unioned.begin(), unioned.end()), unioned.end());
    ASSERT_EQ(forward.states(), unioned) << corpus::describe(c);
  }
}

TEST_P(WeakestPrecondition, WeakestPreconditionMatchesModelSemantics) {
  std::size_t holds = 0;
  for (std::uint64_t i = 0; i < kCases; ++i) {
    const corpus::Case c = corpus::make_case(i, GetParam());
    Oracle oracle = Oracle::for_task(c.task);
    const EpiModel w = oracle.denotation(c.task);
    const bool after = oracle.valid(oracle.model_sem(w, c.program), c.post);
    const bool before = oracle.valid(w, wp(c.program, c.post));
    ASSERT_EQ(after, before) << corpus::describe(c);
    holds += after;
  }
  EXPECT_GT(holds, kCases / 10);
  EXPECT_LT(holds, kCases - kCases / 10);
}

TEST_P(TestAnnouncement, TestBoxEqualsAnnouncement) {
  for (std::uint64_t i = 0; i < kCases; ++i) {
    const corpus::Case c = corpus::make_case(i, GetParam());
    Oracle oracle = Oracle::for_task(c.task);
    const EpiModel w = oracle.denotation(c.task);
    for (const Formula& body : {c.post, c.alpha}) {
      const Formula boxed = Formula::box(Program::test(c.announced), body);
      const Formula announced = Formula::announce(c.announced, body);
      ASSERT_EQ(oracle.extension(w, boxed), oracle.extension(w, announced))
          << corpus::describe(c);
    }
  }
}

TEST_P(Translation, OutputIsFirstOrderAcrossCorpus) {
  for (std::uint64_t i = 0; i < kCases; ++i) {
    const corpus::Case c = corpus::make_case(i, GetParam());
    const Formula goal = validity_goal(c.task, c.alpha);
    ASSERT_TRUE(is_first_order(goal)) << corpus::describe(c);
    ASSERT_FALSE(contains_box(goal));
    ASSERT_FALSE(contains_sugar(goal));
    for (const Var& v : free_vars(goal)) {
      ASSERT_TRUE(std::find(c.task.vars.begin(), c.task.vars.end(), v) !=
                  c.task.vars.end())
          << v.name;
    }
  }
}

TEST_P(Corpus, RoundTripsThroughTheTaskSyntax) {
  for (std::uint64_t i = 0; i < kCases; ++i) {
    const corpus::Case c = corpus::make_case(i, GetParam());
    ASSERT_EQ(parse_task(render_task(c.task)), c.task) << render_task(c.task);
    ASSERT_EQ(parse_program(render(c.program), c.task), c.program) << render(c.program);
  }
}

TEST_P(Corpus, CoversEveryConstructor) {
  std::set<ProgramKind> programs;
  std::set<FormulaKind> formulas;
  std::function<void(const Program&)> walk_p;
  std::function<void(const Formula&)> walk_f = [&](const Formula& f) {
    formulas.insert(f.kind());
    switch (f.kind()) {
      case FormulaKind::Not:
      case FormulaKind::Knows:
      case FormulaKind::Forall:
        walk_f(f.body());
        break;
      case FormulaKind::And:
        for (const Formula& g : f.operands()) walk_f(g);
        break;
      case FormulaKind::Announce:
      case FormulaKind::Diamond:
        walk_f(f.announced());
        walk_f(f.body());
        break;
      case FormulaKind::Box:
        walk_p(f.program());
        walk_f(f.body());
        break;
      default:
        break;
    }
  };
  walk_p = [&](const Program& p) {
    programs.insert(p.kind());
    switch (p.kind()) {
      case ProgramKind::Test:
        walk_f(p.test_formula());
        break;
      case ProgramKind::New:
        walk_p(p.first());
        break;
      case ProgramKind::Seq:
      case ProgramKind::Choice:
        walk_p(p.first());
        walk_p(p.second());
        break;
      default:
        break;
    }
  };
  for (std::uint64_t i = 0; i < 500; ++i) walk_f(corpus::make_case(i, GetParam()).alpha);
  EXPECT_EQ(programs.size(), 5u);
  for (FormulaKind k : {FormulaKind::Knows, FormulaKind::Announce, FormulaKind::Diamond,
                        FormulaKind::Box, FormulaKind::Forall, FormulaKind::KnowsValue}) {
    EXPECT_TRUE(formulas.contains(k)) << static_cast<int>(k);
  }
}

std::string profile_name(const ::testing::TestParamInfo<corpus::Profile>& info) {
  return info.param.max_vars == corpus::kSmall.max_vars ? "Small" : "Wide";
}

#define EPISCOPE_PROFILES(suite)                                              \
  INSTANTIATE_TEST_SUITE_P(Profiles, suite,                                   \
                           ::testing::Values(corpus::kSmall, corpus::kWide), \
                           profile_name)
EPISCOPE_PROFILES(TranslationCorrect);
EPISCOPE_PROFILES(PostImage);
EPISCOPE_PROFILES(WeakestPrecondition);
EPISCOPE_PROFILES(TestAnnouncement);
EPISCOPE_PROFILES(Translation);
EPISCOPE_PROFILES(Corpus);

}  // namespace
}  // namespace episcope
