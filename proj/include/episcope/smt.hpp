#pragma once

// SMT-LIB 2 emission and a one-shot external solver driver.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "episcope/ast.hpp"
#include "episcope/oracle.hpp"
#include "episcope/task.hpp"

namespace episcope {

enum class SolverKind { Z3, Cvc5, Generic };

struct SolverConfig {
  SolverKind kind = SolverKind::Z3;
  /// Empty: $EPISCOPE_SOLVER, else "z3" / "cvc5" by kind.
  std::string executable;
  double timeout_s = 600.0;
  std::optional<std::string> logic;
  bool keep_artifacts = false;
  /// Where the .smt2 text goes when keep_artifacts is set.
  std::string artifact_path;
};

std::string resolve_executable(const SolverConfig& cfg);

enum class GoalMode { Validity, Satisfiability };

enum class VerdictStatus {
  Valid,        // validity goal unsat
  Invalid,      // validity goal sat; model is a countermodel
  PuzzleModel,  // satisfiability goal sat; model is a witness
  NoModel,      // satisfiability goal unsat
  Unknown,
  Timeout,
  SolverError,
};

std::string_view status_name(VerdictStatus s);

struct Verdict {
  VerdictStatus status = VerdictStatus::Unknown;
  std::optional<State> model;
  double wall_time = 0.0;
  std::size_t goal_size = 0;
  std::string raw_output;
  std::string message;
};

struct EmitOptions {
  std::optional<std::string> logic;  // default ALL
  bool get_model = true;
  /// Shared subformulas at least this large become define-fun macros.
  std::size_t share_threshold = 64;
  /// Extra assertions, e.g. blocking clauses.
  std::vector<Formula> extra;
};

/// Deterministic SMT-LIB 2 script asserting `goal`. Declares every program
/// variable of the task and every other free variable of the goal. Throws
/// FragmentError on a non first-order goal.
std::string emit_smtlib(const Formula& goal, const VerificationTask& task,
                        const EmitOptions& options = {});

/// Runs the solver on the script and interprets its answer. A model, when
/// present, assigns every program variable of the task (missing ones
/// default to 0 / false).
Verdict run_solver(const std::string& script, const SolverConfig& cfg,
                   GoalMode mode, const VerificationTask& task);

/// A bound wide enough to re-check `model` against `goal` by enumeration.
DomainBound soundness_bound(const VerificationTask& task, const Formula& goal,
                            const State& model);
/// eval_fo of the goal at the model under soundness_bound.
bool model_satisfies(const VerificationTask& task, const Formula& goal,
                     const State& model);

/// Up to `limit` distinct models of the goal over the program variables,
/// found by re-solving with blocking clauses. Stops early on unsat; throws
/// SolverError on any other non-sat answer.
std::vector<State> enumerate_models(const Formula& goal,
                                    const VerificationTask& task,
                                    const SolverConfig& cfg, std::size_t limit);

struct QueryResult {
  std::string name;
  QueryMode mode = QueryMode::Valid;
  Verdict verdict;
  double translation_s = 0.0;
  std::size_t script_bytes = 0;
  /// Set when a model was returned: whether it re-evaluates true.
  std::optional<bool> model_sound;
};

/// Translates, emits, solves and re-checks one query.
QueryResult verify_query(const VerificationTask& task, const Query& query,
                         const SolverConfig& cfg, bool simplify_goal = false);

}  // namespace episcope
