#pragma once

// Explicit-state semantics over finite domains.
//
// A model is a finite set of states; a state maps variable names to values
// (Bool and ChoiceTag as 0/1, Int as int64). Agent a cannot tell s from s'
// when they agree on every variable a observes in dom(s) and dom(s'). Truth
// of epistemic formulas and the two relational semantics of programs are
// computed by enumeration; quantifiers and `new` range over the bounded
// domain of the variable's sort.

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "episcope/ast.hpp"
#include "episcope/task.hpp"

namespace episcope {

using Value = std::int64_t;
using State = std::map<std::string, Value>;

inline constexpr std::size_t kDefaultStateCap = std::size_t{1} << 20;

/// Values a variable ranges over: {0, 1} for Bool and ChoiceTag, the
/// variable's own interval or the default interval for Int. Throws
/// WellFormednessError when an Int variable has no interval.
std::vector<Value> domain_of(const Var& v, const DomainBound& bound);

Value eval_term(const Term& t, const State& s);

/// First-order truth at a single state, quantifiers enumerated over the
/// bound. Throws FragmentError on epistemic or dynamic operators and
/// WellFormednessError on a variable outside dom(s).
bool eval_fo(const State& s, const Formula& phi, const DomainBound& bound);
/// As eval_fo, giving up (nullopt) after `max_steps` node visits.
std::optional<bool> eval_fo_bounded(const State& s, const Formula& phi,
                                    const DomainBound& bound,
                                    std::size_t max_steps);

struct ModelData;

class EpiModel {
 public:
  EpiModel();
  /// States are sorted and deduplicated. Every name in a state must appear
  /// in `vars`.
  EpiModel(std::vector<Var> vars, std::vector<State> states);

  const std::vector<State>& states() const&;
  /// A copy, so iterating the states of a temporary model is safe.
  std::vector<State> states() const&&;
  std::size_t size() const;
  bool empty() const { return size() == 0; }
  /// Variables occurring in some state, keyed by name.
  const std::map<std::string, Var>& vars() const;
  std::set<std::string> dom() const;

  bool contains(const State& s) const;
  /// Position of s in states(), or size() when absent.
  std::size_t index_of(const State& s) const;

  bool indistinguishable(const Agent& a, const State& s, const State& t) const;

  const ModelData* id() const { return data_.get(); }

  friend bool operator==(const EpiModel& a, const EpiModel& b);

 private:
  explicit EpiModel(std::shared_ptr<const ModelData> data)
      : data_(std::move(data)) {}
  friend class Oracle;
  std::shared_ptr<const ModelData> data_;
};

struct ModelData {
  std::map<std::string, Var> vars;
  std::vector<State> states;
};

struct PlanNode;

/// Evaluation engine. Caches results per (model, formula) pair, so one
/// instance should serve a batch of related queries. Not thread-safe;
/// use one instance per thread.
class Oracle {
 public:
  Oracle(AgentSet agents, DomainBound bound,
         std::size_t max_states = kDefaultStateCap);
  ~Oracle();
  Oracle(Oracle&&) noexcept;
  Oracle& operator=(Oracle&&) noexcept;

  static Oracle for_task(const VerificationTask& task,
                         std::size_t max_states = kDefaultStateCap);

  const DomainBound& bound() const { return bound_; }
  std::size_t max_states() const { return max_states_; }

  /// Every valuation of `vars`. Throws StateCapExceeded beyond the cap.
  EpiModel universe(const std::vector<Var>& vars) const;
  /// States of `w` satisfying the first-order formula `phi`.
  EpiModel restrict_fo(const EpiModel& w, const Formula& phi) const;
  /// [[phi]] over the program variables of the task.
  EpiModel denotation(const VerificationTask& task) const;

  /// (W, s) |= alpha. Kv is expanded first. Throws WellFormednessError
  /// when s is not a state of W.
  bool eval(const EpiModel& w, const State& s, const Formula& alpha);
  /// Truth value of alpha at every state of W, in the order of states().
  std::vector<char> extension(const EpiModel& w, const Formula& alpha);
  /// W |= alpha: alpha holds at every state.
  bool valid(const EpiModel& w, const Formula& alpha);

  /// R_W(P, s). Fresh names avoid dom(W), the names of P and `avoid`, and
  /// are chosen identically by rel_sem, rel_post and model_sem.
  std::vector<State> rel_sem(const EpiModel& w, const Program& p,
                             const State& s,
                             const std::set<std::string>& avoid = {});
  /// R*_W(P, W): the union of R_W(P, s) over s in W.
  EpiModel rel_post(const EpiModel& w, const Program& p,
                    const std::set<std::string>& avoid = {});
  /// F(P, W).
  EpiModel model_sem(const EpiModel& w, const Program& p,
                     const std::set<std::string>& avoid = {});

  void clear_cache();

 private:
  struct Cache;

  const std::vector<char>& ext(const EpiModel& w, const Formula& f);
  EpiModel make_model(std::map<std::string, Var> vars,
                      std::vector<State> states) const;
  EpiModel submodel(const EpiModel& w, const std::vector<char>& keep) const;
  EpiModel extend(const EpiModel& w, const Var& x) const;
  std::shared_ptr<const PlanNode> plan(const EpiModel& w, const Program& p,
                                       const std::set<std::string>& avoid) const;
  std::shared_ptr<const PlanNode> cached_plan(const EpiModel& w,
                                              const Program& p,
                                              const std::set<std::string>& avoid);
  struct Image;
  const Image& rel_image(const PlanNode& node, const EpiModel& w);
  EpiModel forward(const PlanNode& node, const EpiModel& w);
  void check_cap(std::size_t n) const;
  Formula prepare(const EpiModel& w, const Formula& alpha) const;

  AgentSet agents_;
  DomainBound bound_;
  std::size_t max_states_;
  std::unique_ptr<Cache> cache_;
};

/// {s in [[phi]] | ([[phi]], s) |= alpha}.
std::vector<State> solve_puzzle(const VerificationTask& task,
                                const Formula& alpha,
                                std::size_t max_states = kDefaultStateCap);

/// Restriction of a state to the program variables of a task, rendered as
/// name=value pairs (true/false for Bool).
std::string render_state(const State& s, const std::vector<Var>& vars);

}  // namespace episcope
