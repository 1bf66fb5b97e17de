#include "episcope/task.hpp"

#include <set>

namespace episcope {

void validate_task(const VerificationTask& task) {
  std::set<std::string> agents;
  for (const Agent& a : task.agents) {
    if (a.empty()) throw WellFormednessError("empty agent name");
    if (!agents.insert(a).second) {
      throw WellFormednessError("duplicate agent " + a);
    }
  }
  std::set<std::string> names;
  for (const Var& v : task.vars) {
    if (!names.insert(v.name).second) {
      throw WellFormednessError("duplicate variable " + v.name);
    }
    if (v.sort == Sort::ChoiceTag) {
      throw WellFormednessError("program variable " + v.name +
                                " cannot have the choice-tag sort");
    }
    for (const Agent& a : v.observers) {
      if (!agents.contains(a)) {
        throw WellFormednessError("variable " + v.name +
                                  " is observed by undeclared agent " + a);
      }
    }
  }
  for (const auto& [name, range] : task.bound.per_var) {
    const Var* v = nullptr;
    for (const Var& candidate : task.vars) {
      if (candidate.name == name) v = &candidate;
    }
    if (v == nullptr) {
      throw WellFormednessError("range given for undeclared variable " + name);
    }
    if (v->sort != Sort::Int) {
      throw WellFormednessError("range given for non-Int variable " + name);
    }
    if (range.hi < range.lo) {
      throw WellFormednessError("empty range for variable " + name);
    }
  }
  if (task.bound.int_range && task.bound.int_range->hi < task.bound.int_range->lo) {
    throw WellFormednessError("empty default range");
  }
  if (!is_first_order(task.phi)) {
    throw WellFormednessError("initial condition must be first-order");
  }
  const Signature sig = task.signature();
  sig.validate(task.phi);
  std::set<std::string> queries;
  for (const Query& q : task.queries) {
    if (!queries.insert(q.name).second) {
      throw WellFormednessError("duplicate query name " + q.name);
    }
    sig.validate(q.alpha);
  }
}

}  // namespace episcope
