#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "episcope/ast.hpp"

namespace episcope {

struct IntRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  std::size_t size() const { return static_cast<std::size_t>(hi - lo + 1); }
  bool contains(std::int64_t v) const { return lo <= v && v <= hi; }
  friend bool operator==(const IntRange&, const IntRange&) = default;
};

/// Finite interpretation of the Int sort for the explicit-state oracle.
/// A variable listed in `per_var` ranges over its own interval; every other
/// Int variable (including quantified and generated ones) over `int_range`.
struct DomainBound {
  std::optional<IntRange> int_range;
  std::map<std::string, IntRange> per_var;

  friend bool operator==(const DomainBound&, const DomainBound&) = default;
};

enum class QueryMode : std::uint8_t { Valid, Sat };

struct Query {
  std::string name;
  QueryMode mode = QueryMode::Valid;
  Formula alpha = Formula::top();

  friend bool operator==(const Query&, const Query&) = default;
};

/// Declarations, an initial condition and the queries to decide.
struct VerificationTask {
  std::vector<Agent> agents;
  std::vector<Var> vars;
  DomainBound bound;
  Formula phi = Formula::top();
  std::vector<Query> queries;

  Signature signature() const { return Signature(agents, vars); }

  friend bool operator==(const VerificationTask&,
                         const VerificationTask&) = default;
};

/// Throws WellFormednessError / FreeVariableError when the task violates its
/// invariants: distinct agent and variable names, observers declared,
/// phi first-order, every formula closed over the program variables.
void validate_task(const VerificationTask& task);

}  // namespace episcope
