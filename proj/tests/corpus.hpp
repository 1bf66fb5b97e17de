#pragma once

// Seeded small-model corpus: Bool program variables, one or two agents,
// programs of depth <= 2 over all five constructors and formulas of depth
// <= 2 over atoms, negation, conjunction, K, [.], <.>, boxes and forall.

#include <cstdint>
#include <ostream>
#include <string>

#include "episcope/ast.hpp"
#include "episcope/task.hpp"

namespace episcope::corpus {

struct Case {
  VerificationTask task;  // a single validity query holding `alpha`
  Formula alpha = Formula::top();
  Program program = Program::skip();
  Formula post = Formula::top();  // box-free and over program variables
  Formula announced = Formula::top();
};

struct Profile {
  std::size_t max_vars = 3;
  std::size_t max_agents = 2;
  int program_depth = 2;
  int formula_depth = 2;
};

inline void PrintTo(const Profile& p, std::ostream* os) {
  *os << p.max_vars << " vars, " << p.max_agents << " agents, program depth "
      << p.program_depth;
}

/// <= 3 variables, <= 2 agents, depth 2 programs and formulas.
inline constexpr Profile kSmall{};
/// <= 4 variables, <= 3 agents, depth 3 programs.
inline constexpr Profile kWide{4, 3, 3, 2};

/// Deterministic in (`index`, `profile`).
Case make_case(std::uint64_t index, const Profile& profile = kSmall);

std::string describe(const Case& c);

}  // namespace episcope::corpus
