#pragma once

// Generators for the two case studies: the Dining Cryptographers protocol
// and Cheryl's birthday puzzle.

#include <optional>
#include <string>
#include <string_view>

#include "episcope/ast.hpp"
#include "episcope/task.hpp"

namespace episcope {

enum class DcQuery : std::uint8_t { Beta1, Beta2, Beta3, Gamma };

std::string_view dc_query_name(DcQuery q);
/// Accepts "beta1".."beta3", "gamma" and the short forms "b1".."b3", "g".
std::optional<DcQuery> parse_dc_query(std::string_view text);

/// The variables of the n-cryptographer instance: x first, then p0..p{n-1},
/// then the coins c{i}_{i+1 mod n}. Agent i is named "a{i}".
struct DcVocabulary {
  std::vector<Agent> agents;
  Var x;
  std::vector<Var> paid;
  std::vector<Var> coins;  // coins[i] is shared by agents i and i+1 mod n
};

DcVocabulary dc_vocabulary(std::size_t n);

/// x := XOR over i of p_i, c_{i-1,i}, c_{i,i+1}.
Program dc_program(const DcVocabulary& v);

/// At most one cryptographer paid.
Formula dc_phi(const DcVocabulary& v);

Formula dc_query(const DcVocabulary& v, DcQuery q);

/// One validity query. Throws WellFormednessError when n < 3.
VerificationTask gen_dc(std::size_t n, DcQuery q);

/// The puzzle as a satisfiability task with the single query "query".
VerificationTask gen_cheryl();

}  // namespace episcope
