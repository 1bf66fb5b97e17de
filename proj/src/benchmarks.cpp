#include "episcope/benchmarks.hpp"

#include <utility>

namespace episcope {

std::string_view dc_query_name(DcQuery q) {
  switch (q) {
    case DcQuery::Beta1: return "beta1";
    case DcQuery::Beta2: return "beta2";
    case DcQuery::Beta3: return "beta3";
    case DcQuery::Gamma: return "gamma";
  }
  return "beta1";
}

std::optional<DcQuery> parse_dc_query(std::string_view text) {
  if (text == "beta1" || text == "b1") return DcQuery::Beta1;
  if (text == "beta2" || text == "b2") return DcQuery::Beta2;
  if (text == "beta3" || text == "b3") return DcQuery::Beta3;
  if (text == "gamma" || text == "g") return DcQuery::Gamma;
  return std::nullopt;
}

DcVocabulary dc_vocabulary(std::size_t n) {
  if (n < 3) {
    throw WellFormednessError("the protocol needs at least 3 cryptographers, got " +
                              std::to_string(n));
  }
  DcVocabulary v;
  for (std::size_t i = 0; i < n; ++i) v.agents.push_back("a" + std::to_string(i));
  v.x = Var{"x", AgentSet(v.agents.begin(), v.agents.end()), Sort::Bool};
  for (std::size_t i = 0; i < n; ++i) {
    v.paid.push_back(Var{"p" + std::to_string(i), {v.agents[i]}, Sort::Bool});
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    v.coins.push_back(Var{"c" + std::to_string(i) + "_" + std::to_string(j),
                          {v.agents[i], v.agents[j]},
                          Sort::Bool});
  }
  return v;
}

Program dc_program(const DcVocabulary& v) {
  const std::size_t n = v.paid.size();
  std::optional<Term> e;
  auto push = [&e](const Var& var) {
    Term t = Term::var(var);
    e = e ? Term::lxor(*e, t) : t;
  };
  for (std::size_t i = 0; i < n; ++i) {
    push(v.paid[i]);
    push(v.coins[(i + n - 1) % n]);
    push(v.coins[i]);
  }
  return Program::assign(v.x, *e);
}

namespace {

Formula atom(const Var& v) { return Formula::holds(Term::var(v)); }

Formula none_of_others(const DcVocabulary& v, std::size_t except) {
  std::vector<Formula> ops;
  for (std::size_t j = 0; j < v.paid.size(); ++j) {
    if (j != except) ops.push_back(Formula::negate(atom(v.paid[j])));
  }
  return Formula::conj(std::move(ops));
}

Formula x_iff_someone_paid(const DcVocabulary& v) {
  std::vector<Formula> ops;
  for (const Var& p : v.paid) ops.push_back(atom(p));
  return Formula::iff(atom(v.x), Formula::disj(std::move(ops)));
}

}  // namespace

Formula dc_phi(const DcVocabulary& v) {
  std::vector<Formula> ops;
  for (std::size_t i = 0; i < v.paid.size(); ++i) {
    ops.push_back(Formula::implies(atom(v.paid[i]), none_of_others(v, i)));
  }
  return Formula::conj(std::move(ops));
}

Formula dc_query(const DcVocabulary& v, DcQuery q) {
  const Program p = dc_program(v);
  const Agent& zero = v.agents[0];
  switch (q) {
    case DcQuery::Beta1: {
      std::vector<Formula> unknown;
      for (std::size_t i = 1; i < v.paid.size(); ++i) {
        unknown.push_back(Formula::negate(Formula::knows(zero, atom(v.paid[i]))));
      }
      Formula body = Formula::implies(
          Formula::negate(atom(v.paid[0])),
          Formula::disj(Formula::knows(zero, none_of_others(v, 0)),
                        Formula::conj(std::move(unknown))));
      return Formula::box(p, body);
    }
    case DcQuery::Beta2:
      return Formula::box(p, Formula::knows(zero, x_iff_someone_paid(v)));
    case DcQuery::Beta3:
      return Formula::box(p, Formula::knows(zero, atom(v.paid[1])));
    case DcQuery::Gamma:
      return Formula::knows(zero, Formula::box(p, x_iff_someone_paid(v)));
  }
  return Formula::top();
}

VerificationTask gen_dc(std::size_t n, DcQuery q) {
  DcVocabulary v = dc_vocabulary(n);
  VerificationTask t;
  t.agents = v.agents;
  t.vars.push_back(v.x);
  t.vars.insert(t.vars.end(), v.paid.begin(), v.paid.end());
  t.vars.insert(t.vars.end(), v.coins.begin(), v.coins.end());
  t.phi = dc_phi(v);
  t.queries.push_back(Query{std::string(dc_query_name(q)), QueryMode::Valid,
                            dc_query(v, q)});
  validate_task(t);
  return t;
}

VerificationTask gen_cheryl() {
  VerificationTask t;
  t.agents = {"a", "b"};
  const Var m{"m_a", {"a"}, Sort::Int};
  const Var d{"d_b", {"b"}, Sort::Int};
  t.vars = {m, d};
  t.bound.int_range = IntRange{5, 19};
  t.bound.per_var["m_a"] = IntRange{5, 8};
  t.bound.per_var["d_b"] = IntRange{14, 19};

  const std::pair<int, int> dates[] = {{5, 15}, {5, 16}, {5, 19}, {6, 17}, {6, 18},
                                       {7, 14}, {7, 16}, {8, 14}, {8, 15}, {8, 17}};
  std::vector<Formula> options;
  for (auto [month, day] : dates) {
    options.push_back(Formula::conj(Formula::eq(Term::var(m), Term::integer(month)),
                                    Formula::eq(Term::var(d), Term::integer(day))));
  }
  t.phi = Formula::disj(std::move(options));

  const Term mt = Term::var(m);
  const Term dt = Term::var(d);
  Formula albert = Formula::conj(
      Formula::negate(Formula::knows_value("a", dt)),
      Formula::knows("a", Formula::negate(Formula::knows_value("b", mt))));
  Formula bernard = Formula::conj(
      Formula::negate(Formula::knows_value("b", mt)),
      Formula::diamond(albert, Formula::knows_value("b", mt)));
  t.queries.push_back(Query{"query", QueryMode::Sat,
                            Formula::diamond(bernard, Formula::knows_value("a", dt))});
  validate_task(t);
  return t;
}

}  // namespace episcope
