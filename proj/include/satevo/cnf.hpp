#pragma once

#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "satevo/rng.hpp"

namespace satevo {

/// A literal: a variable index in [1, n] with a polarity. Stored as the
/// DIMACS signed code (+v positive, -v negated), never zero.
class Lit {
 public:
  constexpr Lit(int variable, bool positive)
      : code_(positive ? variable : -variable) {}

  static constexpr Lit from_dimacs(int code) { return Lit(code); }

  constexpr int variable() const { return code_ < 0 ? -code_ : code_; }
  constexpr bool is_positive() const { return code_ > 0; }
  constexpr Lit negated() const { return Lit(-code_); }
  constexpr int dimacs() const { return code_; }

  friend constexpr bool operator==(Lit a, Lit b) = default;

 private:
  explicit constexpr Lit(int code) : code_(code) {}

  int code_;
};

/// A disjunction of literals over pairwise distinct variables. Length 0 is
/// only ever produced by parsing an external file (an empty clause is
/// immediately unsatisfiable); generated clauses have length >= 1.
struct Clause {
  std::vector<Lit> literals;

  std::size_t width() const { return literals.size(); }

  bool contains_variable(int variable) const {
    for (Lit lit : literals)
      if (lit.variable() == variable) return true;
    return false;
  }

  friend bool operator==(const Clause&, const Clause&) = default;
};

/// A conjunction of clauses over variables [1, num_variables]. Clause order
/// is significant and stable: transition operators address clauses by
/// position, and equality is positional.
struct CnfFormula {
  int num_variables = 0;
  std::vector<Clause> clauses;

  std::size_t num_clauses() const { return clauses.size(); }

  friend bool operator==(const CnfFormula&, const CnfFormula&) = default;
};

/// Parameters of a uniform random k-CNF draw: m clauses of k literals each
/// over n variables, from the stream seeded with `seed`.
struct RandomFormulaSpec {
  int num_variables = 0;
  std::size_t num_clauses = 0;
  int clause_width = 3;
  std::uint64_t seed = 0;
};

namespace detail {

inline void check_clause_shape(int num_variables, int clause_width) {
  if (num_variables < 1)
    throw std::invalid_argument("variable count must be positive");
  if (clause_width < 1)
    throw std::invalid_argument("clause width must be positive");
  if (clause_width > num_variables)
    throw std::invalid_argument(
        "clause width " + std::to_string(clause_width) +
        " exceeds variable count " + std::to_string(num_variables));
}

}  // namespace detail

/// Draws a clause of exactly `clause_width` literals over distinct variables
/// chosen uniformly from [1, num_variables], each polarity an independent
/// fair coin. Variables are drawn by rejection so no variable occurs twice.
inline Clause generate_random_clause(int num_variables, int clause_width,
                                     RandomStream& rng) {
  detail::check_clause_shape(num_variables, clause_width);
  Clause clause;
  clause.literals.reserve(static_cast<std::size_t>(clause_width));
  for (int i = 0; i < clause_width; ++i) {
    int variable;
    do {
      variable = 1 + static_cast<int>(
                         rng.below(static_cast<std::uint64_t>(num_variables)));
    } while (clause.contains_variable(variable));
    clause.literals.emplace_back(variable, rng.next_bool());
  }
  return clause;
}

/// Generates spec.num_clauses independent random clauses. Duplicate clauses
/// across the formula are permitted; only within-clause variable repetition
/// is forbidden.
inline CnfFormula generate_random_kcnf(const RandomFormulaSpec& spec) {
  detail::check_clause_shape(spec.num_variables, spec.clause_width);
  RandomStream rng(spec.seed);
  CnfFormula formula;
  formula.num_variables = spec.num_variables;
  formula.clauses.reserve(spec.num_clauses);
  for (std::size_t i = 0; i < spec.num_clauses; ++i)
    formula.clauses.push_back(
        generate_random_clause(spec.num_variables, spec.clause_width, rng));
  return formula;
}

}  // namespace satevo
