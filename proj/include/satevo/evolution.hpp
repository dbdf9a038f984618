#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "satevo/cnf.hpp"
#include "satevo/dpll.hpp"
#include "satevo/rng.hpp"

namespace satevo {

/// Which solver counter serves as the fitness score.
enum class Metric { propagations, decisions };

inline const char* to_string(Metric metric) {
  return metric == Metric::propagations ? "propagations" : "decisions";
}

inline std::uint64_t metric_value(const SolveStats& stats, Metric metric) {
  return metric == Metric::propagations ? stats.propagations
                                        : stats.decisions;
}

/// Formula mutation rule applied once per generation.
struct TransitionOperator {
  enum class Kind {
    replace_clause,
    flip_literal,
    add_clause,
    remove_clause,
    multi_replace
  };

  Kind kind = Kind::replace_clause;
  std::uint64_t count = 1;            // multi_replace only, >= 2
  std::optional<int> add_width;       // add_clause width; defaults to the
                                      // width of the formula's first clause

  static TransitionOperator replace_clause() { return {}; }
  static TransitionOperator flip_literal() {
    return {Kind::flip_literal, 1, std::nullopt};
  }
  static TransitionOperator add_clause(std::optional<int> width = {}) {
    return {Kind::add_clause, 1, width};
  }
  static TransitionOperator remove_clause() {
    return {Kind::remove_clause, 1, std::nullopt};
  }
  static TransitionOperator multi_replace(std::uint64_t count) {
    if (count < 2)
      throw std::invalid_argument("multi_replace needs count >= 2");
    return {Kind::multi_replace, count, std::nullopt};
  }
};

enum class ScoreRule {
  always,              // status constraint alone decides (stage-1 removal)
  non_decreasing,      // restore the parent only when the score drops
  strictly_increasing
};

enum class StatusConstraint { none, must_be_sat, must_be_unsat };

/// Acceptance predicate over (old stats, new stats): the candidate is kept
/// iff the status constraint holds for its status and the score rule holds
/// for the chosen metric. Ties are accepted under non_decreasing.
struct SelectionCriterion {
  ScoreRule score_rule = ScoreRule::non_decreasing;
  StatusConstraint status_constraint = StatusConstraint::none;
};

inline bool accept(const SolveStats& old_stats, const SolveStats& new_stats,
                   const SelectionCriterion& criterion, Metric metric) {
  switch (criterion.status_constraint) {
    case StatusConstraint::none:
      break;
    case StatusConstraint::must_be_sat:
      if (new_stats.status != SolveStatus::sat) return false;
      break;
    case StatusConstraint::must_be_unsat:
      if (new_stats.status != SolveStatus::unsat) return false;
      break;
  }
  const std::uint64_t p = metric_value(old_stats, metric);
  const std::uint64_t q = metric_value(new_stats, metric);
  switch (criterion.score_rule) {
    case ScoreRule::always: return true;
    case ScoreRule::non_decreasing: return q >= p;
    case ScoreRule::strictly_increasing: return q > p;
  }
  return false;
}

/// Per-variable search-guidance weights, all starting at 1.0.
class VariableWeights {
 public:
  VariableWeights() = default;
  explicit VariableWeights(int num_variables)
      : weights_(static_cast<std::size_t>(num_variables) + 1, 1.0) {}

  int num_variables() const {
    return weights_.empty() ? 0 : static_cast<int>(weights_.size()) - 1;
  }
  double of(int variable) const {
    return weights_[static_cast<std::size_t>(variable)];
  }
  void set(int variable, double weight) {
    weights_[static_cast<std::size_t>(variable)] = weight;
  }
  double sum_over(const Clause& clause) const {
    double total = 0.0;
    for (Lit lit : clause.literals) total += of(lit.variable());
    return total;
  }

 private:
  std::vector<double> weights_;  // index 0 unused
};

/// Magnitudes of the weight update; the reinforcement is additive and
/// unbounded above, the penalty is multiplicative and clamped at the floor.
struct WeightUpdateRule {
  double reward = 1.0;
  double decay = 0.95;
  double floor = 1.0;
};

/// Reinforces the variables of a clause whose change improved the score;
/// decays them (down to the floor) when it did not. Other weights are
/// untouched.
inline void update_weights(VariableWeights& weights, const Clause& changed,
                           bool improved,
                           const WeightUpdateRule& rule = {}) {
  for (Lit lit : changed.literals) {
    const int v = lit.variable();
    if (improved) {
      weights.set(v, weights.of(v) + rule.reward);
    } else {
      const double decayed = weights.of(v) * rule.decay;
      weights.set(v, decayed < rule.floor ? rule.floor : decayed);
    }
  }
}

enum class ClauseSelection { uniform, weight_biased };

/// Picks a clause index: uniform over [0, m), or with probability
/// proportional to the sum of its variables' weights.
inline std::size_t select_clause_index(const CnfFormula& formula,
                                       ClauseSelection mode,
                                       const VariableWeights* weights,
                                       RandomStream& rng) {
  const std::size_t m = formula.clauses.size();
  if (m == 0) throw std::invalid_argument("cannot select from empty formula");
  if (mode == ClauseSelection::uniform)
    return static_cast<std::size_t>(rng.below(m));
  if (weights == nullptr)
    throw std::invalid_argument("weight-biased selection needs weights");
  std::vector<double> cumulative(m);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    total += weights->sum_over(formula.clauses[i]);
    cumulative[i] = total;
  }
  const double target = rng.next_unit() * total;
  for (std::size_t i = 0; i < m; ++i)
    if (target < cumulative[i]) return i;
  return m - 1;
}

/// A mutated copy of the parent plus the clauses to credit in weight
/// updates: the new clause contents for replace/flip/add, the removed
/// clause for remove.
struct MutationResult {
  CnfFormula formula;
  std::vector<Clause> changed_clauses;
};

/// Applies one transition operator to a copy of the formula. Returns
/// nullopt when the move is refused (remove on a one-clause formula, any
/// clause-addressing move on an empty formula, or a move that would need to
/// regenerate an empty clause); the engine counts refusals as rejected
/// generations.
inline std::optional<MutationResult> apply_operator(
    const CnfFormula& formula, const TransitionOperator& op,
    const VariableWeights* weights, RandomStream& rng) {
  const ClauseSelection mode =
      weights ? ClauseSelection::weight_biased : ClauseSelection::uniform;
  const std::size_t m = formula.clauses.size();
  MutationResult result;

  switch (op.kind) {
    case TransitionOperator::Kind::replace_clause: {
      if (m == 0) return std::nullopt;
      const std::size_t index = select_clause_index(formula, mode, weights, rng);
      const auto width =
          static_cast<int>(formula.clauses[index].literals.size());
      if (width == 0) return std::nullopt;
      result.formula = formula;
      result.formula.clauses[index] =
          generate_random_clause(formula.num_variables, width, rng);
      result.changed_clauses.push_back(result.formula.clauses[index]);
      return result;
    }

    case TransitionOperator::Kind::flip_literal: {
      if (m == 0) return std::nullopt;
      const std::size_t index = select_clause_index(formula, mode, weights, rng);
      const Clause& target = formula.clauses[index];
      if (target.literals.empty()) return std::nullopt;
      result.formula = formula;
      Clause& clause = result.formula.clauses[index];
      const auto pos =
          static_cast<std::size_t>(rng.below(clause.literals.size()));
      const bool negate_in_place = rng.next_bool();
      if (negate_in_place ||
          clause.literals.size() >=
              static_cast<std::size_t>(formula.num_variables)) {
        clause.literals[pos] = clause.literals[pos].negated();
      } else {
        int variable;
        do {
          variable = 1 + static_cast<int>(rng.below(
                             static_cast<std::uint64_t>(formula.num_variables)));
        } while (clause.contains_variable(variable));
        clause.literals[pos] = Lit(variable, rng.next_bool());
      }
      result.changed_clauses.push_back(clause);
      return result;
    }

    case TransitionOperator::Kind::add_clause: {
      int width = op.add_width.value_or(
          m > 0 ? static_cast<int>(formula.clauses.front().literals.size())
                : 0);
      if (width < 1) return std::nullopt;
      result.formula = formula;
      result.formula.clauses.push_back(
          generate_random_clause(formula.num_variables, width, rng));
      result.changed_clauses.push_back(result.formula.clauses.back());
      return result;
    }

    case TransitionOperator::Kind::remove_clause: {
      if (m <= 1) return std::nullopt;  // never leave an empty conjunction
      const std::size_t index = select_clause_index(formula, mode, weights, rng);
      result.formula = formula;
      result.changed_clauses.push_back(result.formula.clauses[index]);
      result.formula.clauses.erase(result.formula.clauses.begin() +
                                   static_cast<std::ptrdiff_t>(index));
      return result;
    }

    case TransitionOperator::Kind::multi_replace: {
      if (m == 0) return std::nullopt;
      const std::uint64_t count = op.count > m ? m : op.count;
      std::vector<std::size_t> indices;
      indices.reserve(count);
      while (indices.size() < count) {
        const std::size_t index =
            select_clause_index(formula, mode, weights, rng);
        bool seen = false;
        for (std::size_t used : indices) seen |= used == index;
        if (!seen) indices.push_back(index);
      }
      result.formula = formula;
      for (std::size_t index : indices) {
        const auto width =
            static_cast<int>(formula.clauses[index].literals.size());
        if (width == 0) return std::nullopt;
        result.formula.clauses[index] =
            generate_random_clause(formula.num_variables, width, rng);
        result.changed_clauses.push_back(result.formula.clauses[index]);
      }
      return result;
    }
  }
  return std::nullopt;
}

/// One stage of the search: an operator, an acceptance criterion, a fitness
/// metric, a generation budget, and how the mutated clause is chosen.
struct StagePlan {
  TransitionOperator op;
  SelectionCriterion criterion;
  Metric metric = Metric::propagations;
  std::uint64_t generations = 0;
  ClauseSelection clause_selection = ClauseSelection::uniform;
};

enum class GenerationEvent { normal, break_move };

inline const char* to_string(GenerationEvent event) {
  return event == GenerationEvent::normal ? "NORMAL" : "BREAK";
}

/// Per-generation trace row describing the current formula after the
/// accept/reject decision; accepted=false means the formula is unchanged
/// from the previous generation.
struct GenerationRecord {
  std::uint64_t generation = 0;
  std::uint64_t score_value = 0;
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
  std::uint64_t clause_count = 0;
  bool accepted = false;
  SolveStatus status = SolveStatus::sat;
  GenerationEvent event = GenerationEvent::normal;

  friend bool operator==(const GenerationRecord&,
                         const GenerationRecord&) = default;
};

/// Receives each emitted record together with the formula it describes.
class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void on_record(const GenerationRecord& record,
                         const CnfFormula& current) = 0;
};

struct EvolutionTrace {
  std::string rng_algorithm = RandomStream::kAlgorithmId;
  std::vector<GenerationRecord> records;
};

/// Full run description. The initial formula is either given directly or
/// generated from a RandomFormulaSpec (whose own seed drives generation;
/// `seed` drives the mutations). When break_window is set, break_size
/// clauses are replaced at once and the result accepted unconditionally
/// after that many generations without an accepted score improvement.
struct EvolutionConfig {
  std::variant<RandomFormulaSpec, CnfFormula> initial;
  SolverConfig solver;
  std::vector<StagePlan> stages;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> break_window;
  std::uint64_t break_size = 3;
  std::uint64_t record_every = 1;
  bool archive_best = true;
  WeightUpdateRule weight_rule;
};

/// Evolution runs cap each fitness solve at this many decisions unless the
/// config overrides it; a candidate that exhausts the budget scores the
/// counter value at the limit.
inline constexpr std::uint64_t kDefaultEvolutionDecisionLimit = 1'000'000;

struct BestArchive {
  CnfFormula formula;
  SolveStats stats;
  std::uint64_t score = 0;
};

/// Search state threaded through stages.
struct EvolutionState {
  CnfFormula formula;
  SolveStats stats;
  VariableWeights weights;
  BestArchive best;
  std::uint64_t generation = 0;   // global across stages
  std::uint64_t stagnation = 0;   // generations since last accepted improvement
};

struct EvolutionResult {
  CnfFormula initial_formula;
  SolveStats initial_stats;
  CnfFormula final_formula;
  SolveStats final_stats;
  BestArchive best;
  EvolutionTrace trace;
};

namespace detail {

inline SolveStats solve_for_fitness(DpllEngine& engine,
                                    const CnfFormula& formula,
                                    const EvolutionConfig& config) {
  SolverConfig solver = config.solver;
  if (!solver.decision_limit)
    solver.decision_limit = kDefaultEvolutionDecisionLimit;
  SolveStats stats = engine.solve(formula, solver);
  stats.model.reset();  // models are never consulted during the search
  return stats;
}

}  // namespace detail

/// Runs one stage: mutate, solve, accept-or-restore, weight updates when
/// weight-biased, break moves when configured, archive and trace
/// bookkeeping. Returns the state after plan.generations generations.
inline EvolutionState evolve_stage(EvolutionState state, const StagePlan& plan,
                                   const EvolutionConfig& config,
                                   RandomStream& rng, EvolutionTrace& trace,
                                   TraceSink* sink = nullptr) {
  const VariableWeights* weights =
      plan.clause_selection == ClauseSelection::weight_biased ? &state.weights
                                                              : nullptr;
  detail::DpllEngine engine;
  for (std::uint64_t step = 0; step < plan.generations; ++step) {
    ++state.generation;
    bool accepted = false;
    GenerationEvent event = GenerationEvent::normal;

    const bool break_due = config.break_window &&
                           state.stagnation >= *config.break_window &&
                           !state.formula.clauses.empty();
    if (break_due) {
      const std::uint64_t count = config.break_size < 2 ? 2 : config.break_size;
      auto mutation =
          apply_operator(state.formula,
                         TransitionOperator::multi_replace(count), nullptr, rng);
      if (mutation) {
        state.formula = std::move(mutation->formula);
        state.stats = detail::solve_for_fitness(engine, state.formula, config);
        state.stagnation = 0;
        accepted = true;
        event = GenerationEvent::break_move;
      }
    } else {
      auto mutation = apply_operator(state.formula, plan.op, weights, rng);
      if (mutation) {
        const SolveStats candidate_stats =
            detail::solve_for_fitness(engine, mutation->formula, config);
        accepted =
            accept(state.stats, candidate_stats, plan.criterion, plan.metric);
        const bool improved =
            accepted && metric_value(candidate_stats, plan.metric) >
                            metric_value(state.stats, plan.metric);
        if (weights)
          for (const Clause& clause : mutation->changed_clauses)
            update_weights(state.weights, clause, improved, config.weight_rule);
        if (accepted) {
          state.formula = std::move(mutation->formula);
          state.stats = candidate_stats;
        }
        state.stagnation = improved ? 0 : state.stagnation + 1;
      } else {
        ++state.stagnation;
      }
    }

    const std::uint64_t score = metric_value(state.stats, plan.metric);
    if (config.archive_best && score > state.best.score) {
      state.best.formula = state.formula;
      state.best.stats = state.stats;
      state.best.score = score;
    }

    if ((state.generation - 1) % config.record_every == 0) {
      GenerationRecord record;
      record.generation = state.generation;
      record.score_value = score;
      record.decisions = state.stats.decisions;
      record.propagations = state.stats.propagations;
      record.clause_count = state.formula.clauses.size();
      record.accepted = accepted;
      record.status = state.stats.status;
      record.event = event;
      trace.records.push_back(record);
      if (sink) sink->on_record(record, state.formula);
    }
  }
  return state;
}

/// Materializes the initial formula, measures the baseline, checks the first
/// stage's status precondition, then runs the stages in order.
inline EvolutionResult evolve(const EvolutionConfig& config,
                              TraceSink* sink = nullptr) {
  if (config.stages.empty())
    throw std::invalid_argument("evolution config needs at least one stage");
  for (const StagePlan& plan : config.stages)
    if (plan.generations == 0)
      throw std::invalid_argument("stage duration must be positive");
  if (config.record_every == 0)
    throw std::invalid_argument("record_every must be positive");

  EvolutionResult result;
  result.initial_formula =
      std::holds_alternative<CnfFormula>(config.initial)
          ? std::get<CnfFormula>(config.initial)
          : generate_random_kcnf(std::get<RandomFormulaSpec>(config.initial));
  detail::DpllEngine baseline_engine;
  result.initial_stats =
      detail::solve_for_fitness(baseline_engine, result.initial_formula, config);

  const StatusConstraint first_constraint =
      config.stages.front().criterion.status_constraint;
  if (first_constraint == StatusConstraint::must_be_unsat &&
      result.initial_stats.status != SolveStatus::unsat)
    throw std::runtime_error(
        "stage 1 requires an unsatisfiable initial formula, but it solved to " +
        std::string(to_string(result.initial_stats.status)));
  if (first_constraint == StatusConstraint::must_be_sat &&
      result.initial_stats.status != SolveStatus::sat)
    throw std::runtime_error(
        "stage 1 requires a satisfiable initial formula, but it solved to " +
        std::string(to_string(result.initial_stats.status)));

  EvolutionState state;
  state.formula = result.initial_formula;
  state.stats = result.initial_stats;
  state.weights = VariableWeights(result.initial_formula.num_variables);
  if (config.archive_best) {
    state.best.formula = state.formula;
    state.best.stats = state.stats;
    state.best.score =
        metric_value(state.stats, config.stages.front().metric);
  }

  RandomStream rng(config.seed);
  for (const StagePlan& plan : config.stages)
    state = evolve_stage(std::move(state), plan, config, rng, result.trace,
                         sink);

  result.final_formula = std::move(state.formula);
  result.final_stats = std::move(state.stats);
  result.best = std::move(state.best);
  return result;
}

/// Clause count that puts a fresh random k-CNF well above the
/// satisfiability threshold so it is almost surely unsatisfiable. The
/// default ratio 6 covers k=3; other widths need an explicit ratio.
inline std::size_t initial_ratio_for_unsat(
    int num_variables, int clause_width = 3,
    std::optional<double> ratio_override = {}) {
  if (num_variables < 1)
    throw std::invalid_argument("variable count must be positive");
  double ratio;
  if (ratio_override) {
    ratio = *ratio_override;
  } else if (clause_width == 3) {
    ratio = 6.0;
  } else {
    throw std::invalid_argument(
        "no built-in unsat ratio for clause width " +
        std::to_string(clause_width) + "; pass an explicit ratio");
  }
  return static_cast<std::size_t>(std::ceil(ratio * num_variables));
}

}  // namespace satevo
