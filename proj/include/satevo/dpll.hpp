#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "satevo/cnf.hpp"
#include "satevo/rng.hpp"

namespace satevo {

enum class SolveStatus { sat, unsat, limit_exceeded };

inline const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::sat: return "SAT";
    case SolveStatus::unsat: return "UNSAT";
    case SolveStatus::limit_exceeded: return "LIMIT";
  }
  return "?";
}

inline std::optional<SolveStatus> solve_status_from_string(
    const std::string& text) {
  if (text == "SAT") return SolveStatus::sat;
  if (text == "UNSAT") return SolveStatus::unsat;
  if (text == "LIMIT") return SolveStatus::limit_exceeded;
  return std::nullopt;
}

/// Partial truth assignment over variables [1, n].
class Assignment {
 public:
  Assignment() = default;
  explicit Assignment(int num_variables)
      : values_(static_cast<std::size_t>(num_variables) + 1, kUnassigned) {}

  int num_variables() const {
    return values_.empty() ? 0 : static_cast<int>(values_.size()) - 1;
  }

  bool is_assigned(int variable) const {
    return values_[static_cast<std::size_t>(variable)] != kUnassigned;
  }
  bool value(int variable) const {
    return values_[static_cast<std::size_t>(variable)] == 1;
  }
  void assign(int variable, bool value) {
    values_[static_cast<std::size_t>(variable)] = value ? 1 : 0;
  }
  void unassign(int variable) {
    values_[static_cast<std::size_t>(variable)] = kUnassigned;
  }

  bool satisfies(Lit lit) const {
    return is_assigned(lit.variable()) &&
           value(lit.variable()) == lit.is_positive();
  }
  bool falsifies(Lit lit) const {
    return is_assigned(lit.variable()) &&
           value(lit.variable()) != lit.is_positive();
  }
  bool satisfies(const Clause& clause) const {
    for (Lit lit : clause.literals)
      if (satisfies(lit)) return true;
    return false;
  }
  bool satisfies(const CnfFormula& formula) const {
    for (const Clause& clause : formula.clauses)
      if (!satisfies(clause)) return false;
    return true;
  }

  friend bool operator==(const Assignment&, const Assignment&) = default;

 private:
  static constexpr std::int8_t kUnassigned = -1;
  std::vector<std::int8_t> values_;  // index 0 unused
};

/// Hardness measurement of one solver run. `propagations` counts variables
/// fixed by unit resolution only; decision assignments are not propagations.
/// `decisions` counts binary branch nodes of the search tree, accumulated
/// over the whole search including refuted subtrees. The model is present
/// iff status is sat and satisfies every clause of the input.
struct SolveStats {
  SolveStatus status = SolveStatus::sat;
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
  std::optional<Assignment> model;
};

enum class BranchHeuristic { static_min_index, jeroslow_wang, random_order };

/// Solver knobs. The random_order heuristic requires random_seed; the other
/// heuristics ignore it and are fully deterministic.
struct SolverConfig {
  BranchHeuristic heuristic = BranchHeuristic::static_min_index;
  bool first_phase = true;
  std::optional<std::uint64_t> decision_limit;
  std::optional<std::uint64_t> random_seed;
};

/// Runs unit resolution to fixpoint from `start`: while some clause has all
/// literals false but one unassigned, that literal is assigned true. Stops
/// early when a clause becomes empty under the assignment (conflict).
/// `propagations` is the number of variables fixed by this call.
struct PropagationResult {
  Assignment assignment;
  bool conflict = false;
  std::uint64_t propagations = 0;
};

inline PropagationResult unit_propagate(const CnfFormula& formula,
                                        Assignment start) {
  PropagationResult result;
  result.assignment = std::move(start);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Clause& clause : formula.clauses) {
      int unassigned = 0;
      Lit unit = Lit(1, true);
      bool satisfied = false;
      for (Lit lit : clause.literals) {
        if (result.assignment.satisfies(lit)) {
          satisfied = true;
          break;
        }
        if (!result.assignment.is_assigned(lit.variable())) {
          ++unassigned;
          unit = lit;
        }
      }
      if (satisfied) continue;
      if (unassigned == 0) {
        result.conflict = true;
        return result;
      }
      if (unassigned == 1) {
        result.assignment.assign(unit.variable(), unit.is_positive());
        ++result.propagations;
        changed = true;
      }
    }
  }
  return result;
}

namespace detail {

// Chronological-backtracking DPLL over per-clause true/false counters and
// flat occurrence lists. No clause learning, no restarts: identical inputs
// always walk the identical tree, so the counters are reproducible. The
// engine keeps its buffers between solves; the evolution loop reuses one
// instance across hundreds of thousands of fitness measurements.
//
// Literals are packed as 2*var for positive, 2*var+1 for negated.
class DpllEngine {
 public:
  SolveStats solve(const CnfFormula& formula, const SolverConfig& config) {
    config_ = config;
    if (config.heuristic == BranchHeuristic::random_order) {
      if (!config.random_seed)
        throw std::invalid_argument(
            "random_order branch heuristic requires a seed");
      rng_.emplace(*config.random_seed);
    }
    SolveStats stats;
    if (!load(formula)) {
      stats.status = SolveStatus::unsat;
      return stats;
    }
    return search(stats);
  }

 private:
  static constexpr std::int8_t kUnassigned = -1;

  struct Frame {
    std::int32_t variable;
    std::uint32_t trail_mark;
    bool first_value;
    bool flipped;
  };

  static std::int32_t code_of(Lit lit) {
    return 2 * lit.variable() + (lit.is_positive() ? 0 : 1);
  }

  // Flattens the formula and resets all search state. Returns false when an
  // empty clause makes the formula trivially unsatisfiable.
  bool load(const CnfFormula& formula) {
    num_vars_ = formula.num_variables;
    num_clauses_ = formula.clauses.size();
    const std::size_t codes = 2 * static_cast<std::size_t>(num_vars_) + 2;

    clause_offset_.clear();
    clause_offset_.reserve(num_clauses_ + 1);
    clause_lits_.clear();
    clause_offset_.push_back(0);
    bool empty_clause = false;
    for (const Clause& clause : formula.clauses) {
      if (clause.literals.empty()) empty_clause = true;
      for (Lit lit : clause.literals) clause_lits_.push_back(code_of(lit));
      clause_offset_.push_back(static_cast<std::int32_t>(clause_lits_.size()));
    }
    if (empty_clause) return false;

    occ_offset_.assign(codes + 1, 0);
    for (std::int32_t code : clause_lits_)
      ++occ_offset_[static_cast<std::size_t>(code) + 1];
    for (std::size_t i = 1; i <= codes; ++i)
      occ_offset_[i] += occ_offset_[i - 1];
    occ_data_.resize(clause_lits_.size());
    occ_fill_.assign(occ_offset_.begin(), occ_offset_.end() - 1);
    for (std::size_t c = 0; c < num_clauses_; ++c)
      for (std::int32_t i = clause_offset_[c]; i < clause_offset_[c + 1]; ++i)
        occ_data_[static_cast<std::size_t>(
            occ_fill_[static_cast<std::size_t>(clause_lits_[i])]++)] =
            static_cast<std::int32_t>(c);

    num_true_.assign(num_clauses_, 0);
    num_false_.assign(num_clauses_, 0);
    value_.assign(static_cast<std::size_t>(num_vars_) + 1, kUnassigned);
    trail_.clear();
    trail_.reserve(static_cast<std::size_t>(num_vars_));
    frames_.clear();
    qhead_ = 0;
    unsatisfied_ = static_cast<std::int64_t>(num_clauses_);
    decisions_ = 0;
    propagations_ = 0;
    return true;
  }

  SolveStats search(SolveStats& stats) {
    // Top-level unit clauses seed the propagation queue.
    for (std::size_t c = 0; c < num_clauses_; ++c) {
      if (clause_offset_[c + 1] - clause_offset_[c] != 1) continue;
      const std::int32_t code = clause_lits_[clause_offset_[c]];
      if (value_[static_cast<std::size_t>(code >> 1)] == kUnassigned) {
        assign(code >> 1, (code & 1) == 0);
        ++propagations_;
      }
    }

    bool conflict = !propagate();
    for (;;) {
      if (conflict) {
        Frame* frame = backtrack_frame();
        if (frame == nullptr) {
          finish(stats, SolveStatus::unsat);
          return stats;
        }
        undo_to(frame->trail_mark);
        frame->flipped = true;
        assign(frame->variable, !frame->first_value);
        conflict = !propagate();
        continue;
      }
      if (unsatisfied_ == 0 ||
          trail_.size() == static_cast<std::size_t>(num_vars_)) {
        finish(stats, SolveStatus::sat);
        return stats;
      }
      if (config_.decision_limit && decisions_ >= *config_.decision_limit) {
        finish(stats, SolveStatus::limit_exceeded);
        return stats;
      }
      const auto [variable, phase] = pick_branch();
      ++decisions_;
      frames_.push_back(Frame{variable,
                              static_cast<std::uint32_t>(trail_.size()),
                              phase, false});
      assign(variable, phase);
      conflict = !propagate();
    }
  }

  void assign(std::int32_t variable, bool value) {
    value_[static_cast<std::size_t>(variable)] = value ? 1 : 0;
    trail_.push_back(variable);
    const auto sat_code =
        static_cast<std::size_t>(2 * variable + (value ? 0 : 1));
    for (std::int32_t i = occ_offset_[sat_code];
         i < occ_offset_[sat_code + 1]; ++i)
      if (num_true_[static_cast<std::size_t>(occ_data_[i])]++ == 0)
        --unsatisfied_;
    const auto false_code = sat_code ^ 1;
    for (std::int32_t i = occ_offset_[false_code];
         i < occ_offset_[false_code + 1]; ++i)
      ++num_false_[static_cast<std::size_t>(occ_data_[i])];
  }

  void undo(std::int32_t variable) {
    const bool value = value_[static_cast<std::size_t>(variable)] == 1;
    const auto sat_code =
        static_cast<std::size_t>(2 * variable + (value ? 0 : 1));
    for (std::int32_t i = occ_offset_[sat_code];
         i < occ_offset_[sat_code + 1]; ++i)
      if (--num_true_[static_cast<std::size_t>(occ_data_[i])] == 0)
        ++unsatisfied_;
    const auto false_code = sat_code ^ 1;
    for (std::int32_t i = occ_offset_[false_code];
         i < occ_offset_[false_code + 1]; ++i)
      --num_false_[static_cast<std::size_t>(occ_data_[i])];
    value_[static_cast<std::size_t>(variable)] = kUnassigned;
  }

  void undo_to(std::uint32_t mark) {
    while (trail_.size() > mark) {
      undo(trail_.back());
      trail_.pop_back();
    }
    qhead_ = mark;
  }

  // Processes newly falsified literals from the trail; assigns forced
  // literals, counting each as one propagation. Returns false on conflict.
  bool propagate() {
    while (qhead_ < trail_.size()) {
      const std::int32_t v = trail_[qhead_++];
      const auto false_code = static_cast<std::size_t>(
          2 * v + (value_[static_cast<std::size_t>(v)] == 1 ? 1 : 0));
      for (std::int32_t i = occ_offset_[false_code];
           i < occ_offset_[false_code + 1]; ++i) {
        const auto c = static_cast<std::size_t>(occ_data_[i]);
        if (num_true_[c] > 0) continue;
        const std::int32_t remaining =
            (clause_offset_[c + 1] - clause_offset_[c]) - num_false_[c];
        if (remaining == 0) return false;
        if (remaining != 1) continue;
        for (std::int32_t j = clause_offset_[c]; j < clause_offset_[c + 1];
             ++j) {
          const std::int32_t code = clause_lits_[j];
          if (value_[static_cast<std::size_t>(code >> 1)] == kUnassigned) {
            assign(code >> 1, (code & 1) == 0);
            ++propagations_;
            break;
          }
        }
      }
    }
    return true;
  }

  Frame* backtrack_frame() {
    while (!frames_.empty() && frames_.back().flipped) {
      undo_to(frames_.back().trail_mark);
      frames_.pop_back();
    }
    return frames_.empty() ? nullptr : &frames_.back();
  }

  std::pair<std::int32_t, bool> pick_branch() {
    switch (config_.heuristic) {
      case BranchHeuristic::static_min_index: {
        for (std::int32_t v = 1; v <= num_vars_; ++v)
          if (value_[static_cast<std::size_t>(v)] == kUnassigned)
            return {v, config_.first_phase};
        break;
      }
      case BranchHeuristic::jeroslow_wang:
        return pick_jeroslow_wang();
      case BranchHeuristic::random_order: {
        scratch_vars_.clear();
        for (std::int32_t v = 1; v <= num_vars_; ++v)
          if (value_[static_cast<std::size_t>(v)] == kUnassigned)
            scratch_vars_.push_back(v);
        return {scratch_vars_[rng_->below(scratch_vars_.size())],
                config_.first_phase};
      }
    }
    throw std::logic_error("no unassigned variable to branch on");
  }

  // J(l) = sum over unsatisfied clauses containing l of 2^-(unassigned
  // length). Branches on the variable of the max-scoring literal, ties to
  // the lowest index with positive polarity preferred; the chosen phase is
  // that literal's polarity.
  std::pair<std::int32_t, bool> pick_jeroslow_wang() {
    const auto n = static_cast<std::size_t>(num_vars_);
    jw_score_.assign(2 * n + 2, 0.0);
    for (std::size_t c = 0; c < num_clauses_; ++c) {
      if (num_true_[c] > 0) continue;
      const std::int32_t remaining =
          (clause_offset_[c + 1] - clause_offset_[c]) - num_false_[c];
      const double weight = std::pow(0.5, remaining);
      for (std::int32_t j = clause_offset_[c]; j < clause_offset_[c + 1];
           ++j) {
        const std::int32_t code = clause_lits_[j];
        if (value_[static_cast<std::size_t>(code >> 1)] == kUnassigned)
          jw_score_[static_cast<std::size_t>(code)] += weight;
      }
    }
    std::int32_t best_var = 0;
    bool best_pos = true;
    double best_score = -1.0;
    for (std::int32_t v = 1; v <= num_vars_; ++v) {
      if (value_[static_cast<std::size_t>(v)] != kUnassigned) continue;
      const double pos = jw_score_[static_cast<std::size_t>(2 * v)];
      const double neg = jw_score_[static_cast<std::size_t>(2 * v + 1)];
      if (pos > best_score) {
        best_score = pos;
        best_var = v;
        best_pos = true;
      }
      if (neg > best_score) {
        best_score = neg;
        best_var = v;
        best_pos = false;
      }
    }
    return {best_var, best_pos};
  }

  void finish(SolveStats& stats, SolveStatus status) {
    stats.status = status;
    stats.decisions = decisions_;
    stats.propagations = propagations_;
    if (status == SolveStatus::sat) {
      Assignment model(num_vars_);
      for (std::int32_t v = 1; v <= num_vars_; ++v)
        model.assign(v, value_[static_cast<std::size_t>(v)] == 1);
      stats.model = std::move(model);
    }
  }

  SolverConfig config_;
  std::int32_t num_vars_ = 0;
  std::size_t num_clauses_ = 0;
  std::vector<std::int32_t> clause_offset_, clause_lits_;
  std::vector<std::int32_t> occ_offset_, occ_data_, occ_fill_;
  std::vector<std::int32_t> num_true_, num_false_;
  std::vector<std::int8_t> value_;
  std::vector<std::int32_t> trail_;
  std::vector<Frame> frames_;
  std::vector<std::int32_t> scratch_vars_;
  std::vector<double> jw_score_;
  std::size_t qhead_ = 0;
  std::int64_t unsatisfied_ = 0;
  std::uint64_t decisions_ = 0, propagations_ = 0;
  std::optional<RandomStream> rng_;
};

}  // namespace detail

/// Complete DPLL search: propagate to fixpoint, branch per the configured
/// heuristic (first_phase tried first, then its complement), backtrack
/// chronologically. Counters accumulate over the whole search. Hitting
/// config.decision_limit yields limit_exceeded with the counters as of the
/// limit. Pure function of its inputs: deterministic for non-random
/// heuristics, and for random_order deterministic given the seed.
inline SolveStats solve(const CnfFormula& formula,
                        const SolverConfig& config = {}) {
  detail::DpllEngine engine;
  return engine.solve(formula, config);
}

/// Exhaustive 2^n oracle for tests and cross-validation. Refuses n > 24.
inline SolveStatus brute_force_sat(const CnfFormula& formula) {
  if (formula.num_variables > 24)
    throw std::invalid_argument(
        "brute_force_sat is limited to 24 variables, got " +
        std::to_string(formula.num_variables));
  const int n = formula.num_variables;
  const std::uint64_t total = 1ULL << n;
  for (std::uint64_t bits = 0; bits < total; ++bits) {
    bool all_satisfied = true;
    for (const Clause& clause : formula.clauses) {
      bool satisfied = false;
      for (Lit lit : clause.literals) {
        const bool value = (bits >> (lit.variable() - 1)) & 1ULL;
        if (value == lit.is_positive()) {
          satisfied = true;
          break;
        }
      }
      if (!satisfied) {
        all_satisfied = false;
        break;
      }
    }
    if (all_satisfied) return SolveStatus::sat;
  }
  return SolveStatus::unsat;
}

}  // namespace satevo
