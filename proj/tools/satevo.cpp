// satevo: evolve random k-CNF instances toward hardness for a DPLL solver.
//
// Subcommands: gen, solve, evolve, batch, crosscheck. Exit codes: 0 success,
// 10/20 SAT/UNSAT from `solve`, 1 usage or config error, 2 runtime error.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "satevo/cnf.hpp"
#include "satevo/dimacs.hpp"
#include "satevo/dpll.hpp"
#include "satevo/evolution.hpp"
#include "satevo/external.hpp"
#include "satevo/trace_csv.hpp"
#include "satevo/version.hpp"

using json = nlohmann::json;
using namespace satevo;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitSat = 10;
constexpr int kExitUnsat = 20;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string iso8601_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

CnfFormula load_dimacs_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::string> warnings;
  CnfFormula formula = parse_dimacs(in, &warnings);
  for (const std::string& warning : warnings)
    std::cerr << "warning: " << path << ": " << warning << '\n';
  return formula;
}

void save_dimacs_file(const CnfFormula& formula, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_dimacs(formula, out);
}

// ---------------------------------------------------------------------------
// Run options: the flat key=value schema shared by config files, command-line
// flags, and the manifest's config echo.

struct RunOptions {
  std::string preset = "fig1";  // fig1 | two-stage-unsat
  std::optional<int> n, k;
  std::optional<std::uint64_t> m;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> generations;          // fig1 budget
  std::optional<std::uint64_t> stage1_generations;   // default 10*m
  std::optional<std::uint64_t> stage2_generations;
  std::optional<std::string> metric;                 // propagations|decisions
  std::optional<std::string> heuristic;              // static|jw|random
  std::optional<bool> first_phase;
  std::optional<bool> weight_biased;
  std::optional<std::uint64_t> decision_limit;
  std::optional<std::uint64_t> break_window;         // 0 disables breaks
  std::optional<std::uint64_t> break_size;
  std::optional<std::uint64_t> record_every;         // 0 = auto
  std::optional<std::string> initial;                // DIMACS seed formula
  std::optional<double> ratio;                       // clauses per variable
};

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T parsed{};
  in >> parsed;
  if (in.fail() || !in.eof())
    throw ConfigError("config key '" + key + "': invalid value '" + value +
                      "'");
  return parsed;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" +
                    value + "'");
}

void apply_config_entry(RunOptions& options, const std::string& key,
                        const std::string& value) {
  if (key == "preset") options.preset = value;
  else if (key == "n") options.n = parse_number<int>(key, value);
  else if (key == "m") options.m = parse_number<std::uint64_t>(key, value);
  else if (key == "k") options.k = parse_number<int>(key, value);
  else if (key == "seed")
    options.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "generations")
    options.generations = parse_number<std::uint64_t>(key, value);
  else if (key == "stage1_generations")
    options.stage1_generations = parse_number<std::uint64_t>(key, value);
  else if (key == "stage2_generations")
    options.stage2_generations = parse_number<std::uint64_t>(key, value);
  else if (key == "metric") options.metric = value;
  else if (key == "heuristic") options.heuristic = value;
  else if (key == "first_phase") options.first_phase = parse_bool(key, value);
  else if (key == "weight_biased")
    options.weight_biased = parse_bool(key, value);
  else if (key == "decision_limit")
    options.decision_limit = parse_number<std::uint64_t>(key, value);
  else if (key == "break_window")
    options.break_window = parse_number<std::uint64_t>(key, value);
  else if (key == "break_size")
    options.break_size = parse_number<std::uint64_t>(key, value);
  else if (key == "record_every")
    options.record_every = parse_number<std::uint64_t>(key, value);
  else if (key == "initial") options.initial = value;
  else if (key == "ratio") options.ratio = parse_number<double>(key, value);
  else
    throw ConfigError("unknown config key '" + key + "'");
}

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

// Plain `key = value` lines; '#' starts a comment.
void load_config_file(RunOptions& options, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_number) +
                        ": expected 'key = value'");
    apply_config_entry(options, trim(content.substr(0, eq)),
                       trim(content.substr(eq + 1)));
  }
}

void load_manifest_config(RunOptions& options, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest " + path);
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw ConfigError("manifest " + path + ": " + e.what());
  }
  if (!manifest.contains("config") || !manifest["config"].is_object())
    throw ConfigError("manifest " + path + " has no config object");
  for (const auto& [key, value] : manifest["config"].items())
    apply_config_entry(options, key, value.get<std::string>());
}

// ---------------------------------------------------------------------------
// Resolution of options into an EvolutionConfig plus the exact echo that
// reproduces the run.

struct ResolvedRun {
  EvolutionConfig config;
  Metric summary_metric = Metric::decisions;  // last stage's metric
  std::uint64_t total_generations = 0;
  std::map<std::string, std::string> echo;
};

BranchHeuristic parse_heuristic(const std::string& name) {
  if (name == "static") return BranchHeuristic::static_min_index;
  if (name == "jw") return BranchHeuristic::jeroslow_wang;
  if (name == "random") return BranchHeuristic::random_order;
  throw ConfigError("unknown heuristic '" + name +
                    "' (expected static|jw|random)");
}

Metric parse_metric(const std::string& name) {
  if (name == "propagations") return Metric::propagations;
  if (name == "decisions") return Metric::decisions;
  throw ConfigError("unknown metric '" + name +
                    "' (expected propagations|decisions)");
}

ResolvedRun resolve_run(const RunOptions& options) {
  ResolvedRun run;
  const bool two_stage = options.preset == "two-stage-unsat";
  if (!two_stage && options.preset != "fig1")
    throw ConfigError("unknown preset '" + options.preset +
                      "' (expected fig1|two-stage-unsat)");

  int n = options.n.value_or(50);
  const int k = options.k.value_or(3);
  const std::uint64_t seed = options.seed.value_or(1);

  EvolutionConfig& config = run.config;
  std::uint64_t m;
  if (options.initial) {
    // An imported formula fixes n and m; k only matters for generation.
    CnfFormula imported = load_dimacs_file(*options.initial);
    n = imported.num_variables;
    m = imported.num_clauses();
    config.initial = std::move(imported);
  } else {
    if (n < 1) throw ConfigError("n must be positive");
    if (k < 1 || k > n) throw ConfigError("k must be in [1, n]");
    if (options.m) {
      m = *options.m;
    } else if (two_stage) {
      m = initial_ratio_for_unsat(n, k, options.ratio);
    } else {
      m = 100;
    }
    RandomFormulaSpec spec;
    spec.num_variables = n;
    spec.num_clauses = m;
    spec.clause_width = k;
    spec.seed = seed;
    config.initial = spec;
  }

  config.seed = seed;
  config.solver.heuristic =
      parse_heuristic(options.heuristic.value_or("static"));
  config.solver.first_phase = options.first_phase.value_or(true);
  config.solver.decision_limit =
      options.decision_limit.value_or(kDefaultEvolutionDecisionLimit);
  if (config.solver.heuristic == BranchHeuristic::random_order)
    config.solver.random_seed = seed ^ 0x9e3779b97f4a7c15ULL;

  const ClauseSelection selection = options.weight_biased.value_or(false)
                                        ? ClauseSelection::weight_biased
                                        : ClauseSelection::uniform;

  Metric metric;
  std::uint64_t stage1 = 0, stage2 = 0, single = 0;
  if (two_stage) {
    metric = parse_metric(options.metric.value_or("decisions"));
    stage1 = options.stage1_generations.value_or(10 * m);
    stage2 = options.stage2_generations.value_or(10000);
    StagePlan removal;
    removal.op = TransitionOperator::remove_clause();
    removal.criterion = {ScoreRule::always, StatusConstraint::must_be_unsat};
    removal.metric = metric;
    removal.generations = stage1;
    removal.clause_selection = selection;
    StagePlan replacement;
    replacement.op = TransitionOperator::replace_clause();
    replacement.criterion = {ScoreRule::non_decreasing,
                             StatusConstraint::must_be_unsat};
    replacement.metric = metric;
    replacement.generations = stage2;
    replacement.clause_selection = selection;
    config.stages = {removal, replacement};
    run.total_generations = stage1 + stage2;
  } else {
    metric = parse_metric(options.metric.value_or("propagations"));
    single = options.generations.value_or(100000);
    StagePlan plan;
    plan.op = TransitionOperator::replace_clause();
    plan.criterion = {ScoreRule::non_decreasing, StatusConstraint::none};
    plan.metric = metric;
    plan.generations = single;
    plan.clause_selection = selection;
    config.stages = {plan};
    run.total_generations = single;
  }
  run.summary_metric = metric;

  const std::uint64_t break_window = options.break_window.value_or(0);
  if (break_window > 0) config.break_window = break_window;
  config.break_size = options.break_size.value_or(3);

  std::uint64_t record_every = options.record_every.value_or(0);
  if (record_every == 0)
    record_every = std::max<std::uint64_t>(1, run.total_generations / 10000);
  config.record_every = record_every;

  run.echo["preset"] = options.preset;
  run.echo["n"] = std::to_string(n);
  run.echo["m"] = std::to_string(m);
  run.echo["k"] = std::to_string(k);
  run.echo["seed"] = std::to_string(seed);
  if (two_stage) {
    run.echo["stage1_generations"] = std::to_string(stage1);
    run.echo["stage2_generations"] = std::to_string(stage2);
  } else {
    run.echo["generations"] = std::to_string(single);
  }
  run.echo["metric"] = to_string(metric);
  run.echo["heuristic"] = options.heuristic.value_or("static");
  run.echo["first_phase"] =
      config.solver.first_phase ? "true" : "false";
  run.echo["weight_biased"] =
      selection == ClauseSelection::weight_biased ? "true" : "false";
  run.echo["decision_limit"] = std::to_string(*config.solver.decision_limit);
  run.echo["break_window"] = std::to_string(break_window);
  run.echo["break_size"] = std::to_string(config.break_size);
  run.echo["record_every"] = std::to_string(record_every);
  if (options.initial) run.echo["initial"] = *options.initial;
  if (options.ratio) run.echo["ratio"] = std::to_string(*options.ratio);
  return run;
}

// ---------------------------------------------------------------------------
// evolve / batch execution

json stats_to_json(const SolveStats& stats) {
  return json{{"status", to_string(stats.status)},
              {"decisions", stats.decisions},
              {"propagations", stats.propagations}};
}

// Writes sampled rows as they are produced so interrupted runs keep a
// usable trace prefix.
class StreamingTraceSink : public TraceSink {
 public:
  explicit StreamingTraceSink(std::ostream& out) : out_(out) {}

  void on_record(const GenerationRecord& record, const CnfFormula&) override {
    write_trace_csv_row(out_, record);
    if (++rows_ % 1000 == 0) out_.flush();
  }

 private:
  std::ostream& out_;
  std::size_t rows_ = 0;
};

struct EvolveOutcome {
  EvolutionResult result;
  ResolvedRun run;
  std::filesystem::path manifest_path;
};

EvolveOutcome run_evolution_to_dir(const RunOptions& options,
                                   const std::filesystem::path& out_dir) {
  ResolvedRun run = resolve_run(options);
  std::filesystem::create_directories(out_dir);

  const std::string started = iso8601_now();
  const auto trace_path = out_dir / "trace.csv";
  std::ofstream trace_out(trace_path, std::ios::binary);
  if (!trace_out)
    throw std::runtime_error("cannot open " + trace_path.string());
  write_trace_csv_header(trace_out, RandomStream::kAlgorithmId);
  StreamingTraceSink sink(trace_out);

  EvolutionResult result = evolve(run.config, &sink);
  trace_out.flush();
  const std::string finished = iso8601_now();

  const auto initial_path = out_dir / "initial.cnf";
  const auto final_path = out_dir / "final.cnf";
  const auto best_path = out_dir / "best.cnf";
  save_dimacs_file(result.initial_formula, initial_path.string());
  save_dimacs_file(result.final_formula, final_path.string());
  save_dimacs_file(result.best.formula, best_path.string());

  json manifest;
  manifest["artifact"] = {{"name", "satevo"}, {"version", kVersion}};
  manifest["rng_algorithm"] = RandomStream::kAlgorithmId;
  manifest["started_at"] = started;
  manifest["finished_at"] = finished;
  manifest["config"] = run.echo;
  manifest["initial"] = stats_to_json(result.initial_stats);
  manifest["final"] = stats_to_json(result.final_stats);
  manifest["best"] = stats_to_json(result.best.stats);
  manifest["best"]["score"] = result.best.score;
  manifest["files"] = {{"trace", "trace.csv"},
                       {"initial", "initial.cnf"},
                       {"final", "final.cnf"},
                       {"best", "best.cnf"}};

  const auto manifest_path = out_dir / "manifest.json";
  std::ofstream manifest_out(manifest_path, std::ios::binary);
  manifest_out << manifest.dump(2) << '\n';

  EvolveOutcome outcome;
  outcome.result = std::move(result);
  outcome.run = std::move(run);
  outcome.manifest_path = manifest_path;
  return outcome;
}

// ---------------------------------------------------------------------------
// Subcommand wiring

struct CliOptions {
  // gen
  int gen_n = 50;
  std::uint64_t gen_m = 100;
  int gen_k = 3;
  std::uint64_t gen_seed = 1;
  std::string gen_output;

  // solve
  std::string solve_input;
  std::string solve_heuristic = "static";
  std::uint64_t solve_seed = 1;
  bool solve_negative_first = false;
  std::uint64_t solve_decision_limit = 0;
  bool solve_quiet = false;
  bool solve_machine = false;

  // evolve/batch shared
  RunOptions run;
  std::string config_path;
  std::string manifest_path;
  std::string out_dir;

  // batch
  std::uint64_t batch_runs = 20;
  unsigned batch_workers = 1;

  // crosscheck
  std::string cross_initial;
  std::string cross_final;
  std::string cross_solver;
  std::vector<std::string> cross_args;
  std::vector<std::string> cross_stats;
  double cross_timeout = 60.0;
};

int cmd_gen(const CliOptions& options) {
  RandomFormulaSpec spec;
  spec.num_variables = options.gen_n;
  spec.num_clauses = options.gen_m;
  spec.clause_width = options.gen_k;
  spec.seed = options.gen_seed;
  const CnfFormula formula = generate_random_kcnf(spec);
  if (options.gen_output.empty() || options.gen_output == "-") {
    write_dimacs(formula, std::cout);
  } else {
    save_dimacs_file(formula, options.gen_output);
  }
  return 0;
}

int cmd_solve(const CliOptions& options) {
  const CnfFormula formula = load_dimacs_file(options.solve_input);
  SolverConfig config;
  config.heuristic = parse_heuristic(options.solve_heuristic);
  config.first_phase = !options.solve_negative_first;
  if (options.solve_decision_limit > 0)
    config.decision_limit = options.solve_decision_limit;
  if (config.heuristic == BranchHeuristic::random_order)
    config.random_seed = options.solve_seed;
  const SolveStats stats = solve(formula, config);

  if (options.solve_machine) {
    std::cout << stats_to_json(stats).dump() << '\n';
  } else if (!options.solve_quiet) {
    switch (stats.status) {
      case SolveStatus::sat: std::cout << "s SATISFIABLE\n"; break;
      case SolveStatus::unsat: std::cout << "s UNSATISFIABLE\n"; break;
      case SolveStatus::limit_exceeded: std::cout << "s UNKNOWN\n"; break;
    }
    std::cout << "c decisions " << stats.decisions << '\n'
              << "c propagations " << stats.propagations << '\n';
  }
  if (stats.status == SolveStatus::sat) return kExitSat;
  if (stats.status == SolveStatus::unsat) return kExitUnsat;
  return 0;
}

int cmd_evolve(const CliOptions& options) {
  const EvolveOutcome outcome =
      run_evolution_to_dir(options.run, options.out_dir);
  const Metric metric = outcome.run.summary_metric;
  std::cout << "initial " << to_string(metric) << " "
            << metric_value(outcome.result.initial_stats, metric) << '\n'
            << "final " << to_string(metric) << " "
            << metric_value(outcome.result.final_stats, metric) << '\n'
            << "best " << to_string(metric) << " " << outcome.result.best.score
            << '\n'
            << "outputs in " << options.out_dir << '\n';
  return 0;
}

int cmd_batch(const CliOptions& options) {
  const std::uint64_t base_seed =
      options.run.seed.value_or(1);
  const std::filesystem::path out_dir(options.out_dir);
  std::filesystem::create_directories(out_dir);

  struct RunRow {
    std::uint64_t seed = 0;
    std::uint64_t initial_score = 0;
    std::uint64_t final_score = 0;
    std::uint64_t best_score = 0;
    bool ok = false;
    std::string error;
  };
  std::vector<RunRow> rows(options.batch_runs);

  std::atomic<std::uint64_t> next(0);
  auto worker = [&]() {
    for (;;) {
      const std::uint64_t index = next.fetch_add(1);
      if (index >= options.batch_runs) return;
      RunOptions run_options = options.run;
      run_options.seed = base_seed + index;
      RunRow& row = rows[index];
      row.seed = *run_options.seed;
      char suffix[16];
      std::snprintf(suffix, sizeof suffix, "run-%03llu",
                    static_cast<unsigned long long>(index));
      try {
        const EvolveOutcome outcome =
            run_evolution_to_dir(run_options, out_dir / suffix);
        const Metric metric = outcome.run.summary_metric;
        row.initial_score =
            metric_value(outcome.result.initial_stats, metric);
        row.final_score = metric_value(outcome.result.final_stats, metric);
        row.best_score = outcome.result.best.score;
        row.ok = true;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  };

  const unsigned workers = std::max(1u, options.batch_workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (std::thread& thread : pool) thread.join();
  }

  const auto summary_path = out_dir / "summary.csv";
  std::ofstream summary(summary_path, std::ios::binary);
  summary << "seed,initial_score,final_score,best_score\n";
  std::size_t failures = 0;
  for (const RunRow& row : rows) {
    if (!row.ok) {
      ++failures;
      std::cerr << "run with seed " << row.seed << " failed: " << row.error
                << '\n';
      continue;
    }
    summary << row.seed << ',' << row.initial_score << ',' << row.final_score
            << ',' << row.best_score << '\n';
  }
  summary.close();
  if (failures > 0) {
    std::ofstream log(out_dir / "failures.log", std::ios::binary);
    for (const RunRow& row : rows)
      if (!row.ok) log << row.seed << ": " << row.error << '\n';
  }
  std::cout << (options.batch_runs - failures) << "/" << options.batch_runs
            << " runs succeeded; summary in " << summary_path.string()
            << '\n';
  return failures == options.batch_runs ? kExitRuntime : 0;
}

int cmd_crosscheck(const CliOptions& options) {
  ExternalSolverSpec spec;
  spec.executable = options.cross_solver;
  spec.extra_args = options.cross_args;
  spec.timeout_seconds = options.cross_timeout;
  for (const std::string& entry : options.cross_stats) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--stat expects name=pattern, got '" + entry + "'");
    spec.stat_patterns[entry.substr(0, eq)] = entry.substr(eq + 1);
  }
  if (spec.stat_patterns.empty()) {
    spec.stat_patterns["decisions"] = "c decisions";
    spec.stat_patterns["propagations"] = "c propagations";
  }

  const CnfFormula initial = load_dimacs_file(options.cross_initial);
  const CnfFormula final_formula = load_dimacs_file(options.cross_final);
  const TransferReport report =
      transfer_report(initial, final_formula, spec);

  for (const std::string& warning : report.initial_run.warnings)
    std::cerr << "warning (initial): " << warning << '\n';
  for (const std::string& warning : report.final_run.warnings)
    std::cerr << "warning (final): " << warning << '\n';

  std::cout << "initial status " << to_string(report.initial_run.status)
            << '\n';
  for (const auto& [name, value] : report.initial_run.counters)
    std::cout << "initial " << name << " " << value << '\n';
  std::cout << "final status " << to_string(report.final_run.status) << '\n';
  for (const auto& [name, value] : report.final_run.counters)
    std::cout << "final " << name << " " << value << '\n';
  for (const auto& [name, ratio] : report.ratios)
    std::cout << "ratio " << name << " " << ratio << '\n';
  return 0;
}

// Explicit command-line flags win over config-file and manifest values.
void overlay_flags(RunOptions& merged, const RunOptions& flags,
                   bool preset_given) {
  if (preset_given) merged.preset = flags.preset;
  if (flags.n) merged.n = flags.n;
  if (flags.m) merged.m = flags.m;
  if (flags.k) merged.k = flags.k;
  if (flags.seed) merged.seed = flags.seed;
  if (flags.generations) merged.generations = flags.generations;
  if (flags.stage1_generations)
    merged.stage1_generations = flags.stage1_generations;
  if (flags.stage2_generations)
    merged.stage2_generations = flags.stage2_generations;
  if (flags.metric) merged.metric = flags.metric;
  if (flags.heuristic) merged.heuristic = flags.heuristic;
  if (flags.first_phase) merged.first_phase = flags.first_phase;
  if (flags.weight_biased) merged.weight_biased = flags.weight_biased;
  if (flags.decision_limit) merged.decision_limit = flags.decision_limit;
  if (flags.break_window) merged.break_window = flags.break_window;
  if (flags.break_size) merged.break_size = flags.break_size;
  if (flags.record_every) merged.record_every = flags.record_every;
  if (flags.initial) merged.initial = flags.initial;
  if (flags.ratio) merged.ratio = flags.ratio;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evolves k-CNF SAT instances toward hardness by local search"};
  app.require_subcommand(1);
  CliOptions options;

  CLI::App* gen = app.add_subcommand("gen", "generate a random k-CNF file");
  gen->add_option("-n,--vars", options.gen_n, "variable count")->required();
  gen->add_option("-m,--clauses", options.gen_m, "clause count")->required();
  gen->add_option("-k,--width", options.gen_k, "clause width")->capture_default_str();
  gen->add_option("--seed", options.gen_seed, "generator seed")
      ->capture_default_str();
  gen->add_option("-o,--output", options.gen_output,
                  "output path (default stdout)");

  CLI::App* solve_cmd =
      app.add_subcommand("solve", "solve a DIMACS file and report counters");
  solve_cmd->add_option("input", options.solve_input, "DIMACS file")
      ->required();
  solve_cmd->add_option("--heuristic", options.solve_heuristic,
                        "static|jw|random")->capture_default_str();
  solve_cmd->add_option("--seed", options.solve_seed,
                        "seed for the random heuristic")
      ->capture_default_str();
  solve_cmd->add_flag("--negative-first", options.solve_negative_first,
                      "try the negative phase first at decisions");
  solve_cmd->add_option("--decision-limit", options.solve_decision_limit,
                        "abort after this many decisions (0 = unlimited)")->capture_default_str();
  solve_cmd->add_flag("-q,--quiet", options.solve_quiet,
                      "no output; exit code 10/20 carries the verdict");
  solve_cmd->add_flag("--machine", options.solve_machine,
                      "emit one JSON record instead of text");

  auto add_run_flags = [&options](CLI::App* cmd) {
    cmd->add_option("--preset", options.run.preset,
                    "fig1 | two-stage-unsat")->capture_default_str();
    cmd->add_option("--config", options.config_path,
                    "key = value config file");
    cmd->add_option("-n,--vars", options.run.n, "variable count");
    cmd->add_option("-m,--clauses", options.run.m, "initial clause count");
    cmd->add_option("-k,--width", options.run.k, "clause width");
    cmd->add_option("--seed", options.run.seed, "run seed");
    cmd->add_option("--generations", options.run.generations,
                    "single-stage generation budget");
    cmd->add_option("--stage1-generations", options.run.stage1_generations,
                    "stage-1 budget (default 10*m)");
    cmd->add_option("--stage2-generations", options.run.stage2_generations,
                    "stage-2 budget");
    cmd->add_option("--metric", options.run.metric,
                    "propagations | decisions");
    cmd->add_option("--heuristic", options.run.heuristic,
                    "static | jw | random");
    cmd->add_option("--first-phase", options.run.first_phase,
                    "phase tried first at decisions");
    cmd->add_option("--weight-biased", options.run.weight_biased,
                    "bias clause selection by variable weights");
    cmd->add_option("--decision-limit", options.run.decision_limit,
                    "per-solve decision budget");
    cmd->add_option("--break-window", options.run.break_window,
                    "generations without improvement before a break (0 off)");
    cmd->add_option("--break-size", options.run.break_size,
                    "clauses replaced by a break");
    cmd->add_option("--record-every", options.run.record_every,
                    "trace sampling stride (0 = auto)");
    cmd->add_option("--initial", options.run.initial,
                    "DIMACS file used as the initial formula");
    cmd->add_option("--ratio", options.run.ratio,
                    "initial clause/variable ratio for two-stage runs");
    cmd->add_option("-o,--out", options.out_dir, "output directory")
        ->required();
  };

  CLI::App* evolve_cmd =
      app.add_subcommand("evolve", "run one evolution and emit its artifacts");
  add_run_flags(evolve_cmd);
  evolve_cmd->add_option("--from-manifest", options.manifest_path,
                         "re-run the config echoed in a manifest");

  CLI::App* batch_cmd = app.add_subcommand(
      "batch", "run independent evolutions and summarize them");
  add_run_flags(batch_cmd);
  batch_cmd->add_option("--runs", options.batch_runs, "number of runs")->capture_default_str();
  batch_cmd->add_option("--workers", options.batch_workers,
                        "parallel workers")->capture_default_str();

  CLI::App* cross = app.add_subcommand(
      "crosscheck", "measure two formulas with an external solver");
  cross->add_option("initial", options.cross_initial, "initial DIMACS file")
      ->required();
  cross->add_option("final", options.cross_final, "final DIMACS file")
      ->required();
  cross->add_option("--solver", options.cross_solver, "solver executable")
      ->required();
  cross->add_option("--arg", options.cross_args,
                    "extra solver argument (repeatable)");
  cross->add_option("--stat", options.cross_stats,
                    "counter as name=pattern (repeatable)");
  cross->add_option("--timeout", options.cross_timeout,
                    "solver timeout in seconds")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // 0 for --help/--version, otherwise the documented usage-error code.
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(options);
    if (solve_cmd->parsed()) return cmd_solve(options);
    if (evolve_cmd->parsed()) {
      // Precedence: manifest echo, then config file, then explicit flags.
      if (!options.manifest_path.empty() || !options.config_path.empty()) {
        RunOptions base;
        if (!options.manifest_path.empty())
          load_manifest_config(base, options.manifest_path);
        if (!options.config_path.empty())
          load_config_file(base, options.config_path);
        overlay_flags(base, options.run, evolve_cmd->count("--preset") > 0);
        options.run = base;
      }
      return cmd_evolve(options);
    }
    if (batch_cmd->parsed()) {
      if (!options.config_path.empty()) {
        RunOptions base;
        load_config_file(base, options.config_path);
        overlay_flags(base, options.run, batch_cmd->count("--preset") > 0);
        options.run = base;
      }
      return cmd_batch(options);
    }
    if (cross->parsed()) return cmd_crosscheck(options);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DimacsParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
