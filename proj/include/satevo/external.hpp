#pragma once

#include <cctype>
#include <cerrno>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "satevo/cnf.hpp"
#include "satevo/dimacs.hpp"
#include "satevo/dpll.hpp"

namespace satevo {

/// How to invoke a DIMACS-speaking solver executable and how to read its
/// statistics. Each stat pattern is matched against output lines; the first
/// integer after the match becomes that counter.
struct ExternalSolverSpec {
  std::string executable;
  std::vector<std::string> extra_args;
  std::map<std::string, std::string> stat_patterns;
  double timeout_seconds = 60.0;
};

struct ExternalRunResult {
  SolveStatus status = SolveStatus::sat;
  std::map<std::string, std::int64_t> counters;
  std::string raw_output;
  double elapsed_seconds = 0.0;
  std::vector<std::string> warnings;  // one per unmatched stat pattern
};

/// Process failure, timeout, or output from which no SAT/UNSAT verdict can
/// be derived; carries whatever output was captured.
class ExternalSolverError : public std::runtime_error {
 public:
  ExternalSolverError(const std::string& message, std::string output)
      : std::runtime_error(message), output_(std::move(output)) {}

  const std::string& output() const { return output_; }

 private:
  std::string output_;
};

namespace detail {

struct ProcessResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string output;
};

// fork/exec with stdout capture and a kill-on-deadline timeout.
inline ProcessResult run_process(const std::string& executable,
                                 const std::vector<std::string>& args,
                                 double timeout_seconds) {
  int pipe_fds[2];
  if (pipe(pipe_fds) != 0)
    throw ExternalSolverError("pipe() failed: " +
                                  std::string(std::strerror(errno)),
                              "");
  const pid_t pid = fork();
  if (pid < 0) {
    close(pipe_fds[0]);
    close(pipe_fds[1]);
    throw ExternalSolverError("fork() failed: " +
                                  std::string(std::strerror(errno)),
                              "");
  }
  if (pid == 0) {
    close(pipe_fds[0]);
    dup2(pipe_fds[1], STDOUT_FILENO);
    close(pipe_fds[1]);
    std::vector<char*> argv;
    argv.push_back(const_cast<char*>(executable.c_str()));
    for (const std::string& arg : args)
      argv.push_back(const_cast<char*>(arg.c_str()));
    argv.push_back(nullptr);
    execvp(executable.c_str(), argv.data());
    std::fprintf(stderr, "exec %s failed: %s\n", executable.c_str(),
                 std::strerror(errno));
    _exit(127);
  }

  close(pipe_fds[1]);
  ProcessResult result;
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration<double>(timeout_seconds);
  char buffer[4096];
  bool open = true;
  while (open) {
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      result.timed_out = true;
      kill(pid, SIGKILL);
      break;
    }
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
    pollfd pfd{pipe_fds[0], POLLIN, 0};
    const int ready =
        poll(&pfd, 1, static_cast<int>(remaining.count()) + 1);
    if (ready <= 0) continue;
    const ssize_t n = read(pipe_fds[0], buffer, sizeof buffer);
    if (n > 0)
      result.output.append(buffer, static_cast<std::size_t>(n));
    else
      open = false;
  }
  close(pipe_fds[0]);

  int wait_status = 0;
  waitpid(pid, &wait_status, 0);
  if (WIFEXITED(wait_status))
    result.exit_code = WEXITSTATUS(wait_status);
  return result;
}

inline std::optional<std::int64_t> first_integer_after(
    const std::string& line, std::size_t from) {
  for (std::size_t i = from; i < line.size(); ++i) {
    const bool digit = std::isdigit(static_cast<unsigned char>(line[i]));
    const bool signed_digit =
        line[i] == '-' && i + 1 < line.size() &&
        std::isdigit(static_cast<unsigned char>(line[i + 1]));
    if (digit || signed_digit) {
      try {
        return std::stoll(line.substr(i));
      } catch (const std::exception&) {
        return std::nullopt;
      }
    }
  }
  return std::nullopt;
}

class TempDimacsFile {
 public:
  explicit TempDimacsFile(const CnfFormula& formula) {
    const auto dir = std::filesystem::temp_directory_path();
    std::string name = (dir / "satevo-XXXXXX").string();
    const int fd = mkstemp(name.data());
    if (fd < 0)
      throw ExternalSolverError("mkstemp failed: " +
                                    std::string(std::strerror(errno)),
                                "");
    close(fd);
    path_ = name;
    std::ofstream out(path_, std::ios::binary);
    write_dimacs(formula, out);
  }

  ~TempDimacsFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }

  TempDimacsFile(const TempDimacsFile&) = delete;
  TempDimacsFile& operator=(const TempDimacsFile&) = delete;

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace detail

/// Writes the formula to a temporary DIMACS file, invokes the solver as
/// `<executable> [extra_args...] <file>`, and parses the verdict from an
/// "s SATISFIABLE"/"s UNSATISFIABLE" line, falling back to the exit-code
/// convention 10/20. Configured counters that match no output line are
/// reported as warnings, not errors.
inline ExternalRunResult run_external(const CnfFormula& formula,
                                      const ExternalSolverSpec& spec) {
  if (spec.stat_patterns.empty())
    throw std::invalid_argument(
        "external solver spec needs at least one stat pattern");
  if (spec.timeout_seconds <= 0)
    throw std::invalid_argument("external solver timeout must be positive");
  detail::TempDimacsFile file(formula);
  std::vector<std::string> args = spec.extra_args;
  args.push_back(file.path());

  const auto start = std::chrono::steady_clock::now();
  const detail::ProcessResult process =
      detail::run_process(spec.executable, args, spec.timeout_seconds);
  const auto end = std::chrono::steady_clock::now();

  if (process.timed_out)
    throw ExternalSolverError("external solver timed out after " +
                                  std::to_string(spec.timeout_seconds) +
                                  "s",
                              process.output);
  if (process.exit_code == 127)
    throw ExternalSolverError("external solver could not be executed: " +
                                  spec.executable,
                              process.output);

  ExternalRunResult result;
  result.raw_output = process.output;
  result.elapsed_seconds =
      std::chrono::duration<double>(end - start).count();

  std::optional<SolveStatus> status;
  std::vector<std::string> lines;
  {
    std::istringstream in(process.output);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
  }
  for (const std::string& line : lines) {
    if (line.rfind("s SATISFIABLE", 0) == 0) status = SolveStatus::sat;
    if (line.rfind("s UNSATISFIABLE", 0) == 0) status = SolveStatus::unsat;
  }
  if (!status) {
    if (process.exit_code == 10) status = SolveStatus::sat;
    if (process.exit_code == 20) status = SolveStatus::unsat;
  }
  if (!status)
    throw ExternalSolverError(
        "external solver produced no SAT/UNSAT verdict (exit code " +
            std::to_string(process.exit_code) + ")",
        process.output);
  result.status = *status;

  for (const auto& [name, pattern] : spec.stat_patterns) {
    std::optional<std::int64_t> value;
    for (const std::string& line : lines) {
      const auto pos = line.find(pattern);
      if (pos == std::string::npos) continue;
      value = detail::first_integer_after(line, pos + pattern.size());
      if (value) break;
    }
    if (value)
      result.counters[name] = *value;
    else
      result.warnings.push_back("no output line matched counter '" + name +
                                "' (pattern '" + pattern + "')");
  }
  return result;
}

/// Before/after measurement of the same solver on two formulas, with the
/// per-counter ratio final/initial where both sides were extracted.
struct TransferReport {
  ExternalRunResult initial_run;
  ExternalRunResult final_run;
  std::map<std::string, double> ratios;
};

inline TransferReport transfer_report(const CnfFormula& initial,
                                      const CnfFormula& final_formula,
                                      const ExternalSolverSpec& spec) {
  TransferReport report;
  report.initial_run = run_external(initial, spec);
  report.final_run = run_external(final_formula, spec);
  for (const auto& [name, initial_value] : report.initial_run.counters) {
    const auto it = report.final_run.counters.find(name);
    if (it == report.final_run.counters.end()) continue;
    if (initial_value == 0 && it->second == 0)
      report.ratios[name] = 1.0;
    else
      report.ratios[name] = static_cast<double>(it->second) /
                            static_cast<double>(initial_value);
  }
  return report;
}

}  // namespace satevo
